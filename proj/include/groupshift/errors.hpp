#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace groupshift {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input: bad words, mismatched supports, failed preconditions.
/// CLI maps these to exit code 2.
class spec_error : public error {
public:
    using error::error;
};

class unknown_generator_error : public spec_error {
public:
    explicit unknown_generator_error(const std::string& word)
        : spec_error("unknown generator in word: \"" + word + "\""), word_(word) {}
    const std::string& word() const { return word_; }

private:
    std::string word_;
};

class support_mismatch_error : public spec_error {
public:
    using spec_error::spec_error;
};

class embedding_not_injective_error : public spec_error {
public:
    using spec_error::spec_error;
};

class coset_check_failed_error : public spec_error {
public:
    using spec_error::spec_error;
};

class memory_too_small_error : public spec_error {
public:
    using spec_error::spec_error;
};

class pattern_not_in_table_error : public spec_error {
public:
    using spec_error::spec_error;
};

class no_completion_error : public spec_error {
public:
    using spec_error::spec_error;
};

/// A configured budget (nodes, ball size, pattern count, ...) was exceeded.
/// CLI maps this to exit code 3. Budgets fail loudly, never truncate silently.
class resource_limit_error : public error {
public:
    using error::error;
};

/// An iterative numeric routine failed to reach its tolerance. Exit code 4.
class non_convergence_error : public error {
public:
    using error::error;
};

/// Explicit resource budgets threaded through search and enumeration calls.
struct Budget {
    std::uint64_t nodes = 200'000'000;     // backtracking node visits
    std::uint64_t max_patterns = 5'000'000; // enumerated patterns kept in memory
    std::uint64_t ball_elements = 2'000'000;
    int jobs = 1;

    void charge_nodes(std::uint64_t& used, std::uint64_t amount = 1) const {
        used += amount;
        if (used > nodes) {
            throw resource_limit_error("node budget exceeded (" + std::to_string(nodes) + ")");
        }
    }
};

} // namespace groupshift
