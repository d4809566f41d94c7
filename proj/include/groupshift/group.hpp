#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "groupshift/errors.hpp"
#include "groupshift/subprocess_oracle.hpp"

namespace groupshift {

/// A word over the generator alphabet, as generator indices.
using Word = std::vector<std::int16_t>;

class Group;

// ---------------------------------------------------------------------------
// Word-problem oracles
// ---------------------------------------------------------------------------
//
// Each oracle is a total decision procedure on words over the group's
// generators: it accepts exactly the words representing the identity. The
// built-in set covers free abelian groups, finite cyclic groups, direct
// products, polycyclic examples via Z^d x| Z, and the lamplighter group.
// Arbitrary user oracles plug in through the subprocess protocol.

struct FreeAbelianOracle {
    int rank = 1; // generators laid out as a, a^-1, b, b^-1, ...
};

struct FiniteCyclicOracle {
    long long modulus = 2; // generators g, g^-1
};

struct SemidirectOracle {
    // Z^rank x| Z with the automorphism v -> v * matrix (row-vector action);
    // row i of `matrix` is the image of the i-th basis vector under
    // conjugation by t. Generators: a, a^-1, ..., then t, t^-1.
    int rank = 1;
    std::vector<std::vector<long long>> matrix;
    std::vector<std::vector<long long>> inverse_matrix; // filled at build time
};

struct LamplighterOracle {
    // (Z/2) wr Z. Generators: a (the lamp at the cursor, an involution),
    // t, t^-1 (the cursor shift).
};

struct DirectProductOracle {
    std::shared_ptr<const Group> left;
    std::shared_ptr<const Group> right;
};

struct SubprocessOracle {
    std::vector<std::string> command;
    std::shared_ptr<SubprocessWordProblem> client; // lazily created, shared
};

using OracleSpec = std::variant<FreeAbelianOracle, FiniteCyclicOracle, SemidirectOracle,
                                LamplighterOracle, DirectProductOracle, SubprocessOracle>;

/// Declarative description of a finitely generated group: generator names
/// (closed under formal inverses; declaration order fixes shortlex order),
/// the word-problem oracle, and an optional relator list used by
/// presentation-driven constructions.
struct GroupSpec {
    std::string name;
    std::vector<std::string> generators;
    std::vector<int> inverse; // inverse[i] = index of the formal inverse of generator i
    OracleSpec oracle;
    std::vector<std::string> relators;
    std::string fingerprint; // structural identity, filled by Group's constructor
};

/// A group element as its canonical (shortlex-least) word. Two elements are
/// equal iff their canonical words are identical; the identity is the empty
/// word. Ordering is shortlex with ties broken by generator declaration order.
class Element {
public:
    Element() = default;
    explicit Element(Word w) : word_(std::move(w)) {}

    const Word& word() const { return word_; }
    std::size_t length() const { return word_.size(); }
    bool is_identity() const { return word_.empty(); }

    friend bool operator==(const Element& a, const Element& b) { return a.word_ == b.word_; }
    friend bool operator!=(const Element& a, const Element& b) { return !(a == b); }
    friend bool operator<(const Element& a, const Element& b) {
        if (a.word_.size() != b.word_.size()) return a.word_.size() < b.word_.size();
        return a.word_ < b.word_;
    }
    friend bool operator<=(const Element& a, const Element& b) { return !(b < a); }
    friend bool operator>(const Element& a, const Element& b) { return b < a; }

private:
    Word word_;
};

struct ElementHash {
    std::size_t operator()(const Element& e) const {
        std::size_t h = 1469598103934665603ull;
        for (auto x : e.word()) {
            h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        }
        return h;
    }
};

/// Cayley ball of a given radius: all distinct elements of word length <= n,
/// in shortlex order. Balls are nested and prefix-consistent.
struct Ball {
    int radius = 0;
    std::vector<Element> elements;
    std::size_t size() const { return elements.size(); }
};

// ---------------------------------------------------------------------------
// Group: immutable spec plus an internally synchronized canonicalization
// cache, so the public operations behave as pure functions.
// ---------------------------------------------------------------------------
class Group {
public:
    explicit Group(GroupSpec spec)
        : spec_(make_validated(std::move(spec))), cache_(std::make_shared<Cache>()) {}

    const GroupSpec& spec() const { return *spec_; }
    const std::string& name() const { return spec_->name; }
    int generator_count() const { return static_cast<int>(spec_->generators.size()); }
    const std::string& generator_name(int i) const { return spec_->generators[i]; }
    int inverse_generator(int i) const { return spec_->inverse[i]; }

    bool same_group(const Group& other) const { return spec_->fingerprint == other.spec_->fingerprint; }

    int generator_index(const std::string& gen, const std::string& context_word) const {
        for (int i = 0; i < generator_count(); ++i) {
            if (spec_->generators[i] == gen) return i;
        }
        throw unknown_generator_error(context_word.empty() ? gen : context_word);
    }

    /// Parses a space-separated word; the empty string is the empty word.
    Word parse_word(const std::string& text) const {
        Word w;
        std::istringstream in(text);
        std::string tok;
        while (in >> tok) w.push_back(static_cast<std::int16_t>(generator_index(tok, text)));
        return w;
    }

    std::string word_to_string(const Word& w) const {
        std::string out;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (i) out.push_back(' ');
            out += spec_->generators[w[i]];
        }
        return out;
    }

    std::string to_string(const Element& e) const { return word_to_string(e.word()); }

    Word formal_inverse(const Word& w) const {
        Word r;
        r.reserve(w.size());
        for (std::size_t i = w.size(); i-- > 0;) {
            r.push_back(static_cast<std::int16_t>(spec_->inverse[w[i]]));
        }
        return r;
    }

    /// Decides whether the word represents the identity.
    bool wp_decide(const Word& w) const {
        for (auto g : w) {
            if (g < 0 || g >= generator_count()) {
                throw unknown_generator_error(std::string("generator index ") + std::to_string(g));
            }
        }
        return oracle_accepts(w);
    }

    bool wp_decide(const std::string& text) const { return wp_decide(parse_word(text)); }

    Element identity() const { return Element(Word{}); }

    /// Shortlex-least word equivalent to w, found by BFS over oracle-filtered
    /// words. Memoized per group.
    Element canonicalize(const Word& w, const Budget& budget = {}) const {
        Word reduced = free_reduce(w);
        if (reduced.empty()) return identity();
        std::lock_guard<std::mutex> lock(cache_->mutex);
        auto it = cache_->canonical.find(reduced);
        if (it != cache_->canonical.end()) return it->second;
        ensure_ball_locked(static_cast<int>(reduced.size()), budget);
        Word target_inverse = formal_inverse(reduced);
        for (const Element& v : cache_->ball) {
            if (v.length() > reduced.size()) break;
            Word probe = v.word();
            probe.insert(probe.end(), target_inverse.begin(), target_inverse.end());
            if (oracle_accepts(probe)) {
                cache_->canonical.emplace(std::move(reduced), v);
                return v;
            }
        }
        throw error("canonicalize: no representative found (oracle rejects the word itself)");
    }

    Element element(const std::string& text) const { return canonicalize(parse_word(text)); }

    Element multiply(const Element& x, const Element& y) const {
        if (x.is_identity()) return y;
        if (y.is_identity()) return x;
        Word w = x.word();
        w.insert(w.end(), y.word().begin(), y.word().end());
        return canonicalize(w);
    }

    Element invert(const Element& x) const { return canonicalize(formal_inverse(x.word())); }

    /// All distinct elements of word length <= n, shortlex-sorted.
    Ball ball(int n, const Budget& budget = {}) const {
        if (n < 0) throw spec_error("ball radius must be >= 0");
        std::lock_guard<std::mutex> lock(cache_->mutex);
        ensure_ball_locked(n, budget);
        Ball b;
        b.radius = n;
        for (const Element& e : cache_->ball) {
            if (static_cast<int>(e.length()) > n) break;
            b.elements.push_back(e);
        }
        return b;
    }

    std::optional<int> free_abelian_rank() const {
        if (auto* fa = std::get_if<FreeAbelianOracle>(&spec_->oracle)) return fa->rank;
        return std::nullopt;
    }

private:
    struct Cache {
        std::mutex mutex;
        std::vector<Element> ball;     // shortlex order, prefix-closed
        int ball_radius = -1;          // complete through this radius
        std::map<Word, Element> canonical;
    };

    static Word free_reduce_with(const std::vector<int>& inverse, const Word& w) {
        Word stack;
        for (auto g : w) {
            if (!stack.empty() && inverse[stack.back()] == g) {
                stack.pop_back();
            } else {
                stack.push_back(g);
            }
        }
        return stack;
    }

    Word free_reduce(const Word& w) const { return free_reduce_with(spec_->inverse, w); }

    void ensure_ball_locked(int n, const Budget& budget) const {
        Cache& c = *cache_;
        if (c.ball_radius < 0) {
            c.ball.push_back(Element(Word{}));
            c.ball_radius = 0;
        }
        while (c.ball_radius < n) {
            int k = c.ball_radius;
            std::size_t begin = 0;
            while (begin < c.ball.size() && static_cast<int>(c.ball[begin].length()) < k) ++begin;
            std::vector<Element> fresh;
            for (std::size_t i = begin; i < c.ball.size(); ++i) {
                const Element& u = c.ball[i];
                if (static_cast<int>(u.length()) != k) break;
                for (int s = 0; s < generator_count(); ++s) {
                    if (!u.word().empty() && spec_->inverse[u.word().back()] == s) continue;
                    Word cand = u.word();
                    cand.push_back(static_cast<std::int16_t>(s));
                    bool known = false;
                    for (const Element& v : c.ball) {
                        Word probe = cand;
                        Word vi = formal_inverse(v.word());
                        probe.insert(probe.end(), vi.begin(), vi.end());
                        if (oracle_accepts(probe)) {
                            known = true;
                            break;
                        }
                    }
                    if (!known) {
                        for (const Element& v : fresh) {
                            Word probe = cand;
                            Word vi = formal_inverse(v.word());
                            probe.insert(probe.end(), vi.begin(), vi.end());
                            if (oracle_accepts(probe)) {
                                known = true;
                                break;
                            }
                        }
                    }
                    if (!known) fresh.push_back(Element(std::move(cand)));
                    if (c.ball.size() + fresh.size() > budget.ball_elements) {
                        throw resource_limit_error("ball element budget exceeded at radius " +
                                                   std::to_string(k + 1));
                    }
                }
            }
            c.ball.insert(c.ball.end(), fresh.begin(), fresh.end());
            c.ball_radius = k + 1;
        }
    }

    // --- oracle evaluation ---------------------------------------------------

    bool oracle_accepts(const Word& w) const {
        return std::visit([&](const auto& o) { return accepts(o, w); }, spec_->oracle);
    }

    bool accepts(const FreeAbelianOracle& o, const Word& w) const {
        std::vector<long long> v(o.rank, 0);
        for (auto g : w) v[g / 2] += (g % 2 == 0) ? 1 : -1;
        for (auto x : v) {
            if (x != 0) return false;
        }
        return true;
    }

    bool accepts(const FiniteCyclicOracle& o, const Word& w) const {
        long long s = 0;
        for (auto g : w) s += (g % 2 == 0) ? 1 : -1;
        s %= o.modulus;
        return s == 0;
    }

    bool accepts(const SemidirectOracle& o, const Word& w) const;

    bool accepts(const LamplighterOracle&, const Word& w) const {
        // state: toggled lamp positions + cursor. gen 0 = a, 1 = t, 2 = t^-1
        std::vector<long long> lamps;
        long long pos = 0;
        for (auto g : w) {
            if (g == 0) {
                auto it = std::lower_bound(lamps.begin(), lamps.end(), pos);
                if (it != lamps.end() && *it == pos) {
                    lamps.erase(it);
                } else {
                    lamps.insert(it, pos);
                }
            } else if (g == 1) {
                ++pos;
            } else {
                --pos;
            }
        }
        return lamps.empty() && pos == 0;
    }

    bool accepts(const DirectProductOracle& o, const Word& w) const {
        int nl = o.left->generator_count();
        Word wl, wr;
        for (auto g : w) {
            if (g < nl) {
                wl.push_back(g);
            } else {
                wr.push_back(static_cast<std::int16_t>(g - nl));
            }
        }
        return o.left->wp_decide(wl) && o.right->wp_decide(wr);
    }

    bool accepts(const SubprocessOracle& o, const Word& w) const {
        return o.client->query(word_to_string(w));
    }

    static void validate_and_finish(GroupSpec& spec);

    static std::shared_ptr<const GroupSpec> make_validated(GroupSpec spec) {
        validate_and_finish(spec);
        return std::make_shared<const GroupSpec>(std::move(spec));
    }

    std::shared_ptr<const GroupSpec> spec_;
    std::shared_ptr<Cache> cache_;
};

// --- semidirect product arithmetic ------------------------------------------

namespace detail {

inline std::vector<std::vector<long long>> identity_matrix(int d) {
    std::vector<std::vector<long long>> m(d, std::vector<long long>(d, 0));
    for (int i = 0; i < d; ++i) m[i][i] = 1;
    return m;
}

inline std::vector<std::vector<long long>> mat_mul(const std::vector<std::vector<long long>>& a,
                                                   const std::vector<std::vector<long long>>& b) {
    int d = static_cast<int>(a.size());
    std::vector<std::vector<long long>> r(d, std::vector<long long>(d, 0));
    for (int i = 0; i < d; ++i) {
        for (int k = 0; k < d; ++k) {
            if (a[i][k] == 0) continue;
            for (int j = 0; j < d; ++j) r[i][j] += a[i][k] * b[k][j];
        }
    }
    return r;
}

inline long long mat_det(const std::vector<std::vector<long long>>& m) {
    int d = static_cast<int>(m.size());
    if (d == 1) return m[0][0];
    long long det = 0;
    for (int j = 0; j < d; ++j) {
        std::vector<std::vector<long long>> minor;
        for (int i = 1; i < d; ++i) {
            std::vector<long long> row;
            for (int k = 0; k < d; ++k) {
                if (k != j) row.push_back(m[i][k]);
            }
            minor.push_back(std::move(row));
        }
        long long term = m[0][j] * mat_det(minor);
        det += (j % 2 == 0) ? term : -term;
    }
    return det;
}

inline std::vector<std::vector<long long>> mat_inverse_unimodular(
    const std::vector<std::vector<long long>>& m) {
    int d = static_cast<int>(m.size());
    long long det = mat_det(m);
    if (det != 1 && det != -1) {
        throw spec_error("semidirect matrix must be unimodular (|det| = 1), got det = " +
                         std::to_string(det));
    }
    std::vector<std::vector<long long>> adj(d, std::vector<long long>(d, 0));
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            std::vector<std::vector<long long>> minor;
            for (int r = 0; r < d; ++r) {
                if (r == i) continue;
                std::vector<long long> row;
                for (int c = 0; c < d; ++c) {
                    if (c != j) row.push_back(m[r][c]);
                }
                minor.push_back(std::move(row));
            }
            long long cof = (d == 1) ? 1 : mat_det(minor);
            if ((i + j) % 2 == 1) cof = -cof;
            adj[j][i] = cof * det; // det is +-1, so dividing by det == multiplying
        }
    }
    return adj;
}

} // namespace detail

inline bool Group::accepts(const SemidirectOracle& o, const Word& w) const {
    int d = o.rank;
    std::vector<long long> v(d, 0);
    long long k = 0;
    auto P = detail::identity_matrix(d); // matrix^k, maintained incrementally
    int t_index = 2 * d;
    for (auto g : w) {
        if (g < t_index) {
            int axis = g / 2;
            long long sign = (g % 2 == 0) ? 1 : -1;
            for (int j = 0; j < d; ++j) v[j] += sign * P[axis][j];
        } else if (g == t_index) {
            ++k;
            P = detail::mat_mul(P, o.matrix);
        } else {
            --k;
            P = detail::mat_mul(P, o.inverse_matrix);
        }
    }
    if (k != 0) return false;
    for (auto x : v) {
        if (x != 0) return false;
    }
    return true;
}

inline void Group::validate_and_finish(GroupSpec& spec) {
    if (spec.generators.empty()) throw spec_error("group needs at least one generator");
    if (spec.inverse.size() != spec.generators.size()) {
        throw spec_error("generator inverse table size mismatch");
    }
    for (std::size_t i = 0; i < spec.generators.size(); ++i) {
        int j = spec.inverse[i];
        if (j < 0 || j >= static_cast<int>(spec.generators.size()) ||
            spec.inverse[j] != static_cast<int>(i)) {
            throw spec_error("generator set is not closed under formal inverses");
        }
    }
    if (auto* sd = std::get_if<SemidirectOracle>(&spec.oracle)) {
        if (static_cast<int>(sd->matrix.size()) != sd->rank) {
            throw spec_error("semidirect matrix must be rank x rank");
        }
        for (auto& row : sd->matrix) {
            if (static_cast<int>(row.size()) != sd->rank) {
                throw spec_error("semidirect matrix must be rank x rank");
            }
        }
        sd->inverse_matrix = detail::mat_inverse_unimodular(sd->matrix);
    }
    // structural fingerprint for same-group checks
    std::ostringstream fp;
    std::visit(
        [&](const auto& o) {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, FreeAbelianOracle>) {
                fp << "free-abelian:" << o.rank;
            } else if constexpr (std::is_same_v<T, FiniteCyclicOracle>) {
                fp << "finite-cyclic:" << o.modulus;
            } else if constexpr (std::is_same_v<T, SemidirectOracle>) {
                fp << "semidirect:" << o.rank << ":";
                for (auto& row : o.matrix) {
                    for (auto x : row) fp << x << ",";
                }
            } else if constexpr (std::is_same_v<T, LamplighterOracle>) {
                fp << "lamplighter";
            } else if constexpr (std::is_same_v<T, DirectProductOracle>) {
                fp << "product:[" << o.left->spec().fingerprint << "]x["
                   << o.right->spec().fingerprint << "]";
            } else if constexpr (std::is_same_v<T, SubprocessOracle>) {
                fp << "subprocess:";
                for (auto& c : o.command) fp << c << " ";
            }
        },
        spec.oracle);
    fp << "|gens:";
    for (auto& g : spec.generators) fp << g << " ";
    spec.fingerprint = fp.str();
}

// ---------------------------------------------------------------------------
// Factories for the built-in oracles
// ---------------------------------------------------------------------------
namespace groups {

inline std::vector<std::string> paired_names(int pairs, int start_letter = 0) {
    std::vector<std::string> names;
    for (int i = 0; i < pairs; ++i) {
        std::string base;
        if (start_letter + i < 26) {
            base = std::string(1, static_cast<char>('a' + start_letter + i));
        } else {
            base = "g" + std::to_string(start_letter + i);
        }
        names.push_back(base);
        names.push_back(base + "^-1");
    }
    return names;
}

inline std::vector<int> paired_inverses(int pairs) {
    std::vector<int> inv;
    for (int i = 0; i < pairs; ++i) {
        inv.push_back(2 * i + 1);
        inv.push_back(2 * i);
    }
    return inv;
}

inline Group free_abelian(int rank, std::string name = "") {
    GroupSpec s;
    s.name = name.empty() ? "Z^" + std::to_string(rank) : std::move(name);
    s.generators = paired_names(rank);
    s.inverse = paired_inverses(rank);
    s.oracle = FreeAbelianOracle{rank};
    return Group(std::move(s));
}

inline Group finite_cyclic(long long modulus, std::string name = "") {
    if (modulus < 1) throw spec_error("finite-cyclic modulus must be >= 1");
    GroupSpec s;
    s.name = name.empty() ? "Z/" + std::to_string(modulus) : std::move(name);
    s.generators = paired_names(1);
    s.inverse = paired_inverses(1);
    s.oracle = FiniteCyclicOracle{modulus};
    return Group(std::move(s));
}

inline Group semidirect_zd_z(std::vector<std::vector<long long>> matrix, std::string name = "") {
    int rank = static_cast<int>(matrix.size());
    GroupSpec s;
    s.name = name.empty() ? "Z^" + std::to_string(rank) + "x|Z" : std::move(name);
    s.generators = paired_names(rank);
    auto t_names = std::vector<std::string>{"t", "t^-1"};
    s.generators.insert(s.generators.end(), t_names.begin(), t_names.end());
    s.inverse = paired_inverses(rank);
    s.inverse.push_back(2 * rank + 1);
    s.inverse.push_back(2 * rank);
    s.oracle = SemidirectOracle{rank, std::move(matrix), {}};
    return Group(std::move(s));
}

inline Group lamplighter(std::string name = "") {
    GroupSpec s;
    s.name = name.empty() ? "Z/2 wr Z" : std::move(name);
    s.generators = {"a", "t", "t^-1"};
    s.inverse = {0, 2, 1}; // the lamp generator is an involution
    s.oracle = LamplighterOracle{};
    return Group(std::move(s));
}

inline Group direct_product(const Group& left, const Group& right, std::string name = "") {
    GroupSpec s;
    s.name = name.empty() ? left.name() + "x" + right.name() : std::move(name);
    for (int i = 0; i < left.generator_count(); ++i) {
        s.generators.push_back("l." + left.generator_name(i));
    }
    for (int i = 0; i < right.generator_count(); ++i) {
        s.generators.push_back("r." + right.generator_name(i));
    }
    for (int i = 0; i < left.generator_count(); ++i) s.inverse.push_back(left.inverse_generator(i));
    for (int i = 0; i < right.generator_count(); ++i) {
        s.inverse.push_back(left.generator_count() + right.inverse_generator(i));
    }
    s.oracle = DirectProductOracle{std::make_shared<Group>(left), std::make_shared<Group>(right)};
    return Group(std::move(s));
}

inline Group subprocess(std::vector<std::string> command, std::vector<std::string> generators,
                        std::string name = "") {
    GroupSpec s;
    s.name = std::move(name);
    s.generators = std::move(generators);
    // pair x with x^-1 by name; unpaired generators are involutions
    s.inverse.assign(s.generators.size(), -1);
    for (std::size_t i = 0; i < s.generators.size(); ++i) {
        const std::string& g = s.generators[i];
        std::string partner =
            g.size() > 3 && g.substr(g.size() - 3) == "^-1" ? g.substr(0, g.size() - 3) : g + "^-1";
        auto it = std::find(s.generators.begin(), s.generators.end(), partner);
        s.inverse[i] = it == s.generators.end() ? static_cast<int>(i)
                                                : static_cast<int>(it - s.generators.begin());
    }
    auto client = std::make_shared<SubprocessWordProblem>(command);
    s.oracle = SubprocessOracle{std::move(command), std::move(client)};
    return Group(std::move(s));
}

} // namespace groups

} // namespace groupshift
