#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace groupshift {

/// Unsigned arbitrary-precision integer, little-endian base 2^64 limbs.
/// Window counts overflow 64 bits quickly; only the final log of a count is
/// ever taken in floating point.
class BigUint {
public:
    BigUint() = default;
    BigUint(std::uint64_t v) { // NOLINT(google-explicit-constructor)
        if (v != 0) limbs_.push_back(v);
    }

    bool is_zero() const { return limbs_.empty(); }

    BigUint& operator+=(const BigUint& o) {
        std::size_t n = std::max(limbs_.size(), o.limbs_.size());
        limbs_.resize(n, 0);
        unsigned __int128 carry = 0;
        for (std::size_t i = 0; i < n; ++i) {
            unsigned __int128 s = carry + limbs_[i];
            if (i < o.limbs_.size()) s += o.limbs_[i];
            limbs_[i] = static_cast<std::uint64_t>(s);
            carry = s >> 64;
        }
        if (carry) limbs_.push_back(static_cast<std::uint64_t>(carry));
        return *this;
    }

    BigUint& operator*=(std::uint64_t m) {
        if (m == 0) {
            limbs_.clear();
            return *this;
        }
        unsigned __int128 carry = 0;
        for (auto& limb : limbs_) {
            unsigned __int128 p = static_cast<unsigned __int128>(limb) * m + carry;
            limb = static_cast<std::uint64_t>(p);
            carry = p >> 64;
        }
        while (carry) {
            limbs_.push_back(static_cast<std::uint64_t>(carry));
            carry >>= 64;
        }
        return *this;
    }

    friend BigUint operator+(BigUint a, const BigUint& b) { return a += b; }
    friend BigUint operator*(BigUint a, std::uint64_t m) { return a *= m; }

    static BigUint pow(std::uint64_t base, std::uint64_t exp) {
        BigUint r(1);
        for (std::uint64_t i = 0; i < exp; ++i) r *= base;
        return r;
    }

    friend bool operator==(const BigUint& a, const BigUint& b) { return a.limbs_ == b.limbs_; }
    friend bool operator!=(const BigUint& a, const BigUint& b) { return !(a == b); }
    friend bool operator<(const BigUint& a, const BigUint& b) {
        if (a.limbs_.size() != b.limbs_.size()) return a.limbs_.size() < b.limbs_.size();
        for (std::size_t i = a.limbs_.size(); i-- > 0;) {
            if (a.limbs_[i] != b.limbs_[i]) return a.limbs_[i] < b.limbs_[i];
        }
        return false;
    }
    friend bool operator<=(const BigUint& a, const BigUint& b) { return !(b < a); }

    bool fits_u64() const { return limbs_.size() <= 1; }
    std::uint64_t as_u64() const { return limbs_.empty() ? 0 : limbs_[0]; }

    /// Natural log. Monotone in the integer value; exact 0 maps to -inf.
    double log() const {
        if (limbs_.empty()) return -std::numeric_limits<double>::infinity();
        std::size_t top = limbs_.size() - 1;
        double mant = static_cast<double>(limbs_[top]);
        if (top >= 1) mant += static_cast<double>(limbs_[top - 1]) * std::pow(2.0, -64);
        return std::log(mant) + static_cast<double>(top) * 64.0 * std::log(2.0);
    }

    std::string to_string() const {
        if (limbs_.empty()) return "0";
        std::vector<std::uint64_t> tmp = limbs_;
        std::string digits;
        while (!tmp.empty()) {
            // divide by 10^18
            unsigned __int128 rem = 0;
            for (std::size_t i = tmp.size(); i-- > 0;) {
                unsigned __int128 cur = (rem << 64) | tmp[i];
                tmp[i] = static_cast<std::uint64_t>(cur / 1'000'000'000'000'000'000ULL);
                rem = cur % 1'000'000'000'000'000'000ULL;
            }
            while (!tmp.empty() && tmp.back() == 0) tmp.pop_back();
            std::string chunk = std::to_string(static_cast<std::uint64_t>(rem));
            if (tmp.empty()) {
                digits = chunk + digits;
            } else {
                digits = std::string(18 - chunk.size(), '0') + chunk + digits;
            }
        }
        return digits;
    }

private:
    std::vector<std::uint64_t> limbs_;
};

} // namespace groupshift
