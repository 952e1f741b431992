#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "settle/common.hpp"

namespace settle {

// Exact nonnegative rational on 64-bit parts. Probability masses and building
// densities stay well below the 64-bit range (largest denominator in use is
// 20!), so intermediates go through 128-bit arithmetic and overflow of the
// stored parts is a contract violation rather than a silent wrap.
class Rational {
public:
    Rational() : num_(0), den_(1) {}

    // Normalized (gcd reduced) value.
    Rational(uint64_t num, uint64_t den) : num_(num), den_(den) {
        if (den_ == 0) throw ContractError("Rational: zero denominator");
        reduce();
    }

    // Keeps num/den exactly as given. Building densities are reported as
    // |C| over m*n without reduction.
    static Rational unreduced(uint64_t num, uint64_t den) {
        if (den == 0) throw ContractError("Rational: zero denominator");
        Rational r;
        r.num_ = num;
        r.den_ = den;
        return r;
    }

    uint64_t num() const { return num_; }
    uint64_t den() const { return den_; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

    // Value comparisons via cross multiplication; representation differences
    // (15/20 vs 3/4) do not matter here.
    friend bool operator==(const Rational& a, const Rational& b) {
        return static_cast<unsigned __int128>(a.num_) * b.den_ ==
               static_cast<unsigned __int128>(b.num_) * a.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<unsigned __int128>(a.num_) * b.den_ <
               static_cast<unsigned __int128>(b.num_) * a.den_;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        uint64_t g = std::gcd(a.den_, b.den_);
        uint64_t bd = b.den_ / g;
        unsigned __int128 num = static_cast<unsigned __int128>(a.num_) * bd +
                                static_cast<unsigned __int128>(b.num_) * (a.den_ / g);
        unsigned __int128 den = static_cast<unsigned __int128>(a.den_) * bd;
        return from_wide(num, den);
    }

    friend Rational operator*(const Rational& a, const Rational& b) {
        uint64_t g1 = std::gcd(a.num_, b.den_);
        uint64_t g2 = std::gcd(b.num_, a.den_);
        unsigned __int128 num =
            static_cast<unsigned __int128>(a.num_ / g1) * (b.num_ / g2);
        unsigned __int128 den =
            static_cast<unsigned __int128>(a.den_ / g2) * (b.den_ / g1);
        return from_wide(num, den);
    }

private:
    void reduce() {
        uint64_t g = std::gcd(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
        if (num_ == 0) den_ = 1;
    }

    static Rational from_wide(unsigned __int128 num, unsigned __int128 den) {
        unsigned __int128 a = num, b = den;
        while (b) {
            unsigned __int128 t = a % b;
            a = b;
            b = t;
        }
        if (a > 1) {
            num /= a;
            den /= a;
        }
        if (num > UINT64_MAX || den > UINT64_MAX)
            throw ContractError("Rational: value exceeds 64-bit parts");
        Rational r;
        r.num_ = static_cast<uint64_t>(num);
        r.den_ = num == 0 ? 1 : static_cast<uint64_t>(den);
        return r;
    }

    uint64_t num_;
    uint64_t den_;
};

} // namespace settle
