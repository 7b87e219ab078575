#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "shortpkt/dd.hpp"
#include "shortpkt/errors.hpp"

namespace shortpkt {

// Dense polynomial in ascending powers of s with double-double coefficients.
// All generating-function construction runs through this type; the extended
// precision is what keeps the binomial expansions usable at large n*epsilon
// (coefficients cancel by many orders of magnitude there).
class Poly {
public:
    Poly() : c_(1) {}
    explicit Poly(std::vector<DoubleDouble> coeffs) : c_(std::move(coeffs)) {
        if (c_.empty()) c_.resize(1);
    }
    Poly(std::initializer_list<double> coeffs) {
        c_.reserve(coeffs.size());
        for (double x : coeffs) c_.emplace_back(x);
        if (c_.empty()) c_.resize(1);
    }

    static Poly constant(DoubleDouble c0) { return Poly(std::vector<DoubleDouble>{c0}); }

    // Expanded coefficients of (a + b s)^n via the Pascal-style recurrence
    // c[k+1] = c[k] * b * (n-k) / (a * (k+1)); raw binomial coefficients
    // would overflow, the folded products stay at the value scale.
    static Poly affine_power(DoubleDouble a, DoubleDouble b, int n) {
        if (n < 0) throw ParameterError("affine_power: negative exponent");
        std::vector<DoubleDouble> c(static_cast<size_t>(n) + 1);
        if (a.hi == 0.0 && a.lo == 0.0) {
            c[static_cast<size_t>(n)] = pow_int(b, static_cast<unsigned>(n));
            for (int i = 0; i < n; ++i) c[static_cast<size_t>(i)] = DoubleDouble(0.0);
            return Poly(std::move(c));
        }
        c[0] = pow_int(a, static_cast<unsigned>(n));
        for (int k = 0; k < n; ++k) {
            c[static_cast<size_t>(k) + 1] =
                c[static_cast<size_t>(k)] * b * DoubleDouble(double(n - k)) /
                (a * DoubleDouble(double(k + 1)));
        }
        return Poly(std::move(c));
    }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    size_t size() const { return c_.size(); }
    const std::vector<DoubleDouble>& coeffs() const { return c_; }

    DoubleDouble at(size_t i) const { return i < c_.size() ? c_[i] : DoubleDouble(0.0); }

    friend Poly operator+(const Poly& p, const Poly& q) {
        std::vector<DoubleDouble> r(std::max(p.c_.size(), q.c_.size()));
        for (size_t i = 0; i < r.size(); ++i) r[i] = p.at(i) + q.at(i);
        return Poly(std::move(r));
    }

    friend Poly operator-(const Poly& p, const Poly& q) {
        std::vector<DoubleDouble> r(std::max(p.c_.size(), q.c_.size()));
        for (size_t i = 0; i < r.size(); ++i) r[i] = p.at(i) - q.at(i);
        return Poly(std::move(r));
    }

    friend Poly operator*(const Poly& p, const Poly& q) {
        std::vector<DoubleDouble> r(p.c_.size() + q.c_.size() - 1);
        for (size_t i = 0; i < p.c_.size(); ++i) {
            if (p.c_[i].hi == 0.0 && p.c_[i].lo == 0.0) continue;
            for (size_t j = 0; j < q.c_.size(); ++j) r[i + j] += p.c_[i] * q.c_[j];
        }
        return Poly(std::move(r));
    }

    Poly scaled(DoubleDouble k) const {
        std::vector<DoubleDouble> r(c_);
        for (auto& x : r) x *= k;
        return Poly(std::move(r));
    }

    // p(a s): coefficient j picks up a^j.
    Poly arg_scaled(DoubleDouble a) const {
        std::vector<DoubleDouble> r(c_);
        DoubleDouble pw(1.0);
        for (size_t j = 0; j < r.size(); ++j) {
            r[j] *= pw;
            pw *= a;
        }
        return Poly(std::move(r));
    }

    // s^k * p(s)
    Poly shifted_up(int k) const {
        std::vector<DoubleDouble> r(c_.size() + static_cast<size_t>(k));
        for (size_t i = 0; i < c_.size(); ++i) r[i + static_cast<size_t>(k)] = c_[i];
        return Poly(std::move(r));
    }

    Poly derivative() const {
        if (c_.size() == 1) return Poly();
        std::vector<DoubleDouble> r(c_.size() - 1);
        for (size_t i = 1; i < c_.size(); ++i) r[i - 1] = c_[i] * DoubleDouble(double(i));
        return Poly(std::move(r));
    }

    DoubleDouble eval(DoubleDouble s) const {
        DoubleDouble r = c_.back();
        for (size_t i = c_.size() - 1; i-- > 0;) r = r * s + c_[i];
        return r;
    }

    // Synthetic division by (s - 1); remainder = p(1) is returned through
    // `remainder` when given, the quotient is the result.
    Poly deflate_root_one(DoubleDouble* remainder = nullptr) const {
        if (c_.size() == 1) {
            if (remainder) *remainder = c_[0];
            return Poly();
        }
        std::vector<DoubleDouble> q(c_.size() - 1);
        DoubleDouble acc = c_.back();
        for (size_t i = c_.size() - 1; i-- > 0;) {
            q[i] = acc;
            acc = c_[i] + acc;
        }
        if (remainder) *remainder = acc;
        return Poly(std::move(q));
    }

    std::vector<double> to_double() const {
        std::vector<double> r(c_.size());
        for (size_t i = 0; i < c_.size(); ++i) r[i] = c_[i].to_double();
        return r;
    }

private:
    std::vector<DoubleDouble> c_;
};

} // namespace shortpkt
