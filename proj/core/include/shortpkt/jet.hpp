#pragma once

#include <cmath>

#include "shortpkt/dd.hpp"

namespace shortpkt {

// Second-order forward-mode derivative triple (f, f', f''). Used to get the
// cumulant generating function and its first two derivatives analytically
// from the closed-form evaluators, without finite differences.
struct Jet2 {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;

    static Jet2 variable(double x) { return {x, 1.0, 0.0}; }
    static Jet2 constant(double c) { return {c, 0.0, 0.0}; }
};

inline Jet2 operator+(Jet2 a, Jet2 b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
inline Jet2 operator-(Jet2 a, Jet2 b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
inline Jet2 operator-(Jet2 a) { return {-a.v, -a.d1, -a.d2}; }

inline Jet2 operator*(Jet2 a, Jet2 b) {
    return {a.v * b.v,
            a.d1 * b.v + a.v * b.d1,
            a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}

inline Jet2 operator/(Jet2 a, Jet2 b) {
    double v = a.v / b.v;
    double d1 = (a.d1 - v * b.d1) / b.v;
    double d2 = (a.d2 - 2.0 * d1 * b.d1 - v * b.d2) / b.v;
    return {v, d1, d2};
}

inline Jet2 operator+(Jet2 a, double c) { return {a.v + c, a.d1, a.d2}; }
inline Jet2 operator+(double c, Jet2 a) { return a + c; }
inline Jet2 operator-(Jet2 a, double c) { return {a.v - c, a.d1, a.d2}; }
inline Jet2 operator-(double c, Jet2 a) { return {c - a.v, -a.d1, -a.d2}; }
inline Jet2 operator*(Jet2 a, double c) { return {a.v * c, a.d1 * c, a.d2 * c}; }
inline Jet2 operator*(double c, Jet2 a) { return a * c; }
inline Jet2 operator/(Jet2 a, double c) { return {a.v / c, a.d1 / c, a.d2 / c}; }
inline Jet2 operator/(double c, Jet2 a) { return Jet2::constant(c) / a; }

inline Jet2 exp(Jet2 a) {
    double e = std::exp(a.v);
    return {e, e * a.d1, e * (a.d2 + a.d1 * a.d1)};
}

inline Jet2 log(Jet2 a) {
    double r = a.d1 / a.v;
    return {std::log(a.v), r, a.d2 / a.v - r * r};
}

// Integer power by repeated squaring; sign-safe for negative bases.
inline Jet2 pow_int(Jet2 base, unsigned e) {
    Jet2 r = Jet2::constant(1.0);
    Jet2 b = base;
    while (e != 0) {
        if (e & 1u) r = r * b;
        e >>= 1u;
        if (e != 0) b = b * b;
    }
    return r;
}

// Same derivative triple over double-double components. The closed-form
// evaluators run on this at s = 1, where the normalization / mean ratios
// cancel down to a tiny multiple of the machine epsilon of the parameter
// combination (1 - eps - n*lambda): double jets lose the 1e-9 contract when
// lambda sits near the stability boundary, double-double keeps ~1e-20.
struct DdJet2 {
    DoubleDouble v;
    DoubleDouble d1;
    DoubleDouble d2;

    static DdJet2 variable(double x) {
        return {DoubleDouble(x), DoubleDouble(1.0), DoubleDouble(0.0)};
    }
    static DdJet2 constant(const DoubleDouble& c) {
        return {c, DoubleDouble(0.0), DoubleDouble(0.0)};
    }
};

inline DdJet2 operator+(const DdJet2& a, const DdJet2& b) {
    return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
}
inline DdJet2 operator-(const DdJet2& a, const DdJet2& b) {
    return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2};
}
inline DdJet2 operator-(const DdJet2& a) {
    return {DoubleDouble(0.0) - a.v, DoubleDouble(0.0) - a.d1, DoubleDouble(0.0) - a.d2};
}
inline DdJet2 operator*(const DdJet2& a, const DdJet2& b) {
    return {a.v * b.v,
            a.d1 * b.v + a.v * b.d1,
            a.d2 * b.v + DoubleDouble(2.0) * a.d1 * b.d1 + a.v * b.d2};
}

inline DdJet2 operator+(const DdJet2& a, const DoubleDouble& c) { return {a.v + c, a.d1, a.d2}; }
inline DdJet2 operator+(const DoubleDouble& c, const DdJet2& a) { return a + c; }
inline DdJet2 operator-(const DdJet2& a, const DoubleDouble& c) { return {a.v - c, a.d1, a.d2}; }
inline DdJet2 operator-(const DoubleDouble& c, const DdJet2& a) {
    return {c - a.v, DoubleDouble(0.0) - a.d1, DoubleDouble(0.0) - a.d2};
}
inline DdJet2 operator*(const DdJet2& a, const DoubleDouble& c) {
    return {a.v * c, a.d1 * c, a.d2 * c};
}
inline DdJet2 operator*(const DoubleDouble& c, const DdJet2& a) { return a * c; }

inline DdJet2 operator+(const DdJet2& a, double c) { return a + DoubleDouble(c); }
inline DdJet2 operator+(double c, const DdJet2& a) { return a + DoubleDouble(c); }
inline DdJet2 operator-(const DdJet2& a, double c) { return a - DoubleDouble(c); }
inline DdJet2 operator-(double c, const DdJet2& a) { return DoubleDouble(c) - a; }
inline DdJet2 operator*(const DdJet2& a, double c) { return a * DoubleDouble(c); }
inline DdJet2 operator*(double c, const DdJet2& a) { return a * DoubleDouble(c); }

inline DdJet2 pow_int(DdJet2 base, unsigned e) {
    DdJet2 r = DdJet2::constant(DoubleDouble(1.0));
    DdJet2 b = base;
    while (e != 0) {
        if (e & 1u) r = r * b;
        e >>= 1u;
        if (e != 0) b = b * b;
    }
    return r;
}

// Maps library scalars (stored double-double) into the scalar type a given
// jet computes with, so one generic closed-form lambda serves both.
template <class Jet> struct JetScalar;
template <> struct JetScalar<Jet2> {
    using type = double;
    static double from(const DoubleDouble& x) { return x.to_double(); }
};
template <> struct JetScalar<DdJet2> {
    using type = DoubleDouble;
    static DoubleDouble from(const DoubleDouble& x) { return x; }
};

} // namespace shortpkt
