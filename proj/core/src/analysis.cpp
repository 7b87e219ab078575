#include "shortpkt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

namespace shortpkt {

namespace {

constexpr double kDivergenceTol = 1.0 + 1e-6;
constexpr double kRadiusCap = 1e12;

double poly_eval_double(const std::vector<double>& c, double s) {
    double r = 0.0;
    for (size_t i = c.size(); i-- > 0;) r = r * s + c[i];
    return r;
}

std::vector<double> to_double_vec(const Poly& p) {
    std::vector<double> out(p.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = p.at(i).to_double();
    return out;
}

} // namespace

int threshold_in_units(double d0, UnitLabel unit, int n) {
    if (!(d0 >= 1.0)) throw ParameterError("threshold_in_units: d0 must be >= 1");
    if (n < 1) throw ParameterError("threshold_in_units: n must be >= 1");
    if (unit == UnitLabel::ChannelUses) return static_cast<int>(std::ceil(d0));
    if (d0 == std::floor(d0) && d0 < 9e15) {
        const auto u = static_cast<std::uint64_t>(d0);
        return static_cast<int>((u + static_cast<std::uint64_t>(n) - 1) /
                                static_cast<std::uint64_t>(n));
    }
    return static_cast<int>(std::ceil(d0 / n));
}

TailSeries tail_series(const RationalPgf& pgf, int d_max, Precision precision) {
    if (d_max < 1) throw ParameterError("tail_series: d_max must be >= 1");

    // F(s) = G(s)/(1-s): numerator f = num, denominator g = den * (1 - s).
    const Poly g_poly = pgf.den() * Poly{1.0, -1.0};
    const size_t count = static_cast<size_t>(d_max); // need c_0 .. c_{d_max-1}

    std::vector<double> cumulative(count);

    auto diverged = [&](size_t j) {
        std::ostringstream os;
        os << "tail_series: recursion diverged at index " << j;
        if (precision == Precision::Double)
            os << "; retry with Precision::Extended";
        throw NumericInstabilityError(os.str());
    };

    if (precision == Precision::Double) {
        const std::vector<double> f = to_double_vec(pgf.num());
        const std::vector<double> g = to_double_vec(g_poly);
        std::vector<double> c(count);
        for (size_t j = 0; j < count; ++j) {
            double acc = j < f.size() ? f[j] : 0.0;
            const size_t imax = std::min(j, g.size() - 1);
            for (size_t i = 1; i <= imax; ++i) acc -= g[i] * c[j - i];
            c[j] = acc / g[0];
            if (std::abs(c[j]) > kDivergenceTol) diverged(j);
        }
        cumulative = std::move(c);
    } else {
        const auto& f = pgf.num().coeffs();
        const auto& g = g_poly.coeffs();
        std::vector<DoubleDouble> c(count);
        for (size_t j = 0; j < count; ++j) {
            DoubleDouble acc = j < f.size() ? f[j] : DoubleDouble(0.0);
            const size_t imax = std::min(j, g.size() - 1);
            for (size_t i = 1; i <= imax; ++i) acc -= g[i] * c[j - i];
            c[j] = acc / g[0];
            if (std::abs(c[j].to_double()) > kDivergenceTol) diverged(j);
            cumulative[j] = c[j].to_double();
        }
    }

    TailSeries out;
    out.unit = pgf.unit();
    out.values.resize(count);
    double prev = 1.0;
    for (size_t j = 0; j < count; ++j) {
        double t = 1.0 - cumulative[j]; // P(X >= j+1)
        t = std::clamp(t, 0.0, 1.0);
        t = std::min(t, prev);
        out.values[j] = t;
        prev = t;
    }
    return out;
}

namespace {

// Scaled complementary error function exp(y^2) erfc(y), y >= 0.
double erfcx(double y) {
    if (y <= 25.0) return std::exp(y * y) * std::erfc(y);
    const double inv2 = 1.0 / (2.0 * y * y);
    const double series = 1.0 + inv2 * (-1.0 + inv2 * (3.0 + inv2 * -15.0));
    return series / (y * std::sqrt(M_PI));
}

// B0(x) = x e^{x^2/2} Q(x); B0(0) = 0, B0(inf) = 1/sqrt(2*pi).
double b0_fn(double x) { return 0.5 * x * erfcx(x / std::sqrt(2.0)); }

struct CgfPoint {
    double kappa;
    double d1;
    double d2;
};

} // namespace

std::pair<double, SaddlepointDiagnostics> saddlepoint_tail(const RationalPgf& pgf, int d) {
    if (d < 1) throw ParameterError("saddlepoint_tail: d must be >= 1");

    const double mean = mean_from_pgf(pgf);
    if (!(static_cast<double>(d) > mean)) {
        std::ostringstream os;
        os << "saddlepoint_tail: d = " << d << " is not above the mean " << mean;
        throw BelowMeanError(os.str());
    }

    RationalPgf::ClosedForm num_form, den_form;
    double radius;
    if (pgf.has_closed_form()) {
        num_form = [&pgf](const Jet2& s) { return pgf.closed_num(s); };
        den_form = [&pgf](const Jet2& s) { return pgf.closed_den(s); };
        radius = pgf.radius();
    } else {
        // Dense fallback, only safe at modest degree where Horner at s > 1
        // stays well conditioned.
        if (std::max(pgf.num().degree(), pgf.den().degree()) > 64)
            throw EvaluationError(
                "saddlepoint_tail: transform degree too high for dense "
                "evaluation; attach a closed form");
        const std::vector<double> nc = to_double_vec(pgf.num());
        const std::vector<double> dc = to_double_vec(pgf.den());
        num_form = [nc](const Jet2& s) -> Jet2 {
            Jet2 u = Jet2::constant(0.0);
            for (size_t i = nc.size(); i-- > 0;) u = u * s + nc[i];
            return u;
        };
        den_form = [dc](const Jet2& s) -> Jet2 {
            Jet2 v = Jet2::constant(0.0);
            for (size_t i = dc.size(); i-- > 0;) v = v * s + dc[i];
            return v;
        };
        const double sign = poly_eval_double(dc, 1.0 + 1e-9) >= 0.0 ? 1.0 : -1.0;
        double lo = 1.0 + 1e-9, hi = kRadiusCap, h = 1e-6;
        radius = std::numeric_limits<double>::infinity();
        while (1.0 + h < kRadiusCap) {
            if (sign * poly_eval_double(dc, 1.0 + h) <= 0.0) {
                hi = 1.0 + h;
                for (int i = 0; i < 200; ++i) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid == lo || mid == hi) break;
                    (sign * poly_eval_double(dc, mid) > 0.0 ? lo : hi) = mid;
                }
                radius = 0.5 * (lo + hi);
                break;
            }
            lo = 1.0 + h;
            h *= 1.6;
        }
    }

    // kappa = log|num| - log|den|, formed from the two halves separately:
    // the quotient's value collapses near the shared root at s = 1, and
    // derivatives of log|f| only need f'/f, which each half delivers with
    // full relative accuracy. Sign agreement stands in for G > 0.
    auto cgf = [&num_form, &den_form](double x) -> CgfPoint {
        const Jet2 s = exp(Jet2::variable(x));
        const Jet2 u = num_form(s);
        const Jet2 v = den_form(s);
        if (!std::isfinite(u.v) || !std::isfinite(v.v) || u.v == 0.0 || v.v == 0.0 ||
            (u.v > 0.0) != (v.v > 0.0))
            return {std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0};
        const double lu1 = u.d1 / u.v, lu2 = u.d2 / u.v - lu1 * lu1;
        const double lv1 = v.d1 / v.v, lv2 = v.d2 / v.v - lv1 * lv1;
        return {std::log(std::abs(u.v)) - std::log(std::abs(v.v)), lu1 - lv1, lu2 - lv2};
    };

    const double theta_cap = std::isinf(radius) ? std::log(kRadiusCap) : std::log(radius);
    double hi = theta_cap - 1e-9;
    // Floor for the bracket: below ~1e-7 the evaluators sit inside the
    // roundoff halo of the removable root at s = 1 and kappa' is noise.
    const double lo0 = 1e-7;
    if (!(hi > lo0))
        throw ConvergenceError("saddlepoint_tail: no analyticity margin above s = 1");

    double lo = lo0;
    CgfPoint at_lo = cgf(lo);
    double theta;
    CgfPoint at_theta;
    if (at_lo.d1 >= static_cast<double>(d)) {
        // d barely above the mean: the root sits below the bracket floor.
        theta = lo;
        at_theta = at_lo;
    } else {
        CgfPoint at_hi = cgf(hi);
        int shrink = 0;
        while (!std::isfinite(at_hi.kappa) && shrink++ < 200) {
            hi = lo + 0.5 * (hi - lo);
            at_hi = cgf(hi);
        }
        if (!std::isfinite(at_hi.kappa) || at_hi.d1 < static_cast<double>(d))
            throw ConvergenceError(
                "saddlepoint_tail: kappa'(theta) = d has no root below the "
                "convergence radius");

        theta = 0.5 * (lo + hi);
        bool converged = false;
        for (int it = 0; it < 200; ++it) {
            at_theta = cgf(theta);
            const double fx = at_theta.d1 - static_cast<double>(d);
            if (std::abs(fx) <= 1e-9 * static_cast<double>(d)) {
                converged = true;
                break;
            }
            if (fx < 0.0)
                lo = theta;
            else
                hi = theta;
            double next = theta - fx / at_theta.d2;
            if (!std::isfinite(next) || next <= lo || next >= hi)
                next = 0.5 * (lo + hi);
            if (next == theta) {
                converged = true;
                break;
            }
            theta = next;
        }
        if (!converged) {
            at_theta = cgf(theta);
            if (!(std::abs(at_theta.d1 - d) <= 1e-6 * d))
                throw ConvergenceError("saddlepoint_tail: Newton iteration did not converge");
        }
    }

    const double sigma = std::sqrt(at_theta.d2);
    const double b0 = b0_fn(theta * sigma);
    const double expo = std::exp(at_theta.kappa - theta * static_cast<double>(d));
    double approx = b0 / (sigma * (-std::expm1(-theta))) * expo;
    approx = std::clamp(approx, 0.0, 1.0);

    SaddlepointDiagnostics diag{theta, at_theta.kappa, sigma, b0, approx};
    return {approx, diag};
}

double netcalc_bound(const SystemParams& params, int d) {
    if (params.regime != Regime::FrameSync)
        throw ParameterError("netcalc_bound: only the frame-synchronous model is supported");
    if (d < 1) throw ParameterError("netcalc_bound: d must be >= 1");

    const double lam = params.lambda;
    const double eps = params.epsilon;
    const int n = params.n;

    // log of G_A(s) G_U(1/s) at s = e^x.
    auto log_psi = [=](double x) {
        const double s = std::exp(x);
        return n * std::log1p(lam * (s - 1.0)) + std::log(eps + (1.0 - eps) / s);
    };
    // log h(s); +inf outside the feasible set.
    auto log_h = [=](double x) {
        const double lp = log_psi(x);
        if (!(lp < 0.0)) return std::numeric_limits<double>::infinity();
        const double s = std::exp(x);
        return (d - 1) * std::log(eps + (1.0 - eps) / s) - std::log(-std::expm1(lp));
    };

    const double x_lo = std::log(1.0 + 1e-6);
    if (!(log_psi(x_lo) < 0.0))
        throw InfeasibleError("netcalc_bound: feasible set is empty");

    double x_hi = x_lo;
    double step = 1e-6;
    while (log_psi(x_hi + step) < 0.0 && x_hi + step < 700.0) {
        x_hi += step;
        step *= 2.0;
    }
    x_hi += step; // first infeasible (or capped) point brackets the minimum

    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = x_lo, b = x_hi;
    double c = b - gr * (b - a);
    double e = a + gr * (b - a);
    double fc = log_h(c), fe = log_h(e);
    while (b - a > 1e-10 * std::max(1.0, std::abs(a) + std::abs(b))) {
        if (fc < fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - gr * (b - a);
            fc = log_h(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + gr * (b - a);
            fe = log_h(e);
        }
    }
    const double best = log_h(0.5 * (a + b));
    const double value = std::exp(std::min(best, std::min(fc, fe)));
    return std::min(value, 1.0);
}

} // namespace shortpkt
