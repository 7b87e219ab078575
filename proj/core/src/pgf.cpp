#include "shortpkt/pgf.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace shortpkt {

namespace {

constexpr double kScanCap = 1e12;

// Sign-safe integer power of a double (std::pow(negative, double) is NaN).
double powi(double base, int e) {
    double r = 1.0;
    double b = base;
    unsigned u = static_cast<unsigned>(e);
    while (u != 0) {
        if (u & 1u) r *= b;
        u >>= 1u;
        if (u != 0) b *= b;
    }
    return r;
}

// First zero of f above 1, where f(1+) > 0; used for convergence radii.
// Expands geometrically until the sign flips, then bisects. Returns
// +infinity when f stays positive up to the cap.
double first_root_above_one(const std::function<double(double)>& f, double cap) {
    const double inf = std::numeric_limits<double>::infinity();
    double lo = 1.0 + 1e-9;
    if (!(f(lo) > 0.0)) return lo;
    double h = 1e-6;
    double hi = lo;
    while (true) {
        double cand = 1.0 + h;
        if (cand >= cap) {
            cand = cap;
            if (f(cand) > 0.0) return cap >= kScanCap ? inf : cap;
            hi = cand;
            break;
        }
        if (f(cand) <= 0.0) {
            hi = cand;
            break;
        }
        lo = cand;
        h *= 1.6;
    }
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (f(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

template <class J>
J scale_jet(const J& s, const typename JetScalar<J>::type& a) {
    return {a * s.v, a * s.d1, a * s.d2};
}

// G(1) through the structured evaluators: both sides of the family
// transforms share a simple root at s = 1, resolved as num'(1)/den'(1).
// The dense coefficients cannot be used here — at large n*eps the value
// (1-eps)^n sits far below the coefficient-scale roundoff. Double-double
// jets keep the ratio trustworthy even with lambda at the stability
// boundary, where the derivatives cancel to the scale of 1 - eps - n*lambda.
void check_normalized(const RationalPgf& g, const char* what) {
    const DdJet2 one = DdJet2::variable(1.0);
    const DdJet2 nj = g.closed_num(one);
    const DdJet2 dj = g.closed_den(one);
    const bool at_root =
        !(std::abs(dj.v.to_double()) > 1e-9 * std::abs(dj.d1.to_double()));
    const double val = at_root ? (nj.d1 / dj.d1).to_double()
                               : (nj.v / dj.v).to_double();
    if (!(std::abs(val - 1.0) <= 1e-9)) {
        std::ostringstream os;
        os << what << ": normalization failed, G(1) = " << val;
        throw NumericInstabilityError(os.str());
    }
}

} // namespace

SystemParams::SystemParams(unchecked_tag, double lambda_, int n_, double epsilon_,
                           Regime regime_)
    : lambda(lambda_), n(n_), epsilon(epsilon_), regime(regime_) {
    if (!std::isfinite(lambda) || !(lambda > 0.0) || !(lambda < 1.0))
        throw ParameterError("SystemParams: lambda must be in (0, 1)");
    if (n < 1) throw ParameterError("SystemParams: n must be >= 1");
    if (!std::isfinite(epsilon) || !(epsilon >= 0.0) || !(epsilon < 1.0))
        throw ParameterError("SystemParams: epsilon must be in [0, 1)");
}

SystemParams::SystemParams(double lambda_, int n_, double epsilon_, Regime regime_)
    : SystemParams(unchecked_tag{}, lambda_, n_, epsilon_, regime_) {
    if (!stable()) {
        std::ostringstream os;
        os << "SystemParams: unstable, lambda*n = " << lambda * n
           << " >= 1 - epsilon = " << 1.0 - epsilon;
        throw StabilityError(os.str());
    }
}

SystemParams SystemParams::unchecked(double lambda, int n, double epsilon, Regime regime) {
    return SystemParams(unchecked_tag{}, lambda, n, epsilon, regime);
}

RationalPgf::RationalPgf(Poly num, Poly den, UnitLabel unit)
    : num_(std::move(num)), den_(std::move(den)), unit_(unit) {
    if (den_.at(0).to_double() == 0.0)
        throw ParameterError("RationalPgf: denominator constant term is zero");
}

RationalPgf delay_pgf_sync(const SystemParams& params) {
    if (params.regime != Regime::FrameSync)
        throw ParameterError("delay_pgf_sync: params are not frame-synchronous");
    if (!params.stable())
        throw StabilityError("delay_pgf_sync: lambda*n >= 1 - epsilon");

    const double lam = params.lambda;
    const double eps = params.epsilon;
    const int n = params.n;

    const DoubleDouble lam_dd(lam), eps_dd(eps);
    const DoubleDouble one(1.0);
    const Poly e_pow = Poly::affine_power(one, -eps_dd, n);
    const Poly p_pow = Poly::affine_power(one - lam_dd, lam_dd - eps_dd, n);
    const DoubleDouble a_dd = pow_int(one - lam_dd, static_cast<unsigned>(n));
    const DoubleDouble pref = one - lam_dd * DoubleDouble(double(n)) / (one - eps_dd);

    Poly num = (Poly{1.0, -1.0} * (e_pow.scaled(a_dd) - p_pow)).scaled(pref);
    Poly den = (e_pow.shifted_up(1) - p_pow).scaled(one - a_dd);

    RationalPgf g(std::move(num), std::move(den), UnitLabel::Frames);
    g.set_support_min(1);

    const DoubleDouble oml_dd = one - lam_dd;
    const DoubleDouble lme_dd = lam_dd - eps_dd;
    const DoubleDouble oma_dd = one - a_dd;
    const auto nu = static_cast<unsigned>(n);
    auto num_fn = [=](const auto& s) {
        using J = std::decay_t<decltype(s)>;
        const auto eps_ = JetScalar<J>::from(eps_dd);
        const auto oml_ = JetScalar<J>::from(oml_dd);
        const auto lme_ = JetScalar<J>::from(lme_dd);
        const auto a_ = JetScalar<J>::from(a_dd);
        const auto pre_ = JetScalar<J>::from(pref);
        J e = pow_int(1.0 - eps_ * s, nu);
        J p = pow_int(oml_ + lme_ * s, nu);
        return pre_ * ((1.0 - s) * (a_ * e - p));
    };
    auto den_fn = [=](const auto& s) {
        using J = std::decay_t<decltype(s)>;
        const auto eps_ = JetScalar<J>::from(eps_dd);
        const auto oml_ = JetScalar<J>::from(oml_dd);
        const auto lme_ = JetScalar<J>::from(lme_dd);
        const auto oma_ = JetScalar<J>::from(oma_dd);
        J e = pow_int(1.0 - eps_ * s, nu);
        J p = pow_int(oml_ + lme_ * s, nu);
        return oma_ * (s * e - p);
    };
    auto den_val = [=](double s) {
        return s * powi(1.0 - eps * s, n) - powi(1.0 - lam + (lam - eps) * s, n);
    };
    const double cap = eps > 0.0 ? 1.0 / eps : kScanCap;
    g.set_closed_form(num_fn, den_fn, first_root_above_one(den_val, cap));

    check_normalized(g, "delay_pgf_sync");
    return g;
}

RationalPgf delay_pgf_async(const SystemParams& params) {
    if (params.regime != Regime::FrameAsync)
        throw ParameterError("delay_pgf_async: params are not frame-asynchronous");
    if (!params.stable())
        throw StabilityError("delay_pgf_async: lambda*n >= 1 - epsilon");

    const double lam = params.lambda;
    const double eps = params.epsilon;
    const int n = params.n;
    const size_t nz = static_cast<size_t>(n);

    const DoubleDouble c = DoubleDouble(1.0) - DoubleDouble(eps) -
                           DoubleDouble(lam) * DoubleDouble(double(n));

    std::vector<DoubleDouble> num(nz + 2);
    num[nz] = -c;
    num[nz + 1] = c;

    // s - (1-lambda) - (lambda-eps) s^n - eps s^{n+1}; += handles n = 1,
    // where the s and s^n terms coincide.
    std::vector<DoubleDouble> den(nz + 2);
    den[0] = -(DoubleDouble(1.0) - DoubleDouble(lam));
    den[1] += DoubleDouble(1.0);
    den[nz] += -(DoubleDouble(lam) - DoubleDouble(eps));
    den[nz + 1] += DoubleDouble(-eps);

    RationalPgf g(Poly(std::move(num)), Poly(std::move(den)), UnitLabel::ChannelUses);
    g.set_support_min(n);

    const DoubleDouble lam_dd(lam), eps_dd(eps);
    const DoubleDouble oml_dd = DoubleDouble(1.0) - lam_dd;
    const auto nu = static_cast<unsigned>(n);
    auto num_fn = [=](const auto& s) {
        using J = std::decay_t<decltype(s)>;
        const auto c_ = JetScalar<J>::from(c);
        return ((s - 1.0) * c_) * pow_int(s, nu);
    };
    auto den_fn = [=](const auto& s) {
        using J = std::decay_t<decltype(s)>;
        const auto lam_ = JetScalar<J>::from(lam_dd);
        const auto eps_ = JetScalar<J>::from(eps_dd);
        const auto oml_ = JetScalar<J>::from(oml_dd);
        return (s - oml_) - (lam_ + eps_ * (s - 1.0)) * pow_int(s, nu);
    };
    auto den_val = [=](double s) {
        return s - (1.0 - lam) - (lam + eps * (s - 1.0)) * powi(s, n);
    };
    g.set_closed_form(num_fn, den_fn, first_root_above_one(den_val, kScanCap));

    check_normalized(g, "delay_pgf_async");
    return g;
}

RationalPgf peak_age_pgf_sync(const SystemParams& params) {
    if (params.regime != Regime::FrameSync)
        throw ParameterError("peak_age_pgf_sync: params are not frame-synchronous");
    if (!params.stable())
        throw StabilityError("peak_age_pgf_sync: lambda*n >= 1 - epsilon");

    const double lam = params.lambda;
    const double eps = params.epsilon;
    const int n = params.n;

    RationalPgf gd = delay_pgf_sync(params);

    const DoubleDouble one(1.0);
    const DoubleDouble lam_dd(lam), eps_dd(eps);
    const Poly e_pow = Poly::affine_power(one, -eps_dd, n);
    const Poly p_pow = Poly::affine_power(one - lam_dd, lam_dd - eps_dd, n);
    const DoubleDouble a_dd = pow_int(one - lam_dd, static_cast<unsigned>(n));

    // prefactor (P - a E) / (E (1-a)), inner bracket over the common
    // denominator (1 - a s) den(a s) den(s).
    const Poly pref_num = p_pow - e_pow.scaled(a_dd);
    const Poly pref_den = e_pow.scaled(one - a_dd);

    const Poly num_scaled = Poly{1.0, -1.0} * gd.num().arg_scaled(a_dd);
    const Poly den_scaled =
        Poly(std::vector<DoubleDouble>{one, -a_dd}) * gd.den().arg_scaled(a_dd);
    const Poly inner_num = gd.num() * den_scaled - num_scaled * gd.den();
    const Poly inner_den = gd.den() * den_scaled;

    RationalPgf g(pref_num * inner_num, pref_den * inner_den, UnitLabel::Frames);
    g.set_support_min(2);

    const DoubleDouble oml_dd = one - lam_dd;
    const DoubleDouble lme_dd = lam_dd - eps_dd;
    const DoubleDouble oma_dd = one - a_dd;
    const DoubleDouble pre_dd = one - lam_dd * DoubleDouble(double(n)) / (one - eps_dd);
    const auto nu = static_cast<unsigned>(n);
    auto dnum = [=](const auto& s) {
        using J = std::decay_t<decltype(s)>;
        const auto eps_ = JetScalar<J>::from(eps_dd);
        const auto oml_ = JetScalar<J>::from(oml_dd);
        const auto lme_ = JetScalar<J>::from(lme_dd);
        const auto a_ = JetScalar<J>::from(a_dd);
        const auto pre_ = JetScalar<J>::from(pre_dd);
        J e = pow_int(1.0 - eps_ * s, nu);
        J p = pow_int(oml_ + lme_ * s, nu);
        return pre_ * ((1.0 - s) * (a_ * e - p));
    };
    auto dden = [=](const auto& s) {
        using J = std::decay_t<decltype(s)>;
        const auto eps_ = JetScalar<J>::from(eps_dd);
        const auto oml_ = JetScalar<J>::from(oml_dd);
        const auto lme_ = JetScalar<J>::from(lme_dd);
        const auto oma_ = JetScalar<J>::from(oma_dd);
        J e = pow_int(1.0 - eps_ * s, nu);
        J p = pow_int(oml_ + lme_ * s, nu);
        return oma_ * (s * e - p);
    };
    auto num_fn = [=](const auto& s) {
        using J = std::decay_t<decltype(s)>;
        const auto eps_ = JetScalar<J>::from(eps_dd);
        const auto oml_ = JetScalar<J>::from(oml_dd);
        const auto lme_ = JetScalar<J>::from(lme_dd);
        const auto a_ = JetScalar<J>::from(a_dd);
        J e = pow_int(1.0 - eps_ * s, nu);
        J p = pow_int(oml_ + lme_ * s, nu);
        J sa = scale_jet(s, a_);
        J den2 = (1.0 - sa) * dden(sa);
        J num2 = (1.0 - s) * dnum(sa);
        return (p - a_ * e) * (dnum(s) * den2 - num2 * dden(s));
    };
    auto den_fn = [=](const auto& s) {
        using J = std::decay_t<decltype(s)>;
        const auto eps_ = JetScalar<J>::from(eps_dd);
        const auto a_ = JetScalar<J>::from(a_dd);
        const auto oma_ = JetScalar<J>::from(oma_dd);
        J e = pow_int(1.0 - eps_ * s, nu);
        J sa = scale_jet(s, a_);
        J den2 = (1.0 - sa) * dden(sa);
        return (oma_ * e) * (dden(s) * den2);
    };
    const double radius = std::min(gd.radius(), 1.0 / a_dd.to_double());
    g.set_closed_form(num_fn, den_fn, radius);

    check_normalized(g, "peak_age_pgf_sync");
    return g;
}

RationalPgf peak_age_pgf_async(const SystemParams& params) {
    if (params.regime != Regime::FrameAsync)
        throw ParameterError("peak_age_pgf_async: params are not frame-asynchronous");
    if (!params.stable())
        throw StabilityError("peak_age_pgf_async: lambda*n >= 1 - epsilon");

    const double lam = params.lambda;
    const double eps = params.epsilon;
    const int n = params.n;
    const size_t nz = static_cast<size_t>(n);

    RationalPgf gd = delay_pgf_async(params);

    const DoubleDouble a2 = DoubleDouble(1.0) - DoubleDouble(lam);

    const Poly num_scaled = Poly{1.0, -1.0} * gd.num().arg_scaled(a2);
    const Poly den_scaled =
        Poly(std::vector<DoubleDouble>{DoubleDouble(1.0), -a2}) * gd.den().arg_scaled(a2);
    const Poly inner_num = gd.num() * den_scaled - num_scaled * gd.den();
    const Poly inner_den = gd.den() * den_scaled;

    const Poly pref_num = Poly::constant(DoubleDouble(1.0) - DoubleDouble(eps)).shifted_up(n);
    std::vector<DoubleDouble> pd(nz + 1);
    pd[0] = DoubleDouble(1.0);
    pd[nz] += DoubleDouble(-eps);
    const Poly pref_den(std::move(pd));

    RationalPgf g(pref_num * inner_num, pref_den * inner_den, UnitLabel::ChannelUses);
    g.set_support_min(n);

    const DoubleDouble lam_dd(lam), eps_dd(eps);
    const DoubleDouble c_dd =
        DoubleDouble(1.0) - eps_dd - lam_dd * DoubleDouble(double(n));
    const DoubleDouble ome_dd = DoubleDouble(1.0) - eps_dd;
    const auto nu = static_cast<unsigned>(n);
    auto dnum = [=](const auto& s) {
        using J = std::decay_t<decltype(s)>;
        const auto c_ = JetScalar<J>::from(c_dd);
        return ((s - 1.0) * c_) * pow_int(s, nu);
    };
    auto dden = [=](const auto& s) {
        using J = std::decay_t<decltype(s)>;
        const auto lam_ = JetScalar<J>::from(lam_dd);
        const auto eps_ = JetScalar<J>::from(eps_dd);
        const auto oml_ = JetScalar<J>::from(a2);
        return (s - oml_) - (lam_ + eps_ * (s - 1.0)) * pow_int(s, nu);
    };
    auto num_fn = [=](const auto& s) {
        using J = std::decay_t<decltype(s)>;
        const auto b_ = JetScalar<J>::from(a2);
        const auto ome_ = JetScalar<J>::from(ome_dd);
        J sb = scale_jet(s, b_);
        J den2 = (1.0 - sb) * dden(sb);
        J num2 = (1.0 - s) * dnum(sb);
        return (ome_ * pow_int(s, nu)) * (dnum(s) * den2 - num2 * dden(s));
    };
    auto den_fn = [=](const auto& s) {
        using J = std::decay_t<decltype(s)>;
        const auto b_ = JetScalar<J>::from(a2);
        const auto eps_ = JetScalar<J>::from(eps_dd);
        J sb = scale_jet(s, b_);
        J den2 = (1.0 - sb) * dden(sb);
        return (1.0 - eps_ * pow_int(s, nu)) * (dden(s) * den2);
    };
    double radius = std::min(gd.radius(), 1.0 / (1.0 - lam));
    if (eps > 0.0) radius = std::min(radius, std::pow(eps, -1.0 / n));
    g.set_closed_form(num_fn, den_fn, radius);

    check_normalized(g, "peak_age_pgf_async");
    return g;
}

namespace blocks {

RationalPgf arrival_indicator_pgf(const SystemParams& params) {
    const DoubleDouble a =
        pow_int(DoubleDouble(1.0) - DoubleDouble(params.lambda),
                static_cast<unsigned>(params.n));
    Poly num(std::vector<DoubleDouble>{a, DoubleDouble(1.0) - a});
    return RationalPgf(std::move(num), Poly{1.0}, UnitLabel::Frames);
}

RationalPgf packet_service_pgf(const SystemParams& params) {
    const double eps = params.epsilon;
    return RationalPgf(Poly{0.0, 1.0 - eps}, Poly{1.0, -eps}, UnitLabel::Frames);
}

RationalPgf bulk_size_pgf(const SystemParams& params) {
    // Counts packets in a nonempty frame; carries the frame unit label for
    // interface uniformity only.
    const DoubleDouble one(1.0);
    const DoubleDouble lam(params.lambda);
    const DoubleDouble a = pow_int(one - lam, static_cast<unsigned>(params.n));
    Poly num = Poly::affine_power(one - lam, lam, params.n) - Poly::constant(a);
    num = num.scaled(one / (one - a));
    return RationalPgf(std::move(num), Poly{1.0}, UnitLabel::Frames);
}

RationalPgf bulk_service_pgf(const SystemParams& params) {
    RationalPgf b = bulk_size_pgf(params);
    const double eps = params.epsilon;
    // b is a plain polynomial; compose with the Geometric(1-eps) transform
    // u/v by rational Horner: r <- r*(u/v) + b_k.
    const Poly u{0.0, 1.0 - eps};
    const Poly v{1.0, -eps};
    const auto& coeff = b.num().coeffs();
    Poly num = Poly::constant(coeff.back());
    Poly den{1.0};
    for (size_t k = coeff.size() - 1; k-- > 0;) {
        num = num * u + (den * v).scaled(coeff[k]);
        den = den * v;
    }
    return RationalPgf(std::move(num), std::move(den), UnitLabel::Frames);
}

double mean_arrivals_per_service(const SystemParams& params) {
    return params.lambda * params.n / (1.0 - params.epsilon);
}

} // namespace blocks

namespace {

// p(c0 + c1 s) by polynomial Horner.
Poly compose_affine(const Poly& p, DoubleDouble c0, DoubleDouble c1) {
    const Poly aff(std::vector<DoubleDouble>{c0, c1});
    const auto& c = p.coeffs();
    Poly r = Poly::constant(c.back());
    for (size_t k = c.size() - 1; k-- > 0;) r = r * aff + Poly::constant(c[k]);
    return r;
}

// (1-a)^K * p((s-a)/(1-a)) without ever dividing by the small 1-a:
// sum_i c_i (s-a)^i (1-a)^{K-i}, Horner with a running power.
Poly compose_affine_inverse_homog(const Poly& p, DoubleDouble a, int big_k) {
    const DoubleDouble w = DoubleDouble(1.0) - a;
    const Poly aff(std::vector<DoubleDouble>{-a, DoubleDouble(1.0)});
    const auto& c = p.coeffs();
    Poly r = Poly::constant(c.back());
    DoubleDouble pw(1.0);
    for (size_t k = c.size() - 1; k-- > 0;) {
        pw *= w;
        r = r * aff + Poly::constant(c[k] * pw);
    }
    const int deficit = big_k - p.degree();
    if (deficit > 0) r = r.scaled(pow_int(w, static_cast<unsigned>(deficit)));
    return r;
}

} // namespace

RationalPgf appendix_chain_pgf(const SystemParams& params) {
    if (params.regime != Regime::FrameSync)
        throw ParameterError("appendix_chain_pgf: params are not frame-synchronous");
    if (!params.stable())
        throw StabilityError("appendix_chain_pgf: lambda*n >= 1 - epsilon");

    const DoubleDouble one(1.0);
    const DoubleDouble a = pow_int(one - DoubleDouble(params.lambda),
                                   static_cast<unsigned>(params.n));

    // Bulk service time = bulk size composed with per-packet Geometric.
    RationalPgf sb = blocks::bulk_service_pgf(params);

    // Arrivals per frame of the service process: substitute the indicator
    // transform a + (1-a) s into the bulk-service transform.
    Poly m_num = compose_affine(sb.num(), a, one - a);
    Poly m_den = compose_affine(sb.den(), a, one - a);

    // Queue-length style transform (1 - E[M]) (s-1) G_M / (s - G_M).
    const DoubleDouble em = DoubleDouble(params.lambda) * DoubleDouble(double(params.n)) /
                            (one - DoubleDouble(params.epsilon));
    Poly q_num = (Poly{-1.0, 1.0} * m_num).scaled(one - em);
    Poly q_den = m_den.shifted_up(1) - m_num;

    // Final substitution s -> (s - a)/(1 - a), homogenized so both
    // polynomials share the common factor (1-a)^K and no coefficient is
    // ever divided by the small 1-a.
    const int big_k = std::max(q_num.degree(), q_den.degree());
    Poly d_num = compose_affine_inverse_homog(q_num, a, big_k);
    Poly d_den = compose_affine_inverse_homog(q_den, a, big_k);

    // No normalization probe here: this path is a dense-only cross-check
    // with no structured evaluators, and G(1) is not recoverable from the
    // dense coefficients at large n*eps; agreement with delay_pgf_sync is
    // asserted pointwise on [0, 0.99] by the tests instead.
    RationalPgf g(std::move(d_num), std::move(d_den), UnitLabel::Frames);
    g.set_support_min(1);
    return g;
}

namespace {

// Dense Horner with a running magnitude sum: `bound` is the roundoff
// attainable at these coefficient scales (construction + evaluation),
// the yardstick for deciding whether a computed value is genuinely zero.
struct BoundedValue {
    double value;
    double bound;
};

BoundedValue eval_bounded(const Poly& p, double s) {
    const auto& c = p.coeffs();
    DoubleDouble acc = c.back();
    double mag = std::abs(c.back().to_double());
    const DoubleDouble sd(s);
    for (size_t i = c.size() - 1; i-- > 0;) {
        acc = acc * sd + c[i];
        mag = mag * s + std::abs(c[i].to_double());
    }
    return {acc.to_double(), 1e-27 * mag + 1e-280};
}

// Synthetic division by (x - s); the remainder (= p(s), known to be at
// roundoff level when this is called) is dropped.
Poly deflate_at(const Poly& p, double s) {
    const auto& c = p.coeffs();
    if (c.size() == 1) return Poly();
    std::vector<DoubleDouble> q(c.size() - 1);
    const DoubleDouble sd(s);
    q[c.size() - 2] = c.back();
    for (size_t i = c.size() - 2; i >= 1; --i) q[i - 1] = c[i] + sd * q[i];
    return Poly(std::move(q));
}

} // namespace

double eval_at(const RationalPgf& pgf, double s) {
    if (!(s >= -1e-12) || !(s <= 1.0 + 1e-12))
        throw ParameterError("eval_at: s must lie in [0, 1]");
    s = std::min(std::max(s, 0.0), 1.0);

    if (pgf.has_closed_form()) {
        // Product-form evaluation keeps relative accuracy where the dense
        // coefficients cancel catastrophically (large n with sizable eps);
        // a vanishing denominator is the shared simple root at s = 1.
        const DdJet2 sj = DdJet2::variable(s);
        const DdJet2 nj = pgf.closed_num(sj);
        const DdJet2 dj = pgf.closed_den(sj);
        if (std::abs(dj.v.to_double()) > 1e-9 * std::abs(dj.d1.to_double()))
            return (nj.v / dj.v).to_double();
        if (std::abs(nj.v.to_double()) > 1e-9 * std::abs(nj.d1.to_double())) {
            std::ostringstream os;
            os << "eval_at: non-removable pole at s = " << s;
            throw EvaluationError(os.str());
        }
        if (std::abs(dj.d1.to_double()) > 1e-9 * std::abs(dj.d2.to_double()))
            return (nj.d1 / dj.d1).to_double();
        if (dj.d2.to_double() != 0.0) return (nj.d2 / dj.d2).to_double();
        std::ostringstream os;
        os << "eval_at: singularity at s = " << s << " did not resolve";
        throw EvaluationError(os.str());
    }

    Poly u = pgf.num();
    Poly v = pgf.den();
    for (int round = 0; round <= 3; ++round) {
        const BoundedValue uv = eval_bounded(u, s);
        const BoundedValue vv = eval_bounded(v, s);
        if (std::abs(vv.value) > vv.bound) return uv.value / vv.value;
        if (std::abs(uv.value) > uv.bound) {
            std::ostringstream os;
            os << "eval_at: non-removable pole at s = " << s;
            throw EvaluationError(os.str());
        }
        if (u.size() == 1 || v.size() == 1) break;
        u = deflate_at(u, s);
        v = deflate_at(v, s);
    }
    std::ostringstream os;
    os << "eval_at: singularity at s = " << s << " did not resolve within 3 rounds";
    throw EvaluationError(os.str());
}

RationalPgf scale_argument(const RationalPgf& pgf, double a) {
    if (!(a > 0.0) || !(a <= 1.0))
        throw ParameterError("scale_argument: a must be in (0, 1]");
    return RationalPgf(pgf.num().arg_scaled(DoubleDouble(a)),
                       pgf.den().arg_scaled(DoubleDouble(a)), pgf.unit());
}

namespace {
void require_same_unit(const RationalPgf& a, const RationalPgf& b, const char* op) {
    if (a.unit() != b.unit())
        throw ParameterError(std::string(op) + ": unit labels differ");
}
} // namespace

RationalPgf multiply(const RationalPgf& a, const RationalPgf& b) {
    require_same_unit(a, b, "multiply");
    return RationalPgf(a.num() * b.num(), a.den() * b.den(), a.unit());
}

RationalPgf add(const RationalPgf& a, const RationalPgf& b) {
    require_same_unit(a, b, "add");
    return RationalPgf(a.num() * b.den() + b.num() * a.den(), a.den() * b.den(), a.unit());
}

RationalPgf subtract(const RationalPgf& a, const RationalPgf& b) {
    require_same_unit(a, b, "subtract");
    return RationalPgf(a.num() * b.den() - b.num() * a.den(), a.den() * b.den(), a.unit());
}

double mean_from_pgf(const RationalPgf& pgf) {
    if (pgf.has_closed_form()) {
        const DdJet2 one = DdJet2::variable(1.0);
        const DdJet2 nj = pgf.closed_num(one);
        const DdJet2 dj = pgf.closed_den(one);
        if (std::abs(dj.v.to_double()) > 1e-9 * std::abs(dj.d1.to_double()))
            return ((nj.d1 * dj.v - nj.v * dj.d1) / (dj.v * dj.v)).to_double();
        // Shared simple root: num = (s-1) nh, den = (s-1) dh, so
        // nh(1) = num'(1) and nh'(1) = num''(1)/2; then G'(1) = (nh/dh)'(1).
        const DoubleDouble nh = nj.d1, nh1 = DoubleDouble(0.5) * nj.d2;
        const DoubleDouble dh = dj.d1, dh1 = DoubleDouble(0.5) * dj.d2;
        if (dh.to_double() == 0.0)
            throw NumericInstabilityError("mean_from_pgf: mean diverges (pole at s = 1)");
        return ((nh1 * dh - nh * dh1) / (dh * dh)).to_double();
    }

    // Dense fallback for building-block transforms with modest coefficients.
    Poly u = pgf.num();
    Poly v = pgf.den();
    for (int round = 0; round < 3; ++round) {
        DoubleDouble ru, rv;
        Poly uq = u.deflate_root_one(&ru);
        Poly vq = v.deflate_root_one(&rv);
        if (std::abs(ru.to_double()) < 1e-12 && std::abs(rv.to_double()) < 1e-12 &&
            u.size() > 1 && v.size() > 1) {
            u = std::move(uq);
            v = std::move(vq);
        } else {
            break;
        }
    }
    const DoubleDouble one(1.0);
    const DoubleDouble v1 = v.eval(one);
    if (std::abs(v1.to_double()) < 1e-12)
        throw NumericInstabilityError("mean_from_pgf: mean diverges (pole at s = 1)");
    const DoubleDouble u1 = u.eval(one);
    const DoubleDouble du = u.derivative().eval(one);
    const DoubleDouble dv = v.derivative().eval(one);
    return ((du * v1 - u1 * dv) / (v1 * v1)).to_double();
}

} // namespace shortpkt
