#pragma once

#include <functional>
#include <vector>

#include "shortpkt/errors.hpp"
#include "shortpkt/jet.hpp"
#include "shortpkt/poly.hpp"

namespace shortpkt {

enum class Regime { FrameSync, FrameAsync };
enum class UnitLabel { Frames, ChannelUses };

// Queue-level parameters: per-CU arrival probability lambda, blocklength n,
// packet error probability epsilon, and the service regime. The normal
// constructor enforces the stability condition lambda * n < 1 - epsilon;
// `unchecked` skips only that check (for overload studies with the
// simulator; the analytic constructors re-check and still throw).
struct SystemParams {
    double lambda;
    int n;
    double epsilon;
    Regime regime;

    SystemParams(double lambda, int n, double epsilon, Regime regime);
    static SystemParams unchecked(double lambda, int n, double epsilon, Regime regime);

    bool stable() const { return lambda * n < 1.0 - epsilon; }

private:
    struct unchecked_tag {};
    SystemParams(unchecked_tag, double lambda, int n, double epsilon, Regime regime);
};

// A probability generating function (or intermediate rational function)
// G(s) = num(s) / den(s), dense coefficients in ascending powers of s.
//
// Two evaluation layers coexist:
//  - the dense coefficient layer (double-double) drives series inversion,
//    means, and evaluation on [0, 1];
//  - an optional closed-form evaluator (powers of affine forms, evaluated
//    with second-order jets) drives evaluation at s > 1, where the dense
//    expanded coefficients are catastrophically ill-conditioned. Library
//    constructors attach it together with the convergence radius.
class RationalPgf {
public:
    using ClosedForm = std::function<Jet2(const Jet2&)>;
    using DdClosedForm = std::function<DdJet2(const DdJet2&)>;

    RationalPgf(Poly num, Poly den, UnitLabel unit);

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    UnitLabel unit() const { return unit_; }

    // Smallest power of s that can carry probability mass.
    int support_min() const { return support_min_; }
    void set_support_min(int d) { support_min_ = d; }

    // Numerator and denominator are kept as separate evaluators so that the
    // removable root both share at s = 1 can be resolved by differentiating
    // each side (jets) instead of dividing noise by noise. Each evaluator is
    // stored twice, instantiated from one generic callable: double jets for
    // s > 1 work (saddlepoint), double-double jets for the s = 1 limits,
    // which cancel down to the scale of 1 - eps - n*lambda.
    bool has_closed_form() const { return static_cast<bool>(closed_num_); }
    Jet2 closed_num(const Jet2& s) const { return closed_num_(s); }
    Jet2 closed_den(const Jet2& s) const { return closed_den_(s); }
    DdJet2 closed_num(const DdJet2& s) const { return closed_num_dd_(s); }
    DdJet2 closed_den(const DdJet2& s) const { return closed_den_dd_(s); }
    Jet2 closed_form(const Jet2& s) const { return closed_num_(s) / closed_den_(s); }
    template <class NumFn, class DenFn>
    void set_closed_form(NumFn num_fn, DenFn den_fn, double radius) {
        closed_num_ = num_fn;
        closed_den_ = den_fn;
        closed_num_dd_ = num_fn;
        closed_den_dd_ = den_fn;
        radius_ = radius;
    }

    // Convergence radius (smallest non-removable positive pole); 0 = unknown,
    // infinity = entire.
    double radius() const { return radius_; }

private:
    Poly num_;
    Poly den_;
    UnitLabel unit_;
    int support_min_ = 0;
    ClosedForm closed_num_;
    ClosedForm closed_den_;
    DdClosedForm closed_num_dd_;
    DdClosedForm closed_den_dd_;
    double radius_ = 0.0;
};

// Steady-state bulk delay in frames for the frame-synchronous model:
//   num = (1 - lambda n / (1-eps)) (1-s) [ (1-lambda)^n (1-eps s)^n - (1-lambda+(lambda-eps)s)^n ]
//   den = (1 - (1-lambda)^n) [ s (1-eps s)^n - (1-lambda+(lambda-eps)s)^n ]
RationalPgf delay_pgf_sync(const SystemParams& params);

// Steady-state packet delay in channel uses for the frame-asynchronous model:
//   num = (s-1)(1 - eps - lambda n) s^n
//   den = s - (1-lambda) - (lambda + eps (s-1)) s^n
RationalPgf delay_pgf_async(const SystemParams& params);

// Steady-state peak age of information, frame-synchronous, in frames:
//   [ (1-lambda+(lambda-eps)s)^n - (1-eps s)^n (1-lambda)^n ] / [ (1-eps s)^n (1 - (1-lambda)^n) ]
//     * [ G_D(s) - (1-s) G_D(a s) / (1 - a s) ],   a = (1-lambda)^n
RationalPgf peak_age_pgf_sync(const SystemParams& params);

// Steady-state peak age, frame-asynchronous, in channel uses:
//   [ (1-eps) s^n / (1 - eps s^n) ] * [ G_D(s) - (1-s) G_D((1-lambda)s) / (1 - (1-lambda)s) ]
RationalPgf peak_age_pgf_async(const SystemParams& params);

// The same sync delay PGF assembled the long way, through the per-cycle
// building blocks (arrival indicator, per-packet and per-bulk service,
// queue-length transform, and the final affine substitution). Must agree
// with delay_pgf_sync as a function; kept as an independent cross-check.
RationalPgf appendix_chain_pgf(const SystemParams& params);

// Building blocks used by appendix_chain_pgf, exposed for direct testing.
namespace blocks {
// Bernoulli indicator that a frame carries at least one arrival:
// (1-lambda)^n + s (1 - (1-lambda)^n)
RationalPgf arrival_indicator_pgf(const SystemParams& params);
// Per-packet service time in frames: Geometric(1-eps), (1-eps)s / (1-eps s)
RationalPgf packet_service_pgf(const SystemParams& params);
// Number of packets in a nonempty frame: [ (1-lambda+lambda s)^n - (1-lambda)^n ] / [ 1 - (1-lambda)^n ]
RationalPgf bulk_size_pgf(const SystemParams& params);
// Per-bulk service time in frames: bulk_size composed with packet_service.
RationalPgf bulk_service_pgf(const SystemParams& params);
// Mean number of packet arrivals per service frame: lambda n / (1 - eps).
double mean_arrivals_per_service(const SystemParams& params);
} // namespace blocks

// Dense evaluation of num(s)/den(s) on s in [0, 1]. A zero is classified
// against the roundoff attainable at the coefficient magnitudes (not a
// fixed threshold — the expansions cancel by many orders). Removable
// singularities, notably the shared root at s = 1, resolve by synthetic
// deflation of both sides, up to 3 rounds; a surviving pole throws.
double eval_at(const RationalPgf& pgf, double s);

// Coefficient-level plumbing used to assemble the peak-age transforms.
RationalPgf scale_argument(const RationalPgf& pgf, double a);
RationalPgf multiply(const RationalPgf& a, const RationalPgf& b);
RationalPgf add(const RationalPgf& a, const RationalPgf& b);
RationalPgf subtract(const RationalPgf& a, const RationalPgf& b);

// E[X] = G'(1). PGFs carrying closed forms resolve the shared root at
// s = 1 through jets on the structured evaluators (dense coefficients
// cannot see (1-eps)^n-scale values at large n*eps); the rest deflate the
// dense polynomials at s = 1 and apply the quotient rule. Throws
// NumericInstabilityError when the mean diverges.
double mean_from_pgf(const RationalPgf& pgf);

} // namespace shortpkt
