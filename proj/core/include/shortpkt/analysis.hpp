#pragma once

#include <utility>
#include <vector>

#include "shortpkt/pgf.hpp"

namespace shortpkt {

// Arithmetic used by the series-inversion recursion. Construction of the
// coefficient vectors is always extended; this selects only the recursion.
enum class Precision { Double, Extended };

// Violation probabilities P(X >= d) for d = 1..d_max. values[d-1] = P(X >= d).
struct TailSeries {
    std::vector<double> values;
    UnitLabel unit;

    int d_max() const { return static_cast<int>(values.size()); }
    double at(int d) const {
        if (d < 1 || d > d_max()) throw ParameterError("TailSeries::at: d out of range");
        return values[static_cast<size_t>(d) - 1];
    }
};

// Latency budget d0 in channel uses -> integer threshold in the PGF's unit:
// ceil(d0 / n) for Frames, ceil(d0) for ChannelUses.
int threshold_in_units(double d0, UnitLabel unit, int n);

// Exact inversion: power-series coefficients c_j of F(s) = G(s)/(1-s) via
// the linear recursion c_j = (f_j - sum_{i>=1} g_i c_{j-i}) / g_0, where
// c_j = P(X <= j); returns P(X >= d) = 1 - c_{d-1}. The offset convention
// is calibrated against the Monte-Carlo oracle and frozen. Divergence
// (|c_j| > 1 + 1e-6) throws NumericInstabilityError.
TailSeries tail_series(const RationalPgf& pgf, int d_max,
                       Precision precision = Precision::Extended);

// Audit trail of one saddlepoint evaluation.
struct SaddlepointDiagnostics {
    double theta;  // tilt, root of kappa'(theta) = d
    double kappa;  // kappa(theta) = log G(e^theta)
    double sigma;  // sqrt(kappa''(theta))
    double b0;     // B0(theta * sigma), B0(x) = x e^{x^2/2} Q(x)
    double approx; // resulting tail probability
};

// Tail approximation P(X >= d) ~= B0(theta sigma) / (sigma (1 - e^-theta))
// * exp(kappa(theta) - theta d), theta solving kappa'(theta) = d by
// safeguarded Newton bracketed below the log of the convergence radius.
// Requires d > mean (BelowMeanError otherwise).
std::pair<double, SaddlepointDiagnostics>
saddlepoint_tail(const RationalPgf& pgf, int d);

// Transform-domain upper bound on P(D >= d) for the frame-sync model:
// minimize h(s) = G_U(1/s)^{d-1} / (1 - G_A(s) G_U(1/s)) over s > 1 with
// G_A(s) G_U(1/s) < 1, where G_A(s) = (1-lambda+lambda s)^n and
// G_U(1/s) = eps + (1-eps)/s. Golden-section on log s; result capped at 1.
// Empty feasible set throws InfeasibleError.
double netcalc_bound(const SystemParams& params, int d);

} // namespace shortpkt
