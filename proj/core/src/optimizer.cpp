#include "shortpkt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "shortpkt/parallel.hpp"

namespace shortpkt {

namespace {

constexpr double kLambdaFloor = 1e-12;
constexpr double kBoundaryMargin = 1e-9;
constexpr double kBisectRelTol = 1e-4;

double violation_probability(double lambda, int n, double eps, double d0, Method method,
                             Regime regime) {
    const UnitLabel unit =
        regime == Regime::FrameSync ? UnitLabel::Frames : UnitLabel::ChannelUses;
    const int d = threshold_in_units(d0, unit, n);
    if (d < 2) return 1.0; // budget below the minimum support
    const SystemParams params(lambda, n, eps, regime);
    if (method == Method::NetcalcBound) {
        try {
            return netcalc_bound(params, d);
        } catch (const InfeasibleError&) {
            return 1.0; // bound certifies nothing at this load
        }
    }
    const RationalPgf pgf = regime == Regime::FrameSync ? delay_pgf_sync(params)
                                                        : delay_pgf_async(params);
    return tail_series(pgf, d, Precision::Extended).at(d);
}

} // namespace

double max_arrival_rate(const ChannelParams& channel, double d0, double target,
                        Method method, Regime regime) {
    if (!(d0 >= 1.0)) throw ParameterError("max_arrival_rate: d0 must be >= 1");
    if (!(target > 0.0)) throw ParameterError("max_arrival_rate: target must be positive");
    if (method == Method::NetcalcBound && regime != Regime::FrameSync)
        throw ParameterError("max_arrival_rate: the transform bound is sync-only");

    const double eps = error_probability(channel);
    const int n = channel.n;
    const double lambda_hi = (1.0 - eps) / n * (1.0 - kBoundaryMargin);

    if (target >= 1.0) return lambda_hi; // constraint never binds

    // eps ~ 1 (blocklength far above capacity): the stable interval lies
    // entirely below the probe floor; nothing meaningful to search.
    if (lambda_hi <= kLambdaFloor)
        throw InfeasibleError(
            "max_arrival_rate: no stable arrival rate above the search floor");

    std::vector<std::pair<double, double>> probes;
    auto probe = [&](double lambda) {
        const double p = violation_probability(lambda, n, eps, d0, method, regime);
        probes.emplace_back(lambda, p);
        return p;
    };

    if (probe(kLambdaFloor) > target) {
        std::ostringstream os;
        os << "max_arrival_rate: target " << target
           << " is below the retransmission-only floor "
           << probes.front().second;
        throw InfeasibleError(os.str());
    }

    double lo = kLambdaFloor;
    double hi = lambda_hi;
    if (probe(hi) <= target) {
        lo = hi;
    } else {
        while (hi - lo > kBisectRelTol * hi) {
            const double mid = 0.5 * (lo + hi);
            if (probe(mid) <= target)
                lo = mid;
            else
                hi = mid;
        }
    }

    // The bisection assumes P_dv is nondecreasing in lambda; the model does
    // not prove that, so audit the whole probe trace before trusting it.
    std::sort(probes.begin(), probes.end());
    for (size_t i = 1; i < probes.size(); ++i) {
        const double prev = probes[i - 1].second;
        const double cur = probes[i].second;
        if (cur < prev * (1.0 - 1e-9) - 1e-15) {
            std::ostringstream os;
            os << "max_arrival_rate: violation probability not monotone in lambda: P("
               << probes[i - 1].first << ") = " << prev << " > P(" << probes[i].first
               << ") = " << cur;
            throw AssumptionViolationError(os.str());
        }
    }
    return lo;
}

SweepResult blocklength_sweep(double rho, int k, int n_min, int n_max, double lambda,
                              double d0) {
    if (n_min < 1 || n_max < n_min)
        throw ParameterError("blocklength_sweep: need 1 <= n_min <= n_max");
    if (!(lambda > 0.0) || !(lambda < 1.0))
        throw ParameterError("blocklength_sweep: lambda must be in (0, 1)");
    if (!(d0 >= 1.0)) throw ParameterError("blocklength_sweep: d0 must be >= 1");

    const int count = n_max - n_min + 1;
    SweepResult result;
    result.rows.resize(static_cast<size_t>(count));

    parallel_for_index(count, [&](int i) {
        const int n = n_min + i;
        const double eps = error_probability(ChannelParams{rho, k, n});
        const int d = threshold_in_units(d0, UnitLabel::Frames, n);
        SweepRow row{n, eps, d, 1.0};
        if (lambda * n < 1.0 - eps && d >= 2) {
            const SystemParams params(lambda, n, eps, Regime::FrameSync);
            row.pdv = tail_series(delay_pgf_sync(params), d, Precision::Extended).at(d);
        }
        result.rows[static_cast<size_t>(i)] = row;
    });

    bool any_stable = false;
    size_t best = 0;
    for (size_t i = 0; i < result.rows.size(); ++i) {
        const SweepRow& row = result.rows[i];
        if (lambda * row.n < 1.0 - row.epsilon) any_stable = true;
        if (row.pdv < result.rows[best].pdv) best = i;
    }
    if (!any_stable)
        throw StabilityError("blocklength_sweep: no stable blocklength in range");
    result.argmin_n = result.rows[best].n;
    return result;
}

std::vector<ThroughputPoint> throughput_vs_blocklength(double rho, int k, int n_min,
                                                       int n_max, double d0, double target,
                                                       Method method) {
    if (n_min < 1 || n_max < n_min)
        throw ParameterError("throughput_vs_blocklength: need 1 <= n_min <= n_max");

    const int count = n_max - n_min + 1;
    std::vector<ThroughputPoint> points(static_cast<size_t>(count));
    parallel_for_index(count, [&](int i) {
        const int n = n_min + i;
        const ChannelParams channel{rho, k, n};
        ThroughputPoint pt{n, error_probability(channel), 0.0, 0.0, method};
        try {
            pt.lambda_star = max_arrival_rate(channel, d0, target, method);
        } catch (const InfeasibleError&) {
            pt.lambda_star = 0.0;
        }
        pt.throughput = k * pt.lambda_star;
        points[static_cast<size_t>(i)] = pt;
    });
    return points;
}

} // namespace shortpkt
