#pragma once

#include <vector>

#include "shortpkt/analysis.hpp"
#include "shortpkt/channel.hpp"

namespace shortpkt {

enum class Method { ExactInversion, NetcalcBound };

struct ThroughputPoint {
    int n;
    double epsilon;
    double lambda_star; // packets per CU
    double throughput;  // k * lambda_star, bits per CU
    Method method;
};

// Largest lambda whose delay violation probability at budget d0 (CUs) stays
// within `target`. Bisection over (0, (1-eps)/n), relative tolerance 1e-4.
// Monotonicity of the violation probability in lambda is not proven by the
// model; it is verified on the bisection trace and a violation aborts.
// Throws InfeasibleError when even lambda -> 0 misses the target.
double max_arrival_rate(const ChannelParams& channel, double d0, double target,
                        Method method, Regime regime = Regime::FrameSync);

struct SweepRow {
    int n;
    double epsilon;
    int d;      // threshold in frames
    double pdv; // 1.0 for unstable n or d < 2
};

struct SweepResult {
    std::vector<SweepRow> rows;
    int argmin_n;
};

// Exhaustive integer sweep of the delay violation probability over
// blocklengths (the curve jumps where ceil(d0/n) changes, so no unimodal
// search applies). Frame-sync, exact inversion, extended precision.
SweepResult blocklength_sweep(double rho, int k, int n_min, int n_max,
                              double lambda, double d0);

// max_arrival_rate applied per blocklength. Infeasible n yields
// lambda_star = 0.
std::vector<ThroughputPoint>
throughput_vs_blocklength(double rho, int k, int n_min, int n_max, double d0,
                          double target, Method method);

} // namespace shortpkt
