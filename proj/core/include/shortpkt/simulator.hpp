#pragma once

#include <cstdint>
#include <vector>

#include "shortpkt/analysis.hpp"
#include "shortpkt/pgf.hpp"

namespace shortpkt {

struct SimConfig {
    SystemParams params;
    std::uint64_t horizon_cu = 100'000'000;
    // Sentinel UINT64_MAX = default 10% of horizon.
    std::uint64_t warmup_cu = UINT64_MAX;
    std::uint64_t seed = 1;
    int replicas = 1;
};

// Empirical counterparts of the analytic distributions. Delay and peak age
// are recorded per bulk (frame-sync, unit Frames) or per packet
// (frame-async, unit ChannelUses).
struct SimStats {
    TailSeries delay_ccdf;                 // index d-1: empirical P(D >= d)
    std::vector<double> delay_stderr;      // binomial standard error per point
    TailSeries peak_age_ccdf;
    std::vector<double> peak_age_stderr;

    double mean_delay = 0.0;
    double mean_delay_stderr = 0.0;
    double mean_peak_age = 0.0;
    double mean_peak_age_stderr = 0.0;

    std::uint64_t bulks_observed = 0;      // recorded delay samples
    std::uint64_t age_samples = 0;

    // Pathwise sanity counters; both must be zero.
    std::uint64_t age_bound_violations = 0;

    // Time-average number of bulks/packets in system over the recorded
    // window (regime units), and the recorded packet arrival rate per
    // channel use, for Little's-law style cross-checks.
    double occupancy_time_avg = 0.0;
    double arrival_rate = 0.0;
};

// Event-driven Monte Carlo of the FCFS retransmission queue. Arrivals are
// Bernoulli(lambda) per CU; service of the head bulk/packet takes
// Geometric(1-eps) transmissions of n CUs each. Frame-sync: arrivals within
// one frame form a bulk, service starts at the next frame boundary.
// Frame-async: packets are served individually, service starts at the next
// CU. Inter-arrival gaps and service times are sampled geometrically, so
// cost scales with the number of bulks, not CUs. Replicas run with derived
// sub-seeds and merge in replica order; results are byte-deterministic for
// a fixed config, independent of thread count.
SimStats simulate(const SimConfig& config);

// Same computation; the name states the contract that a fixed config
// (seed included) reproduces SimStats bit for bit.
SimStats deterministic_replay(const SimConfig& config);

} // namespace shortpkt
