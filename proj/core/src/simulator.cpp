#include "shortpkt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "shortpkt/parallel.hpp"
#include "shortpkt/rng.hpp"

namespace shortpkt {

namespace {

constexpr std::uint64_t kBatchSize = 4096;

// Streaming accumulator for one nonnegative-integer sample stream:
// exact histogram (index = value), moments, and batch means for the
// mean's standard error.
struct SampleAccum {
    std::vector<std::uint64_t> hist;
    std::uint64_t count = 0;
    double sum = 0.0;
    double sumsq = 0.0;
    std::vector<double> batch_means;
    double batch_sum = 0.0;
    std::uint64_t batch_n = 0;

    void add(std::uint64_t v) {
        if (v >= hist.size()) hist.resize(v + 1, 0);
        ++hist[v];
        ++count;
        const double x = static_cast<double>(v);
        sum += x;
        sumsq += x * x;
        batch_sum += x;
        if (++batch_n == kBatchSize) {
            batch_means.push_back(batch_sum / static_cast<double>(kBatchSize));
            batch_sum = 0.0;
            batch_n = 0;
        }
    }

    // Replica merge, applied in replica-index order. Partial batches stay in
    // the moment sums (so the grand mean is exact) but are not promoted to
    // batch means.
    void merge_from(const SampleAccum& o) {
        if (o.hist.size() > hist.size()) hist.resize(o.hist.size(), 0);
        for (size_t i = 0; i < o.hist.size(); ++i) hist[i] += o.hist[i];
        count += o.count;
        sum += o.sum;
        sumsq += o.sumsq;
        batch_means.insert(batch_means.end(), o.batch_means.begin(), o.batch_means.end());
    }

    double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }

    double mean_stderr() const {
        if (count == 0) return 0.0;
        const double m = mean();
        if (batch_means.size() >= 2) {
            double acc = 0.0;
            double bm = 0.0;
            for (double b : batch_means) bm += b;
            bm /= static_cast<double>(batch_means.size());
            for (double b : batch_means) acc += (b - bm) * (b - bm);
            acc /= static_cast<double>(batch_means.size() - 1);
            return std::sqrt(acc / static_cast<double>(batch_means.size()));
        }
        const double var = std::max(0.0, sumsq / static_cast<double>(count) - m * m);
        return std::sqrt(var / static_cast<double>(count));
    }

    void ccdf(TailSeries* series, std::vector<double>* se, UnitLabel unit) const {
        series->unit = unit;
        series->values.clear();
        se->clear();
        if (count == 0) return;
        const size_t vmax = hist.size() - 1;
        series->values.resize(vmax, 0.0);
        se->resize(vmax, 0.0);
        std::uint64_t suffix = 0;
        const double total = static_cast<double>(count);
        for (size_t d = vmax; d >= 1; --d) {
            suffix += hist[d];
            const double p = static_cast<double>(suffix) / total;
            (*series).values[d - 1] = p;
            (*se)[d - 1] = std::sqrt(std::max(0.0, p * (1.0 - p)) / total);
        }
    }
};

struct ReplicaResult {
    SampleAccum delay;
    SampleAccum age;
    std::uint64_t packets = 0;
    std::uint64_t violations = 0;
    double occupancy_integral = 0.0;
};

// Frame-sync: only frames matter. Nonempty frames occur with probability
// 1-(1-lambda)^n, bulk sizes are Binomial(n, lambda) conditioned on >= 1,
// and the head-of-line recursion runs per bulk (Lindley in frames).
ReplicaResult run_sync(const SystemParams& params, std::uint64_t horizon_cu,
                       std::uint64_t warmup_cu, std::uint64_t seed) {
    const int n = params.n;
    const double lam = params.lambda;
    const double eps = params.epsilon;

    ReplicaResult r;
    const std::int64_t horizon_frames =
        static_cast<std::int64_t>(horizon_cu / static_cast<std::uint64_t>(n));
    const std::int64_t warmup_frames = static_cast<std::int64_t>(
        (warmup_cu + static_cast<std::uint64_t>(n) - 1) / static_cast<std::uint64_t>(n));
    if (horizon_frames <= warmup_frames) return r;

    Xoshiro256pp rng(seed);
    const double log_miss = std::log1p(-lam);
    const double p_bulk = -std::expm1(n * log_miss);
    const double a = std::exp(n * log_miss);
    const double first_mass = n * lam * std::exp((n - 1) * log_miss) / (1.0 - a);
    const double ratio = lam / (1.0 - lam);

    std::int64_t t = -1;          // frame holding the current bulk's arrivals
    std::int64_t next_free = 0;   // first frame the server can start in
    std::int64_t prev_t = 0;
    std::uint64_t prev_d = 0;
    bool have_prev = false;

    while (true) {
        t += static_cast<std::int64_t>(rng.geometric(p_bulk));
        if (t >= horizon_frames) break;

        // Bulk size: inverse-CDF walk over the conditioned binomial.
        std::uint64_t bulk = 1;
        {
            const double u = rng.uniform();
            double pk = first_mass;
            double cum = first_mass;
            while (u > cum && bulk < static_cast<std::uint64_t>(n)) {
                pk *= static_cast<double>(n - static_cast<int>(bulk)) /
                      static_cast<double>(bulk + 1) * ratio;
                ++bulk;
                cum += pk;
            }
        }

        std::uint64_t service = 0;
        for (std::uint64_t i = 0; i < bulk; ++i) service += rng.geometric(1.0 - eps);

        const std::int64_t start = std::max(t + 1, next_free);
        const std::uint64_t d = static_cast<std::uint64_t>(start - t) + service - 1;
        next_free = start + static_cast<std::int64_t>(service);

        const double lo = std::max<double>(static_cast<double>(t),
                                           static_cast<double>(warmup_frames));
        const double hi = std::min<double>(static_cast<double>(t) + static_cast<double>(d),
                                           static_cast<double>(horizon_frames));
        if (hi > lo) r.occupancy_integral += hi - lo;

        if (t >= warmup_frames) {
            r.delay.add(d);
            r.packets += bulk;
            if (have_prev) {
                const std::uint64_t age = static_cast<std::uint64_t>(t - prev_t) + d;
                r.age.add(age);
                if (age < prev_d + 1) ++r.violations;
            }
            have_prev = true;
            prev_t = t;
            prev_d = d;
        }
    }
    return r;
}

// Frame-async: per-packet Lindley recursion in CUs with geometric
// inter-arrival gaps and service n * Geometric(1-eps).
ReplicaResult run_async(const SystemParams& params, std::uint64_t horizon_cu,
                        std::uint64_t warmup_cu, std::uint64_t seed) {
    const int n = params.n;
    const double lam = params.lambda;
    const double eps = params.epsilon;

    ReplicaResult r;
    const auto horizon = static_cast<std::int64_t>(horizon_cu);
    const auto warmup = static_cast<std::int64_t>(warmup_cu);
    if (horizon <= warmup) return r;

    Xoshiro256pp rng(seed);

    std::int64_t t = -1;
    std::int64_t prev_arrival = 0;
    std::uint64_t prev_d = 0;
    bool first = true;

    std::int64_t prev_rec_t = 0;
    std::uint64_t prev_rec_d = 0;
    bool have_prev_rec = false;

    while (true) {
        t += static_cast<std::int64_t>(rng.geometric(lam));
        if (t >= horizon) break;

        const std::uint64_t service =
            static_cast<std::uint64_t>(n) * rng.geometric(1.0 - eps);
        std::uint64_t d;
        if (first) {
            d = service;
            first = false;
        } else {
            const auto gap = static_cast<std::uint64_t>(t - prev_arrival);
            d = (prev_d > gap ? prev_d - gap : 0) + service;
        }
        prev_arrival = t;
        prev_d = d;

        const double lo = std::max<double>(static_cast<double>(t),
                                           static_cast<double>(warmup));
        const double hi = std::min<double>(static_cast<double>(t) + static_cast<double>(d),
                                           static_cast<double>(horizon));
        if (hi > lo) r.occupancy_integral += hi - lo;

        if (t >= warmup) {
            r.delay.add(d);
            ++r.packets;
            if (have_prev_rec) {
                const std::uint64_t age = static_cast<std::uint64_t>(t - prev_rec_t) + d;
                r.age.add(age);
                if (age < static_cast<std::uint64_t>(n)) ++r.violations;
            }
            have_prev_rec = true;
            prev_rec_t = t;
            prev_rec_d = d;
        }
    }
    (void)prev_rec_d;
    return r;
}

} // namespace

SimStats simulate(const SimConfig& config) {
    if (config.replicas < 1) throw ParameterError("simulate: replicas must be >= 1");
    const std::uint64_t horizon = config.horizon_cu;
    const std::uint64_t warmup =
        config.warmup_cu == UINT64_MAX ? horizon / 10 : config.warmup_cu;
    if (warmup >= horizon) throw ParameterError("simulate: warmup must be below horizon");
    if (!config.params.stable())
        std::fprintf(stderr,
                     "shortpkt: warning: lambda*n >= 1 - epsilon, queue is unstable; "
                     "recorded statistics describe a transient\n");

    const bool sync = config.params.regime == Regime::FrameSync;
    std::vector<ReplicaResult> parts(static_cast<size_t>(config.replicas));
    parallel_for_index(config.replicas, [&](int i) {
        const std::uint64_t s = sub_seed(config.seed, static_cast<std::uint64_t>(i));
        parts[static_cast<size_t>(i)] = sync
                                            ? run_sync(config.params, horizon, warmup, s)
                                            : run_async(config.params, horizon, warmup, s);
    });

    ReplicaResult total;
    for (const auto& p : parts) {
        total.delay.merge_from(p.delay);
        total.age.merge_from(p.age);
        total.packets += p.packets;
        total.violations += p.violations;
        total.occupancy_integral += p.occupancy_integral;
    }

    if (total.delay.count == 0)
        throw InsufficientDataError("simulate: no samples recorded after warmup");

    const UnitLabel unit = sync ? UnitLabel::Frames : UnitLabel::ChannelUses;
    const int n = config.params.n;
    double window; // recorded span per replica, in the regime's unit
    double window_cu;
    if (sync) {
        const auto hf = static_cast<double>(horizon / static_cast<std::uint64_t>(n));
        const auto wf = static_cast<double>(
            (warmup + static_cast<std::uint64_t>(n) - 1) / static_cast<std::uint64_t>(n));
        window = hf - wf;
        window_cu = window * n;
    } else {
        window = static_cast<double>(horizon - warmup);
        window_cu = window;
    }
    const double total_window = window * config.replicas;
    const double total_window_cu = window_cu * config.replicas;

    SimStats stats;
    total.delay.ccdf(&stats.delay_ccdf, &stats.delay_stderr, unit);
    total.age.ccdf(&stats.peak_age_ccdf, &stats.peak_age_stderr, unit);
    stats.mean_delay = total.delay.mean();
    stats.mean_delay_stderr = total.delay.mean_stderr();
    stats.mean_peak_age = total.age.mean();
    stats.mean_peak_age_stderr = total.age.mean_stderr();
    stats.bulks_observed = total.delay.count;
    stats.age_samples = total.age.count;
    stats.age_bound_violations = total.violations;
    stats.occupancy_time_avg = total.occupancy_integral / total_window;
    stats.arrival_rate = static_cast<double>(total.packets) / total_window_cu;
    return stats;
}

SimStats deterministic_replay(const SimConfig& config) { return simulate(config); }

} // namespace shortpkt
