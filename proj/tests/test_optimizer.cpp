#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "shortpkt/analysis.hpp"
#include "shortpkt/channel.hpp"
#include "shortpkt/optimizer.hpp"

using namespace shortpkt;

namespace {
const double kRho5 = db_to_linear(5.0);
} // namespace

TEST_CASE("input validation") {
    CHECK_THROWS_AS(max_arrival_rate({kRho5, 100, 100}, 0.5, 1e-3, Method::ExactInversion),
                    ParameterError);
    CHECK_THROWS_AS(max_arrival_rate({kRho5, 100, 100}, 500.0, 0.0, Method::ExactInversion),
                    ParameterError);
    CHECK_THROWS_AS(max_arrival_rate({kRho5, 100, 100}, 500.0, 1e-3, Method::NetcalcBound,
                                     Regime::FrameAsync),
                    ParameterError);
    CHECK_THROWS_AS(blocklength_sweep(kRho5, 100, 10, 5, 1e-3, 500.0), ParameterError);
    CHECK_THROWS_AS(blocklength_sweep(kRho5, 100, 95, 105, 0.0, 500.0), ParameterError);
    CHECK_THROWS_AS(throughput_vs_blocklength(kRho5, 100, 10, 5, 500.0, 1e-3,
                                              Method::ExactInversion),
                    ParameterError);
}

TEST_CASE("a target of 1 never binds: the stability boundary is returned") {
    const ChannelParams ch{kRho5, 100, 100};
    const double eps = error_probability(ch);
    const double lam = max_arrival_rate(ch, 500.0, 1.0, Method::ExactInversion);
    CHECK(lam == doctest::Approx((1.0 - eps) / 100.0).epsilon(1e-6));
    CHECK(lam * 100.0 < 1.0 - eps); // still strictly stable
}

TEST_CASE("targets below the retransmission-only floor are infeasible") {
    // At n = 100 the 5-frame budget cannot beat eps^5 ~ 1.3e-3 even with
    // vanishing load.
    CHECK_THROWS_AS(max_arrival_rate({kRho5, 100, 100}, 500.0, 1e-3,
                                     Method::ExactInversion),
                    InfeasibleError);
}

TEST_CASE("bisection lands within one cell of a dense grid search") {
    const ChannelParams ch{kRho5, 100, 150};
    const double d0 = 500.0, target = 1e-3;
    const double lam_star = max_arrival_rate(ch, d0, target, Method::ExactInversion);

    const double eps = error_probability(ch);
    const int d = threshold_in_units(d0, UnitLabel::Frames, 150);
    const double lam_hi = (1.0 - eps) / 150.0 * (1.0 - 1e-9);
    const double cell = lam_hi / 200.0;
    double grid_best = 0.0;
    for (int i = 1; i <= 200; ++i) {
        const double lam = lam_hi * i / 200.0;
        const SystemParams p(lam, 150, eps, Regime::FrameSync);
        const double pdv = tail_series(delay_pgf_sync(p), d).at(d);
        if (pdv <= target) grid_best = lam;
    }
    REQUIRE(grid_best > 0.0);
    CHECK(std::abs(lam_star - grid_best) <= 1.5 * cell);
}

TEST_CASE("the achievable rate grows with the allowed violation level") {
    const ChannelParams ch{kRho5, 100, 150};
    double prev = 0.0;
    for (double target : {1e-4, 1e-3, 1e-2, 1e-1}) {
        const double lam = max_arrival_rate(ch, 500.0, target, Method::ExactInversion);
        CHECK(lam >= prev);
        prev = lam;
    }
}

TEST_CASE("the transform bound admits no more load than exact inversion") {
    const ChannelParams ch{kRho5, 100, 150};
    for (double target : {1e-3, 1e-2}) {
        const double exact = max_arrival_rate(ch, 500.0, target, Method::ExactInversion);
        const double bound = max_arrival_rate(ch, 500.0, target, Method::NetcalcBound);
        CHECK(bound <= exact);
        CHECK(bound > 0.0);
    }
}

TEST_CASE("async regime optimizes over the channel-use budget") {
    const ChannelParams ch{kRho5, 100, 100};
    const double lam = max_arrival_rate(ch, 2000.0, 1e-2, Method::ExactInversion,
                                        Regime::FrameAsync);
    CHECK(lam > 0.0);
    CHECK(lam * 100.0 < 1.0 - error_probability(ch));
}

TEST_CASE("blocklength sweep rows and argmin") {
    const SweepResult r = blocklength_sweep(kRho5, 100, 95, 105, 1e-3, 500.0);
    REQUIRE(r.rows.size() == 11);
    double best = 2.0;
    int best_n = 0;
    for (size_t i = 0; i < r.rows.size(); ++i) {
        const SweepRow& row = r.rows[i];
        CHECK(row.n == 95 + static_cast<int>(i));
        CHECK(row.epsilon ==
              doctest::Approx(error_probability({kRho5, 100, row.n})).epsilon(1e-12));
        CHECK(row.d == (500 + row.n - 1) / row.n);
        if (row.pdv < best) {
            best = row.pdv;
            best_n = row.n;
        }
    }
    CHECK(r.argmin_n == best_n);
    // Spot value: the n = 100 row is the frozen operating point.
    CHECK(r.rows[5].pdv == doctest::Approx(0.012077758673558438).epsilon(1e-9));
    // The budget in frames drops from 6 to 5 at n = 100.
    CHECK(r.rows[4].d == 6);
    CHECK(r.rows[5].d == 5);
}

TEST_CASE("sweep marks unstable or trivially infeasible rows with pdv = 1") {
    // At n >= d0 the budget is a single frame: pdv = 1 by support.
    const SweepResult r = blocklength_sweep(kRho5, 100, 498, 502, 1e-4, 500.0);
    for (const SweepRow& row : r.rows) {
        if (row.n >= 500) CHECK(row.pdv == 1.0);
    }
}

TEST_CASE("throughput curve: feasible points scale with k, infeasible are zero") {
    const auto pts = throughput_vs_blocklength(kRho5, 100, 98, 102, 500.0, 2e-2,
                                               Method::ExactInversion);
    REQUIRE(pts.size() == 5);
    for (const ThroughputPoint& pt : pts) {
        CHECK(pt.lambda_star > 0.0);
        CHECK(pt.throughput == doctest::Approx(100.0 * pt.lambda_star).epsilon(1e-12));
        CHECK(pt.method == Method::ExactInversion);
    }

    // Same range, unreachable target: every point reports zero rate.
    const auto zero = throughput_vs_blocklength(kRho5, 100, 98, 102, 500.0, 1e-3,
                                                Method::ExactInversion);
    for (const ThroughputPoint& pt : zero) {
        CHECK(pt.lambda_star == 0.0);
        CHECK(pt.throughput == 0.0);
    }
}
