#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "shortpkt/analysis.hpp"

using namespace shortpkt;

namespace {
const double kEps100 = 0.26593700161892565;

SystemParams sync_params(double lam, double eps, int n) {
    return SystemParams(lam, n, eps, Regime::FrameSync);
}
SystemParams async_params(double lam, double eps, int n) {
    return SystemParams(lam, n, eps, Regime::FrameAsync);
}

RationalPgf geometric_pgf(double fail) {
    // P(X = d) = (1-fail) fail^{d-1}: G(s) = (1-fail)s / (1 - fail s).
    return RationalPgf(Poly{0.0, 1.0 - fail}, Poly{1.0, -fail}, UnitLabel::Frames);
}
} // namespace

TEST_CASE("latency budget to integer threshold") {
    CHECK(threshold_in_units(500.0, UnitLabel::Frames, 100) == 5);
    CHECK(threshold_in_units(500.0, UnitLabel::Frames, 140) == 4);
    CHECK(threshold_in_units(500.0, UnitLabel::ChannelUses, 100) == 500);
    CHECK(threshold_in_units(501.0, UnitLabel::Frames, 100) == 6);
    CHECK(threshold_in_units(450.0, UnitLabel::Frames, 100) == 5);
    CHECK(threshold_in_units(500.5, UnitLabel::ChannelUses, 100) == 501);
    CHECK(threshold_in_units(1.0, UnitLabel::Frames, 100) == 1);
    CHECK_THROWS_AS(threshold_in_units(0.5, UnitLabel::Frames, 100), ParameterError);
    CHECK_THROWS_AS(threshold_in_units(500.0, UnitLabel::Frames, 0), ParameterError);
}

TEST_CASE("tail series of a geometric law is the geometric tail") {
    const RationalPgf geo = geometric_pgf(0.3);
    const TailSeries t = tail_series(geo, 12);
    CHECK(t.at(1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(t.at(4) == doctest::Approx(std::pow(0.3, 3)).epsilon(1e-12));
    CHECK(t.at(12) == doctest::Approx(std::pow(0.3, 11)).epsilon(1e-10));
    CHECK_THROWS_AS(tail_series(geo, 0), ParameterError);
    CHECK_THROWS_AS(t.at(0), ParameterError);
    CHECK_THROWS_AS(t.at(13), ParameterError);
}

TEST_CASE("sync delay tails match the frozen references") {
    const RationalPgf g = delay_pgf_sync(sync_params(1e-3, kEps100, 100));
    const TailSeries t = tail_series(g, 17);
    const double expect[] = {0.012077758673558438, 0.0039755829751580733,
                             0.0013061985007610071, 0.00042850405487990606,
                             0.00014039609262095836, 4.5952074703158741e-5,
                             1.5027398757348101e-5, 4.9108396482422456e-6,
                             1.6038889425713187e-6, 5.2358052752583137e-7,
                             1.7085187761064253e-7, 5.5733104276145432e-8,
                             1.8175604056446378e-8};
    for (int d = 5; d <= 17; ++d) {
        CAPTURE(d);
        CHECK(t.at(d) == doctest::Approx(expect[d - 5]).epsilon(2e-6));
    }
    // Tails are nonincreasing and start at 1.
    CHECK(t.at(1) == doctest::Approx(1.0));
    for (int d = 2; d <= 17; ++d) CHECK(t.at(d) <= t.at(d - 1));
}

TEST_CASE("async delay tails match the frozen references") {
    const RationalPgf g = delay_pgf_async(async_params(1e-2, 0.1, 10));
    const TailSeries t = tail_series(g, 50);
    CHECK(t.at(11) == doctest::Approx(0.19191919191919192).epsilon(1e-10));
    CHECK(t.at(20) == doctest::Approx(0.11541811574249555).epsilon(1e-10));
    CHECK(t.at(21) == doctest::Approx(0.033021053550730125).epsilon(1e-10));
    CHECK(t.at(30) == doctest::Approx(0.013851959061053714).epsilon(1e-10));
    CHECK(t.at(50) == doctest::Approx(0.00022161295481727905).epsilon(1e-8));
}

TEST_CASE("peak-age tails match the frozen references") {
    const TailSeries ts = tail_series(peak_age_pgf_sync(sync_params(1e-2, 0.1, 10)), 12);
    CHECK(ts.at(3) == doctest::Approx(0.93051761162467412).epsilon(1e-10));
    CHECK(ts.at(6) == doctest::Approx(0.68097019049103212).epsilon(1e-10));
    CHECK(ts.at(12) == doctest::Approx(0.37240765172294391).epsilon(1e-10));

    const TailSeries ta =
        tail_series(peak_age_pgf_async(async_params(1e-2, 0.1, 10)), 120);
    CHECK(ta.at(25) == doctest::Approx(0.90062670496260929).epsilon(1e-10));
    CHECK(ta.at(70) == doctest::Approx(0.55928355890845343).epsilon(1e-10));
    CHECK(ta.at(120) == doctest::Approx(0.33835163986535625).epsilon(1e-10));
}

TEST_CASE("double-precision recursion diverges where extended survives") {
    // n ln(1+eps) ~ 32 here: the inversion coefficients cancel far beyond
    // double roundoff, so the double recursion blows past 1 and must say so.
    const RationalPgf g = delay_pgf_sync(sync_params(1e-3, 0.5, 80));
    bool threw = false;
    try {
        tail_series(g, 30, Precision::Double);
    } catch (const NumericInstabilityError& e) {
        threw = true;
        // The message must point at the remedy.
        CHECK(std::string(e.what()).find("Precision::Extended") != std::string::npos);
    }
    CHECK(threw);
    const TailSeries t = tail_series(g, 30, Precision::Extended);
    for (int d = 2; d <= 30; ++d) {
        CHECK(t.at(d) <= t.at(d - 1));
        CHECK(t.at(d) >= 0.0);
    }
    CHECK(t.at(30) > 1e-9);
    CHECK(t.at(30) < 1e-6);
}

TEST_CASE("saddlepoint on a geometric law: accurate and frozen") {
    const RationalPgf geo = geometric_pgf(0.3);
    const auto [approx, diag] = saddlepoint_tail(geo, 20);
    const double exact = std::pow(0.3, 19);
    CHECK(std::abs(approx / exact - 1.0) < 0.15);
    CHECK(approx == doctest::Approx(1.2872293709075152e-10).epsilon(1e-6));

    // Diagnostics reproduce the reported value and are internally sane.
    CHECK(diag.theta > 0.0);
    CHECK(diag.sigma > 0.0);
    const double recon = diag.b0 / (diag.sigma * (-std::expm1(-diag.theta))) *
                         std::exp(diag.kappa - diag.theta * 20.0);
    CHECK(recon == doctest::Approx(diag.approx).epsilon(1e-12));
    CHECK(approx == diag.approx);
    // B0 ranges strictly inside (0, 1/sqrt(2 pi)).
    CHECK(diag.b0 > 0.0);
    CHECK(diag.b0 < 0.39895);
}

TEST_CASE("saddlepoint regression on the delay transforms") {
    {
        const RationalPgf g = delay_pgf_sync(sync_params(1e-3, kEps100, 100));
        const auto [approx, diag] = saddlepoint_tail(g, 10);
        CHECK(approx == doctest::Approx(5.1780591057232607e-5).epsilon(1e-6));
        (void)diag;
    }
    {
        const RationalPgf g = delay_pgf_async(async_params(1e-3, kEps100, 100));
        const auto [approx, diag] = saddlepoint_tail(g, 1200);
        CHECK(approx == doctest::Approx(3.1439503034773070e-6).epsilon(1e-6));
        CHECK(tail_series(g, 1200).at(1200) ==
              doctest::Approx(2.8007117845583964e-6).epsilon(1e-6));
        (void)diag;
    }
}

TEST_CASE("saddlepoint needs a threshold above the mean") {
    const RationalPgf g = delay_pgf_sync(sync_params(1e-3, kEps100, 100));
    CHECK_THROWS_AS(saddlepoint_tail(g, 1), BelowMeanError);
    // Mean is ~1.5 frames, so d = 2 is already usable.
    CHECK(saddlepoint_tail(g, 2).first > 0.0);
}

TEST_CASE("transform-domain bound: frozen value and grid agreement") {
    const SystemParams p = sync_params(1e-3, 0.05, 100);
    const double bound = netcalc_bound(p, 5);
    CHECK(bound == doctest::Approx(2.47130465539409025e-4).epsilon(1e-6));

    // Coarse independent minimization of h(s) over the feasible range; the
    // golden-section result must not exceed the grid and must be close.
    double grid_min = 1e300;
    for (int i = 1; i <= 4000; ++i) {
        const double s = std::exp(std::log(1.0 + 1e-6) +
                                  (std::log(200.0) - std::log(1.0 + 1e-6)) * i / 4000.0);
        const double psi = std::pow(1.0 + p.lambda * (s - 1.0), p.n) *
                           (p.epsilon + (1.0 - p.epsilon) / s);
        if (!(psi < 1.0)) continue;
        const double h =
            std::pow(p.epsilon + (1.0 - p.epsilon) / s, 4) / (1.0 - psi);
        grid_min = std::min(grid_min, h);
    }
    CHECK(bound <= grid_min * (1.0 + 1e-9));
    CHECK(bound == doctest::Approx(grid_min).epsilon(1e-3));
}

TEST_CASE("transform-domain bound dominates the exact tail") {
    const struct {
        double lam, eps;
        int n, d;
    } tuples[] = {{1e-3, 0.05, 100, 5}, {1e-2, 0.1, 10, 3}, {2e-3, 0.3, 50, 7},
                  {5e-4, 0.45, 150, 9}};
    for (const auto& t : tuples) {
        CAPTURE(t.lam);
        const SystemParams p = sync_params(t.lam, t.eps, t.n);
        const double exact = tail_series(delay_pgf_sync(p), t.d).at(t.d);
        CHECK(netcalc_bound(p, t.d) >= exact);
    }
}

TEST_CASE("transform-domain bound contracts") {
    // At d = 1 the certain event is bounded by the cap.
    CHECK(netcalc_bound(sync_params(1e-2, 0.1, 10), 1) == 1.0);
    CHECK_THROWS_AS(netcalc_bound(sync_params(1e-2, 0.1, 10), 0), ParameterError);
    CHECK_THROWS_AS(netcalc_bound(async_params(1e-2, 0.1, 10), 5), ParameterError);
    // Unstable load has an empty feasible set.
    CHECK_THROWS_AS(
        netcalc_bound(SystemParams::unchecked(0.02, 100, 0.5, Regime::FrameSync), 5),
        InfeasibleError);
}
