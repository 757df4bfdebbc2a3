#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tstereo/potential.hpp"
#include "tstereo/random.hpp"

using namespace tstereo;

namespace {

struct Config {
    CameraIntrinsics k;
    CandidatePoint c;
    PlanarPose pose;
};

Config random_config(Rng& rng) {
    const double w = uniform(rng, 200, 2000);
    const double h = 0.75 * w;
    Config cfg;
    cfg.k = CameraIntrinsics(uniform(rng, 100, 1500), uniform(rng, 0.3, 0.7) * w, 0.5 * h, w, h);
    cfg.c = {uniform(rng, 0, w), uniform(rng, 0, h), uniform(rng, 1, 80)};
    cfg.pose = PlanarPose(uniform(rng, -kPi / 2, kPi / 2), uniform(rng, -5, 5), uniform(rng, -5, 5));
    return cfg;
}

double denominator(const Config& g) {
    const double a = std::atan2(g.c.xa - g.k.cx, g.k.f);
    return g.c.da * std::cos(a - g.pose.theta) + g.pose.tz * std::cos(a);
}

}  // namespace

TEST(Potential, MatchesFiniteDifferenceWhereProjectionIsInView) {
    Rng rng(11);
    int checked = 0;
    while (checked < 10000) {
        const Config g = random_config(rng);
        if (std::abs(denominator(g)) < 1e-3 || !project_in_view(g.c, g.k, g.pose)) continue;
        ++checked;
        const double fd = oracle::fd_potential(g.c, g.k, g.pose, 1e-4 * g.c.da);
        const double an = localization_potential(g.c, g.k, g.pose).value;
        ASSERT_TRUE(oracle::close_rel(an, fd, 1e-5) || std::abs(an - fd) < 1e-9)
            << "analytic " << an << " fd " << fd;
    }
}

TEST(Potential, AngleFormEqualsDirectForm) {
    Rng rng(12);
    for (int i = 0; i < 10000; ++i) {
        const Config g = random_config(rng);
        if (std::abs(denominator(g)) < 1e-3) continue;
        const double a = localization_potential(g.c, g.k, g.pose).value;
        const double b = localization_potential_direct(g.c, g.k, g.pose).value;
        ASSERT_TRUE(oracle::close_rel(a, b, 1e-10) || std::abs(a - b) < 1e-12) << a << " vs " << b;
    }
}

TEST(Potential, ResolutionScaling) {
    Rng rng(13);
    for (int i = 0; i < 2000; ++i) {
        const Config g = random_config(rng);
        if (std::abs(denominator(g)) < 1e-3) continue;
        const double base = localization_potential(g.c, g.k, g.pose).value;
        for (double s : {2.0, 4.0, 16.0}) {
            const auto [k2, c2] = rescale_resolution(g.k, g.c, s);
            const double scaled = localization_potential(c2, k2, g.pose).value;
            ASSERT_TRUE(oracle::close_rel(scaled * s, base, 1e-10)) << scaled * s << " vs " << base;
        }
    }
}

TEST(Potential, StandardStereoValue) {
    const CameraIntrinsics k(500, 320, 240, 640, 480);
    const CandidatePoint c{320, 240, 10};
    EXPECT_DOUBLE_EQ(localization_potential(c, k, {0.0, -0.5, 0.0}).value, 2.5);
    EXPECT_DOUBLE_EQ(localization_potential({100, 240, 10}, k, {0.0, -0.5, 0.0}).value, 2.5);
}

TEST(Potential, StandardStereoMonotoneAndXInvariant) {
    const CameraIntrinsics k(500, 320, 240, 640, 480);
    double prev = 0.0;
    for (double b = 0.1; b < 3.0; b += 0.1) {
        const double v = localization_potential({320, 240, 10}, k, {0.0, -b, 0.0}).value;
        EXPECT_GT(v, prev);
        prev = v;
    }
    prev = 0.0;
    for (double f = 100; f < 2000; f += 100) {
        const double v = localization_potential({320, 240, 10}, CameraIntrinsics(f, 320, 240, 640, 480), {0.0, -0.5, 0.0}).value;
        EXPECT_GT(v, prev);
        prev = v;
    }
    prev = INFINITY;
    for (double d = 1; d < 80; d += 1) {
        const double v = localization_potential({320, 240, d}, k, {0.0, -0.5, 0.0}).value;
        EXPECT_LT(v, prev);
        prev = v;
    }
    const double ref = localization_potential({0, 240, 12}, k, {0.0, -0.7, 0.0}).value;
    for (double x = 0; x < 640; x += 16)
        EXPECT_NEAR(localization_potential({x, 240, 12}, k, {0.0, -0.7, 0.0}).value, ref, 1e-10 * ref);
}

TEST(Potential, TimeFormAtOneStepIsTheSingleStepPotential) {
    Rng rng(14);
    for (int i = 0; i < 2000; ++i) {
        Config g = random_config(rng);
        const PlanarPose step{0.0, g.pose.tx, g.pose.tz};
        if (std::abs(denominator({g.k, g.c, step})) < 1e-3) continue;
        EXPECT_EQ(potential_at_time(g.c, g.k, step, 1).value, localization_potential(g.c, g.k, step).value);
        for (int t : {2, 5, 16}) {
            const PlanarPose scaled{0.0, t * step.tx, t * step.tz};
            if (std::abs(denominator({g.k, g.c, scaled})) < 1e-3) continue;
            EXPECT_TRUE(oracle::close_rel(potential_at_time(g.c, g.k, step, t).value,
                                          localization_potential(g.c, g.k, scaled).value, 1e-10));
        }
    }
    const CameraIntrinsics k(500, 320, 240, 640, 480);
    EXPECT_EQ(potential_at_time({320, 240, 20}, k, {0.0, 0.05, 3.19}, 0).value, 0.0);
    EXPECT_THROW(potential_at_time({320, 240, 20}, k, {0.1, 0.05, 3.19}, 1), std::invalid_argument);
}

TEST(Potential, TimeFormOptimumNearDepthOverForwardStep) {
    // x_a' = 320 on a 500 px camera, 20 m, 3.19 m forward per step
    const CameraIntrinsics k(500, 0, 240, 1280, 480);
    const CandidatePoint c{320, 240, 20};
    const PlanarPose step{0.0, 0.0, 3.19};
    int best = 0;
    double best_v = -1;
    for (int t = 1; t <= 16; ++t) {
        const double v = potential_at_time(c, k, step, t).value;
        if (v > best_v) {
            best_v = v;
            best = t;
        }
    }
    EXPECT_EQ(best, 6);
    // continuous optimum of t / (d + t tz)^2 sits at d / tz
    const double t_star = 20.0 / 3.19;
    EXPECT_GT(t_star, 6.0);
    EXPECT_LT(t_star, 7.0);
}

TEST(Potential, SingularAndZeroCases) {
    const CameraIntrinsics k(500, 320, 240, 640, 480);
    // source camera exactly at the candidate depth plane: denominator 0
    const PotentialValue v = localization_potential({320, 240, 5}, k, {0.0, 1.0, -5.0});
    EXPECT_TRUE(std::isinf(v.value));
    EXPECT_TRUE(v.singular);
    EXPECT_EQ(localization_potential({100, 240, 5}, k, {}).value, 0.0);
    EXPECT_THROW(localization_potential({320, 240, 0}, k, {}), std::invalid_argument);
}

TEST(Potential, CrossWithSharedIntrinsicsIsSingleCamera) {
    Rng rng(15);
    for (int i = 0; i < 1000; ++i) {
        const Config g = random_config(rng);
        EXPECT_EQ(localization_potential_cross(g.c, g.k, g.k, g.pose).value,
                  localization_potential(g.c, g.k, g.pose).value);
    }
}

TEST(Potential, ViewAngles) {
    const CameraIntrinsics k(500, 320, 240, 640, 480);
    const ViewAngles a = view_angles({820, 240, 10}, k, {0.0, 3.0, 4.0});
    EXPECT_NEAR(a.alpha, kPi / 4, 1e-15);
    EXPECT_NEAR(a.t_bar, 5.0, 1e-15);
    EXPECT_NEAR(a.beta, std::atan2(3.0, 4.0), 1e-15);
    EXPECT_EQ(view_angles({0, 0, 1}, k, {}).beta, 0.0);
}
