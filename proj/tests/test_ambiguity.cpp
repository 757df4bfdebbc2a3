#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tstereo/ambiguity.hpp"
#include "tstereo/errors.hpp"
#include "tstereo/rig_io.hpp"

using namespace tstereo;

namespace {

const CameraIntrinsics kWide(500, 320, 240, 1280, 480);

CameraRig front_only() { return CameraRig({{"front", kWide, {}}}); }

EgoTrajectory forward(std::size_t steps) { return make_constant_motion_trajectory(steps, {0.0, 0.0, 3.19}); }

// straight forward motion, zero lateral offset: the past camera sits tau * tz behind
double hand_shift(double xp, double d, double delta, double back) {
    return std::abs(xp * d / (d + back) - xp * (d + delta) / (d + delta + back));
}

double type7(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double h = (v.size() - 1) * q;
    const double lo = std::floor(h);
    const double hi = std::min(lo + 1, static_cast<double>(v.size() - 1));
    return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

}  // namespace

TEST(Ambiguity, FrontCameraShiftExample) {
    const CameraRig rig = front_only();
    const EgoTrajectory traj = forward(16);
    const ObjectSample obj{"front", 640, 240, 20};
    const double s1 = projection_shift_at(obj, rig, traj, 1, 0.5, false);
    const double s8 = projection_shift_at(obj, rig, traj, 8, 0.5, false);
    EXPECT_NEAR(s1, 0.93, 0.01);
    EXPECT_NEAR(s8, 1.94, 0.01);
    EXPECT_NEAR(s1, hand_shift(320, 20, 0.5, 3.19), 1e-9);
    EXPECT_NEAR(s8, hand_shift(320, 20, 0.5, 8 * 3.19), 1e-9);
    // the maximum over offsets up to 8 peaks before 8
    const double best = projection_shift(obj, rig, traj, 8, 0.5, false);
    EXPECT_NEAR(best, hand_shift(320, 20, 0.5, 6 * 3.19), 1e-9);
    EXPECT_GT(best, s8);
}

TEST(Ambiguity, StationaryAndCenterRayHaveNoShift) {
    const CameraRig rig = front_only();
    const auto still = make_constant_motion_trajectory(8, PlanarPose::identity());
    EXPECT_EQ(projection_shift({"front", 640, 240, 20}, rig, still, 8, 0.5, false), 0.0);
    EXPECT_NEAR(projection_shift({"front", 320, 240, 20}, rig, forward(8), 8, 0.5, false), 0.0, 1e-12);
}

TEST(Ambiguity, HistoryShorterThanRequest) {
    const CameraRig rig = front_only();
    const ObjectSample obj{"front", 640, 240, 20};
    EXPECT_EQ(projection_shift_at(obj, rig, forward(3), 4, 0.5, false), 0.0);
    EXPECT_EQ(projection_shift(obj, rig, forward(3), 16, 0.5, false), projection_shift(obj, rig, forward(3), 3, 0.5, false));
}

TEST(Ambiguity, ArgumentErrors) {
    const CameraRig rig = front_only();
    const ObjectSample obj{"front", 640, 240, 20};
    EXPECT_THROW(projection_shift(obj, rig, forward(3), 0, 0.5, false), std::invalid_argument);
    EXPECT_THROW(projection_shift(obj, rig, forward(3), 1, 0.0, false), std::invalid_argument);
    EXPECT_THROW(projection_shift({"rear", 1, 1, 1}, rig, forward(3), 1, 0.5, false), UnknownCamera);
    AmbiguityOptions overlap;
    overlap.buckets = {{0, 20}, {10, 30}};
    EXPECT_THROW(percent_effective({obj}, rig, forward(3), overlap), std::invalid_argument);
    AmbiguityOptions empty_bucket;
    empty_bucket.buckets = {{20, 20}};
    EXPECT_THROW(percent_effective({obj}, rig, forward(3), empty_bucket), std::invalid_argument);
}

TEST(Ambiguity, ShiftMonotoneInStepsAndCameras) {
    const CameraRig rig = nuscenes_like_rig();
    const EgoTrajectory traj = straight_trajectory();
    const auto objects = synthetic_objects(rig, 100, 3);
    for (const auto& o : objects) {
        double prev = 0.0;
        for (int t = 1; t <= 16; ++t) {
            const double s = projection_shift(o, rig, traj, t, 0.5, false);
            EXPECT_GE(s, prev);
            prev = s;
        }
        EXPECT_GE(projection_shift(o, rig, traj, 16, 0.5, true), prev);
    }
}

TEST(Ambiguity, LargerPerturbationNeverShrinksStraightMotionShift) {
    const CameraRig rig = front_only();
    const EgoTrajectory traj = forward(16);
    for (double x = 0; x <= 1280; x += 40) {
        for (double d = 2; d <= 60; d += 2) {
            const ObjectSample o{"front", x, 240, d};
            for (int t : {1, 4, 16})
                EXPECT_GE(projection_shift_at(o, rig, traj, t, 1.0, false), projection_shift_at(o, rig, traj, t, 0.5, false));
        }
    }
}

TEST(Ambiguity, PercentEffectiveBucketsAndQuartiles) {
    const CameraRig rig = front_only();
    const EgoTrajectory traj = forward(16);
    std::vector<ObjectSample> objects;
    for (int i = 0; i < 37; ++i) objects.push_back({"front", 330.0 + 25 * i, 240, 5.0 + 1.5 * i});
    AmbiguityOptions opt;
    opt.steps_back = 4;
    const auto stats = percent_effective(objects, rig, traj, opt);
    ASSERT_EQ(stats.size(), 3u);
    for (std::size_t b = 0; b < 3; ++b) {
        const auto [lo, hi] = opt.buckets[b];
        std::vector<double> v;
        for (const auto& o : objects)
            if (o.depth >= lo && o.depth < hi) v.push_back(projection_shift(o, rig, traj, 4, 0.5, true));
        ASSERT_EQ(stats[b].count, v.size());
        ASSERT_FALSE(v.empty());
        const double frac = static_cast<double>(std::count_if(v.begin(), v.end(), [](double s) { return s >= 1.0; })) / v.size();
        EXPECT_DOUBLE_EQ(stats[b].fraction_effective, frac);
        EXPECT_DOUBLE_EQ(stats[b].q1, type7(v, 0.25));
        EXPECT_DOUBLE_EQ(stats[b].median, type7(v, 0.5));
        EXPECT_DOUBLE_EQ(stats[b].q3, type7(v, 0.75));
        EXPECT_LE(stats[b].q1, stats[b].median);
        EXPECT_LE(stats[b].median, stats[b].q3);
    }
}

TEST(Ambiguity, EmptyBucketReportsZeros) {
    AmbiguityOptions opt;
    opt.buckets = {{100, 200}};
    const auto stats = percent_effective({{"front", 640, 240, 20}}, front_only(), forward(4), opt);
    ASSERT_EQ(stats.size(), 1u);
    EXPECT_EQ(stats[0].count, 0u);
    EXPECT_EQ(stats[0].fraction_effective, 0.0);
    EXPECT_EQ(stats[0].median, 0.0);
}

TEST(Ambiguity, PercentEffectiveMonotone) {
    const CameraRig rig = nuscenes_like_rig();
    const EgoTrajectory traj = straight_trajectory();
    const auto objects = synthetic_objects(rig, 300, 5);
    AmbiguityOptions a;
    a.steps_back = 1;
    a.cross_camera = false;
    AmbiguityOptions b = a;
    b.steps_back = 16;
    AmbiguityOptions c = b;
    c.cross_camera = true;
    const auto sa = percent_effective(objects, rig, traj, a);
    const auto sb = percent_effective(objects, rig, traj, b);
    const auto sc = percent_effective(objects, rig, traj, c);
    for (std::size_t i = 0; i < sa.size(); ++i) {
        EXPECT_GE(sb[i].fraction_effective, sa[i].fraction_effective);
        EXPECT_GE(sc[i].fraction_effective, sb[i].fraction_effective);
    }
}

TEST(Ambiguity, ThreadCountDoesNotChangeResults) {
    const CameraRig rig = nuscenes_like_rig();
    const auto objects = synthetic_objects(rig, 200, 9);
    EXPECT_EQ(shift_stats_to_csv(percent_effective(objects, rig, straight_trajectory(), {}, 1)),
              shift_stats_to_csv(percent_effective(objects, rig, straight_trajectory(), {}, 5)));
}

TEST(Ambiguity, SyntheticPopulation) {
    const CameraRig rig = nuscenes_like_rig();
    const auto a = synthetic_objects(rig, 50, 42);
    ASSERT_EQ(a.size(), 300u);
    EXPECT_EQ(objects_to_csv(a), objects_to_csv(synthetic_objects(rig, 50, 42)));
    EXPECT_NE(objects_to_csv(a), objects_to_csv(synthetic_objects(rig, 50, 43)));
    for (const auto& o : a) {
        EXPECT_GE(o.depth, 5.0);
        EXPECT_LE(o.depth, 60.0);
        EXPECT_GE(o.x_img, 0.0);
        EXPECT_LT(o.x_img, rig.camera(o.camera).intrinsics.width);
    }
}

TEST(Ambiguity, DefaultPopulationRegression) {
    const CameraRig rig = nuscenes_like_rig();
    const auto stats = percent_effective(synthetic_objects(rig), rig, straight_trajectory());
    ASSERT_EQ(stats.size(), 18u);
    EXPECT_EQ(stats[0].camera, "front");
    EXPECT_EQ(stats[0].count, 562u);
    EXPECT_EQ(stats[0].fraction_effective, 0.0);
    EXPECT_NEAR(stats[9].fraction_effective, 387.0 / 555.0, 1e-12);
    EXPECT_NEAR(stats[17].fraction_effective, 91.0 / 153.0, 1e-12);
    EXPECT_NEAR(stats[17].median, 1.198042179410379, 1e-9);
}

TEST(Ambiguity, ObjectCsv) {
    std::istringstream ok("camera,x_img,y_img,depth_m\nfront,1,2,3\n");
    const auto objs = parse_objects(ok);
    ASSERT_EQ(objs.size(), 1u);
    EXPECT_EQ(objs[0].depth, 3.0);
    std::istringstream round(objects_to_csv(objs));
    EXPECT_EQ(parse_objects(round)[0].x_img, 1.0);

    auto line_of = [](const std::string& text) -> std::size_t {
        std::istringstream in(text);
        try {
            parse_objects(in, "o.csv");
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of("camera,x,y,depth_m\n"), 1u);
    EXPECT_EQ(line_of("camera,x_img,y_img,depth_m\nfront,1,2,3\nfront,1,2,0\n"), 3u);
    EXPECT_EQ(line_of("camera,x_img,y_img,depth_m\n,1,2,3\n"), 2u);
    EXPECT_EQ(line_of("camera,x_img,y_img,depth_m\nfront,1,x,3\n"), 2u);
    EXPECT_THROW(load_objects("/nonexistent.csv"), ParseError);
}
