#pragma once

// How far a candidate's source-view projection moves when its depth is
// perturbed by a fixed amount, and the fraction of a population for which
// that shift reaches one pixel.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tstereo/rig_geometry.hpp"

namespace tstereo {

struct ObjectSample {
    std::string camera;
    double x_img = 0.0;
    double y_img = 0.0;
    double depth = 1.0;
};

struct ShiftStats {
    std::string camera;
    double bucket_lo = 0.0;
    double bucket_hi = 0.0;
    std::size_t count = 0;
    double fraction_effective = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

struct AmbiguityOptions {
    int steps_back = 16;
    double delta = 0.5;      // metres of depth perturbation
    double threshold = 1.0;  // pixels
    bool cross_camera = true;
    std::vector<std::pair<double, double>> buckets{{0.0, 20.0}, {20.0, 40.0}, {40.0, 60.0}};
};

/// |x_b(depth) - x_b(depth + delta)| for exactly one offset tau back from
/// the last step, maximized over target cameras when cross_camera. Only
/// views where both projections are in view count; 0 when none is.
double projection_shift_at(const ObjectSample& obj, const CameraRig& rig, const EgoTrajectory& traj, int tau,
                           double delta, bool cross_camera);

/// Maximum of projection_shift_at over tau in 1..steps_back, clamped to the
/// history the trajectory has.
double projection_shift(const ObjectSample& obj, const CameraRig& rig, const EgoTrajectory& traj, int steps_back,
                        double delta, bool cross_camera);

/// One row per (camera in rig order, bucket in given order). Quartiles use
/// linear interpolation between order statistics; empty buckets report
/// zeros. Throws UnknownCamera for objects naming a camera not in the rig.
std::vector<ShiftStats> percent_effective(const std::vector<ObjectSample>& objects, const CameraRig& rig,
                                          const EgoTrajectory& traj, const AmbiguityOptions& options = {},
                                          unsigned threads = 1);

inline constexpr const char* kObjectsHeader = "camera,x_img,y_img,depth_m";
inline constexpr const char* kShiftStatsHeader = "camera,bucket_lo,bucket_hi,count,fraction_effective,q1,median,q3";

std::vector<ObjectSample> parse_objects(std::istream& in, const std::string& source = "<objects>");
std::vector<ObjectSample> load_objects(const std::filesystem::path& path);

/// x uniform over the image width at y = c_y, depth log-uniform in
/// [depth_lo, depth_hi], per_camera samples for each rig camera in order.
std::vector<ObjectSample> synthetic_objects(const CameraRig& rig, std::size_t per_camera = 1000,
                                            std::uint64_t seed = 42, double depth_lo = 5.0, double depth_hi = 60.0);

std::string objects_to_csv(const std::vector<ObjectSample>& objects);
std::string shift_stats_to_csv(const std::vector<ShiftStats>& stats);

}  // namespace tstereo
