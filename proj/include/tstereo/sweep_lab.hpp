#pragma once

// A toy plane-sweep matcher on synthetic feature images. Landmarks carry
// random unit descriptors and are splatted as Gaussian blobs; a reference
// pixel is matched against past frames of the same camera at every depth
// hypothesis with group correlation.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tstereo/hypotheses.hpp"
#include "tstereo/random.hpp"
#include "tstereo/rig_geometry.hpp"

namespace tstereo {

struct Landmark {
    double x = 0.0;  // world frame, metres
    double y = 0.0;  // vertical, +y down
    double z = 0.0;
    std::vector<double> descriptor;
};

struct SyntheticScene {
    std::size_t channels = 64;
    std::vector<Landmark> landmarks;
};

/// Random unit vector of the given dimension.
std::vector<double> random_descriptor(Rng& rng, std::size_t channels);

/// Pixel (ix, iy) is centred at image coordinates (ix, iy). Data is
/// row-major with the channel vector of a pixel contiguous.
struct FeatureImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 0;
    std::vector<double> data;

    FeatureImage() = default;
    FeatureImage(std::size_t width, std::size_t height, std::size_t channels);

    double* pixel(std::size_t ix, std::size_t iy) { return data.data() + (iy * width + ix) * channels; }
    const double* pixel(std::size_t ix, std::size_t iy) const { return data.data() + (iy * width + ix) * channels; }
};

/// Intrinsics of the 640x480, f = 500 nominal camera downsampled by divisor.
CameraIntrinsics feature_intrinsics(double divisor);

/// cam_pose maps world to camera. Each landmark in front of the camera whose
/// projection lands in the image adds descriptor * exp(-r^2 / (2 sigma^2))
/// to every pixel within 3 sigma.
FeatureImage render_features(const SyntheticScene& scene, const CameraIntrinsics& k, const PlanarPose& cam_pose,
                             double splat_sigma = 1.5);

/// Bilinear interpolation; neighbours outside the image count as zero.
std::vector<double> sample_bilinear(const FeatureImage& img, double x, double y);

/// Per contiguous channel group, dot(a_g, b_g) / (C / groups).
/// Throws DimensionMismatch on unequal sizes or when groups does not divide C.
std::vector<double> group_correlation(const std::vector<double>& a, const std::vector<double>& b,
                                      std::size_t groups);

/// Mean over groups of group_correlation.
double group_score(const std::vector<double>& a, const std::vector<double>& b, std::size_t groups);

/// One score per hypothesis depth: the reference feature at ref_pixel
/// against the source feature where (ref_pixel, d) projects. Hypotheses
/// that leave the source image score 0.
std::vector<double> plane_sweep_scores(double ref_x, double ref_y, const std::vector<double>& depths,
                                       const FeatureImage& ref_img, const FeatureImage& src_img,
                                       const CameraIntrinsics& k, const PlanarPose& ref_to_src,
                                       std::size_t groups = 8);

/// softmax(scores / temperature)-weighted mean of depths.
double estimate_depth(const std::vector<double>& scores, const std::vector<double>& depths, double temperature);

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side is constant or fewer than two samples are given.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

struct SweepOptions {
    double resolution_divisor = 4.0;  // feature map size relative to 640x480
    std::size_t channels = 64;
    std::size_t groups = 8;
    double splat_sigma = 1.5;
    double temperature = 0.1;
    std::size_t clutter = 40;
    double depth_lo = 10.0;  // nearer, 0.5 m bins step by more than a blob width
    double depth_hi = 50.0;
    double y_lo = -0.5;
    double y_hi = 1.5;
    DepthBins bins;
    std::string camera;  // empty: a random rig camera per trial
};

struct ExperimentRow {
    std::size_t trial = 0;
    int fusion_steps = 0;
    int chosen_step = 0;
    std::string chosen_camera;
    double potential = 0.0;  // feature pixels per metre at the true depth; 0 if it projects out of view
    double true_depth = 0.0;
    double est_depth = 0.0;
    double abs_error = 0.0;
};

/// One row per (trial, fusion horizon). Each trial draws a scene in front
/// of the reference camera at the last trajectory step, matches the target
/// landmark's pixel against every past step up to the horizon and keeps
/// the view whose scores have the largest max - mean margin. Trial i uses
/// the generator seeded with mix_seed(seed) ^ i.
std::vector<ExperimentRow> potential_error_experiment(std::uint64_t seed, std::size_t trials, const CameraRig& rig,
                                                      const EgoTrajectory& traj, const std::vector<int>& fusion_steps,
                                                      const SweepOptions& options = {}, unsigned threads = 1);

struct ExperimentSummary {
    std::vector<int> fusion_steps;
    std::vector<double> mean_abs_error;  // per horizon
    double spearman_potential_vs_neg_error = 0.0;
};

ExperimentSummary summarize(const std::vector<ExperimentRow>& rows, const std::vector<int>& fusion_steps);

inline constexpr const char* kExperimentHeader =
    "trial,fusion_steps,chosen_step,chosen_camera,potential,true_depth_m,est_depth_m,abs_error_m";

std::string experiment_to_csv(const std::vector<ExperimentRow>& rows);

}  // namespace tstereo
