#pragma once

// Grid searches for the source view that maximizes localization potential:
// over hypothetical rotations, over past time steps of one camera, and over
// (time step, camera) pairs of a rig.

#include <cstdint>
#include <string>
#include <vector>

#include "tstereo/matrix.hpp"
#include "tstereo/rig_geometry.hpp"

namespace tstereo {

struct CandidateGrid {
    std::string camera;
    std::vector<double> x_samples;      // image x in pixels, strictly increasing
    std::vector<double> depth_samples;  // metres, strictly increasing, > 0

    /// Throws std::invalid_argument when the invariants do not hold.
    void validate() const;
};

/// 33 columns at (i + 0.5) * width / 33 (the middle column sits at width/2)
/// and depths 2, 4, ..., 60 m.
CandidateGrid default_grid(const std::string& camera, const CameraIntrinsics& k);

struct OptimalViewMap {
    CandidateGrid grid;
    Matrix<double> best_value;        // pixels per metre
    Matrix<double> best_theta;        // radians, rotation search only
    Matrix<int> best_step;            // time searches only
    Matrix<std::string> best_camera;  // time searches only
    Matrix<std::uint8_t> validity;

    std::size_t valid_count() const;
};

struct ThetaSearch {
    double min = deg_to_rad(-90.0);
    double max = deg_to_rad(90.0);
    double step = deg_to_rad(1.0);

    /// Sample i is min + i * step; values within 1e-9 step of zero snap to 0.
    std::vector<double> samples() const;
};

/// Per cell, the rotation maximizing potential for the fixed translation
/// (tx, tz) among rotations keeping the candidate in view. Ties (relative
/// 1e-12) go to the smallest |theta|, then to positive theta.
OptimalViewMap optimal_theta_map(const CandidateGrid& grid, const CameraIntrinsics& k, double tx, double tz,
                                 const ThetaSearch& search = {}, unsigned threads = 1);

/// Same-camera search over t in 1..max_steps back from the last trajectory
/// step. Ties go to the smallest t. Throws StepOutOfRange unless
/// 1 <= max_steps < traj.size().
OptimalViewMap optimal_time_map_single(const CandidateGrid& grid, const CameraRig& rig, const EgoTrajectory& traj,
                                       int max_steps, unsigned threads = 1);

/// Search over (t, target camera); ties go to the smallest t, then rig order.
OptimalViewMap optimal_time_map_multi(const CandidateGrid& grid, const CameraRig& rig, const EgoTrajectory& traj,
                                      int max_steps, unsigned threads = 1);

/// Constant speed and constant yaw rate: steps + 1 poses, each step moving
/// `speed` metres along the current heading and then turning by
/// total_turn_deg / steps.
EgoTrajectory make_turn_trajectory(double total_turn_deg, int steps, double speed, double dt = 0.5);

struct GainMap {
    CandidateGrid grid;
    /// best potential over t in 1..max_steps over the t = 1 potential; +inf
    /// when only later steps see any parallax; 1 when nothing does.
    Matrix<double> ratio;
    Matrix<std::uint8_t> validity;
};

GainMap gain_map(const CandidateGrid& grid, const CameraRig& rig, const EgoTrajectory& traj, int max_steps,
                 unsigned threads = 1);

struct GainFraction {
    std::size_t cells = 0;  // valid, finite cells within the depth range
    std::size_t above = 0;  // of those, ratio > threshold
    double fraction() const { return cells == 0 ? 0.0 : static_cast<double>(above) / static_cast<double>(cells); }
};

/// Infinity-sentinel and invalid cells are excluded.
GainFraction gain_fraction_above(const GainMap& gain, double threshold, double depth_lo, double depth_hi);

}  // namespace tstereo
