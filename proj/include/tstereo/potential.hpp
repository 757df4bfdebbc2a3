#pragma once

// Localization potential |d x_b / d d_a|: how many source-view pixels a
// candidate moves per metre of reference-view depth change.

#include <utility>

#include "tstereo/rig_geometry.hpp"

namespace tstereo {

/// Denominators below this magnitude are flagged as singular.
inline constexpr double kSingularDenominator = 1e-9;

struct ViewAngles {
    double alpha = 0.0;  // ray angle of the reference pixel, atan2(x_a - c_x, f)
    double beta = 0.0;   // translation direction atan2(t_x, t_z); 0 when t_bar == 0
    double t_bar = 0.0;  // translation magnitude in the XZ plane
};

ViewAngles view_angles(const CandidatePoint& c, const CameraIntrinsics& k, const PlanarPose& pose);

/// value is +inf when the denominator is exactly zero; singular is set
/// whenever |denominator| < kSingularDenominator.
struct PotentialValue {
    double value = 0.0;
    bool singular = false;
};

/// f t_bar cos(a) |sin(a - (theta + b))| / (d_a cos(a - theta) + t_z cos(a))^2
PotentialValue localization_potential(const CandidatePoint& c, const CameraIntrinsics& k, const PlanarPose& pose);

/// f cos(a) |t_z sin(a - theta) - t_x cos(a - theta)| / (d_a cos(a - theta) + t_z cos(a))^2,
/// the form before substituting the translation angle.
PotentialValue localization_potential_direct(const CandidatePoint& c, const CameraIntrinsics& k,
                                             const PlanarPose& pose);

/// Potential when the reference ray comes from ka and the source camera is
/// kb: same expression with alpha from ka and f from kb.
PotentialValue localization_potential_cross(const CandidatePoint& c, const CameraIntrinsics& ka,
                                            const CameraIntrinsics& kb, const PlanarPose& pose);

/// Potential after t steps of constant straight motion per_step (theta must
/// be 0). t = 0 gives 0.
PotentialValue potential_at_time(const CandidatePoint& c, const CameraIntrinsics& k, const PlanarPose& per_step,
                                 int t);

/// Downsamples the image by s: intrinsics and pixel coordinates shrink by
/// s, depth is unchanged. Potential shrinks by exactly 1/s.
std::pair<CameraIntrinsics, CandidatePoint> rescale_resolution(const CameraIntrinsics& k, const CandidatePoint& c,
                                                              double s);

}  // namespace tstereo
