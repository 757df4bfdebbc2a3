#include "tstereo/potential.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tstereo {
namespace {

void require_positive_depth(const CandidatePoint& c) {
    if (!(c.da > 0.0)) throw std::invalid_argument("candidate depth must be positive");
}

PotentialValue finish(double numerator, double denominator) {
    if (denominator == 0.0) return {std::numeric_limits<double>::infinity(), true};
    return {numerator / (denominator * denominator), std::abs(denominator) < kSingularDenominator};
}

PotentialValue potential_with(double alpha, double f, const CandidatePoint& c, const PlanarPose& pose) {
    const double t_bar = std::hypot(pose.tx, pose.tz);
    const double beta = t_bar > 0.0 ? std::atan2(pose.tx, pose.tz) : 0.0;
    const double cos_a = std::cos(alpha);
    const double numerator = f * t_bar * cos_a * std::abs(std::sin(alpha - (pose.theta + beta)));
    const double denominator = c.da * std::cos(alpha - pose.theta) + pose.tz * cos_a;
    return finish(numerator, denominator);
}

}  // namespace

ViewAngles view_angles(const CandidatePoint& c, const CameraIntrinsics& k, const PlanarPose& pose) {
    ViewAngles a;
    a.alpha = std::atan2(c.xa - k.cx, k.f);
    a.t_bar = std::hypot(pose.tx, pose.tz);
    a.beta = a.t_bar > 0.0 ? std::atan2(pose.tx, pose.tz) : 0.0;
    return a;
}

PotentialValue localization_potential(const CandidatePoint& c, const CameraIntrinsics& k, const PlanarPose& pose) {
    require_positive_depth(c);
    return potential_with(std::atan2(c.xa - k.cx, k.f), k.f, c, pose);
}

PotentialValue localization_potential_cross(const CandidatePoint& c, const CameraIntrinsics& ka,
                                            const CameraIntrinsics& kb, const PlanarPose& pose) {
    require_positive_depth(c);
    return potential_with(std::atan2(c.xa - ka.cx, ka.f), kb.f, c, pose);
}

PotentialValue localization_potential_direct(const CandidatePoint& c, const CameraIntrinsics& k,
                                             const PlanarPose& pose) {
    require_positive_depth(c);
    const double alpha = std::atan2(c.xa - k.cx, k.f);
    const double cos_a = std::cos(alpha);
    const double s = std::sin(alpha - pose.theta);
    const double co = std::cos(alpha - pose.theta);
    const double numerator = k.f * cos_a * std::abs(pose.tz * s - pose.tx * co);
    return finish(numerator, c.da * co + pose.tz * cos_a);
}

PotentialValue potential_at_time(const CandidatePoint& c, const CameraIntrinsics& k, const PlanarPose& per_step,
                                 int t) {
    require_positive_depth(c);
    if (t < 0) throw std::invalid_argument("time offset must be non-negative");
    if (per_step.theta != 0.0) throw std::invalid_argument("time-parameterized potential assumes theta = 0");
    const ViewAngles a = view_angles(c, k, per_step);
    const double cos_a = std::cos(a.alpha);
    const double tt = static_cast<double>(t);
    const double numerator = k.f * a.t_bar * tt * cos_a * std::abs(std::sin(a.alpha - a.beta));
    return finish(numerator, c.da * cos_a + per_step.tz * tt * cos_a);
}

std::pair<CameraIntrinsics, CandidatePoint> rescale_resolution(const CameraIntrinsics& k, const CandidatePoint& c,
                                                              double s) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("downsample factor must be positive");
    const CameraIntrinsics scaled(k.f / s, k.cx / s, k.cy / s, k.width / s, k.height / s);
    return {scaled, CandidatePoint{c.xa / s, c.ya / s, c.da}};
}

}  // namespace tstereo
