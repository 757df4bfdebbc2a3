#include "tstereo/rig_geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "tstereo/errors.hpp"

namespace tstereo {

double normalize_angle(double radians) noexcept {
    double r = std::remainder(radians, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    if (r > kPi) r -= 2.0 * kPi;
    return r;
}

CameraIntrinsics::CameraIntrinsics(double f_, double cx_, double cy_, double width_, double height_)
    : f(f_), cx(cx_), cy(cy_), width(width_), height(height_) {
    if (!(f > 0.0) || !std::isfinite(f)) throw std::invalid_argument("focal length must be positive");
    if (!(width > 0.0) || !(height > 0.0)) throw std::invalid_argument("image size must be positive");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
        throw std::invalid_argument("principal point must lie inside the image");
}

PlanarPose::PlanarPose(double theta_, double tx_, double tz_) : theta(theta_), tx(tx_), tz(tz_) {
    if (!std::isfinite(theta) || !std::isfinite(tx) || !std::isfinite(tz))
        throw std::invalid_argument("pose components must be finite");
    theta = normalize_angle(theta);
}

Point2 transform(const PlanarPose& pose, Point2 p) noexcept {
    const double c = std::cos(pose.theta);
    const double s = std::sin(pose.theta);
    return {c * p.x - s * p.z + pose.tx, s * p.x + c * p.z + pose.tz};
}

PlanarPose compose(const PlanarPose& p, const PlanarPose& q) noexcept {
    const Point2 t = transform(p, {q.tx, q.tz});
    PlanarPose out;
    out.theta = normalize_angle(p.theta + q.theta);
    out.tx = t.x;
    out.tz = t.z;
    return out;
}

PlanarPose invert(const PlanarPose& p) noexcept {
    const double c = std::cos(p.theta);
    const double s = std::sin(p.theta);
    // R(-theta) * (-t)
    PlanarPose out;
    out.theta = normalize_angle(-p.theta);
    out.tx = -(c * p.tx + s * p.tz);
    out.tz = -(-s * p.tx + c * p.tz);
    return out;
}

Projection project_point(const CandidatePoint& c, const CameraIntrinsics& k, const PlanarPose& pose) {
    if (!(c.da > 0.0)) throw std::invalid_argument("candidate depth must be positive");
    const double xp = c.xa - k.cx;
    const double yp = c.ya - k.cy;
    const double ct = std::cos(pose.theta);
    const double st = std::sin(pose.theta);
    const double d = c.da;

    Projection out;
    out.db = d * xp * st / k.f + d * ct + pose.tz;
    if (std::abs(out.db) < kDegenerateDepth)
        throw DegenerateProjection("candidate lies on the source image plane");
    out.xb = (d * xp * ct - d * k.f * st + pose.tx * k.f) / out.db + k.cx;
    out.yb = d * yp / out.db + k.cy;
    return out;
}

Projection project_point_cross(const CandidatePoint& c, const CameraIntrinsics& ka, const CameraIntrinsics& kb,
                               const PlanarPose& pose) {
    if (!(c.da > 0.0)) throw std::invalid_argument("candidate depth must be positive");
    const double u = (c.xa - ka.cx) / ka.f;
    const double v = (c.ya - ka.cy) / ka.f;
    const double ct = std::cos(pose.theta);
    const double st = std::sin(pose.theta);
    const double d = c.da;

    Projection out;
    out.db = d * u * st + d * ct + pose.tz;
    if (std::abs(out.db) < kDegenerateDepth)
        throw DegenerateProjection("candidate lies on the source image plane");
    out.xb = kb.f * (d * u * ct - d * st + pose.tx) / out.db + kb.cx;
    out.yb = kb.f * (d * v) / out.db + kb.cy;
    return out;
}

bool in_view(const Projection& p, const CameraIntrinsics& k) noexcept {
    return p.db > 0.0 && p.xb >= 0.0 && p.xb < k.width && p.yb >= 0.0 && p.yb < k.height;
}

std::optional<Projection> project_in_view(const CandidatePoint& c, const CameraIntrinsics& k,
                                          const PlanarPose& pose) noexcept {
    if (!(c.da > 0.0)) return std::nullopt;
    const double xp = c.xa - k.cx;
    const double yp = c.ya - k.cy;
    const double ct = std::cos(pose.theta);
    const double st = std::sin(pose.theta);
    const double d = c.da;
    Projection p;
    p.db = d * xp * st / k.f + d * ct + pose.tz;
    if (!(p.db >= kDegenerateDepth)) return std::nullopt;
    p.xb = (d * xp * ct - d * k.f * st + pose.tx * k.f) / p.db + k.cx;
    p.yb = d * yp / p.db + k.cy;
    if (!in_view(p, k)) return std::nullopt;
    return p;
}

std::optional<Projection> project_in_view(const CandidatePoint& c, const CameraIntrinsics& ka,
                                          const CameraIntrinsics& kb, const PlanarPose& pose) noexcept {
    if (!(c.da > 0.0)) return std::nullopt;
    const double u = (c.xa - ka.cx) / ka.f;
    const double v = (c.ya - ka.cy) / ka.f;
    const double ct = std::cos(pose.theta);
    const double st = std::sin(pose.theta);
    const double d = c.da;
    Projection p;
    p.db = d * u * st + d * ct + pose.tz;
    if (!(p.db >= kDegenerateDepth)) return std::nullopt;
    p.xb = kb.f * (d * u * ct - d * st + pose.tx) / p.db + kb.cx;
    p.yb = kb.f * (d * v) / p.db + kb.cy;
    if (!in_view(p, kb)) return std::nullopt;
    return p;
}

double stereo_disparity(const CandidatePoint& c, const CameraIntrinsics& k, double baseline) {
    if (!(c.da > 0.0)) throw std::invalid_argument("candidate depth must be positive");
    if (!(baseline > 0.0)) throw std::invalid_argument("baseline must be positive");
    return baseline * k.f / c.da;
}

CameraRig::CameraRig(std::vector<RigCamera> cameras) : cameras_(std::move(cameras)) {
    if (cameras_.empty()) throw std::invalid_argument("camera rig is empty");
    std::unordered_set<std::string> seen;
    for (const auto& cam : cameras_) {
        if (!seen.insert(cam.name).second) throw std::invalid_argument("duplicate camera name '" + cam.name + "'");
    }
}

std::size_t CameraRig::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < cameras_.size(); ++i) {
        if (cameras_[i].name == name) return i;
    }
    throw UnknownCamera(std::string(name));
}

EgoTrajectory::EgoTrajectory(double dt, std::vector<PlanarPose> poses) : dt_(dt), poses_(std::move(poses)) {
    if (poses_.empty()) throw std::invalid_argument("trajectory has no poses");
    if (!(dt_ > 0.0)) throw std::invalid_argument("trajectory dt must be positive");
}

const PlanarPose& EgoTrajectory::at(std::size_t step) const {
    if (step >= poses_.size())
        throw StepOutOfRange("step " + std::to_string(step) + " outside trajectory of " +
                             std::to_string(poses_.size()) + " poses");
    return poses_[step];
}

EgoTrajectory make_constant_motion_trajectory(std::size_t steps, const PlanarPose& per_step, double dt) {
    std::vector<PlanarPose> poses;
    poses.reserve(steps + 1);
    poses.push_back(PlanarPose::identity());
    for (std::size_t i = 0; i < steps; ++i) poses.push_back(compose(poses.back(), per_step));
    return EgoTrajectory(dt, std::move(poses));
}

PlanarPose relative_pose(const CameraRig& rig, const EgoTrajectory& traj, std::size_t cam_a, std::size_t step_a,
                         std::size_t cam_b, std::size_t step_b) {
    if (cam_a == cam_b && step_a == step_b) {
        traj.at(step_a);
        return PlanarPose::identity();
    }
    const PlanarPose& mount_a = rig[cam_a].mount;
    const PlanarPose& mount_b = rig[cam_b].mount;
    const PlanarPose a_to_world = compose(traj.at(step_a), mount_a);
    const PlanarPose world_to_b = compose(invert(mount_b), invert(traj.at(step_b)));
    return compose(world_to_b, a_to_world);
}

PlanarPose relative_pose(const CameraRig& rig, const EgoTrajectory& traj, std::string_view cam_a,
                         std::size_t step_a, std::string_view cam_b, std::size_t step_b) {
    const std::size_t ia = rig.index_of(cam_a);
    const std::size_t ib = rig.index_of(cam_b);
    traj.at(step_a);
    traj.at(step_b);
    return relative_pose(rig, traj, ia, step_a, ib, step_b);
}

}  // namespace tstereo
