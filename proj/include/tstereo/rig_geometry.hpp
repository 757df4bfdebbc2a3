#pragma once

// Planar (XZ-plane) camera geometry: pinhole intrinsics, 3-DOF poses,
// and the reference-to-source projection used throughout the library.
//
// Frames follow the usual camera convention: +x right, +y down, +z forward.
// A PlanarPose (theta, tx, tz) maps a point p expressed in frame F into
// frame G as
//
//     x_G = cos(theta) x_F - sin(theta) z_F + tx
//     z_G = sin(theta) x_F + cos(theta) z_F + tz
//
// with y untouched.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tstereo {

inline constexpr double kPi = 3.14159265358979323846;

/// Below this |d_b| the source-view x coordinate is numerically undefined.
inline constexpr double kDegenerateDepth = 1e-9;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi]; -pi maps to +pi.
double normalize_angle(double radians) noexcept;

/// Pinhole model shared by both views of a projection. Sizes are kept as
/// reals so that resolution rescaling stays exact.
struct CameraIntrinsics {
    double f = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    double width = 1.0;
    double height = 1.0;

    CameraIntrinsics() = default;
    /// Throws std::invalid_argument unless f, width, height > 0 and the
    /// principal point lies inside the image.
    CameraIntrinsics(double f, double cx, double cy, double width, double height);
};

struct PlanarPose {
    double theta = 0.0;
    double tx = 0.0;
    double tz = 0.0;

    PlanarPose() = default;
    /// theta is normalized to (-pi, pi]; throws std::invalid_argument on
    /// non-finite input.
    PlanarPose(double theta, double tx, double tz);

    static PlanarPose identity() { return {}; }
};

struct Point2 {
    double x = 0.0;
    double z = 0.0;
};

/// Applies the pose to an XZ point.
Point2 transform(const PlanarPose& pose, Point2 p) noexcept;

/// q: F->G, p: G->H  ==>  compose(p, q): F->H.
PlanarPose compose(const PlanarPose& p, const PlanarPose& q) noexcept;

PlanarPose invert(const PlanarPose& p) noexcept;

/// A reference-view pixel with a depth hypothesis along the camera Z axis.
struct CandidatePoint {
    double xa = 0.0;
    double ya = 0.0;
    double da = 1.0;
};

/// Image of a candidate in the source view. db <= 0 means the point is
/// behind the source camera; gate on in_view before use.
struct Projection {
    double xb = 0.0;
    double yb = 0.0;
    double db = 0.0;
};

/// Projects with one set of intrinsics for both views.
/// Throws std::invalid_argument when c.da <= 0 and DegenerateProjection
/// when |db| < kDegenerateDepth.
Projection project_point(const CandidatePoint& c, const CameraIntrinsics& k, const PlanarPose& pose);

/// Unprojects with ka, reprojects with kb.
Projection project_point_cross(const CandidatePoint& c, const CameraIntrinsics& ka,
                               const CameraIntrinsics& kb, const PlanarPose& pose);

bool in_view(const Projection& p, const CameraIntrinsics& k) noexcept;

/// Non-throwing projections that only yield results landing inside the
/// source image. The single-intrinsics form evaluates exactly the same
/// expression as project_point.
std::optional<Projection> project_in_view(const CandidatePoint& c, const CameraIntrinsics& k,
                                          const PlanarPose& pose) noexcept;

std::optional<Projection> project_in_view(const CandidatePoint& c, const CameraIntrinsics& ka,
                                          const CameraIntrinsics& kb, const PlanarPose& pose) noexcept;

/// baseline * f / d_a, the rectified-stereo disparity.
double stereo_disparity(const CandidatePoint& c, const CameraIntrinsics& k, double baseline);

struct RigCamera {
    std::string name;
    CameraIntrinsics intrinsics;
    PlanarPose mount;  // camera frame -> ego frame
};

class CameraRig {
public:
    /// Throws std::invalid_argument on an empty list or duplicate names.
    explicit CameraRig(std::vector<RigCamera> cameras);

    const std::vector<RigCamera>& cameras() const noexcept { return cameras_; }
    std::size_t size() const noexcept { return cameras_.size(); }
    const RigCamera& operator[](std::size_t i) const { return cameras_.at(i); }

    /// Throws UnknownCamera.
    std::size_t index_of(std::string_view name) const;
    const RigCamera& camera(std::string_view name) const { return cameras_[index_of(name)]; }

private:
    std::vector<RigCamera> cameras_;
};

class EgoTrajectory {
public:
    /// poses[i] maps the ego frame at step i into the world frame.
    /// Throws std::invalid_argument when poses is empty or dt <= 0.
    EgoTrajectory(double dt, std::vector<PlanarPose> poses);

    double dt() const noexcept { return dt_; }
    const std::vector<PlanarPose>& poses() const noexcept { return poses_; }
    std::size_t size() const noexcept { return poses_.size(); }
    /// The most recent step.
    std::size_t last_step() const noexcept { return poses_.size() - 1; }
    /// Throws StepOutOfRange.
    const PlanarPose& at(std::size_t step) const;

private:
    double dt_;
    std::vector<PlanarPose> poses_;
};

/// steps + 1 poses, each obtained from the previous by the ego-frame motion
/// per_step.
EgoTrajectory make_constant_motion_trajectory(std::size_t steps, const PlanarPose& per_step, double dt = 0.5);

/// Maps camera cam_a at step_a into camera cam_b at step_b:
/// invert(mount_b) * invert(world_b) * world_a * mount_a.
PlanarPose relative_pose(const CameraRig& rig, const EgoTrajectory& traj, std::string_view cam_a,
                         std::size_t step_a, std::string_view cam_b, std::size_t step_b);

/// Index-based overload used by the search loops.
PlanarPose relative_pose(const CameraRig& rig, const EgoTrajectory& traj, std::size_t cam_a,
                         std::size_t step_a, std::size_t cam_b, std::size_t step_b);

}  // namespace tstereo
