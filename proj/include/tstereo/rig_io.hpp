#pragma once

// Rig (JSON) and trajectory (CSV) files.
//
// Rig:        {"cameras":[{"name":str,"f":num,"cx":num,"cy":num,"width":int,
//              "height":int,"yaw_deg":num,"x_m":num,"z_m":num}]}
// Trajectory: header `step,dt_s,yaw_rad,x_m,z_m`, one row per step,
//             step ascending from 0. Row i is the ego->world pose at step i.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "tstereo/rig_geometry.hpp"

namespace tstereo {

inline constexpr std::string_view kTrajectoryHeader = "step,dt_s,yaw_rad,x_m,z_m";

CameraRig parse_rig(std::string_view json_text, std::string_view source = "<rig>");
CameraRig load_rig(const std::filesystem::path& path);
std::string rig_to_json(const CameraRig& rig);

EgoTrajectory parse_trajectory(std::istream& in, std::string_view source = "<trajectory>");
EgoTrajectory load_trajectory(const std::filesystem::path& path);
std::string trajectory_to_csv(const EgoTrajectory& traj);

/// Six cameras at 1/16 feature resolution of a 704x256 input (f = 560 px at
/// input resolution, roughly a 64 degree horizontal field of view), yawed
/// front, +-55 and +-110 degrees, and rear. Positive yaw turns left.
CameraRig nuscenes_like_rig();

/// Per-step ego motion behind the straight reference trajectory, in metres
/// per 0.5 s step: 0.05 lateral, 3.19 forward.
PlanarPose nuscenes_mean_step();

/// `steps` steps of nuscenes_mean_step() at dt = 0.5 s.
EgoTrajectory straight_trajectory(std::size_t steps = 20);

}  // namespace tstereo
