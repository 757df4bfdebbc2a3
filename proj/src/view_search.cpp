#include "tstereo/view_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tstereo/errors.hpp"
#include "tstereo/parallel.hpp"
#include "tstereo/potential.hpp"

namespace tstereo {
namespace {

constexpr double kTieTolerance = 1e-12;

bool strictly_increasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) return false;
    return true;
}

OptimalViewMap empty_map(const CandidateGrid& grid, const std::string& default_camera) {
    const std::size_t rows = grid.depth_samples.size();
    const std::size_t cols = grid.x_samples.size();
    OptimalViewMap map;
    map.grid = grid;
    map.best_value = Matrix<double>(rows, cols, 0.0);
    map.best_theta = Matrix<double>(rows, cols, 0.0);
    map.best_step = Matrix<int>(rows, cols, 1);
    map.best_camera = Matrix<std::string>(rows, cols, default_camera);
    map.validity = Matrix<std::uint8_t>(rows, cols, 0);
    return map;
}

// Potential of one candidate under one source view, or nullopt when the
// candidate leaves the source image. Same-intrinsics views use the
// single-camera expressions.
std::optional<double> view_potential(const CandidatePoint& c, const RigCamera& ref, const RigCamera& src,
                                     const PlanarPose& pose, bool same_camera) {
    if (same_camera) {
        if (!project_in_view(c, ref.intrinsics, pose)) return std::nullopt;
        return localization_potential(c, ref.intrinsics, pose).value;
    }
    if (!project_in_view(c, ref.intrinsics, src.intrinsics, pose)) return std::nullopt;
    return localization_potential_cross(c, ref.intrinsics, src.intrinsics, pose).value;
}

void check_steps(const EgoTrajectory& traj, int max_steps) {
    if (max_steps < 1 || static_cast<std::size_t>(max_steps) >= traj.size())
        throw StepOutOfRange("max_steps must be in [1, " + std::to_string(traj.size() - 1) + "], got " +
                             std::to_string(max_steps));
}

struct SourceView {
    int step = 1;
    std::size_t camera = 0;
    PlanarPose pose;
};

OptimalViewMap time_search(const CandidateGrid& grid, const CameraRig& rig, const EgoTrajectory& traj,
                           int max_steps, bool all_cameras, unsigned threads) {
    grid.validate();
    check_steps(traj, max_steps);
    const std::size_t ref = rig.index_of(grid.camera);
    const std::size_t now = traj.last_step();

    std::vector<SourceView> views;
    for (int t = 1; t <= max_steps; ++t) {
        for (std::size_t cam = 0; cam < rig.size(); ++cam) {
            if (!all_cameras && cam != ref) continue;
            views.push_back({t, cam, relative_pose(rig, traj, ref, now, cam, now - static_cast<std::size_t>(t))});
        }
    }

    OptimalViewMap map = empty_map(grid, grid.camera);
    const std::size_t cols = grid.x_samples.size();
    parallel_for(map.best_value.size(), threads, [&](std::size_t cell) {
        const std::size_t r = cell / cols;
        const std::size_t col = cell % cols;
        const CandidatePoint c{grid.x_samples[col], rig[ref].intrinsics.cy, grid.depth_samples[r]};
        double best = -std::numeric_limits<double>::infinity();
        const SourceView* arg = nullptr;
        for (const SourceView& v : views) {
            const auto p = view_potential(c, rig[ref], rig[v.camera], v.pose, v.camera == ref);
            if (p && *p > best) {
                best = *p;
                arg = &v;
            }
        }
        if (arg != nullptr) {
            map.best_value(r, col) = best;
            map.best_step(r, col) = arg->step;
            map.best_camera(r, col) = rig[arg->camera].name;
            map.validity(r, col) = 1;
        }
    });
    return map;
}

}  // namespace

void CandidateGrid::validate() const {
    if (x_samples.empty() || depth_samples.empty()) throw std::invalid_argument("candidate grid is empty");
    if (!strictly_increasing(x_samples) || !strictly_increasing(depth_samples))
        throw std::invalid_argument("grid samples must be strictly increasing");
    if (!(depth_samples.front() > 0.0)) throw std::invalid_argument("grid depths must be positive");
}

CandidateGrid default_grid(const std::string& camera, const CameraIntrinsics& k) {
    CandidateGrid g;
    g.camera = camera;
    constexpr int kColumns = 33;
    for (int i = 0; i < kColumns; ++i) g.x_samples.push_back((i + 0.5) * k.width / kColumns);
    for (int d = 2; d <= 60; d += 2) g.depth_samples.push_back(d);
    return g;
}

std::size_t OptimalViewMap::valid_count() const {
    return static_cast<std::size_t>(std::count(validity.data().begin(), validity.data().end(), std::uint8_t{1}));
}

std::vector<double> ThetaSearch::samples() const {
    if (!(step > 0.0)) throw std::invalid_argument("theta step must be positive");
    if (!(max >= min)) throw std::invalid_argument("theta range is empty");
    const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        double theta = min + static_cast<double>(i) * step;
        if (std::abs(theta) < 1e-9 * step) theta = 0.0;
        out.push_back(theta);
    }
    return out;
}

OptimalViewMap optimal_theta_map(const CandidateGrid& grid, const CameraIntrinsics& k, double tx, double tz,
                                 const ThetaSearch& search, unsigned threads) {
    grid.validate();
    const std::vector<double> thetas = search.samples();
    std::vector<PlanarPose> poses;
    poses.reserve(thetas.size());
    for (double th : thetas) {
        PlanarPose p;
        p.theta = th;  // kept un-normalized so reported angles match the search grid
        p.tx = tx;
        p.tz = tz;
        poses.push_back(p);
    }

    OptimalViewMap map = empty_map(grid, grid.camera);
    const std::size_t cols = grid.x_samples.size();
    parallel_for(map.best_value.size(), threads, [&](std::size_t cell) {
        const std::size_t r = cell / cols;
        const std::size_t col = cell % cols;
        const CandidatePoint c{grid.x_samples[col], k.cy, grid.depth_samples[r]};
        bool found = false;
        double best = 0.0;
        double best_theta = 0.0;
        for (std::size_t i = 0; i < poses.size(); ++i) {
            if (!project_in_view(c, k, poses[i])) continue;
            const double v = localization_potential(c, k, poses[i]).value;
            const double th = thetas[i];
            bool take = !found;
            if (found) {
                const double tol = kTieTolerance * std::max(std::abs(v), std::abs(best));
                if (v > best + tol) {
                    take = true;
                } else if (!(v < best - tol)) {
                    const double da = std::abs(th) - std::abs(best_theta);
                    take = std::abs(da) > 1e-9 ? da < 0.0 : th > best_theta;
                }
            }
            if (take) {
                found = true;
                best = v;
                best_theta = th;
            }
        }
        if (found) {
            map.best_value(r, col) = best;
            map.best_theta(r, col) = best_theta;
            map.validity(r, col) = 1;
        }
    });
    return map;
}

OptimalViewMap optimal_time_map_single(const CandidateGrid& grid, const CameraRig& rig, const EgoTrajectory& traj,
                                       int max_steps, unsigned threads) {
    return time_search(grid, rig, traj, max_steps, false, threads);
}

OptimalViewMap optimal_time_map_multi(const CandidateGrid& grid, const CameraRig& rig, const EgoTrajectory& traj,
                                      int max_steps, unsigned threads) {
    return time_search(grid, rig, traj, max_steps, true, threads);
}

EgoTrajectory make_turn_trajectory(double total_turn_deg, int steps, double speed, double dt) {
    if (steps < 1) throw std::invalid_argument("turn needs at least one step");
    if (!std::isfinite(total_turn_deg) || !std::isfinite(speed)) throw std::invalid_argument("turn must be finite");
    const double total = deg_to_rad(total_turn_deg);
    std::vector<PlanarPose> poses;
    poses.reserve(static_cast<std::size_t>(steps) + 1);
    poses.push_back(PlanarPose::identity());
    for (int i = 1; i <= steps; ++i) {
        const PlanarPose& prev = poses.back();
        const Point2 next = transform(prev, {0.0, speed});
        poses.emplace_back(total * i / steps, next.x, next.z);
    }
    return EgoTrajectory(dt, std::move(poses));
}

GainMap gain_map(const CandidateGrid& grid, const CameraRig& rig, const EgoTrajectory& traj, int max_steps,
                 unsigned threads) {
    grid.validate();
    check_steps(traj, max_steps);
    const std::size_t ref = rig.index_of(grid.camera);
    const std::size_t now = traj.last_step();
    std::vector<PlanarPose> poses;
    for (int t = 1; t <= max_steps; ++t)
        poses.push_back(relative_pose(rig, traj, ref, now, ref, now - static_cast<std::size_t>(t)));

    const std::size_t rows = grid.depth_samples.size();
    const std::size_t cols = grid.x_samples.size();
    GainMap out;
    out.grid = grid;
    out.ratio = Matrix<double>(rows, cols, 1.0);
    out.validity = Matrix<std::uint8_t>(rows, cols, 0);
    const RigCamera& cam = rig[ref];
    parallel_for(rows * cols, threads, [&](std::size_t cell) {
        const std::size_t r = cell / cols;
        const std::size_t col = cell % cols;
        const CandidatePoint c{grid.x_samples[col], cam.intrinsics.cy, grid.depth_samples[r]};
        double first = 0.0;
        double best = 0.0;
        bool valid = false;
        for (std::size_t i = 0; i < poses.size(); ++i) {
            const auto p = view_potential(c, cam, cam, poses[i], true);
            if (!p) continue;
            valid = true;
            if (i == 0) first = *p;
            best = std::max(best, *p);
        }
        out.validity(r, col) = valid ? 1 : 0;
        if (first > 0.0) out.ratio(r, col) = best / first;
        else if (best > 0.0) out.ratio(r, col) = std::numeric_limits<double>::infinity();
    });
    return out;
}

GainFraction gain_fraction_above(const GainMap& gain, double threshold, double depth_lo, double depth_hi) {
    GainFraction f;
    for (std::size_t r = 0; r < gain.ratio.rows(); ++r) {
        const double d = gain.grid.depth_samples[r];
        if (d < depth_lo || d > depth_hi) continue;
        for (std::size_t c = 0; c < gain.ratio.cols(); ++c) {
            const double v = gain.ratio(r, c);
            if (!gain.validity(r, c) || !std::isfinite(v)) continue;
            ++f.cells;
            if (v > threshold) ++f.above;
        }
    }
    return f;
}

}  // namespace tstereo
