#include "tstereo/ambiguity.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "tstereo/csv.hpp"
#include "tstereo/errors.hpp"
#include "tstereo/parallel.hpp"
#include "tstereo/random.hpp"

namespace tstereo {
namespace {

double shift_for_view(const CandidatePoint& near, const CandidatePoint& far, const RigCamera& ref,
                      const RigCamera& src, const PlanarPose& pose, bool same_camera) {
    std::optional<Projection> a;
    std::optional<Projection> b;
    if (same_camera) {
        a = project_in_view(near, ref.intrinsics, pose);
        b = project_in_view(far, ref.intrinsics, pose);
    } else {
        a = project_in_view(near, ref.intrinsics, src.intrinsics, pose);
        b = project_in_view(far, ref.intrinsics, src.intrinsics, pose);
    }
    if (!a || !b) return 0.0;
    return std::abs(a->xb - b->xb);
}

void check_args(int tau, double delta) {
    if (tau < 1) throw std::invalid_argument("steps back must be at least 1");
    if (!(delta > 0.0)) throw std::invalid_argument("depth perturbation must be positive");
}

double shift_at(const ObjectSample& obj, std::size_t ref, const CameraRig& rig, const EgoTrajectory& traj, int tau,
                double delta, bool cross_camera) {
    const std::size_t now = traj.last_step();
    if (static_cast<std::size_t>(tau) > now) return 0.0;
    const CandidatePoint near{obj.x_img, obj.y_img, obj.depth};
    const CandidatePoint far{obj.x_img, obj.y_img, obj.depth + delta};
    double best = 0.0;
    for (std::size_t cam = 0; cam < rig.size(); ++cam) {
        if (!cross_camera && cam != ref) continue;
        const PlanarPose pose = relative_pose(rig, traj, ref, now, cam, now - static_cast<std::size_t>(tau));
        best = std::max(best, shift_for_view(near, far, rig[ref], rig[cam], pose, cam == ref));
    }
    return best;
}

// Linear interpolation between order statistics of a sorted sample.
double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void check_buckets(const std::vector<std::pair<double, double>>& buckets) {
    auto sorted = buckets;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (!(sorted[i].second > sorted[i].first)) throw std::invalid_argument("depth bucket must have lo < hi");
        if (i > 0 && sorted[i].first < sorted[i - 1].second)
            throw std::invalid_argument("depth buckets must be disjoint");
    }
}

}  // namespace

double projection_shift_at(const ObjectSample& obj, const CameraRig& rig, const EgoTrajectory& traj, int tau,
                           double delta, bool cross_camera) {
    check_args(tau, delta);
    return shift_at(obj, rig.index_of(obj.camera), rig, traj, tau, delta, cross_camera);
}

double projection_shift(const ObjectSample& obj, const CameraRig& rig, const EgoTrajectory& traj, int steps_back,
                        double delta, bool cross_camera) {
    check_args(steps_back, delta);
    const std::size_t ref = rig.index_of(obj.camera);
    const int available = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(steps_back), traj.last_step()));
    double best = 0.0;
    for (int tau = 1; tau <= available; ++tau)
        best = std::max(best, shift_at(obj, ref, rig, traj, tau, delta, cross_camera));
    return best;
}

std::vector<ShiftStats> percent_effective(const std::vector<ObjectSample>& objects, const CameraRig& rig,
                                          const EgoTrajectory& traj, const AmbiguityOptions& options,
                                          unsigned threads) {
    check_args(options.steps_back, options.delta);
    check_buckets(options.buckets);
    std::vector<std::size_t> camera_of(objects.size());
    for (std::size_t i = 0; i < objects.size(); ++i) camera_of[i] = rig.index_of(objects[i].camera);

    std::vector<double> shifts(objects.size(), 0.0);
    parallel_for(objects.size(), threads, [&](std::size_t i) {
        shifts[i] = projection_shift(objects[i], rig, traj, options.steps_back, options.delta, options.cross_camera);
    });

    std::vector<ShiftStats> out;
    for (std::size_t cam = 0; cam < rig.size(); ++cam) {
        for (const auto& [lo, hi] : options.buckets) {
            std::vector<double> values;
            for (std::size_t i = 0; i < objects.size(); ++i) {
                if (camera_of[i] == cam && objects[i].depth >= lo && objects[i].depth < hi) values.push_back(shifts[i]);
            }
            std::sort(values.begin(), values.end());
            ShiftStats s;
            s.camera = rig[cam].name;
            s.bucket_lo = lo;
            s.bucket_hi = hi;
            s.count = values.size();
            if (!values.empty()) {
                const auto effective = std::count_if(values.begin(), values.end(),
                                                     [&](double v) { return v >= options.threshold; });
                s.fraction_effective = static_cast<double>(effective) / static_cast<double>(values.size());
                s.q1 = quantile(values, 0.25);
                s.median = quantile(values, 0.5);
                s.q3 = quantile(values, 0.75);
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::vector<ObjectSample> parse_objects(std::istream& in, const std::string& source) {
    const auto rows = csv::read(in, source, kObjectsHeader);
    std::vector<ObjectSample> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        ObjectSample o;
        o.camera = row.fields[0];
        if (o.camera.empty()) throw ParseError(source, row.line, "empty camera name");
        o.x_img = csv::to_double(row, 1, source);
        o.y_img = csv::to_double(row, 2, source);
        o.depth = csv::to_double(row, 3, source);
        if (!(o.depth > 0.0)) throw ParseError(source, row.line, "depth_m must be positive");
        out.push_back(std::move(o));
    }
    return out;
}

std::vector<ObjectSample> load_objects(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "cannot open file");
    return parse_objects(in, path.string());
}

std::vector<ObjectSample> synthetic_objects(const CameraRig& rig, std::size_t per_camera, std::uint64_t seed,
                                            double depth_lo, double depth_hi) {
    if (!(depth_lo > 0.0) || !(depth_hi > depth_lo)) throw std::invalid_argument("invalid synthetic depth range");
    Rng rng(seed);
    const double log_lo = std::log(depth_lo);
    const double log_hi = std::log(depth_hi);
    std::vector<ObjectSample> out;
    out.reserve(per_camera * rig.size());
    for (const RigCamera& cam : rig.cameras()) {
        for (std::size_t i = 0; i < per_camera; ++i) {
            ObjectSample o;
            o.camera = cam.name;
            o.x_img = uniform(rng, 0.0, cam.intrinsics.width);
            o.y_img = cam.intrinsics.cy;
            o.depth = std::exp(uniform(rng, log_lo, log_hi));
            out.push_back(std::move(o));
        }
    }
    return out;
}

std::string objects_to_csv(const std::vector<ObjectSample>& objects) {
    std::string out = std::string(kObjectsHeader) + "\n";
    for (const auto& o : objects) out += fmt::format("{},{},{},{}\n", o.camera, o.x_img, o.y_img, o.depth);
    return out;
}

std::string shift_stats_to_csv(const std::vector<ShiftStats>& stats) {
    std::string out = std::string(kShiftStatsHeader) + "\n";
    for (const auto& s : stats) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", s.camera, s.bucket_lo, s.bucket_hi, s.count,
                           s.fraction_effective, s.q1, s.median, s.q3);
    }
    return out;
}

}  // namespace tstereo
