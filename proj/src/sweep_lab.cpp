#include "tstereo/sweep_lab.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "tstereo/errors.hpp"
#include "tstereo/parallel.hpp"
#include "tstereo/potential.hpp"

namespace tstereo {
namespace {

// Camera-frame point of a world landmark.
struct CameraPoint {
    double x, y, z;
};

CameraPoint to_camera(const Landmark& l, const PlanarPose& world_to_cam) {
    const Point2 p = transform(world_to_cam, {l.x, l.z});
    return {p.x, l.y, p.z};
}

Landmark random_landmark(Rng& rng, const SweepOptions& o, const CameraIntrinsics& k, const PlanarPose& cam_to_world,
                         double& u, double& v, double& depth) {
    depth = uniform(rng, o.depth_lo, o.depth_hi);
    u = uniform(rng, 0.0, k.width);
    const double y = uniform(rng, o.y_lo, o.y_hi);
    v = k.f * y / depth + k.cy;
    const double x = (u - k.cx) * depth / k.f;
    const Point2 w = transform(cam_to_world, {x, depth});
    Landmark l;
    l.x = w.x;
    l.y = y;
    l.z = w.z;
    return l;
}

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j - 1) + 1.0;
        for (std::size_t m = i; m < j; ++m) r[order[m]] = avg;
        i = j;
    }
    return r;
}

struct ViewResult {
    int step = 0;
    double margin = -std::numeric_limits<double>::infinity();
    double potential = 0.0;
    double est_depth = 0.0;
};

}  // namespace

std::vector<double> random_descriptor(Rng& rng, std::size_t channels) {
    if (channels == 0) throw std::invalid_argument("descriptor needs at least one channel");
    std::vector<double> d(channels);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (double& x : d) {
            x = standard_normal(rng);
            norm2 += x * x;
        }
    } while (!(norm2 > 0.0));
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : d) x *= inv;
    return d;
}

FeatureImage::FeatureImage(std::size_t w, std::size_t h, std::size_t c)
    : width(w), height(h), channels(c), data(w * h * c, 0.0) {}

CameraIntrinsics feature_intrinsics(double divisor) {
    if (!(divisor > 0.0)) throw std::invalid_argument("resolution divisor must be positive");
    return {500.0 / divisor, 320.0 / divisor, 240.0 / divisor, 640.0 / divisor, 480.0 / divisor};
}

FeatureImage render_features(const SyntheticScene& scene, const CameraIntrinsics& k, const PlanarPose& cam_pose,
                             double splat_sigma) {
    if (!(splat_sigma > 0.0)) throw std::invalid_argument("splat sigma must be positive");
    const auto w = static_cast<std::size_t>(std::floor(k.width));
    const auto h = static_cast<std::size_t>(std::floor(k.height));
    FeatureImage img(w, h, scene.channels);
    const double radius = 3.0 * splat_sigma;
    for (const Landmark& l : scene.landmarks) {
        if (l.descriptor.size() != scene.channels)
            throw DimensionMismatch(fmt::format("descriptor has {} channels, scene has {}", l.descriptor.size(),
                                                scene.channels));
        const CameraPoint p = to_camera(l, cam_pose);
        if (!(p.z > kDegenerateDepth)) continue;
        const double u = k.f * p.x / p.z + k.cx;
        const double v = k.f * p.y / p.z + k.cy;
        if (!(u >= 0.0 && u < k.width && v >= 0.0 && v < k.height)) continue;
        const auto x0 = static_cast<std::ptrdiff_t>(std::ceil(u - radius));
        const auto x1 = static_cast<std::ptrdiff_t>(std::floor(u + radius));
        const auto y0 = static_cast<std::ptrdiff_t>(std::ceil(v - radius));
        const auto y1 = static_cast<std::ptrdiff_t>(std::floor(v + radius));
        for (std::ptrdiff_t iy = std::max<std::ptrdiff_t>(y0, 0); iy <= std::min<std::ptrdiff_t>(y1, h - 1); ++iy) {
            for (std::ptrdiff_t ix = std::max<std::ptrdiff_t>(x0, 0); ix <= std::min<std::ptrdiff_t>(x1, w - 1);
                 ++ix) {
                const double dx = static_cast<double>(ix) - u;
                const double dy = static_cast<double>(iy) - v;
                const double r2 = dx * dx + dy * dy;
                if (r2 > radius * radius) continue;
                const double g = std::exp(-r2 / (2.0 * splat_sigma * splat_sigma));
                double* px = img.pixel(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy));
                for (std::size_t c = 0; c < scene.channels; ++c) px[c] += g * l.descriptor[c];
            }
        }
    }
    return img;
}

std::vector<double> sample_bilinear(const FeatureImage& img, double x, double y) {
    std::vector<double> out(img.channels, 0.0);
    if (!std::isfinite(x) || !std::isfinite(y)) return out;
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const double ax = x - fx;
    const double ay = y - fy;
    const double weights[4] = {(1.0 - ax) * (1.0 - ay), ax * (1.0 - ay), (1.0 - ax) * ay, ax * ay};
    const double xs[4] = {fx, fx + 1.0, fx, fx + 1.0};
    const double ys[4] = {fy, fy, fy + 1.0, fy + 1.0};
    for (int n = 0; n < 4; ++n) {
        if (weights[n] == 0.0) continue;
        if (xs[n] < 0.0 || ys[n] < 0.0 || xs[n] >= static_cast<double>(img.width) ||
            ys[n] >= static_cast<double>(img.height))
            continue;
        const double* px = img.pixel(static_cast<std::size_t>(xs[n]), static_cast<std::size_t>(ys[n]));
        for (std::size_t c = 0; c < img.channels; ++c) out[c] += weights[n] * px[c];
    }
    return out;
}

std::vector<double> group_correlation(const std::vector<double>& a, const std::vector<double>& b,
                                      std::size_t groups) {
    if (a.size() != b.size()) throw DimensionMismatch(fmt::format("vectors of size {} and {}", a.size(), b.size()));
    if (groups == 0 || a.empty() || a.size() % groups != 0)
        throw DimensionMismatch(fmt::format("{} groups do not divide {} channels", groups, a.size()));
    const std::size_t per = a.size() / groups;
    std::vector<double> out(groups, 0.0);
    for (std::size_t g = 0; g < groups; ++g) {
        double s = 0.0;
        for (std::size_t c = g * per; c < (g + 1) * per; ++c) s += a[c] * b[c];
        out[g] = s / static_cast<double>(per);
    }
    return out;
}

double group_score(const std::vector<double>& a, const std::vector<double>& b, std::size_t groups) {
    const auto g = group_correlation(a, b, groups);
    return std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
}

std::vector<double> plane_sweep_scores(double ref_x, double ref_y, const std::vector<double>& depths,
                                       const FeatureImage& ref_img, const FeatureImage& src_img,
                                       const CameraIntrinsics& k, const PlanarPose& ref_to_src,
                                       std::size_t groups) {
    if (depths.empty()) throw std::invalid_argument("no depth hypotheses");
    if (ref_img.channels != src_img.channels)
        throw DimensionMismatch(fmt::format("reference has {} channels, source {}", ref_img.channels,
                                            src_img.channels));
    const std::vector<double> ref = sample_bilinear(ref_img, ref_x, ref_y);
    std::vector<double> scores(depths.size(), 0.0);
    for (std::size_t i = 0; i < depths.size(); ++i) {
        const auto p = project_in_view({ref_x, ref_y, depths[i]}, k, ref_to_src);
        if (!p) continue;
        scores[i] = group_score(ref, sample_bilinear(src_img, p->xb, p->yb), groups);
    }
    return scores;
}

double estimate_depth(const std::vector<double>& scores, const std::vector<double>& depths, double temperature) {
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    if (scores.size() != depths.size() || scores.empty())
        throw DimensionMismatch(fmt::format("{} scores for {} depths", scores.size(), depths.size()));
    const double top = *std::max_element(scores.begin(), scores.end());
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double w = std::exp((scores[i] - top) / temperature);
        num += w * depths[i];
        den += w;
    }
    return num / den;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimensionMismatch(fmt::format("samples of size {} and {}", a.size(), b.size()));
    if (a.size() < 2) return 0.0;
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double mean = (n + 1.0) / 2.0;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        const double da = ra[i] - mean;
        const double db = rb[i] - mean;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

std::vector<ExperimentRow> potential_error_experiment(std::uint64_t seed, std::size_t trials, const CameraRig& rig,
                                                      const EgoTrajectory& traj, const std::vector<int>& fusion_steps,
                                                      const SweepOptions& options, unsigned threads) {
    for (int t : fusion_steps)
        if (t < 1) throw std::invalid_argument(fmt::format("fusion steps must be >= 1, got {}", t));
    if (!(options.depth_lo > 0.0) || !(options.depth_hi > options.depth_lo))
        throw std::invalid_argument("invalid landmark depth range");
    if (!(options.y_hi > options.y_lo)) throw std::invalid_argument("invalid landmark height band");
    if (!(options.temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    if (options.groups == 0 || options.channels % options.groups != 0)
        throw std::invalid_argument(fmt::format("{} groups do not divide {} channels", options.groups,
                                                options.channels));
    if (fusion_steps.empty() || trials == 0) return {};

    const std::size_t now = traj.last_step();
    const int horizon = std::min(*std::max_element(fusion_steps.begin(), fusion_steps.end()), static_cast<int>(now));
    const std::size_t fixed_camera = options.camera.empty() ? rig.size() : rig.index_of(options.camera);
    const CameraIntrinsics k = feature_intrinsics(options.resolution_divisor);
    const std::vector<double> depths = options.bins.centers();

    std::vector<std::vector<ExperimentRow>> per_trial(trials);
    parallel_for(trials, threads, [&](std::size_t trial) {
        Rng rng(mix_seed(seed) ^ static_cast<std::uint64_t>(trial));
        const std::size_t cam =
            fixed_camera < rig.size() ? fixed_camera : static_cast<std::size_t>(uniform_index(rng, rig.size()));
        const PlanarPose cam_to_world_now = compose(traj.at(now), rig[cam].mount);

        SyntheticScene scene;
        scene.channels = options.channels;
        double u = 0.0, v = 0.0, true_depth = 0.0;
        scene.landmarks.push_back(random_landmark(rng, options, k, cam_to_world_now, u, v, true_depth));
        scene.landmarks.back().descriptor = random_descriptor(rng, options.channels);
        for (std::size_t i = 0; i < options.clutter; ++i) {
            double cu = 0.0, cv = 0.0, cd = 0.0;
            scene.landmarks.push_back(random_landmark(rng, options, k, cam_to_world_now, cu, cv, cd));
            scene.landmarks.back().descriptor = random_descriptor(rng, options.channels);
        }

        const FeatureImage ref_img = render_features(scene, k, invert(cam_to_world_now), options.splat_sigma);
        const std::vector<double> ref_feat = sample_bilinear(ref_img, u, v);
        const double self = group_score(ref_feat, ref_feat, options.groups);
        const double norm = self > 0.0 ? 1.0 / self : 1.0;

        std::vector<ViewResult> views;
        for (int t = 1; t <= horizon; ++t) {
            const std::size_t past = now - static_cast<std::size_t>(t);
            const PlanarPose world_to_src = invert(compose(traj.at(past), rig[cam].mount));
            const FeatureImage src_img = render_features(scene, k, world_to_src, options.splat_sigma);
            const PlanarPose ref_to_src = relative_pose(rig, traj, cam, now, cam, past);
            std::vector<double> scores =
                plane_sweep_scores(u, v, depths, ref_img, src_img, k, ref_to_src, options.groups);
            for (double& s : scores) s *= norm;
            ViewResult r;
            r.step = t;
            const double top = *std::max_element(scores.begin(), scores.end());
            const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
            r.margin = top - mean;
            const CandidatePoint target{u, v, true_depth};
            if (project_in_view(target, k, ref_to_src)) r.potential = localization_potential(target, k, ref_to_src).value;
            r.est_depth = estimate_depth(scores, depths, options.temperature);
            views.push_back(r);
        }

        for (int steps : fusion_steps) {
            const int avail = std::min(steps, horizon);
            ExperimentRow row;
            row.trial = trial;
            row.fusion_steps = steps;
            row.chosen_camera = rig[cam].name;
            row.true_depth = true_depth;
            const ViewResult* best = nullptr;
            for (int t = 1; t <= avail; ++t) {
                const ViewResult& r = views[static_cast<std::size_t>(t - 1)];
                if (best == nullptr || r.margin > best->margin) best = &r;
            }
            if (best != nullptr) {
                row.chosen_step = best->step;
                row.potential = best->potential;
                row.est_depth = best->est_depth;
            } else {
                // no history: fall back to the mean hypothesis depth
                row.est_depth = estimate_depth(std::vector<double>(depths.size(), 0.0), depths, options.temperature);
            }
            row.abs_error = std::abs(row.est_depth - true_depth);
            per_trial[trial].push_back(std::move(row));
        }
    });

    std::vector<ExperimentRow> rows;
    rows.reserve(trials * fusion_steps.size());
    for (auto& t : per_trial)
        for (auto& r : t) rows.push_back(std::move(r));
    return rows;
}

ExperimentSummary summarize(const std::vector<ExperimentRow>& rows, const std::vector<int>& fusion_steps) {
    ExperimentSummary s;
    s.fusion_steps = fusion_steps;
    for (int steps : fusion_steps) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& r : rows) {
            if (r.fusion_steps != steps) continue;
            sum += r.abs_error;
            ++n;
        }
        s.mean_abs_error.push_back(n == 0 ? 0.0 : sum / static_cast<double>(n));
    }
    std::vector<double> pot;
    std::vector<double> neg_err;
    for (const auto& r : rows) {
        pot.push_back(r.potential);
        neg_err.push_back(-r.abs_error);
    }
    s.spearman_potential_vs_neg_error = spearman(pot, neg_err);
    return s;
}

std::string experiment_to_csv(const std::vector<ExperimentRow>& rows) {
    std::string out = std::string(kExperimentHeader) + "\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", r.trial, r.fusion_steps, r.chosen_step, r.chosen_camera,
                           r.potential, r.true_depth, r.est_depth, r.abs_error);
    }
    return out;
}

}  // namespace tstereo
