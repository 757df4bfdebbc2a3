#include "tstereo/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "tstereo/ambiguity.hpp"
#include "tstereo/bev_history.hpp"
#include "tstereo/errors.hpp"
#include "tstereo/heatmap.hpp"
#include "tstereo/hypotheses.hpp"
#include "tstereo/parallel.hpp"
#include "tstereo/potential.hpp"
#include "tstereo/rig_io.hpp"
#include "tstereo/sweep_lab.hpp"
#include "tstereo/view_search.hpp"

namespace tstereo {
namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
    std::string rig;
    std::string traj;
    std::string out;
    std::uint64_t seed = 42;
    unsigned threads = 0;
};

struct HeatOptions {
    bool log = false;
    std::vector<double> clamp;

    HeatmapSpec spec() const {
        HeatmapSpec s;
        s.scale = log ? HeatScale::log : HeatScale::linear;
        if (clamp.size() == 2) s.clamp = std::make_pair(clamp[0], clamp[1]);
        return s;
    }
};

// Files are collected in memory and written together at the end.
class Outputs {
public:
    explicit Outputs(std::string prefix) : prefix_(std::move(prefix)) {}

    void add(const std::string& suffix, std::string content) {
        files_.emplace_back(fs::path(prefix_ + suffix), std::move(content));
    }

    void commit(std::ostream& log) const {
        for (const auto& [path, content] : files_) {
            if (path.has_parent_path()) fs::create_directories(path.parent_path());
            std::ofstream f(path, std::ios::binary);
            if (!f) throw InputError("cannot write " + path.string());
            f.write(content.data(), static_cast<std::streamsize>(content.size()));
            if (!f) throw Error("failed writing " + path.string());
            log << "wrote " << path.string() << "\n";
        }
    }

private:
    std::string prefix_;
    std::vector<std::pair<fs::path, std::string>> files_;
};

CameraRig load_rig_or_default(const GlobalOptions& g) {
    return g.rig.empty() ? nuscenes_like_rig() : load_rig(g.rig);
}

EgoTrajectory load_traj_or_default(const GlobalOptions& g) {
    return g.traj.empty() ? straight_trajectory() : load_trajectory(g.traj);
}

std::vector<std::size_t> selected_cameras(const CameraRig& rig, const std::vector<std::string>& names) {
    std::vector<std::size_t> out;
    if (names.empty()) {
        for (std::size_t i = 0; i < rig.size(); ++i) out.push_back(i);
    } else {
        for (const auto& n : names) out.push_back(rig.index_of(n));
    }
    return out;
}

std::string safe_name(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) c = '_';
    return out;
}

int default_max_steps(const EgoTrajectory& traj) {
    return static_cast<int>(std::min<std::size_t>(16, traj.last_step()));
}

// Degrees without the round-off of the radian round trip.
double clean_degrees(double rad) { return std::round(rad_to_deg(rad) * 1e9) / 1e9; }

// ---------------------------------------------------------------- potential-map

struct PotentialMapOptions {
    int step = 1;
    std::vector<std::string> cameras;
    HeatOptions heat;
};

void cmd_potential_map(const GlobalOptions& g, const PotentialMapOptions& o, Outputs& outputs) {
    const CameraRig rig = load_rig_or_default(g);
    const EgoTrajectory traj = load_traj_or_default(g);
    if (o.step < 1 || static_cast<std::size_t>(o.step) > traj.last_step())
        throw StepOutOfRange(fmt::format("--step must be in [1, {}], got {}", traj.last_step(), o.step));
    const std::size_t now = traj.last_step();
    std::string csv = "camera,x_px,depth_m,value\n";
    for (std::size_t cam : selected_cameras(rig, o.cameras)) {
        const RigCamera& rc = rig[cam];
        const CandidateGrid grid = default_grid(rc.name, rc.intrinsics);
        const PlanarPose pose = relative_pose(rig, traj, cam, now, cam, now - static_cast<std::size_t>(o.step));
        Matrix<double> values(grid.depth_samples.size(), grid.x_samples.size(), 0.0);
        const std::size_t cols = grid.x_samples.size();
        parallel_for(values.size(), g.threads, [&](std::size_t cell) {
            const std::size_t r = cell / cols;
            const std::size_t c = cell % cols;
            const CandidatePoint p{grid.x_samples[c], rc.intrinsics.cy, grid.depth_samples[r]};
            if (project_in_view(p, rc.intrinsics, pose)) values(r, c) = localization_potential(p, rc.intrinsics, pose).value;
        });
        for (std::size_t r = 0; r < values.rows(); ++r)
            for (std::size_t c = 0; c < values.cols(); ++c)
                csv += fmt::format("{},{},{},{}\n", rc.name, grid.x_samples[c], grid.depth_samples[r], values(r, c));
        outputs.add("_" + safe_name(rc.name) + ".pgm", encode_pgm(to_gray(values, o.heat.spec())));
    }
    outputs.add(".csv", std::move(csv));
}

// ---------------------------------------------------------------- optimal

struct OptimalOptions {
    std::string mode = "time";
    std::vector<std::string> cameras;
    int max_steps = 0;  // 0: min(16, history)
    int step = 1;
    std::optional<double> tx;
    std::optional<double> tz;
    double theta_min = -90.0;
    double theta_max = 90.0;
    double theta_step = 1.0;
    double turn_deg = 90.0;
    int turn_steps = 8;
    double speed = 3.19;
    HeatOptions heat;
};

void cmd_optimal(const GlobalOptions& g, const OptimalOptions& o, Outputs& outputs) {
    const CameraRig rig = load_rig_or_default(g);
    const bool theta_mode = o.mode == "theta";
    const EgoTrajectory traj = o.mode == "time-turn" ? make_turn_trajectory(o.turn_deg, o.turn_steps, o.speed)
                                                     : load_traj_or_default(g);
    const std::size_t now = traj.last_step();

    std::string csv = theta_mode ? "camera,x_px,depth_m,value,valid,best_theta_deg\n"
                                 : "camera,x_px,depth_m,value,valid,best_step,best_camera\n";
    for (std::size_t cam : selected_cameras(rig, o.cameras)) {
        const RigCamera& rc = rig[cam];
        const CandidateGrid grid = default_grid(rc.name, rc.intrinsics);
        OptimalViewMap map;
        Matrix<double> heat;
        if (theta_mode) {
            if (now < 1 && !(o.tx && o.tz)) throw StepOutOfRange("trajectory has no history; pass --tx and --tz");
            if (o.step < 1 || (static_cast<std::size_t>(o.step) > now && !(o.tx && o.tz)))
                throw StepOutOfRange(fmt::format("--step must be in [1, {}], got {}", now, o.step));
            PlanarPose pose;
            if (!(o.tx && o.tz)) pose = relative_pose(rig, traj, cam, now, cam, now - static_cast<std::size_t>(o.step));
            const double tx = o.tx ? *o.tx : pose.tx;
            const double tz = o.tz ? *o.tz : pose.tz;
            ThetaSearch search{deg_to_rad(o.theta_min), deg_to_rad(o.theta_max), deg_to_rad(o.theta_step)};
            map = optimal_theta_map(grid, rc.intrinsics, tx, tz, search, g.threads);
            heat = Matrix<double>(map.best_theta.rows(), map.best_theta.cols());
            for (std::size_t i = 0; i < heat.size(); ++i) heat.data()[i] = rad_to_deg(map.best_theta.data()[i]);
        } else {
            const int max_steps = o.max_steps == 0 ? default_max_steps(traj) : o.max_steps;
            map = o.mode == "time" ? optimal_time_map_single(grid, rig, traj, max_steps, g.threads)
                                   : optimal_time_map_multi(grid, rig, traj, max_steps, g.threads);
            heat = Matrix<double>(map.best_step.rows(), map.best_step.cols());
            for (std::size_t i = 0; i < heat.size(); ++i) heat.data()[i] = map.best_step.data()[i];
        }
        for (std::size_t r = 0; r < map.best_value.rows(); ++r) {
            for (std::size_t c = 0; c < map.best_value.cols(); ++c) {
                const std::string head = fmt::format("{},{},{},{},{}", rc.name, grid.x_samples[c],
                                                     grid.depth_samples[r], map.best_value(r, c),
                                                     static_cast<int>(map.validity(r, c)));
                if (theta_mode) csv += fmt::format("{},{}\n", head, clean_degrees(map.best_theta(r, c)));
                else csv += fmt::format("{},{},{}\n", head, map.best_step(r, c), map.best_camera(r, c));
            }
        }
        outputs.add("_" + safe_name(rc.name) + ".pgm", encode_pgm(to_gray(heat, o.heat.spec())));
    }
    outputs.add(".csv", std::move(csv));
}

// ---------------------------------------------------------------- ambiguity

struct AmbiguityCliOptions {
    std::string objects;
    std::size_t per_camera = 1000;
    int steps = 16;
    double delta = 0.5;
    double threshold = 1.0;
    bool same_camera = false;
    std::vector<double> buckets;  // flattened lo,hi pairs
};

void cmd_ambiguity(const GlobalOptions& g, const AmbiguityCliOptions& o, Outputs& outputs) {
    const CameraRig rig = load_rig_or_default(g);
    const EgoTrajectory traj = load_traj_or_default(g);
    const auto objects = o.objects.empty() ? synthetic_objects(rig, o.per_camera, g.seed) : load_objects(o.objects);
    AmbiguityOptions opts;
    opts.steps_back = o.steps;
    opts.delta = o.delta;
    opts.threshold = o.threshold;
    opts.cross_camera = !o.same_camera;
    if (!o.buckets.empty()) {
        if (o.buckets.size() % 2 != 0) throw std::invalid_argument("--buckets needs lo,hi pairs");
        opts.buckets.clear();
        for (std::size_t i = 0; i < o.buckets.size(); i += 2) opts.buckets.emplace_back(o.buckets[i], o.buckets[i + 1]);
    }
    outputs.add(".csv", shift_stats_to_csv(percent_effective(objects, rig, traj, opts, g.threads)));
}

// ---------------------------------------------------------------- sample-depth

struct SampleDepthOptions {
    std::string dist;
    std::string method = "gs";
    std::size_t k = 7;
    double sigma = 1.0;
    double d_min = 2.0;
    double d_max = 58.0;
    std::size_t bins = 112;
};

void cmd_sample_depth(const GlobalOptions& g, const SampleDepthOptions& o, Outputs& outputs) {
    const MonocularDepthDistribution dist = o.dist.empty()
                                                ? bimodal_distribution(DepthBins(o.d_min, o.d_max, o.bins), g.seed)
                                                : load_distribution(o.dist, o.d_min, o.d_max);
    DepthHypothesisSet set;
    if (o.method == "gs") set = gaussian_spaced_topk(dist, o.k, o.sigma);
    else if (o.method == "naive") set = naive_topk(dist, o.k);
    else set = uniform_hypotheses(dist.bins, o.k);
    outputs.add(".csv", hypotheses_to_csv(set, dist));
}

// ---------------------------------------------------------------- sweep

struct SweepCliOptions {
    std::size_t trials = 200;
    std::vector<int> fusion_steps{1, 16};
    std::string camera;
    double resolution = SweepOptions{}.resolution_divisor;
    double temperature = SweepOptions{}.temperature;
    std::size_t clutter = SweepOptions{}.clutter;
    double depth_lo = SweepOptions{}.depth_lo;
    double depth_hi = SweepOptions{}.depth_hi;
};

void cmd_sweep(const GlobalOptions& g, const SweepCliOptions& o, Outputs& outputs) {
    const CameraRig rig = load_rig_or_default(g);
    const EgoTrajectory traj = load_traj_or_default(g);
    SweepOptions opts;
    opts.camera = o.camera;
    opts.resolution_divisor = o.resolution;
    opts.temperature = o.temperature;
    opts.clutter = o.clutter;
    opts.depth_lo = o.depth_lo;
    opts.depth_hi = o.depth_hi;
    if (!o.camera.empty()) rig.index_of(o.camera);
    const auto rows = potential_error_experiment(g.seed, o.trials, rig, traj, o.fusion_steps, opts, g.threads);
    const ExperimentSummary s = summarize(rows, o.fusion_steps);
    std::string summary = "statistic,fusion_steps,value\n";
    for (std::size_t i = 0; i < s.fusion_steps.size(); ++i)
        summary += fmt::format("mean_abs_error_m,{},{}\n", s.fusion_steps[i], s.mean_abs_error[i]);
    summary += fmt::format("spearman_potential_neg_error,,{}\n", s.spearman_potential_vs_neg_error);
    outputs.add(".csv", experiment_to_csv(rows));
    outputs.add("_summary.csv", std::move(summary));
}

// ---------------------------------------------------------------- bev

struct BevCliOptions {
    std::string input;
    int frames = 16;
    std::size_t cells = 128;
    double cell_size = 0.8;
};

void cmd_bev(const GlobalOptions& g, const BevCliOptions& o, Outputs& outputs) {
    const EgoTrajectory traj = load_traj_or_default(g);
    const BevGrid base = o.input.empty() ? band_limited_field(o.cells, o.cells, o.cell_size) : load_bev(o.input);
    if (o.frames < 1 || static_cast<std::size_t>(o.frames) > traj.size())
        throw StepOutOfRange(fmt::format("--frames must be in [1, {}], got {}", traj.size(), o.frames));
    const std::size_t now = traj.last_step();
    std::vector<BevFrame> frames;
    for (std::size_t s = now + 1 - static_cast<std::size_t>(o.frames); s <= now; ++s) frames.push_back({base, traj.at(s)});
    const BevGrid fused = fuse_history(frames, traj.at(now), g.threads);
    std::ostringstream bin(std::ios::binary);
    write_bev(bin, fused);
    outputs.add(".bevg", bin.str());
}

void add_heat_options(CLI::App* sub, HeatOptions& h) {
    sub->add_flag("--log", h.log, "Scale values by log10(1 + v) before mapping");
    sub->add_option("--clamp", h.clamp, "Fixed heat range LO HI (default: 1st/99th percentile)")->expected(2);
}

int fail(std::ostream& err, int code, const std::string& msg) {
    err << "error: " << msg << "\n";
    return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Temporal stereo geometry toolkit", "tstereo"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--rig", g.rig, "Camera rig JSON (default: built-in nuScenes-like rig)");
    app.add_option("--traj", g.traj, "Trajectory CSV (default: built-in straight trajectory)");
    app.add_option("--out", g.out, "Output path prefix")->required();
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads, 0 = available parallelism")->capture_default_str();

    PotentialMapOptions pm;
    auto* pm_cmd = app.add_subcommand("potential-map", "Localization potential for one time offset, per camera");
    pm_cmd->add_option("--step", pm.step, "Time offset in steps")->capture_default_str();
    pm_cmd->add_option("--camera", pm.cameras, "Restrict to these cameras");
    add_heat_options(pm_cmd, pm.heat);

    OptimalOptions op;
    auto* op_cmd = app.add_subcommand("optimal", "Optimal rotation or time offset per candidate location");
    op_cmd->add_option("--mode", op.mode, "theta | time | time-multi | time-turn")
        ->check(CLI::IsMember({"theta", "time", "time-multi", "time-turn"}))
        ->capture_default_str();
    op_cmd->add_option("--camera", op.cameras, "Restrict to these cameras");
    op_cmd->add_option("--max-steps", op.max_steps, "Steps searched (default: min(16, history))");
    op_cmd->add_option("--step", op.step, "Offset giving the translation for --mode theta")->capture_default_str();
    op_cmd->add_option("--tx", op.tx, "Override translation x for --mode theta");
    op_cmd->add_option("--tz", op.tz, "Override translation z for --mode theta");
    op_cmd->add_option("--theta-min", op.theta_min, "Degrees")->capture_default_str();
    op_cmd->add_option("--theta-max", op.theta_max, "Degrees")->capture_default_str();
    op_cmd->add_option("--theta-step", op.theta_step, "Degrees")->capture_default_str();
    op_cmd->add_option("--turn-deg", op.turn_deg, "Total turn for --mode time-turn")->capture_default_str();
    op_cmd->add_option("--turn-steps", op.turn_steps, "Steps over which the turn is spread")->capture_default_str();
    op_cmd->add_option("--speed", op.speed, "Metres per step for --mode time-turn")->capture_default_str();
    add_heat_options(op_cmd, op.heat);

    AmbiguityCliOptions am;
    auto* am_cmd = app.add_subcommand("ambiguity", "Projection shift statistics under a depth perturbation");
    am_cmd->add_option("--objects", am.objects, "Object CSV (default: synthetic population)");
    am_cmd->add_option("--per-camera", am.per_camera, "Synthetic objects per camera")->capture_default_str();
    am_cmd->add_option("--steps", am.steps, "Steps back")->capture_default_str();
    am_cmd->add_option("--delta", am.delta, "Depth perturbation in metres")->capture_default_str();
    am_cmd->add_option("--threshold", am.threshold, "Pixels")->capture_default_str();
    am_cmd->add_flag("--same-camera-only", am.same_camera, "Ignore projections into other cameras");
    am_cmd->add_option("--buckets", am.buckets, "Depth buckets as LO HI LO HI ...");

    SampleDepthOptions sd;
    auto* sd_cmd = app.add_subcommand("sample-depth", "Select depth hypotheses from a monocular distribution");
    sd_cmd->add_option("--dist", sd.dist, "Distribution CSV (default: synthetic bimodal)");
    sd_cmd->add_option("--method", sd.method, "gs | naive | uniform")
        ->check(CLI::IsMember({"gs", "naive", "uniform"}))
        ->capture_default_str();
    sd_cmd->add_option("--k", sd.k, "Hypotheses")->capture_default_str();
    sd_cmd->add_option("--sigma", sd.sigma, "Suppression width in metres")->capture_default_str();
    sd_cmd->add_option("--d-min", sd.d_min, "Metres")->capture_default_str();
    sd_cmd->add_option("--d-max", sd.d_max, "Metres")->capture_default_str();
    sd_cmd->add_option("--bins", sd.bins, "Bins of the synthetic distribution")->capture_default_str();

    SweepCliOptions sw;
    auto* sw_cmd = app.add_subcommand("sweep", "Plane-sweep potential versus depth error experiment");
    sw_cmd->add_option("--trials", sw.trials)->capture_default_str();
    sw_cmd->add_option("--fusion-steps", sw.fusion_steps, "Horizons compared")->delimiter(',')->capture_default_str();
    sw_cmd->add_option("--camera", sw.camera, "Reference camera (default: random per trial)");
    sw_cmd->add_option("--resolution", sw.resolution, "Feature map divisor of 640x480")->capture_default_str();
    sw_cmd->add_option("--temperature", sw.temperature)->capture_default_str();
    sw_cmd->add_option("--clutter", sw.clutter, "Distractor landmarks")->capture_default_str();
    sw_cmd->add_option("--depth-lo", sw.depth_lo, "Nearest landmark depth in metres")->capture_default_str();
    sw_cmd->add_option("--depth-hi", sw.depth_hi, "Farthest landmark depth in metres")->capture_default_str();

    BevCliOptions bv;
    auto* bv_cmd = app.add_subcommand("bev", "Align and stack a history of BEV grids");
    bv_cmd->add_option("--input", bv.input, "BEVG grid (default: synthetic smooth field)");
    bv_cmd->add_option("--frames", bv.frames, "History length")->capture_default_str();
    bv_cmd->add_option("--cells", bv.cells, "Synthetic grid size")->capture_default_str();
    bv_cmd->add_option("--cell-size", bv.cell_size, "Metres per cell")->capture_default_str();

    std::vector<const char*> argv{"tstereo"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        return fail(err, 2, e.what());
    }

    try {
        if (g.out.empty()) throw std::invalid_argument("--out must not be empty");
        Outputs outputs(g.out);
        if (*pm_cmd) cmd_potential_map(g, pm, outputs);
        else if (*op_cmd) cmd_optimal(g, op, outputs);
        else if (*am_cmd) cmd_ambiguity(g, am, outputs);
        else if (*sd_cmd) cmd_sample_depth(g, sd, outputs);
        else if (*sw_cmd) cmd_sweep(g, sw, outputs);
        else if (*bv_cmd) cmd_bev(g, bv, outputs);
        outputs.commit(out);
    } catch (const InputError& e) {
        return fail(err, 2, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(err, 2, e.what());
    } catch (const std::exception& e) {
        return fail(err, 1, e.what());
    }
    return 0;
}

}  // namespace tstereo
