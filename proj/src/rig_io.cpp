#include "tstereo/rig_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "tstereo/csv.hpp"
#include "tstereo/errors.hpp"

namespace tstereo {
namespace {

using nlohmann::json;

// Line numbers of each object opened directly inside the top-level
// container's array, i.e. the camera entries.
std::vector<std::size_t> camera_object_lines(std::string_view text) {
    std::vector<std::size_t> lines;
    std::size_t line = 1;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (char ch : text) {
        if (ch == '\n') ++line;
        if (in_string) {
            if (escaped) escaped = false;
            else if (ch == '\\') escaped = true;
            else if (ch == '"') in_string = false;
            continue;
        }
        switch (ch) {
            case '"': in_string = true; break;
            case '{':
            case '[':
                if (ch == '{' && depth == 2) lines.push_back(line);
                ++depth;
                break;
            case '}':
            case ']': --depth; break;
            default: break;
        }
    }
    return lines;
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

double number_field(const json& obj, const char* key, const std::string& src, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(src, line, fmt::format("camera is missing '{}'", key));
    if (!it->is_number()) throw ParseError(src, line, fmt::format("'{}' must be a number", key));
    const double v = it->get<double>();
    if (!std::isfinite(v)) throw ParseError(src, line, fmt::format("'{}' must be finite", key));
    return v;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), 0, "cannot open file");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

CameraRig parse_rig(std::string_view json_text, std::string_view source) {
    const std::string src(source);
    json doc;
    try {
        doc = json::parse(json_text.begin(), json_text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(src, line_of_offset(json_text, e.byte == 0 ? 0 : e.byte - 1), "invalid JSON");
    }
    if (!doc.is_object() || !doc.contains("cameras") || !doc["cameras"].is_array())
        throw ParseError(src, 1, "expected an object with a 'cameras' array");

    const auto lines = camera_object_lines(json_text);
    std::vector<RigCamera> cameras;
    std::size_t i = 0;
    for (const json& cam : doc["cameras"]) {
        const std::size_t line = i < lines.size() ? lines[i] : 1;
        ++i;
        if (!cam.is_object()) throw ParseError(src, line, "camera entry must be an object");
        const auto name_it = cam.find("name");
        if (name_it == cam.end() || !name_it->is_string() || name_it->get<std::string>().empty())
            throw ParseError(src, line, "camera needs a non-empty string 'name'");

        const double width = number_field(cam, "width", src, line);
        const double height = number_field(cam, "height", src, line);
        if (width != std::floor(width) || height != std::floor(height))
            throw ParseError(src, line, "'width' and 'height' must be integers");

        RigCamera rc;
        rc.name = name_it->get<std::string>();
        try {
            rc.intrinsics = CameraIntrinsics(number_field(cam, "f", src, line), number_field(cam, "cx", src, line),
                                             number_field(cam, "cy", src, line), width, height);
            rc.mount = PlanarPose(deg_to_rad(number_field(cam, "yaw_deg", src, line)),
                                  number_field(cam, "x_m", src, line), number_field(cam, "z_m", src, line));
        } catch (const std::invalid_argument& e) {
            throw ParseError(src, line, fmt::format("camera '{}': {}", rc.name, e.what()));
        }
        cameras.push_back(std::move(rc));
    }
    try {
        return CameraRig(std::move(cameras));
    } catch (const std::invalid_argument& e) {
        throw ParseError(src, 1, e.what());
    }
}

CameraRig load_rig(const std::filesystem::path& path) { return parse_rig(read_file(path), path.string()); }

std::string rig_to_json(const CameraRig& rig) {
    std::string out = "{\n  \"cameras\": [\n";
    for (std::size_t i = 0; i < rig.size(); ++i) {
        const RigCamera& c = rig[i];
        out += fmt::format(
            "    {{\"name\": \"{}\", \"f\": {}, \"cx\": {}, \"cy\": {}, \"width\": {}, \"height\": {}, "
            "\"yaw_deg\": {}, \"x_m\": {}, \"z_m\": {}}}{}\n",
            c.name, c.intrinsics.f, c.intrinsics.cx, c.intrinsics.cy, c.intrinsics.width, c.intrinsics.height,
            rad_to_deg(c.mount.theta), c.mount.tx, c.mount.tz, i + 1 < rig.size() ? "," : "");
    }
    out += "  ]\n}\n";
    return out;
}

EgoTrajectory parse_trajectory(std::istream& in, std::string_view source) {
    const auto rows = csv::read(in, source, kTrajectoryHeader);
    const std::string src(source);
    if (rows.empty()) throw ParseError(src, 1, "trajectory has no rows");

    double dt = 0.0;
    std::vector<PlanarPose> poses;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (csv::to_int(row, 0, source) != static_cast<long long>(i))
            throw ParseError(src, row.line, fmt::format("expected step {}", i));
        const double row_dt = csv::to_double(row, 1, source);
        if (!(row_dt > 0.0)) throw ParseError(src, row.line, "dt_s must be positive");
        if (i == 0) dt = row_dt;
        else if (std::abs(row_dt - dt) > 1e-9 * dt)
            throw ParseError(src, row.line, "dt_s must be constant along the trajectory");
        poses.emplace_back(csv::to_double(row, 2, source), csv::to_double(row, 3, source),
                           csv::to_double(row, 4, source));
    }
    return EgoTrajectory(dt, std::move(poses));
}

EgoTrajectory load_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "cannot open file");
    return parse_trajectory(in, path.string());
}

std::string trajectory_to_csv(const EgoTrajectory& traj) {
    std::string out(kTrajectoryHeader);
    out += '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const PlanarPose& p = traj.poses()[i];
        out += fmt::format("{},{},{},{},{}\n", i, traj.dt(), p.theta, p.tx, p.tz);
    }
    return out;
}

CameraRig nuscenes_like_rig() {
    const CameraIntrinsics k(35.0, 22.0, 8.0, 44.0, 16.0);
    auto cam = [&](const char* name, double yaw_deg, double x, double z) {
        return RigCamera{name, k, PlanarPose(deg_to_rad(yaw_deg), x, z)};
    };
    return CameraRig({
        cam("front", 0.0, 0.0, 1.5),
        cam("front_left", 55.0, -0.5, 1.3),
        cam("front_right", -55.0, 0.5, 1.3),
        cam("back_left", 110.0, -0.5, 0.0),
        cam("back_right", -110.0, 0.5, 0.0),
        cam("back", 180.0, 0.0, -1.0),
    });
}

PlanarPose nuscenes_mean_step() { return PlanarPose(0.0, 0.05, 3.19); }

EgoTrajectory straight_trajectory(std::size_t steps) {
    return make_constant_motion_trajectory(steps, nuscenes_mean_step(), 0.5);
}

}  // namespace tstereo
