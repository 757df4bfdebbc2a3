#pragma once

// Ego-centred bird's-eye-view grids: warping a past grid into the current
// ego frame and stacking a history of grids along the channel axis.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tstereo/rig_geometry.hpp"

namespace tstereo {

/// The ego sits at the grid centre, +x right, +z forward. Cell (ix, iz) is
/// centred at ((ix + 0.5 - cells_x / 2) * cell_size, (iz + 0.5 - cells_z / 2) * cell_size).
/// Data is channel-major: data[(c * cells_z + iz) * cells_x + ix].
struct BevGrid {
    std::size_t cells_x = 128;
    std::size_t cells_z = 128;
    std::size_t channels = 1;
    double cell_size = 0.8;
    std::vector<double> data;

    BevGrid() = default;
    /// Zero-filled. Throws std::invalid_argument on zero sizes or a
    /// non-positive cell size.
    BevGrid(std::size_t cells_x, std::size_t cells_z, std::size_t channels, double cell_size);

    double& at(std::size_t c, std::size_t iz, std::size_t ix) { return data[(c * cells_z + iz) * cells_x + ix]; }
    double at(std::size_t c, std::size_t iz, std::size_t ix) const { return data[(c * cells_z + iz) * cells_x + ix]; }

    Point2 cell_center(std::size_t ix, std::size_t iz) const;
    bool same_shape(const BevGrid& other) const;
};

struct BevFrame {
    BevGrid grid;
    PlanarPose ego_pose;  // ego -> world at capture time
};

/// motion maps the past ego frame into the current one. Each output cell
/// samples the input bilinearly (zero outside) at its centre expressed in
/// the past frame.
BevGrid warp_bev(const BevGrid& grid, const PlanarPose& motion, unsigned threads = 1);

/// frames are in capture order, oldest first. Every frame is warped into
/// current_pose and the results are concatenated most recent first.
/// Throws ShapeMismatch when the grids differ in cells or cell size, and
/// std::invalid_argument on an empty history.
BevGrid fuse_history(const std::vector<BevFrame>& frames, const PlanarPose& current_pose, unsigned threads = 1);

/// 64-byte header then little-endian doubles in channel-major order.
void write_bev(std::ostream& out, const BevGrid& grid);
void save_bev(const std::filesystem::path& path, const BevGrid& grid);
/// Throws ParseError on a bad magic, version, or truncated payload.
BevGrid read_bev(std::istream& in, const std::string& source = "<bev>");
BevGrid load_bev(const std::filesystem::path& path);

/// Smooth single-channel test pattern: cos/sin products with the given
/// number of periods across the grid.
BevGrid band_limited_field(std::size_t cells_x, std::size_t cells_z, double cell_size, double periods = 2.0);

}  // namespace tstereo
