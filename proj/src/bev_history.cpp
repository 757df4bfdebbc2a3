#include "tstereo/bev_history.hpp"

#include <fmt/format.h>

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "tstereo/errors.hpp"
#include "tstereo/parallel.hpp"

namespace tstereo {
namespace {

constexpr std::array<char, 8> kMagic{'B', 'E', 'V', 'G', 0, 0, 0, 0};
constexpr std::uint64_t kVersion = 1;

// Continuous cell coordinate of a metric position; integral at cell centres.
double to_index(double metres, double cell_size, std::size_t cells) {
    const double idx = metres / cell_size + static_cast<double>(cells) / 2.0 - 0.5;
    const double r = std::round(idx);
    return std::abs(idx - r) < 1e-9 ? r : idx;
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

bool get_u64(std::istream& in, std::uint64_t& v) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return true;
}

}  // namespace

BevGrid::BevGrid(std::size_t nx, std::size_t nz, std::size_t nc, double cs)
    : cells_x(nx), cells_z(nz), channels(nc), cell_size(cs) {
    if (nx == 0 || nz == 0 || nc == 0) throw std::invalid_argument("BEV grid sizes must be positive");
    if (!(cs > 0.0) || !std::isfinite(cs)) throw std::invalid_argument("BEV cell size must be positive");
    data.assign(nx * nz * nc, 0.0);
}

Point2 BevGrid::cell_center(std::size_t ix, std::size_t iz) const {
    return {(static_cast<double>(ix) + 0.5 - static_cast<double>(cells_x) / 2.0) * cell_size,
            (static_cast<double>(iz) + 0.5 - static_cast<double>(cells_z) / 2.0) * cell_size};
}

bool BevGrid::same_shape(const BevGrid& o) const {
    return cells_x == o.cells_x && cells_z == o.cells_z && cell_size == o.cell_size;
}

BevGrid warp_bev(const BevGrid& grid, const PlanarPose& motion, unsigned threads) {
    BevGrid out(grid.cells_x, grid.cells_z, grid.channels, grid.cell_size);
    const PlanarPose to_past = invert(motion);
    const auto nx = static_cast<std::ptrdiff_t>(grid.cells_x);
    const auto nz = static_cast<std::ptrdiff_t>(grid.cells_z);
    parallel_for(grid.cells_z, threads, [&](std::size_t iz) {
        for (std::size_t ix = 0; ix < grid.cells_x; ++ix) {
            const Point2 p = transform(to_past, out.cell_center(ix, iz));
            const double fx = to_index(p.x, grid.cell_size, grid.cells_x);
            const double fz = to_index(p.z, grid.cell_size, grid.cells_z);
            const double x0 = std::floor(fx);
            const double z0 = std::floor(fz);
            const double ax = fx - x0;
            const double az = fz - z0;
            const double w[4] = {(1.0 - ax) * (1.0 - az), ax * (1.0 - az), (1.0 - ax) * az, ax * az};
            const double xs[4] = {x0, x0 + 1.0, x0, x0 + 1.0};
            const double zs[4] = {z0, z0, z0 + 1.0, z0 + 1.0};
            for (int n = 0; n < 4; ++n) {
                if (w[n] == 0.0) continue;
                if (xs[n] < 0.0 || zs[n] < 0.0 || xs[n] >= static_cast<double>(nx) || zs[n] >= static_cast<double>(nz))
                    continue;
                const auto sx = static_cast<std::size_t>(xs[n]);
                const auto sz = static_cast<std::size_t>(zs[n]);
                for (std::size_t c = 0; c < grid.channels; ++c) out.at(c, iz, ix) += w[n] * grid.at(c, sz, sx);
            }
        }
    });
    return out;
}

BevGrid fuse_history(const std::vector<BevFrame>& frames, const PlanarPose& current_pose, unsigned threads) {
    if (frames.empty()) throw std::invalid_argument("BEV history is empty");
    const BevGrid& first = frames.front().grid;
    std::size_t channels = 0;
    for (const BevFrame& f : frames) {
        if (!f.grid.same_shape(first))
            throw ShapeMismatch(fmt::format("BEV grid {}x{}@{} does not match {}x{}@{}", f.grid.cells_x,
                                            f.grid.cells_z, f.grid.cell_size, first.cells_x, first.cells_z,
                                            first.cell_size));
        channels += f.grid.channels;
    }
    BevGrid out(first.cells_x, first.cells_z, channels, first.cell_size);
    const PlanarPose world_to_current = invert(current_pose);
    const std::size_t plane = first.cells_x * first.cells_z;
    std::size_t offset = 0;
    for (auto it = frames.rbegin(); it != frames.rend(); ++it) {
        const BevGrid warped = warp_bev(it->grid, compose(world_to_current, it->ego_pose), threads);
        std::copy(warped.data.begin(), warped.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(offset));
        offset += warped.channels * plane;
    }
    return out;
}

void write_bev(std::ostream& out, const BevGrid& grid) {
    out.write(kMagic.data(), kMagic.size());
    put_u64(out, kVersion);
    put_u64(out, grid.cells_x);
    put_u64(out, grid.cells_z);
    put_u64(out, grid.channels);
    put_f64(out, grid.cell_size);
    put_u64(out, 0);
    put_u64(out, 0);
    for (double v : grid.data) put_f64(out, v);
}

void save_bev(const std::filesystem::path& path, const BevGrid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    write_bev(out, grid);
    if (!out) throw Error("failed writing " + path.string());
}

BevGrid read_bev(std::istream& in, const std::string& source) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw ParseError(source, 0, "not a BEVG file");
    std::uint64_t version = 0, nx = 0, nz = 0, nc = 0, cs_bits = 0, r0 = 0, r1 = 0;
    if (!get_u64(in, version) || !get_u64(in, nx) || !get_u64(in, nz) || !get_u64(in, nc) || !get_u64(in, cs_bits) ||
        !get_u64(in, r0) || !get_u64(in, r1))
        throw ParseError(source, 0, "truncated BEVG header");
    if (version != kVersion) throw ParseError(source, 0, fmt::format("unsupported BEVG version {}", version));
    const double cs = std::bit_cast<double>(cs_bits);
    if (nx == 0 || nz == 0 || nc == 0 || !(cs > 0.0) || !std::isfinite(cs))
        throw ParseError(source, 0, "invalid BEVG dimensions");
    if (nx > (1u << 20) || nz > (1u << 20) || nc > (1u << 20) || nx * nz > (std::uint64_t{1} << 32) / nc)
        throw ParseError(source, 0, "BEVG dimensions too large");
    BevGrid g(nx, nz, nc, cs);
    for (double& v : g.data) {
        std::uint64_t bits = 0;
        if (!get_u64(in, bits)) throw ParseError(source, 0, "truncated BEVG payload");
        v = std::bit_cast<double>(bits);
        if (!std::isfinite(v)) throw ParseError(source, 0, "non-finite BEVG value");
    }
    return g;
}

BevGrid load_bev(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), 0, "cannot open file");
    return read_bev(in, path.string());
}

BevGrid band_limited_field(std::size_t cells_x, std::size_t cells_z, double cell_size, double periods) {
    BevGrid g(cells_x, cells_z, 1, cell_size);
    const double kx = 2.0 * kPi * periods / (static_cast<double>(cells_x) * cell_size);
    const double kz = 2.0 * kPi * periods / (static_cast<double>(cells_z) * cell_size);
    for (std::size_t iz = 0; iz < cells_z; ++iz) {
        for (std::size_t ix = 0; ix < cells_x; ++ix) {
            const Point2 p = g.cell_center(ix, iz);
            g.at(0, iz, ix) = std::cos(kx * p.x) * std::cos(kz * p.z) + 0.5 * std::sin(kx * p.x + 0.5 * kz * p.z);
        }
    }
    return g;
}

}  // namespace tstereo
