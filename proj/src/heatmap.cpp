#include "tstereo/heatmap.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tstereo {
namespace {

double percentile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double apply_scale(double v, HeatScale s) {
    if (s == HeatScale::log && std::isfinite(v)) return std::log10(1.0 + std::max(v, 0.0));
    return v;
}

}  // namespace

Matrix<std::uint8_t> to_gray(const Matrix<double>& values, const HeatmapSpec& spec) {
    Matrix<std::uint8_t> out(values.rows(), values.cols(), 0);
    std::vector<double> scaled(values.size());
    std::vector<double> finite;
    for (std::size_t i = 0; i < values.size(); ++i) {
        scaled[i] = apply_scale(values.data()[i], spec.scale);
        if (std::isfinite(scaled[i])) finite.push_back(scaled[i]);
    }
    double lo = 0.0;
    double hi = 0.0;
    if (spec.clamp) {
        lo = apply_scale(spec.clamp->first, spec.scale);
        hi = apply_scale(spec.clamp->second, spec.scale);
        if (!(hi >= lo)) throw std::invalid_argument("heatmap clamp needs lo <= hi");
    } else if (!finite.empty()) {
        std::sort(finite.begin(), finite.end());
        lo = percentile(finite, 0.01);
        hi = percentile(finite, 0.99);
    }
    const bool degenerate = !(hi > lo);
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        const double v = scaled[i];
        std::uint8_t g = 0;
        if (std::isnan(v) || degenerate) {
            g = 0;
        } else if (v == INFINITY) {
            g = 255;
        } else if (v == -INFINITY) {
            g = 0;
        } else {
            const double t = (std::clamp(v, lo, hi) - lo) / (hi - lo);
            g = static_cast<std::uint8_t>(std::lround(t * 255.0));
        }
        out.data()[i] = g;
    }
    return out;
}

std::string encode_pgm(const Matrix<std::uint8_t>& pixels) {
    std::string out = fmt::format("P5\n{} {}\n255\n", pixels.cols(), pixels.rows());
    out.append(pixels.data().begin(), pixels.data().end());
    return out;
}

}  // namespace tstereo
