#pragma once

// Greyscale heatmaps as binary PGM (P5, maxval 255).

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "tstereo/matrix.hpp"

namespace tstereo {

enum class HeatScale { linear, log };

struct HeatmapSpec {
    HeatScale scale = HeatScale::linear;
    /// Fixed (lo, hi) clamp; when empty the 1st and 99th percentiles of the
    /// finite (scaled) values are used.
    std::optional<std::pair<double, double>> clamp;
};

/// Maps values to 0..255 after optional log10(1 + v) scaling and clamping.
/// +inf maps to 255, -inf and NaN to 0; a degenerate range maps everything
/// to 0. Row 0 of the matrix becomes the top image row.
Matrix<std::uint8_t> to_gray(const Matrix<double>& values, const HeatmapSpec& spec = {});

std::string encode_pgm(const Matrix<std::uint8_t>& pixels);

}  // namespace tstereo
