#pragma once

// Depth-hypothesis selection over a binned monocular depth distribution:
// evenly spaced bins, plain top-k, and top-k with Gaussian suppression of
// the neighbours of each pick.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace tstereo {

/// count uniform bins over [d_min, d_max]; bin i is centred at
/// d_min + (i + 0.5) * width().
struct DepthBins {
    double d_min = 2.0;
    double d_max = 58.0;
    std::size_t count = 112;

    DepthBins() = default;
    /// Throws std::invalid_argument unless 0 < d_min < d_max and count >= 1.
    DepthBins(double d_min, double d_max, std::size_t count);

    double width() const { return (d_max - d_min) / static_cast<double>(count); }
    double center(std::size_t i) const { return d_min + (static_cast<double>(i) + 0.5) * width(); }
    std::vector<double> centers() const;
};

/// Unnormalized non-negative weights, one per bin.
struct MonocularDepthDistribution {
    DepthBins bins;
    std::vector<double> weights;

    MonocularDepthDistribution() = default;
    /// Throws DimensionMismatch when the sizes differ and
    /// std::invalid_argument on negative or non-finite weights.
    MonocularDepthDistribution(DepthBins bins, std::vector<double> weights);
};

struct DepthHypothesisSet {
    std::vector<std::size_t> indices;  // in selection order
    std::vector<double> depths;        // bin centres of indices
};

/// The factor 1 - exp(-(d - d_l)^2 / (2 sigma^2)) applied to every bin.
MonocularDepthDistribution downweight(const MonocularDepthDistribution& dist, std::size_t chosen_index,
                                      double sigma);

/// k rounds of argmax (lowest index on ties) followed by downweight.
/// Throws AllZeroWeights when every weight is zero before k picks.
DepthHypothesisSet gaussian_spaced_topk(const MonocularDepthDistribution& dist, std::size_t k, double sigma = 1.0);

/// The k heaviest bins ordered by weight (descending), then index.
DepthHypothesisSet naive_topk(const MonocularDepthDistribution& dist, std::size_t k);

/// k indices evenly spaced over [0, count - 1], halves rounded toward zero.
/// k = 1 picks the midpoint.
DepthHypothesisSet uniform_hypotheses(const DepthBins& bins, std::size_t k);

/// Two Gaussian bumps (bin 20, height 1 and bin 80, height 0.6, both with a
/// 4-bin standard deviation) plus uniform noise in [0, 0.01).
MonocularDepthDistribution bimodal_distribution(const DepthBins& bins = {}, std::uint64_t seed = 42);

inline constexpr const char* kDistributionHeader = "bin_index,weight";
inline constexpr const char* kHypothesesHeader = "rank,bin_index,depth_m,weight";

/// Rows must list bin indices 0, 1, ... in order; the row count sets the
/// bin count over [d_min, d_max].
MonocularDepthDistribution parse_distribution(std::istream& in, double d_min, double d_max,
                                              const std::string& source = "<distribution>");
MonocularDepthDistribution load_distribution(const std::filesystem::path& path, double d_min, double d_max);

std::string distribution_to_csv(const MonocularDepthDistribution& dist);
/// Weights are those of the input distribution (before any suppression).
std::string hypotheses_to_csv(const DepthHypothesisSet& set, const MonocularDepthDistribution& dist);

}  // namespace tstereo
