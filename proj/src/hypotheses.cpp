#include "tstereo/hypotheses.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "tstereo/csv.hpp"
#include "tstereo/errors.hpp"
#include "tstereo/random.hpp"

namespace tstereo {
namespace {

void check_k(std::size_t k, std::size_t count) {
    if (k < 1 || k > count)
        throw std::invalid_argument(fmt::format("k must be in [1, {}], got {}", count, k));
}

DepthHypothesisSet make_set(const DepthBins& bins, std::vector<std::size_t> indices) {
    DepthHypothesisSet s;
    s.depths.reserve(indices.size());
    for (std::size_t i : indices) s.depths.push_back(bins.center(i));
    s.indices = std::move(indices);
    return s;
}

}  // namespace

DepthBins::DepthBins(double lo, double hi, std::size_t n) : d_min(lo), d_max(hi), count(n) {
    if (!(d_min > 0.0) || !(d_max > d_min) || !std::isfinite(d_max))
        throw std::invalid_argument("depth bins need 0 < d_min < d_max");
    if (count < 1) throw std::invalid_argument("depth bins need at least one bin");
}

std::vector<double> DepthBins::centers() const {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = center(i);
    return out;
}

MonocularDepthDistribution::MonocularDepthDistribution(DepthBins b, std::vector<double> w)
    : bins(b), weights(std::move(w)) {
    if (weights.size() != bins.count)
        throw DimensionMismatch(fmt::format("{} weights for {} bins", weights.size(), bins.count));
    for (double v : weights)
        if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("weights must be finite and non-negative");
}

MonocularDepthDistribution downweight(const MonocularDepthDistribution& dist, std::size_t chosen_index,
                                      double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (chosen_index >= dist.weights.size())
        throw IndexOutOfRange(fmt::format("bin {} out of range [0, {})", chosen_index, dist.weights.size()));
    MonocularDepthDistribution out = dist;
    const double dl = dist.bins.center(chosen_index);
    for (std::size_t i = 0; i < out.weights.size(); ++i) {
        if (i == chosen_index) {
            out.weights[i] = 0.0;
            continue;
        }
        const double r = dist.bins.center(i) - dl;
        out.weights[i] *= -std::expm1(-r * r / (2.0 * sigma * sigma));
    }
    return out;
}

DepthHypothesisSet gaussian_spaced_topk(const MonocularDepthDistribution& dist, std::size_t k, double sigma) {
    check_k(k, dist.bins.count);
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    MonocularDepthDistribution cur = dist;
    std::vector<std::size_t> picks;
    picks.reserve(k);
    while (picks.size() < k) {
        const auto it = std::max_element(cur.weights.begin(), cur.weights.end());
        if (!(*it > 0.0))
            throw AllZeroWeights(fmt::format("all weights are zero after {} of {} picks", picks.size(), k));
        const auto idx = static_cast<std::size_t>(it - cur.weights.begin());
        picks.push_back(idx);
        cur = downweight(cur, idx, sigma);
    }
    return make_set(dist.bins, std::move(picks));
}

DepthHypothesisSet naive_topk(const MonocularDepthDistribution& dist, std::size_t k) {
    check_k(k, dist.bins.count);
    std::vector<std::size_t> order(dist.weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (dist.weights[a] != dist.weights[b]) return dist.weights[a] > dist.weights[b];
                          return a < b;
                      });
    order.resize(k);
    return make_set(dist.bins, std::move(order));
}

DepthHypothesisSet uniform_hypotheses(const DepthBins& bins, std::size_t k) {
    check_k(k, bins.count);
    std::vector<std::size_t> picks;
    picks.reserve(k);
    const std::size_t span = bins.count - 1;
    for (std::size_t i = 0; i < k; ++i) {
        // position = num / den, exactly
        const std::size_t num = k == 1 ? span : i * span;
        const std::size_t den = k == 1 ? 2 : k - 1;
        std::size_t q = num / den;
        if (2 * (num % den) > den) ++q;
        picks.push_back(q);
    }
    return make_set(bins, std::move(picks));
}

MonocularDepthDistribution bimodal_distribution(const DepthBins& bins, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> w(bins.count);
    for (std::size_t i = 0; i < bins.count; ++i) {
        const double x = static_cast<double>(i);
        const double a = (x - 20.0) / 4.0;
        const double b = (x - 80.0) / 4.0;
        w[i] = std::exp(-0.5 * a * a) + 0.6 * std::exp(-0.5 * b * b) + 0.01 * uniform01(rng);
    }
    return {bins, std::move(w)};
}

MonocularDepthDistribution parse_distribution(std::istream& in, double d_min, double d_max,
                                              const std::string& source) {
    const auto rows = csv::read(in, source, kDistributionHeader);
    if (rows.empty()) throw ParseError(source, 1, "distribution has no bins");
    std::vector<double> w;
    w.reserve(rows.size());
    for (const auto& row : rows) {
        const long long idx = csv::to_int(row, 0, source);
        if (idx != static_cast<long long>(w.size()))
            throw ParseError(source, row.line, fmt::format("expected bin_index {}, got {}", w.size(), idx));
        const double v = csv::to_double(row, 1, source);
        if (v < 0.0) throw ParseError(source, row.line, "weight must be non-negative");
        w.push_back(v);
    }
    DepthBins bins(d_min, d_max, w.size());
    return {bins, std::move(w)};
}

MonocularDepthDistribution load_distribution(const std::filesystem::path& path, double d_min, double d_max) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "cannot open file");
    return parse_distribution(in, d_min, d_max, path.string());
}

std::string distribution_to_csv(const MonocularDepthDistribution& dist) {
    std::string out = std::string(kDistributionHeader) + "\n";
    for (std::size_t i = 0; i < dist.weights.size(); ++i) out += fmt::format("{},{}\n", i, dist.weights[i]);
    return out;
}

std::string hypotheses_to_csv(const DepthHypothesisSet& set, const MonocularDepthDistribution& dist) {
    std::string out = std::string(kHypothesesHeader) + "\n";
    for (std::size_t r = 0; r < set.indices.size(); ++r) {
        const std::size_t i = set.indices[r];
        out += fmt::format("{},{},{},{}\n", r, i, set.depths[r], dist.weights.at(i));
    }
    return out;
}

}  // namespace tstereo
