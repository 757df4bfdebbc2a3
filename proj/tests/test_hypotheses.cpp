#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "tstereo/errors.hpp"
#include "tstereo/hypotheses.hpp"
#include "tstereo/random.hpp"

using namespace tstereo;

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;

MonocularDepthDistribution uniform_dist(std::size_t n, double width = 1.0) {
    return {DepthBins(1.0, 1.0 + width * n, n), std::vector<double>(n, 1.0)};
}

MonocularDepthDistribution random_dist(Rng& rng, std::size_t n) {
    std::vector<double> w(n);
    for (double& v : w) v = uniform01(rng);
    return {DepthBins(2.0, 2.0 + 0.5 * n, n), w};
}

// literal update with an explicit normal density
std::vector<std::size_t> reference_gaussian_topk(const MonocularDepthDistribution& dist, std::size_t k, double sigma) {
    std::vector<double> p = dist.weights;
    const auto depths = dist.bins.centers();
    std::vector<std::size_t> picks;
    for (std::size_t round = 0; round < k; ++round) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < p.size(); ++i)
            if (p[i] > p[best]) best = i;
        picks.push_back(best);
        const double dl = depths[best];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double z = (depths[i] - dl) / sigma;
            const double density = std::exp(-0.5 * z * z) / (sigma * kSqrt2Pi);
            p[i] = p[i] * (1.0 - density * sigma * kSqrt2Pi);
        }
        p[best] = 0.0;
    }
    return picks;
}

std::size_t min_gap(std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    std::size_t gap = SIZE_MAX;
    for (std::size_t i = 1; i < v.size(); ++i) gap = std::min(gap, v[i] - v[i - 1]);
    return gap;
}

}  // namespace

TEST(Bins, Layout) {
    const DepthBins b;
    EXPECT_EQ(b.count, 112u);
    EXPECT_DOUBLE_EQ(b.width(), 0.5);
    EXPECT_DOUBLE_EQ(b.center(0), 2.25);
    EXPECT_DOUBLE_EQ(b.center(111), 57.75);
    EXPECT_THROW(DepthBins(0.0, 1.0, 4), std::invalid_argument);
    EXPECT_THROW(DepthBins(2.0, 1.0, 4), std::invalid_argument);
    EXPECT_THROW(DepthBins(1.0, 2.0, 0), std::invalid_argument);
    EXPECT_THROW(MonocularDepthDistribution(DepthBins(), std::vector<double>(3, 1.0)), DimensionMismatch);
    EXPECT_THROW(MonocularDepthDistribution(DepthBins(1, 2, 2), {1.0, -1.0}), std::invalid_argument);
    EXPECT_THROW(MonocularDepthDistribution(DepthBins(1, 2, 2), {1.0, NAN}), std::invalid_argument);
}

TEST(Downweight, Factors) {
    const MonocularDepthDistribution d(DepthBins(2.0, 58.0, 112), std::vector<double>(112, 1.0));
    const auto w = downweight(d, 50, 1.0).weights;
    EXPECT_EQ(w[50], 0.0);
    EXPECT_NEAR(w[52], 0.39347, 1e-5);
    EXPECT_NEAR(w[48], 0.39347, 1e-5);
    EXPECT_NEAR(w[58], 0.99966, 1e-5);
    EXPECT_NEAR(w[52], 1.0 - std::exp(-0.5), 1e-15);
    for (double v : w) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    EXPECT_THROW(downweight(d, 112, 1.0), IndexOutOfRange);
    EXPECT_THROW(downweight(d, 0, 0.0), std::invalid_argument);
}

TEST(Downweight, NeverIncreasesAndZeroesOnlyTheChosenBin) {
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        const auto d = random_dist(rng, 112);
        const std::size_t idx = uniform_index(rng, 112);
        const auto w = downweight(d, idx, uniform(rng, 0.2, 5.0)).weights;
        for (std::size_t j = 0; j < w.size(); ++j) {
            EXPECT_LE(w[j], d.weights[j]);
            EXPECT_GE(w[j], 0.0);
            if (j == idx) {
                EXPECT_EQ(w[j], 0.0);
            } else if (d.weights[j] > 0) {
                EXPECT_GT(w[j], 0.0);
            }
        }
    }
}

TEST(GaussianTopk, UniformFiveBins) {
    const auto set = gaussian_spaced_topk(uniform_dist(5), 2, 1.0);
    EXPECT_EQ(set.indices, (std::vector<std::size_t>{0, 4}));
    const auto w = downweight(uniform_dist(5), 0, 1.0).weights;
    const double expected[] = {0.0, 0.3935, 0.8647, 0.9889, 0.99966};
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(w[i], expected[i], 1e-4);
}

TEST(GaussianTopk, ExhaustsAllBins) {
    const auto set = gaussian_spaced_topk(uniform_dist(9), 9, 1.0);
    std::set<std::size_t> unique(set.indices.begin(), set.indices.end());
    EXPECT_EQ(unique.size(), 9u);
    ASSERT_EQ(set.depths.size(), 9u);
    EXPECT_EQ(set.depths[0], 1.5);
}

TEST(GaussianTopk, MatchesLiteralReference) {
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
        const auto d = random_dist(rng, 112);
        const double sigma = uniform(rng, 0.25, 4.0);
        const auto ours = gaussian_spaced_topk(d, 7, sigma).indices;
        EXPECT_EQ(ours, reference_gaussian_topk(d, 7, sigma)) << "fixture " << i;
    }
    const auto bimodal = bimodal_distribution();
    EXPECT_EQ(gaussian_spaced_topk(bimodal, 7, 1.0).indices, reference_gaussian_topk(bimodal, 7, 1.0));
}

TEST(GaussianTopk, AllZeroWeights) {
    const MonocularDepthDistribution z(DepthBins(1, 2, 4), {0, 0, 0, 0});
    EXPECT_THROW(gaussian_spaced_topk(z, 1), AllZeroWeights);
    const MonocularDepthDistribution one(DepthBins(1, 2, 4), {0, 1, 0, 0});
    EXPECT_THROW(gaussian_spaced_topk(one, 2), AllZeroWeights);
    EXPECT_THROW(gaussian_spaced_topk(one, 0), std::invalid_argument);
    EXPECT_THROW(gaussian_spaced_topk(one, 5), std::invalid_argument);
}

TEST(GaussianTopk, BimodalCoverage) {
    const auto dist = bimodal_distribution();
    ASSERT_EQ(dist.weights.size(), 112u);
    auto near = [](const std::vector<std::size_t>& idx, int mode) {
        return std::any_of(idx.begin(), idx.end(), [&](std::size_t i) { return std::abs(static_cast<int>(i) - mode) <= 2; });
    };
    const auto gs = gaussian_spaced_topk(dist, 7, 1.0).indices;
    EXPECT_TRUE(near(gs, 20));
    EXPECT_TRUE(near(gs, 80));
    const auto naive = naive_topk(dist, 7).indices;
    EXPECT_TRUE(near(naive, 20));
    EXPECT_FALSE(near(naive, 80));
    EXPECT_EQ(bimodal_distribution().weights, dist.weights);
    EXPECT_NE(bimodal_distribution({}, 43).weights, dist.weights);
}

TEST(GaussianTopk, SpacingPressureOnUniform) {
    for (double sigma : {0.5, 1.0, 2.0, 5.0}) {
        const auto d = uniform_dist(112, 0.5);
        for (std::size_t k : {2, 7, 20}) {
            EXPECT_GE(min_gap(gaussian_spaced_topk(d, k, sigma).indices), min_gap(naive_topk(d, k).indices));
        }
    }
}

TEST(GaussianTopk, VanishingSigmaIsNaive) {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto d = random_dist(rng, 112);
        auto a = gaussian_spaced_topk(d, 7, 1e-6).indices;
        auto b = naive_topk(d, 7).indices;
        EXPECT_EQ(a, b);
    }
}

TEST(NaiveTopk, Basics) {
    EXPECT_EQ(naive_topk(uniform_dist(6), 3).indices, (std::vector<std::size_t>{0, 1, 2}));
    const MonocularDepthDistribution d(DepthBins(1, 2, 5), {0.1, 0.5, 0.3, 0.5, 0.9});
    EXPECT_EQ(naive_topk(d, 1).indices, (std::vector<std::size_t>{4}));
    EXPECT_EQ(naive_topk(d, 3).indices, (std::vector<std::size_t>{4, 1, 3}));
}

TEST(NaiveTopk, MatchesSortOracle) {
    Rng rng(4);
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> w(16);
        // coarse values so that ties occur
        for (double& v : w) v = static_cast<double>(uniform_index(rng, 5));
        const MonocularDepthDistribution d(DepthBins(1, 9, 16), w);
        std::vector<std::size_t> order(16);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
        const std::size_t k = 1 + uniform_index(rng, 16);
        order.resize(k);
        EXPECT_EQ(naive_topk(d, k).indices, order);
    }
}

TEST(Uniform, LinspaceOracle) {
    const DepthBins bins;
    const auto set = uniform_hypotheses(bins, 28);
    ASSERT_EQ(set.indices.size(), 28u);
    for (std::size_t i = 0; i < 28; ++i) {
        const double v = static_cast<double>(i) * 111.0 / 27.0;
        double r = std::floor(v);
        if (v - r > 0.5) r += 1;
        EXPECT_EQ(set.indices[i], static_cast<std::size_t>(r)) << i;
    }
    EXPECT_EQ(set.indices[1], 4u);
    EXPECT_EQ(set.indices.back(), 111u);
    EXPECT_EQ(uniform_hypotheses(bins, 1).indices, (std::vector<std::size_t>{55}));
    const auto all = uniform_hypotheses(bins, 112).indices;
    for (std::size_t i = 0; i < 112; ++i) EXPECT_EQ(all[i], i);
    // exact halves round toward zero: 0..4 in 3 picks -> 0, 2, 4; 0..3 in 3 -> 0, 1.5 -> 1, 3
    EXPECT_EQ(uniform_hypotheses(DepthBins(1, 2, 4), 3).indices, (std::vector<std::size_t>{0, 1, 3}));
    EXPECT_THROW(uniform_hypotheses(bins, 0), std::invalid_argument);
    EXPECT_THROW(uniform_hypotheses(bins, 113), std::invalid_argument);
}

TEST(DistributionCsv, RoundTripAndErrors) {
    const auto dist = bimodal_distribution();
    std::istringstream in(distribution_to_csv(dist));
    const auto back = parse_distribution(in, 2.0, 58.0);
    EXPECT_EQ(back.weights, dist.weights);
    EXPECT_EQ(back.bins.count, 112u);

    auto line_of = [](const std::string& text) -> std::size_t {
        std::istringstream s(text);
        try {
            parse_distribution(s, 2.0, 58.0, "d.csv");
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of("bin,weight\n0,1\n"), 1u);
    EXPECT_EQ(line_of("bin_index,weight\n0,1\n2,1\n"), 3u);
    EXPECT_EQ(line_of("bin_index,weight\n0,-1\n"), 2u);
    EXPECT_EQ(line_of("bin_index,weight\n0,abc\n"), 2u);
    EXPECT_NE(line_of("bin_index,weight\n"), 0u);
    EXPECT_THROW(load_distribution("/nonexistent.csv", 2, 58), ParseError);

    const auto set = gaussian_spaced_topk(dist, 2);
    const std::string csv = hypotheses_to_csv(set, dist);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), kHypothesesHeader);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}
