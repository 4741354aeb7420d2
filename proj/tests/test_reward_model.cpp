#include "coexplore/reward_model.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace coexplore;

namespace
{

std::vector<double> random_simplex(int d, Rng& rng)
{
    std::exponential_distribution<double> e(1.0);
    std::vector<double> z(static_cast<std::size_t>(d));
    double sum = 0.0;
    for (auto& v : z)
    {
        v = e(rng);
        sum += v;
    }
    for (auto& v : z)
    {
        v /= sum;
    }
    return z;
}

LabeledDataset random_dataset(int d, int n, Rng& rng)
{
    LabeledDataset data;
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < n; ++i)
    {
        data.push_back({random_simplex(d, rng), coin(rng) ? 1 : 0});
    }
    return data;
}

RewardModelParams informed(std::vector<double> w, double b)
{
    RewardModelParams p{std::move(w), b, true, true};
    return p;
}

} // namespace

TEST(Fit, SingleClassStaysUninformed)
{
    LabeledDataset data{{{0.2, 0.8}, 1}, {{0.9, 0.1}, 1}};
    auto params = fit(data, FitConfig{});
    EXPECT_FALSE(params.informed());
    EXPECT_EQ(predict(params, std::vector<double>{0.3, 0.7}), 0.5);
    EXPECT_EQ(predict(params, std::vector<double>{1.0, 0.0}), 0.5);
}

TEST(Fit, SeparableOrderingOnTwoPoints)
{
    LabeledDataset data{{{1.0, 0.0}, 0}, {{0.0, 1.0}, 1}};
    auto params = fit(data, FitConfig{1.0});
    ASSERT_TRUE(params.informed());
    EXPECT_GT(predict(params, std::vector<double>{0.0, 1.0}), 0.5);
    EXPECT_LT(predict(params, std::vector<double>{1.0, 0.0}), 0.5);
}

TEST(Fit, AgreesWithGridSearchOnTrainingLoss)
{
    // Noisy logistic ground truth in d = 2: logit = 3 z_0 - 1.5.
    Rng rng(2024);
    LabeledDataset data;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i)
    {
        double const a = u(rng);
        int const y = u(rng) < oracle::sigmoid(3.0 * a - 1.5) ? 1 : 0;
        data.push_back({{a, 1.0 - a}, y});
    }
    double const reg = 1e-4;
    auto params = fit(data, FitConfig{reg});
    ASSERT_TRUE(params.informed());
    double const fitted = oracle::loss(params.weights, params.bias, data, reg);

    // Coarse grid, then three refinement rounds around the best point.
    double best = std::numeric_limits<double>::infinity();
    std::array<double, 3> centre{0.0, 0.0, 0.0};
    double span = 20.0;
    for (int round = 0; round < 4; ++round)
    {
        auto const c = centre;
        double const step = span / 40.0;
        for (int i = -40; i <= 40; ++i)
        {
            for (int j = -40; j <= 40; ++j)
            {
                for (int k = -40; k <= 40; ++k)
                {
                    std::vector<double> w{c[0] + i * step, c[1] + j * step};
                    double const b = c[2] + k * step;
                    double const l = oracle::loss(w, b, data, reg);
                    if (l < best)
                    {
                        best = l;
                        centre = {w[0], w[1], b};
                    }
                }
            }
        }
        span /= 8.0;
    }
    EXPECT_LE(fitted, best + 1e-9);
    EXPECT_NEAR(fitted, best, 1e-6);
    // Decision boundary in z_0: (w0 - w1) a + w1 + b = 0.
    double const boundary = -(params.weights[1] + params.bias) / (params.weights[0] - params.weights[1]);
    double const grid_boundary = -(centre[1] + centre[2]) / (centre[0] - centre[1]);
    EXPECT_NEAR(boundary, grid_boundary, 1e-2);
}

TEST(Fit, ReachesFirstOrderOptimality)
{
    Rng rng(4);
    auto data = random_dataset(5, 40, rng);
    FitReport report;
    FitConfig config;
    auto params = fit(data, config, nullptr, &report);
    auto g = loss_gradient(params, data, config.reg_strength);
    double norm = 0.0;
    for (double v : g)
    {
        norm += v * v;
    }
    EXPECT_LT(std::sqrt(norm), config.tolerance);
    EXPECT_LE(report.gradient_norm, config.tolerance);
}

TEST(Fit, AcceptedStepsNeverIncreaseLoss)
{
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial)
    {
        auto data = random_dataset(6, 30, rng);
        FitReport report;
        fit(data, FitConfig{0.01}, nullptr, &report);
        for (std::size_t i = 1; i < report.loss_trace.size(); ++i)
        {
            EXPECT_LE(report.loss_trace[i], report.loss_trace[i - 1]);
        }
    }
}

TEST(Fit, RefitIsDeterministicAndMatchesIndependentNewton)
{
    Rng rng(6);
    auto data = random_dataset(4, 25, rng);
    auto a = fit(data, FitConfig{});
    auto b = fit(data, FitConfig{});
    EXPECT_EQ(a, b);
    auto const ref = oracle::fit(data, 4, 1.0);
    for (std::size_t k = 0; k < 4; ++k)
    {
        EXPECT_NEAR(a.weights[k], ref.w[k], 1e-7);
    }
    EXPECT_NEAR(a.bias, ref.b, 1e-7);
}

TEST(Fit, WarmStartReachesTheSameOptimum)
{
    Rng rng(7);
    auto data = random_dataset(4, 25, rng);
    auto cold = fit(data, FitConfig{});
    data.push_back({random_simplex(4, rng), 1});
    auto warm = fit(data, FitConfig{}, &cold);
    auto fresh = fit(data, FitConfig{});
    for (std::size_t k = 0; k < 4; ++k)
    {
        EXPECT_NEAR(warm.weights[k], fresh.weights[k], 1e-8);
    }
    EXPECT_NEAR(warm.bias, fresh.bias, 1e-8);
}

TEST(Fit, FitWithExtraEqualsFitOnAugmentedCopy)
{
    Rng rng(8);
    auto data = random_dataset(3, 12, rng);
    auto const before = data;
    LabeledExample extra{random_simplex(3, rng), 0};
    auto a = fit_with_extra(data, extra, FitConfig{});
    EXPECT_EQ(data, before);
    auto augmented = data;
    augmented.push_back(extra);
    EXPECT_EQ(a, fit(augmented, FitConfig{}));
    // Empty base dataset plus one example is single-class.
    EXPECT_FALSE(fit_with_extra({}, extra, FitConfig{}).informed());
}

TEST(Fit, RejectsBadInput)
{
    EXPECT_THROW(fit({}, FitConfig{}), TrainingError);
    LabeledDataset nan_data{{{std::numeric_limits<double>::quiet_NaN(), 1.0}, 1}, {{0.5, 0.5}, 0}};
    EXPECT_THROW(fit(nan_data, FitConfig{}), DataError);
    LabeledDataset bad_label{{{0.5, 0.5}, 2}, {{0.5, 0.5}, 0}};
    EXPECT_THROW(fit(bad_label, FitConfig{}), DataError);
    LabeledDataset ragged{{{0.5, 0.5}, 1}, {{1.0}, 0}};
    EXPECT_THROW(fit(ragged, FitConfig{}), DataError);
    LabeledDataset ok{{{0.5, 0.5}, 1}, {{1.0, 0.0}, 0}};
    EXPECT_THROW(fit(ok, FitConfig{-1.0}), ParameterError);
}

TEST(Predict, ZeroLogitIsOneHalf)
{
    auto p = informed({0.0, 0.0, 0.0}, 0.0);
    EXPECT_EQ(predict(p, std::vector<double>{0.2, 0.3, 0.5}), 0.5);
    auto anti = informed({2.0, -2.0}, 0.0);
    EXPECT_EQ(predict(anti, std::vector<double>{0.5, 0.5}), 0.5);
}

TEST(Predict, IncreasesMonotonicallyWithBias)
{
    std::vector<double> z{0.3, 0.7};
    double prev = 0.0;
    for (double b = -20.0; b <= 20.0; b += 0.5)
    {
        double const q = predict(informed({1.0, -1.0}, b), z);
        EXPECT_GT(q, prev);
        EXPECT_GT(q, 0.0);
        EXPECT_LE(q, 1.0);
        prev = q;
    }
    EXPECT_NEAR(prev, 1.0, 1e-8);
}

TEST(Predict, DimensionMismatchIsRejected)
{
    EXPECT_THROW(predict(informed({1.0, 2.0}, 0.0), std::vector<double>{1.0}), ParameterError);
}

TEST(Entropy, KnownValues)
{
    EXPECT_NEAR(binary_entropy(0.5), std::numbers::ln2, 1e-15);
    EXPECT_NEAR(binary_entropy(0.9), -0.9 * std::log(0.9) - 0.1 * std::log(0.1), 1e-15);
    EXPECT_NEAR(binary_entropy(0.9), 0.3251, 1e-4);
    EXPECT_LT(binary_entropy(0.0), 1e-10);
    EXPECT_LT(binary_entropy(1.0), 1e-10);
    EXPECT_TRUE(std::isfinite(binary_entropy(0.0)));
    EXPECT_NEAR(entropy(uninformed_params(3), std::vector<double>{0.1, 0.2, 0.7}), std::numbers::ln2, 1e-15);
}

TEST(Entropy, StaysWithinBounds)
{
    Rng rng(9);
    std::normal_distribution<double> n(0.0, 10.0);
    for (int i = 0; i < 1000; ++i)
    {
        auto p = informed({n(rng), n(rng), n(rng)}, n(rng));
        double const h = entropy(p, random_simplex(3, rng));
        EXPECT_GE(h, 0.0);
        EXPECT_LE(h, std::numbers::ln2 + 1e-15);
    }
}

TEST(Gradient, MatchesCentralFiniteDifferences)
{
    Rng rng(10);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_int_distribution<int> dim(2, 16);
    std::uniform_int_distribution<int> count(1, 100);
    for (int instance = 0; instance < 100; ++instance)
    {
        int const d = dim(rng);
        auto data = random_dataset(d, count(rng), rng);
        std::vector<double> w(static_cast<std::size_t>(d));
        for (auto& v : w)
        {
            v = n(rng);
        }
        auto params = informed(w, n(rng));
        double const reg = std::abs(n(rng));
        auto g = loss_gradient(params, data, reg);
        ASSERT_EQ(g.size(), static_cast<std::size_t>(d) + 1);
        double const h = 1e-6;
        for (std::size_t k = 0; k <= static_cast<std::size_t>(d); ++k)
        {
            auto plus = w;
            auto minus = w;
            double bp = params.bias;
            double bm = params.bias;
            if (k < w.size())
            {
                plus[k] += h;
                minus[k] -= h;
            }
            else
            {
                bp += h;
                bm -= h;
            }
            double const fd = (oracle::loss(plus, bp, data, reg) - oracle::loss(minus, bm, data, reg)) / (2 * h);
            double const scale = std::max(std::abs(fd), 1e-3);
            EXPECT_LT(std::abs(g[k] - fd) / scale, 1e-5) << "instance " << instance << " component " << k;
        }
    }
}

TEST(Gradient, VanishesAtAPerfectlyFitPoint)
{
    // Without regularisation, a single example whose prediction equals its
    // label (to double precision) has zero gradient.
    LabeledDataset data{{{0.4, 0.6}, 1}};
    auto params = informed({0.0, 0.0}, 40.0);
    for (double v : loss_gradient(params, data, 0.0))
    {
        EXPECT_NEAR(v, 0.0, 1e-15);
    }
    // Balanced labels on one feature at q = 0.5 also cancel exactly.
    LabeledDataset balanced{{{0.4, 0.6}, 1}, {{0.4, 0.6}, 0}};
    for (double v : loss_gradient(informed({0.0, 0.0}, 0.0), balanced, 0.0))
    {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(Loss, RegularizedLossMatchesOracle)
{
    Rng rng(11);
    auto data = random_dataset(5, 17, rng);
    auto p = informed({0.5, -1.0, 2.0, 0.0, 0.3}, -0.2);
    EXPECT_NEAR(regularized_loss(p, data, 0.7), oracle::loss(p.weights, p.bias, data, 0.7), 1e-14);
}

TEST(MapCrossEntropy, UninformedIsLn2)
{
    Rng rng(12);
    auto field = generate_voronoi_topic_field({8, 8, 3, 4, 2.0}, rng);
    auto map = sample_interest_map(field, sample_interest_profile(3, rng), rng);
    EXPECT_NEAR(map_cross_entropy(uninformed_params(3), field, map), std::numbers::ln2, 1e-15);
}

TEST(MapCrossEntropy, NearPerfectParamsGiveNearZero)
{
    TopicField field(2, 1, 2, {1.0, 0.0, 0.0, 1.0});
    InterestMap map(2, 1, {1, 0});
    auto p = informed({30.0, -30.0}, 0.0);
    EXPECT_LT(map_cross_entropy(p, field, map), 1e-12);
}

TEST(MapCrossEntropy, MatchesDirectSummationOnFourByFour)
{
    Rng rng(13);
    auto field = generate_voronoi_topic_field({4, 4, 2, 3, 1.5}, rng);
    std::vector<std::uint8_t> labels{1, 0, 0, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 0, 1, 0};
    InterestMap map(4, 4, labels);
    auto p = informed({1.7, -0.4}, 0.1);
    double sum = 0.0;
    for (int i = 0; i < 16; ++i)
    {
        auto z = field.cell(static_cast<std::size_t>(i));
        double const q = oracle::clamp_q(oracle::sigmoid(1.7 * z[0] - 0.4 * z[1] + 0.1));
        sum += labels[static_cast<std::size_t>(i)] ? -std::log(q) : -std::log(1 - q);
    }
    EXPECT_NEAR(map_cross_entropy(p, field, map), sum / 16.0, 1e-14);
}

TEST(MapCrossEntropy, ConfidentMistakesAreClamped)
{
    TopicField field(1, 1, 2, {1.0, 0.0});
    InterestMap map(1, 1, {0});
    double const loss = map_cross_entropy(informed({1000.0, 0.0}, 0.0), field, map);
    EXPECT_NEAR(loss, -std::log(1.0 - (1.0 - 1e-12)), 1e-9);
}

TEST(MapCrossEntropy, DimensionMismatchIsRejected)
{
    TopicField field(2, 1, 2, {1.0, 0.0, 0.0, 1.0});
    InterestMap map(1, 1, {0});
    EXPECT_THROW(map_cross_entropy(uninformed_params(2), field, map), ParameterError);
}
