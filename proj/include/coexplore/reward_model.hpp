#pragma once

#include "coexplore/semantic_field.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace coexplore
{

struct TrainingError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/**
 * Logistic interest model g(z) = sigmoid(w . z + b).
 *
 * Until both label classes have been seen the model is uninformed and
 * predicts exactly 0.5 everywhere, whatever the stored weights.
 */
struct RewardModelParams
{
    std::vector<double> weights;
    double bias = 0.0;
    bool seen_negative = false;
    bool seen_positive = false;

    bool informed() const { return seen_negative && seen_positive; }
    int topics() const { return static_cast<int>(weights.size()); }

    friend bool operator==(RewardModelParams const&, RewardModelParams const&) = default;
};

RewardModelParams uninformed_params(int topics);

struct LabeledExample
{
    std::vector<double> feature;
    int label = 0;

    friend bool operator==(LabeledExample const&, LabeledExample const&) = default;
};

using LabeledDataset = std::vector<LabeledExample>;

struct FitConfig
{
    /// L2 strength on the weights (bias unpenalised), scaled like an
    /// inverse-C: objective = mean CE + reg_strength * |w|^2 / (2 n).
    double reg_strength = 1.0;
    int max_iters = 100;
    /// Stop once the gradient norm falls to this value.
    double tolerance = 1e-8;
};

struct FitReport
{
    int iterations = 0;
    double gradient_norm = 0.0;
    /// Regularised loss after each accepted step, starting with the initial point.
    std::vector<double> loss_trace;
};

/**
 * Damped Newton minimisation of the regularised cross-entropy. Starts at zero
 * unless `start` is given (and informed, with matching dimension). Returns the
 * uninformed state when the dataset holds a single class.
 */
RewardModelParams fit(LabeledDataset const& dataset, FitConfig const& config, RewardModelParams const* start = nullptr,
                      FitReport* report = nullptr);

/// fit() on dataset + {extra} without copying or touching `dataset`.
RewardModelParams fit_with_extra(LabeledDataset const& dataset, LabeledExample const& extra, FitConfig const& config,
                                 RewardModelParams const* start = nullptr);

double predict(RewardModelParams const& params, std::span<double const> z);

/// Binary entropy in nats of a Bernoulli(q), q clamped to [1e-12, 1 - 1e-12].
double binary_entropy(double q);

double entropy(RewardModelParams const& params, std::span<double const> z);

/// Regularised mean cross-entropy of the stored (weights, bias), informed or not.
double regularized_loss(RewardModelParams const& params, LabeledDataset const& dataset, double reg_strength);

/// Gradient of regularized_loss with respect to (weights..., bias); length d + 1.
std::vector<double> loss_gradient(RewardModelParams const& params, LabeledDataset const& dataset, double reg_strength);

/// Mean per-cell log loss of the model against a binary interest map.
double map_cross_entropy(RewardModelParams const& params, TopicField const& field, InterestMap const& interest_map);

/// Predicted interest at every cell, row-major.
std::vector<double> predict_field(RewardModelParams const& params, TopicField const& field);

} // namespace coexplore
