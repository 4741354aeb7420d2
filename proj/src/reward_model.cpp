#include "coexplore/reward_model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace coexplore
{

namespace
{

constexpr double kProbabilityClamp = 1e-12;

double softplus(double s)
{
    return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

double sigmoid(double s)
{
    if (s >= 0.0)
    {
        return 1.0 / (1.0 + std::exp(-s));
    }
    double const e = std::exp(s);
    return e / (1.0 + e);
}

double logit(std::span<double const> weights, double bias, std::span<double const> z)
{
    double s = bias;
    for (std::size_t k = 0; k < weights.size(); ++k)
    {
        s += weights[k] * z[k];
    }
    return s;
}

void check_dimension(RewardModelParams const& params, std::span<double const> z)
{
    if (z.size() != params.weights.size())
    {
        throw ParameterError("feature dimension " + std::to_string(z.size()) + " does not match model dimension " +
                             std::to_string(params.weights.size()));
    }
}

std::size_t validate_dataset(LabeledDataset const& dataset)
{
    if (dataset.empty())
    {
        throw TrainingError("cannot fit a reward model to an empty dataset");
    }
    auto const d = dataset.front().feature.size();
    if (d == 0)
    {
        throw DataError("dataset features are empty");
    }
    for (auto const& example : dataset)
    {
        if (example.feature.size() != d)
        {
            throw DataError("dataset features have inconsistent dimensions");
        }
        if (example.label != 0 && example.label != 1)
        {
            throw DataError("dataset labels must be 0 or 1");
        }
        for (double v : example.feature)
        {
            if (!std::isfinite(v))
            {
                throw DataError("dataset contains a non-finite feature");
            }
        }
    }
    return d;
}

// Objective over theta = (w, b) packed as a d+1 vector.
struct Objective
{
    LabeledDataset const& data;
    double reg;
    std::size_t d;
    LabeledExample const* extra = nullptr;

    template <class F>
    void for_each(F&& f) const
    {
        for (auto const& ex : data)
        {
            f(ex);
        }
        if (extra != nullptr)
        {
            f(*extra);
        }
    }

    double count() const { return static_cast<double>(data.size() + (extra != nullptr ? 1 : 0)); }
    // Penalty scaled by 1/n: the minimiser equals that of sum CE + reg |w|^2 / 2.
    double penalty_scale() const { return count(); }

    double value(Eigen::VectorXd const& theta) const
    {
        std::span<double const> w(theta.data(), d);
        double total = 0.0;
        for_each([&](LabeledExample const& ex) {
            double const s = logit(w, theta[static_cast<Eigen::Index>(d)], ex.feature);
            total += softplus(s) - ex.label * s;
        });
        double const n = count();
        return total / n + reg * theta.head(static_cast<Eigen::Index>(d)).squaredNorm() / (2.0 * penalty_scale());
    }

    void gradient_hessian(Eigen::VectorXd const& theta, Eigen::VectorXd& grad, Eigen::MatrixXd* hess) const
    {
        auto const dim = static_cast<Eigen::Index>(d + 1);
        std::span<double const> w(theta.data(), d);
        grad.setZero(dim);
        if (hess != nullptr)
        {
            hess->setZero(dim, dim);
        }
        Eigen::VectorXd x(dim);
        for_each([&](LabeledExample const& ex) {
            for (std::size_t k = 0; k < d; ++k)
            {
                x[static_cast<Eigen::Index>(k)] = ex.feature[k];
            }
            x[dim - 1] = 1.0;
            double const q = sigmoid(logit(w, theta[dim - 1], ex.feature));
            grad.noalias() += (q - ex.label) * x;
            if (hess != nullptr)
            {
                hess->selfadjointView<Eigen::Lower>().rankUpdate(x, q * (1.0 - q));
            }
        });
        double const n = count();
        grad /= n;
        grad.head(dim - 1) += (reg / penalty_scale()) * theta.head(dim - 1);
        if (hess != nullptr)
        {
            *hess = hess->selfadjointView<Eigen::Lower>();
            *hess /= n;
            hess->diagonal().head(dim - 1).array() += reg / penalty_scale();
        }
    }
};

Eigen::VectorXd pack(RewardModelParams const& params)
{
    Eigen::VectorXd theta(static_cast<Eigen::Index>(params.weights.size() + 1));
    for (std::size_t k = 0; k < params.weights.size(); ++k)
    {
        theta[static_cast<Eigen::Index>(k)] = params.weights[k];
    }
    theta[static_cast<Eigen::Index>(params.weights.size())] = params.bias;
    return theta;
}

} // namespace

RewardModelParams uninformed_params(int topics)
{
    RewardModelParams params;
    params.weights.assign(static_cast<std::size_t>(topics), 0.0);
    return params;
}

namespace
{

RewardModelParams fit_impl(LabeledDataset const& dataset, LabeledExample const* extra, FitConfig const& config,
                           RewardModelParams const* start, FitReport* report)
{
    auto const d = validate_dataset(dataset);
    if (extra != nullptr)
    {
        validate_dataset(LabeledDataset{*extra});
        if (extra->feature.size() != d)
        {
            throw DataError("extra example dimension does not match the dataset");
        }
    }
    if (!(config.reg_strength >= 0.0))
    {
        throw ParameterError("regularisation strength must be nonnegative");
    }

    RewardModelParams params = uninformed_params(static_cast<int>(d));
    for (auto const& ex : dataset)
    {
        (ex.label == 1 ? params.seen_positive : params.seen_negative) = true;
    }
    if (extra != nullptr)
    {
        (extra->label == 1 ? params.seen_positive : params.seen_negative) = true;
    }
    if (!params.informed())
    {
        if (report != nullptr)
        {
            *report = FitReport{};
        }
        return params;
    }

    Objective objective{dataset, config.reg_strength, d, extra};
    auto const dim = static_cast<Eigen::Index>(d + 1);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
    if (start != nullptr && start->informed() && start->weights.size() == d)
    {
        theta = pack(*start);
    }

    Eigen::VectorXd grad(dim);
    Eigen::MatrixXd hess(dim, dim);
    double loss = objective.value(theta);
    FitReport local;
    local.loss_trace.push_back(loss);

    for (int iter = 0; iter < config.max_iters; ++iter)
    {
        objective.gradient_hessian(theta, grad, &hess);
        local.gradient_norm = grad.norm();
        if (local.gradient_norm <= config.tolerance)
        {
            break;
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        Eigen::VectorXd direction = ldlt.solve(grad);
        if (ldlt.info() != Eigen::Success || !direction.allFinite() || direction.dot(grad) <= 0.0)
        {
            // Singular Hessian (reg_strength = 0 on separable data).
            hess.diagonal().array() += 1e-8;
            direction = hess.ldlt().solve(grad);
            if (!direction.allFinite() || direction.dot(grad) <= 0.0)
            {
                direction = grad;
            }
        }

        double step = 1.0;
        double const slope = grad.dot(direction);
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving)
        {
            Eigen::VectorXd candidate = theta - step * direction;
            double const candidate_loss = objective.value(candidate);
            if (candidate_loss <= loss - 1e-4 * step * slope || (candidate_loss <= loss && halving > 40))
            {
                theta = std::move(candidate);
                loss = candidate_loss;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        ++local.iterations;
        if (!accepted)
        {
            break;
        }
        local.loss_trace.push_back(loss);
    }
    objective.gradient_hessian(theta, grad, nullptr);
    local.gradient_norm = grad.norm();

    for (std::size_t k = 0; k < d; ++k)
    {
        params.weights[k] = theta[static_cast<Eigen::Index>(k)];
    }
    params.bias = theta[dim - 1];
    if (report != nullptr)
    {
        *report = std::move(local);
    }
    return params;
}

} // namespace

RewardModelParams fit(LabeledDataset const& dataset, FitConfig const& config, RewardModelParams const* start,
                      FitReport* report)
{
    return fit_impl(dataset, nullptr, config, start, report);
}

RewardModelParams fit_with_extra(LabeledDataset const& dataset, LabeledExample const& extra, FitConfig const& config,
                                 RewardModelParams const* start)
{
    if (dataset.empty())
    {
        return fit_impl(LabeledDataset{extra}, nullptr, config, start, nullptr);
    }
    return fit_impl(dataset, &extra, config, start, nullptr);
}

double predict(RewardModelParams const& params, std::span<double const> z)
{
    check_dimension(params, z);
    if (!params.informed())
    {
        return 0.5;
    }
    return sigmoid(logit(params.weights, params.bias, z));
}

double binary_entropy(double q)
{
    q = std::clamp(q, kProbabilityClamp, 1.0 - kProbabilityClamp);
    return -q * std::log(q) - (1.0 - q) * std::log(1.0 - q);
}

double entropy(RewardModelParams const& params, std::span<double const> z)
{
    return binary_entropy(predict(params, z));
}

double regularized_loss(RewardModelParams const& params, LabeledDataset const& dataset, double reg_strength)
{
    auto const d = validate_dataset(dataset);
    if (d != params.weights.size())
    {
        throw ParameterError("dataset dimension does not match model dimension");
    }
    return Objective{dataset, reg_strength, d}.value(pack(params));
}

std::vector<double> loss_gradient(RewardModelParams const& params, LabeledDataset const& dataset, double reg_strength)
{
    auto const d = validate_dataset(dataset);
    if (d != params.weights.size())
    {
        throw ParameterError("dataset dimension does not match model dimension");
    }
    Eigen::VectorXd grad;
    Objective{dataset, reg_strength, d}.gradient_hessian(pack(params), grad, nullptr);
    return {grad.data(), grad.data() + grad.size()};
}

std::vector<double> predict_field(RewardModelParams const& params, TopicField const& field)
{
    if (params.weights.size() != static_cast<std::size_t>(field.topics()))
    {
        throw ParameterError("model dimension does not match field topic count");
    }
    std::vector<double> out(field.cell_count());
    for (std::size_t i = 0; i < out.size(); ++i)
    {
        out[i] = predict(params, field.cell(i));
    }
    return out;
}

double map_cross_entropy(RewardModelParams const& params, TopicField const& field, InterestMap const& interest_map)
{
    if (field.width() != interest_map.width() || field.height() != interest_map.height())
    {
        throw ParameterError("interest map dimensions do not match the topic field");
    }
    auto const q = predict_field(params, field);
    auto const& labels = interest_map.labels();
    double total = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i)
    {
        double const p = std::clamp(q[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
        total += labels[i] ? -std::log(p) : -std::log(1.0 - p);
    }
    return total / static_cast<double>(q.size());
}

} // namespace coexplore
