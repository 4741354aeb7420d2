#include "coexplore/query_selection.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace coexplore
{

namespace
{

constexpr std::array<std::pair<SelectorKind, std::string_view>, 5> kNames{{
    {SelectorKind::Random, "Random"},
    {SelectorKind::Uniform, "Uniform"},
    {SelectorKind::Entropy, "Entropy"},
    {SelectorKind::InfoGain, "InfoGain"},
    {SelectorKind::Regret, "Regret"},
}};

std::size_t first_evaluated(QueryPool const& pool, std::size_t pool_cap)
{
    return pool.size() > pool_cap ? pool.size() - pool_cap : 0;
}

void finish(Selection& selection, QueryPool const& pool)
{
    if (!selection.objective.empty())
    {
        selection.id = pool[selection.first_evaluated + argmax_first(selection.objective)].id;
    }
}

} // namespace

std::string_view selector_name(SelectorKind kind)
{
    for (auto const& [k, name] : kNames)
    {
        if (k == kind)
        {
            return name;
        }
    }
    return "Unknown";
}

SelectorKind parse_selector(std::string_view name)
{
    auto lower = [](std::string_view s) {
        std::string out(s);
        std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
        return out;
    };
    for (auto const& [k, candidate] : kNames)
    {
        if (lower(candidate) == lower(name))
        {
            return k;
        }
    }
    throw ParameterError("unknown selector '" + std::string(name) + "'");
}

std::optional<std::size_t> select_random(QueryPool const& pool, Rng& rng)
{
    if (pool.empty())
    {
        return std::nullopt;
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    return pool[pick(rng)].id;
}

std::optional<std::size_t> select_uniform(long t, long period, std::optional<std::size_t> latest_id)
{
    if (period < 1)
    {
        throw ParameterError("uniform selector period must be at least 1");
    }
    if (t % period != 0)
    {
        return std::nullopt;
    }
    return latest_id;
}

Selection select_entropy(QueryPool const& pool, RewardModelParams const& params)
{
    Selection selection;
    selection.objective.reserve(pool.size());
    for (auto const& entry : pool)
    {
        selection.objective.push_back(entropy(params, entry.feature));
    }
    finish(selection, pool);
    return selection;
}

Selection select_info_gain(QueryPool const& pool, RewardModelParams const& params, LabeledDataset const& dataset,
                           FitConfig const& fit_config, std::size_t pool_cap)
{
    Selection selection;
    selection.first_evaluated = first_evaluated(pool, pool_cap);
    for (std::size_t i = selection.first_evaluated; i < pool.size(); ++i)
    {
        auto const& z = pool[i].feature;
        double const q = predict(params, z);
        std::array<double, 2> after{};
        for (int y = 0; y < 2; ++y)
        {
            auto const refit = fit_with_extra(dataset, LabeledExample{z, y}, fit_config, &params);
            ++selection.refits;
            after[static_cast<std::size_t>(y)] = entropy(refit, z);
        }
        selection.objective.push_back(binary_entropy(q) - (q * after[1] + (1.0 - q) * after[0]));
    }
    finish(selection, pool);
    return selection;
}

double compute_regret(std::size_t reference, CandidateScorer const& scorer, std::span<double const> z, int y,
                      LabeledDataset const& dataset, RewardModelParams const& params, FitConfig const& fit_config)
{
    if (reference >= scorer.candidate_count())
    {
        throw ParameterError("reference trajectory is not part of the candidate set");
    }
    auto const refit =
        fit_with_extra(dataset, LabeledExample{std::vector<double>(z.begin(), z.end()), y}, fit_config, &params);
    auto const scores = scorer.scores(refit);
    double const best = *std::max_element(scores.begin(), scores.end());
    return best - scores[reference];
}

Selection select_regret(QueryPool const& pool, RewardModelParams const& params, LabeledDataset const& dataset,
                        RegretContext const& context, FitConfig const& fit_config, std::size_t pool_cap,
                        RegretRegeneration const* regenerate)
{
    Selection selection;
    if (pool.empty())
    {
        return selection;
    }
    if (context.plan.candidates.empty() || context.plan.best >= context.plan.candidates.size())
    {
        throw ParameterError("regret selection needs a candidate set containing the reference trajectory");
    }
    CandidateScorer const scorer(context.plan.candidates, context.field, context.visited, context.gamma);
    selection.first_evaluated = first_evaluated(pool, pool_cap);
    for (std::size_t i = selection.first_evaluated; i < pool.size(); ++i)
    {
        auto const& z = pool[i].feature;
        double const y_pred = predict(params, z);
        double r1 = 0.0;
        double r0 = 0.0;
        if (regenerate == nullptr)
        {
            r1 = compute_regret(context.plan.best, scorer, z, 1, dataset, params, fit_config);
            r0 = compute_regret(context.plan.best, scorer, z, 0, dataset, params, fit_config);
        }
        else
        {
            for (int y : {1, 0})
            {
                auto const refit = fit_with_extra(dataset, LabeledExample{z, y}, fit_config, &params);
                auto const fresh = generate_trajectories(regenerate->state, context.field.width(),
                                                         context.field.height(), regenerate->trajectories,
                                                         regenerate->rng);
                auto const fresh_scores = CandidateScorer(fresh, context.field, context.visited, context.gamma)
                                              .scores(refit);
                double const reference = scorer.scores(refit)[context.plan.best];
                (y == 1 ? r1 : r0) = *std::max_element(fresh_scores.begin(), fresh_scores.end()) - reference;
            }
        }
        selection.refits += 2;
        selection.rescoring_passes += 2;
        selection.objective.push_back(y_pred * r1 + (1.0 - y_pred) * r0);
    }
    finish(selection, pool);
    return selection;
}

} // namespace coexplore
