#include "coexplore/trajectory_planner.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

using namespace coexplore;

namespace
{

TopicField small_field(int w, int h, int d, std::uint64_t seed)
{
    VoronoiParams p;
    p.width = w;
    p.height = h;
    p.topics = d;
    p.n_cells = 8;
    p.sigma = 2.0;
    Rng rng(seed);
    return generate_voronoi_topic_field(p, rng);
}

RewardModelParams random_params(int d, Rng& rng)
{
    std::normal_distribution<double> n(0.0, 2.0);
    RewardModelParams p = uninformed_params(d);
    for (auto& w : p.weights)
    {
        w = n(rng);
    }
    p.bias = n(rng);
    p.seen_negative = p.seen_positive = true;
    return p;
}

std::set<std::pair<int, int>> as_set(VisitedSet const& v)
{
    std::set<std::pair<int, int>> out;
    for (int y = 0; y < v.height(); ++y)
    {
        for (int x = 0; x < v.width(); ++x)
        {
            if (v.contains({x, y}))
            {
                out.insert({x, y});
            }
        }
    }
    return out;
}

} // namespace

TEST(MotionPrimitives, ThirteenEvenlySpacedHeadings)
{
    auto const set = motion_primitive_set();
    ASSERT_EQ(set.size(), 13u);
    EXPECT_DOUBLE_EQ(set[0].relative_heading, -135.0);
    EXPECT_DOUBLE_EQ(set[6].relative_heading, 0.0);
    EXPECT_DOUBLE_EQ(set[12].relative_heading, 135.0);
    for (std::size_t k = 0; k < set.size(); ++k)
    {
        EXPECT_DOUBLE_EQ(set[k].relative_heading, -135.0 + 22.5 * static_cast<double>(k));
        EXPECT_EQ(set[k].length, 5);
    }
}

TEST(Rasterize, AxisAndDiagonal)
{
    auto const east = rasterize_primitive({10, 10}, 0.0, 5);
    std::vector<GridLocation> expected{{11, 10}, {12, 10}, {13, 10}, {14, 10}, {15, 10}};
    EXPECT_EQ(east, expected);

    auto const diag = rasterize_primitive({0, 0}, 45.0, 3);
    expected = {{1, 1}, {2, 2}, {3, 3}};
    EXPECT_EQ(diag, expected);

    auto const west = rasterize_primitive({5, 5}, 180.0, 2);
    expected = {{4, 5}, {3, 5}};
    EXPECT_EQ(west, expected);
}

TEST(Rasterize, ShallowAngleStaysEightConnected)
{
    auto const cells = rasterize_primitive({0, 0}, 22.5, 5);
    std::vector<GridLocation> expected{{1, 0}, {2, 1}, {3, 1}, {4, 2}, {5, 2}};
    EXPECT_EQ(cells, expected);
}

TEST(Trajectories, CountLengthBoundsAndAdjacency)
{
    TrajectoryConfig config;
    Rng rng(11);
    for (auto start : {GridLocation{0, 0}, GridLocation{50, 50}, GridLocation{99, 3}})
    {
        PlannerState state{start, 90.0, VisitedSet(100, 100)};
        auto const trajs = generate_trajectories(state, 100, 100, config, rng);
        ASSERT_EQ(trajs.size(), 50u);
        for (auto const& t : trajs)
        {
            ASSERT_EQ(t.cells.size(), 25u);
            EXPECT_EQ(t.headings.size(), 5u);
            GridLocation prev = start;
            for (auto const& c : t.cells)
            {
                EXPECT_TRUE(c.x >= 0 && c.x < 100 && c.y >= 0 && c.y < 100);
                EXPECT_LE(std::abs(c.x - prev.x), 1);
                EXPECT_LE(std::abs(c.y - prev.y), 1);
                prev = c;
            }
        }
    }
}

TEST(Trajectories, RelativeHeadingsComeFromThePrimitiveSet)
{
    TrajectoryConfig config;
    Rng rng(3);
    PlannerState state{{50, 50}, 30.0, VisitedSet(100, 100)};
    for (auto const& t : generate_trajectories(state, 100, 100, config, rng))
    {
        double heading = 30.0;
        for (double h : t.headings)
        {
            double rel = std::fmod(h - heading + 540.0, 360.0) - 180.0;
            double const k = (rel + 135.0) / 22.5;
            EXPECT_NEAR(k, std::round(k), 1e-9);
            EXPECT_GE(std::round(k), 0.0);
            EXPECT_LE(std::round(k), 12.0);
            heading = h;
        }
    }
}

TEST(Trajectories, SingleCellMapClampsEverything)
{
    TrajectoryConfig config;
    config.count = 4;
    Rng rng(1);
    PlannerState state{{0, 0}, 0.0, VisitedSet(1, 1)};
    auto const trajs = generate_trajectories(state, 1, 1, config, rng);
    ASSERT_EQ(trajs.size(), 4u);
    for (auto const& t : trajs)
    {
        for (auto const& c : t.cells)
        {
            EXPECT_EQ(c, (GridLocation{0, 0}));
        }
    }
}

TEST(Trajectories, DeterministicForASeed)
{
    TrajectoryConfig config;
    PlannerState state{{20, 20}, 0.0, VisitedSet(40, 40)};
    Rng a(99);
    Rng b(99);
    EXPECT_EQ(generate_trajectories(state, 40, 40, config, a), generate_trajectories(state, 40, 40, config, b));
}

TEST(Trajectories, RejectsBadInput)
{
    Rng rng(1);
    PlannerState state{{0, 0}, 0.0, VisitedSet(10, 10)};
    TrajectoryConfig bad;
    bad.count = 0;
    EXPECT_THROW(generate_trajectories(state, 10, 10, bad, rng), ParameterError);
    PlannerState outside{{10, 0}, 0.0, VisitedSet(10, 10)};
    EXPECT_THROW(generate_trajectories(outside, 10, 10, TrajectoryConfig{}, rng), ParameterError);
}

TEST(Score, VisitedCellsScoreZero)
{
    auto const field = small_field(10, 10, 3, 1);
    Rng rng(2);
    auto const params = random_params(3, rng);
    Trajectory t{rasterize_primitive({0, 0}, 0.0, 5), {0.0}};
    VisitedSet visited(10, 10);
    for (auto const& c : t.cells)
    {
        visited.insert(c);
    }
    EXPECT_EQ(score_trajectory(t, field, params, visited, 1.0), 0.0);
}

TEST(Score, UninformedFreshPathIsHalfPerCell)
{
    auto const field = small_field(40, 40, 4, 2);
    Trajectory t;
    GridLocation at{5, 5};
    for (int p = 0; p < 5; ++p)
    {
        auto seg = rasterize_primitive(at, p % 2 == 0 ? 0.0 : 90.0, 5);
        t.cells.insert(t.cells.end(), seg.begin(), seg.end());
        at = seg.back();
    }
    EXPECT_DOUBLE_EQ(score_trajectory(t, field, uninformed_params(4), VisitedSet(40, 40), 1.0), 12.5);
}

TEST(Score, HandComputedThreeCellSum)
{
    // Two one-hot topics; cell (1,0) is topic 1, the rest topic 0.
    std::vector<double> values;
    for (int i = 0; i < 4; ++i)
    {
        values.push_back(i == 1 ? 0.0 : 1.0);
        values.push_back(i == 1 ? 1.0 : 0.0);
    }
    TopicField field(2, 2, 2, values);
    RewardModelParams params{{2.0, -1.0}, 0.5, true, true};
    Trajectory t{{{1, 0}, {1, 1}, {0, 1}}, {}};
    double const g0 = 1.0 / (1.0 + std::exp(-2.5));
    double const g1 = 1.0 / (1.0 + std::exp(0.5));
    double const gamma = 0.9;
    EXPECT_NEAR(score_trajectory(t, field, params, VisitedSet(2, 2), gamma), g1 + gamma * g0 + gamma * gamma * g0,
                1e-15);

    VisitedSet visited(2, 2);
    visited.insert({1, 1});
    EXPECT_NEAR(score_trajectory(t, field, params, visited, gamma), g1 + gamma * gamma * g0, 1e-15);

    Trajectory repeat{{{1, 0}, {1, 0}, {0, 1}}, {}};
    EXPECT_NEAR(score_trajectory(repeat, field, params, VisitedSet(2, 2), gamma), g1 + gamma * gamma * g0, 1e-15);
}

TEST(Score, BoundedByPathLength)
{
    auto const field = small_field(30, 30, 5, 3);
    Rng rng(4);
    TrajectoryConfig config;
    PlannerState state{{15, 15}, 0.0, VisitedSet(30, 30)};
    for (int trial = 0; trial < 10; ++trial)
    {
        auto const params = random_params(5, rng);
        for (auto const& t : generate_trajectories(state, 30, 30, config, rng))
        {
            double const s = score_trajectory(t, field, params, state.visited, 1.0);
            EXPECT_GE(s, 0.0);
            EXPECT_LE(s, 25.0);
        }
    }
}

TEST(Score, FullyDiscountedCountsOnlyTheFirstStep)
{
    auto const field = small_field(20, 20, 3, 5);
    Rng rng(5);
    auto const params = random_params(3, rng);
    Trajectory t{rasterize_primitive({2, 2}, 0.0, 5), {0.0}};
    EXPECT_DOUBLE_EQ(score_trajectory(t, field, params, VisitedSet(20, 20), 0.0),
                     predict(params, field.topic_at(t.cells[0])));
}

TEST(Plan, SingleCandidateIsChosen)
{
    auto const field = small_field(20, 20, 3, 6);
    TrajectoryConfig config;
    config.count = 1;
    Rng rng(6);
    PlannerState state{{10, 10}, 0.0, VisitedSet(20, 20)};
    auto const plan = plan_trajectory(state, field, uninformed_params(3), config, 1.0, rng);
    EXPECT_EQ(plan.candidates.size(), 1u);
    EXPECT_EQ(plan.best, 0u);
}

TEST(Plan, ArgmaxMatchesOracleRescoring)
{
    auto const field = small_field(40, 40, 4, 7);
    Rng rng(7);
    TrajectoryConfig config;
    for (int trial = 0; trial < 20; ++trial)
    {
        auto const params = random_params(4, rng);
        PlannerState state{{20, 20}, 45.0, VisitedSet(40, 40)};
        for (int i = 0; i < 60; ++i)
        {
            state.visited.insert({static_cast<int>(rng() % 40), static_cast<int>(rng() % 40)});
        }
        double const gamma = trial % 2 == 0 ? 1.0 : 0.95;
        auto const plan = plan_trajectory(state, field, params, config, gamma, rng);
        std::vector<double> expected;
        for (auto const& t : plan.candidates)
        {
            expected.push_back(oracle::score(t, field, oracle::from_params(params), as_set(state.visited), gamma));
        }
        ASSERT_EQ(plan.scores.size(), expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i)
        {
            EXPECT_NEAR(plan.scores[i], expected[i], 1e-12);
        }
        EXPECT_EQ(plan.best, oracle::argmax(expected));
    }
}

TEST(Plan, DominatingCandidateWins)
{
    // Left half is topic 0 (rewarding), right half topic 1.
    int const w = 30;
    std::vector<double> values;
    for (int y = 0; y < w; ++y)
    {
        for (int x = 0; x < w; ++x)
        {
            values.push_back(x < w / 2 ? 1.0 : 0.0);
            values.push_back(x < w / 2 ? 0.0 : 1.0);
        }
    }
    TopicField field(w, w, 2, values);
    RewardModelParams params{{6.0, -6.0}, 0.0, true, true};
    std::vector<Trajectory> candidates{{rasterize_primitive({15, 15}, 0.0, 10), {}},
                                       {rasterize_primitive({15, 15}, 180.0, 10), {}}};
    CandidateScorer scorer(candidates, field, VisitedSet(w, w), 1.0);
    auto const s = scorer.scores(params);
    EXPECT_EQ(argmax_first(s), 1u);
}

TEST(Plan, TiesGoToTheFirstIndex)
{
    EXPECT_EQ(argmax_first({1.0, 3.0, 3.0, 2.0}), 1u);
    EXPECT_EQ(argmax_first({0.0, 0.0}), 0u);
}

TEST(CandidateScorer, MatchesDirectScoring)
{
    auto const field = small_field(25, 25, 6, 8);
    Rng rng(8);
    TrajectoryConfig config;
    PlannerState state{{3, 20}, -90.0, VisitedSet(25, 25)};
    for (int i = 0; i < 40; ++i)
    {
        state.visited.insert({static_cast<int>(rng() % 25), static_cast<int>(rng() % 25)});
    }
    auto const candidates = generate_trajectories(state, 25, 25, config, rng);
    for (double gamma : {1.0, 0.8})
    {
        CandidateScorer scorer(candidates, field, state.visited, gamma);
        EXPECT_EQ(scorer.candidate_count(), candidates.size());
        for (int trial = 0; trial < 5; ++trial)
        {
            auto const params = random_params(6, rng);
            auto const s = scorer.scores(params);
            for (std::size_t i = 0; i < candidates.size(); ++i)
            {
                EXPECT_NEAR(s[i], score_trajectory(candidates[i], field, params, state.visited, gamma), 1e-12);
            }
        }
    }
}

TEST(VisitedSet, InsertReportsNovelty)
{
    VisitedSet v(3, 3);
    EXPECT_TRUE(v.insert({1, 2}));
    EXPECT_FALSE(v.insert({1, 2}));
    EXPECT_TRUE(v.contains({1, 2}));
    EXPECT_FALSE(v.contains({2, 1}));
    EXPECT_EQ(v.size(), 1u);
}
