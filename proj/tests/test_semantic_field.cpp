#include "coexplore/semantic_field.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

using namespace coexplore;

namespace
{

void expect_simplex(TopicField const& field)
{
    for (std::size_t i = 0; i < field.cell_count(); ++i)
    {
        auto const z = field.cell(i);
        double sum = 0.0;
        for (double v : z)
        {
            ASSERT_GE(v, 0.0);
            sum += v;
        }
        ASSERT_NEAR(sum, 1.0, 1e-9) << "cell " << i;
    }
}

LabelRaster half_plane(int w, int h)
{
    LabelRaster r{w, h, {}};
    for (int y = 0; y < h; ++y)
    {
        for (int x = 0; x < w; ++x)
        {
            r.classes.push_back(x < w / 2 ? 1 : 2);
        }
    }
    return r;
}

std::filesystem::path temp_path(std::string const& name)
{
    return std::filesystem::temp_directory_path() / ("coexplore_test_" + name);
}

} // namespace

TEST(Voronoi, SingleCellTwoCoincidentSeedsIsUniform)
{
    std::vector<VoronoiSeed> seeds{{0.5, 0.5, 0}, {0.5, 0.5, 1}};
    for (double sigma : {0.01, 1.0, 100.0})
    {
        auto field = voronoi_field_from_seeds(1, 1, 2, seeds, sigma);
        EXPECT_DOUBLE_EQ(field.topic_at({0, 0})[0], 0.5);
        EXPECT_DOUBLE_EQ(field.topic_at({0, 0})[1], 0.5);
    }
}

TEST(Voronoi, SmallSigmaApproachesNearestSeedOneHot)
{
    std::vector<VoronoiSeed> seeds{{2.0, 2.0, 0}, {17.0, 3.0, 1}, {9.0, 15.0, 2}};
    auto field = voronoi_field_from_seeds(20, 20, 3, seeds, 1e-3);
    for (int y = 0; y < 20; ++y)
    {
        for (int x = 0; x < 20; ++x)
        {
            std::size_t nearest = 0;
            double best = 1e300;
            for (std::size_t s = 0; s < seeds.size(); ++s)
            {
                double d = std::hypot(x + 0.5 - seeds[s].x, y + 0.5 - seeds[s].y);
                if (d < best)
                {
                    best = d;
                    nearest = s;
                }
            }
            auto z = field.topic_at({x, y});
            // Skip points nearly equidistant from two seeds.
            bool ambiguous = false;
            for (std::size_t s = 0; s < seeds.size(); ++s)
            {
                double d = std::hypot(x + 0.5 - seeds[s].x, y + 0.5 - seeds[s].y);
                ambiguous |= s != nearest && d - best < 0.05;
            }
            if (!ambiguous)
            {
                EXPECT_NEAR(z[static_cast<std::size_t>(seeds[nearest].topic)], 1.0, 1e-9);
            }
        }
    }
}

TEST(Voronoi, MatchesDirectKernelEvaluation)
{
    std::vector<VoronoiSeed> seeds{{1.3, 4.1, 0}, {6.7, 2.2, 1}, {3.3, 7.9, 1}, {8.1, 8.4, 2}};
    double const sigma = 2.5;
    auto field = voronoi_field_from_seeds(10, 10, 3, seeds, sigma);
    for (int y = 0; y < 10; ++y)
    {
        for (int x = 0; x < 10; ++x)
        {
            std::vector<double> expected(3, 0.0);
            double total = 0.0;
            for (auto const& s : seeds)
            {
                double w = std::exp(-std::hypot(x + 0.5 - s.x, y + 0.5 - s.y) / sigma);
                expected[static_cast<std::size_t>(s.topic)] += w;
                total += w;
            }
            auto z = field.topic_at({x, y});
            for (std::size_t k = 0; k < 3; ++k)
            {
                EXPECT_NEAR(z[k], expected[k] / total, 1e-12);
            }
        }
    }
}

TEST(Voronoi, DefaultSizedFieldSatisfiesSimplexOnEveryCell)
{
    Rng rng(12345);
    auto field = generate_voronoi_topic_field(VoronoiParams{100, 100, 8, 40, 5.0}, rng);
    EXPECT_EQ(field.cell_count(), 10000u);
    EXPECT_EQ(field.topics(), 8);
    expect_simplex(field);
    // A tessellation, not a constant field: several dominant topics appear.
    std::vector<int> seen(8, 0);
    for (std::size_t i = 0; i < field.cell_count(); ++i)
    {
        seen[static_cast<std::size_t>(field.dominant_topic(field.location_of(i)))] = 1;
    }
    EXPECT_GE(std::accumulate(seen.begin(), seen.end(), 0), 3);
}

TEST(Voronoi, SameSeedSameField)
{
    Rng a(7);
    Rng b(7);
    VoronoiParams params{30, 20, 4, 10, 3.0};
    EXPECT_EQ(generate_voronoi_topic_field(params, a), generate_voronoi_topic_field(params, b));
}

TEST(Voronoi, RejectsInvalidParameters)
{
    Rng rng(1);
    EXPECT_THROW(generate_voronoi_topic_field({0, 10, 4, 10, 1.0}, rng), ParameterError);
    EXPECT_THROW(generate_voronoi_topic_field({10, 10, 1, 10, 1.0}, rng), ParameterError);
    EXPECT_THROW(generate_voronoi_topic_field({10, 10, 8, 7, 1.0}, rng), ParameterError);
    EXPECT_THROW(generate_voronoi_topic_field({10, 10, 4, 10, 0.0}, rng), ParameterError);
}

TEST(TopicField, ConstructorRejectsNonSimplexCells)
{
    EXPECT_THROW(TopicField(1, 1, 2, {0.6, 0.6}), ParameterError);
    EXPECT_THROW(TopicField(1, 1, 2, {-0.1, 1.1}), ParameterError);
    EXPECT_THROW(TopicField(2, 1, 2, {0.5, 0.5}), ParameterError);
    EXPECT_NO_THROW(TopicField(1, 1, 2, {0.25, 0.75}));
}

TEST(TopicField, TopicAtReturnsStoredVectorAndChecksBounds)
{
    TopicField field(2, 2, 2, {1.0, 0.0, 0.25, 0.75, 0.5, 0.5, 0.0, 1.0});
    EXPECT_EQ(field.topic_at({0, 0})[0], 1.0);
    EXPECT_EQ(field.topic_at({1, 0})[1], 0.75);
    EXPECT_EQ(field.topic_at({0, 1})[0], 0.5);
    EXPECT_THROW(field.topic_at({2, 0}), IndexError);
    EXPECT_THROW(field.topic_at({0, -1}), IndexError);
}

TEST(Ingestion, ConstantRegionBlursToItsOwnOneHot)
{
    // Class 1 fills the raster except a far corner patch of classes 2 and 3.
    LabelRaster r{12, 12, std::vector<int>(144, 1)};
    r.classes[143] = 2;
    r.classes[142] = 3;
    auto field = ingest_label_raster(r, 2);
    ASSERT_EQ(field.topics(), 3);
    for (int y = 0; y < 6; ++y)
    {
        for (int x = 0; x < 6; ++x)
        {
            auto z = field.topic_at({x, y});
            EXPECT_NEAR(z[0], 1.0, 1e-12);
        }
    }
}

TEST(Ingestion, RadiusZeroIsExactOneHot)
{
    auto field = ingest_label_raster(half_plane(10, 10), 0);
    for (int y = 0; y < 10; ++y)
    {
        for (int x = 0; x < 10; ++x)
        {
            auto z = field.topic_at({x, y});
            EXPECT_EQ(z[0], x < 5 ? 1.0 : 0.0);
            EXPECT_EQ(z[1], x < 5 ? 0.0 : 1.0);
        }
    }
}

TEST(Ingestion, BlurMatchesBruteForceConvolution)
{
    auto const raster = half_plane(10, 10);
    int const radius = 2;
    auto field = ingest_label_raster(raster, radius);
    double const s = radius / 2.0;
    for (int y = 0; y < 10; ++y)
    {
        for (int x = 0; x < 10; ++x)
        {
            double num = 0.0;
            double den = 0.0;
            for (int v = 0; v < 10; ++v)
            {
                for (int u = 0; u < 10; ++u)
                {
                    double const r2 = (u - x) * (u - x) + (v - y) * (v - y);
                    if (r2 > radius * radius)
                    {
                        continue;
                    }
                    double const w = std::exp(-r2 / (2 * s * s));
                    den += w;
                    num += w * (raster.classes[static_cast<std::size_t>(v * 10 + u)] == 1 ? 1.0 : 0.0);
                }
            }
            auto z = field.topic_at({x, y});
            EXPECT_NEAR(z[0], num / den, 1e-12);
            EXPECT_NEAR(z[0] + z[1], 1.0, 1e-12);
            if (x == 4 || x == 5)
            {
                EXPECT_GT(z[0], 0.0);
                EXPECT_LT(z[0], 1.0);
            }
        }
    }
}

TEST(Ingestion, RemapsSparseClassValues)
{
    LabelRaster r{3, 1, {40, 7, 40}};
    auto field = ingest_label_raster(r, 0);
    EXPECT_EQ(field.topics(), 2);
    EXPECT_EQ(field.topic_at({1, 0})[0], 1.0); // 7 -> topic 0
    EXPECT_EQ(field.topic_at({0, 0})[1], 1.0); // 40 -> topic 1
}

TEST(Ingestion, UnlabelledPixelsTakeNeighbourhoodMode)
{
    LabelRaster r{5, 1, {1, 1, -1, 1, 2}};
    auto field = ingest_label_raster(r, 0);
    EXPECT_EQ(field.topic_at({2, 0})[0], 1.0);
}

TEST(Ingestion, RejectsEmptyAndSingleClassRasters)
{
    EXPECT_THROW(ingest_label_raster(LabelRaster{}, 2), IngestionError);
    EXPECT_THROW(ingest_label_raster(LabelRaster{2, 2, {3, 3, 3, 3}}, 2), IngestionError);
    EXPECT_THROW(ingest_label_raster(LabelRaster{2, 2, {-1, -1, -1, -1}}, 2), IngestionError);
}

TEST(Ingestion, LoadsTextAndPgmRasters)
{
    auto const text = temp_path("raster.txt");
    std::ofstream(text) << "1 1 2\n1 2 2\n";
    auto r = load_label_raster(text);
    EXPECT_EQ(r.width, 3);
    EXPECT_EQ(r.height, 2);
    EXPECT_EQ(r.classes, (std::vector<int>{1, 1, 2, 1, 2, 2}));

    auto const pgm = temp_path("raster.pgm");
    std::ofstream(pgm) << "P2\n# comment\n2 2\n255\n0 10\n10 0\n";
    auto p = load_label_raster(pgm);
    EXPECT_EQ(p.classes, (std::vector<int>{0, 10, 10, 0}));

    std::ofstream(text) << "1 2\n1\n";
    EXPECT_THROW(load_label_raster(text), IngestionError);
    EXPECT_THROW(load_label_raster(temp_path("missing.txt")), IngestionError);
    std::filesystem::remove(text);
    std::filesystem::remove(pgm);
}

TEST(InterestProfile, ComponentsInUnitIntervalAndDeterministic)
{
    Rng a(3);
    Rng b(3);
    auto p = sample_interest_profile(2, a);
    ASSERT_EQ(p.p.size(), 2u);
    for (double v : p.p)
    {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(p, sample_interest_profile(2, b));
    Rng c(11);
    Rng d(11);
    EXPECT_EQ(sample_interest_profile(8, c), sample_interest_profile(8, d));
    EXPECT_THROW(sample_interest_profile(1, c), ParameterError);
}

TEST(InterestProfile, MonteCarloMeanIsOneHalf)
{
    Rng rng(99);
    std::vector<double> sum(8, 0.0);
    int const draws = 10000;
    for (int i = 0; i < draws; ++i)
    {
        auto p = sample_interest_profile(8, rng);
        for (std::size_t k = 0; k < 8; ++k)
        {
            sum[k] += p.p[k];
        }
    }
    for (double s : sum)
    {
        EXPECT_NEAR(s / draws, 0.5, 0.02);
    }
}

TEST(InterestMap, DegenerateProbabilitiesAreCertain)
{
    TopicField field(2, 1, 2, {1.0, 0.0, 0.0, 1.0});
    InterestProfile profile{{1.0, 0.0}};
    Rng rng(5);
    for (int i = 0; i < 100; ++i)
    {
        auto map = sample_interest_map(field, profile, rng);
        EXPECT_EQ(map.label_at({0, 0}), 1);
        EXPECT_EQ(map.label_at({1, 0}), 0);
    }
}

TEST(InterestMap, BernoulliMeanMatchesProbability)
{
    // p . z = 0.3 at the single cell
    TopicField field(1, 1, 2, {0.5, 0.5});
    InterestProfile profile{{0.6, 0.0}};
    Rng rng(17);
    int const n = 10000;
    int hits = 0;
    for (int i = 0; i < n; ++i)
    {
        hits += sample_interest_map(field, profile, rng).label_at({0, 0});
    }
    EXPECT_NEAR(static_cast<double>(hits) / n, 0.3, 0.014);
}

TEST(InterestMap, DimensionMismatchIsRejected)
{
    TopicField field(1, 1, 2, {0.5, 0.5});
    Rng rng(1);
    EXPECT_THROW(sample_interest_map(field, InterestProfile{{0.5, 0.5, 0.5}}, rng), ParameterError);
    EXPECT_THROW(sample_interest_map(field, InterestProfile{{1.5, 0.5}}, rng), ParameterError);
}

TEST(InterestMap, ProbabilitiesAreDotProducts)
{
    TopicField field(2, 1, 2, {0.25, 0.75, 1.0, 0.0});
    auto probs = interest_probabilities(field, InterestProfile{{0.4, 0.8}});
    EXPECT_NEAR(probs[0], 0.25 * 0.4 + 0.75 * 0.8, 1e-15);
    EXPECT_NEAR(probs[1], 0.4, 1e-15);
}

TEST(Serialization, FieldRoundTripIsBitExact)
{
    Rng rng(21);
    auto field = generate_voronoi_topic_field({17, 9, 5, 6, 2.3}, rng);
    auto copy = deserialize_field(serialize_field(field));
    EXPECT_EQ(copy, field);
    auto const path = temp_path("field.txt");
    save_field(field, path);
    EXPECT_EQ(load_field(path), field);
    std::filesystem::remove(path);
}

TEST(Serialization, InterestMapRoundTrip)
{
    Rng rng(8);
    auto field = generate_voronoi_topic_field({12, 7, 3, 4, 2.0}, rng);
    auto profile = sample_interest_profile(3, rng);
    auto map = sample_interest_map(field, profile, rng);
    auto const path = temp_path("interest.txt");
    save_interest_map(map, profile, path);
    InterestProfile loaded_profile;
    EXPECT_EQ(load_interest_map(path, &loaded_profile), map);
    EXPECT_EQ(loaded_profile, profile);
    std::filesystem::remove(path);
}

TEST(Serialization, MalformedFieldTextIsRejected)
{
    EXPECT_ANY_THROW(deserialize_field("not a field"));
    EXPECT_ANY_THROW(deserialize_field("coexplore-field 1\nwidth 2\n"));
}
