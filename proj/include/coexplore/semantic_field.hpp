#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace coexplore
{

using Rng = std::mt19937_64;

/// Thrown when a caller passes dimensions or settings that cannot describe a valid object.
struct ParameterError : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

struct IndexError : std::out_of_range
{
    using std::out_of_range::out_of_range;
};

/// Raster or field input that cannot be turned into a topic field.
struct IngestionError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct GridLocation
{
    int x = 0;
    int y = 0;

    friend bool operator==(GridLocation const&, GridLocation const&) = default;
    friend auto operator<=>(GridLocation const&, GridLocation const&) = default;
};

/// Chebyshev (8-neighbour) distance between two cells.
int chebyshev(GridLocation a, GridLocation b);

/// Parameters recorded alongside a field so a file describes its own origin.
struct FieldProvenance
{
    std::string generator;  // "voronoi", "raster" or "manual"
    std::string parameters; // free-form key=value list
    std::uint64_t seed = 0;

    friend bool operator==(FieldProvenance const&, FieldProvenance const&) = default;
};

/**
 * Grid of topic distributions. Every cell holds a length-d vector on the
 * probability simplex; storage is row-major, cell (x, y) at y * width + x.
 */
class TopicField
{
  public:
    TopicField() = default;

    /// Validates the simplex invariant (tolerance 1e-9) on every cell.
    TopicField(int width, int height, int d, std::vector<double> values, FieldProvenance provenance = {});

    int width() const { return width_; }
    int height() const { return height_; }
    int topics() const { return d_; }
    std::size_t cell_count() const { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }

    bool contains(GridLocation loc) const { return loc.x >= 0 && loc.y >= 0 && loc.x < width_ && loc.y < height_; }
    std::size_t index_of(GridLocation loc) const
    {
        return static_cast<std::size_t>(loc.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(loc.x);
    }
    GridLocation location_of(std::size_t index) const
    {
        return {static_cast<int>(index % static_cast<std::size_t>(width_)),
                static_cast<int>(index / static_cast<std::size_t>(width_))};
    }

    /// Bounds-checked accessor.
    std::span<double const> topic_at(GridLocation loc) const;
    std::span<double const> cell(std::size_t index) const
    {
        return {values_.data() + index * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_)};
    }

    /// Index of the largest component at a cell (rendering convention).
    int dominant_topic(GridLocation loc) const;

    std::vector<double> const& values() const { return values_; }
    FieldProvenance const& provenance() const { return provenance_; }
    void set_provenance(FieldProvenance provenance) { provenance_ = std::move(provenance); }

    friend bool operator==(TopicField const&, TopicField const&) = default;

  private:
    int width_ = 0;
    int height_ = 0;
    int d_ = 0;
    std::vector<double> values_;
    FieldProvenance provenance_;
};

struct InterestProfile
{
    std::vector<double> p;

    friend bool operator==(InterestProfile const&, InterestProfile const&) = default;
};

/// Binary ground-truth reward grid, row-major like TopicField.
class InterestMap
{
  public:
    InterestMap() = default;
    InterestMap(int width, int height, std::vector<std::uint8_t> labels);

    int width() const { return width_; }
    int height() const { return height_; }
    bool contains(GridLocation loc) const { return loc.x >= 0 && loc.y >= 0 && loc.x < width_ && loc.y < height_; }
    int label_at(GridLocation loc) const;
    std::vector<std::uint8_t> const& labels() const { return labels_; }
    std::size_t positives() const;

    friend bool operator==(InterestMap const&, InterestMap const&) = default;

  private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> labels_;
};

struct VoronoiParams
{
    int width = 100;
    int height = 100;
    int topics = 8;
    int n_cells = 40;
    double sigma = 5.0;
};

/// A Voronoi seed with its topic label; exposed so tests can build fields from known seeds.
struct VoronoiSeed
{
    double x = 0.0;
    double y = 0.0;
    int topic = 0;
};

/**
 * Smoothed Voronoi topic field. Seeds are placed uniformly over the image and
 * labelled uniformly from {0..d-1}; each pixel mixes seed labels with weights
 * exp(-dist / sigma) normalised over all seeds.
 */
TopicField generate_voronoi_topic_field(VoronoiParams const& params, Rng& rng);

/// Deterministic core of the generator, for fixed seed layouts.
TopicField voronoi_field_from_seeds(int width, int height, int topics, std::span<VoronoiSeed const> seeds,
                                    double sigma);

/// Integer class raster, row-major. Negative values mark unlabelled pixels.
struct LabelRaster
{
    int width = 0;
    int height = 0;
    std::vector<int> classes;
};

/**
 * One-hot encodes a class raster and blurs it with a normalised isotropic
 * (Gaussian, sigma = radius / 2, truncated at radius) kernel. Class values are
 * remapped to a contiguous 0..d-1 range in ascending order. Unlabelled pixels
 * take the modal class of their labelled neighbourhood.
 */
TopicField ingest_label_raster(LabelRaster const& raster, int smoothing_radius);

/// Loads a plain-text integer grid (.txt/.asc/.csv) or a PGM image (.pgm).
LabelRaster load_label_raster(std::filesystem::path const& path);

InterestProfile sample_interest_profile(int topics, Rng& rng);

/// Independent Bernoulli(p . z) draw per cell.
InterestMap sample_interest_map(TopicField const& field, InterestProfile const& profile, Rng& rng);

/// Probability p . z of interest at every cell.
std::vector<double> interest_probabilities(TopicField const& field, InterestProfile const& profile);

// Text serialisation. Doubles are written with 17 significant digits, so
// load(save(x)) == x bit for bit.
void save_field(TopicField const& field, std::filesystem::path const& path);
TopicField load_field(std::filesystem::path const& path);
std::string serialize_field(TopicField const& field);
TopicField deserialize_field(std::string const& text);

void save_interest_map(InterestMap const& map, InterestProfile const& profile, std::filesystem::path const& path);
InterestMap load_interest_map(std::filesystem::path const& path, InterestProfile* profile = nullptr);

/// 17-significant-digit text; parses back to the same double.
std::string format_double(double value);

} // namespace coexplore
