#include "coexplore/semantic_field.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace coexplore
{

namespace
{

constexpr double kSimplexTolerance = 1e-9;
constexpr char const* kFieldMagic = "coexplore-field";
constexpr char const* kMapMagic = "coexplore-interest-map";
constexpr int kFormatVersion = 1;

double parse_double(std::string const& token)
{
    double value = 0.0;
    auto const* first = token.data();
    auto const* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
    {
        throw IngestionError("cannot parse number '" + token + "'");
    }
    return value;
}

std::string read_file(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw IngestionError("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(std::filesystem::path const& path, std::string const& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
    if (!out)
    {
        throw std::runtime_error("write failed for " + path.string());
    }
}

// Header lines are "key value..." until a line reading "data".
std::map<std::string, std::string> read_header(std::istream& in, std::string const& magic)
{
    std::string line;
    if (!std::getline(in, line))
    {
        throw IngestionError("empty input");
    }
    std::istringstream first(line);
    std::string tag;
    int version = 0;
    first >> tag >> version;
    if (tag != magic)
    {
        throw IngestionError("expected '" + magic + "' header, got '" + tag + "'");
    }
    if (version != kFormatVersion)
    {
        throw IngestionError("unsupported " + magic + " version " + std::to_string(version));
    }
    std::map<std::string, std::string> header;
    while (std::getline(in, line))
    {
        if (line == "data")
        {
            return header;
        }
        auto space = line.find(' ');
        if (space == std::string::npos)
        {
            header[line] = "";
        }
        else
        {
            header[line.substr(0, space)] = line.substr(space + 1);
        }
    }
    throw IngestionError("missing data section");
}

std::string const& header_value(std::map<std::string, std::string> const& header, std::string const& key)
{
    auto it = header.find(key);
    if (it == header.end())
    {
        throw IngestionError("missing header key '" + key + "'");
    }
    return it->second;
}

} // namespace

std::string format_double(double value)
{
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 17);
    return std::string(buffer, ptr);
}

int chebyshev(GridLocation a, GridLocation b)
{
    return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

TopicField::TopicField(int width, int height, int d, std::vector<double> values, FieldProvenance provenance)
    : width_(width), height_(height), d_(d), values_(std::move(values)), provenance_(std::move(provenance))
{
    if (width <= 0 || height <= 0)
    {
        throw ParameterError("topic field dimensions must be positive");
    }
    if (d < 2)
    {
        throw ParameterError("topic field needs at least two topics");
    }
    if (values_.size() != cell_count() * static_cast<std::size_t>(d))
    {
        throw ParameterError("topic field value count does not match width * height * d");
    }
    for (std::size_t i = 0; i < cell_count(); ++i)
    {
        auto z = cell(i);
        double sum = 0.0;
        for (double v : z)
        {
            if (!(v >= 0.0) || !std::isfinite(v))
            {
                throw ParameterError("topic field cell " + std::to_string(i) + " has a negative or non-finite entry");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > kSimplexTolerance)
        {
            throw ParameterError("topic field cell " + std::to_string(i) + " does not sum to 1");
        }
    }
}

std::span<double const> TopicField::topic_at(GridLocation loc) const
{
    if (!contains(loc))
    {
        throw IndexError("location (" + std::to_string(loc.x) + ", " + std::to_string(loc.y) + ") outside " +
                         std::to_string(width_) + "x" + std::to_string(height_) + " field");
    }
    return cell(index_of(loc));
}

int TopicField::dominant_topic(GridLocation loc) const
{
    auto z = topic_at(loc);
    return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

InterestMap::InterestMap(int width, int height, std::vector<std::uint8_t> labels)
    : width_(width), height_(height), labels_(std::move(labels))
{
    if (width <= 0 || height <= 0)
    {
        throw ParameterError("interest map dimensions must be positive");
    }
    if (labels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    {
        throw ParameterError("interest map label count does not match width * height");
    }
    for (auto label : labels_)
    {
        if (label > 1)
        {
            throw ParameterError("interest map labels must be 0 or 1");
        }
    }
}

int InterestMap::label_at(GridLocation loc) const
{
    if (!contains(loc))
    {
        throw IndexError("location (" + std::to_string(loc.x) + ", " + std::to_string(loc.y) +
                         ") outside interest map");
    }
    return labels_[static_cast<std::size_t>(loc.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(loc.x)];
}

std::size_t InterestMap::positives() const
{
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), std::uint8_t{1}));
}

TopicField voronoi_field_from_seeds(int width, int height, int topics, std::span<VoronoiSeed const> seeds, double sigma)
{
    if (width <= 0 || height <= 0 || topics < 2)
    {
        throw ParameterError("voronoi field needs positive dimensions and at least two topics");
    }
    if (seeds.empty())
    {
        throw ParameterError("voronoi field needs at least one seed");
    }
    if (!(sigma > 0.0))
    {
        throw ParameterError("voronoi smoothing length-scale must be positive");
    }
    auto const d = static_cast<std::size_t>(topics);
    std::vector<double> values(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * d, 0.0);
    std::vector<double> distance(seeds.size());
    for (int y = 0; y < height; ++y)
    {
        for (int x = 0; x < width; ++x)
        {
            double const px = x + 0.5;
            double const py = y + 0.5;
            double nearest = std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s < seeds.size(); ++s)
            {
                distance[s] = std::hypot(px - seeds[s].x, py - seeds[s].y);
                nearest = std::min(nearest, distance[s]);
            }
            // Shifting by the nearest distance leaves the normalised weights
            // unchanged and keeps small sigma from underflowing to 0/0.
            double* z = values.data() + (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + x) * d;
            double total = 0.0;
            for (std::size_t s = 0; s < seeds.size(); ++s)
            {
                double const w = std::exp(-(distance[s] - nearest) / sigma);
                z[seeds[s].topic] += w;
                total += w;
            }
            for (std::size_t k = 0; k < d; ++k)
            {
                z[k] /= total;
            }
        }
    }
    return TopicField(width, height, topics, std::move(values));
}

TopicField generate_voronoi_topic_field(VoronoiParams const& params, Rng& rng)
{
    if (params.width < 1 || params.height < 1)
    {
        throw ParameterError("voronoi field dimensions must be at least 1");
    }
    if (params.topics < 2)
    {
        throw ParameterError("voronoi field needs at least two topics");
    }
    if (params.n_cells < params.topics)
    {
        throw ParameterError("voronoi seed count must be at least the topic count");
    }
    if (!(params.sigma > 0.0))
    {
        throw ParameterError("voronoi smoothing length-scale must be positive");
    }
    std::uniform_real_distribution<double> ux(0.0, params.width);
    std::uniform_real_distribution<double> uy(0.0, params.height);
    std::uniform_int_distribution<int> topic(0, params.topics - 1);
    std::vector<VoronoiSeed> seeds(static_cast<std::size_t>(params.n_cells));
    for (auto& seed : seeds)
    {
        seed.x = ux(rng);
        seed.y = uy(rng);
        seed.topic = topic(rng);
    }
    auto field = voronoi_field_from_seeds(params.width, params.height, params.topics, seeds, params.sigma);
    std::ostringstream description;
    description << "n_cells=" << params.n_cells << " sigma=" << format_double(params.sigma);
    field.set_provenance(FieldProvenance{"voronoi", description.str(), 0});
    return field;
}

TopicField ingest_label_raster(LabelRaster const& raster, int smoothing_radius)
{
    if (raster.width <= 0 || raster.height <= 0 || raster.classes.empty())
    {
        throw IngestionError("label raster is empty");
    }
    if (raster.classes.size() != static_cast<std::size_t>(raster.width) * static_cast<std::size_t>(raster.height))
    {
        throw IngestionError("label raster size does not match its dimensions");
    }
    if (smoothing_radius < 0)
    {
        throw ParameterError("smoothing radius must be nonnegative");
    }

    std::map<int, int> remap;
    for (int c : raster.classes)
    {
        if (c >= 0)
        {
            remap.emplace(c, 0);
        }
    }
    if (remap.size() < 2)
    {
        throw IngestionError("label raster must contain at least two classes");
    }
    int next = 0;
    for (auto& [cls, index] : remap)
    {
        index = next++;
    }
    int const topics = next;
    int const w = raster.width;
    int const h = raster.height;

    std::vector<int> dense(raster.classes.size(), -1);
    for (std::size_t i = 0; i < dense.size(); ++i)
    {
        if (raster.classes[i] >= 0)
        {
            dense[i] = remap.at(raster.classes[i]);
        }
    }

    // Fill unlabelled pixels from the modal class of a growing window of
    // labelled neighbours; ties go to the lower class index.
    for (std::size_t i = 0; i < dense.size(); ++i)
    {
        if (raster.classes[i] >= 0)
        {
            continue;
        }
        int const cx = static_cast<int>(i % static_cast<std::size_t>(w));
        int const cy = static_cast<int>(i / static_cast<std::size_t>(w));
        for (int r = 1; r <= std::max(w, h); ++r)
        {
            std::vector<int> counts(static_cast<std::size_t>(topics), 0);
            int found = 0;
            for (int y = std::max(0, cy - r); y <= std::min(h - 1, cy + r); ++y)
            {
                for (int x = std::max(0, cx - r); x <= std::min(w - 1, cx + r); ++x)
                {
                    int c = raster.classes[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + x];
                    if (c >= 0)
                    {
                        ++counts[static_cast<std::size_t>(remap.at(c))];
                        ++found;
                    }
                }
            }
            if (found > 0)
            {
                dense[i] = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
                break;
            }
        }
    }

    auto const d = static_cast<std::size_t>(topics);
    std::vector<double> onehot(dense.size() * d, 0.0);
    for (std::size_t i = 0; i < dense.size(); ++i)
    {
        onehot[i * d + static_cast<std::size_t>(dense[i])] = 1.0;
    }

    FieldProvenance provenance{"raster", "smoothing_radius=" + std::to_string(smoothing_radius), 0};
    if (smoothing_radius == 0)
    {
        return TopicField(w, h, topics, std::move(onehot), provenance);
    }

    double const kernel_sigma = smoothing_radius / 2.0;
    std::vector<std::pair<GridLocation, double>> kernel;
    for (int dy = -smoothing_radius; dy <= smoothing_radius; ++dy)
    {
        for (int dx = -smoothing_radius; dx <= smoothing_radius; ++dx)
        {
            if (dx * dx + dy * dy <= smoothing_radius * smoothing_radius)
            {
                kernel.push_back({{dx, dy}, std::exp(-(dx * dx + dy * dy) / (2.0 * kernel_sigma * kernel_sigma))});
            }
        }
    }

    std::vector<double> blurred(onehot.size(), 0.0);
    for (int y = 0; y < h; ++y)
    {
        for (int x = 0; x < w; ++x)
        {
            double* out = blurred.data() + (static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + x) * d;
            double total = 0.0;
            for (auto const& [offset, weight] : kernel)
            {
                int const sx = x + offset.x;
                int const sy = y + offset.y;
                if (sx < 0 || sy < 0 || sx >= w || sy >= h)
                {
                    continue;
                }
                double const* in = onehot.data() + (static_cast<std::size_t>(sy) * static_cast<std::size_t>(w) + sx) * d;
                for (std::size_t k = 0; k < d; ++k)
                {
                    out[k] += weight * in[k];
                }
                total += weight;
            }
            for (std::size_t k = 0; k < d; ++k)
            {
                out[k] /= total;
            }
        }
    }
    return TopicField(w, h, topics, std::move(blurred), provenance);
}

namespace
{

LabelRaster load_text_raster(std::string const& text, std::string const& name)
{
    LabelRaster raster;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
    {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        std::vector<int> values;
        long value = 0;
        while (row >> value)
        {
            values.push_back(static_cast<int>(value));
        }
        if (!row.eof())
        {
            throw IngestionError(name + ": non-integer token in raster row " + std::to_string(raster.height + 1));
        }
        if (values.empty())
        {
            continue;
        }
        if (raster.height == 0)
        {
            raster.width = static_cast<int>(values.size());
        }
        else if (static_cast<int>(values.size()) != raster.width)
        {
            throw IngestionError(name + ": ragged raster row " + std::to_string(raster.height + 1));
        }
        raster.classes.insert(raster.classes.end(), values.begin(), values.end());
        ++raster.height;
    }
    return raster;
}

LabelRaster load_pgm_raster(std::string const& bytes, std::string const& name)
{
    std::istringstream in(bytes);
    auto next_token = [&]() {
        std::string token;
        while (in >> token)
        {
            if (token[0] == '#')
            {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return token;
        }
        throw IngestionError(name + ": truncated PGM header");
    };
    std::string magic = next_token();
    if (magic != "P2" && magic != "P5")
    {
        throw IngestionError(name + ": not a PGM file");
    }
    LabelRaster raster;
    raster.width = std::stoi(next_token());
    raster.height = std::stoi(next_token());
    int const maxval = std::stoi(next_token());
    if (raster.width <= 0 || raster.height <= 0 || maxval <= 0 || maxval > 65535)
    {
        throw IngestionError(name + ": invalid PGM header");
    }
    std::size_t const count = static_cast<std::size_t>(raster.width) * static_cast<std::size_t>(raster.height);
    raster.classes.reserve(count);
    if (magic == "P2")
    {
        for (std::size_t i = 0; i < count; ++i)
        {
            raster.classes.push_back(std::stoi(next_token()));
        }
        return raster;
    }
    in.get(); // single whitespace byte after maxval
    std::size_t const bytes_per = maxval > 255 ? 2 : 1;
    std::string data(count * bytes_per, '\0');
    in.read(data.data(), static_cast<std::streamsize>(data.size()));
    if (static_cast<std::size_t>(in.gcount()) != data.size())
    {
        throw IngestionError(name + ": truncated PGM pixel data");
    }
    for (std::size_t i = 0; i < count; ++i)
    {
        if (bytes_per == 1)
        {
            raster.classes.push_back(static_cast<unsigned char>(data[i]));
        }
        else
        {
            raster.classes.push_back(static_cast<unsigned char>(data[2 * i]) << 8 |
                                     static_cast<unsigned char>(data[2 * i + 1]));
        }
    }
    return raster;
}

} // namespace

LabelRaster load_label_raster(std::filesystem::path const& path)
{
    auto const content = read_file(path);
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    LabelRaster raster = ext == ".pgm" ? load_pgm_raster(content, path.string()) : load_text_raster(content, path.string());
    if (raster.classes.empty())
    {
        throw IngestionError(path.string() + ": raster is empty");
    }
    return raster;
}

InterestProfile sample_interest_profile(int topics, Rng& rng)
{
    if (topics < 2)
    {
        throw ParameterError("interest profile needs at least two topics");
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    InterestProfile profile;
    profile.p.resize(static_cast<std::size_t>(topics));
    for (auto& p : profile.p)
    {
        p = unit(rng);
    }
    return profile;
}

std::vector<double> interest_probabilities(TopicField const& field, InterestProfile const& profile)
{
    if (profile.p.size() != static_cast<std::size_t>(field.topics()))
    {
        throw ParameterError("interest profile length does not match field topic count");
    }
    for (double p : profile.p)
    {
        if (!(p >= 0.0 && p <= 1.0))
        {
            throw ParameterError("interest profile entries must lie in [0, 1]");
        }
    }
    std::vector<double> probs(field.cell_count());
    for (std::size_t i = 0; i < probs.size(); ++i)
    {
        auto z = field.cell(i);
        probs[i] = std::clamp(std::inner_product(z.begin(), z.end(), profile.p.begin(), 0.0), 0.0, 1.0);
    }
    return probs;
}

InterestMap sample_interest_map(TopicField const& field, InterestProfile const& profile, Rng& rng)
{
    auto const probs = interest_probabilities(field, profile);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::uint8_t> labels(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i)
    {
        labels[i] = unit(rng) < probs[i] ? 1 : 0;
    }
    return InterestMap(field.width(), field.height(), std::move(labels));
}

std::string serialize_field(TopicField const& field)
{
    std::ostringstream out;
    out << kFieldMagic << ' ' << kFormatVersion << '\n';
    out << "width " << field.width() << '\n';
    out << "height " << field.height() << '\n';
    out << "topics " << field.topics() << '\n';
    out << "generator " << field.provenance().generator << '\n';
    out << "parameters " << field.provenance().parameters << '\n';
    out << "seed " << field.provenance().seed << '\n';
    out << "data\n";
    for (std::size_t i = 0; i < field.cell_count(); ++i)
    {
        auto z = field.cell(i);
        for (std::size_t k = 0; k < z.size(); ++k)
        {
            out << (k ? " " : "") << format_double(z[k]);
        }
        out << '\n';
    }
    return out.str();
}

TopicField deserialize_field(std::string const& text)
{
    std::istringstream in(text);
    auto header = read_header(in, kFieldMagic);
    int const width = std::stoi(header_value(header, "width"));
    int const height = std::stoi(header_value(header, "height"));
    int const topics = std::stoi(header_value(header, "topics"));
    FieldProvenance provenance{header_value(header, "generator"), header_value(header, "parameters"),
                               std::stoull(header_value(header, "seed"))};
    if (width <= 0 || height <= 0 || topics < 2)
    {
        throw IngestionError("field header has invalid dimensions");
    }
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * static_cast<std::size_t>(topics));
    std::string token;
    while (in >> token)
    {
        values.push_back(parse_double(token));
    }
    return TopicField(width, height, topics, std::move(values), std::move(provenance));
}

void save_field(TopicField const& field, std::filesystem::path const& path)
{
    write_file(path, serialize_field(field));
}

TopicField load_field(std::filesystem::path const& path)
{
    try
    {
        return deserialize_field(read_file(path));
    }
    catch (IngestionError const& e)
    {
        throw IngestionError(path.string() + ": " + e.what());
    }
}

void save_interest_map(InterestMap const& map, InterestProfile const& profile, std::filesystem::path const& path)
{
    std::ostringstream out;
    out << kMapMagic << ' ' << kFormatVersion << '\n';
    out << "width " << map.width() << '\n';
    out << "height " << map.height() << '\n';
    out << "profile";
    for (double p : profile.p)
    {
        out << ' ' << format_double(p);
    }
    out << "\ndata\n";
    for (int y = 0; y < map.height(); ++y)
    {
        for (int x = 0; x < map.width(); ++x)
        {
            out << (x ? " " : "") << map.label_at({x, y});
        }
        out << '\n';
    }
    write_file(path, out.str());
}

InterestMap load_interest_map(std::filesystem::path const& path, InterestProfile* profile)
{
    auto const text = read_file(path);
    std::istringstream in(text);
    auto header = read_header(in, kMapMagic);
    int const width = std::stoi(header_value(header, "width"));
    int const height = std::stoi(header_value(header, "height"));
    if (profile != nullptr)
    {
        profile->p.clear();
        std::istringstream values(header_value(header, "profile"));
        std::string token;
        while (values >> token)
        {
            profile->p.push_back(parse_double(token));
        }
    }
    std::vector<std::uint8_t> labels;
    int value = 0;
    while (in >> value)
    {
        labels.push_back(static_cast<std::uint8_t>(value));
    }
    return InterestMap(width, height, std::move(labels));
}

} // namespace coexplore
