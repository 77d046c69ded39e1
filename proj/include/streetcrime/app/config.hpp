#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "streetcrime/core/error.hpp"
#include "streetcrime/core/io.hpp"
#include "streetcrime/core/numfmt.hpp"
#include "streetcrime/eval/validation.hpp"
#include "streetcrime/features/aggregate.hpp"
#include "streetcrime/features/crime_rate.hpp"
#include "streetcrime/ingest/crime_csv.hpp"
#include "streetcrime/ingest/geojson.hpp"
#include "streetcrime/ingest/manifest.hpp"
#include "streetcrime/ingest/schema.hpp"
#include "streetcrime/models/model.hpp"

namespace streetcrime::app {

namespace fs = std::filesystem;

// "section.key" -> value, sorted. This is both the parsed file and the
// effective configuration echoed into output directories.
using Settings = std::map<std::string, std::string>;

// Sectioned key-value file: "[section]" headers, "key = value" lines, ';' or
// '#' comments. Keys outside a section are rejected so every key is qualified.
inline Settings parse_settings(std::istream& in, const std::string& source = "config") {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ParseError(source + ": line " + std::to_string(e.line()), e.message());
    }
    Settings out;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError(source + ": key '" + section + "' is outside any [section]");
        for (const auto& [key, value] : body) out[section + "." + key] = std::string(trim(value.data()));
    }
    return out;
}

// Parses "section.key=value" from a command-line override.
inline std::pair<std::string, std::string> parse_override(std::string_view s) {
    const auto eq = s.find('=');
    const auto key = std::string(trim(s.substr(0, eq)));
    if (eq == std::string_view::npos || key.find('.') == std::string::npos)
        throw ConfigError("override '" + std::string(s) + "' must look like section.key=value");
    return {key, std::string(trim(s.substr(eq + 1)))};
}

inline void write_settings(std::ostream& out, const Settings& s) {
    std::string section;
    for (const auto& [qualified, value] : s) {
        const auto dot = qualified.find('.');
        const auto sec = qualified.substr(0, dot);
        if (sec != section) {
            out << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
            section = sec;
        }
        out << qualified.substr(dot + 1) << " = " << value << '\n';
    }
}

struct PathsConfig {
    fs::path centerlines, boundaries, crime_csv, feature_csv, population, points, dataset, schema, manifest;
    fs::path out = ".";
};

struct SamplingConfig {
    double spacing_m = 50;
    std::size_t per_community = 200;
    std::uint64_t seed = 0;
};

struct FetchConfig {
    ingest::ImageSize size{};
    std::size_t max_concurrent = 8;
    int retries = 3;
    bool offline = false;
    std::string endpoint = ingest::kDefaultStreetViewEndpoint;
};

struct PipelineConfig {
    PathsConfig paths;
    std::string boundary_id_property = ingest::kDefaultDistrictIdProperty;
    std::string centerline_id_property = "physicalid";
    SamplingConfig sampling;
    FetchConfig fetch;
    std::optional<int> crime_year;
    ingest::CrimeCsvConfig crime;
    features::AggregationMode aggregation = features::AggregationMode::pixel_fraction;
    std::uint64_t presence_threshold = 0;
    features::RateDenominator denominator = features::RateDenominator::population;
    models::ModelSpec model;
    std::vector<std::pair<std::string, std::string>> model_overrides;  // hyperparameters as given
    std::string protocol = "loo";
    std::uint64_t validation_seed = 0;
    std::string sweep = "paper-suite";
    std::string sweep_hyperparameter;
    std::vector<double> sweep_grid;
    std::size_t importance_top_n = 0;
    fs::path report_input;  // empty means the output directory
    std::size_t threads = 1;

    Settings effective;  // every key with its final value, for the echo

    eval::Protocol validation_protocol() const { return eval::parse_protocol(protocol, validation_seed); }

    ingest::ClassSchema schema() const {
        if (paths.schema.empty()) return ingest::voc21();
        auto in = io::open_input(paths.schema);
        return ingest::read_schema(in);
    }
};

// Defaults for every recognized key. Empty means unset.
inline Settings default_settings() {
    const ingest::CrimeCsvConfig crime;
    return {
        {"paths.centerlines", ""},
        {"paths.boundaries", ""},
        {"paths.crime_csv", ""},
        {"paths.feature_csv", ""},
        {"paths.population", ""},
        {"paths.points", ""},
        {"paths.dataset", ""},
        {"paths.schema", ""},
        {"paths.manifest", ""},
        {"paths.out", "."},
        {"boundaries.id_property", ingest::kDefaultDistrictIdProperty},
        {"centerlines.id_property", "physicalid"},
        {"sampling.spacing_m", "50"},
        {"sampling.per_community", "200"},
        {"sampling.seed", "0"},
        {"fetch.width_px", "600"},
        {"fetch.height_px", "300"},
        {"fetch.max_concurrent", "8"},
        {"fetch.retries", "3"},
        {"fetch.offline", "false"},
        {"fetch.endpoint", ingest::kDefaultStreetViewEndpoint},
        {"crime.year", ""},
        {"crime.id_column", crime.id_column},
        {"crime.date_column", crime.date_column},
        {"crime.lat_column", crime.lat_column},
        {"crime.lon_column", crime.lon_column},
        {"crime.offense_column", crime.offense_column},
        {"crime.bbox", "-74.2591,40.4774,-73.7004,40.9176"},
        {"aggregation.mode", "pixel_fraction"},
        {"aggregation.presence_threshold", "0"},
        {"aggregation.denominator", "population"},
        {"model.kind", "linear"},
        {"validation.protocol", "loo"},
        {"validation.seed", "0"},
        {"sweep.name", "paper-suite"},
        {"sweep.hyperparameter", ""},
        {"sweep.grid", ""},
        {"importance.top_n", "0"},
        {"report.input", ""},
        {"run.threads", "1"},
    };
}

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

template <class Int>
Int parse_count(const std::string& key, const std::string& v) {
    const auto n = parse_integer<Int>(v);
    if (!n || *n < Int{0}) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    return *n;
}

inline double parse_number(const std::string& key, const std::string& v) {
    const auto d = parse_double(v);
    if (!d) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return *d;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(key, item));
    return out;
}

} // namespace detail

// Layers: defaults, then the file (paths relative to the file's directory),
// then command-line overrides (paths relative to the working directory).
// Unknown keys are errors, except [model] keys, which must name a
// hyperparameter accepted by the model kind.
inline PipelineConfig resolve_config(const Settings& file, const fs::path& file_dir, const Settings& overrides) {
    Settings s = default_settings();
    auto merge = [&](const Settings& layer, const fs::path& base, const std::string& origin) {
        for (const auto& [key, value] : layer) {
            if (!s.count(key) && key.rfind("model.", 0) != 0)
                throw ConfigError(origin + ": unknown key '" + key + "'");
            std::string v = value;
            const bool is_path = key.rfind("paths.", 0) == 0 || key == "report.input";
            if (is_path && !v.empty() && fs::path(v).is_relative() && !base.empty())
                v = (base / v).lexically_normal().string();
            s[key] = v;
        }
    };
    merge(file, file_dir, "config file");
    merge(overrides, {}, "command line");

    using namespace detail;
    PipelineConfig c;
    auto path = [&](const char* key) { return fs::path(s.at(key)); };
    c.paths = {path("paths.centerlines"), path("paths.boundaries"), path("paths.crime_csv"),
               path("paths.feature_csv"), path("paths.population"), path("paths.points"),
               path("paths.dataset"),     path("paths.schema"),     path("paths.manifest"),
               path("paths.out")};
    if (c.paths.out.empty()) throw ConfigError("paths.out must not be empty");
    c.boundary_id_property = s.at("boundaries.id_property");
    c.centerline_id_property = s.at("centerlines.id_property");

    c.sampling.spacing_m = parse_number("sampling.spacing_m", s.at("sampling.spacing_m"));
    if (!(c.sampling.spacing_m > 0)) throw ConfigError("sampling.spacing_m must be positive");
    c.sampling.per_community = parse_count<std::size_t>("sampling.per_community", s.at("sampling.per_community"));
    c.sampling.seed = parse_count<std::uint64_t>("sampling.seed", s.at("sampling.seed"));

    c.fetch.size.width_px = parse_count<int>("fetch.width_px", s.at("fetch.width_px"));
    c.fetch.size.height_px = parse_count<int>("fetch.height_px", s.at("fetch.height_px"));
    if (c.fetch.size.width_px <= 0 || c.fetch.size.height_px <= 0) throw ConfigError("fetch image size must be positive");
    c.fetch.max_concurrent = parse_count<std::size_t>("fetch.max_concurrent", s.at("fetch.max_concurrent"));
    c.fetch.retries = parse_count<int>("fetch.retries", s.at("fetch.retries"));
    c.fetch.offline = parse_bool("fetch.offline", s.at("fetch.offline"));
    c.fetch.endpoint = s.at("fetch.endpoint");

    if (!s.at("crime.year").empty()) c.crime_year = parse_count<int>("crime.year", s.at("crime.year"));
    c.crime.id_column = s.at("crime.id_column");
    c.crime.date_column = s.at("crime.date_column");
    c.crime.lat_column = s.at("crime.lat_column");
    c.crime.lon_column = s.at("crime.lon_column");
    c.crime.offense_column = s.at("crime.offense_column");
    if (const auto& bbox = s.at("crime.bbox"); bbox == "none" || bbox.empty()) {
        c.crime.bbox.reset();
    } else {
        const auto v = parse_list("crime.bbox", bbox);
        if (v.size() != 4 || v[0] >= v[2] || v[1] >= v[3])
            throw ConfigError("crime.bbox must be min_lon,min_lat,max_lon,max_lat or none");
        c.crime.bbox = geo::BoundingBox{v[0], v[1], v[2], v[3]};
    }

    c.aggregation = features::parse_aggregation_mode(s.at("aggregation.mode"));
    c.presence_threshold =
        parse_count<std::uint64_t>("aggregation.presence_threshold", s.at("aggregation.presence_threshold"));
    c.denominator = features::parse_rate_denominator(s.at("aggregation.denominator"));

    c.model.kind = models::parse_model_kind(s.at("model.kind"));
    for (const auto& [key, value] : s) {
        if (key.rfind("model.", 0) != 0 || key == "model.kind") continue;
        const auto name = key.substr(6);
        models::set_hyperparameter(c.model, name, parse_number(key, value));
        c.model_overrides.emplace_back(name, value);
    }

    c.protocol = s.at("validation.protocol");
    c.validation_seed = parse_count<std::uint64_t>("validation.seed", s.at("validation.seed"));
    c.validation_protocol();  // validates the syntax early
    c.sweep = s.at("sweep.name");
    c.sweep_hyperparameter = s.at("sweep.hyperparameter");
    if (!s.at("sweep.grid").empty()) c.sweep_grid = parse_list("sweep.grid", s.at("sweep.grid"));
    c.importance_top_n = parse_count<std::size_t>("importance.top_n", s.at("importance.top_n"));
    c.report_input = s.at("report.input");
    c.threads = parse_count<std::size_t>("run.threads", s.at("run.threads"));
    if (c.threads == 0) c.threads = std::max(1u, std::thread::hardware_concurrency());

    c.effective = std::move(s);
    return c;
}

inline PipelineConfig load_config(const std::optional<fs::path>& file, const Settings& overrides) {
    Settings from_file;
    fs::path dir;
    if (file) {
        auto in = io::open_input(*file);
        from_file = parse_settings(in, file->string());
        dir = file->parent_path();
    }
    return resolve_config(from_file, dir, overrides);
}

// Fails with the key name when a required input is unset or missing on disk.
inline void require_input(const fs::path& p, const std::string& key) {
    if (p.empty()) throw ConfigError(key + " is required for this command");
    if (!fs::exists(p)) throw ConfigError(key + ": no such file '" + p.string() + "'");
}

inline void echo_config(const PipelineConfig& c, const std::string& command) {
    fs::create_directories(c.paths.out);
    std::ostringstream ss;
    ss << "; effective configuration for '" << command << "'\n";
    write_settings(ss, c.effective);
    io::write_file_atomic(c.paths.out / "config.ini", ss.str());
}

} // namespace streetcrime::app
