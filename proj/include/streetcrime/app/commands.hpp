#pragma once

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "streetcrime/app/config.hpp"
#include "streetcrime/core/io.hpp"
#include "streetcrime/core/parallel.hpp"
#include "streetcrime/eval/plot.hpp"
#include "streetcrime/eval/report.hpp"
#include "streetcrime/eval/sweep.hpp"
#include "streetcrime/eval/validation.hpp"
#include "streetcrime/features/aggregate.hpp"
#include "streetcrime/features/crime_rate.hpp"
#include "streetcrime/features/dataset.hpp"
#include "streetcrime/features/stats.hpp"
#include "streetcrime/geo/join.hpp"
#include "streetcrime/geo/sampling.hpp"
#include "streetcrime/ingest/crime_csv.hpp"
#include "streetcrime/ingest/feature_csv.hpp"
#include "streetcrime/ingest/fetch.hpp"
#include "streetcrime/ingest/geojson.hpp"
#include "streetcrime/ingest/manifest.hpp"
#include "streetcrime/ingest/points_csv.hpp"
#include "streetcrime/models/serialize.hpp"

namespace streetcrime::app {

// Files a command wrote, relative to the output directory, in write order.
using Written = std::vector<std::string>;

namespace detail {

class Output {
public:
    explicit Output(const fs::path& dir) : dir_(dir) {}

    template <class Fn>
    void write(const std::string& name, Fn&& fn) {
        std::ostringstream ss;
        fn(ss);
        io::write_file_atomic(dir_ / name, ss.str());
        written_.push_back(name);
    }

    Written take() { return std::move(written_); }

private:
    fs::path dir_;
    Written written_;
};

inline std::vector<geo::CommunityDistrict> load_boundaries(const PipelineConfig& c) {
    require_input(c.paths.boundaries, "paths.boundaries");
    auto in = io::open_input(c.paths.boundaries);
    return ingest::parse_boundaries(in, c.boundary_id_property, c.paths.boundaries.string());
}

inline ingest::CenterlineParse load_centerlines(const PipelineConfig& c) {
    require_input(c.paths.centerlines, "paths.centerlines");
    auto in = io::open_input(c.paths.centerlines);
    return ingest::parse_centerlines(in, c.centerline_id_property, c.paths.centerlines.string());
}

inline std::vector<geo::SamplePoint> load_points(const PipelineConfig& c) {
    require_input(c.paths.points, "paths.points");
    auto in = io::open_input(c.paths.points);
    return ingest::read_points_csv(in, c.paths.points.string());
}

inline features::Dataset load_dataset(const PipelineConfig& c) {
    require_input(c.paths.dataset, "paths.dataset");
    auto in = io::open_input(c.paths.dataset);
    return features::read_dataset_csv(in, c.paths.dataset.string());
}

inline models::DesignMatrix load_design(const PipelineConfig& c, std::ostream& log) {
    const auto ds = load_dataset(c);
    log << "dataset: " << ds.rows.size() << " communities, " << ds.schema.size() << " features\n";
    return eval::design_from_dataset(ds);
}

inline void apply_model_overrides(models::ModelSpec& spec, const PipelineConfig& c) {
    for (const auto& [name, value] : c.model_overrides) models::set_hyperparameter(spec, name, *parse_double(value));
}

inline std::string display_kind(models::ModelKind k) {
    using models::ModelKind;
    switch (k) {
        case ModelKind::mean: return "Mean";
        case ModelKind::linear: return "Linear regression";
        case ModelKind::polynomial: return "Polynomial regression";
        case ModelKind::ridge: return "Ridge regression";
        case ModelKind::svr: return "Support vector regression";
        case ModelKind::decision_tree: return "Decision tree";
        case ModelKind::random_forest: return "Random forest";
        case ModelKind::gradient_boosting: return "Gradient boosting";
        case ModelKind::xgboost: return "Second-order boosting";
    }
    return models::to_string(k);
}

inline void write_sweep_outputs(Output& out, const eval::SweepResult& r, const std::string& report_stem) {
    out.write(report_stem + ".txt", [&](std::ostream& s) { eval::write_sweep_text(s, r); });
    out.write(report_stem + ".csv", [&](std::ostream& s) { eval::write_sweep_csv(s, r); });
    const auto rows = eval::plot_rows(r);
    out.write("plot_" + r.name + ".csv", [&](std::ostream& s) { eval::write_plot_csv(s, rows); });
    out.write("plot_" + r.name + ".svg", [&](std::ostream& s) {
        eval::write_plot_svg(s, rows, display_kind(r.kind) + ": MSE by " + r.hyperparameter, r.hyperparameter);
    });
}

inline void write_importance_outputs(Output& out, const eval::ImportanceTable& t, const std::string& stem) {
    out.write(stem + ".txt", [&](std::ostream& s) { eval::write_importance_text(s, t); });
    out.write(stem + ".csv", [&](std::ostream& s) { eval::write_importance_csv(s, t); });
}

} // namespace detail

// Equidistant points along every centerline, labeled with their community
// and subsampled per community.
inline Written cmd_sample(const PipelineConfig& c, std::ostream& log) {
    const auto districts = detail::load_boundaries(c);
    const auto lines = detail::load_centerlines(c);
    log << "centerlines: " << lines.lines.size() << " polylines";
    if (lines.skipped_degenerate) log << " (" << lines.skipped_degenerate << " degenerate parts skipped)";
    log << "; districts: " << districts.size() << '\n';

    std::vector<std::vector<geo::SamplePoint>> per_line(lines.lines.size());
    parallel_for(lines.lines.size(), c.threads, [&](std::size_t i) {
        per_line[i] = geo::sample_equidistant(lines.lines[i], c.sampling.spacing_m);
    });
    std::vector<geo::SamplePoint> candidates;
    for (auto& v : per_line) candidates.insert(candidates.end(), v.begin(), v.end());
    candidates = geo::assign_communities(std::move(candidates), districts, c.threads);
    const auto picked = geo::subsample_per_community(candidates, c.sampling.per_community, c.sampling.seed, c.threads);

    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // candidates, sampled
    for (const auto& d : districts) counts[d.community_id] = {0, 0};
    std::size_t outside = 0;
    for (const auto& p : candidates) p.community_id ? ++counts[*p.community_id].first : ++outside;
    for (const auto& p : picked) ++counts[*p.community_id].second;
    log << "sample points: " << candidates.size() << " candidates, " << outside << " outside every district, "
        << picked.size() << " kept\n";

    echo_config(c, "sample");
    detail::Output out(c.paths.out);
    out.write("points.csv", [&](std::ostream& s) { ingest::write_points_csv(s, picked); });
    out.write("sample_summary.csv", [&](std::ostream& s) {
        csv::write_record(s, {"community_id", "candidates", "sampled"});
        for (const auto& [id, n] : counts) csv::write_record(s, {id, std::to_string(n.first), std::to_string(n.second)});
    });
    return out.take();
}

// Builds (or resumes) the image manifest and downloads pending images. The
// key is substituted only inside the request; files hold the placeholder.
inline Written cmd_fetch(const PipelineConfig& c, std::ostream& log, const std::optional<std::string>& api_key,
                         const ingest::HttpGet& get) {
    const fs::path manifest_path = c.paths.manifest.empty() ? c.paths.out / "manifest.tsv" : c.paths.manifest;
    std::vector<ingest::ManifestEntry> manifest;
    if (fs::exists(manifest_path)) {
        auto in = io::open_input(manifest_path);
        manifest = ingest::read_manifest(in, manifest_path.string());
        log << "resuming manifest " << manifest_path.string() << " (" << manifest.size() << " entries)\n";
    } else {
        manifest = ingest::build_image_manifest(detail::load_points(c), c.fetch.size, c.fetch.endpoint);
        log << "manifest: " << manifest.size() << " entries\n";
    }
    if (!c.fetch.offline && (!api_key || api_key->empty()))
        throw ConfigError(std::string("street-view API key missing: set ") + ingest::kApiKeyEnv +
                          " (or use --offline to write the manifest only)");

    echo_config(c, "fetch");
    detail::Output out(c.paths.out);
    out.write("schema.txt", [&](std::ostream& s) { ingest::write_schema(s, c.schema()); });
    io::write_file_atomic(manifest_path, ingest::manifest_to_string(manifest));
    if (c.fetch.offline) {
        log << "offline: manifest written, no requests made\n";
        return out.take();
    }
    ingest::FetchOptions opts;
    opts.api_key = *api_key;
    opts.max_concurrent = c.fetch.max_concurrent;
    opts.retries = c.fetch.retries;
    const auto summary = ingest::fetch_images(manifest, c.paths.out / "images", opts, get, manifest_path);
    log << "fetch: " << summary.fetched << " fetched, " << summary.failed << " failed, " << summary.skipped
        << " already present, " << summary.requests << " requests\n";
    return out.take();
}

// Feature CSV + sample points + crimes + boundaries -> dataset CSV and the
// descriptive statistics table.
inline Written cmd_aggregate(const PipelineConfig& c, std::ostream& log) {
    const auto schema = c.schema();
    require_input(c.paths.feature_csv, "paths.feature_csv");
    require_input(c.paths.crime_csv, "paths.crime_csv");
    std::optional<features::PopulationTable> population;
    if (c.denominator == features::RateDenominator::population) {
        require_input(c.paths.population, "paths.population");
        auto in = io::open_input(c.paths.population);
        population = features::read_population_csv(in, c.paths.population.string());
    }

    auto fin = io::open_input(c.paths.feature_csv);
    const auto parsed = ingest::parse_feature_csv(fin, schema, c.paths.feature_csv.string());
    log << "feature rows: " << parsed.vectors.size() << " accepted, " << parsed.rejected.size() << " rejected\n";
    constexpr std::size_t kShown = 20;
    for (std::size_t i = 0; i < std::min(kShown, parsed.rejected.size()); ++i)
        log << "  " << c.paths.feature_csv.string() << ": line " << parsed.rejected[i].line << ": "
            << parsed.rejected[i].reason << '\n';
    if (parsed.rejected.size() > kShown) log << "  ... and " << parsed.rejected.size() - kShown << " more\n";

    const auto points = detail::load_points(c);
    features::GroupingReport grouping;
    const auto grouped = features::group_by_community(parsed.vectors, points, &grouping);
    if (grouping.unknown_point || grouping.no_community)
        log << "images dropped: " << grouping.unknown_point << " with unknown point_id, " << grouping.no_community
            << " on points outside every district\n";
    const auto feats = features::aggregate_features(grouped, schema.size(), c.aggregation, c.presence_threshold);

    auto districts = detail::load_boundaries(c);
    const auto lines = detail::load_centerlines(c);
    const auto road_km = geo::road_length_by_district(lines.lines, districts, 10.0, c.threads);
    for (auto& d : districts) d.road_length_km = road_km.at(d.community_id);

    auto cin = io::open_input(c.paths.crime_csv);
    const auto crimes = ingest::parse_crime_csv(cin, c.crime_year, c.crime, c.paths.crime_csv.string());
    log << "crime rows: " << crimes.report.rows_read << " read, " << crimes.report.kept << " kept, "
        << crimes.report.filtered_by_year << " other years";
    for (const auto& [reason, n] : crimes.report.dropped) log << ", " << n << ' ' << reason;
    log << '\n';
    const auto counts = features::count_crimes(crimes.records, districts, c.threads);
    if (counts.unassigned) log << "crimes outside every district: " << counts.unassigned << '\n';
    const auto rates = features::compute_crime_rate(counts.per_community, districts, c.denominator, population);

    const auto built = features::build_dataset(feats, rates, schema, c.denominator, c.aggregation);
    log << "dataset: " << built.dataset.rows.size() << " communities, " << built.excluded.size() << " excluded\n";
    const auto stats = features::descriptive_stats(built.dataset, districts);

    echo_config(c, "aggregate");
    detail::Output out(c.paths.out);
    out.write("dataset.csv", [&](std::ostream& s) { features::write_dataset_csv(s, built.dataset); });
    out.write("stats.txt", [&](std::ostream& s) { features::write_stats_text(s, stats); });
    out.write("stats.csv", [&](std::ostream& s) { features::write_stats_csv(s, stats); });
    out.write("exclusions.csv", [&](std::ostream& s) {
        csv::write_record(s, {"community_id", "reason"});
        for (const auto& e : built.excluded) csv::write_record(s, {e.community_id, e.reason});
    });
    out.write("schema.txt", [&](std::ostream& s) { ingest::write_schema(s, schema); });
    return out.take();
}

// Cross-validates the configured model and writes the full-data fit.
inline Written cmd_train(const PipelineConfig& c, std::ostream& log) {
    const auto data = detail::load_design(c, log);
    const auto cv = eval::cross_validate(data, c.model, c.validation_protocol(), c.threads);
    const auto model = models::fit_model(c.model, data, c.threads);
    const auto name = models::to_string(c.model.kind);
    log << name << ": train mse " << format_sig(cv.train.mse, 6) << " r2 " << format_sig(cv.train.r2, 6) << "; "
        << cv.validation.split << " mse " << format_sig(cv.validation.mse, 6) << " r2 "
        << format_sig(cv.validation.r2, 6) << '\n';

    echo_config(c, "train");
    detail::Output out(c.paths.out);
    out.write("model.json", [&](std::ostream& s) { s << models::serialize_model(model); });
    out.write("metrics.txt", [&](std::ostream& s) { eval::write_evaluation_text(s, name, cv.train, cv.validation); });
    out.write("metrics.csv", [&](std::ostream& s) { eval::write_evaluation_csv(s, name, cv.train, cv.validation); });
    return out.take();
}

inline const std::string kPaperSuite = "paper-suite";

// The seven model reports (linear plus six sweeps), three importance tables
// (depth-4 tree, forest, gradient boosting) and one plot per sweep.
inline Written run_full_suite(const models::DesignMatrix& data, const PipelineConfig& c, std::ostream& log) {
    using models::ModelKind;
    const auto protocol = c.validation_protocol();
    detail::Output out(c.paths.out);

    models::ModelSpec linear;
    linear.kind = ModelKind::linear;
    const auto cv = eval::cross_validate(data, linear, protocol, c.threads);
    out.write("report_linear.txt", [&](std::ostream& s) { eval::write_evaluation_text(s, "linear", cv.train, cv.validation); });
    out.write("report_linear.csv", [&](std::ostream& s) { eval::write_evaluation_csv(s, "linear", cv.train, cv.validation); });
    log << "linear: " << cv.validation.split << " r2 " << format_sig(cv.validation.r2, 6) << '\n';

    for (const auto& name : eval::builtin_sweep_names()) {
        const auto spec = eval::builtin_sweep(name, protocol, c.validation_seed);
        const auto r = eval::run_sweep(data, spec, c.threads);
        detail::write_sweep_outputs(out, r, "report_" + models::to_string(spec.base.kind));
        log << name << ": " << r.points.size() << " grid points\n";
    }

    const std::pair<ModelKind, const char*> importance_models[] = {{ModelKind::decision_tree, "importance_decision_tree"},
                                                                   {ModelKind::random_forest, "importance_random_forest"},
                                                                   {ModelKind::gradient_boosting, "importance_gradient_boosting"}};
    for (const auto& [kind, stem] : importance_models) {
        models::ModelSpec spec;
        spec.kind = kind;
        spec.tree.max_depth = 4;
        models::set_hyperparameter(spec, "seed", static_cast<double>(c.validation_seed));
        const auto model = models::fit_model(spec, data, c.threads);
        detail::write_importance_outputs(out, eval::importance_report(model, data.feature_names, c.importance_top_n), stem);
    }
    auto written = out.take();
    auto listing = written;
    listing.push_back("suite_manifest.txt");
    std::sort(listing.begin(), listing.end());
    std::string manifest;
    for (const auto& f : listing) manifest += f + '\n';
    io::write_file_atomic(c.paths.out / "suite_manifest.txt", manifest);
    written.push_back("suite_manifest.txt");
    return written;
}

// sweep.name is a built-in sweep, "paper-suite", or "custom" (model.kind
// with sweep.hyperparameter over sweep.grid). [model] keys adjust the base
// model of a single sweep; the full suite ignores them.
inline Written cmd_sweep(const PipelineConfig& c, std::ostream& log) {
    const auto data = detail::load_design(c, log);
    echo_config(c, "sweep");
    if (c.sweep == kPaperSuite) return run_full_suite(data, c, log);

    eval::SweepSpec spec;
    if (c.sweep == "custom") {
        if (c.sweep_hyperparameter.empty() || c.sweep_grid.empty())
            throw ConfigError("custom sweep needs sweep.hyperparameter and sweep.grid");
        spec = {"custom_" + c.sweep_hyperparameter, c.model, c.sweep_hyperparameter, c.sweep_grid,
                c.validation_protocol()};
    } else {
        const auto& names = eval::builtin_sweep_names();
        if (std::find(names.begin(), names.end(), c.sweep) == names.end()) {
            std::string known = kPaperSuite + ", custom";
            for (const auto& n : names) known += ", " + n;
            throw ConfigError("unknown sweep '" + c.sweep + "'; available: " + known);
        }
        spec = eval::builtin_sweep(c.sweep, c.validation_protocol(), c.validation_seed);
        detail::apply_model_overrides(spec.base, c);
    }
    const auto r = eval::run_sweep(data, spec, c.threads);
    detail::Output out(c.paths.out);
    detail::write_sweep_outputs(out, r, "sweep_" + spec.name);
    log << spec.name << ": " << r.points.size() << " grid points\n";
    return out.take();
}

// Impurity importance of the configured (tree-based) model fit on all rows.
inline Written cmd_importance(const PipelineConfig& c, std::ostream& log) {
    if (!models::is_tree_based(c.model.kind))
        throw UnsupportedModelError("importance needs a tree-based model (decision_tree, random_forest, "
                                    "gradient_boosting, xgboost), got " + models::to_string(c.model.kind));
    const auto data = detail::load_design(c, log);
    const auto model = models::fit_model(c.model, data, c.threads);
    const auto table = eval::importance_report(model, data.feature_names, c.importance_top_n);
    echo_config(c, "importance");
    detail::Output out(c.paths.out);
    detail::write_importance_outputs(out, table, "importance_" + models::to_string(c.model.kind));
    out.write("model.json", [&](std::ostream& s) { s << models::serialize_model(model); });
    return out.take();
}

// Re-renders every plot_*.csv found under report.input (default: the output
// directory) as SVG and summarizes the best validation point of each.
inline Written cmd_report(const PipelineConfig& c, std::ostream& log) {
    const fs::path input = c.report_input.empty() ? c.paths.out : c.report_input;
    if (!fs::is_directory(input)) throw ConfigError("report.input: no such directory '" + input.string() + "'");
    std::vector<fs::path> plots;
    for (const auto& e : fs::directory_iterator(input)) {
        const auto name = e.path().filename().string();
        if (e.is_regular_file() && name.rfind("plot_", 0) == 0 && e.path().extension() == ".csv")
            plots.push_back(e.path());
    }
    if (plots.empty()) throw ConfigError("no plot_*.csv files under '" + input.string() + "'");
    std::sort(plots.begin(), plots.end());

    echo_config(c, "report");
    detail::Output out(c.paths.out);
    std::vector<std::vector<std::string>> summary{{"sweep", "best_value", "val_mse", "val_r2"}};
    for (const auto& p : plots) {
        auto in = io::open_input(p);
        const auto rows = eval::read_plot_csv(in, p.string());
        if (rows.empty()) throw ParseError(p.string(), "plot file has no rows");
        const auto sweep = p.stem().string().substr(5);
        // Built-in sweeps get the same title the sweep command gave them.
        std::string x_label = "value", title = sweep + ": MSE by value";
        const auto& names = eval::builtin_sweep_names();
        if (std::find(names.begin(), names.end(), sweep) != names.end()) {
            const auto spec = eval::builtin_sweep(sweep);
            x_label = spec.hyperparameter;
            title = detail::display_kind(spec.base.kind) + ": MSE by " + x_label;
        }
        out.write(p.stem().string() + ".svg", [&](std::ostream& s) { eval::write_plot_svg(s, rows, title, x_label); });
        const auto best = std::min_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
            return a.val_mse < b.val_mse;
        });
        summary.push_back({sweep, format_double(best->grid_value), format_sig(best->val_mse, 6),
                           format_sig(best->val_r2, 6)});
    }
    out.write("summary.txt", [&](std::ostream& s) { write_aligned(s, summary, 1); });
    log << "report: " << plots.size() << " plots rendered\n";
    return out.take();
}

} // namespace streetcrime::app
