// Command-line driver: one subcommand per pipeline stage.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "streetcrime/app/commands.hpp"
#include "streetcrime/ingest/http_client.hpp"

namespace {

using namespace streetcrime;
using app::Settings;

// Binds a flag to a config key; a later flag wins over the config file.
void bind_key(CLI::App* cmd, Settings& overrides, const std::string& flag, const std::string& key,
              const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [&overrides, key](const std::string& v) { overrides[key] = v; }, help + " [" + key + "]");
}

void bind_switch(CLI::App* cmd, Settings& overrides, const std::string& flag, const std::string& key,
                 const std::string& help) {
    cmd->add_flag_callback(flag, [&overrides, key] { overrides[key] = "true"; }, help + " [" + key + "]");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Street-view features and community crime-rate models"};
    cli.require_subcommand(1);
    cli.fallthrough();  // global options may follow the subcommand
    cli.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::optional<std::string> config_file;
    Settings overrides;
    std::vector<std::string> sets;
    cli.add_option("-c,--config", config_file, "Sectioned key-value config file")->check(CLI::ExistingFile);
    cli.add_option("--set", sets, "Override any key: section.key=value (repeatable)");
    bind_key(&cli, overrides, "-o,--out", "paths.out", "Output directory");
    bind_key(&cli, overrides, "-j,--threads", "run.threads", "Worker threads, 0 for all cores");

    auto* sample = cli.add_subcommand("sample", "Sample points along road centerlines");
    bind_key(sample, overrides, "--centerlines", "paths.centerlines", "Centerline GeoJSON");
    bind_key(sample, overrides, "--boundaries", "paths.boundaries", "Community boundary GeoJSON");
    bind_key(sample, overrides, "--spacing", "sampling.spacing_m", "Distance between points in meters");
    bind_key(sample, overrides, "--per-community", "sampling.per_community", "Points kept per community");
    bind_key(sample, overrides, "--seed", "sampling.seed", "Subsampling seed");

    auto* fetch = cli.add_subcommand("fetch", "Build the image manifest and download images");
    bind_key(fetch, overrides, "--points", "paths.points", "Sample points CSV");
    bind_key(fetch, overrides, "--manifest", "paths.manifest", "Manifest path (default <out>/manifest.tsv)");
    bind_switch(fetch, overrides, "--offline", "fetch.offline", "Write the manifest only");

    auto* aggregate = cli.add_subcommand("aggregate", "Join image features and crimes into the dataset");
    bind_key(aggregate, overrides, "--features", "paths.feature_csv", "Per-image class pixel CSV");
    bind_key(aggregate, overrides, "--points", "paths.points", "Sample points CSV");
    bind_key(aggregate, overrides, "--crimes", "paths.crime_csv", "Arrest records CSV");
    bind_key(aggregate, overrides, "--boundaries", "paths.boundaries", "Community boundary GeoJSON");
    bind_key(aggregate, overrides, "--centerlines", "paths.centerlines", "Centerline GeoJSON");
    bind_key(aggregate, overrides, "--population", "paths.population", "community_id,population CSV");
    bind_key(aggregate, overrides, "--mode", "aggregation.mode", "pixel_fraction or image_presence");
    bind_key(aggregate, overrides, "--denominator", "aggregation.denominator", "population, area_km2 or road_length_km");
    bind_key(aggregate, overrides, "--year", "crime.year", "Keep crimes from this year only");

    auto* train = cli.add_subcommand("train", "Cross-validate one model and save the full fit");
    auto* sweep = cli.add_subcommand("sweep", "Run a hyperparameter sweep or the paper-suite");
    auto* importance = cli.add_subcommand("importance", "Feature importance of a tree-based model");
    for (auto* cmd : {train, sweep, importance}) {
        bind_key(cmd, overrides, "--dataset", "paths.dataset", "Dataset CSV from aggregate");
        bind_key(cmd, overrides, "--protocol", "validation.protocol", "loo, kfold:<k> or holdout:<fraction>");
        bind_key(cmd, overrides, "--seed", "validation.seed", "Seed for folds and ensembles");
    }
    for (auto* cmd : {train, importance}) bind_key(cmd, overrides, "--model", "model.kind", "Model kind");
    bind_key(sweep, overrides, "--model", "model.kind", "Base model for a custom sweep");
    bind_key(sweep, overrides, "--name", "sweep.name", "Built-in sweep, paper-suite or custom");
    bind_key(importance, overrides, "--top", "importance.top_n", "Rows to keep, 0 for all");

    auto* report = cli.add_subcommand("report", "Re-render plots and summarize sweeps");
    bind_key(report, overrides, "--input", "report.input", "Directory holding plot_*.csv (default: --out)");

    CLI11_PARSE(cli, argc, argv);

    const std::string command = cli.get_subcommands().front()->get_name();
    try {
        for (const auto& s : sets) {
            auto [key, value] = app::parse_override(s);
            overrides.try_emplace(key, value);  // dedicated flags take precedence
        }
        const auto config = app::load_config(config_file, overrides);
        app::Written written;
        if (command == "sample") {
            written = app::cmd_sample(config, std::cerr);
        } else if (command == "fetch") {
            std::optional<std::string> key;
            if (const char* env = std::getenv(ingest::kApiKeyEnv)) key = env;
#ifndef STREETCRIME_WITH_OPENSSL
            if (!config.fetch.offline && config.fetch.endpoint.rfind("https://", 0) == 0)
                throw ConfigError("this build has no TLS support; https endpoints need OpenSSL at build time");
#endif
            written = app::cmd_fetch(config, std::cerr, key, ingest::make_http_get());
        } else if (command == "aggregate") {
            written = app::cmd_aggregate(config, std::cerr);
        } else if (command == "train") {
            written = app::cmd_train(config, std::cerr);
        } else if (command == "sweep") {
            written = app::cmd_sweep(config, std::cerr);
        } else if (command == "importance") {
            written = app::cmd_importance(config, std::cerr);
        } else if (command == "report") {
            written = app::cmd_report(config, std::cerr);
        }
        for (const auto& f : written) std::cout << (config.paths.out / f).string() << '\n';
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "streetcrime " << command << ": configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "streetcrime " << command << ": error: " << e.what() << '\n';
        return 1;
    }
}
