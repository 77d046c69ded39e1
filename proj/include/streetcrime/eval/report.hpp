#pragma once

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

#include "streetcrime/core/csv.hpp"
#include "streetcrime/core/error.hpp"
#include "streetcrime/core/numfmt.hpp"
#include "streetcrime/core/table.hpp"
#include "streetcrime/eval/sweep.hpp"
#include "streetcrime/models/importance.hpp"

namespace streetcrime::eval {

struct ImportanceRow {
    std::string feature;
    double importance = 0;
};

struct ImportanceTable {
    std::string model;
    std::vector<ImportanceRow> rows;
    bool no_splits = false;
};

// Descending by importance, ties alphabetical; top_n == 0 keeps every row.
inline ImportanceTable importance_report(const models::TrainedModel& model,
                                         const std::vector<std::string>& feature_names, std::size_t top_n = 0) {
    const auto imp = models::feature_importance(model);
    models::check_dimension(static_cast<Eigen::Index>(imp.values.size()), static_cast<Eigen::Index>(feature_names.size()));
    ImportanceTable t{models::model_name(model), {}, imp.no_splits};
    for (std::size_t j = 0; j < feature_names.size(); ++j)
        t.rows.push_back({feature_names[j], imp.values[j]});
    std::stable_sort(t.rows.begin(), t.rows.end(), [](const ImportanceRow& a, const ImportanceRow& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return a.feature < b.feature;
    });
    if (top_n > 0 && t.rows.size() > top_n) t.rows.resize(top_n);
    return t;
}

inline void write_importance_text(std::ostream& out, const ImportanceTable& t) {
    std::vector<std::vector<std::string>> cells{{"Class", "Importance"}};
    for (const auto& r : t.rows) cells.push_back({r.feature, format_sig(r.importance, 9)});
    write_aligned(out, cells, 1);
    if (t.no_splits) out << "(no tree split; importance is uniform)\n";
}

inline void write_importance_csv(std::ostream& out, const ImportanceTable& t) {
    csv::write_record(out, {"class", "importance"});
    for (const auto& r : t.rows) csv::write_record(out, {r.feature, format_double(r.importance)});
}

inline void write_sweep_text(std::ostream& out, const SweepResult& s) {
    out << "model: " << models::to_string(s.kind) << '\n';
    out << "hyperparameter: " << s.hyperparameter << '\n';
    if (!s.points.empty()) out << "validation: " << s.points.front().validation.split << '\n';
    out << '\n';
    std::vector<std::vector<std::string>> cells{{s.hyperparameter, "train_mse", "train_r2", "val_mse", "val_r2"}};
    for (const auto& p : s.points)
        cells.push_back({format_double(p.value), format_sig(p.train.mse, 6), format_sig(p.train.r2, 6),
                         format_sig(p.validation.mse, 6), format_sig(p.validation.r2, 6)});
    write_aligned(out, cells, 0);
    for (const auto& p : s.points)
        if (p.validation.degenerate_target || p.train.degenerate_target) {
            out << "note: constant target in at least one split; r2 reported as 0\n";
            break;
        }
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& s) {
    csv::write_record(out, {"model", "hyperparameter", "value", "train_n", "train_mse", "train_r2", "val_split",
                            "val_n", "val_mse", "val_r2"});
    for (const auto& p : s.points)
        csv::write_record(out, {models::to_string(s.kind), s.hyperparameter, format_double(p.value),
                                std::to_string(p.train.n), format_double(p.train.mse), format_double(p.train.r2),
                                p.validation.split, std::to_string(p.validation.n), format_double(p.validation.mse),
                                format_double(p.validation.r2)});
}

// Single-configuration report: one row per split.
inline void write_evaluation_text(std::ostream& out, const std::string& model, const MetricReport& train,
                                  const MetricReport& validation) {
    out << "model: " << model << '\n';
    out << "validation: " << validation.split << "\n\n";
    std::vector<std::vector<std::string>> cells{{"split", "n", "mse", "r2"}};
    for (const auto* r : {&train, &validation})
        cells.push_back({r->split, std::to_string(r->n), format_sig(r->mse, 6), format_sig(r->r2, 6)});
    write_aligned(out, cells, 1);
    if (train.degenerate_target || validation.degenerate_target)
        out << "note: constant target in at least one split; r2 reported as 0\n";
}

// Same columns as the sweep CSV with the hyperparameter fields left empty.
inline void write_evaluation_csv(std::ostream& out, const std::string& model, const MetricReport& train,
                                 const MetricReport& validation) {
    csv::write_record(out, {"model", "hyperparameter", "value", "train_n", "train_mse", "train_r2", "val_split",
                            "val_n", "val_mse", "val_r2"});
    csv::write_record(out, {model, "", "", std::to_string(train.n), format_double(train.mse), format_double(train.r2),
                            validation.split, std::to_string(validation.n), format_double(validation.mse),
                            format_double(validation.r2)});
}

} // namespace streetcrime::eval
