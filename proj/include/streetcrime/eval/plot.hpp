#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "streetcrime/core/csv.hpp"
#include "streetcrime/core/error.hpp"
#include "streetcrime/core/numfmt.hpp"
#include "streetcrime/eval/sweep.hpp"

namespace streetcrime::eval {

struct PlotRow {
    double grid_value = 0;
    double train_mse = 0;
    double val_mse = 0;
    double train_r2 = 0;
    double val_r2 = 0;
};

inline const std::vector<std::string> kPlotHeader{"grid_value", "train_mse", "val_mse", "train_r2", "val_r2"};

inline std::vector<PlotRow> plot_rows(const SweepResult& s) {
    if (s.points.empty()) throw ValidationError("cannot plot an empty sweep");
    std::vector<PlotRow> rows;
    for (const auto& p : s.points) rows.push_back({p.value, p.train.mse, p.validation.mse, p.train.r2, p.validation.r2});
    return rows;
}

inline void write_plot_csv(std::ostream& out, const std::vector<PlotRow>& rows) {
    csv::write_record(out, kPlotHeader);
    for (const auto& r : rows)
        csv::write_record(out, {format_double(r.grid_value), format_double(r.train_mse), format_double(r.val_mse),
                                format_double(r.train_r2), format_double(r.val_r2)});
}

inline std::vector<PlotRow> read_plot_csv(std::istream& in, const std::string& source = "plot csv") {
    std::vector<std::string> f;
    if (!csv::read_record(in, f) || f != kPlotHeader) throw ParseError(source + ":1", "unexpected plot header");
    std::vector<PlotRow> rows;
    std::size_t line = 1;
    while (csv::read_record(in, f)) {
        ++line;
        if (f.size() != kPlotHeader.size())
            throw ParseError(source + ":" + std::to_string(line), "expected 5 fields");
        double v[5];
        for (std::size_t c = 0; c < 5; ++c) {
            const auto d = parse_double(f[c]);
            if (!d) throw ParseError(source + ":" + std::to_string(line), "bad number in " + kPlotHeader[c]);
            v[c] = *d;
        }
        rows.push_back({v[0], v[1], v[2], v[3], v[4]});
    }
    return rows;
}

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace detail

// Log scale when the (positive) grid spans two or more decades.
inline bool use_log_x(const std::vector<PlotRow>& rows) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (const auto& r : rows) {
        if (r.grid_value <= 0) return false;
        lo = std::min(lo, r.grid_value);
        hi = std::max(hi, r.grid_value);
    }
    return hi / lo >= 100.0 - 1e-9;
}

// Line chart of MSE against the grid value: one polyline for training MSE,
// one for validation MSE.
inline void write_plot_svg(std::ostream& out, const std::vector<PlotRow>& rows, const std::string& title,
                           const std::string& x_label) {
    if (rows.empty()) throw ValidationError("cannot plot an empty sweep");
    constexpr double W = 640, H = 400, left = 80, right = 150, top = 40, bottom = 60;
    const bool logx = use_log_x(rows);
    auto xt = [&](double v) { return logx ? std::log10(v) : v; };

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& r : rows) {
        x0 = std::min(x0, xt(r.grid_value));
        x1 = std::max(x1, xt(r.grid_value));
        for (double m : {r.train_mse, r.val_mse})
            if (std::isfinite(m)) {
                y0 = std::min(y0, m);
                y1 = std::max(y1, m);
            }
    }
    if (!std::isfinite(y0)) y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5 * (std::abs(y0) + 1), y1 += 0.5 * (std::abs(y1) + 1);
    const double pw = W - left - right, ph = H - top - bottom;
    auto px = [&](double v) { return left + (xt(v) - x0) / (x1 - x0) * pw; };
    auto py = [&](double m) { return top + (1 - (m - y0) / (y1 - y0)) * ph; };
    auto f2 = [](double v) { return format_fixed(v, 2); };

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
        << W << ' ' << H << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "  <text x=\"" << f2(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << detail::xml_escape(title) << "</text>\n";
    out << "  <line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
        << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
        << "\" stroke=\"black\"/>\n";
    for (const auto& r : rows)
        out << "  <text x=\"" << f2(px(r.grid_value)) << "\" y=\"" << top + ph + 16
            << "\" text-anchor=\"middle\" font-size=\"10\">" << format_double(r.grid_value) << "</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double m = y0 + (y1 - y0) * k / 4.0;
        out << "  <text x=\"" << left - 6 << "\" y=\"" << f2(py(m) + 3)
            << "\" text-anchor=\"end\" font-size=\"10\">" << format_sig(m, 4)
            << "</text>\n";
    }
    out << "  <text x=\"" << f2(left + pw / 2) << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\" font-size=\"12\">"
        << detail::xml_escape(x_label) << (logx ? " (log scale)" : "") << "</text>\n";
    out << "  <text x=\"18\" y=\"" << f2(top + ph / 2) << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 18 "
        << f2(top + ph / 2) << ")\">MSE</text>\n";

    struct Series {
        const char* name;
        const char* color;
        double PlotRow::*field;
    };
    const Series series[] = {{"train MSE", "#1f77b4", &PlotRow::train_mse},
                             {"validation MSE", "#d62728", &PlotRow::val_mse}};
    int legend = 0;
    for (const auto& s : series) {
        std::string pts;
        for (const auto& r : rows) {
            const double m = r.*s.field;
            if (!std::isfinite(m)) continue;
            if (!pts.empty()) pts += ' ';
            pts += f2(px(r.grid_value)) + "," + f2(py(m));
        }
        out << "  <polyline class=\"series\" data-series=\"" << s.name << "\" fill=\"none\" stroke=\"" << s.color
            << "\" stroke-width=\"2\" points=\"" << pts << "\"/>\n";
        const double ly = top + 10 + 18 * legend++;
        out << "  <line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32 << "\" y2=\"" << ly
            << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
        out << "  <text x=\"" << left + pw + 38 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << s.name
            << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace streetcrime::eval
