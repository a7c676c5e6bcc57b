#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "fgcn/baselines.hpp"
#include "fgcn/candidate_gen.hpp"
#include "fgcn/csv.hpp"
#include "fgcn/dataset.hpp"
#include "fgcn/gcn.hpp"
#include "fgcn/interpret.hpp"
#include "fgcn/regressor.hpp"
#include "fgcn/screening.hpp"

namespace fgcn {

inline std::string optional_rho(const std::optional<double>& rho) {
    return rho ? format_double(*rho) : "nan";
}

inline std::string dataset_csv(const std::vector<CellRecord>& records) {
    CsvWriter w;
    w.row(dataset_columns());
    for (const auto& r : records) {
        std::vector<std::string> row{r.id};
        for (double m : r.design.mol_percent) row.push_back(format_double(m));
        row.push_back(format_double(r.design.loading_wtpct));
        row.push_back(separator_label(r.design.separator));
        row.push_back(format_double(r.capacity_mah_g));
        row.push_back(format_double(r.current_density_ma_cm2));
        w.row(row);
    }
    return w.str();
}

inline std::string pretrain_corpus_csv(const std::vector<std::pair<std::string, PretrainLabel>>& corpus) {
    CsvWriter w;
    w.row({"smiles", "homo_ev", "lumo_ev", "dipole_debye"});
    for (const auto& [smiles, label] : corpus)
        w.row({smiles, format_double(label.homo_ev), format_double(label.lumo_ev),
               format_double(label.dipole_debye)});
    return w.str();
}

inline std::string pool_csv(const std::vector<GeneratedDesign>& pool, const GenConfig& config) {
    CsvWriter w;
    std::string meta = "pool n_compositions=" + std::to_string(config.n_compositions) +
                       " salt_cap=" + format_double(config.salt_cap_molpct) +
                       " over_cap_fraction=" + format_double(config.over_cap_fraction) +
                       " resolution=" + format_double(config.resolution_molpct) +
                       " seed=" + std::to_string(config.seed) + " loadings=";
    for (std::size_t i = 0; i < config.loadings.size(); ++i)
        meta += (i ? "|" : "") + format_double(config.loadings[i]);
    meta += " separators=";
    for (std::size_t i = 0; i < config.separators.size(); ++i)
        meta += (i ? "|" : "") + separator_label(config.separators[i]);
    w.comment(meta);

    std::vector<std::string> header{"design_id"};
    for (const auto& c : mol_column_names()) header.push_back(c);
    header.push_back("lii_wtpct");
    header.push_back("separator");
    w.row(header);
    for (const auto& g : pool) {
        std::vector<std::string> row{std::to_string(g.design_id)};
        for (double m : g.design.mol_percent) row.push_back(format_double(m));
        row.push_back(format_double(g.design.loading_wtpct));
        row.push_back(separator_label(g.design.separator));
        w.row(row);
    }
    return w.str();
}

inline std::vector<GeneratedDesign> read_pool_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    const std::size_t id_col = table.column_index("design_id");
    std::array<std::size_t, kConstituentCount> mol_cols{};
    for (std::size_t k = 0; k < kConstituentCount; ++k)
        mol_cols[k] = table.column_index(mol_column_names()[k]);
    const std::size_t loading_col = table.column_index("lii_wtpct");
    const std::size_t sep_col = table.column_index("separator");

    std::vector<GeneratedDesign> pool;
    pool.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        try {
            GeneratedDesign g;
            g.design_id = std::stoull(table.rows[r][id_col]);
            for (std::size_t k = 0; k < kConstituentCount; ++k)
                g.design.mol_percent[k] = parse_double(table.rows[r][mol_cols[k]]);
            g.design.loading_wtpct = parse_double(table.rows[r][loading_col]);
            g.design.separator = separator_from_label(table.rows[r][sep_col]);
            g.design.validate();
            pool.push_back(std::move(g));
        } catch (const error& e) {
            throw config_error(path + ": row " + std::to_string(r + 1) + ": " + e.what());
        }
    }
    return pool;
}

inline std::string predictions_csv(const std::vector<ScreeningResult>& results) {
    CsvWriter w;
    std::vector<std::string> header{"design_id"};
    for (const auto& c : mol_column_names()) header.push_back(c);
    header.insert(header.end(), {"lii_wtpct", "separator", "predicted_mah_g", "rank"});
    w.row(header);
    for (const auto& r : results) {
        std::vector<std::string> row{std::to_string(r.design_id)};
        for (double m : r.design.mol_percent) row.push_back(format_double(m));
        row.push_back(format_double(r.design.loading_wtpct));
        row.push_back(separator_label(r.design.separator));
        row.push_back(format_double(r.predicted_mah_g));
        row.push_back(std::to_string(r.rank));
        w.row(row);
    }
    return w.str();
}

// Rows shaped for the interpretability analyses: design plus a capacity
// (predicted or measured).
inline std::vector<std::pair<FormulationDesign, double>> read_predictions_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    std::array<std::size_t, kConstituentCount> mol_cols{};
    for (std::size_t k = 0; k < kConstituentCount; ++k)
        mol_cols[k] = table.column_index(mol_column_names()[k]);
    const std::size_t loading_col = table.column_index("lii_wtpct");
    const std::size_t sep_col = table.column_index("separator");
    const std::size_t pred_col = table.column_index("predicted_mah_g");

    std::vector<std::pair<FormulationDesign, double>> rows;
    rows.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        try {
            FormulationDesign d;
            for (std::size_t k = 0; k < kConstituentCount; ++k)
                d.mol_percent[k] = parse_double(table.rows[r][mol_cols[k]]);
            d.loading_wtpct = parse_double(table.rows[r][loading_col]);
            d.separator = separator_from_label(table.rows[r][sep_col]);
            rows.emplace_back(d, parse_double(table.rows[r][pred_col]));
        } catch (const error& e) {
            throw config_error(path + ": row " + std::to_string(r + 1) + ": " + e.what());
        }
    }
    return rows;
}

inline std::string metrics_csv(const std::vector<std::pair<std::string, Metrics>>& by_split) {
    CsvWriter w;
    w.row({"split", "rmse", "mae"});
    for (const auto& [split, m] : by_split)
        w.row({split, format_double(m.rmse), format_double(m.mae)});
    return w.str();
}

inline std::string parity_csv(const Metrics& metrics) {
    CsvWriter w;
    w.row({"id", "measured", "predicted"});
    for (const auto& p : metrics.parity)
        w.row({p.id, format_double(p.measured), format_double(p.predicted)});
    return w.str();
}

inline std::string train_history_csv(const TrainHistory& history) {
    CsvWriter w;
    w.row({"epoch", "train_mse", "val_rmse", "lr"});
    for (std::size_t e = 0; e < history.epochs.size(); ++e)
        w.row({std::to_string(e), format_double(history.epochs[e].train_mse),
               format_double(history.epochs[e].val_rmse), format_double(history.epochs[e].lr)});
    return w.str();
}

inline std::string pretrain_history_csv(const PretrainHistory& history) {
    CsvWriter w;
    w.row({"epoch", "loss"});
    for (std::size_t e = 0; e < history.loss.size(); ++e)
        w.row({std::to_string(e), format_double(history.loss[e])});
    return w.str();
}

inline std::string scc_csv(const SccReport& report) {
    CsvWriter w;
    w.row({"loading_bin", "constituent", "rho", "n"});
    for (const auto& e : report.constituent_rho)
        w.row({e.bin, e.variable, optional_rho(e.rho), std::to_string(e.n)});
    for (const auto& e : report.loading_rho)
        w.row({e.bin, e.variable, optional_rho(e.rho), std::to_string(e.n)});
    return w.str();
}

inline std::string quartile_csv(const QuartileSummary& summary) {
    CsvWriter w;
    w.row({"constituent", "min", "q1", "median", "q3", "max", "n", "capacity_floor"});
    const auto& registry = canonical_constituents();
    for (std::size_t k = 0; k < kConstituentCount; ++k) {
        if (summary.sufficient) {
            const FiveNumber& f = summary.per_constituent[k];
            w.row({registry[k].name, format_double(f.min), format_double(f.q1), format_double(f.median),
                   format_double(f.q3), format_double(f.max), std::to_string(summary.n),
                   format_double(summary.capacity_floor)});
        } else {
            w.row({registry[k].name, "nan", "nan", "nan", "nan", "nan", std::to_string(summary.n),
                   format_double(summary.capacity_floor)});
        }
    }
    return w.str();
}

inline std::string compare_csv(const std::vector<MaeEntry>& entries) {
    CsvWriter w;
    w.row({"model", "mae_mah_g", "hyperparameters_json"});
    for (const auto& e : entries) w.row({e.model, format_double(e.mae), e.hyperparameters_json});
    return w.str();
}

// ---------------------------------------------------------------------------
// SVG scatter report
// ---------------------------------------------------------------------------

struct ScatterPoint {
    double x = 0.0;
    double y = 0.0;
    int series = 0;
};

// Static scatter plot; series index selects the fill color. `diagonal`
// draws the y = x reference line used by parity plots.
inline std::string svg_scatter(const std::vector<ScatterPoint>& points, const std::string& title,
                               const std::string& x_label, const std::string& y_label,
                               bool diagonal = false) {
    const double width = 800, height = 600, margin = 60;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (!points.empty()) {
        xmin = xmax = points[0].x;
        ymin = ymax = points[0].y;
        for (const auto& p : points) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto sx = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin); };
    auto sy = [&](double y) { return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n";
    svg += "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
    svg += "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">" + title + "</text>\n";
    svg += "<line x1=\"60\" y1=\"540\" x2=\"740\" y2=\"540\" stroke=\"black\"/>\n";
    svg += "<line x1=\"60\" y1=\"60\" x2=\"60\" y2=\"540\" stroke=\"black\"/>\n";
    svg += "<text x=\"400\" y=\"580\" text-anchor=\"middle\" font-size=\"14\">" + x_label + "</text>\n";
    svg += "<text x=\"18\" y=\"300\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 300)\">" +
           y_label + "</text>\n";
    svg += "<text x=\"60\" y=\"556\" text-anchor=\"middle\" font-size=\"11\">" + format_double(xmin) + "</text>\n";
    svg += "<text x=\"740\" y=\"556\" text-anchor=\"middle\" font-size=\"11\">" + format_double(xmax) + "</text>\n";
    svg += "<text x=\"52\" y=\"544\" text-anchor=\"end\" font-size=\"11\">" + format_double(ymin) + "</text>\n";
    svg += "<text x=\"52\" y=\"64\" text-anchor=\"end\" font-size=\"11\">" + format_double(ymax) + "</text>\n";
    if (diagonal) {
        const double lo = std::max(xmin, ymin), hi = std::min(xmax, ymax);
        if (lo < hi)
            svg += "<line x1=\"" + format_double(sx(lo)) + "\" y1=\"" + format_double(sy(lo)) + "\" x2=\"" +
                   format_double(sx(hi)) + "\" y2=\"" + format_double(sy(hi)) +
                   "\" stroke=\"#d62728\" stroke-dasharray=\"4 3\"/>\n";
    }
    for (const auto& p : points) {
        svg += "<circle cx=\"" + format_double(sx(p.x)) + "\" cy=\"" + format_double(sy(p.y)) +
               "\" r=\"2.5\" fill=\"" + colors[p.series % 4] + "\" fill-opacity=\"0.6\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

inline void save_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw io_error("write failed for '" + path + "'");
}

}  // namespace fgcn
