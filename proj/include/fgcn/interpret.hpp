#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fgcn/constituents.hpp"
#include "fgcn/dataset.hpp"
#include "fgcn/errors.hpp"

namespace fgcn {

// Average ranks (ties share the mean of their rank positions), 1-based.
inline std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] < values[b];
        return a < b;
    });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

// Spearman's rank correlation: Pearson correlation of the averaged-rank
// vectors. Returns nullopt when either input is constant (undefined rho).
inline std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw config_error("spearman: length mismatch " + std::to_string(x.size()) + " vs " +
                           std::to_string(y.size()));
    if (x.size() < 3) throw config_error("spearman: need at least 3 samples");
    for (const auto* v : {&x, &y})
        for (double e : *v)
            if (!std::isfinite(e)) throw numeric_error("spearman: non-finite input");

    const std::vector<double> rx = average_ranks(x);
    const std::vector<double> ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i] / n;
        my += ry[i] / n;
    }
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = rx[i] - mx, dy = ry[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

struct LoadingBin {
    std::string label;
    double lo = 0.0;  // inclusive
    double hi = 0.0;  // inclusive

    bool contains(double loading) const { return loading >= lo && loading <= hi; }
};

// One bin per distinct loading value observed in the rows.
inline std::vector<LoadingBin> discrete_loading_bins(const std::vector<std::pair<FormulationDesign, double>>& rows) {
    std::vector<double> loadings;
    for (const auto& [d, c] : rows) loadings.push_back(d.loading_wtpct);
    std::sort(loadings.begin(), loadings.end());
    loadings.erase(std::unique(loadings.begin(), loadings.end()), loadings.end());
    std::vector<LoadingBin> bins;
    for (double l : loadings) bins.push_back({format_double(l), l, l});
    return bins;
}

struct SccEntry {
    std::string bin;
    std::string variable;  // constituent name or "lii_wtpct"
    std::optional<double> rho;
    std::size_t n = 0;

    bool insufficient() const { return !rho.has_value(); }
};

struct SccReport {
    std::vector<SccEntry> constituent_rho;  // per bin x per constituent
    std::vector<SccEntry> loading_rho;      // per loading window
};

// Per bin: rho(constituent mol%, capacity) for all 8 constituents; across
// the requested windows: rho(loading, capacity). Bins with fewer than 3 rows
// or constant columns are marked insufficient rather than failing.
inline SccReport scc_report(const std::vector<std::pair<FormulationDesign, double>>& rows,
                            const std::vector<LoadingBin>& bins,
                            const std::vector<LoadingBin>& loading_windows) {
    if (rows.empty()) throw config_error("scc_report: no rows");
    SccReport report;
    const auto& registry = canonical_constituents();

    for (const auto& bin : bins) {
        std::vector<const std::pair<FormulationDesign, double>*> members;
        for (const auto& row : rows)
            if (bin.contains(row.first.loading_wtpct)) members.push_back(&row);
        for (std::size_t k = 0; k < kConstituentCount; ++k) {
            SccEntry entry;
            entry.bin = bin.label;
            entry.variable = registry[k].name;
            entry.n = members.size();
            if (members.size() >= 3) {
                std::vector<double> xs, ys;
                for (const auto* m : members) {
                    xs.push_back(m->first.mol_percent[k]);
                    ys.push_back(m->second);
                }
                entry.rho = spearman(xs, ys);
            }
            report.constituent_rho.push_back(std::move(entry));
        }
    }

    for (const auto& window : loading_windows) {
        SccEntry entry;
        entry.bin = window.label;
        entry.variable = "lii_wtpct";
        std::vector<double> xs, ys;
        for (const auto& row : rows)
            if (window.contains(row.first.loading_wtpct)) {
                xs.push_back(row.first.loading_wtpct);
                ys.push_back(row.second);
            }
        entry.n = xs.size();
        if (xs.size() >= 3) entry.rho = spearman(xs, ys);
        report.loading_rho.push_back(std::move(entry));
    }
    return report;
}

// Rank-interpolated quantile (linear between closest ranks) of sorted data.
inline double interpolated_quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw config_error("quantile of empty data");
    const double h = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

struct FiveNumber {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct QuartileSummary {
    double capacity_floor = 0.0;
    std::size_t n = 0;  // rows at or above the floor
    bool sufficient = false;
    std::array<FiveNumber, kConstituentCount> per_constituent{};
};

// mol% five-number summaries over the rows whose capacity reaches the
// floor; fewer than 4 qualifying rows marks the summary insufficient.
inline QuartileSummary quartile_summary(const std::vector<std::pair<FormulationDesign, double>>& rows,
                                        double capacity_floor) {
    if (rows.empty()) throw config_error("quartile_summary: no rows");
    QuartileSummary summary;
    summary.capacity_floor = capacity_floor;

    std::vector<const FormulationDesign*> kept;
    for (const auto& [design, capacity] : rows)
        if (capacity >= capacity_floor) kept.push_back(&design);
    summary.n = kept.size();
    if (kept.size() < 4) return summary;

    summary.sufficient = true;
    for (std::size_t k = 0; k < kConstituentCount; ++k) {
        std::vector<double> column;
        column.reserve(kept.size());
        for (const auto* d : kept) column.push_back(d->mol_percent[k]);
        std::sort(column.begin(), column.end());
        FiveNumber f;
        f.min = column.front();
        f.q1 = interpolated_quantile(column, 0.25);
        f.median = interpolated_quantile(column, 0.5);
        f.q3 = interpolated_quantile(column, 0.75);
        f.max = column.back();
        summary.per_constituent[k] = f;
    }
    return summary;
}

}  // namespace fgcn
