#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "fgcn/constituents.hpp"
#include "fgcn/csv.hpp"
#include "fgcn/errors.hpp"
#include "fgcn/rng.hpp"

namespace fgcn {

enum class Separator : int { Celgard = 1, Qma = 2 };

inline std::string separator_label(Separator s) { return s == Separator::Celgard ? "CELGARD" : "QMA"; }

inline Separator separator_from_label(const std::string& label) {
    if (label == "CELGARD") return Separator::Celgard;
    if (label == "QMA") return Separator::Qma;
    throw config_error("unknown separator '" + label + "'; allowed labels: CELGARD, QMA");
}

// One point of the design space: 8 mol% values (registry order) plus the
// cell-level variables.
struct FormulationDesign {
    std::array<double, kConstituentCount> mol_percent{};
    double loading_wtpct = 0.0;  // LiI wt% in the cathode
    Separator separator = Separator::Celgard;

    double mol_sum() const { return std::accumulate(mol_percent.begin(), mol_percent.end(), 0.0); }

    double salt_mol_sum() const {
        return mol_percent[0] + mol_percent[1] + mol_percent[2] + mol_percent[3];
    }

    void validate() const {
        for (double m : mol_percent)
            if (!(m >= 0.0) || !std::isfinite(m)) throw config_error("mol% values must be finite and >= 0");
        if (std::fabs(mol_sum() - 100.0) > 1e-6)
            throw config_error("mol% sum is " + format_double(mol_sum()) + ", expected 100");
        if (!(loading_wtpct >= 0.0 && loading_wtpct <= 100.0))
            throw config_error("loading " + format_double(loading_wtpct) + " outside [0, 100]");
    }

    bool operator==(const FormulationDesign& o) const = default;
};

struct CellRecord {
    std::string id;
    FormulationDesign design;
    double capacity_mah_g = 0.0;
    double current_density_ma_cm2 = 1.0;
};

// Dataset CSV schema, header required, exact column names.
inline const std::vector<std::string>& dataset_columns() {
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> c{"id"};
        for (const auto& m : mol_column_names()) c.push_back(m);
        c.insert(c.end(), {"lii_wtpct", "separator", "capacity_mah_g", "current_density_ma_cm2"});
        return c;
    }();
    return cols;
}

struct LoadSummary {
    struct Reject {
        std::size_t row;  // 1-based data row number
        std::string reason;
    };
    std::vector<CellRecord> records;
    std::vector<Reject> rejects;
};

// Validates row by row; structurally broken files throw, invalid rows are
// rejected with their row number and reason. Rows whose mol% sum lies
// within 100 +- 0.5 are renormalized to exactly 100.
inline LoadSummary load_dataset(const std::string& path) {
    const CsvTable table = read_csv(path);
    for (const auto& col : dataset_columns()) table.column_index(col);  // throws on missing column

    const std::size_t id_col = table.column_index("id");
    std::array<std::size_t, kConstituentCount> mol_cols{};
    for (std::size_t k = 0; k < kConstituentCount; ++k)
        mol_cols[k] = table.column_index(mol_column_names()[k]);
    const std::size_t loading_col = table.column_index("lii_wtpct");
    const std::size_t sep_col = table.column_index("separator");
    const std::size_t cap_col = table.column_index("capacity_mah_g");
    const std::size_t cd_col = table.column_index("current_density_ma_cm2");

    LoadSummary out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t rowno = r + 1;
        try {
            CellRecord rec;
            rec.id = row[id_col];
            if (rec.id.empty()) throw config_error("empty id");
            for (std::size_t k = 0; k < kConstituentCount; ++k) {
                rec.design.mol_percent[k] = parse_double(row[mol_cols[k]]);
                if (!(rec.design.mol_percent[k] >= 0.0))
                    throw config_error(mol_column_names()[k] + " must be >= 0");
            }
            const double sum = rec.design.mol_sum();
            if (std::fabs(sum - 100.0) > 0.5)
                throw config_error("mol% sum is " + format_double(sum) + ", outside 100 +- 0.5");
            for (auto& m : rec.design.mol_percent) m *= 100.0 / sum;
            rec.design.loading_wtpct = parse_double(row[loading_col]);
            if (!(rec.design.loading_wtpct >= 0.0 && rec.design.loading_wtpct <= 100.0))
                throw config_error("lii_wtpct outside [0, 100]");
            rec.design.separator = separator_from_label(row[sep_col]);
            rec.capacity_mah_g = parse_double(row[cap_col]);
            if (!(rec.capacity_mah_g >= 0.0) || !std::isfinite(rec.capacity_mah_g))
                throw config_error("capacity_mah_g must be finite and >= 0");
            rec.current_density_ma_cm2 = parse_double(row[cd_col]);
            out.records.push_back(std::move(rec));
        } catch (const error& e) {
            out.rejects.push_back({rowno, e.what()});
        }
    }
    return out;
}

struct Split {
    std::vector<CellRecord> train;
    std::vector<CellRecord> test;
};

namespace detail {

inline std::size_t split_test_count(std::size_t n, double test_fraction) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw config_error("test_fraction must lie in (0, 1)");
    if (n < 2) throw config_error("need at least 2 records to split, got " + std::to_string(n));
    const std::size_t k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction));
    if (k == 0 || k == n)
        throw config_error("split infeasible: " + std::to_string(n) + " records at fraction " +
                           format_double(test_fraction));
    return k;
}

}  // namespace detail

// Seeded shuffle; floor(n * fraction) records become the test set.
inline Split split_random(const std::vector<CellRecord>& records, double test_fraction, std::uint64_t seed) {
    const std::size_t k = detail::split_test_count(records.size(), test_fraction);
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    Split split;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < k ? split.test : split.train).push_back(records[order[i]]);
    return split;
}

// Records sorted ascending by cathode loading; the top floor(n * fraction)
// loadings become the test set. Boundary ties break by record id ascending.
inline Split split_sorted(const std::vector<CellRecord>& records, double test_fraction) {
    const std::size_t k = detail::split_test_count(records.size(), test_fraction);
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (records[a].design.loading_wtpct != records[b].design.loading_wtpct)
            return records[a].design.loading_wtpct < records[b].design.loading_wtpct;
        return records[a].id < records[b].id;
    });
    Split split;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < order.size() - k ? split.train : split.test).push_back(records[order[i]]);
    return split;
}

// Order-independent fingerprint of a split's record ids; trained models
// carry it so cross-model comparisons can detect protocol mismatches.
inline std::uint64_t split_fingerprint(const std::vector<CellRecord>& records) {
    std::vector<std::string> ids;
    ids.reserve(records.size());
    for (const auto& r : records) ids.push_back(r.id);
    std::sort(ids.begin(), ids.end());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& id : ids) {
        h = fnv1a(id, h);
        h = fnv1a("|", h);
    }
    return h;
}

}  // namespace fgcn
