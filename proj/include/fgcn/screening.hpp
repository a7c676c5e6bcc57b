#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fgcn/candidate_gen.hpp"
#include "fgcn/descriptor.hpp"
#include "fgcn/errors.hpp"
#include "fgcn/regressor.hpp"

namespace fgcn {

struct ScreeningResult {
    std::uint64_t design_id = 0;
    FormulationDesign design;
    double predicted_mah_g = 0.0;
    std::size_t rank = 0;  // 1-based, descending by prediction
};

// Predicts every design in the pool and ranks descending by predicted
// capacity, ties broken by design_id ascending. Output order is the rank
// order and is independent of the pool's input order.
inline std::vector<ScreeningResult> screen(const RegressorModel& model, const GrTable& grs,
                                           const std::vector<GeneratedDesign>& pool) {
    if (pool.empty()) throw config_error("screen: empty pool");
    std::vector<ScreeningResult> results;
    results.reserve(pool.size());
    for (const auto& g : pool) {
        ScreeningResult r;
        r.design_id = g.design_id;
        r.design = g.design;
        r.predicted_mah_g = predict(model, build_descriptor(g.design, grs, model.convention));
        results.push_back(std::move(r));
    }
    std::sort(results.begin(), results.end(), [](const ScreeningResult& a, const ScreeningResult& b) {
        if (a.predicted_mah_g != b.predicted_mah_g) return a.predicted_mah_g > b.predicted_mah_g;
        return a.design_id < b.design_id;
    });
    for (std::size_t i = 0; i < results.size(); ++i) results[i].rank = i + 1;
    return results;
}

// Optional solubility post-filter: keeps designs whose every individual salt
// stays at or below the cap. Off by default in the CLI; screening itself
// does not model solubility beyond the generator's total-salt cap.
inline std::vector<ScreeningResult> filter_per_salt(const std::vector<ScreeningResult>& results,
                                                    double per_salt_cap_molpct) {
    std::vector<ScreeningResult> out;
    for (const auto& r : results) {
        bool keep = true;
        for (std::size_t k = 0; k < 4; ++k)
            if (r.design.mol_percent[k] > per_salt_cap_molpct + 1e-9) keep = false;
        if (keep) out.push_back(r);
    }
    return out;
}

// Keeps designs with loading in [lo, hi] whose prediction strictly exceeds
// the threshold, up to max_n by rank. An empty shortlist is a valid result.
inline std::vector<ScreeningResult> shortlist(const std::vector<ScreeningResult>& results,
                                              double loading_lo, double loading_hi, double threshold,
                                              std::size_t max_n) {
    if (loading_lo > loading_hi)
        throw config_error("shortlist: loading window [" + format_double(loading_lo) + ", " +
                           format_double(loading_hi) + "] is empty");
    std::vector<ScreeningResult> out;
    for (const auto& r : results) {
        if (r.design.loading_wtpct < loading_lo || r.design.loading_wtpct > loading_hi) continue;
        if (!(r.predicted_mah_g > threshold)) continue;
        out.push_back(r);
    }
    std::sort(out.begin(), out.end(),
              [](const ScreeningResult& a, const ScreeningResult& b) { return a.rank < b.rank; });
    if (out.size() > max_n) out.resize(max_n);
    return out;
}

}  // namespace fgcn
