#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "fgcn/dataset.hpp"
#include "fgcn/errors.hpp"
#include "fgcn/rng.hpp"

namespace fgcn {

struct GenConfig {
    std::size_t n_compositions = 2410;
    std::vector<double> loadings = {30.0, 35.0, 40.0, 45.0, 50.0, 55.0, 60.0};  // LiI wt%
    std::vector<Separator> separators = {Separator::Celgard, Separator::Qma};
    double salt_cap_molpct = 50.0;     // cap on total salt concentration
    double over_cap_fraction = 0.0;    // share of compositions admitted over the cap
    double resolution_molpct = 1.0;    // mol% grid spacing
    std::uint64_t seed = 0;

    void validate() const {
        if (n_compositions == 0) throw config_error("gen: n_compositions must be > 0");
        if (loadings.empty() || separators.empty())
            throw config_error("gen: loadings and separators must be non-empty");
        for (double l : loadings)
            if (!(l >= 0.0 && l <= 100.0)) throw config_error("gen: loadings must lie in [0, 100]");
        if (!(salt_cap_molpct > 0.0 && salt_cap_molpct <= 100.0))
            throw config_error("gen: salt cap must lie in (0, 100]");
        if (!(over_cap_fraction >= 0.0 && over_cap_fraction <= 1.0))
            throw config_error("gen: over-cap fraction must lie in [0, 1]");
        const double units = 100.0 / resolution_molpct;
        if (!(resolution_molpct > 0.0) || std::fabs(units - std::round(units)) > 1e-9)
            throw config_error("gen: resolution must divide 100 mol%");
    }
};

struct GeneratedDesign {
    std::uint64_t design_id = 0;
    FormulationDesign design;
};

namespace detail {

// Uniform composition of `total` units into kConstituentCount parts via a
// random (kConstituentCount-1)-subset of cut positions (stars and bars).
inline std::array<double, kConstituentCount> sample_composition(Rng& rng, std::uint64_t total,
                                                                double resolution) {
    const std::uint64_t slots = total + kConstituentCount - 1;
    std::set<std::uint64_t> cuts;
    while (cuts.size() < kConstituentCount - 1)
        cuts.insert(rng.uniform_index(slots));
    std::array<double, kConstituentCount> mol{};
    std::uint64_t prev = 0;
    std::size_t part = 0;
    for (std::uint64_t cut : cuts) {
        mol[part++] = static_cast<double>(cut - prev) * resolution;
        prev = cut + 1;
    }
    mol[part] = static_cast<double>(slots - prev) * resolution;
    return mol;
}

}  // namespace detail

// Dummy battery-design pool: n distinct random compositions on the integer
// simplex (salt total capped, with an optional over-cap allowance), crossed
// with every loading and separator. Deterministic under the seed.
inline std::vector<GeneratedDesign> generate(const GenConfig& config) {
    config.validate();
    const std::uint64_t total_units = static_cast<std::uint64_t>(std::llround(100.0 / config.resolution_molpct));

    Rng rng(config.seed);
    std::set<std::array<double, kConstituentCount>> seen;
    std::vector<std::array<double, kConstituentCount>> compositions;
    compositions.reserve(config.n_compositions);

    const std::size_t over_cap_quota =
        static_cast<std::size_t>(std::floor(config.over_cap_fraction * static_cast<double>(config.n_compositions)));
    std::size_t over_cap_used = 0;

    const std::uint64_t max_attempts = 2000 * config.n_compositions + 100000;
    std::uint64_t attempts = 0;
    while (compositions.size() < config.n_compositions) {
        if (++attempts > max_attempts)
            throw config_error("gen: could not draw " + std::to_string(config.n_compositions) +
                               " distinct compositions under the configured constraints after " +
                               std::to_string(max_attempts) + " attempts");
        auto mol = detail::sample_composition(rng, total_units, config.resolution_molpct);
        const double salt = mol[0] + mol[1] + mol[2] + mol[3];
        if (salt > config.salt_cap_molpct + 1e-9) {
            if (over_cap_used >= over_cap_quota) continue;
            if (seen.count(mol)) continue;
            ++over_cap_used;
        } else if (seen.count(mol)) {
            continue;
        }
        seen.insert(mol);
        compositions.push_back(mol);
    }

    std::vector<GeneratedDesign> pool;
    pool.reserve(config.n_compositions * config.loadings.size() * config.separators.size());
    std::uint64_t id = 0;
    for (const auto& mol : compositions)
        for (double loading : config.loadings)
            for (Separator sep : config.separators) {
                GeneratedDesign g;
                g.design_id = id++;
                g.design.mol_percent = mol;
                g.design.loading_wtpct = loading;
                g.design.separator = sep;
                pool.push_back(std::move(g));
            }
    return pool;
}

}  // namespace fgcn
