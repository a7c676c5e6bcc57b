#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "fgcn/errors.hpp"
#include "fgcn/rng.hpp"
#include "fgcn/tape.hpp"

namespace fgcn {

struct FdOptions {
    // 0 checks every coordinate; for large blocks a seeded sample keeps the
    // check affordable without changing what it measures.
    std::size_t max_coords_per_block = 0;
    std::uint64_t seed = 0;
};

// Compares the analytic gradient against central finite differences.
//
// `loss(true)` must evaluate the loss and leave gradients in `params`;
// `loss(false)` must evaluate the loss without touching gradients the caller
// relies on. Returns max over checked coordinates of
// |analytic - cd| / max(|analytic|, |cd|, 1e-12).
inline double fd_check(const std::function<double(bool)>& loss, ParamSet& params, double eps,
                       FdOptions opt = {}) {
    if (!(eps > 0.0) || eps > 1e-2) throw config_error("fd_check: eps must be in (0, 1e-2]");

    const double base = loss(true);
    if (!std::isfinite(base)) throw numeric_error("fd_check: loss is not finite at the base point");

    std::vector<Matrix> analytic;
    analytic.reserve(params.block_count());
    for (const auto& b : params.blocks()) analytic.push_back(b.grad);

    Rng rng(opt.seed);
    double worst = 0.0;
    for (std::size_t bi = 0; bi < params.block_count(); ++bi) {
        auto& block = params.block(static_cast<int>(bi));
        const std::size_t n = block.value.size();

        std::vector<std::size_t> coords;
        if (opt.max_coords_per_block == 0 || n <= opt.max_coords_per_block) {
            coords.resize(n);
            for (std::size_t i = 0; i < n; ++i) coords[i] = i;
        } else {
            coords.reserve(opt.max_coords_per_block);
            for (std::size_t k = 0; k < opt.max_coords_per_block; ++k)
                coords.push_back(static_cast<std::size_t>(rng.uniform_index(n)));
        }

        for (std::size_t i : coords) {
            double* slot = block.value.data() + i;
            const double saved = *slot;
            *slot = saved + eps;
            const double plus = loss(false);
            *slot = saved - eps;
            const double minus = loss(false);
            *slot = saved;
            if (!std::isfinite(plus) || !std::isfinite(minus))
                throw numeric_error("fd_check: non-finite loss at perturbed point of block '" + block.name +
                                    "'");
            const double cd = (plus - minus) / (2.0 * eps);
            const double a = analytic[bi].data()[i];
            const double denom = std::max({std::fabs(a), std::fabs(cd), 1e-12});
            worst = std::max(worst, std::fabs(a - cd) / denom);
        }
    }
    return worst;
}

}  // namespace fgcn
