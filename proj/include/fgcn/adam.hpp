#pragma once

#include <cmath>
#include <vector>

#include "fgcn/errors.hpp"
#include "fgcn/tape.hpp"

namespace fgcn {

// First/second moment accumulators for one ParamSet.
struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long step = 0;
    std::vector<Matrix> m;
    std::vector<Matrix> v;

    static AdamState for_params(const ParamSet& params, double beta1 = 0.9, double beta2 = 0.999,
                                double epsilon = 1e-8) {
        AdamState st;
        st.beta1 = beta1;
        st.beta2 = beta2;
        st.epsilon = epsilon;
        st.m.reserve(params.block_count());
        st.v.reserve(params.block_count());
        for (const auto& b : params.blocks()) {
            st.m.emplace_back(b.value.rows(), b.value.cols());
            st.v.emplace_back(b.value.rows(), b.value.cols());
        }
        return st;
    }
};

// One bias-corrected Adam update from the gradients currently stored in
// params. Increments the step counter.
inline void adam_step(ParamSet& params, AdamState& state, double lr) {
    if (!(lr > 0.0)) throw config_error("adam_step: lr must be > 0");
    if (state.m.size() != params.block_count())
        throw shape_error("adam_step: state has " + std::to_string(state.m.size()) + " blocks, params have " +
                          std::to_string(params.block_count()));

    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    for (std::size_t bi = 0; bi < params.block_count(); ++bi) {
        auto& block = params.block(static_cast<int>(bi));
        Matrix& m = state.m[bi];
        Matrix& v = state.v[bi];
        if (!m.same_shape(block.value))
            throw shape_error("adam_step: block '" + block.name + "' is " + block.value.dims() +
                              " but state is " + m.dims());

        double* p = block.value.data();
        const double* g = block.grad.data();
        double* mp = m.data();
        double* vp = v.data();
        const std::size_t n = block.value.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double gi = g[i];
            if (!std::isfinite(gi))
                throw numeric_error("adam_step: non-finite gradient in block '" + block.name + "'");
            mp[i] = state.beta1 * mp[i] + (1.0 - state.beta1) * gi;
            vp[i] = state.beta2 * vp[i] + (1.0 - state.beta2) * gi * gi;
            const double mhat = mp[i] / bc1;
            const double vhat = vp[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

}  // namespace fgcn
