#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fgcn/adam.hpp"
#include "fgcn/descriptor.hpp"
#include "fgcn/errors.hpp"
#include "fgcn/matrix.hpp"
#include "fgcn/rng.hpp"
#include "fgcn/tape.hpp"

namespace fgcn {

inline constexpr std::array<std::size_t, 3> kRegressorHiddenWidths = {1000, 500, 100};

// Dense head mapping a battery descriptor to specific capacity:
// input -> 1000 -> 500 -> 100 -> 1, ReLU hidden, identity output.
struct RegressorModel {
    Matrix w1, b1, w2, b2, w3, b3, w4, b4;
    DescriptorConvention convention;
    std::uint64_t train_fingerprint = 0;

    std::size_t input_width() const { return w1.rows(); }
};

struct TrainConfig {
    std::uint64_t seed = 0;
    double initial_lr = 1e-4;
    std::size_t phase1_epochs = 4000;            // epochs at initial_lr
    std::size_t phase_epochs = 3000;             // length of each stepped phase
    std::vector<double> phase_lrs = {1e-3, 1e-2};
    std::size_t max_epochs = 15000;
    std::size_t patience = 1000;                 // epochs without val-RMSE improvement
    double rmse_log_threshold = 20.0;            // history notes the first crossing
};

// Stepped learning rate: initial_lr for phase1_epochs, then each phase_lrs
// value for phase_epochs, holding the last value until training stops.
inline double lr_at_epoch(const TrainConfig& config, std::size_t epoch) {
    if (epoch < config.phase1_epochs || config.phase_lrs.empty()) return config.initial_lr;
    const std::size_t phase = (epoch - config.phase1_epochs) / config.phase_epochs;
    return config.phase_lrs[std::min(phase, config.phase_lrs.size() - 1)];
}

struct EpochStats {
    double train_mse = 0.0;  // (mAh/g)^2
    double val_rmse = 0.0;   // mAh/g
    double lr = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0;  // argmin of validation RMSE
    std::string stop_reason;
    std::optional<std::size_t> threshold_epoch;  // first epoch below rmse_log_threshold
};

// Trainable parameter view; shared by train() and the gradient checks.
struct RegressorParams {
    ParamSet ps;
    int w1, b1, w2, b2, w3, b3, w4, b4;

    static RegressorParams init(std::size_t input_width, Rng& rng) {
        RegressorParams p;
        const auto h = kRegressorHiddenWidths;
        p.w1 = p.ps.add("reg.w1", glorot_uniform(input_width, h[0], rng));
        p.b1 = p.ps.add("reg.b1", Matrix(1, h[0]));
        p.w2 = p.ps.add("reg.w2", glorot_uniform(h[0], h[1], rng));
        p.b2 = p.ps.add("reg.b2", Matrix(1, h[1]));
        p.w3 = p.ps.add("reg.w3", glorot_uniform(h[1], h[2], rng));
        p.b3 = p.ps.add("reg.b3", Matrix(1, h[2]));
        p.w4 = p.ps.add("reg.w4", glorot_uniform(h[2], 1, rng));
        p.b4 = p.ps.add("reg.b4", Matrix(1, 1));
        return p;
    }

    RegressorModel to_model(const DescriptorConvention& convention) const {
        RegressorModel m;
        m.w1 = ps.block(w1).value;
        m.b1 = ps.block(b1).value;
        m.w2 = ps.block(w2).value;
        m.b2 = ps.block(b2).value;
        m.w3 = ps.block(w3).value;
        m.b3 = ps.block(b3).value;
        m.w4 = ps.block(w4).value;
        m.b4 = ps.block(b4).value;
        m.convention = convention;
        return m;
    }
};

// Squared-error loss of one training example on the tape. `relu_mask`
// (optional) receives the activation-pattern hash of this evaluation.
inline double regressor_example_loss(RegressorParams& p, const std::vector<double>& descriptor,
                                     double target, bool with_grad, std::uint64_t* relu_mask = nullptr) {
    GradientTape tape;
    Var x = tape.constant(Matrix(1, descriptor.size(), descriptor));
    Var h1 = tape.relu(tape.affine(x, tape.parameter(p.ps, p.w1), tape.parameter(p.ps, p.b1)));
    Var h2 = tape.relu(tape.affine(h1, tape.parameter(p.ps, p.w2), tape.parameter(p.ps, p.b2)));
    Var h3 = tape.relu(tape.affine(h2, tape.parameter(p.ps, p.w3), tape.parameter(p.ps, p.b3)));
    Var y = tape.affine(h3, tape.parameter(p.ps, p.w4), tape.parameter(p.ps, p.b4));
    Var loss = tape.mse(y, tape.constant(Matrix(1, 1, {target})));
    const double value = tape.scalar(loss);
    if (relu_mask) *relu_mask = tape.relu_mask_hash();
    if (with_grad) tape.backward(loss);
    return value;
}

namespace detail {

inline void affine_row(std::vector<double>& out, const std::vector<double>& x, const Matrix& w,
                       const Matrix& b, bool relu) {
    out.assign(w.cols(), 0.0);
    for (std::size_t k = 0; k < w.rows(); ++k) {
        const double xk = x[k];
        if (xk == 0.0) continue;
        const double* wrow = w.row_ptr(k);
        for (std::size_t j = 0; j < w.cols(); ++j) out[j] += xk * wrow[j];
    }
    const double* brow = b.row_ptr(0);
    for (std::size_t j = 0; j < w.cols(); ++j) {
        out[j] += brow[j];
        if (relu && out[j] < 0.0) out[j] = 0.0;
    }
}

inline double forward_scalar(const Matrix& w1, const Matrix& b1, const Matrix& w2, const Matrix& b2,
                             const Matrix& w3, const Matrix& b3, const Matrix& w4, const Matrix& b4,
                             const std::vector<double>& x) {
    std::vector<double> a, b;
    affine_row(a, x, w1, b1, true);
    affine_row(b, a, w2, b2, true);
    affine_row(a, b, w3, b3, true);
    affine_row(b, a, w4, b4, false);
    return b[0];
}

inline double forward_scalar(const RegressorModel& m, const std::vector<double>& x) {
    return forward_scalar(m.w1, m.b1, m.w2, m.b2, m.w3, m.b3, m.w4, m.b4, x);
}

}  // namespace detail

// Deterministic scalar prediction in mAh/g; negative outputs are reported
// as-is.
inline double predict(const RegressorModel& model, const DescriptorVector& d) {
    if (d.convention_hash != model.convention.hash())
        throw convention_error("predict: descriptor convention " + std::to_string(d.convention_hash) +
                               " does not match model manifest " + std::to_string(model.convention.hash()));
    if (d.values.size() != model.input_width())
        throw shape_error("predict: descriptor length " + std::to_string(d.values.size()) + ", model expects " +
                          std::to_string(model.input_width()));
    return detail::forward_scalar(model, d.values);
}

using TrainingExample = std::pair<DescriptorVector, double>;

// Batch-size-1 training per the step-lr schedule, example order reshuffled
// each epoch, returning the checkpoint with the best validation RMSE.
inline std::pair<RegressorModel, TrainHistory> train(const std::vector<TrainingExample>& train_set,
                                                     const std::vector<TrainingExample>& val_set,
                                                     const DescriptorConvention& convention,
                                                     const TrainConfig& config) {
    if (train_set.empty() || val_set.empty())
        throw config_error("train: train and validation sets must be non-empty");
    const std::uint64_t expected_hash = convention.hash();
    for (const auto* set : {&train_set, &val_set})
        for (const auto& [d, y] : *set) {
            if (d.convention_hash != expected_hash)
                throw convention_error("train: descriptor convention mismatch");
            if (d.values.size() != convention.length())
                throw shape_error("train: descriptor length " + std::to_string(d.values.size()) +
                                  ", convention expects " + std::to_string(convention.length()));
            if (!std::isfinite(y)) throw numeric_error("train: non-finite target");
        }

    Rng rng(config.seed);
    RegressorParams params = RegressorParams::init(convention.length(), rng);
    AdamState adam = AdamState::for_params(params.ps);

    TrainHistory history;
    history.stop_reason = "max_epochs";
    double best_rmse = std::numeric_limits<double>::infinity();
    std::vector<Matrix> best_weights;

    auto val_rmse_now = [&] {
        const auto& ps = params.ps;
        double sq = 0.0;
        for (const auto& [d, y] : val_set) {
            const double r = detail::forward_scalar(
                                 ps.block(params.w1).value, ps.block(params.b1).value,
                                 ps.block(params.w2).value, ps.block(params.b2).value,
                                 ps.block(params.w3).value, ps.block(params.b3).value,
                                 ps.block(params.w4).value, ps.block(params.b4).value, d.values) -
                             y;
            sq += r * r;
        }
        return std::sqrt(sq / static_cast<double>(val_set.size()));
    };

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        const double lr = lr_at_epoch(config, epoch);
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t idx : order) {
            const double loss =
                regressor_example_loss(params, train_set[idx].first.values, train_set[idx].second, true);
            if (!std::isfinite(loss))
                throw numeric_error("train: loss diverged at epoch " + std::to_string(epoch) +
                                    "; last finite epoch " +
                                    (history.epochs.empty()
                                         ? std::string("none")
                                         : std::to_string(history.epochs.size() - 1)));
            loss_sum += loss;
            adam_step(params.ps, adam, lr);
        }

        EpochStats stats;
        stats.train_mse = loss_sum / static_cast<double>(train_set.size());
        stats.val_rmse = val_rmse_now();
        stats.lr = lr;
        history.epochs.push_back(stats);

        if (!history.threshold_epoch && stats.val_rmse < config.rmse_log_threshold)
            history.threshold_epoch = epoch;

        if (stats.val_rmse < best_rmse) {
            best_rmse = stats.val_rmse;
            history.best_epoch = epoch;
            best_weights.clear();
            for (const auto& b : params.ps.blocks()) best_weights.push_back(b.value);
        } else if (epoch - history.best_epoch >= config.patience) {
            history.stop_reason = "early_stop";
            break;
        }
    }

    for (std::size_t i = 0; i < best_weights.size(); ++i)
        params.ps.block(static_cast<int>(i)).value = best_weights[i];
    RegressorModel model = params.to_model(convention);
    return {std::move(model), std::move(history)};
}

struct ParityPoint {
    std::string id;
    double measured = 0.0;
    double predicted = 0.0;
};

struct Metrics {
    double rmse = 0.0;
    double mae = 0.0;
    std::vector<ParityPoint> parity;
};

inline Metrics evaluate(const RegressorModel& model, const std::vector<CellRecord>& records,
                        const GrTable& grs) {
    if (records.empty()) throw config_error("evaluate: no records");
    Metrics m;
    double sq = 0.0, ab = 0.0;
    for (const auto& rec : records) {
        const DescriptorVector d = build_descriptor(rec.design, grs, model.convention);
        const double pred = predict(model, d);
        const double r = pred - rec.capacity_mah_g;
        sq += r * r;
        ab += std::fabs(r);
        m.parity.push_back({rec.id, rec.capacity_mah_g, pred});
    }
    m.rmse = std::sqrt(sq / static_cast<double>(records.size()));
    m.mae = ab / static_cast<double>(records.size());
    return m;
}

}  // namespace fgcn
