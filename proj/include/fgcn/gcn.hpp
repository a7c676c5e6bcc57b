#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fgcn/adam.hpp"
#include "fgcn/constituents.hpp"
#include "fgcn/csv.hpp"
#include "fgcn/errors.hpp"
#include "fgcn/featurize.hpp"
#include "fgcn/matrix.hpp"
#include "fgcn/rng.hpp"
#include "fgcn/tape.hpp"

namespace fgcn {

inline constexpr std::size_t kGcnHiddenWidth = 64;
inline constexpr std::size_t kGrWidth = 100;
inline constexpr std::size_t kHeadHiddenWidth = 32;
inline constexpr std::size_t kPretrainLabelCount = 3;

using GraphRepresentation = std::vector<double>;  // length kGrWidth

struct PretrainLabel {
    double homo_ev = 0.0;
    double lumo_ev = 0.0;
    double dipole_debye = 0.0;

    std::vector<double> to_vector() const { return {homo_ev, lumo_ev, dipole_debye}; }
};

struct PretrainExample {
    MolecularGraph graph;
    std::vector<double> labels;  // kPretrainLabelCount values
};

// Graph convolution encoder: two conv layers H' = ReLU(A~ H W) followed by a
// mean-pool readout, plus the multi-task pretraining head that is unused
// once the encoder is frozen.
struct GcnModel {
    Matrix conv1;  // kNodeFeatureWidth x kGcnHiddenWidth
    Matrix conv2;  // kGcnHiddenWidth x kGrWidth
    Matrix head_w1, head_b1;  // kGrWidth x kHeadHiddenWidth
    Matrix head_w2, head_b2;  // kHeadHiddenWidth x kPretrainLabelCount
    std::array<double, kPretrainLabelCount> label_mean = {0.0, 0.0, 0.0};
    std::array<double, kPretrainLabelCount> label_std = {1.0, 1.0, 1.0};
    bool frozen = false;
    std::uint64_t version = 0;

    std::uint64_t weight_hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const Matrix* m : {&conv1, &conv2, &head_w1, &head_b1, &head_w2, &head_b2})
            h = fnv1a_bytes(m->data(), m->size() * sizeof(double), h);
        h = fnv1a_bytes(label_mean.data(), sizeof(label_mean), h);
        h = fnv1a_bytes(label_std.data(), sizeof(label_std), h);
        return h;
    }
};

struct PretrainConfig {
    std::uint64_t seed = 0;
    double lr = 1e-3;
    std::size_t max_epochs = 2000;
    std::size_t patience = 200;  // epochs without train-loss improvement
};

struct PretrainHistory {
    std::vector<double> loss;  // standardized-label MSE per epoch
    std::size_t best_epoch = 0;
    std::string stop_reason;
};

// Trainable parameter view used by pretrain() and by gradient checks.
struct GcnParams {
    ParamSet ps;
    int conv1, conv2, head_w1, head_b1, head_w2, head_b2;

    static GcnParams init(Rng& rng) {
        GcnParams p;
        p.conv1 = p.ps.add("gcn.conv1", glorot_uniform(kNodeFeatureWidth, kGcnHiddenWidth, rng));
        p.conv2 = p.ps.add("gcn.conv2", glorot_uniform(kGcnHiddenWidth, kGrWidth, rng));
        p.head_w1 = p.ps.add("gcn.head_w1", glorot_uniform(kGrWidth, kHeadHiddenWidth, rng));
        p.head_b1 = p.ps.add("gcn.head_b1", Matrix(1, kHeadHiddenWidth));
        p.head_w2 = p.ps.add("gcn.head_w2", glorot_uniform(kHeadHiddenWidth, kPretrainLabelCount, rng));
        p.head_b2 = p.ps.add("gcn.head_b2", Matrix(1, kPretrainLabelCount));
        return p;
    }
};

namespace detail {

inline Matrix relu(Matrix m) {
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m.data()[i] < 0.0) m.data()[i] = 0.0;
    return m;
}

inline Var gr_on_tape(GradientTape& tape, GcnParams& params, const FeaturizedGraph& fg) {
    Var adj = tape.constant(fg.adjacency);
    Var h = tape.constant(fg.node_features);
    Var h1 = tape.relu(tape.matmul(adj, tape.matmul(h, tape.parameter(params.ps, params.conv1))));
    Var h2 = tape.relu(tape.matmul(adj, tape.matmul(h1, tape.parameter(params.ps, params.conv2))));
    return tape.mean_rows(h2);
}

}  // namespace detail

// Full-batch pretraining loss (mean standardized-label MSE over the corpus).
// `standardized` holds one 1x3 target row per example. When `with_grad`,
// gradients are left in params.ps. `relu_mask` (optional) receives the
// activation-pattern hash of this evaluation.
inline double gcn_pretrain_loss(GcnParams& params, const std::vector<FeaturizedGraph>& graphs,
                                const std::vector<Matrix>& standardized, bool with_grad,
                                std::uint64_t* relu_mask = nullptr) {
    GradientTape tape;
    std::optional<Var> total;
    const double inv = 1.0 / static_cast<double>(graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        Var gr = detail::gr_on_tape(tape, params, graphs[i]);
        Var hidden = tape.relu(
            tape.affine(gr, tape.parameter(params.ps, params.head_w1), tape.parameter(params.ps, params.head_b1)));
        Var pred = tape.affine(hidden, tape.parameter(params.ps, params.head_w2),
                               tape.parameter(params.ps, params.head_b2));
        Var term = tape.scale(tape.mse(pred, tape.constant(standardized[i])), inv);
        total = total ? tape.add(*total, term) : term;
    }
    const double value = tape.scalar(*total);
    if (relu_mask) *relu_mask = tape.relu_mask_hash();
    if (with_grad) tape.backward(*total);
    return value;
}

// Trains the encoder end to end on quantum-chemical (or stand-in) labels,
// standardizing them to zero mean / unit variance, then freezes it.
inline std::pair<GcnModel, PretrainHistory> pretrain(const std::vector<PretrainExample>& corpus,
                                                     const PretrainConfig& config = {}) {
    if (corpus.empty()) throw config_error("pretrain: empty corpus");
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (corpus[i].labels.size() != kPretrainLabelCount)
            throw config_error("pretrain: example " + std::to_string(i) + " has " +
                               std::to_string(corpus[i].labels.size()) + " labels, expected " +
                               std::to_string(kPretrainLabelCount));
        for (double v : corpus[i].labels)
            if (!std::isfinite(v))
                throw config_error("pretrain: non-finite label in example " + std::to_string(i));
    }

    std::array<double, kPretrainLabelCount> mean{}, stddev{};
    const double n = static_cast<double>(corpus.size());
    for (const auto& ex : corpus)
        for (std::size_t k = 0; k < kPretrainLabelCount; ++k) mean[k] += ex.labels[k] / n;
    for (const auto& ex : corpus)
        for (std::size_t k = 0; k < kPretrainLabelCount; ++k) {
            const double d = ex.labels[k] - mean[k];
            stddev[k] += d * d / n;
        }
    for (auto& s : stddev) s = s > 0.0 ? std::sqrt(s) : 1.0;

    std::vector<FeaturizedGraph> graphs;
    std::vector<Matrix> standardized;
    graphs.reserve(corpus.size());
    standardized.reserve(corpus.size());
    for (const auto& ex : corpus) {
        graphs.push_back(featurize(ex.graph));
        Matrix t(1, kPretrainLabelCount);
        for (std::size_t k = 0; k < kPretrainLabelCount; ++k)
            t(0, k) = (ex.labels[k] - mean[k]) / stddev[k];
        standardized.push_back(std::move(t));
    }

    Rng rng(config.seed);
    GcnParams params = GcnParams::init(rng);
    AdamState adam = AdamState::for_params(params.ps);

    PretrainHistory history;
    double best = std::numeric_limits<double>::infinity();
    history.stop_reason = "max_epochs";
    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        const double loss = gcn_pretrain_loss(params, graphs, standardized, true);
        if (!std::isfinite(loss))
            throw numeric_error("pretrain: loss diverged at epoch " + std::to_string(epoch));
        adam_step(params.ps, adam, config.lr);
        history.loss.push_back(loss);
        if (loss < best) {
            best = loss;
            history.best_epoch = epoch;
        } else if (epoch - history.best_epoch > config.patience) {
            history.stop_reason = "plateau";
            break;
        }
    }

    GcnModel model;
    model.conv1 = params.ps.block(params.conv1).value;
    model.conv2 = params.ps.block(params.conv2).value;
    model.head_w1 = params.ps.block(params.head_w1).value;
    model.head_b1 = params.ps.block(params.head_b1).value;
    model.head_w2 = params.ps.block(params.head_w2).value;
    model.head_b2 = params.ps.block(params.head_b2).value;
    model.label_mean = mean;
    model.label_std = stddev;
    model.frozen = true;
    model.version = model.weight_hash();
    return {std::move(model), std::move(history)};
}

// Inference-path forward pass: H' = ReLU(A~ H W) twice, then column-wise
// mean over the node rows.
inline GraphRepresentation gcn_forward(const FeaturizedGraph& fg, const GcnModel& model) {
    if (fg.node_features.cols() != model.conv1.rows())
        throw shape_error("gcn_forward: node features are " + fg.node_features.dims() +
                          " but conv1 is " + model.conv1.dims());
    const Matrix h1 = detail::relu(matmul(fg.adjacency, matmul(fg.node_features, model.conv1)));
    const Matrix h2 = detail::relu(matmul(fg.adjacency, matmul(h1, model.conv2)));
    GraphRepresentation gr(h2.cols(), 0.0);
    const double inv = 1.0 / static_cast<double>(h2.rows());
    for (std::size_t r = 0; r < h2.rows(); ++r)
        for (std::size_t c = 0; c < h2.cols(); ++c) gr[c] += h2(r, c) * inv;
    return gr;
}

// Session cache of constituent encodings; keyed by (model version, name) so
// a model swap cannot serve stale vectors. Safe for concurrent use.
class GrCache {
  public:
    GraphRepresentation get_or_compute(const Constituent& c, const GcnModel& model) {
        if (!model.frozen)
            throw state_error("encode_constituent: model is not frozen; screening must not use a moving encoder");
        const std::pair<std::uint64_t, std::string> key{model.version, c.name};
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        GraphRepresentation gr = gcn_forward(featurize(c.graph), model);
        for (double v : gr)
            if (!std::isfinite(v)) throw numeric_error("encode_constituent: non-finite encoding for " + c.name);
        std::lock_guard<std::mutex> lock(mutex_);
        return cache_.emplace(key, std::move(gr)).first->second;
    }

  private:
    std::mutex mutex_;
    std::map<std::pair<std::uint64_t, std::string>, GraphRepresentation> cache_;
};

inline GraphRepresentation encode_constituent(const Constituent& c, const GcnModel& model, GrCache& cache) {
    return cache.get_or_compute(c, model);
}

using GrTable = std::array<GraphRepresentation, kConstituentCount>;

// Eagerly encodes the whole registry; the result is what descriptor
// assembly consumes.
inline GrTable encode_registry(const GcnModel& model) {
    GrCache cache;
    GrTable table;
    const auto& registry = canonical_constituents();
    for (std::size_t i = 0; i < kConstituentCount; ++i)
        table[i] = encode_constituent(registry[i], model, cache);
    return table;
}

// Pretraining corpus CSV: columns smiles, homo_ev, lumo_ev, dipole_debye.
inline std::vector<PretrainExample> load_pretrain_corpus(const std::string& path) {
    const CsvTable table = read_csv(path);
    const std::size_t smiles_col = table.column_index("smiles");
    const std::array<std::size_t, kPretrainLabelCount> label_cols = {
        table.column_index("homo_ev"), table.column_index("lumo_ev"), table.column_index("dipole_debye")};
    std::vector<PretrainExample> corpus;
    corpus.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        PretrainExample ex;
        try {
            ex.graph = parse_smiles(row[smiles_col]);
            for (std::size_t k = 0; k < kPretrainLabelCount; ++k)
                ex.labels.push_back(parse_double(row[label_cols[k]]));
        } catch (const error& e) {
            throw config_error(path + ": row " + std::to_string(r + 1) + ": " + e.what());
        }
        corpus.push_back(std::move(ex));
    }
    return corpus;
}

}  // namespace fgcn
