#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "fgcn/dataset.hpp"
#include "fgcn/errors.hpp"
#include "fgcn/matrix.hpp"
#include "fgcn/rng.hpp"

namespace fgcn {

inline constexpr std::size_t kFlatFeatureCount = kConstituentCount + 2;

// Conventional-model feature vector: 8 mol% values, LiI wt%, separator
// class, all raw.
using FlatFeatures = std::array<double, kFlatFeatureCount>;

inline FlatFeatures flat_features(const FormulationDesign& design) {
    FlatFeatures f{};
    for (std::size_t k = 0; k < kConstituentCount; ++k) f[k] = design.mol_percent[k];
    f[kConstituentCount] = design.loading_wtpct;
    f[kConstituentCount + 1] = static_cast<double>(static_cast<int>(design.separator));
    return f;
}

using FlatExample = std::pair<FlatFeatures, double>;

// ---------------------------------------------------------------------------
// Random forest regression
// ---------------------------------------------------------------------------

struct RfrConfig {
    std::size_t n_trees = 200;
    std::size_t max_depth = 16;
    std::size_t min_leaf = 2;
    std::size_t mtry = 3;  // features tried per split
    std::uint64_t seed = 0;
};

struct TreeNode {
    int split_feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf_mean = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double predict(const FlatFeatures& x) const {
        int idx = 0;
        while (nodes[static_cast<std::size_t>(idx)].split_feature >= 0) {
            const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
            idx = x[static_cast<std::size_t>(n.split_feature)] <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(idx)].leaf_mean;
    }
};

struct ForestModel {
    std::vector<RegressionTree> trees;
    RfrConfig config;
    std::uint64_t train_fingerprint = 0;

    double predict(const FlatFeatures& x) const {
        double sum = 0.0;
        for (const auto& t : trees) sum += t.predict(x);
        return sum / static_cast<double>(trees.size());
    }
};

namespace detail {

struct TreeBuilder {
    const std::vector<FlatExample>& data;
    const RfrConfig& config;
    Rng rng;
    RegressionTree tree;

    double mean_of(const std::vector<std::size_t>& idx) const {
        double s = 0.0;
        for (std::size_t i : idx) s += data[i].second;
        return s / static_cast<double>(idx.size());
    }

    // sum of squared deviations from the mean
    static double sse(double sum, double sumsq, double n) { return sumsq - sum * sum / n; }

    int build(std::vector<std::size_t> idx, std::size_t depth) {
        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.back().leaf_mean = mean_of(idx);

        if (depth >= config.max_depth || idx.size() < 2 * config.min_leaf) return node_id;

        // variance-reduction split over an mtry-subset of features; if the
        // subset offers no valid cut (constant columns), keep scanning the
        // remaining features rather than giving up on the node
        std::vector<std::size_t> features(kFlatFeatureCount);
        std::iota(features.begin(), features.end(), 0);
        rng.shuffle(features);
        const std::size_t tries = std::min(config.mtry, features.size());

        double best_score = std::numeric_limits<double>::infinity();
        int best_feature = -1;
        double best_threshold = 0.0;

        for (std::size_t f = 0; f < features.size(); ++f) {
            if (f >= tries && best_feature >= 0) break;
            const std::size_t feat = features[f];
            std::vector<std::size_t> sorted = idx;
            std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
                if (data[a].first[feat] != data[b].first[feat])
                    return data[a].first[feat] < data[b].first[feat];
                return a < b;
            });

            double left_sum = 0.0, left_sq = 0.0;
            double right_sum = 0.0, right_sq = 0.0;
            for (std::size_t i : sorted) {
                right_sum += data[i].second;
                right_sq += data[i].second * data[i].second;
            }

            for (std::size_t pos = 0; pos + 1 < sorted.size(); ++pos) {
                const double y = data[sorted[pos]].second;
                left_sum += y;
                left_sq += y * y;
                right_sum -= y;
                right_sq -= y * y;
                const double xa = data[sorted[pos]].first[feat];
                const double xb = data[sorted[pos + 1]].first[feat];
                if (xa == xb) continue;  // can only cut between distinct values
                const std::size_t nl = pos + 1, nr = sorted.size() - nl;
                if (nl < config.min_leaf || nr < config.min_leaf) continue;
                const double score = sse(left_sum, left_sq, static_cast<double>(nl)) +
                                     sse(right_sum, right_sq, static_cast<double>(nr));
                if (score < best_score) {
                    best_score = score;
                    best_feature = static_cast<int>(feat);
                    best_threshold = xa + (xb - xa) / 2.0;
                }
            }
        }

        if (best_feature < 0) return node_id;

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx)
            (data[i].first[static_cast<std::size_t>(best_feature)] <= best_threshold ? left_idx : right_idx)
                .push_back(i);
        if (left_idx.empty() || right_idx.empty()) return node_id;

        tree.nodes[static_cast<std::size_t>(node_id)].split_feature = best_feature;
        tree.nodes[static_cast<std::size_t>(node_id)].threshold = best_threshold;
        const int left = build(std::move(left_idx), depth + 1);
        tree.nodes[static_cast<std::size_t>(node_id)].left = left;
        const int right = build(std::move(right_idx), depth + 1);
        tree.nodes[static_cast<std::size_t>(node_id)].right = right;
        return node_id;
    }
};

}  // namespace detail

// Bootstrap-sampled CART trees with variance-reduction splits. Each tree
// draws its own seed from the master seed, so per-tree work is independent
// of evaluation order.
inline ForestModel train_rfr(const std::vector<FlatExample>& data, const RfrConfig& config = {}) {
    if (data.empty()) throw config_error("train_rfr: empty data");
    if (config.n_trees == 0) throw config_error("train_rfr: n_trees must be > 0");
    if (config.min_leaf == 0) throw config_error("train_rfr: min_leaf must be > 0");

    ForestModel model;
    model.config = config;
    model.trees.reserve(config.n_trees);
    for (std::size_t t = 0; t < config.n_trees; ++t) {
        const std::uint64_t tree_seed = fnv1a_bytes(&t, sizeof(t), config.seed ^ 0x9e3779b97f4a7c15ULL);
        Rng boot(tree_seed);
        std::vector<std::size_t> sample(data.size());
        for (auto& s : sample) s = static_cast<std::size_t>(boot.uniform_index(data.size()));
        detail::TreeBuilder builder{data, config, Rng(tree_seed ^ 0x5851f42d4c957f2dULL), {}};
        builder.build(std::move(sample), 0);
        model.trees.push_back(std::move(builder.tree));
    }
    return model;
}

// ---------------------------------------------------------------------------
// Support vector regression (RBF kernel, eps-insensitive, SMO-style updates)
// ---------------------------------------------------------------------------

struct SvrConfig {
    double c = 100.0;
    double epsilon = 5.0;  // tube half-width in mAh/g
    double gamma = 0.1;
    std::size_t max_passes = 2000;
    double tolerance = 1e-3;
    std::uint64_t seed = 0;
};

struct SvrModel {
    std::vector<FlatFeatures> support;  // standardized training inputs
    std::vector<double> beta;           // signed dual coefficients, |beta| <= C
    double bias = 0.0;
    SvrConfig config;
    FlatFeatures feature_mean{};
    FlatFeatures feature_scale{};
    bool converged = false;
    std::uint64_t train_fingerprint = 0;

    double predict(const FlatFeatures& raw) const {
        FlatFeatures x{};
        for (std::size_t k = 0; k < kFlatFeatureCount; ++k)
            x[k] = (raw[k] - feature_mean[k]) / feature_scale[k];
        double out = bias;
        for (std::size_t i = 0; i < support.size(); ++i) {
            if (beta[i] == 0.0) continue;
            out += beta[i] * kernel(support[i], x);
        }
        return out;
    }

    static double kernel_of(const FlatFeatures& a, const FlatFeatures& b, double gamma) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < kFlatFeatureCount; ++k) {
            const double d = a[k] - b[k];
            d2 += d * d;
        }
        return std::exp(-gamma * d2);
    }

    double kernel(const FlatFeatures& a, const FlatFeatures& b) const {
        return kernel_of(a, b, config.gamma);
    }
};

// eps-insensitive dual ascent with pairwise coordinate updates. beta_i and
// beta_j move together under the sum(beta) = 0 constraint; the eps kinks
// make the 1-D objective piecewise quadratic, so each candidate segment is
// solved in closed form and the best feasible point wins.
inline SvrModel train_svr(const std::vector<FlatExample>& data, const SvrConfig& config = {}) {
    if (data.empty()) throw config_error("train_svr: empty data");
    if (!(config.c > 0.0) || !(config.gamma > 0.0))
        throw config_error("train_svr: C and gamma must be > 0");
    if (config.epsilon < 0.0) throw config_error("train_svr: epsilon must be >= 0");

    const std::size_t n = data.size();
    SvrModel model;
    model.config = config;

    // z-score standardization from the training split; constant features keep
    // scale 1 so they contribute nothing to the RBF distance
    for (std::size_t k = 0; k < kFlatFeatureCount; ++k) {
        double mean = 0.0;
        for (const auto& [x, y] : data) mean += x[k];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& [x, y] : data) var += (x[k] - mean) * (x[k] - mean);
        var /= static_cast<double>(n);
        model.feature_mean[k] = mean;
        model.feature_scale[k] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    model.support.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < kFlatFeatureCount; ++k)
            model.support[i][k] = (data[i].first[k] - model.feature_mean[k]) / model.feature_scale[k];

    std::vector<double> targets(n);
    for (std::size_t i = 0; i < n; ++i) targets[i] = data[i].second;

    // bias starts at the median target; with data inside the tube this is
    // already KKT-feasible
    {
        std::vector<double> sorted = targets;
        std::sort(sorted.begin(), sorted.end());
        model.bias = sorted[sorted.size() / 2];
    }

    Matrix kernel_matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double k = SvrModel::kernel_of(model.support[i], model.support[j], config.gamma);
            kernel_matrix(i, j) = k;
            kernel_matrix(j, i) = k;
        }

    model.beta.assign(n, 0.0);
    std::vector<double> fhat(n, 0.0);  // predictions without the bias term

    // KKT as feasible bias intervals. With E = fhat - y, each point allows
    // bias in [blo, bhi]:
    //   beta = 0        ->  [-eps - E, eps - E]
    //   0 < beta < C    ->  bias = -eps - E exactly
    //   beta = C        ->  bias <= -eps - E
    //   -C < beta < 0   ->  bias = eps - E exactly
    //   beta = -C       ->  bias >= eps - E
    constexpr double kBoxEdge = 1e-9;
    const double inf = std::numeric_limits<double>::infinity();
    auto bias_interval = [&](std::size_t k) {
        const double e = fhat[k] - targets[k];
        const double b = model.beta[k];
        double blo = -inf, bhi = inf;
        if (b >= config.c - kBoxEdge * config.c) {
            bhi = -config.epsilon - e;
        } else if (b <= -config.c + kBoxEdge * config.c) {
            blo = config.epsilon - e;
        } else if (b > kBoxEdge) {
            blo = bhi = -config.epsilon - e;
        } else if (b < -kBoxEdge) {
            blo = bhi = config.epsilon - e;
        } else {
            blo = -config.epsilon - e;
            bhi = config.epsilon - e;
        }
        return std::pair<double, double>{blo, bhi};
    };

    model.converged = false;
    for (std::size_t pass = 0; pass < config.max_passes; ++pass) {
        // maximal violating pair: the point demanding the largest bias vs
        // the point demanding the smallest
        std::vector<std::pair<double, double>> intervals(n);
        double max_blo = -inf, min_bhi = inf;
        for (std::size_t k = 0; k < n; ++k) {
            intervals[k] = bias_interval(k);
            max_blo = std::max(max_blo, intervals[k].first);
            min_bhi = std::min(min_bhi, intervals[k].second);
        }
        if (max_blo - min_bhi <= config.tolerance) {
            model.converged = true;
            model.bias = 0.5 * (std::max(max_blo, -1e12) + std::min(min_bhi, 1e12));
            break;
        }

        // candidate pairs by violation, skipping curvature-degenerate
        // duplicates
        std::vector<std::size_t> ups(n), downs(n);
        std::iota(ups.begin(), ups.end(), 0);
        std::iota(downs.begin(), downs.end(), 0);
        std::sort(ups.begin(), ups.end(), [&](std::size_t a, std::size_t b) {
            if (intervals[a].first != intervals[b].first) return intervals[a].first > intervals[b].first;
            return a < b;
        });
        std::sort(downs.begin(), downs.end(), [&](std::size_t a, std::size_t b) {
            if (intervals[a].second != intervals[b].second) return intervals[a].second < intervals[b].second;
            return a < b;
        });

        std::size_t i = n, j = n;
        for (std::size_t u = 0; u < n && i == n; ++u) {
            for (std::size_t d = 0; d < n; ++d) {
                const std::size_t cu = ups[u], cd = downs[d];
                if (cu == cd) continue;
                if (intervals[cu].first - intervals[cd].second <= config.tolerance) break;
                const double curvature =
                    kernel_matrix(cu, cu) + kernel_matrix(cd, cd) - 2.0 * kernel_matrix(cu, cd);
                if (curvature > 1e-12) {
                    i = cu;
                    j = cd;
                    break;
                }
            }
        }
        if (i == n) break;  // only duplicate pairs violate; cannot improve

        // minimize over t = beta_i with beta_i + beta_j fixed:
        //   0.5*curv*dt^2 + (E_i - E_j)*dt + eps*(|t| - |beta_i|) + eps*(|sum - t| - |beta_j|)
        const double curvature = kernel_matrix(i, i) + kernel_matrix(j, j) - 2.0 * kernel_matrix(i, j);
        const double bi = model.beta[i], bj = model.beta[j];
        const double sum = bi + bj;
        const double lo = std::max(-config.c, sum - config.c);
        const double hi = std::min(config.c, config.c + sum);
        const double e_gap = (fhat[i] - targets[i]) - (fhat[j] - targets[j]);

        double best_t = bi;
        double best_obj = 0.0;
        auto consider = [&](double t) {
            t = std::clamp(t, lo, hi);
            const double dt = t - bi;
            const double obj = 0.5 * curvature * dt * dt + e_gap * dt +
                               config.epsilon * (std::fabs(t) - std::fabs(bi)) +
                               config.epsilon * (std::fabs(sum - t) - std::fabs(bj));
            if (obj < best_obj) {
                best_obj = obj;
                best_t = t;
            }
        };
        // segment minima (one per sign combination), kinks and box corners
        for (double si : {-1.0, 1.0})
            for (double sj : {-1.0, 1.0}) consider(bi - (e_gap + config.epsilon * (si - sj)) / curvature);
        consider(0.0);
        consider(sum);
        consider(lo);
        consider(hi);

        const double delta = best_t - bi;
        if (std::fabs(delta) < 1e-14) break;  // numerically stalled
        model.beta[i] = best_t;
        model.beta[j] = sum - best_t;
        for (std::size_t k = 0; k < n; ++k)
            fhat[k] += delta * (kernel_matrix(i, k) - kernel_matrix(j, k));
    }

    if (!model.converged) {
        // best feasible bias for the current coefficients
        double max_blo = -inf, min_bhi = inf;
        for (std::size_t k = 0; k < n; ++k) {
            const auto [blo, bhi] = bias_interval(k);
            max_blo = std::max(max_blo, blo);
            min_bhi = std::min(min_bhi, bhi);
        }
        model.bias = 0.5 * (std::max(max_blo, -1e12) + std::min(min_bhi, 1e12));
    }

    return model;
}

// Worst per-point KKT violation of a trained SVR against its training data;
// zero (up to the solver tolerance) at reported convergence.
inline double svr_kkt_residual(const SvrModel& model, const std::vector<FlatExample>& data) {
    const double eps = model.config.epsilon;
    const double c = model.config.c;
    double worst = 0.0;
    for (std::size_t k = 0; k < data.size(); ++k) {
        FlatFeatures x{};
        for (std::size_t d = 0; d < kFlatFeatureCount; ++d)
            x[d] = (data[k].first[d] - model.feature_mean[d]) / model.feature_scale[d];
        double fhat = 0.0;
        for (std::size_t i = 0; i < model.support.size(); ++i) {
            if (model.beta[i] == 0.0) continue;
            fhat += model.beta[i] * SvrModel::kernel_of(model.support[i], x, model.config.gamma);
        }
        const double e = fhat + model.bias - data[k].second;
        const double b = model.beta[k];
        double v = 0.0;
        if (b >= c - 1e-9 * c) {
            v = std::max(0.0, e + eps);  // wants e <= -eps
        } else if (b <= -c + 1e-9 * c) {
            v = std::max(0.0, eps - e);  // wants e >= eps
        } else if (b > 1e-9) {
            v = std::fabs(e + eps);
        } else if (b < -1e-9) {
            v = std::fabs(e - eps);
        } else {
            v = std::max(0.0, std::fabs(e) - eps);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Cross-model comparison
// ---------------------------------------------------------------------------

struct MaeEntry {
    std::string model;
    double mae = 0.0;
    std::string hyperparameters_json;
};

template <typename PredictFn>
inline double mae_of(PredictFn&& fn, const std::vector<CellRecord>& records) {
    double acc = 0.0;
    for (const auto& r : records) acc += std::fabs(fn(r) - r.capacity_mah_g);
    return acc / static_cast<double>(records.size());
}

struct ComparedModel {
    std::string name;
    std::uint64_t train_fingerprint = 0;
    std::function<double(const CellRecord&)> predict;
    std::string hyperparameters_json;
};

// MAE per model over the shared test records, ascending. The models must
// carry the same (nonzero) training-split fingerprint.
inline std::vector<MaeEntry> compare(const std::vector<ComparedModel>& models,
                                     const std::vector<CellRecord>& test) {
    if (models.empty()) throw config_error("compare: no models");
    if (test.empty()) throw config_error("compare: no test records");
    for (const auto& m : models) {
        if (m.train_fingerprint == 0)
            throw protocol_error("compare: model '" + m.name + "' has no training-split fingerprint");
        if (m.train_fingerprint != models.front().train_fingerprint)
            throw protocol_error("compare: model '" + m.name + "' was trained on a different split than '" +
                                 models.front().name + "'");
    }
    std::vector<MaeEntry> out;
    for (const auto& m : models)
        out.push_back({m.name, mae_of([&](const CellRecord& r) { return m.predict(r); }, test),
                       m.hyperparameters_json});
    std::sort(out.begin(), out.end(), [](const MaeEntry& a, const MaeEntry& b) {
        if (a.mae != b.mae) return a.mae < b.mae;
        return a.model < b.model;
    });
    return out;
}

}  // namespace fgcn
