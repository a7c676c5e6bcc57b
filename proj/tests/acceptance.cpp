// Acceptance suite: one PASS/FAIL line per criterion. Criteria 1-9 gate the
// build; 10-12 run only when a measured dataset is supplied and are reported
// without gating.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fgcn/artifact.hpp"
#include "fgcn/baselines.hpp"
#include "fgcn/candidate_gen.hpp"
#include "fgcn/dataset.hpp"
#include "fgcn/descriptor.hpp"
#include "fgcn/fd_check.hpp"
#include "fgcn/gcn.hpp"
#include "fgcn/interpret.hpp"
#include "fgcn/regressor.hpp"
#include "fgcn/reports.hpp"
#include "fgcn/screening.hpp"
#include "fgcn/synthetic.hpp"

using namespace fgcn;

namespace {

int g_failures = 0;

struct ResultLine {
    int criterion;
    std::string text;
};
std::vector<ResultLine> g_lines;

void emit(int criterion, const std::string& line) {
    g_lines.push_back({criterion, line});
    std::fprintf(stderr, "%s\n", line.c_str());  // progress; ordered lines go to stdout at the end
    std::fflush(stderr);
}

void report(int criterion, const std::string& name, bool ok, const std::string& detail) {
    emit(criterion, std::string("[") + (ok ? "PASS" : "FAIL") + "] " + name +
                        (detail.empty() ? "" : ": " + detail));
    if (!ok) ++g_failures;
}

void skip(int criterion, const std::string& name, const std::string& reason) {
    emit(criterion, "[SKIP] " + name + ": " + reason);
}

// Central-difference check that rejects evaluation points where a ReLU mask
// flips between base and perturbed evaluations; on such points the 1e-4-step
// central difference is not a valid derivative oracle. Returns nullopt when
// the point is invalid, so the caller redraws the configuration; a genuine
// gradient bug fails on mask-stable configurations and is never masked.
std::optional<double> fd_check_mask_guarded(const std::function<double(bool, std::uint64_t*)>& loss,
                                            ParamSet& params, double eps, std::size_t coords_per_block,
                                            std::uint64_t sample_seed) {
    std::uint64_t base_mask = 0;
    const double base = loss(true, &base_mask);
    if (!std::isfinite(base)) throw numeric_error("fd: non-finite base loss");

    std::vector<Matrix> analytic;
    for (const auto& b : params.blocks()) analytic.push_back(b.grad);

    Rng rng(sample_seed);
    double worst = 0.0;
    for (std::size_t bi = 0; bi < params.block_count(); ++bi) {
        auto& block = params.block(static_cast<int>(bi));
        const std::size_t n = block.value.size();
        for (std::size_t k = 0; k < std::min(coords_per_block, n); ++k) {
            const std::size_t i = coords_per_block >= n ? k : rng.uniform_index(n);
            double* slot = block.value.data() + i;
            const double saved = *slot;
            std::uint64_t mask_plus = 0, mask_minus = 0;
            *slot = saved + eps;
            const double plus = loss(false, &mask_plus);
            *slot = saved - eps;
            const double minus = loss(false, &mask_minus);
            *slot = saved;
            if (mask_plus != base_mask || mask_minus != base_mask) return std::nullopt;
            const double cd = (plus - minus) / (2.0 * eps);
            const double a = analytic[bi].data()[i];
            const double denom = std::max({std::fabs(a), std::fabs(cd), 1e-12});
            worst = std::max(worst, std::fabs(a - cd) / denom);
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// criterion 1: gradient correctness
// ---------------------------------------------------------------------------

void criterion_gradients() {
    const double eps = 1e-4;
    double worst = 0.0;
    std::size_t redraws = 0;
    bool ok = true;

    for (std::size_t cfg = 0; cfg < 25 && ok; ++cfg) {
        std::optional<double> err;
        for (std::uint64_t salt = 0; salt < 8 && !err; ++salt) {
            const std::uint64_t s = cfg * 17 + salt;
            const auto corpus = corpus_to_examples(make_pretrain_corpus(5, 1000 + s));
            std::vector<FeaturizedGraph> graphs;
            std::vector<Matrix> targets;
            for (const auto& ex : corpus) {
                graphs.push_back(featurize(ex.graph));
                targets.push_back(Matrix(1, 3, {ex.labels[0], ex.labels[1], ex.labels[2]}));
            }
            Rng rng(2000 + s);
            GcnParams params = GcnParams::init(rng);
            err = fd_check_mask_guarded(
                [&](bool g, std::uint64_t* m) { return gcn_pretrain_loss(params, graphs, targets, g, m); },
                params.ps, eps, 20, 3000 + s);
            if (!err) ++redraws;
        }
        if (!err) ok = false;
        else worst = std::max(worst, *err);
    }

    for (std::size_t cfg = 0; cfg < 25 && ok; ++cfg) {
        std::optional<double> err;
        for (std::uint64_t salt = 0; salt < 8 && !err; ++salt) {
            const std::uint64_t s = cfg * 17 + salt;
            Rng rng(5000 + s);
            GrTable grs;
            for (auto& gr : grs) {
                gr.resize(kGrWidth);
                for (auto& v : gr) v = rng.uniform(-1.0, 1.0);
            }
            FormulationDesign d;
            for (;;) {
                d.mol_percent = detail::sample_composition(rng, 100, 1.0);
                if (d.salt_mol_sum() <= 50.0) break;
            }
            d.loading_wtpct = 30.0 + static_cast<double>(rng.uniform_index(31));
            d.separator = rng.uniform_index(2) ? Separator::Qma : Separator::Celgard;
            const DescriptorVector desc = build_descriptor(d, grs, DescriptorConvention{});
            const double target = rng.uniform(50.0, 300.0);
            RegressorParams params = RegressorParams::init(desc.values.size(), rng);
            err = fd_check_mask_guarded(
                [&](bool g, std::uint64_t* m) {
                    return regressor_example_loss(params, desc.values, target, g, m);
                },
                params.ps, eps, 12, 6000 + s);
            if (!err) ++redraws;
        }
        if (!err) ok = false;
        else worst = std::max(worst, *err);
    }

    ok = ok && worst < 1e-4;
    report(1, "criterion 1: gradient correctness (fd step 1e-4, 25+25 configurations)", ok,
           "max rel err " + format_double(worst) + ", kink redraws " + std::to_string(redraws));
}

// ---------------------------------------------------------------------------
// criterion 2: permutation invariance
// ---------------------------------------------------------------------------

void criterion_permutation(const GcnModel& encoder) {
    double worst = 0.0;

    const MolecularGraph small = parse_smiles("CC(O)N");
    const GraphRepresentation base = gcn_forward(featurize(small), encoder);
    std::vector<std::size_t> perm{0, 1, 2, 3};
    do {
        const GraphRepresentation pg = gcn_forward(featurize(permute_atoms(small, perm)), encoder);
        for (std::size_t c = 0; c < kGrWidth; ++c) worst = std::max(worst, std::fabs(pg[c] - base[c]));
    } while (std::next_permutation(perm.begin(), perm.end()));

    Rng rng(2101);
    for (const Constituent& constituent : canonical_constituents()) {
        const GraphRepresentation ref = gcn_forward(featurize(constituent.graph), encoder);
        std::vector<std::size_t> p(constituent.graph.atoms.size());
        std::iota(p.begin(), p.end(), 0);
        for (int trial = 0; trial < 20; ++trial) {
            rng.shuffle(p);
            const GraphRepresentation pg = gcn_forward(featurize(permute_atoms(constituent.graph, p)), encoder);
            for (std::size_t c = 0; c < kGrWidth; ++c) worst = std::max(worst, std::fabs(pg[c] - ref[c]));
        }
    }

    report(2, "criterion 2: permutation invariance (24 orders + 20 per constituent)", worst <= 1e-9,
           "max GR deviation " + format_double(worst));
}

// ---------------------------------------------------------------------------
// criterion 3: descriptor contract
// ---------------------------------------------------------------------------

void criterion_descriptor(const GrTable& grs) {
    bool ok = true;
    std::string detail;

    DescriptorConvention conv;
    FormulationDesign iv;
    iv.mol_percent = {4, 6, 3, 1, 68, 2, 10, 6};
    iv.loading_wtpct = 44.0;
    iv.separator = Separator::Qma;
    const DescriptorVector d = build_descriptor(iv, grs, conv);
    if (d.values.size() != 802) {
        ok = false;
        detail = "length " + std::to_string(d.values.size());
    }

    FormulationDesign zeroed = iv;
    zeroed.mol_percent = {4, 0, 9, 1, 68, 2, 10, 6};
    const DescriptorVector dz = build_descriptor(zeroed, grs, conv);
    for (std::size_t c = 0; c < kGrWidth; ++c)
        if (dz.values[kGrWidth + c] != 0.0) ok = false;

    const double expected_scale[] = {0.04, 0.06, 0.03, 0.01, 0.68, 0.02, 0.10, 0.06};
    double worst_scale = 0.0;
    for (std::size_t k = 0; k < kConstituentCount; ++k)
        for (std::size_t c = 0; c < kGrWidth; ++c) {
            if (grs[k][c] == 0.0) continue;
            const double scale = d.values[k * kGrWidth + c] / grs[k][c];
            worst_scale = std::max(worst_scale, std::fabs(scale - expected_scale[k]) / expected_scale[k]);
        }
    if (worst_scale > 1e-12) ok = false;

    // linearity: alpha-scaling one constituent's mol% scales exactly its segment
    const double alpha = 1.75;
    FormulationDesign scaled = iv;
    scaled.mol_percent[0] *= alpha;
    scaled.mol_percent[4] -= iv.mol_percent[0] * (alpha - 1.0);
    const DescriptorVector ds = build_descriptor(scaled, grs, conv);
    double worst_lin = 0.0;
    for (std::size_t c = 0; c < kGrWidth; ++c) {
        const double want = alpha * d.values[c];
        const double rel = want == 0.0 ? std::fabs(ds.values[c])
                                       : std::fabs(ds.values[c] - want) / std::fabs(want);
        worst_lin = std::max(worst_lin, rel);
    }
    if (worst_lin > 1e-12) ok = false;

    if (ok)
        detail = "length 802, zero segments exact, scale err " + format_double(worst_scale) +
                 ", linearity err " + format_double(worst_lin);
    report(3, "criterion 3: descriptor contract (length, zero segments, reference-formulation scales, linearity)", ok,
           detail);
}

// ---------------------------------------------------------------------------
// criterion 4: candidate pool
// ---------------------------------------------------------------------------

std::vector<GeneratedDesign> criterion_pool(std::uint64_t seed) {
    GenConfig cfg;  // defaults: 2410 x 7 x 2
    cfg.seed = seed;
    const auto pool = generate(cfg);

    bool ok = pool.size() == 33740;
    double worst_sum = 0.0;
    bool cap_ok = true;
    for (const auto& g : pool) {
        worst_sum = std::max(worst_sum, std::fabs(g.design.mol_sum() - 100.0));
        if (g.design.salt_mol_sum() > 50.0 + 1e-9) cap_ok = false;
    }
    ok = ok && worst_sum <= 1e-9 && cap_ok;
    report(4, "criterion 4: candidate pool (2410 x 7 x 2 = 33740, simplex, salt cap)", ok,
           "size " + std::to_string(pool.size()) + ", max sum dev " + format_double(worst_sum) +
               (cap_ok ? ", cap respected" : ", CAP VIOLATED"));
    return pool;
}

// ---------------------------------------------------------------------------
// criterion 5: Spearman oracle equivalence
// ---------------------------------------------------------------------------

double pearson_on_ranks_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::size_t below = 0, equal = 0;
            for (std::size_t j = 0; j < v.size(); ++j) {
                if (v[j] < v[i]) ++below;
                if (v[j] == v[i]) ++equal;
            }
            out[i] = static_cast<double>(below) + (static_cast<double>(equal) + 1.0) / 2.0;
        }
        return out;
    };
    const auto rx = ranks(x), ry = ranks(y);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i] / static_cast<double>(x.size());
        my += ry[i] / static_cast<double>(x.size());
    }
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
        sxy += (rx[i] - mx) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::nan("");
    return sxy / std::sqrt(sxx * syy);
}

void criterion_spearman() {
    bool ok = true;
    double worst = 0.0;

    std::vector<double> x{1, 2, 3, 4, 5, 6, 7}, y = x;
    std::size_t perms = 0;
    do {
        double d2 = 0.0;
        for (std::size_t i = 0; i < 7; ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
        const double closed = 1.0 - 6.0 * d2 / (7.0 * 48.0);
        const auto rho = spearman(x, y);
        if (!rho) ok = false;
        else worst = std::max(worst, std::fabs(*rho - closed));
        ++perms;
    } while (std::next_permutation(y.begin(), y.end()));
    if (perms != 5040) ok = false;
    const double worst_exact = worst;

    Rng rng(777);
    double worst_tied = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 3 + rng.uniform_index(15);
        std::vector<double> a(n), b(n);
        for (auto& v : a) v = static_cast<double>(rng.uniform_index(6));
        for (auto& v : b) v = static_cast<double>(rng.uniform_index(6));
        const double oracle = pearson_on_ranks_oracle(a, b);
        const auto rho = spearman(a, b);
        if (std::isnan(oracle)) {
            if (rho.has_value()) ok = false;
        } else if (!rho) {
            ok = false;
        } else {
            worst_tied = std::max(worst_tied, std::fabs(*rho - oracle));
        }
    }
    if (worst_tied > 1e-12) ok = false;

    const auto pinned = spearman({1, 2, 3}, {1, 3, 2});
    if (!pinned || std::fabs(*pinned - 0.5) > 1e-15) ok = false;

    // closed-form no-ties formula is exact in rationals; allow rounding only
    if (worst_exact > 1e-12) ok = false;

    report(5, "criterion 5: Spearman oracle equivalence (5040 permutations, 1000 tied vectors, rho=0.5)", ok,
           "perm err " + format_double(worst_exact) + ", tied err " + format_double(worst_tied));
}

// ---------------------------------------------------------------------------
// criterion 6 + 7: synthetic end-to-end and baseline sanity
// ---------------------------------------------------------------------------

struct EndToEnd {
    GcnModel encoder;
    GrTable grs;
    DescriptorConvention convention;
    RegressorModel model;
    Split split;
    std::vector<CellRecord> records;
};

EndToEnd run_end_to_end(const std::vector<GeneratedDesign>& pool) {
    const std::uint64_t seed = 101;
    SyntheticOracle oracle;  // sigma = 20, inside the typical 15-30 mAh/g variation band

    EndToEnd e2e;
    e2e.records = make_dataset(oracle, 93, seed);

    const auto corpus = corpus_to_examples(make_pretrain_corpus(50, seed + 1));
    PretrainConfig pcfg;
    pcfg.seed = seed + 2;
    auto [encoder, pretrain_history] = pretrain(corpus, pcfg);
    e2e.encoder = std::move(encoder);
    const bool pretrain_ok = pretrain_history.loss.back() < 0.1;

    e2e.grs = encode_registry(e2e.encoder);
    e2e.convention.gcn_version = e2e.encoder.version;

    e2e.split = split_random(e2e.records, 0.2, seed + 3);
    auto to_examples = [&](const std::vector<CellRecord>& rs) {
        std::vector<TrainingExample> out;
        for (const auto& r : rs)
            out.emplace_back(build_descriptor(r.design, e2e.grs, e2e.convention), r.capacity_mah_g);
        return out;
    };

    TrainConfig tcfg;
    tcfg.seed = seed + 4;
    tcfg.initial_lr = 0.01;
    tcfg.phase1_epochs = 60;
    tcfg.phase_lrs = {0.01 / 3.0};
    tcfg.phase_epochs = 60;
    tcfg.max_epochs = 150;
    tcfg.patience = 50;
    auto [model, history] = train(to_examples(e2e.split.train), to_examples(e2e.split.test),
                                  e2e.convention, tcfg);
    e2e.model = std::move(model);
    e2e.model.train_fingerprint = split_fingerprint(e2e.split.train);
    const double val_rmse = history.epochs[history.best_epoch].val_rmse;

    // held-out predictions vs the noiseless oracle: >= 95% within 3 sigma
    std::size_t within = 0;
    for (const auto& rec : e2e.split.test) {
        const double pred = predict(e2e.model, build_descriptor(rec.design, e2e.grs, e2e.convention));
        if (std::fabs(pred - oracle.truth(rec.design)) <= 3.0 * oracle.noise_sigma) ++within;
    }
    const double within_frac = static_cast<double>(within) / static_cast<double>(e2e.split.test.size());

    const auto results = screen(e2e.model, e2e.grs, pool);
    std::vector<double> preds, truths;
    preds.reserve(results.size());
    for (const auto& r : results) {
        preds.push_back(r.predicted_mah_g);
        truths.push_back(oracle.truth(r.design));
    }
    const auto pool_rho = spearman(preds, truths);

    // SCC on QMA predictions at the 40 wt% loading bin, as the screening
    // analysis does
    std::vector<std::pair<FormulationDesign, double>> rows;
    for (const auto& r : results)
        if (r.design.separator == Separator::Qma) rows.emplace_back(r.design, r.predicted_mah_g);
    const SccReport scc = scc_report(rows, {{"40", 40.0, 40.0}}, {});
    std::string sign_detail;
    bool signs_ok = true;
    for (std::size_t k = 0; k < kConstituentCount; ++k) {
        if (std::fabs(oracle.linear[k]) < oracle.detectability_floor) continue;
        const auto& entry = scc.constituent_rho[k];
        const bool match = entry.rho.has_value() && *entry.rho * oracle.linear[k] > 0.0;
        if (!match) signs_ok = false;
        sign_detail += entry.variable + (match ? "+" : "MISMATCH") + " ";
    }

    const bool ok = pretrain_ok && val_rmse <= 30.0 && within_frac >= 0.95 && pool_rho &&
                    *pool_rho >= 0.6 && signs_ok;
    report(6, "criterion 6: synthetic end-to-end (93 points, RMSE, pool Spearman, SCC signs)", ok,
           "pretrain loss " + format_double(pretrain_history.loss.back()) + ", val RMSE " +
               format_double(val_rmse) + " <= 30, within-3sigma " + format_double(within_frac) +
               " >= 0.95, Spearman " + (pool_rho ? format_double(*pool_rho) : std::string("nan")) +
               " >= 0.6, signs " + sign_detail);
    return e2e;
}

void criterion_baselines(const EndToEnd& e2e) {
    bool ok = true;
    std::string detail;

    // piecewise-constant oracle for the forest
    std::vector<FlatExample> step_train, step_test;
    for (int i = 0; i < 60; ++i) {
        const double xv = static_cast<double>(i) / 59.0;
        FlatFeatures f{};
        f[0] = xv;
        (i % 3 == 0 ? step_test : step_train).emplace_back(f, xv > 0.5 ? 10.0 : 0.0);
    }
    RfrConfig rfr_cfg;
    rfr_cfg.seed = 31;
    rfr_cfg.max_depth = 8;
    rfr_cfg.min_leaf = 1;
    const ForestModel forest = train_rfr(step_train, rfr_cfg);
    double step_mae = 0.0;
    for (const auto& [fx, fy] : step_test) step_mae += std::fabs(forest.predict(fx) - fy);
    step_mae /= static_cast<double>(step_test.size());
    if (step_mae >= 0.5) ok = false;
    detail += "RFR step MAE " + format_double(step_mae) + " < 0.5";

    // interpolation oracle for the SVR
    std::vector<FlatExample> linear;
    for (int i = 0; i <= 12; ++i) {
        FlatFeatures f{};
        f[0] = static_cast<double>(i) / 12.0;
        linear.emplace_back(f, 3.0 * f[0] - 1.0);
    }
    SvrConfig svr_cfg;
    svr_cfg.c = 1000.0;
    svr_cfg.epsilon = 0.01;
    svr_cfg.gamma = 0.5;
    svr_cfg.max_passes = 20000;
    const SvrModel svr = train_svr(linear, svr_cfg);
    double svr_worst = 0.0;
    for (const auto& [fx, fy] : linear) svr_worst = std::max(svr_worst, std::fabs(svr.predict(fx) - fy));
    if (!(svr.converged && svr_worst <= svr_cfg.epsilon + 1e-3)) ok = false;
    detail += ", SVR residual " + format_double(svr_worst) + " <= eps+1e-3";

    // weak ordering on the synthetic dataset, same split as criterion 6
    std::vector<FlatExample> flat_train;
    for (const auto& r : e2e.split.train)
        flat_train.emplace_back(flat_features(r.design), r.capacity_mah_g);
    RfrConfig cmp_cfg;
    cmp_cfg.seed = 32;
    ForestModel rfr = train_rfr(flat_train, cmp_cfg);
    rfr.train_fingerprint = e2e.model.train_fingerprint;

    std::vector<ComparedModel> models;
    models.push_back({"extended-fgcn", e2e.model.train_fingerprint,
                      [&](const CellRecord& r) {
                          return predict(e2e.model, build_descriptor(r.design, e2e.grs, e2e.convention));
                      },
                      "{}"});
    models.push_back({"rfr", rfr.train_fingerprint,
                      [&](const CellRecord& r) { return rfr.predict(flat_features(r.design)); }, "{}"});
    const auto table = compare(models, e2e.split.test);
    double fgcn_mae = 0.0, rfr_mae = 0.0;
    for (const auto& entry : table) {
        if (entry.model == "extended-fgcn") fgcn_mae = entry.mae;
        if (entry.model == "rfr") rfr_mae = entry.mae;
    }
    if (!(fgcn_mae <= rfr_mae + 5.0)) ok = false;
    detail += ", FGCN MAE " + format_double(fgcn_mae) + " <= RFR " + format_double(rfr_mae) + " + 5";

    report(7, "criterion 7: baseline sanity (RFR step oracle, SVR tube, MAE ordering)", ok, detail);
}

// ---------------------------------------------------------------------------
// criterion 8: determinism
// ---------------------------------------------------------------------------

struct PipelineOutputs {
    std::string dataset, corpus, pretrain_history, metrics, parity, train_history, pool, predictions,
        shortlist, scc, quartiles, svg, artifact;

    bool operator==(const PipelineOutputs&) const = default;
};

PipelineOutputs run_reduced_pipeline(std::uint64_t seed) {
    SyntheticOracle oracle;
    PipelineOutputs out;

    const auto records = make_dataset(oracle, 36, seed);
    const auto corpus = make_pretrain_corpus(12, seed + 1);
    out.dataset = dataset_csv(records);
    out.corpus = pretrain_corpus_csv(corpus);

    PretrainConfig pcfg;
    pcfg.seed = seed + 2;
    pcfg.max_epochs = 200;
    auto [encoder, pretrain_history] = pretrain(corpus_to_examples(corpus), pcfg);
    out.pretrain_history = pretrain_history_csv(pretrain_history);

    ModelArtifact artifact = make_artifact(encoder, {seed, 7});
    const GrTable grs = encode_registry(encoder);
    DescriptorConvention conv;
    conv.gcn_version = encoder.version;

    const Split split = split_random(records, 0.25, seed + 3);
    auto to_examples = [&](const std::vector<CellRecord>& rs) {
        std::vector<TrainingExample> ex;
        for (const auto& r : rs) ex.emplace_back(build_descriptor(r.design, grs, conv), r.capacity_mah_g);
        return ex;
    };
    TrainConfig tcfg;
    tcfg.seed = seed + 4;
    tcfg.initial_lr = 0.01;
    tcfg.phase1_epochs = 20;
    tcfg.phase_lrs = {0.004};
    tcfg.phase_epochs = 10;
    tcfg.max_epochs = 30;
    tcfg.patience = 30;
    auto [model, history] = train(to_examples(split.train), to_examples(split.test), conv, tcfg);
    model.train_fingerprint = split_fingerprint(split.train);
    out.train_history = train_history_csv(history);
    out.metrics = metrics_csv({{"train", evaluate(model, split.train, grs)},
                               {"test", evaluate(model, split.test, grs)}});
    out.parity = parity_csv(evaluate(model, split.test, grs));

    attach_regressor(artifact, model);
    out.artifact = artifact.serialize();

    GenConfig gcfg;
    gcfg.n_compositions = 200;
    gcfg.loadings = {35.0, 45.0};
    gcfg.seed = seed + 5;
    const auto pool = generate(gcfg);
    out.pool = pool_csv(pool, gcfg);

    const auto results = screen(model, grs, pool);
    out.predictions = predictions_csv(results);
    out.shortlist = predictions_csv(shortlist(results, 40.0, 45.0, 210.0, 50));

    std::vector<std::pair<FormulationDesign, double>> rows;
    for (const auto& r : results) rows.emplace_back(r.design, r.predicted_mah_g);
    out.scc = scc_csv(scc_report(rows, discrete_loading_bins(rows), {{"40-46", 40.0, 46.0}}));
    out.quartiles = quartile_csv(quartile_summary(rows, 210.0));

    std::vector<ScatterPoint> points;
    for (const auto& r : results)
        points.push_back({r.design.loading_wtpct, r.predicted_mah_g,
                          r.design.separator == Separator::Qma ? 1 : 0});
    out.svg = svg_scatter(points, "predicted capacity vs cathode loading", "LiI wt%", "mAh/g");
    return out;
}

void criterion_determinism() {
    const PipelineOutputs a = run_reduced_pipeline(909);
    const PipelineOutputs b = run_reduced_pipeline(909);
    const bool outputs_equal = a == b;

    // artifact save -> load -> save byte identity
    const ModelArtifact loaded = ModelArtifact::deserialize(a.artifact);
    const bool roundtrip = loaded.serialize() == a.artifact;

    report(8, "criterion 8: determinism (pipeline outputs byte-identical, artifact round trip)",
           outputs_equal && roundtrip,
           std::string(outputs_equal ? "all CSV/SVG byte-identical" : "OUTPUT MISMATCH") +
               (roundtrip ? ", artifact round trip exact" : ", ARTIFACT ROUND TRIP MISMATCH"));
}

// ---------------------------------------------------------------------------
// criterion 9: training schedule
// ---------------------------------------------------------------------------

void criterion_schedule() {
    Rng rng(4242);
    GrTable grs;
    for (auto& gr : grs) {
        gr.resize(kGrWidth);
        for (auto& v : gr) v = rng.uniform(-1.0, 1.0);
    }
    FormulationDesign d;
    d.mol_percent = {4, 6, 3, 1, 68, 2, 10, 6};
    d.loading_wtpct = 44.0;
    d.separator = Separator::Qma;
    const DescriptorVector desc = build_descriptor(d, grs, DescriptorConvention{});

    TrainConfig cfg;  // default schedule: 4000 at 1e-4, then 3000-epoch steps 1e-3, 1e-2
    cfg.seed = 5;
    cfg.max_epochs = 7002;
    cfg.patience = 100000;
    std::vector<TrainingExample> one{{desc, 200.0}};
    auto [model, history] = train(one, one, DescriptorConvention{}, cfg);

    bool ok = history.epochs.size() == 7002;
    for (std::size_t e = 0; e < history.epochs.size() && ok; ++e) {
        const double want = e < 4000 ? 1e-4 : (e < 7000 ? 1e-3 : 1e-2);
        if (history.epochs[e].lr != want) ok = false;
    }
    report(9, "criterion 9: training schedule (lr 1e-4 for epochs 0-3999, then 1e-3, then 1e-2)", ok,
           std::to_string(history.epochs.size()) + " epochs traced");
}

// ---------------------------------------------------------------------------
// criteria 10-12: conditional dataset reproductions
// ---------------------------------------------------------------------------

void conditional_criteria() {
    const char* env = std::getenv("FGCN_REAL_DATASET");
    std::string path = env ? env : "data/liicl_93.csv";
    const bool present = [&] {
        std::ifstream probe(path);
        return probe.good();
    }();
    if (!present) {
        skip(10, "criterion 10: random/sorted test RMSE in 25 +- 10 mAh/g", "measured dataset not available");
        skip(11, "criterion 11: MAE ordering extended-FGCN < RFR < SVR", "measured dataset not available");
        skip(12, "criterion 12: SCC rho(loading, capacity) windows and 40 wt% signs",
             "measured dataset not available");
        return;
    }

    // Reported, not gated: rerun the evaluation protocol on the measured
    // dataset with the full stepped schedule.
    const auto records = load_dataset(path).records;
    const auto corpus = corpus_to_examples(make_pretrain_corpus(50, 1));
    auto [encoder, ph] = pretrain(corpus);
    const GrTable grs = encode_registry(encoder);
    DescriptorConvention conv;
    conv.gcn_version = encoder.version;
    auto to_examples = [&](const std::vector<CellRecord>& rs) {
        std::vector<TrainingExample> ex;
        for (const auto& r : rs) ex.emplace_back(build_descriptor(r.design, grs, conv), r.capacity_mah_g);
        return ex;
    };

    for (const char* mode : {"random", "sorted"}) {
        const Split split = std::string(mode) == "random" ? split_random(records, 0.2, 11)
                                                          : split_sorted(records, 0.2);
        TrainConfig cfg;  // full default schedule
        auto [model, history] = train(to_examples(split.train), to_examples(split.test), conv, cfg);
        const Metrics m = evaluate(model, split.test, grs);
        emit(10, "[REPORT] criterion 10 (" + std::string(mode) + " split): test RMSE " +
                     format_double(m.rmse) + " mAh/g (target 25 +- 10)");
    }
    emit(11, "[REPORT] criteria 11-12: run `fgcn train --baselines` and `fgcn interpret` on the "
             "measured dataset for the MAE table and SCC windows");
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();

    criterion_gradients();

    const std::vector<GeneratedDesign> pool = criterion_pool(0);
    criterion_spearman();

    const EndToEnd e2e = run_end_to_end(pool);
    criterion_permutation(e2e.encoder);
    criterion_descriptor(e2e.grs);
    criterion_baselines(e2e);
    criterion_determinism();
    criterion_schedule();
    conditional_criteria();

    std::stable_sort(g_lines.begin(), g_lines.end(),
                     [](const ResultLine& a, const ResultLine& b) { return a.criterion < b.criterion; });
    for (const auto& line : g_lines) std::printf("%s\n", line.text.c_str());

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s: %d criterion failure(s), %.0f s\n",
                g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", g_failures, secs);
    return g_failures == 0 ? 0 : 1;
}
