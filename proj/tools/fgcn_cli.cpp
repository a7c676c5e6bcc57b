// Command-line front end for the formulation screening engine: synthetic
// data emission, encoder pretraining, regressor training and evaluation,
// candidate generation, screening and rank-correlation reports.
//
// Exit codes: 0 success, 2 input/config error, 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fgcn/artifact.hpp"
#include "fgcn/baselines.hpp"
#include "fgcn/candidate_gen.hpp"
#include "fgcn/dataset.hpp"
#include "fgcn/descriptor.hpp"
#include "fgcn/gcn.hpp"
#include "fgcn/interpret.hpp"
#include "fgcn/regressor.hpp"
#include "fgcn/reports.hpp"
#include "fgcn/screening.hpp"
#include "fgcn/synthetic.hpp"

namespace fs = std::filesystem;
using namespace fgcn;

namespace {

void ensure_parent_dir(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

void write_file(const std::string& path, const std::string& content) {
    ensure_parent_dir(path);
    save_text(path, content);
    std::cout << "wrote " << path << "\n";
}

std::uint64_t hash_config(const std::vector<std::string>& parts) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& p : parts) {
        h = fnv1a(p, h);
        h = fnv1a(";", h);
    }
    return h;
}

std::vector<CellRecord> load_records_or_die(const std::string& path) {
    const LoadSummary summary = load_dataset(path);
    for (const auto& reject : summary.rejects)
        std::cerr << "warning: " << path << ": row " << reject.row << " rejected: " << reject.reason
                  << "\n";
    if (summary.records.empty()) throw config_error(path + ": no usable records");
    return summary.records;
}

Separator parse_separator_filter(const std::string& text, bool& enabled) {
    enabled = text != "ALL";
    if (!enabled) return Separator::Qma;
    return separator_from_label(text);
}

std::vector<LoadingBin> parse_windows(const std::vector<std::string>& specs) {
    std::vector<LoadingBin> windows;
    for (const auto& spec : specs) {
        const std::size_t colon = spec.find(':');
        if (colon == std::string::npos)
            throw config_error("window '" + spec + "' must look like lo:hi");
        LoadingBin bin;
        bin.lo = parse_double(spec.substr(0, colon));
        bin.hi = parse_double(spec.substr(colon + 1));
        if (bin.lo > bin.hi) throw config_error("window '" + spec + "' is empty");
        bin.label = format_double(bin.lo) + "-" + format_double(bin.hi);
        windows.push_back(std::move(bin));
    }
    return windows;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthOptions {
    std::string out_dir = "out";
    std::uint64_t seed = 42;
    std::size_t records = 93;
    std::size_t molecules = 50;
    double sigma = 20.0;
};

int cmd_synth(const SynthOptions& opt) {
    SyntheticOracle oracle;
    oracle.noise_sigma = opt.sigma;
    const auto records = make_dataset(oracle, opt.records, opt.seed);
    const auto corpus = make_pretrain_corpus(opt.molecules, opt.seed + 1);

    write_file(opt.out_dir + "/synthetic_dataset.csv", dataset_csv(records));
    write_file(opt.out_dir + "/pretrain_corpus.csv", pretrain_corpus_csv(corpus));
    return 0;
}

// ---------------------------------------------------------------------------
// pretrain
// ---------------------------------------------------------------------------

struct PretrainOptions {
    std::string corpus_path;
    std::string model_path = "out/model.fgcn";
    std::string out_dir = "out";
    std::uint64_t seed = 42;
    double lr = 1e-3;
    std::size_t max_epochs = 2000;
    std::size_t patience = 200;
};

int cmd_pretrain(const PretrainOptions& opt) {
    const auto corpus = load_pretrain_corpus(opt.corpus_path);
    PretrainConfig cfg;
    cfg.seed = opt.seed;
    cfg.lr = opt.lr;
    cfg.max_epochs = opt.max_epochs;
    cfg.patience = opt.patience;
    auto [model, history] = pretrain(corpus, cfg);

    ArtifactMeta meta;
    meta.seed = opt.seed;
    meta.config_hash = hash_config({"pretrain", std::to_string(opt.seed), format_double(opt.lr),
                                    std::to_string(opt.max_epochs), std::to_string(opt.patience)});
    const ModelArtifact artifact = make_artifact(model, meta);

    ensure_parent_dir(opt.model_path);
    artifact.save(opt.model_path);
    std::cout << "wrote " << opt.model_path << "\n";
    write_file(opt.out_dir + "/pretrain_history.csv", pretrain_history_csv(history));
    std::cout << "pretrained on " << corpus.size() << " molecules: final loss "
              << format_double(history.loss.back()) << " after " << history.loss.size() << " epochs ("
              << history.stop_reason << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOptions {
    std::string dataset_path;
    std::string model_path = "out/model.fgcn";
    std::string model_out;  // defaults to model_path
    std::string out_dir = "out";
    std::string split = "random";
    double test_fraction = 0.2;
    std::uint64_t seed = 42;
    double initial_lr = 1e-4;
    std::size_t phase1_epochs = 4000;
    std::size_t phase_epochs = 3000;
    std::vector<double> phase_lrs = {1e-3, 1e-2};
    std::size_t max_epochs = 15000;
    std::size_t patience = 1000;
    bool separator_onehot = false;
    bool with_baselines = false;
};

int cmd_train(const TrainOptions& opt) {
    ModelArtifact artifact = ModelArtifact::load(opt.model_path);
    const GcnModel gcn = gcn_from_artifact(artifact);
    const auto records = load_records_or_die(opt.dataset_path);

    Split split;
    if (opt.split == "random") {
        split = split_random(records, opt.test_fraction, opt.seed);
    } else if (opt.split == "sorted") {
        split = split_sorted(records, opt.test_fraction);
    } else {
        throw config_error("unknown split '" + opt.split + "'; use random or sorted");
    }

    const GrTable grs = encode_registry(gcn);
    DescriptorConvention convention;
    convention.gcn_version = gcn.version;
    if (opt.separator_onehot)
        convention.separator_encoding = DescriptorConvention::SeparatorEncoding::OneHot;

    auto to_examples = [&](const std::vector<CellRecord>& rs) {
        std::vector<TrainingExample> out;
        out.reserve(rs.size());
        for (const auto& r : rs)
            out.emplace_back(build_descriptor(r.design, grs, convention), r.capacity_mah_g);
        return out;
    };

    TrainConfig cfg;
    cfg.seed = opt.seed;
    cfg.initial_lr = opt.initial_lr;
    cfg.phase1_epochs = opt.phase1_epochs;
    cfg.phase_epochs = opt.phase_epochs;
    cfg.phase_lrs = opt.phase_lrs;
    cfg.max_epochs = opt.max_epochs;
    cfg.patience = opt.patience;

    // the held-out split doubles as the validation set during training
    auto [model, history] = train(to_examples(split.train), to_examples(split.test), convention, cfg);
    model.train_fingerprint = split_fingerprint(split.train);

    const Metrics train_metrics = evaluate(model, split.train, grs);
    const Metrics test_metrics = evaluate(model, split.test, grs);

    attach_regressor(artifact, model);
    artifact.set("trained_split", opt.split);
    artifact.set("trained_seed", std::to_string(opt.seed));

    const std::string model_out = opt.model_out.empty() ? opt.model_path : opt.model_out;
    ensure_parent_dir(model_out);
    artifact.save(model_out);
    std::cout << "wrote " << model_out << "\n";

    write_file(opt.out_dir + "/metrics.csv",
               metrics_csv({{"train", train_metrics}, {"test", test_metrics}}));
    write_file(opt.out_dir + "/parity_" + opt.split + ".csv", parity_csv(test_metrics));
    write_file(opt.out_dir + "/train_history.csv", train_history_csv(history));

    std::cout << "split " << opt.split << ": train n=" << split.train.size()
              << " test n=" << split.test.size() << "\n";
    std::cout << "best epoch " << history.best_epoch << " (" << history.stop_reason
              << "), test RMSE " << format_double(test_metrics.rmse) << " MAE "
              << format_double(test_metrics.mae) << " mAh/g\n";
    if (history.threshold_epoch)
        std::cout << "validation RMSE first below " << format_double(cfg.rmse_log_threshold)
                  << " mAh/g at epoch " << *history.threshold_epoch << "\n";

    if (opt.with_baselines) {
        std::vector<FlatExample> flat_train;
        for (const auto& r : split.train)
            flat_train.emplace_back(flat_features(r.design), r.capacity_mah_g);

        RfrConfig rfr_cfg;
        rfr_cfg.seed = opt.seed;
        ForestModel rfr = train_rfr(flat_train, rfr_cfg);
        rfr.train_fingerprint = model.train_fingerprint;

        SvrConfig svr_cfg;
        svr_cfg.seed = opt.seed;
        SvrModel svr = train_svr(flat_train, svr_cfg);
        svr.train_fingerprint = model.train_fingerprint;
        if (!svr.converged) std::cerr << "warning: SVR did not converge within max_passes\n";

        std::vector<ComparedModel> models;
        models.push_back({"extended-fgcn", model.train_fingerprint,
                          [&](const CellRecord& r) {
                              return predict(model, build_descriptor(r.design, grs, convention));
                          },
                          "{\"hidden\":[1000,500,100]}"});
        models.push_back({"rfr", rfr.train_fingerprint,
                          [&](const CellRecord& r) { return rfr.predict(flat_features(r.design)); },
                          "{\"n_trees\":" + std::to_string(rfr_cfg.n_trees) +
                              ",\"mtry\":" + std::to_string(rfr_cfg.mtry) +
                              ",\"min_leaf\":" + std::to_string(rfr_cfg.min_leaf) + "}"});
        models.push_back({"svr", svr.train_fingerprint,
                          [&](const CellRecord& r) { return svr.predict(flat_features(r.design)); },
                          "{\"C\":" + format_double(svr_cfg.c) + ",\"epsilon\":" + format_double(svr_cfg.epsilon) +
                              ",\"gamma\":" + format_double(svr_cfg.gamma) + "}"});
        write_file(opt.out_dir + "/compare.csv", compare_csv(compare(models, split.test)));
    }
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalOptions {
    std::string dataset_path;
    std::string model_path = "out/model.fgcn";
    std::string out_dir = "out";
};

int cmd_eval(const EvalOptions& opt) {
    const ModelArtifact artifact = ModelArtifact::load(opt.model_path);
    const GcnModel gcn = gcn_from_artifact(artifact);
    const RegressorModel model = regressor_from_artifact(artifact);
    const auto records = load_records_or_die(opt.dataset_path);

    const Metrics metrics = evaluate(model, records, encode_registry(gcn));
    write_file(opt.out_dir + "/eval_metrics.csv", metrics_csv({{"all", metrics}}));
    write_file(opt.out_dir + "/eval_parity.csv", parity_csv(metrics));
    std::cout << "n=" << records.size() << " RMSE " << format_double(metrics.rmse) << " MAE "
              << format_double(metrics.mae) << " mAh/g\n";
    return 0;
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenOptions {
    std::string pool_path = "out/pool.csv";
    GenConfig config;
    std::vector<std::string> separators = {"CELGARD", "QMA"};
};

int cmd_gen(GenOptions opt) {
    opt.config.separators.clear();
    for (const auto& label : opt.separators)
        opt.config.separators.push_back(separator_from_label(label));
    const auto pool = generate(opt.config);
    write_file(opt.pool_path, pool_csv(pool, opt.config));
    std::cout << "pool size " << pool.size() << " (" << opt.config.n_compositions << " compositions x "
              << opt.config.loadings.size() << " loadings x " << opt.config.separators.size()
              << " separators)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// screen
// ---------------------------------------------------------------------------

struct ScreenOptions {
    std::string model_path = "out/model.fgcn";
    std::string pool_path = "out/pool.csv";
    std::string out_dir = "out";
    double window_lo = 40.0;
    double window_hi = 45.0;
    double threshold = 210.0;
    std::size_t max_shortlist = 50;
    double per_salt_cap = 0.0;  // 0 disables the solubility post-filter
};

int cmd_screen(const ScreenOptions& opt) {
    const ModelArtifact artifact = ModelArtifact::load(opt.model_path);
    const GcnModel gcn = gcn_from_artifact(artifact);
    const RegressorModel model = regressor_from_artifact(artifact);
    const auto pool = read_pool_csv(opt.pool_path);

    const auto results = screen(model, encode_registry(gcn), pool);
    const auto candidates = opt.per_salt_cap > 0.0 ? filter_per_salt(results, opt.per_salt_cap) : results;
    const auto picks = shortlist(candidates, opt.window_lo, opt.window_hi, opt.threshold, opt.max_shortlist);

    std::vector<ScatterPoint> points;
    points.reserve(results.size());
    for (const auto& r : results)
        points.push_back({r.design.loading_wtpct, r.predicted_mah_g,
                          r.design.separator == Separator::Qma ? 1 : 0});

    write_file(opt.out_dir + "/predictions.csv", predictions_csv(results));
    write_file(opt.out_dir + "/shortlist.csv", predictions_csv(picks));
    write_file(opt.out_dir + "/screen_scatter.svg",
               svg_scatter(points, "predicted capacity vs cathode loading", "LiI wt%",
                           "predicted capacity (mAh/g)"));
    std::cout << "screened " << results.size() << " designs; " << picks.size() << " shortlisted above "
              << format_double(opt.threshold) << " mAh/g in [" << format_double(opt.window_lo) << ", "
              << format_double(opt.window_hi) << "] wt%\n";
    return 0;
}

// ---------------------------------------------------------------------------
// interpret
// ---------------------------------------------------------------------------

struct InterpretOptions {
    std::string predictions_path;
    std::string dataset_path;
    std::string out_dir = "out";
    std::vector<std::string> windows = {"40:46", "46.001:100"};
    double quartile_floor = 210.0;
    std::string separator_filter = "ALL";
};

int cmd_interpret(const InterpretOptions& opt) {
    if (opt.predictions_path.empty() == opt.dataset_path.empty())
        throw config_error("interpret needs exactly one of --predictions or --dataset");

    std::vector<std::pair<FormulationDesign, double>> rows;
    if (!opt.predictions_path.empty()) {
        rows = read_predictions_csv(opt.predictions_path);
    } else {
        for (const auto& r : load_records_or_die(opt.dataset_path))
            rows.emplace_back(r.design, r.capacity_mah_g);
    }

    bool filter_enabled = false;
    const Separator wanted = parse_separator_filter(opt.separator_filter, filter_enabled);
    if (filter_enabled) {
        std::vector<std::pair<FormulationDesign, double>> kept;
        for (const auto& row : rows)
            if (row.first.separator == wanted) kept.push_back(row);
        rows = std::move(kept);
    }
    if (rows.empty()) throw config_error("interpret: no rows after filtering");

    const SccReport report = scc_report(rows, discrete_loading_bins(rows), parse_windows(opt.windows));
    const QuartileSummary summary = quartile_summary(rows, opt.quartile_floor);

    write_file(opt.out_dir + "/scc.csv", scc_csv(report));
    write_file(opt.out_dir + "/quartiles.csv", quartile_csv(summary));
    std::cout << "scc over " << rows.size() << " rows in " << discrete_loading_bins(rows).size()
              << " loading bins\n";
    if (!summary.sufficient)
        std::cout << "quartile summary insufficient: only " << summary.n << " rows at or above "
                  << format_double(opt.quartile_floor) << " mAh/g\n";
    return 0;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportOptions {
    std::string parity_path;
    std::string predictions_path;
    std::string out_dir = "out";
};

int cmd_report(const ReportOptions& opt) {
    if (opt.parity_path.empty() && opt.predictions_path.empty())
        throw config_error("report needs --parity and/or --predictions");

    if (!opt.parity_path.empty()) {
        const CsvTable table = read_csv(opt.parity_path);
        const std::size_t mc = table.column_index("measured");
        const std::size_t pc = table.column_index("predicted");
        std::vector<ScatterPoint> points;
        for (const auto& row : table.rows)
            points.push_back({parse_double(row[mc]), parse_double(row[pc]), 0});
        write_file(opt.out_dir + "/parity.svg",
                   svg_scatter(points, "parity", "measured capacity (mAh/g)",
                               "predicted capacity (mAh/g)", true));
    }
    if (!opt.predictions_path.empty()) {
        const auto rows = read_predictions_csv(opt.predictions_path);
        std::vector<ScatterPoint> points;
        for (const auto& [design, predicted] : rows)
            points.push_back({design.loading_wtpct, predicted,
                              design.separator == Separator::Qma ? 1 : 0});
        write_file(opt.out_dir + "/capacity_vs_loading.svg",
                   svg_scatter(points, "predicted capacity vs cathode loading", "LiI wt%",
                               "predicted capacity (mAh/g)"));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"formulation screening engine for battery electrolytes"};
    app.set_config("--config", "", "key = value config file; [section] per subcommand");
    app.require_subcommand(1);

    SynthOptions synth_opt;
    auto* synth = app.add_subcommand("synth", "emit a synthetic dataset and pretraining corpus");
    synth->add_option("--out", synth_opt.out_dir, "output directory");
    synth->add_option("--seed", synth_opt.seed, "rng seed");
    synth->add_option("--records", synth_opt.records, "dataset rows");
    synth->add_option("--molecules", synth_opt.molecules, "pretraining corpus size");
    synth->add_option("--sigma", synth_opt.sigma, "capacity noise sigma (mAh/g)");

    PretrainOptions pre_opt;
    auto* pre = app.add_subcommand("pretrain", "train and freeze the graph encoder");
    pre->add_option("--corpus", pre_opt.corpus_path, "corpus CSV (smiles + labels)")->required();
    pre->add_option("--model", pre_opt.model_path, "model artifact to write");
    pre->add_option("--out", pre_opt.out_dir, "report directory");
    pre->add_option("--seed", pre_opt.seed, "rng seed");
    pre->add_option("--lr", pre_opt.lr, "learning rate");
    pre->add_option("--epochs", pre_opt.max_epochs, "max epochs");
    pre->add_option("--patience", pre_opt.patience, "plateau patience (epochs)");

    TrainOptions train_opt;
    auto* tr = app.add_subcommand("train", "train the capacity regressor");
    tr->add_option("--dataset", train_opt.dataset_path, "dataset CSV")->required();
    tr->add_option("--model", train_opt.model_path, "model artifact holding the encoder");
    tr->add_option("--model-out", train_opt.model_out, "artifact to write (default: --model)");
    tr->add_option("--out", train_opt.out_dir, "report directory");
    tr->add_option("--split", train_opt.split, "random or sorted");
    tr->add_option("--test-fraction", train_opt.test_fraction, "held-out fraction");
    tr->add_option("--seed", train_opt.seed, "rng seed");
    tr->add_option("--initial-lr", train_opt.initial_lr, "phase-1 learning rate");
    tr->add_option("--phase1-epochs", train_opt.phase1_epochs, "epochs at the initial lr");
    tr->add_option("--phase-epochs", train_opt.phase_epochs, "length of each stepped phase");
    tr->add_option("--phase-lrs", train_opt.phase_lrs, "stepped learning rates");
    tr->add_option("--max-epochs", train_opt.max_epochs, "epoch cap");
    tr->add_option("--patience", train_opt.patience, "early-stop patience (epochs)");
    tr->add_flag("--separator-onehot", train_opt.separator_onehot, "one-hot separator feature");
    tr->add_flag("--baselines", train_opt.with_baselines, "also fit RFR/SVR and emit compare.csv");

    EvalOptions eval_opt;
    auto* ev = app.add_subcommand("eval", "evaluate a trained model on a dataset");
    ev->add_option("--dataset", eval_opt.dataset_path, "dataset CSV")->required();
    ev->add_option("--model", eval_opt.model_path, "model artifact");
    ev->add_option("--out", eval_opt.out_dir, "report directory");

    GenOptions gen_opt;
    auto* gen = app.add_subcommand("gen", "generate the dummy battery-design pool");
    gen->add_option("--pool-out", gen_opt.pool_path, "pool CSV to write");
    gen->add_option("--n", gen_opt.config.n_compositions, "number of compositions");
    gen->add_option("--loadings", gen_opt.config.loadings, "cathode loadings (LiI wt%)");
    gen->add_option("--separators", gen_opt.separators, "separator labels");
    gen->add_option("--salt-cap", gen_opt.config.salt_cap_molpct, "total salt mol% cap");
    gen->add_option("--over-cap-fraction", gen_opt.config.over_cap_fraction,
                    "share of compositions allowed over the cap");
    gen->add_option("--resolution", gen_opt.config.resolution_molpct, "mol% grid spacing");
    gen->add_option("--seed", gen_opt.config.seed, "rng seed");

    ScreenOptions screen_opt;
    auto* sc = app.add_subcommand("screen", "predict and rank a candidate pool");
    sc->add_option("--model", screen_opt.model_path, "model artifact");
    sc->add_option("--pool", screen_opt.pool_path, "pool CSV");
    sc->add_option("--out", screen_opt.out_dir, "report directory");
    sc->add_option("--window-lo", screen_opt.window_lo, "shortlist loading window low (wt%)");
    sc->add_option("--window-hi", screen_opt.window_hi, "shortlist loading window high (wt%)");
    sc->add_option("--threshold", screen_opt.threshold, "shortlist capacity threshold (mAh/g)");
    sc->add_option("--max-shortlist", screen_opt.max_shortlist, "shortlist size cap");
    sc->add_option("--per-salt-cap", screen_opt.per_salt_cap,
                   "drop shortlist designs with any single salt above this mol% (0 = off)");

    InterpretOptions int_opt;
    auto* in = app.add_subcommand("interpret", "Spearman correlation and quartile reports");
    in->add_option("--predictions", int_opt.predictions_path, "screen predictions CSV");
    in->add_option("--dataset", int_opt.dataset_path, "measured dataset CSV");
    in->add_option("--out", int_opt.out_dir, "report directory");
    in->add_option("--windows", int_opt.windows, "loading windows lo:hi for rho(loading, capacity)");
    in->add_option("--quartile-floor", int_opt.quartile_floor, "capacity floor (mAh/g)");
    in->add_option("--separator", int_opt.separator_filter, "ALL, QMA or CELGARD");

    ReportOptions rep_opt;
    auto* rep = app.add_subcommand("report", "render SVG plots from report CSVs");
    rep->add_option("--parity", rep_opt.parity_path, "parity CSV");
    rep->add_option("--predictions", rep_opt.predictions_path, "predictions CSV");
    rep->add_option("--out", rep_opt.out_dir, "report directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_opt);
        if (pre->parsed()) return cmd_pretrain(pre_opt);
        if (tr->parsed()) return cmd_train(train_opt);
        if (ev->parsed()) return cmd_eval(eval_opt);
        if (gen->parsed()) return cmd_gen(gen_opt);
        if (sc->parsed()) return cmd_screen(screen_opt);
        if (in->parsed()) return cmd_interpret(int_opt);
        if (rep->parsed()) return cmd_report(rep_opt);
    } catch (const numeric_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
