// nidsrobust: prepare data, rank features, train, attack, sweep and report.
// Exit codes: 0 success, 1 I/O or runtime failure, 2 schema or usage error.

#include "nidsrobust/attacks.hpp"
#include "nidsrobust/binio.hpp"
#include "nidsrobust/datapipe.hpp"
#include "nidsrobust/error.hpp"
#include "nidsrobust/metrics.hpp"
#include "nidsrobust/neuralnet.hpp"
#include "nidsrobust/report.hpp"
#include "nidsrobust/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace nidsrobust;

namespace {

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

int benign_class_of(const LabelVector& y, const std::string& benign_label) {
    for (std::size_t i = 0; i < y.class_names.size(); ++i)
        if (lower(y.class_names[i]) == "benign" || lower(y.class_names[i]) == lower(benign_label))
            return static_cast<int>(i);
    return 0;
}

AsrPolicy parse_policy(const std::string& s) {
    if (s == "any") return AsrPolicy::any_class;
    if (s == "attack") return AsrPolicy::attack_class_only;
    throw SchemaError("unknown ASR policy '" + s + "' (any|attack)");
}

int parse_arch(const std::string& s) {
    std::string t = lower(s);
    if (t.rfind("model", 0) == 0) t = t.substr(5);
    if (t.size() == 1 && t[0] >= '1' && t[0] <= '5') return t[0] - '0';
    throw SchemaError("unknown architecture '" + s + "' (model1..model5)");
}

std::string widths_text(const ArchitectureSpec& spec) {
    std::string out;
    for (const auto& h : spec.hidden) out += (out.empty() ? "" : ",") + std::to_string(h.width);
    return out.empty() ? "(none)" : out;
}

std::string counts_text(const LabelVector& y) {
    std::string out;
    const auto counts = y.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) {
        const auto name = c < y.class_names.size() ? y.class_names[c] : std::to_string(c);
        out += (out.empty() ? "" : ", ") + name + "=" + std::to_string(counts[c]);
    }
    return out;
}

json counts_json(const LabelVector& y) {
    json j = json::object();
    const auto counts = y.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c)
        j[c < y.class_names.size() ? y.class_names[c] : std::to_string(c)] = counts[c];
    return j;
}

/// Restricts a bundle to the columns a model was trained on, in its order.
DatasetBundle align_to_model(const DatasetBundle& bundle, const DenseNetwork& net) {
    if (net.feature_names.empty() || net.feature_names == bundle.train_x.feature_names) return bundle;
    FeatureRanking order;
    for (const auto& name : net.feature_names) order.entries.push_back({name, 0.0, 0.0, 0.0});
    return select_bundle_features(bundle, order, net.feature_names.size());
}

void write_bundle_report(const std::string& dir, const json& report) {
    binio::atomic_write((fs::path(dir) / "prep_report.json").string(), report.dump(2) + "\n");
}

void print_bundle_summary(const DatasetBundle& b) {
    std::cout << "features:        " << b.train_x.features() << "\n"
              << "train rows:      " << b.train_x.samples() << " (" << counts_text(b.train_y) << ")\n"
              << "test rows:       " << b.test_x.samples() << " (" << counts_text(b.test_y) << ")\n"
              << "fingerprint:     " << std::hex << b.fingerprint() << std::dec << "\n";
}

// ---------------------------------------------------------------------------

struct PrepArgs {
    std::string csv, schema, maps, out, label_mode = "binary", benign = "Benign";
    std::vector<std::string> drop;
    Seed seed = 0;
    double split = 0.8;
    bool undersample = false;
};

void run_prep(const PrepArgs& a) {
    if (!fs::exists(a.schema)) throw SchemaError("schema file not found: " + a.schema);
    const auto schema = Schema::load(a.schema);
    const auto table = ingest_csv(a.csv, schema);

    PreprocessConfig cfg;
    cfg.drop_columns = a.drop;
    cfg.benign_label = a.benign;
    if (a.label_mode == "binary") cfg.label_mode = LabelMode::binary;
    else if (a.label_mode == "multiclass") cfg.label_mode = LabelMode::multiclass;
    else throw SchemaError("unknown label mode '" + a.label_mode + "'");
    if (!a.maps.empty()) {
        if (!fs::is_directory(a.maps)) throw IoError("maps directory not found: " + a.maps);
        const auto ports = fs::path(a.maps) / "port_protocol.txt";
        const auto regions = fs::path(a.maps) / "ip_region.txt";
        if (fs::exists(ports)) cfg.port_map_path = ports.string();
        if (fs::exists(regions)) cfg.region_map_path = regions.string();
    }

    // Stratify on the raw label strings so every original category lands on
    // both sides of the split, then fit on the train rows only.
    const auto& raw = table.label_column().text;
    std::vector<std::string> names(raw.begin(), raw.end());
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    LabelVector strata;
    strata.k = static_cast<int>(names.size());
    strata.class_names = names;
    for (const auto& l : raw)
        strata.ids.push_back(static_cast<int>(std::lower_bound(names.begin(), names.end(), l) - names.begin()));
    const auto split = stratified_split(strata, a.split, a.seed);

    const auto state = fit_preprocessor(table.subset(split.train), cfg);
    const auto [x, y] = apply_preprocessor(table, state);
    const auto bundle = make_bundle(x, y, split, a.undersample, a.seed);

    fs::create_directories(a.out);
    binio::atomic_write((fs::path(a.out) / "preprocessor.json").string(), state.to_json());
    bundle.save((fs::path(a.out) / "bundle.bin").string());

    // Already includes the schema-declared drops.
    const auto& dropped = state.dropped_columns;
    json report;
    report["rows_read"] = table.row_count + table.rows_dropped;
    report["rows_dropped"] = table.rows_dropped;
    report["columns_dropped"] = dropped;
    report["feature_count"] = bundle.train_x.features();
    report["undersample"] = a.undersample;
    report["split"] = a.split;
    report["seed"] = a.seed;
    report["train_class_counts"] = counts_json(bundle.train_y);
    report["test_class_counts"] = counts_json(bundle.test_y);
    write_bundle_report(a.out, report);

    std::cout << "rows read:       " << table.row_count + table.rows_dropped << "\n"
              << "rows dropped:    " << table.rows_dropped << "\n"
              << "columns dropped: " << dropped.size();
    for (const auto& c : dropped) std::cout << " " << c;
    std::cout << "\n";
    print_bundle_summary(bundle);
    std::cout << "wrote " << a.out << "/{preprocessor.json,bundle.bin,prep_report.json}\n";
}

struct SynthArgs {
    std::size_t n = 20000, d = 123, informative = 10;
    double separation = 3.0, decay = 0.7, positive = 0.5, split = 0.8;
    Seed seed = 0;
    bool undersample = false;
    std::string out;
};

void run_synth(const SynthArgs& a) {
    SynthSpec spec;
    spec.separation = a.separation;
    spec.informative = a.informative;
    spec.decay = a.decay;
    spec.positive_fraction = a.positive;
    const auto [x, y] = synth_dataset(spec, a.n, a.d, a.seed);
    const auto bundle = make_bundle(x, y, a.split, a.undersample, a.seed);
    fs::create_directories(a.out);
    bundle.save((fs::path(a.out) / "bundle.bin").string());
    json report;
    report["rows_read"] = a.n;
    report["rows_dropped"] = 0;
    report["columns_dropped"] = json::array();
    report["feature_count"] = bundle.train_x.features();
    report["undersample"] = a.undersample;
    report["split"] = a.split;
    report["seed"] = a.seed;
    report["train_class_counts"] = counts_json(bundle.train_y);
    report["test_class_counts"] = counts_json(bundle.test_y);
    write_bundle_report(a.out, report);
    print_bundle_summary(bundle);
    std::cout << "wrote " << a.out << "/{bundle.bin,prep_report.json}\n";
}

struct RankArgs {
    std::string bundle, out;
};

void run_rank(const RankArgs& a) {
    const auto bundle = DatasetBundle::load(a.bundle);
    const auto ranking = rank_features(bundle.train_x, bundle.train_y);
    binio::atomic_write(a.out, ranking.to_csv());
    std::size_t to95 = ranking.entries.size();
    for (std::size_t i = 0; i < ranking.entries.size(); ++i)
        if (ranking.entries[i].cumulative_importance >= 0.95) {
            to95 = i + 1;
            break;
        }
    std::cout << "ranked " << ranking.entries.size() << " features; " << to95
              << " carry 95% of the normalized importance\n";
    if (ranking.infinite_cap > 0.0) std::cout << "infinite F capped at " << ranking.infinite_cap << "\n";
    const auto shown = std::min<std::size_t>(10, ranking.entries.size());
    for (std::size_t i = 0; i < shown; ++i) {
        const auto& e = ranking.entries[i];
        std::cout << std::setw(4) << i + 1 << "  " << std::left << std::setw(32) << e.feature << std::right
                  << "  F=" << e.f_statistic << "  cum=" << e.cumulative_importance << "\n";
    }
    std::cout << "wrote " << a.out << "\n";
}

struct TrainArgs {
    std::string bundle, ranking, arch = "model1", activation = "relu", optimizer = "adam", out;
    std::size_t k = 0, epochs = 20, batch = 256;
    double dropout = 0.0, lr = 1e-3;
    Seed seed = 0;
    double adv_eps = 0.0, adv_fraction = 0.5;
    std::string adv_attack = "pgd";
};

void run_train(const TrainArgs& a) {
    auto bundle = DatasetBundle::load(a.bundle);
    if (a.k != 0 && a.k != bundle.train_x.features()) {
        const auto ranking = a.ranking.empty() ? rank_features(bundle.train_x, bundle.train_y)
                                               : FeatureRanking::from_csv(read_text(a.ranking));
        bundle = select_bundle_features(bundle, ranking, a.k);
    }
    const int depth = parse_arch(a.arch);
    const auto arch = ArchitectureSpec::preset(depth, bundle.train_x.features(), parse_activation(a.activation),
                                               a.dropout, static_cast<std::size_t>(bundle.train_y.k));
    TrainingConfig tc;
    tc.epochs = a.epochs;
    tc.batch_size = a.batch;
    tc.learning_rate = a.lr;
    tc.optimizer = parse_optimizer(a.optimizer);
    tc.seed = a.seed;
    auto net = init_network(arch, a.seed);
    FitResult fitted;
    if (a.adv_eps > 0.0) {
        AdvTrainConfig adv;
        adv.inner_attack = AttackConfig::defaults(parse_attack_kind(a.adv_attack), a.adv_eps);
        adv.fraction = a.adv_fraction;
        fitted = adversarial_fit(std::move(net), bundle, tc, adv);
    } else {
        fitted = fit(std::move(net), bundle, tc);
    }
    fitted.network.save(a.out);

    const auto pred = argmax_rows(predict_proba(fitted.network, bundle.test_x.values));
    const auto mode = bundle.test_y.k == 2 ? Averaging::binary : Averaging::macro;
    const auto m = clean_metrics(bundle.test_y.ids, pred, mode, 1, bundle.test_y.k);
    std::cout << "architecture:    model" << depth << " hidden widths " << widths_text(arch) << " ("
              << a.activation << ", dropout " << a.dropout << ")\n"
              << "input dim:       " << arch.input_dim << "\n"
              << "parameters:      " << fitted.network.parameter_count() << "\n"
              << "epochs:          " << a.epochs << (a.adv_eps > 0.0 ? " (adversarial)" : "") << "\n"
              << "final loss:      " << fitted.loss_curve.back() << "\n"
              << "test accuracy:   " << m.accuracy << "\n"
              << "test precision:  " << m.precision << "\n"
              << "test recall:     " << m.recall << "\n"
              << "test f1:         " << m.f1 << "\n"
              << "train seconds:   " << fitted.train_seconds << "\n"
              << "wrote " << a.out << "\n";
}

struct AttackArgs {
    std::string model, bundle, kind = "fgsm", policy = "any", out;
    double eps = 0.1, alpha = -1.0, radius = -1.0;
    std::size_t iters = 10;
    Seed seed = 0;
    bool clip = false;
};

void run_attack_cmd(const AttackArgs& a) {
    const auto net = DenseNetwork::load(a.model);
    const auto bundle = align_to_model(DatasetBundle::load(a.bundle), net);
    auto cfg = AttackConfig::defaults(parse_attack_kind(a.kind), a.eps, a.seed);
    cfg.iterations = a.iters;
    if (a.alpha >= 0.0) cfg.alpha = a.alpha;
    if (a.radius >= 0.0) cfg.random_start_radius = a.radius;
    cfg.clip_to_feature_range = a.clip;
    const auto batch = attack_batch(net, bundle, cfg);
    binio::atomic_write(a.out, outcome_to_csv(batch));
    const int benign = benign_class_of(bundle.test_y, "Benign");
    const auto m = robustness_metrics(batch, parse_policy(a.policy), benign);
    std::cout << "attack:          " << a.kind << " eps=" << a.eps;
    if (cfg.kind != AttackKind::fgsm) std::cout << " alpha=" << cfg.alpha << " iters=" << cfg.iterations;
    std::cout << "\n"
              << "ASR:             " << (m.asr ? std::to_string(*m.asr) : std::string("undefined")) << " ("
              << m.flips << "/" << m.denominator << " correctly classified rows flipped)\n"
              << "confidence drop: " << m.mean_confidence_drop << " (mean)\n"
              << "max |dx|_inf:    " << m.max_linf << " (budget " << a.eps << ")\n"
              << "wrote " << a.out << "\n";
}

struct SweepArgs {
    std::string spec, bundle, store, policy = "any";
    std::size_t workers = 1, max_runs = 0;
    bool force = false, defenses = false, defenses_only = false, quiet = false;
};

void run_sweep(const SweepArgs& a) {
    const auto spec = SweepSpec::load(a.spec);
    const auto source = CorpusSource::from_bundle(DatasetBundle::load(a.bundle));
    auto store = ResultStore::open(a.store, source.hash);
    ExecuteOptions opt;
    opt.workers = a.workers;
    opt.force = a.force;
    opt.max_new_runs = a.max_runs;
    opt.asr_policy = parse_policy(a.policy);
    opt.benign_class = benign_class_of(source.base.test_y, "Benign");
    std::size_t done = 0;
    if (!a.quiet)
        opt.on_result = [&](const RunResult& r) {
            ++done;
            std::cout << "[" << done << "] " << r.config.key() << " "
                      << (r.ok ? (r.robust.asr ? "asr=" + std::to_string(*r.robust.asr) : std::string("asr=n/a"))
                               : "FAILED: " + r.diagnostic)
                      << "\n"
                      << std::flush;
        };
    if (!a.defenses_only) {
        const auto s = execute(spec, source, store, opt);
        std::cout << "grid: executed " << s.executed << ", skipped " << s.skipped << ", failed " << s.failed
                  << ", models trained " << s.trainings << "\n";
    }
    if (a.defenses || a.defenses_only) {
        const auto cmp = compare_defenses(spec, source, store, opt);
        std::cout << "defense comparison (mean ASR):\n";
        for (const auto& row : cmp.rows)
            std::cout << "  " << std::left << std::setw(20) << to_string(row.key[0]) << std::right
                      << " eps=" << to_string(row.key[1]) << "  " << row.mean << " +/- " << row.ci95_half_width
                      << " (n=" << row.n << ")\n";
    }
    store.validate();
    std::cout << "store " << a.store << " holds " << store.size() << " runs\n";
}

struct ReportArgs {
    std::string store, figure, out;
};

void run_report(const ReportArgs& a) {
    const auto store = ResultStore::read(a.store);
    const auto records = store.records();
    std::vector<const FigureSpec*> figures;
    if (a.figure == "all")
        for (const auto& f : figure_catalog()) figures.push_back(&f);
    else
        figures.push_back(&find_figure(a.figure));

    for (const auto* f : figures) {
        const auto table = build_figure(*f, records);
        if (table.rows.empty()) {
            if (a.figure == "all") {
                std::cout << f->name << ": no runs, skipped\n";
                continue;
            }
            throw SchemaError("figure '" + f->name + "' has no runs in store " + a.store);
        }
        fs::path path = a.out;
        if (a.figure == "all") {
            fs::create_directories(a.out);
            path = fs::path(a.out) / (f->name + ".csv");
        }
        binio::atomic_write(path.string(), table.to_csv());
        std::cout << f->name << ": " << table.rows.size() << " rows -> " << path.string() << "\n";
        if (f->with_samples) {
            auto spath = path;
            spath.replace_extension(".samples.csv");
            binio::atomic_write(spath.string(), table.samples_csv());
            std::cout << f->name << ": " << table.samples.size() << " samples -> " << spath.string() << "\n";
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adversarial robustness harness for tabular intrusion detectors"};
    app.set_version_flag("--version", engine_version());
    app.require_subcommand(1);

    PrepArgs prep;
    auto* c_prep = app.add_subcommand("prep", "Ingest a CSV, fit preprocessing on the train split, write a bundle");
    c_prep->add_option("--csv", prep.csv, "Input CSV with a header row")->required();
    c_prep->add_option("--schema", prep.schema, "Column-kind declarations (name,kind per line)")->required();
    c_prep->add_option("--maps", prep.maps, "Directory holding port_protocol.txt and ip_region.txt");
    c_prep->add_option("--out", prep.out, "Output directory")->required();
    c_prep->add_option("--seed", prep.seed, "Split and undersampling seed")->capture_default_str();
    c_prep->add_option("--split", prep.split, "Train fraction in (0,1)")->capture_default_str();
    c_prep->add_flag("--undersample", prep.undersample, "Downsample training classes to the minority count");
    c_prep->add_option("--label-mode", prep.label_mode, "binary|multiclass")->capture_default_str();
    c_prep->add_option("--benign-label", prep.benign, "Raw label treated as benign")->capture_default_str();
    c_prep->add_option("--drop", prep.drop, "Extra columns to drop")->delimiter(',');

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Write a synthetic two-cluster bundle");
    c_synth->add_option("--n", synth.n, "Rows")->capture_default_str();
    c_synth->add_option("--d", synth.d, "Features")->capture_default_str();
    c_synth->add_option("--informative", synth.informative, "Leading informative features")->capture_default_str();
    c_synth->add_option("--separation", synth.separation, "Class mean distance on feature 0")->capture_default_str();
    c_synth->add_option("--decay", synth.decay, "Per-feature separation decay")->capture_default_str();
    c_synth->add_option("--positive-fraction", synth.positive, "Attack-class share")->capture_default_str();
    c_synth->add_option("--split", synth.split, "Train fraction")->capture_default_str();
    c_synth->add_option("--seed", synth.seed, "Generator and split seed")->capture_default_str();
    c_synth->add_flag("--undersample", synth.undersample, "Equalize training classes");
    c_synth->add_option("--out", synth.out, "Output directory")->required();

    RankArgs rank;
    auto* c_rank = app.add_subcommand("rank", "ANOVA F ranking of the bundle's training split");
    c_rank->add_option("--bundle", rank.bundle, "Bundle file")->required();
    c_rank->add_option("--out", rank.out, "Ranking CSV")->required();

    TrainArgs train;
    auto* c_train = app.add_subcommand("train", "Train a reference architecture on a bundle");
    c_train->add_option("--bundle", train.bundle, "Bundle file")->required();
    c_train->add_option("--ranking", train.ranking, "Ranking CSV (computed on the fly when absent)");
    c_train->add_option("--arch", train.arch, "model1..model5")->capture_default_str();
    c_train->add_option("--k", train.k, "Top-k ranked features (0 = all)")->capture_default_str();
    c_train->add_option("--activation", train.activation, "relu|tanh|elu")->capture_default_str();
    c_train->add_option("--dropout", train.dropout, "Dropout probability")->capture_default_str();
    c_train->add_option("--epochs", train.epochs, "Epochs")->capture_default_str();
    c_train->add_option("--batch-size", train.batch, "Mini-batch size")->capture_default_str();
    c_train->add_option("--lr", train.lr, "Learning rate")->capture_default_str();
    c_train->add_option("--optimizer", train.optimizer, "adam|sgd")->capture_default_str();
    c_train->add_option("--seed", train.seed, "Initialization and shuffling seed")->capture_default_str();
    c_train->add_option("--adv-eps", train.adv_eps, "Adversarial training budget (0 = clean)")
        ->capture_default_str();
    c_train->add_option("--adv-fraction", train.adv_fraction, "Share of each batch replaced")
        ->capture_default_str();
    c_train->add_option("--adv-attack", train.adv_attack, "Inner attack fgsm|bim|pgd")->capture_default_str();
    c_train->add_option("--out", train.out, "Model file")->required();

    AttackArgs attack;
    auto* c_attack = app.add_subcommand("attack", "Attack a bundle's test split with a trained model");
    c_attack->add_option("--model", attack.model, "Model file")->required();
    c_attack->add_option("--bundle", attack.bundle, "Bundle file")->required();
    c_attack->add_option("--kind", attack.kind, "fgsm|bim|pgd")->capture_default_str();
    c_attack->add_option("--eps", attack.eps, "L-infinity budget")->capture_default_str();
    c_attack->add_option("--alpha", attack.alpha, "Step size (default eps/4)");
    c_attack->add_option("--iters", attack.iters, "Iterations")->capture_default_str();
    c_attack->add_option("--radius", attack.radius, "PGD random-start radius (default eps)");
    c_attack->add_flag("--clip", attack.clip, "Clip to the training feature range");
    c_attack->add_option("--seed", attack.seed, "Random-start seed")->capture_default_str();
    c_attack->add_option("--asr-policy", attack.policy, "any|attack")->capture_default_str();
    c_attack->add_option("--out", attack.out, "Per-row CSV")->required();

    SweepArgs sweep;
    auto* c_sweep = app.add_subcommand("sweep", "Run a sweep spec into a result store");
    c_sweep->add_option("--spec", sweep.spec, "Sweep spec JSON")->required();
    c_sweep->add_option("--bundle", sweep.bundle, "Full-feature bundle")->required();
    c_sweep->add_option("--store", sweep.store, "Result store directory")->required();
    c_sweep->add_option("--workers", sweep.workers, "Parallel model cells")->capture_default_str();
    c_sweep->add_option("--max-runs", sweep.max_runs, "Stop after this many new runs (0 = all)")
        ->capture_default_str();
    c_sweep->add_flag("--force", sweep.force, "Re-run cells already in the store");
    c_sweep->add_flag("--defenses", sweep.defenses, "Also run the defense comparison arms");
    c_sweep->add_flag("--defenses-only", sweep.defenses_only, "Run only the defense comparison arms");
    c_sweep->add_option("--asr-policy", sweep.policy, "any|attack")->capture_default_str();
    c_sweep->add_flag("--quiet", sweep.quiet, "No per-run progress lines");

    ReportArgs report;
    auto* c_report = app.add_subcommand("report", "Emit a figure table from a result store");
    c_report->add_option("--store", report.store, "Result store directory")->required();
    std::vector<std::string> figure_names{"all"};
    for (const auto& f : figure_catalog()) figure_names.push_back(f.name);
    c_report->add_option("--figure", report.figure, "Figure key or 'all'")
        ->required()
        ->check(CLI::IsMember(figure_names));
    c_report->add_option("--out", report.out, "CSV path (directory for 'all')")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*c_prep) run_prep(prep);
        else if (*c_synth) run_synth(synth);
        else if (*c_rank) run_rank(rank);
        else if (*c_train) run_train(train);
        else if (*c_attack) run_attack_cmd(attack);
        else if (*c_sweep) run_sweep(sweep);
        else if (*c_report) run_report(report);
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
