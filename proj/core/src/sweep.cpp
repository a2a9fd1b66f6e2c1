#include "nidsrobust/sweep.hpp"

#include "nidsrobust/attacks.hpp"
#include "nidsrobust/error.hpp"
#include "nidsrobust/hash.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace nidsrobust {

using json = nlohmann::json;

std::string engine_version() { return std::string("nidsrobust-") + NIDSROBUST_VERSION; }

DefenseArm recipe_arm() {
    DefenseArm arm;
    arm.name = "recipe";
    arm.depth = 1;
    arm.feature_count = 30;
    arm.activation = Activation::relu;
    arm.dropout = 0.0;
    return arm;
}

namespace {

std::string format_real(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-12; }

template <class T, class Range>
bool member(const T& v, const Range& allowed) {
    return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
}

bool member_real(double v, std::initializer_list<double> allowed) {
    return std::any_of(allowed.begin(), allowed.end(), [&](double a) { return near(a, v); });
}

template <class T>
void require_unique(const std::vector<T>& values, const char* what) {
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = i + 1; j < values.size(); ++j)
            if (values[i] == values[j]) throw SchemaError(std::string("duplicate value in ") + what);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw SchemaError(where + " must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw SchemaError("unknown key '" + key + "' in " + where);
}

template <class T>
T get_field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw SchemaError("missing key '" + std::string(key) + "' in " + where);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw SchemaError("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
    }
}

json arm_to_json(const DefenseArm& arm) {
    json j;
    j["name"] = arm.name;
    j["depth"] = arm.depth;
    if (arm.feature_count == 0) j["feature_count"] = "all";
    else j["feature_count"] = arm.feature_count;
    j["activation"] = std::string(to_string(arm.activation));
    j["dropout"] = arm.dropout;
    if (arm.adversarial) {
        const auto& a = *arm.adversarial;
        j["adversarial"] = {{"attack", std::string(to_string(a.inner_attack.kind))},
                            {"epsilon", a.inner_attack.epsilon},
                            {"alpha", a.inner_attack.alpha},
                            {"iterations", a.inner_attack.iterations},
                            {"random_start_radius", a.inner_attack.random_start_radius},
                            {"clip_to_feature_range", a.inner_attack.clip_to_feature_range},
                            {"fraction", a.fraction},
                            {"from_epoch", a.from_epoch}};
    }
    return j;
}

DefenseArm arm_from_json(const json& j) {
    const std::string where = "adversarial arm";
    check_keys(j, {"name", "depth", "feature_count", "activation", "dropout", "adversarial"}, where);
    DefenseArm arm;
    arm.name = get_field<std::string>(j, "name", where);
    arm.depth = get_field<int>(j, "depth", where);
    if (j.contains("feature_count")) {
        const auto& fc = j.at("feature_count");
        if (fc.is_string()) {
            if (fc.get<std::string>() != "all") throw SchemaError("feature_count must be a number or \"all\"");
            arm.feature_count = 0;
        } else {
            arm.feature_count = get_field<std::size_t>(j, "feature_count", where);
        }
    }
    if (j.contains("activation")) arm.activation = parse_activation(get_field<std::string>(j, "activation", where));
    if (j.contains("dropout")) arm.dropout = get_field<double>(j, "dropout", where);
    if (!j.contains("adversarial")) throw SchemaError("adversarial arm '" + arm.name + "' has no adversarial block");
    const auto& a = j.at("adversarial");
    const std::string awhere = "adversarial block of arm '" + arm.name + "'";
    check_keys(a,
               {"attack", "epsilon", "alpha", "iterations", "random_start_radius", "clip_to_feature_range",
                "fraction", "from_epoch"},
               awhere);
    AdvTrainConfig adv;
    const auto kind = a.contains("attack") ? parse_attack_kind(get_field<std::string>(a, "attack", awhere))
                                           : AttackKind::pgd;
    const double eps = a.contains("epsilon") ? get_field<double>(a, "epsilon", awhere) : 0.3;
    adv.inner_attack = AttackConfig::defaults(kind, eps);
    if (a.contains("alpha")) adv.inner_attack.alpha = get_field<double>(a, "alpha", awhere);
    if (a.contains("iterations")) adv.inner_attack.iterations = get_field<std::size_t>(a, "iterations", awhere);
    if (a.contains("random_start_radius"))
        adv.inner_attack.random_start_radius = get_field<double>(a, "random_start_radius", awhere);
    if (a.contains("clip_to_feature_range"))
        adv.inner_attack.clip_to_feature_range = get_field<bool>(a, "clip_to_feature_range", awhere);
    if (a.contains("fraction")) adv.fraction = get_field<double>(a, "fraction", awhere);
    if (a.contains("from_epoch")) adv.from_epoch = get_field<std::size_t>(a, "from_epoch", awhere);
    arm.adversarial = adv;
    return arm;
}

void validate_arm(const DefenseArm& arm) {
    if (arm.name.empty() || arm.name == "none") throw SchemaError("defense arm needs a name other than 'none'");
    if (arm.name.find('|') != std::string::npos || arm.name.find('=') != std::string::npos)
        throw SchemaError("defense arm name may not contain '|' or '='");
    if (arm.depth < 1 || arm.depth > 5) throw SchemaError("defense arm depth must lie in 1..5");
    if (!(arm.dropout >= 0.0 && arm.dropout < 1.0)) throw SchemaError("defense arm dropout must lie in [0, 1)");
    if (arm.adversarial) {
        auto inner = arm.adversarial->inner_attack;
        // The range is filled from the training split at fit time.
        inner.clip_to_feature_range = false;
        inner.validate();
        if (!(arm.adversarial->fraction > 0.0 && arm.adversarial->fraction <= 1.0))
            throw SchemaError("adversarial fraction must lie in (0, 1]");
        if (arm.adversarial->from_epoch < 1) throw SchemaError("adversarial from_epoch is 1-based");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// SweepSpec
// ---------------------------------------------------------------------------

void SweepSpec::validate() const {
    static const std::vector<std::size_t> kFeatureCounts{12, 30, 50, 75, 100, 123};
    if (depths.empty() || feature_counts.empty() || activations.empty() || dropouts.empty() || attacks.empty() ||
        epsilons.empty())
        throw SchemaError("every grid axis needs at least one value");
    for (int d : depths)
        if (d < 1 || d > 5) throw SchemaError("depth " + std::to_string(d) + " is outside 1..5");
    for (auto k : feature_counts)
        if (!member(k, kFeatureCounts))
            throw SchemaError("feature count " + std::to_string(k) + " is not one of 12, 30, 50, 75, 100, 123");
    for (double p : dropouts)
        if (!member_real(p, {0.0, 0.5})) throw SchemaError("dropout " + format_real(p) + " is not one of 0, 0.5");
    for (double e : epsilons)
        if (!member_real(e, {0.1, 0.3, 0.5}))
            throw SchemaError("epsilon " + format_real(e) + " is not one of 0.1, 0.3, 0.5");
    require_unique(depths, "depths");
    require_unique(feature_counts, "feature_counts");
    require_unique(activations, "activations");
    require_unique(dropouts, "dropouts");
    require_unique(attacks, "attacks");
    require_unique(epsilons, "epsilons");
    if (repeats < 1) throw SchemaError("repeats must be >= 1");
    training.validate();
    std::set<std::string> names{"recipe"};
    for (const auto& arm : adversarial_arms) {
        validate_arm(arm);
        if (!arm.adversarial) throw SchemaError("adversarial arm '" + arm.name + "' has no adversarial block");
        if (!names.insert(arm.name).second) throw SchemaError("duplicate or reserved arm name '" + arm.name + "'");
    }
}

std::string SweepSpec::to_json() const {
    json j;
    j["depths"] = depths;
    j["feature_counts"] = feature_counts;
    j["activations"] = json::array();
    for (auto a : activations) j["activations"].push_back(std::string(nidsrobust::to_string(a)));
    j["dropouts"] = dropouts;
    j["attacks"] = json::array();
    for (auto a : attacks) j["attacks"].push_back(std::string(nidsrobust::to_string(a)));
    j["epsilons"] = epsilons;
    j["repeats"] = repeats;
    j["base_seed"] = base_seed;
    j["training"] = {{"epochs", training.epochs},
                     {"batch_size", training.batch_size},
                     {"learning_rate", training.learning_rate},
                     {"optimizer", std::string(nidsrobust::to_string(training.optimizer))},
                     {"beta1", training.beta1},
                     {"beta2", training.beta2},
                     {"adam_epsilon", training.adam_epsilon}};
    j["adversarial_arms"] = json::array();
    for (const auto& arm : adversarial_arms) j["adversarial_arms"].push_back(arm_to_json(arm));
    return j.dump(2);
}

SweepSpec SweepSpec::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("sweep spec is not valid JSON: ") + e.what());
    }
    const std::string where = "sweep spec";
    check_keys(j,
               {"depths", "feature_counts", "activations", "dropouts", "attacks", "epsilons", "repeats", "base_seed",
                "training", "adversarial_arms"},
               where);
    SweepSpec s;
    s.depths = get_field<std::vector<int>>(j, "depths", where);
    s.feature_counts = get_field<std::vector<std::size_t>>(j, "feature_counts", where);
    for (const auto& a : get_field<std::vector<std::string>>(j, "activations", where))
        s.activations.push_back(parse_activation(a));
    s.dropouts = get_field<std::vector<double>>(j, "dropouts", where);
    for (const auto& a : get_field<std::vector<std::string>>(j, "attacks", where))
        s.attacks.push_back(parse_attack_kind(a));
    s.epsilons = get_field<std::vector<double>>(j, "epsilons", where);
    if (j.contains("repeats")) s.repeats = get_field<std::size_t>(j, "repeats", where);
    if (j.contains("base_seed")) s.base_seed = get_field<Seed>(j, "base_seed", where);
    if (j.contains("training")) {
        const auto& t = j.at("training");
        const std::string twhere = "training block";
        check_keys(t, {"epochs", "batch_size", "learning_rate", "optimizer", "beta1", "beta2", "adam_epsilon"},
                   twhere);
        if (t.contains("epochs")) s.training.epochs = get_field<std::size_t>(t, "epochs", twhere);
        if (t.contains("batch_size")) s.training.batch_size = get_field<std::size_t>(t, "batch_size", twhere);
        if (t.contains("learning_rate")) s.training.learning_rate = get_field<double>(t, "learning_rate", twhere);
        if (t.contains("optimizer"))
            s.training.optimizer = parse_optimizer(get_field<std::string>(t, "optimizer", twhere));
        if (t.contains("beta1")) s.training.beta1 = get_field<double>(t, "beta1", twhere);
        if (t.contains("beta2")) s.training.beta2 = get_field<double>(t, "beta2", twhere);
        if (t.contains("adam_epsilon")) s.training.adam_epsilon = get_field<double>(t, "adam_epsilon", twhere);
    }
    if (j.contains("adversarial_arms")) {
        if (!j.at("adversarial_arms").is_array()) throw SchemaError("adversarial_arms must be an array");
        for (const auto& a : j.at("adversarial_arms")) s.adversarial_arms.push_back(arm_from_json(a));
    }
    s.validate();
    return s;
}

SweepSpec SweepSpec::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open sweep spec: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::uint64_t SweepSpec::hash() const { return Fnv1a().text(to_json()).value(); }

SweepSpec SweepSpec::reference_grid() {
    SweepSpec s;
    s.depths = {1, 2, 3, 4, 5};
    s.feature_counts = {12, 30, 50, 75, 100, 123};
    s.activations = {Activation::relu, Activation::tanh, Activation::elu};
    s.dropouts = {0.0, 0.5};
    s.attacks = {AttackKind::fgsm, AttackKind::bim, AttackKind::pgd};
    s.epsilons = {0.1, 0.3, 0.5};
    s.repeats = 1;
    for (int depth : {4, 5}) {
        for (auto act : {Activation::relu, Activation::elu, Activation::tanh}) {
            DefenseArm arm;
            arm.name = "adv_m" + std::to_string(depth) + "_" + std::string(to_string(act));
            arm.depth = depth;
            arm.feature_count = 0;
            arm.activation = act;
            arm.adversarial = AdvTrainConfig{};
            s.adversarial_arms.push_back(arm);
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

std::string RunConfig::model_key() const {
    std::string k = "def=" + defense + "|d=" + std::to_string(depth) + "|k=" + std::to_string(feature_count) +
                    "|act=" + std::string(to_string(activation)) + "|p=" + format_real(dropout) +
                    "|r=" + std::to_string(repeat);
    return k;
}

std::string RunConfig::key() const {
    return model_key() + "|atk=" + std::string(to_string(attack)) + "|eps=" + format_real(epsilon);
}

namespace {

void seed_run(RunConfig& rc, Seed base) {
    rc.model_seed = Fnv1a().u64(base).text(rc.model_key()).value();
    rc.seed = Fnv1a().u64(base).text(rc.key()).value();
}

void append_attack_grid(std::vector<RunConfig>& out, RunConfig model, const SweepSpec& spec) {
    for (auto atk : spec.attacks) {
        for (double eps : spec.epsilons) {
            RunConfig rc = model;
            rc.attack = atk;
            rc.epsilon = eps;
            seed_run(rc, spec.base_seed);
            out.push_back(std::move(rc));
        }
    }
}

}  // namespace

std::vector<RunConfig> enumerate(const SweepSpec& spec) {
    spec.validate();
    std::vector<RunConfig> out;
    for (int depth : spec.depths)
        for (auto k : spec.feature_counts)
            for (auto act : spec.activations)
                for (double p : spec.dropouts)
                    for (std::size_t r = 0; r < spec.repeats; ++r) {
                        RunConfig m;
                        m.depth = depth;
                        m.feature_count = k;
                        m.activation = act;
                        m.dropout = p;
                        m.repeat = r;
                        append_attack_grid(out, m, spec);
                    }
    return out;
}

std::vector<RunConfig> enumerate_arms(const SweepSpec& spec, const DefenseArm& recipe, std::size_t corpus_features) {
    spec.validate();
    validate_arm(recipe);
    std::vector<DefenseArm> arms{recipe};
    arms.insert(arms.end(), spec.adversarial_arms.begin(), spec.adversarial_arms.end());
    std::vector<RunConfig> out;
    for (const auto& arm : arms)
        for (std::size_t r = 0; r < spec.repeats; ++r) {
            RunConfig m;
            m.defense = arm.name;
            m.depth = arm.depth;
            m.feature_count = arm.feature_count == 0 ? corpus_features : arm.feature_count;
            m.activation = arm.activation;
            m.dropout = arm.dropout;
            m.repeat = r;
            append_attack_grid(out, m, spec);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Cell {
    std::vector<const RunConfig*> runs;
};

}  // namespace

ExecuteSummary execute_runs(const std::vector<RunConfig>& runs, const std::vector<DefenseArm>& arms,
                            const TrainingConfig& training, const CorpusSource& source, ResultStore& store,
                            const ExecuteOptions& options) {
    training.validate();
    ExecuteSummary summary;

    std::unordered_map<std::string, std::size_t> cell_index;
    std::vector<Cell> cells;
    for (const auto& rc : runs) {
        if (!options.force && store.contains(rc.key())) {
            ++summary.skipped;
            continue;
        }
        const auto [it, inserted] = cell_index.emplace(rc.model_key(), cells.size());
        if (inserted) cells.emplace_back();
        cells[it->second].runs.push_back(&rc);
    }

    std::map<std::size_t, DatasetBundle> bundles;
    std::map<std::size_t, std::string> bundle_errors;
    for (const auto& cell : cells) {
        const auto k = cell.runs.front()->feature_count;
        if (bundles.count(k) || bundle_errors.count(k)) continue;
        try {
            bundles.emplace(k, source.bundle_for(k));
        } catch (const std::exception& e) {
            bundle_errors.emplace(k, e.what());
        }
    }

    std::mutex writer;
    std::atomic<std::size_t> next_cell{0};
    std::atomic<std::size_t> started{0};
    std::atomic<bool> exhausted{false};

    auto claim_run = [&]() {
        if (options.max_new_runs == 0) return true;
        if (started.fetch_add(1) >= options.max_new_runs) {
            exhausted = true;
            return false;
        }
        return true;
    };

    auto record = [&](const RunResult& r, bool trained) {
        std::lock_guard lock(writer);
        store.append(r);
        ++summary.executed;
        if (!r.ok) ++summary.failed;
        if (trained) ++summary.trainings;
        if (options.on_result) options.on_result(r);
    };

    auto run_cell = [&](const Cell& cell) {
        const RunConfig& head = *cell.runs.front();
        std::string failure;
        FitResult fitted;
        const DatasetBundle* bundle = nullptr;

        if (auto err = bundle_errors.find(head.feature_count); err != bundle_errors.end()) {
            failure = "corpus: " + err->second;
        } else {
            bundle = &bundles.at(head.feature_count);
            try {
                const DefenseArm* arm = nullptr;
                if (head.defense != "none") {
                    const auto it = std::find_if(arms.begin(), arms.end(),
                                                 [&](const DefenseArm& a) { return a.name == head.defense; });
                    if (it == arms.end()) throw SchemaError("no defense arm named '" + head.defense + "'");
                    arm = &*it;
                }
                const auto arch = ArchitectureSpec::preset(head.depth, bundle->train_x.features(), head.activation,
                                                           head.dropout,
                                                           static_cast<std::size_t>(bundle->train_y.k));
                TrainingConfig tc = training;
                tc.seed = head.model_seed;
                auto net = init_network(arch, head.model_seed);
                if (arm && arm->adversarial) fitted = adversarial_fit(std::move(net), *bundle, tc, *arm->adversarial);
                else fitted = fit(std::move(net), *bundle, tc);
            } catch (const std::exception& e) {
                failure = std::string("training failed: ") + e.what();
            }
        }

        CleanMetrics clean;
        if (failure.empty()) {
            try {
                const auto pred = argmax_rows(predict_proba(fitted.network, bundle->test_x.values));
                const auto mode = bundle->test_y.k == 2 ? Averaging::binary : Averaging::macro;
                clean = clean_metrics(bundle->test_y.ids, pred, mode, 1, bundle->test_y.k);
            } catch (const std::exception& e) {
                failure = std::string("evaluation failed: ") + e.what();
            }
        }

        bool first = true;
        for (const RunConfig* rc : cell.runs) {
            if (!claim_run()) return;
            RunResult r;
            r.config = *rc;
            r.train_time_s = fitted.train_seconds;
            if (!failure.empty()) {
                r.ok = false;
                r.diagnostic = failure;
            } else {
                r.clean = clean;
                const auto t0 = Clock::now();
                try {
                    const auto cfg = AttackConfig::defaults(rc->attack, rc->epsilon, rc->seed);
                    const auto batch = attack_batch(fitted.network, *bundle, cfg);
                    r.robust = robustness_metrics(batch, options.asr_policy, options.benign_class);
                    if (r.robust.max_linf > rc->epsilon + 1e-12) {
                        r.ok = false;
                        r.diagnostic = "perturbation " + format_real(r.robust.max_linf) + " exceeds epsilon";
                    }
                } catch (const std::exception& e) {
                    r.ok = false;
                    r.diagnostic = std::string("attack failed: ") + e.what();
                }
                r.attack_time_s = seconds_since(t0);
            }
            record(r, first && failure.empty());
            first = false;
        }
    };

    auto worker = [&]() {
        for (;;) {
            if (exhausted) return;
            const auto i = next_cell.fetch_add(1);
            if (i >= cells.size()) return;
            run_cell(cells[i]);
        }
    };

    const std::size_t threads = std::max<std::size_t>(1, std::min(options.workers, cells.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return summary;
}

ExecuteSummary execute(const SweepSpec& spec, const CorpusSource& source, ResultStore& store,
                       const ExecuteOptions& options) {
    const auto runs = enumerate(spec);
    std::set<std::string> models;
    for (const auto& r : runs) models.insert(r.model_key());
    store.note_spec(spec.hash(), models.size(), runs.size(), 0);
    return execute_runs(runs, {}, spec.training, source, store, options);
}

DefenseComparison compare_defenses(const SweepSpec& spec, const CorpusSource& source, ResultStore& store,
                                   const ExecuteOptions& options, const DefenseArm& recipe) {
    const auto runs = enumerate_arms(spec, recipe, source.features());
    std::vector<DefenseArm> arms{recipe};
    arms.insert(arms.end(), spec.adversarial_arms.begin(), spec.adversarial_arms.end());
    store.note_spec(spec.hash(), 0, 0, runs.size());
    execute_runs(runs, arms, spec.training, source, store, options);

    DefenseComparison out;
    for (const auto& rc : runs)
        if (auto r = store.find(rc.key())) out.results.push_back(std::move(*r));
    out.rows = aggregate(out.results, {"defense", "epsilon"}, "asr");
    return out;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

GroupKey group_key(const RunConfig& c, const std::vector<std::string>& group_by) {
    GroupKey key;
    for (const auto& g : group_by) {
        if (g == "depth") key.emplace_back(static_cast<std::int64_t>(c.depth));
        else if (g == "feature_count") key.emplace_back(static_cast<std::int64_t>(c.feature_count));
        else if (g == "activation") key.emplace_back(std::string(to_string(c.activation)));
        else if (g == "dropout") key.emplace_back(c.dropout);
        else if (g == "attack") key.emplace_back(std::string(to_string(c.attack)));
        else if (g == "epsilon") key.emplace_back(c.epsilon);
        else if (g == "repeat") key.emplace_back(static_cast<std::int64_t>(c.repeat));
        else if (g == "defense") key.emplace_back(c.defense);
        else throw SchemaError("unknown group key '" + g + "'");
    }
    return key;
}

std::vector<AggregateStat> aggregate(const std::vector<RunResult>& results, const std::vector<std::string>& group_by,
                                     std::string_view value) {
    static const std::set<std::string_view> kValues{"asr",  "mean_confidence_drop", "accuracy",     "precision",
                                                    "recall", "f1",                 "train_time_s", "attack_time_s"};
    if (!kValues.count(value)) throw SchemaError("unknown value field '" + std::string(value) + "'");
    group_key(RunConfig{}, group_by);

    std::vector<Observation> obs;
    for (const auto& r : results) {
        if (!r.ok) continue;
        double v = 0.0;
        if (value == "asr") {
            if (!r.robust.asr) continue;
            v = *r.robust.asr;
        } else if (value == "mean_confidence_drop") {
            if (r.robust.denominator == 0) continue;
            v = r.robust.mean_confidence_drop;
        } else if (value == "accuracy") v = r.clean.accuracy;
        else if (value == "precision") v = r.clean.precision;
        else if (value == "recall") v = r.clean.recall;
        else if (value == "f1") v = r.clean.f1;
        else if (value == "train_time_s") v = r.train_time_s;
        else v = r.attack_time_s;
        obs.push_back({group_key(r.config, group_by), v});
    }
    if (obs.empty()) return {};
    return aggregate(obs);
}

}  // namespace nidsrobust
