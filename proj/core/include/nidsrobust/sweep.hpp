#pragma once

// Experiment grid enumeration, execution with a bounded worker pool, an
// append-only JSON-lines result store, and the undefended-recipe versus
// adversarially-trained comparison.

#include "nidsrobust/attack_config.hpp"
#include "nidsrobust/datapipe.hpp"
#include "nidsrobust/metrics.hpp"
#include "nidsrobust/neuralnet.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nidsrobust {

std::string engine_version();

/// One model trained under an explicit defense, evaluated against the shared
/// attack grid. feature_count 0 means "all corpus features".
struct DefenseArm {
    std::string name;
    int depth = 1;
    std::size_t feature_count = 0;
    Activation activation = Activation::relu;
    double dropout = 0.0;
    std::optional<AdvTrainConfig> adversarial;
};

/// Depth 1, 30 features, ReLU, no dropout, clean training.
DefenseArm recipe_arm();

struct SweepSpec {
    std::vector<int> depths;
    std::vector<std::size_t> feature_counts;
    std::vector<Activation> activations;
    std::vector<double> dropouts;
    std::vector<AttackKind> attacks;
    std::vector<double> epsilons;
    std::size_t repeats = 1;
    Seed base_seed = 0;
    TrainingConfig training;
    std::vector<DefenseArm> adversarial_arms;

    /// Every grid value must come from the reference grid:
    /// depths 1..5, features {12,30,50,75,100,123}, relu/tanh/elu,
    /// dropout {0,0.5}, fgsm/bim/pgd, epsilon {0.1,0.3,0.5}.
    void validate() const;

    [[nodiscard]] std::string to_json() const;
    static SweepSpec from_json(const std::string& text);
    static SweepSpec load(const std::string& path);
    [[nodiscard]] std::uint64_t hash() const;

    /// The full reference grid, one repeat.
    static SweepSpec reference_grid();
};

struct RunConfig {
    int depth = 1;
    std::size_t feature_count = 0;
    Activation activation = Activation::relu;
    double dropout = 0.0;
    AttackKind attack = AttackKind::fgsm;
    double epsilon = 0.0;
    std::size_t repeat = 0;
    std::string defense = "none";
    Seed seed = 0;        ///< attack seed, hash of (base_seed, key())
    Seed model_seed = 0;  ///< hash of (base_seed, model_key())

    /// Unique per run, seed excluded.
    [[nodiscard]] std::string key() const;
    /// Shared by the attack runs that reuse one trained model.
    [[nodiscard]] std::string model_key() const;
};

/// Model grid (depth x features x activation x dropout) crossed with the
/// attack grid (attack x epsilon), times repeats, in a fixed order.
std::vector<RunConfig> enumerate(const SweepSpec& spec);

/// Runs for the recipe arm followed by every adversarial arm.
std::vector<RunConfig> enumerate_arms(const SweepSpec& spec, const DefenseArm& recipe,
                                      std::size_t corpus_features);

struct RunResult {
    RunConfig config;
    bool ok = true;
    std::string diagnostic;
    CleanMetrics clean;
    RobustnessMetrics robust;
    double train_time_s = 0.0;
    double attack_time_s = 0.0;
    std::string engine = engine_version();

    [[nodiscard]] std::string to_json_line() const;
    static RunResult from_json_line(std::string_view line);
    /// Field-by-field equality ignoring the timing fields.
    [[nodiscard]] bool same_values(const RunResult& other) const;
};

struct StoreManifest {
    std::vector<std::uint64_t> spec_hashes;
    std::uint64_t corpus_hash = 0;
    std::string created;
    std::string engine;
    std::size_t model_cells = 0;
    std::size_t attack_runs = 0;
    std::size_t arm_runs = 0;
};

/// Directory holding manifest.json and results.jsonl. Appends are serialized
/// through one writer; when a key repeats (forced re-runs) the last line wins.
class ResultStore {
public:
    /// Creates the directory and manifest if needed. An existing manifest
    /// whose corpus hash differs is a hard SchemaError.
    static ResultStore open(const std::string& dir, std::uint64_t corpus_hash);
    /// Read-only view. With a corpus hash, a mismatch is a SchemaError.
    static ResultStore read(const std::string& dir, std::optional<std::uint64_t> corpus_hash = std::nullopt);

    void append(const RunResult& result);
    void note_spec(std::uint64_t spec_hash, std::size_t model_cells, std::size_t attack_runs, std::size_t arm_runs);

    [[nodiscard]] bool contains(const std::string& key) const;
    [[nodiscard]] std::optional<RunResult> find(const std::string& key) const;
    /// Latest record per key, sorted by key.
    [[nodiscard]] std::vector<RunResult> records() const;
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] const StoreManifest& manifest() const { return manifest_; }
    [[nodiscard]] const std::string& directory() const { return dir_; }

    /// Throws SchemaError if any successful record's perturbation exceeds its
    /// epsilon by more than 1e-12.
    void validate() const;

private:
    ResultStore() = default;
    void load_records();
    void write_manifest() const;

    std::string dir_;
    StoreManifest manifest_;
    std::map<std::string, RunResult> records_;
    bool writable_ = false;
    std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
};

/// Full-feature bundle plus the ANOVA ranking of its training split; serves
/// one bundle per requested feature count.
struct CorpusSource {
    DatasetBundle base;
    FeatureRanking ranking;
    std::uint64_t hash = 0;

    static CorpusSource from_bundle(DatasetBundle bundle);
    [[nodiscard]] DatasetBundle bundle_for(std::size_t feature_count) const;
    [[nodiscard]] std::size_t features() const { return base.train_x.features(); }
};

struct ExecuteOptions {
    std::size_t workers = 1;
    bool force = false;               ///< re-run cells already in the store
    std::size_t max_new_runs = 0;     ///< stop after this many runs; 0 = no limit
    AsrPolicy asr_policy = AsrPolicy::any_class;
    int benign_class = 0;
    std::function<void(const RunResult&)> on_result;  ///< called under the writer lock
};

struct ExecuteSummary {
    std::size_t executed = 0;
    std::size_t skipped = 0;
    std::size_t failed = 0;
    std::size_t trainings = 0;
};

/// Executes the grid cells of `spec`, training each model cell once and
/// reusing it for its attack runs.
ExecuteSummary execute(const SweepSpec& spec, const CorpusSource& source, ResultStore& store,
                       const ExecuteOptions& options = {});

/// Executes an explicit list of runs (grid or arm runs); `arms` supplies the
/// training recipe for defense-tagged runs.
ExecuteSummary execute_runs(const std::vector<RunConfig>& runs, const std::vector<DefenseArm>& arms,
                            const TrainingConfig& training, const CorpusSource& source, ResultStore& store,
                            const ExecuteOptions& options = {});

struct DefenseComparison {
    /// Keyed by (arm name, epsilon); mean ASR over attacks and repeats.
    std::vector<AggregateStat> rows;
    std::vector<RunResult> results;
};

DefenseComparison compare_defenses(const SweepSpec& spec, const CorpusSource& source, ResultStore& store,
                                   const ExecuteOptions& options = {}, const DefenseArm& recipe = recipe_arm());

// ---------------------------------------------------------------------------
// Aggregation over stored runs
// ---------------------------------------------------------------------------

/// Group keys: depth, feature_count, activation, dropout, attack, epsilon,
/// repeat, defense. Values: asr, mean_confidence_drop, accuracy, precision,
/// recall, f1, train_time_s, attack_time_s. Failed runs and runs with an
/// undefined ASR are skipped; nothing left means no rows. Throws SchemaError
/// on an unknown key.
std::vector<AggregateStat> aggregate(const std::vector<RunResult>& results, const std::vector<std::string>& group_by,
                                     std::string_view value);

GroupKey group_key(const RunConfig& config, const std::vector<std::string>& group_by);

}  // namespace nidsrobust
