#pragma once

// Ingestion, preprocessing, feature ranking and train/test bundling for
// tabular flow records.

#include "nidsrobust/types.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nidsrobust {

// ---------------------------------------------------------------------------
// Raw records
// ---------------------------------------------------------------------------

enum class ColumnKind { numeric, categorical, label };

/// Categorical columns may be derived through an offline lookup before
/// encoding: destination port to application protocol, IPv4 address to
/// region. Raw addresses never become numeric inputs.
enum class DerivedMap { none, port_protocol, ip_region };

struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    DerivedMap derive = DerivedMap::none;
};

/// Column-kind declarations. Text format, one `name,kind` pair per line with
/// kind in {numeric, categorical, label, port, ip, drop}; `#` starts a comment.
struct Schema {
    std::vector<ColumnSchema> columns;
    std::vector<std::string> dropped;  ///< declared `drop`, never ingested

    static Schema parse(const std::string& text);
    static Schema load(const std::string& path);
};

struct RawColumn {
    ColumnSchema schema;
    std::vector<double> numbers;    ///< numeric columns
    std::vector<std::string> text;  ///< categorical and label columns
};

struct RawRecordTable {
    std::vector<RawColumn> columns;
    std::size_t row_count = 0;
    std::size_t rows_dropped = 0;              ///< unparseable numerics
    std::vector<std::string> schema_dropped;   ///< columns declared `drop`

    [[nodiscard]] const RawColumn& label_column() const;
    [[nodiscard]] RawRecordTable subset(const std::vector<std::size_t>& rows) const;
};

/// Parses a headed CSV. Every header column must be declared by the schema
/// and every declared column must be present; exactly one label column.
/// Rows whose numeric cells are empty, non-finite or unparseable are dropped.
RawRecordTable ingest_csv(const std::string& path, const Schema& schema);
RawRecordTable ingest_csv_text(const std::string& csv, const Schema& schema);

// ---------------------------------------------------------------------------
// Offline derived maps
// ---------------------------------------------------------------------------

/// Reads a two-column `key,value` text file (comma or whitespace separated,
/// `#` comments, blank lines ignored).
std::vector<std::pair<std::string, std::string>> load_key_value_file(const std::string& path);

class PortProtocolMap {
public:
    PortProtocolMap() = default;
    explicit PortProtocolMap(const std::vector<std::pair<std::string, std::string>>& entries);

    /// "other" for unmapped or malformed ports.
    [[nodiscard]] std::string lookup(const std::string& port) const;
    [[nodiscard]] const std::map<long, std::string>& entries() const { return entries_; }

private:
    std::map<long, std::string> entries_;
};

class RegionMap {
public:
    struct Prefix {
        std::uint32_t network = 0;
        int length = 0;
        std::string region;
    };

    RegionMap() = default;
    /// Keys are IPv4 CIDR blocks (`10.0.0.0/8`); a bare address means /32.
    explicit RegionMap(const std::vector<std::pair<std::string, std::string>>& entries);

    /// Longest-prefix match; "unknown" when nothing matches or the address
    /// does not parse as IPv4.
    [[nodiscard]] std::string lookup(const std::string& address) const;
    [[nodiscard]] const std::vector<Prefix>& prefixes() const { return prefixes_; }

private:
    std::vector<Prefix> prefixes_;
};

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

enum class LabelMode { binary, multiclass };

struct PreprocessConfig {
    std::vector<std::string> drop_columns;
    LabelMode label_mode = LabelMode::binary;
    std::string benign_label = "Benign";
    std::optional<std::string> port_map_path;
    std::optional<std::string> region_map_path;
};

struct NumericStat {
    std::string column;
    double mean = 0.0;
    double stddev = 1.0;
};

struct CategoryVocab {
    std::string column;
    DerivedMap derive = DerivedMap::none;
    std::vector<std::string> categories;
};

struct PreprocessorState {
    std::vector<std::string> dropped_columns;
    std::vector<NumericStat> numeric_stats;   ///< input column order
    std::vector<CategoryVocab> category_vocab;
    std::string label_column;
    LabelMode label_mode = LabelMode::binary;
    std::string benign_label = "Benign";
    std::map<std::string, int> label_map;     ///< raw label -> class id
    std::vector<std::string> class_names;     ///< class id -> name
    PortProtocolMap port_map;
    RegionMap region_map;

    [[nodiscard]] std::vector<std::string> feature_names() const;
    [[nodiscard]] std::string to_json() const;
    static PreprocessorState from_json(const std::string& text);
};

struct FeatureMatrix {
    std::vector<std::string> feature_names;
    Matrix values;  ///< samples x features

    [[nodiscard]] std::size_t samples() const { return static_cast<std::size_t>(values.rows()); }
    [[nodiscard]] std::size_t features() const { return static_cast<std::size_t>(values.cols()); }
    /// Throws SchemaError on a name/width mismatch or a non-finite value.
    void validate() const;
    [[nodiscard]] FeatureMatrix rows(const std::vector<std::size_t>& idx) const;
};

struct LabelVector {
    std::vector<int> ids;
    int k = 2;
    std::vector<std::string> class_names;

    [[nodiscard]] std::size_t size() const { return ids.size(); }
    void validate() const;
    [[nodiscard]] LabelVector rows(const std::vector<std::size_t>& idx) const;
    [[nodiscard]] std::vector<std::size_t> class_counts() const;
};

PreprocessorState fit_preprocessor(const RawRecordTable& train, const PreprocessConfig& config);

/// Standardizes numerics with the stored train statistics and one-hot encodes
/// categoricals (unseen categories encode as an all-zero block).
std::pair<FeatureMatrix, LabelVector> apply_preprocessor(const RawRecordTable& table,
                                                         const PreprocessorState& state);

// ---------------------------------------------------------------------------
// Feature ranking
// ---------------------------------------------------------------------------

struct RankedFeature {
    std::string feature;
    double f_statistic = 0.0;  ///< +inf when within-class variance is zero
    double normalized_importance = 0.0;
    double cumulative_importance = 0.0;
};

struct FeatureRanking {
    std::vector<RankedFeature> entries;  ///< sorted by f_statistic, descending
    /// Weight given to infinite F values when normalizing (10x the largest
    /// finite F). Zero when no entry is infinite.
    double infinite_cap = 0.0;

    [[nodiscard]] std::string to_csv() const;
    static FeatureRanking from_csv(const std::string& text);
};

/// One-way ANOVA F statistic per column.
FeatureRanking rank_features(const FeatureMatrix& x, const LabelVector& y);

/// ANOVA F for a single column; exposed for tests and benchmarks.
double anova_f(const Eigen::Ref<const Vector>& column, const std::vector<int>& labels, int k);

/// The k highest-ranked columns in ranking order.
FeatureMatrix select_top_k(const FeatureMatrix& x, const FeatureRanking& ranking, std::size_t k);

// ---------------------------------------------------------------------------
// Bundles
// ---------------------------------------------------------------------------

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Per-class seeded shuffle; round(fraction * class_count) rows of each class
/// go to train. Both index lists come back sorted.
SplitIndices stratified_split(const LabelVector& y, double train_fraction, Seed seed);

struct DatasetBundle {
    FeatureMatrix train_x;
    FeatureMatrix test_x;
    LabelVector train_y;
    LabelVector test_y;
    std::size_t feature_subset_size = 0;
    Seed seed = 0;
    std::vector<std::size_t> train_rows;  ///< source row ids
    std::vector<std::size_t> test_rows;

    void validate() const;
    [[nodiscard]] std::uint64_t fingerprint() const;
    void save(const std::string& path) const;
    static DatasetBundle load(const std::string& path);
};

DatasetBundle make_bundle(const FeatureMatrix& x, const LabelVector& y, double train_fraction,
                          bool undersample, Seed seed);
DatasetBundle make_bundle(const FeatureMatrix& x, const LabelVector& y, const SplitIndices& split,
                          bool undersample, Seed seed);

/// Restricts both splits to the top-k ranked features.
DatasetBundle select_bundle_features(const DatasetBundle& bundle, const FeatureRanking& ranking,
                                     std::size_t k);

/// Per-feature [min, max] over the training split.
struct FeatureRange {
    Vector lower;
    Vector upper;
};
FeatureRange train_feature_range(const DatasetBundle& bundle);

// ---------------------------------------------------------------------------
// Synthetic corpus
// ---------------------------------------------------------------------------

struct SynthSpec {
    double separation = 6.0;       ///< distance between class means per informative dim
    std::size_t informative = 2;   ///< leading informative dims; the rest are noise
    double decay = 1.0;            ///< informative dim j is separated by separation * decay^j
    double positive_fraction = 0.5;
};

/// Two unit-variance Gaussian clusters at -/+ separation/2 along the
/// informative dimensions. Class 1 ("attack") is drawn with probability
/// positive_fraction. Deterministic per seed.
std::pair<FeatureMatrix, LabelVector> synth_dataset(const SynthSpec& spec, std::size_t n,
                                                    std::size_t d, Seed seed);

}  // namespace nidsrobust
