#pragma once

// Clean classification metrics, attack success rate, confidence drop and
// grouped means with normal-approximation 95% confidence intervals.

#include "nidsrobust/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace nidsrobust {

struct BatchAttack;

enum class Averaging { binary, macro };

struct CleanMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    /// confusion[true][predicted]
    std::vector<std::vector<std::size_t>> confusion;
    Averaging mode = Averaging::binary;
};

/// Binary mode scores `positive` against everything else. Macro mode
/// averages per-class precision and recall unweighted; f1 is always the
/// harmonic mean of the reported precision and recall.
CleanMetrics clean_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                           Averaging mode = Averaging::binary, int positive = 1, int classes = 0);

/// Which correctly classified rows count towards the ASR denominator.
enum class AsrPolicy {
    any_class,          ///< every correctly classified row
    attack_class_only,  ///< only correctly classified non-benign rows
};

struct AsrResult {
    std::optional<double> asr;  ///< empty when the denominator is zero
    std::size_t denominator = 0;
    std::size_t flips = 0;
};

AsrResult asr(const std::vector<int>& clean_pred, const std::vector<int>& adv_pred, const std::vector<int>& y_true,
              AsrPolicy policy = AsrPolicy::any_class, int benign_class = 0);

/// p_before[i, y_i] - p_after[i, y_i] for every row in the ASR denominator,
/// in row order. Negative values (confidence gains) are kept.
std::vector<double> confidence_drop(const Matrix& p_before, const Matrix& p_after, const std::vector<int>& y_true,
                                    const std::vector<int>& clean_pred, AsrPolicy policy = AsrPolicy::any_class,
                                    int benign_class = 0);

struct RobustnessMetrics {
    std::optional<double> asr;
    std::size_t denominator = 0;
    std::size_t flips = 0;
    std::vector<double> confidence_drops;
    double mean_confidence_drop = 0.0;
    double max_linf = 0.0;
};

RobustnessMetrics robustness_metrics(const BatchAttack& attack, AsrPolicy policy = AsrPolicy::any_class,
                                     int benign_class = 0);

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

using KeyValue = std::variant<std::int64_t, double, std::string>;
using GroupKey = std::vector<KeyValue>;

std::string to_string(const KeyValue& v);

struct Observation {
    GroupKey key;
    double value = 0.0;
};

inline constexpr double kZ95 = 1.96;
inline constexpr std::size_t kSmallSample = 10;

struct AggregateStat {
    GroupKey key;
    double mean = 0.0;
    double ci95_half_width = 0.0;  ///< 1.96 * s / sqrt(n), sample s
    std::size_t n = 0;
    bool small_sample = false;     ///< n < 10; n == 1 has half-width 0
    double min = 0.0;
    double max = 0.0;
};

/// Groups observations by key and returns one row per group, ordered by key.
std::vector<AggregateStat> aggregate(const std::vector<Observation>& observations);

/// Two-sample pooled half-width 1.96 * s_p * sqrt(1/n1 + 1/n2).
double pooled_ci95_half_width(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace nidsrobust
