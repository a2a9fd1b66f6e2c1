#include "nidsrobust/metrics.hpp"

#include "nidsrobust/attacks.hpp"
#include "nidsrobust/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>

namespace nidsrobust {

CleanMetrics clean_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred, Averaging mode,
                           int positive, int classes) {
    if (y_true.empty()) throw SchemaError("clean metrics need at least one sample");
    if (y_true.size() != y_pred.size()) throw SchemaError("y_true and y_pred differ in length");
    int k = classes;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] < 0 || y_pred[i] < 0) throw SchemaError("negative class id");
        k = std::max({k, y_true[i] + 1, y_pred[i] + 1});
    }
    k = std::max(k, 2);
    if (mode == Averaging::binary && (positive < 0 || positive >= k))
        throw SchemaError("positive class out of range");

    CleanMetrics m;
    m.mode = mode;
    m.confusion.assign(static_cast<std::size_t>(k), std::vector<std::size_t>(static_cast<std::size_t>(k), 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        ++m.confusion[static_cast<std::size_t>(y_true[i])][static_cast<std::size_t>(y_pred[i])];
        if (y_true[i] == y_pred[i]) ++correct;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());

    auto class_scores = [&](int c) {
        const auto cc = static_cast<std::size_t>(c);
        const double tp = static_cast<double>(m.confusion[cc][cc]);
        double predicted = 0.0;
        double actual = 0.0;
        for (std::size_t r = 0; r < m.confusion.size(); ++r) {
            predicted += static_cast<double>(m.confusion[r][cc]);
            actual += static_cast<double>(m.confusion[cc][r]);
        }
        return std::pair{predicted > 0.0 ? tp / predicted : 0.0, actual > 0.0 ? tp / actual : 0.0};
    };

    if (mode == Averaging::binary) {
        std::tie(m.precision, m.recall) = class_scores(positive);
    } else {
        for (int c = 0; c < k; ++c) {
            const auto [p, r] = class_scores(c);
            m.precision += p;
            m.recall += r;
        }
        m.precision /= k;
        m.recall /= k;
    }
    const double pr = m.precision + m.recall;
    m.f1 = pr > 0.0 ? 2.0 * m.precision * m.recall / pr : 0.0;
    return m;
}

namespace {

void check_aligned(const std::vector<int>& a, const std::vector<int>& b, const std::vector<int>& c) {
    if (a.size() != b.size() || a.size() != c.size()) throw SchemaError("prediction vectors are not aligned");
}

bool counted(int y, int clean, AsrPolicy policy, int benign) {
    return clean == y && (policy == AsrPolicy::any_class || y != benign);
}

}  // namespace

AsrResult asr(const std::vector<int>& clean_pred, const std::vector<int>& adv_pred, const std::vector<int>& y_true,
              AsrPolicy policy, int benign_class) {
    check_aligned(clean_pred, adv_pred, y_true);
    AsrResult r;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (!counted(y_true[i], clean_pred[i], policy, benign_class)) continue;
        ++r.denominator;
        if (adv_pred[i] != y_true[i]) ++r.flips;
    }
    if (r.denominator > 0) r.asr = static_cast<double>(r.flips) / static_cast<double>(r.denominator);
    return r;
}

std::vector<double> confidence_drop(const Matrix& p_before, const Matrix& p_after, const std::vector<int>& y_true,
                                    const std::vector<int>& clean_pred, AsrPolicy policy, int benign_class) {
    if (p_before.rows() != p_after.rows() || p_before.cols() != p_after.cols() ||
        static_cast<std::size_t>(p_before.rows()) != y_true.size() || y_true.size() != clean_pred.size())
        throw SchemaError("confidence drop inputs are not aligned");
    std::vector<double> drops;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (!counted(y_true[i], clean_pred[i], policy, benign_class)) continue;
        const auto r = static_cast<Eigen::Index>(i);
        const auto c = static_cast<Eigen::Index>(y_true[i]);
        drops.push_back(p_before(r, c) - p_after(r, c));
    }
    return drops;
}

RobustnessMetrics robustness_metrics(const BatchAttack& attack, AsrPolicy policy, int benign_class) {
    RobustnessMetrics m;
    const auto a = asr(attack.clean_pred, attack.adv_pred, attack.y_true, policy, benign_class);
    m.asr = a.asr;
    m.denominator = a.denominator;
    m.flips = a.flips;
    m.confidence_drops =
        confidence_drop(attack.p_clean, attack.p_adv, attack.y_true, attack.clean_pred, policy, benign_class);
    if (!m.confidence_drops.empty())
        m.mean_confidence_drop = std::accumulate(m.confidence_drops.begin(), m.confidence_drops.end(), 0.0) /
                                 static_cast<double>(m.confidence_drops.size());
    m.max_linf = attack.outcome.max_linf();
    return m;
}

std::string to_string(const KeyValue& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::string>) {
                return x;
            } else if constexpr (std::is_same_v<T, double>) {
                char buf[64];
                const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
                return std::string(buf, ptr);
            } else {
                return std::to_string(x);
            }
        },
        v);
}

std::vector<AggregateStat> aggregate(const std::vector<Observation>& observations) {
    if (observations.empty()) throw SchemaError("nothing to aggregate");
    std::map<GroupKey, std::vector<double>> groups;
    for (const auto& o : observations) groups[o.key].push_back(o.value);

    std::vector<AggregateStat> out;
    out.reserve(groups.size());
    for (const auto& [key, values] : groups) {
        AggregateStat s;
        s.key = key;
        s.n = values.size();
        s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        s.min = *lo;
        s.max = *hi;
        if (s.n > 1) {
            double ss = 0.0;
            for (double v : values) ss += (v - s.mean) * (v - s.mean);
            const double sd = std::sqrt(ss / static_cast<double>(s.n - 1));
            s.ci95_half_width = kZ95 * sd / std::sqrt(static_cast<double>(s.n));
        }
        s.small_sample = s.n < kSmallSample;
        out.push_back(std::move(s));
    }
    return out;
}

double pooled_ci95_half_width(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw SchemaError("pooled interval needs two samples per group");
    auto ss = [](const std::vector<double>& v) {
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return s;
    };
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double sp = std::sqrt((ss(a) + ss(b)) / (na + nb - 2.0));
    return kZ95 * sp * std::sqrt(1.0 / na + 1.0 / nb);
}

}  // namespace nidsrobust
