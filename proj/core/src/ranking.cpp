#include "nidsrobust/datapipe.hpp"

#include "nidsrobust/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace nidsrobust {

namespace {

std::string format_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

double parse_real(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw SchemaError("ranking CSV: bad number '" + s + "'");
    return v;
}

}  // namespace

double anova_f(const Eigen::Ref<const Vector>& column, const std::vector<int>& labels, int k) {
    const auto n = static_cast<std::size_t>(column.size());
    std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
    std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
    std::vector<double> lo(static_cast<std::size_t>(k), std::numeric_limits<double>::infinity());
    std::vector<double> hi(static_cast<std::size_t>(k), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        const double v = column(static_cast<Eigen::Index>(i));
        sum[c] += v;
        ++count[c];
        lo[c] = std::min(lo[c], v);
        hi[c] = std::max(hi[c], v);
    }

    std::size_t groups = 0;
    double grand = 0.0;
    bool constant_within = true;
    std::vector<double> mean(static_cast<std::size_t>(k), 0.0);
    for (std::size_t c = 0; c < count.size(); ++c) {
        if (count[c] == 0) continue;
        ++groups;
        mean[c] = sum[c] / static_cast<double>(count[c]);
        grand += sum[c];
        if (lo[c] != hi[c]) constant_within = false;
    }
    grand /= static_cast<double>(n);

    double ssb = 0.0;
    for (std::size_t c = 0; c < count.size(); ++c)
        if (count[c] > 0) ssb += static_cast<double>(count[c]) * (mean[c] - grand) * (mean[c] - grand);

    // Exact zero within-class spread is detected from the raw values so that
    // rounding residue in the class means cannot masquerade as variance.
    if (constant_within) {
        const double first = lo[static_cast<std::size_t>(labels[0])];
        for (std::size_t c = 0; c < count.size(); ++c)
            if (count[c] > 0 && lo[c] != first) return std::numeric_limits<double>::infinity();
        return 0.0;
    }

    double ssw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dlt = column(static_cast<Eigen::Index>(i)) - mean[static_cast<std::size_t>(labels[i])];
        ssw += dlt * dlt;
    }
    const double df_between = static_cast<double>(groups - 1);
    const double df_within = static_cast<double>(n - groups);
    return (ssb / df_between) / (ssw / df_within);
}

FeatureRanking rank_features(const FeatureMatrix& x, const LabelVector& y) {
    if (x.features() == 0) throw SchemaError("cannot rank zero features");
    if (x.samples() != y.size()) throw SchemaError("feature matrix and labels are not paired");
    const auto counts = y.class_counts();
    std::size_t present = 0;
    for (auto c : counts) {
        if (c == 0) continue;
        ++present;
        if (c < 2) throw SchemaError("every present class needs at least two samples for ANOVA");
    }
    if (present < 2) throw SchemaError("ANOVA ranking needs at least two classes");

    const auto d = x.features();
    std::vector<double> f(d);
    for (std::size_t j = 0; j < d; ++j) f[j] = anova_f(x.values.col(static_cast<Eigen::Index>(j)), y.ids, y.k);

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });

    FeatureRanking ranking;
    double max_finite = 0.0;
    bool any_infinite = false;
    for (double v : f) {
        if (std::isinf(v)) any_infinite = true;
        else max_finite = std::max(max_finite, v);
    }
    if (any_infinite) ranking.infinite_cap = max_finite > 0.0 ? 10.0 * max_finite : 1.0;

    std::vector<double> weight(d);
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        weight[j] = std::isinf(f[j]) ? ranking.infinite_cap : f[j];
        total += weight[j];
    }

    double running = 0.0;
    for (auto j : order) {
        RankedFeature e;
        e.feature = x.feature_names[j];
        e.f_statistic = f[j];
        e.normalized_importance = total > 0.0 ? weight[j] / total : 1.0 / static_cast<double>(d);
        running += e.normalized_importance;
        e.cumulative_importance = std::min(running, 1.0);
        ranking.entries.push_back(std::move(e));
    }
    return ranking;
}

FeatureMatrix select_top_k(const FeatureMatrix& x, const FeatureRanking& ranking, std::size_t k) {
    if (k < 1 || k > x.features() || k > ranking.entries.size())
        throw SchemaError("top-k out of range: k=" + std::to_string(k) + " with " + std::to_string(x.features()) +
                          " features");
    std::unordered_map<std::string, Eigen::Index> col;
    for (std::size_t j = 0; j < x.feature_names.size(); ++j)
        col.emplace(x.feature_names[j], static_cast<Eigen::Index>(j));

    FeatureMatrix out;
    out.values.resize(x.values.rows(), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
        const auto& name = ranking.entries[i].feature;
        const auto it = col.find(name);
        if (it == col.end()) throw SchemaError("ranked feature '" + name + "' not present in matrix");
        out.values.col(static_cast<Eigen::Index>(i)) = x.values.col(it->second);
        out.feature_names.push_back(name);
    }
    return out;
}

std::string FeatureRanking::to_csv() const {
    std::ostringstream out;
    out << "# infinite_cap=" << format_real(infinite_cap) << "\n";
    out << "rank,feature,f_statistic,normalized_importance,cumulative_importance\n";
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        out << (i + 1) << ',' << e.feature << ',' << format_real(e.f_statistic) << ','
            << format_real(e.normalized_importance) << ',' << format_real(e.cumulative_importance) << '\n';
    }
    return out.str();
}

FeatureRanking FeatureRanking::from_csv(const std::string& text) {
    FeatureRanking r;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.rfind("# infinite_cap=", 0) == 0) {
            r.infinite_cap = parse_real(line.substr(15));
            continue;
        }
        if (line[0] == '#') continue;
        if (!header) {
            if (line != "rank,feature,f_statistic,normalized_importance,cumulative_importance")
                throw SchemaError("ranking CSV: unexpected header");
            header = true;
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 5) throw SchemaError("ranking CSV: expected 5 columns");
        r.entries.push_back({cells[1], parse_real(cells[2]), parse_real(cells[3]), parse_real(cells[4])});
    }
    if (!header) throw SchemaError("ranking CSV: missing header");
    return r;
}

}  // namespace nidsrobust
