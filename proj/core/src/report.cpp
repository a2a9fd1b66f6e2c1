#include "nidsrobust/report.hpp"

#include "nidsrobust/binio.hpp"
#include "nidsrobust/error.hpp"

#include <filesystem>
#include <sstream>

namespace nidsrobust {

const std::vector<FigureSpec>& figure_catalog() {
    static const std::vector<FigureSpec> catalog{
        {"depth_asr", {"depth"}, "asr", false, false},
        {"eps_asr", {"depth", "epsilon"}, "asr", false, false},
        {"attack_asr", {"depth", "attack"}, "asr", false, false},
        {"activation_asr", {"activation", "attack"}, "asr", false, false},
        {"activation_depth_asr", {"activation", "depth"}, "asr", false, false},
        {"dropout_asr", {"depth", "dropout"}, "asr", false, false},
        {"features_asr", {"feature_count", "depth"}, "asr", false, false},
        {"conf_depth", {"depth"}, "mean_confidence_drop", false, true},
        {"conf_features", {"feature_count"}, "mean_confidence_drop", false, true},
        {"conf_attack", {"depth", "attack"}, "mean_confidence_drop", false, true},
        {"clean_accuracy", {"depth", "activation"}, "accuracy", false, false},
        {"defense_compare", {"defense", "epsilon"}, "asr", true, false},
    };
    return catalog;
}

const FigureSpec& find_figure(const std::string& name) {
    for (const auto& f : figure_catalog())
        if (f.name == name) return f;
    throw SchemaError("unknown figure '" + name + "'");
}

namespace {

std::string header(const std::vector<std::string>& keys) {
    std::string h;
    for (const auto& k : keys) h += k + ",";
    return h;
}

std::string row_prefix(const GroupKey& key) {
    std::string s;
    for (const auto& v : key) s += to_string(v) + ",";
    return s;
}

}  // namespace

std::string ReportTable::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << header(figure.group_by) << "mean,ci95,n\n";
    for (const auto& r : rows) out << row_prefix(r.key) << r.mean << ',' << r.ci95_half_width << ',' << r.n << '\n';
    return out.str();
}

std::string ReportTable::samples_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << header(figure.group_by) << "confidence_drop\n";
    for (const auto& s : samples) out << row_prefix(s.key) << s.value << '\n';
    return out.str();
}

ReportTable build_figure(const FigureSpec& figure, const std::vector<RunResult>& results) {
    std::vector<RunResult> selected;
    for (const auto& r : results)
        if ((r.config.defense != "none") == figure.defended) selected.push_back(r);
    ReportTable t;
    t.figure = figure;
    t.rows = aggregate(selected, figure.group_by, figure.value);
    if (figure.with_samples)
        for (const auto& r : selected) {
            if (!r.ok) continue;
            const auto key = group_key(r.config, figure.group_by);
            for (double d : r.robust.confidence_drops) t.samples.push_back({key, d});
        }
    return t;
}

std::vector<std::string> write_report(const std::vector<RunResult>& results, const std::string& out_dir,
                                      const std::vector<std::string>& figures) {
    std::vector<const FigureSpec*> chosen;
    if (figures.empty())
        for (const auto& f : figure_catalog()) chosen.push_back(&f);
    else
        for (const auto& name : figures) chosen.push_back(&find_figure(name));

    std::vector<std::string> written;
    const std::filesystem::path dir(out_dir);
    for (const auto* f : chosen) {
        const auto table = build_figure(*f, results);
        const auto path = (dir / (f->name + ".csv")).string();
        binio::atomic_write(path, table.to_csv());
        written.push_back(path);
        if (f->with_samples) {
            const auto spath = (dir / (f->name + ".samples.csv")).string();
            binio::atomic_write(spath, table.samples_csv());
            written.push_back(spath);
        }
    }
    return written;
}

}  // namespace nidsrobust
