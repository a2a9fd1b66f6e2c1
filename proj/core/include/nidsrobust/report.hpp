#pragma once

// Figure tables derived from a result store. Every table is a grouped mean
// with a 95% interval produced by aggregate().

#include "nidsrobust/sweep.hpp"

#include <string>
#include <vector>

namespace nidsrobust {

struct FigureSpec {
    std::string name;
    std::vector<std::string> group_by;
    std::string value;
    bool defended = false;      ///< rows from defense arms instead of the plain grid
    bool with_samples = false;  ///< also emit per-sample confidence drops
};

/// Fixed catalog; order is the order files are written in.
const std::vector<FigureSpec>& figure_catalog();
const FigureSpec& find_figure(const std::string& name);

struct ReportTable {
    FigureSpec figure;
    std::vector<AggregateStat> rows;
    /// (group key, per-sample drop) when figure.with_samples.
    std::vector<Observation> samples;

    /// Header: group keys..., mean, ci95, n
    [[nodiscard]] std::string to_csv() const;
    /// Header: group keys..., confidence_drop
    [[nodiscard]] std::string samples_csv() const;
};

ReportTable build_figure(const FigureSpec& figure, const std::vector<RunResult>& results);

/// Writes <name>.csv (and <name>.samples.csv) for each requested figure;
/// an empty list means the whole catalog. Returns the written paths.
std::vector<std::string> write_report(const std::vector<RunResult>& results, const std::string& out_dir,
                                      const std::vector<std::string>& figures = {});

}  // namespace nidsrobust
