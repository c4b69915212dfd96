#pragma once

#include <string>
#include <vector>

#include "csid/sysid.hpp"

namespace csid {

// One row of a run-history CSV. Schema (stable):
//   iteration,cluster,spectral_error,misclassified_total,step_size
// misclassified_total is the misclassification count at that iteration's
// cluster-estimation phase; modes without a clustering phase write 0.
struct HistoryRow {
    int iteration = 0;
    int cluster = 0;
    double spectral_error = 0.0;
    int misclassified_total = 0;
    double step_size = 0.0;
};

extern const char* const kHistoryCsvHeader;

std::vector<HistoryRow> history_rows(const RunHistory& history);
void write_history_csv(const std::string& path, const std::vector<HistoryRow>& rows);
std::vector<HistoryRow> read_history_csv(const std::string& path);

void write_key_value_file(const std::string& path,
                          const std::vector<std::pair<std::string, std::string>>& entries);

// A named polyline for the line charts.
struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Tab-separated table: first column x, one column per series (series must
// share their x grid).
void write_series_tsv(const std::string& path, const std::string& x_label,
                      const std::vector<PlotSeries>& series);

// Static SVG line chart. log_y switches the y axis to log10; non-positive
// values are clamped to the smallest positive value in the data.
void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series, bool log_y);

} // namespace csid
