#include "csid/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "csid/errors.hpp"
#include "csid/strings.hpp"

namespace csid {

const char* const kHistoryCsvHeader = "iteration,cluster,spectral_error,misclassified_total,step_size";

std::vector<HistoryRow> history_rows(const RunHistory& history) {
    std::vector<HistoryRow> rows;
    for (const auto& record : history.iterations) {
        for (std::size_t j = 0; j < record.cluster_errors.size(); ++j) {
            HistoryRow row;
            row.iteration = record.iteration;
            row.cluster = static_cast<int>(j);
            row.spectral_error = record.cluster_errors[j];
            row.misclassified_total = record.misclassified >= 0 ? record.misclassified : 0;
            row.step_size = j < record.step_sizes.size() ? record.step_sizes[j] : 0.0;
            rows.push_back(row);
        }
    }
    return rows;
}

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << kHistoryCsvHeader << "\n";
    for (const auto& row : rows) {
        out << row.iteration << ',' << row.cluster << ',' << to_decimal_string(row.spectral_error)
            << ',' << row.misclassified_total << ',' << to_decimal_string(row.step_size) << "\n";
    }
    if (!out) throw IoError("failed while writing " + path);
}

std::vector<HistoryRow> read_history_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    if (line != kHistoryCsvHeader) {
        throw IoError(path + ": unexpected header '" + line + "'");
    }
    std::vector<HistoryRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 5) {
            throw IoError(path + ":" + std::to_string(line_no) + ": expected 5 fields");
        }
        HistoryRow row;
        long long iv = 0;
        if (!parse_long(fields[0], iv)) throw IoError(path + ": bad iteration field");
        row.iteration = static_cast<int>(iv);
        if (!parse_long(fields[1], iv)) throw IoError(path + ": bad cluster field");
        row.cluster = static_cast<int>(iv);
        if (!parse_double(fields[2], row.spectral_error)) {
            throw IoError(path + ": bad spectral_error field");
        }
        if (!parse_long(fields[3], iv)) throw IoError(path + ": bad misclassified field");
        row.misclassified_total = static_cast<int>(iv);
        if (!parse_double(fields[4], row.step_size)) throw IoError(path + ": bad step_size field");
        rows.push_back(row);
    }
    return rows;
}

void write_key_value_file(const std::string& path,
                          const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& [key, value] : entries) out << key << " = " << value << "\n";
    if (!out) throw IoError("failed while writing " + path);
}

void write_series_tsv(const std::string& path, const std::string& x_label,
                      const std::vector<PlotSeries>& series) {
    if (series.empty()) throw IoError("write_series_tsv: no series for " + path);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << x_label;
    for (const auto& s : series) out << '\t' << s.label;
    out << "\n";
    const std::size_t n = series[0].x.size();
    for (const auto& s : series) {
        if (s.x.size() != n || s.y.size() != n) {
            throw IoError("write_series_tsv: series length mismatch for " + path);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        out << to_decimal_string(series[0].x[i]);
        for (const auto& s : series) out << '\t' << to_decimal_string(s.y[i]);
        out << "\n";
    }
    if (!out) throw IoError("failed while writing " + path);
}

namespace {

const char* const kSeriesColors[] = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
};

std::string fmt_tick(double v) {
    std::ostringstream out;
    const double mag = std::abs(v);
    if (v != 0.0 && (mag >= 1e4 || mag < 1e-3)) {
        out.setf(std::ios::scientific);
        out.precision(0);
    } else {
        out.precision(4);
    }
    out << v;
    return out.str();
}

} // namespace

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series, bool log_y) {
    if (series.empty()) throw IoError("write_line_chart_svg: no series for " + path);
    for (const auto& s : series) {
        if (s.x.empty() || s.x.size() != s.y.size()) {
            throw IoError("write_line_chart_svg: empty or mismatched series '" + s.label + "'");
        }
    }

    double min_positive = 0.0;
    for (const auto& s : series) {
        for (double v : s.y) {
            if (v > 0.0 && (min_positive == 0.0 || v < min_positive)) min_positive = v;
        }
    }
    if (log_y && min_positive == 0.0) log_y = false;  // nothing positive to plot on a log axis

    auto y_value = [&](double v) {
        if (!log_y) return v;
        return std::log10(std::max(v, min_positive));
    };

    double xmin = series[0].x.front(), xmax = xmin;
    double ymin = y_value(series[0].y.front()), ymax = ymin;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, y_value(s.y[i]));
            ymax = std::max(ymax, y_value(s.y[i]));
        }
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;

    const double width = 760, height = 480;
    const double left = 80, right = 230, top = 50, bottom = 60;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
    auto sy = [&](double y) { return top + plot_h - (y_value(y) - ymin) / (ymax - ymin) * plot_h; };

    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << (left + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";

    // Frame and ticks.
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
        << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
    const int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        const double fx = xmin + (xmax - xmin) * i / ticks;
        const double px = sx(fx);
        out << "<line x1=\"" << px << "\" y1=\"" << (top + plot_h) << "\" x2=\"" << px
            << "\" y2=\"" << (top + plot_h + 5) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px << "\" y=\"" << (top + plot_h + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt_tick(fx) << "</text>\n";

        const double fy = ymin + (ymax - ymin) * i / ticks;
        const double py = top + plot_h - (fy - ymin) / (ymax - ymin) * plot_h;
        const double shown = log_y ? std::pow(10.0, fy) : fy;
        out << "<line x1=\"" << (left - 5) << "\" y1=\"" << py << "\" x2=\"" << left
            << "\" y2=\"" << py << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << (left - 8) << "\" y=\"" << (py + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt_tick(shown) << "</text>\n";
    }
    out << "<text x=\"" << (left + plot_w / 2) << "\" y=\"" << (height - 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
        << "</text>\n";
    out << "<text x=\"20\" y=\"" << (top + plot_h / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 20 " << (top + plot_h / 2) << ")\">" << y_label
        << (log_y ? " (log scale)" : "") << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kSeriesColors[si % (sizeof(kSeriesColors) / sizeof(*kSeriesColors))];
        if (s.x.size() == 1) {
            out << "<circle cx=\"" << sx(s.x[0]) << "\" cy=\"" << sy(s.y[0])
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        } else {
            out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                out << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
            }
            out << "\"/>\n";
        }
        const double ly = top + 16 + 18.0 * static_cast<double>(si);
        out << "<line x1=\"" << (left + plot_w + 12) << "\" y1=\"" << ly << "\" x2=\""
            << (left + plot_w + 34) << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << (left + plot_w + 40) << "\" y=\"" << (ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw IoError("failed while writing " + path);
}

} // namespace csid
