#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "lteval/error.hpp"
#include "lteval/experiment.hpp"

namespace lteval {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::optional<double> to_real(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Panel {
    const char* name;
    const char* title;
    const char* x_column;
    const char* y_column;
    const char* x_label;
    const char* y_label;
    bool log_x;
};

constexpr Panel kPanels[] = {
    {"tradeoff", "Sustainability vs. performance", "gco2e", "accuracy", "emissions (gCO2e)", "accuracy", true},
    {"performance", "Performance vs. instances", "t_k", "accuracy", "instances (log)", "accuracy", true},
    {"sustainability", "Emissions vs. instances", "t_k", "gco2e", "instances (log)", "emissions (gCO2e)", true},
};

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Series {
    std::string run_id;
    std::vector<std::pair<double, double>> points;
};

class Axis {
public:
    Axis(double lo, double hi, bool log, double px_lo, double px_hi) : log_(log), px_lo_(px_lo), px_hi_(px_hi) {
        lo_ = f(lo);
        hi_ = f(hi);
        if (!(hi_ > lo_)) {
            const double pad = std::abs(lo_) > 0 ? std::abs(lo_) * 0.1 : 1.0;
            lo_ -= pad;
            hi_ += pad;
        }
    }
    double map(double v) const { return px_lo_ + (f(v) - lo_) / (hi_ - lo_) * (px_hi_ - px_lo_); }
    double lo_value() const { return inv(lo_); }
    double hi_value() const { return inv(hi_); }

private:
    double f(double v) const { return log_ ? std::log10(v) : v; }
    double inv(double v) const { return log_ ? std::pow(10.0, v) : v; }
    bool log_;
    double px_lo_, px_hi_, lo_ = 0, hi_ = 1;
};

} // namespace

std::size_t CheckpointTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("checkpoints.csv has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

CheckpointTable read_checkpoints(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot read " + file.string());
    CheckpointTable t;
    std::string line;
    if (!std::getline(in, line)) throw DataError(file.string() + ": empty file");
    t.header = split_csv(line);
    for (const char* col : kCheckpointColumns)
        if (std::find(t.header.begin(), t.header.end(), col) == t.header.end())
            throw DataError(file.string() + ": missing column '" + col + "'");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != t.header.size())
            throw DataError(file.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(t.header.size()) + " cells, got " + std::to_string(cells.size()));
        t.rows.push_back(std::move(cells));
    }
    return t;
}

PlotOutputs plot_runs(const std::vector<std::filesystem::path>& dirs, const std::filesystem::path& out_path) {
    if (dirs.empty()) throw ContractError("plot: at least one result directory is required");

    PlotOutputs outputs;
    if (out_path.extension() == ".csv") {
        outputs.csv = out_path;
        outputs.svg = std::filesystem::path(out_path).replace_extension(".svg");
    } else {
        outputs.svg = out_path.extension() == ".svg" ? out_path : std::filesystem::path(out_path.string() + ".svg");
        outputs.csv = std::filesystem::path(outputs.svg).replace_extension(".csv");
    }
    if (outputs.svg.has_parent_path()) std::filesystem::create_directories(outputs.svg.parent_path());

    std::vector<CheckpointTable> tables;
    for (const auto& d : dirs) tables.push_back(read_checkpoints(d / "checkpoints.csv"));

    std::ofstream csv(outputs.csv, std::ios::binary | std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot write " + outputs.csv.string());
    csv << "run_id,source,panel,k,x_column,x,y_column,y\n";

    // series[panel][run]
    std::vector<std::vector<Series>> series(std::size(kPanels));
    for (std::size_t r = 0; r < tables.size(); ++r) {
        const auto& t = tables[r];
        const auto run_col = t.column("run_id");
        const auto k_col = t.column("k");
        std::string run_id = t.rows.empty() ? dirs[r].filename().string() : t.rows.front()[run_col];
        for (std::size_t p = 0; p < std::size(kPanels); ++p) {
            const auto& panel = kPanels[p];
            const auto xc = t.column(panel.x_column);
            const auto yc = t.column(panel.y_column);
            Series s;
            s.run_id = run_id;
            for (const auto& row : t.rows) {
                csv << row[run_col] << ',' << dirs[r].string() << ',' << panel.name << ',' << row[k_col] << ','
                    << panel.x_column << ',' << row[xc] << ',' << panel.y_column << ',' << row[yc] << '\n';
                auto x = to_real(row[xc]);
                auto y = to_real(row[yc]);
                if (x && y) s.points.emplace_back(*x, *y);
            }
            series[p].push_back(std::move(s));
        }
    }

    constexpr double kPanelW = 400, kPanelH = 320, kMargin = 60;
    const double legend_h = 20.0 * static_cast<double>(tables.size()) + 20.0;
    const double width = kPanelW * std::size(kPanels);
    const double height = kPanelH + legend_h;

    std::ofstream svg(outputs.svg, std::ios::binary | std::ios::trunc);
    if (!svg) throw std::runtime_error("cannot write " + outputs.svg.string());
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t p = 0; p < std::size(kPanels); ++p) {
        const auto& panel = kPanels[p];
        const double ox = kPanelW * static_cast<double>(p);
        double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
        bool all_positive_x = true;
        for (const auto& s : series[p])
            for (auto [x, y] : s.points) {
                xlo = std::min(xlo, x);
                xhi = std::max(xhi, x);
                ylo = std::min(ylo, y);
                yhi = std::max(yhi, y);
                all_positive_x = all_positive_x && x > 0.0;
            }
        if (!std::isfinite(xlo)) xlo = 1, xhi = 10, ylo = 0, yhi = 1;
        const bool log_x = panel.log_x && all_positive_x;
        const Axis ax(xlo, xhi, log_x, ox + kMargin, ox + kPanelW - 20);
        const Axis ay(ylo, yhi, false, kPanelH - 40, 30);

        svg << "<g id=\"panel-" << panel.name << "\">\n";
        svg << "<text x=\"" << ox + kPanelW / 2 << "\" y=\"18\" text-anchor=\"middle\" font-weight=\"bold\">"
            << panel.title << "</text>\n";
        svg << "<rect x=\"" << ox + kMargin << "\" y=\"30\" width=\"" << kPanelW - kMargin - 20 << "\" height=\""
            << kPanelH - 70 << "\" fill=\"none\" stroke=\"#444\"/>\n";
        svg << "<text x=\"" << ox + kPanelW / 2 << "\" y=\"" << kPanelH - 8 << "\" text-anchor=\"middle\">"
            << panel.x_label << "</text>\n";
        svg << "<text x=\"" << ox + 14 << "\" y=\"" << kPanelH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 "
            << ox + 14 << ' ' << kPanelH / 2 << ")\">" << panel.y_label << "</text>\n";
        svg << "<text x=\"" << ox + kMargin << "\" y=\"" << kPanelH - 26 << "\">" << format_real(ax.lo_value())
            << "</text>\n";
        svg << "<text x=\"" << ox + kPanelW - 20 << "\" y=\"" << kPanelH - 26 << "\" text-anchor=\"end\">"
            << format_real(ax.hi_value()) << "</text>\n";
        svg << "<text x=\"" << ox + kMargin - 4 << "\" y=\"" << kPanelH - 40 << "\" text-anchor=\"end\">"
            << format_real(ay.lo_value()) << "</text>\n";
        svg << "<text x=\"" << ox + kMargin - 4 << "\" y=\"40\" text-anchor=\"end\">" << format_real(ay.hi_value())
            << "</text>\n";

        for (std::size_t r = 0; r < series[p].size(); ++r) {
            const auto& s = series[p][r];
            const char* color = kPalette[r % std::size(kPalette)];
            svg << "<polyline class=\"run\" data-run=\"" << xml_escape(s.run_id) << "\" fill=\"none\" stroke=\""
                << color << "\" stroke-width=\"1.5\" points=\"";
            for (auto [x, y] : s.points) svg << ax.map(x) << ',' << ay.map(y) << ' ';
            svg << "\"/>\n";
            for (auto [x, y] : s.points)
                svg << "<circle cx=\"" << ax.map(x) << "\" cy=\"" << ay.map(y) << "\" r=\"2.5\" fill=\"" << color
                    << "\"/>\n";
        }
        svg << "</g>\n";
    }

    for (std::size_t r = 0; r < tables.size(); ++r) {
        const double y = kPanelH + 15 + 20.0 * static_cast<double>(r);
        svg << "<rect x=\"" << kMargin << "\" y=\"" << y - 9 << "\" width=\"14\" height=\"4\" fill=\""
            << kPalette[r % std::size(kPalette)] << "\"/>\n";
        svg << "<text x=\"" << kMargin + 20 << "\" y=\"" << y << "\">" << xml_escape(series[0][r].run_id)
            << "</text>\n";
    }
    svg << "</svg>\n";
    return outputs;
}

} // namespace lteval
