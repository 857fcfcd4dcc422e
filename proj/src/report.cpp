#include "nashlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "nashlab/errors.hpp"

namespace nashlab {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

constexpr const char* kPalette[] = {"#1f6fb2", "#c74440", "#3a8f5d", "#8c5fa8",
                                    "#c78f2e", "#3aa0a8", "#9b4f63", "#6b6b6b"};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace

bool ExperimentReport::pass() const {
    return std::all_of(criteria.begin(), criteria.end(),
                       [](const CriterionResult& c) { return c.pass; });
}

void ExperimentReport::add(const std::string& run, const std::string& module,
                           const std::string& metric, double value, std::uint64_t seed) {
    metrics.push_back({run, module, metric, value, seed});
}

void ExperimentReport::require(const std::string& name, bool ok, const std::string& detail) {
    criteria.push_back({name, ok, detail});
}

std::string report_csv(const ExperimentReport& report) {
    std::string out = "run,module,metric,value,seed\n";
    for (const MetricRow& row : report.metrics) {
        out += csv_escape(row.run) + ',' + csv_escape(row.module) + ',' +
               csv_escape(row.metric) + ',' + fmt(row.value) + ',' + std::to_string(row.seed) +
               '\n';
    }
    return out;
}

std::string report_json(const ExperimentReport& report) {
    nlohmann::json root;
    root["kind"] = report.kind;
    root["config_hash"] = report.config_hash;
    root["version"] = report.version;
    nlohmann::json metrics = nlohmann::json::array();
    for (const MetricRow& row : report.metrics)
        metrics.push_back({{"run", row.run},
                           {"module", row.module},
                           {"metric", row.metric},
                           {"value", row.value},
                           {"seed", row.seed}});
    root["metrics"] = std::move(metrics);
    nlohmann::json criteria = nlohmann::json::array();
    for (const CriterionResult& c : report.criteria)
        criteria.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    root["criteria"] = std::move(criteria);
    root["pass"] = report.pass();
    return root.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& text) {
    nlohmann::json root = nlohmann::json::parse(text, nullptr, false);
    if (root.is_discarded()) throw IoError("report: invalid JSON");
    ExperimentReport rep;
    rep.kind = root.value("kind", "");
    rep.config_hash = root.value("config_hash", "");
    rep.version = root.value("version", "");
    for (const auto& row : root.value("metrics", nlohmann::json::array()))
        rep.metrics.push_back({row.value("run", ""), row.value("module", ""),
                               row.value("metric", ""), row.value("value", 0.0),
                               row.value("seed", std::uint64_t{0})});
    for (const auto& c : root.value("criteria", nlohmann::json::array()))
        rep.criteria.push_back({c.value("name", ""), c.value("pass", false), c.value("detail", "")});
    return rep;
}

std::string line_plot_svg(const std::string& title, const std::string& x_label,
                          const std::string& y_label, std::span<const SvgSeries> series) {
    constexpr double W = 640, H = 400, ML = 70, MR = 150, MT = 40, MB = 50;
    const double pw = W - ML - MR, ph = H - MT - MB;

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool any = false;
    for (const SvgSeries& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (!any) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                any = true;
            } else {
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        }
    }
    if (xmax - xmin < 1e-300) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax - ymin < 1e-300) {
        const double pad = std::max(0.5, std::abs(ymax) * 0.1);
        ymin -= pad;
        ymax += pad;
    }
    auto px = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return MT + ph - (y - ymin) / (ymax - ymin) * ph; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 400\" "
           "font-family=\"monospace\" font-size=\"12\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"#ffffff\"/>\n";
    svg += "<text x=\"" + fmt_px(ML + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
           xml_escape(title) + "</text>\n";

    // frame and ticks
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        const std::string gx = fmt_px(px(fx)), gy = fmt_px(py(fy));
        svg += "<line x1=\"" + gx + "\" y1=\"" + fmt_px(MT) + "\" x2=\"" + gx + "\" y2=\"" +
               fmt_px(MT + ph) + "\" stroke=\"#dddddd\"/>\n";
        svg += "<line x1=\"" + fmt_px(ML) + "\" y1=\"" + gy + "\" x2=\"" + fmt_px(ML + pw) +
               "\" y2=\"" + gy + "\" stroke=\"#dddddd\"/>\n";
        svg += "<text x=\"" + gx + "\" y=\"" + fmt_px(MT + ph + 16) +
               "\" text-anchor=\"middle\">" + xml_escape(fmt_tick(fx)) + "</text>\n";
        svg += "<text x=\"" + fmt_px(ML - 6) + "\" y=\"" + fmt_px(py(fy) + 4) +
               "\" text-anchor=\"end\">" + xml_escape(fmt_tick(fy)) + "</text>\n";
    }
    svg += "<rect x=\"" + fmt_px(ML) + "\" y=\"" + fmt_px(MT) + "\" width=\"" + fmt_px(pw) +
           "\" height=\"" + fmt_px(ph) + "\" fill=\"none\" stroke=\"#333333\"/>\n";
    svg += "<text x=\"" + fmt_px(ML + pw / 2) + "\" y=\"" + fmt_px(H - 12) +
           "\" text-anchor=\"middle\">" + xml_escape(x_label) + "</text>\n";
    svg += "<text x=\"16\" y=\"" + fmt_px(MT + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           fmt_px(MT + ph / 2) + ")\">" + xml_escape(y_label) + "</text>\n";

    std::size_t idx = 0;
    for (const SvgSeries& s : series) {
        const char* color = kPalette[idx % (sizeof(kPalette) / sizeof(kPalette[0]))];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            pts += fmt_px(px(s.x[i])) + "," + fmt_px(py(s.y[i])) + " ";
        }
        if (!pts.empty()) {
            svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
                   "\" stroke-width=\"1.5\"/>\n";
            for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                svg += "<circle cx=\"" + fmt_px(px(s.x[i])) + "\" cy=\"" + fmt_px(py(s.y[i])) +
                       "\" r=\"2.5\" fill=\"" + std::string(color) + "\"/>\n";
            }
        }
        const double ly = MT + 14.0 * static_cast<double>(idx + 1);
        svg += "<rect x=\"" + fmt_px(W - MR + 10) + "\" y=\"" + fmt_px(ly - 8) +
               "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
        svg += "<text x=\"" + fmt_px(W - MR + 24) + "\" y=\"" + fmt_px(ly) + "\">" +
               xml_escape(s.label) + "</text>\n";
        ++idx;
    }
    if (series.empty()) {
        svg += "<text x=\"" + fmt_px(ML + pw / 2) + "\" y=\"" + fmt_px(MT + ph / 2) +
               "\" text-anchor=\"middle\" fill=\"#888888\">no series</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void emit_report(const ExperimentReport& report, const std::string& dir, bool csv, bool json,
                 bool svg) {
    std::filesystem::create_directories(dir);
    if (csv) write_text(dir + "/report.csv", report_csv(report));
    if (json) write_text(dir + "/report.json", report_json(report));
    if (!svg) return;

    // run names in first-appearance order become the x axis
    std::vector<std::string> runs;
    for (const MetricRow& row : report.metrics)
        if (std::find(runs.begin(), runs.end(), row.run) == runs.end()) runs.push_back(row.run);
    std::vector<std::string> names;
    for (const MetricRow& row : report.metrics)
        if (std::find(names.begin(), names.end(), row.metric) == names.end())
            names.push_back(row.metric);

    std::vector<SvgSeries> series;
    for (const std::string& name : names) {
        SvgSeries s;
        s.label = name;
        for (const MetricRow& row : report.metrics) {
            if (row.metric != name) continue;
            const auto it = std::find(runs.begin(), runs.end(), row.run);
            s.x.push_back(static_cast<double>(it - runs.begin()));
            s.y.push_back(row.value);
        }
        if (s.x.size() >= 2) series.push_back(std::move(s));
    }
    write_text(dir + "/report.svg",
               line_plot_svg(report.kind, "run index", "value", series));
}

}  // namespace nashlab
