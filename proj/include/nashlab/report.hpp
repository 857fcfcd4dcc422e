#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nashlab {

inline constexpr const char* kLibraryVersion = "0.1.0";

struct MetricRow {
    std::string run;     // e.g. "N=3" or "sigma=0.25"
    std::string module;  // producing module
    std::string metric;
    double value = 0.0;
    std::uint64_t seed = 0;
};

struct CriterionResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Assembled experiment outcome. Serialized artifacts are byte-deterministic
/// for a given config, so wall time stays in memory only; the CLI prints it.
struct ExperimentReport {
    std::string kind;
    std::string config_hash;  // hex
    std::string version = kLibraryVersion;
    double wall_time_ms = 0.0;
    std::vector<MetricRow> metrics;
    std::vector<CriterionResult> criteria;

    bool pass() const;
    void add(const std::string& run, const std::string& module, const std::string& metric,
             double value, std::uint64_t seed = 0);
    void require(const std::string& name, bool pass, const std::string& detail);
};

/// One row per metric: run,module,metric,value,seed.
std::string report_csv(const ExperimentReport& report);
std::string report_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);

struct SvgSeries {
    std::string label;
    std::vector<double> x, y;
};

/// Deterministic line plot; one polyline per series, annotated axes.
std::string line_plot_svg(const std::string& title, const std::string& x_label,
                          const std::string& y_label, std::span<const SvgSeries> series);

/// Writes report.csv / report.json / report.svg under dir. The SVG charts
/// every metric name appearing for two or more runs against the run index.
void emit_report(const ExperimentReport& report, const std::string& dir, bool csv = true,
                 bool json = true, bool svg = true);

}  // namespace nashlab
