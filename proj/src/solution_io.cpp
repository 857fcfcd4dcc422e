#include "nashlab/solution_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "nashlab/errors.hpp"
#include "nashlab/field_io.hpp"

namespace nashlab {

namespace {

namespace fs = std::filesystem;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

nlohmann::json parse_manifest(const std::string& dir) {
    nlohmann::json m = nlohmann::json::parse(read_text(dir + "/manifest.json"), nullptr, false);
    if (m.is_discarded()) throw IoError("manifest is not valid JSON in " + dir);
    return m;
}

}  // namespace

void save_solution(const NashSolution& sol, const std::string& dir) {
    if (sol.players < 1 || sol.u.size() != static_cast<std::size_t>(sol.players) ||
        sol.drift.size() != sol.u.size())
        throw InvalidArgument("save solution: incomplete solution");
    fs::create_directories(dir);
    nlohmann::json m;
    m["kind"] = "nash-solution";
    m["players"] = sol.players;
    m["T"] = sol.T;
    m["sigma"] = sol.sigma;
    m["beta"] = sol.beta;
    nlohmann::json stats = nlohmann::json::array();
    for (const PicardStepStats& s : sol.picard)
        stats.push_back({{"step", s.step},
                         {"substeps", s.substeps},
                         {"iterations", s.iterations},
                         {"residual", s.residual},
                         {"damped", s.damped}});
    m["picard"] = std::move(stats);
    write_text(dir + "/manifest.json", m.dump(2) + "\n");
    for (int i = 0; i < sol.players; ++i) {
        const std::string tag = std::to_string(i);
        save_field(sol.u[static_cast<std::size_t>(i)], dir + "/u_" + tag + ".nlf", "u_" + tag);
        save_field(sol.drift[static_cast<std::size_t>(i)], dir + "/drift_" + tag + ".nlf",
                   "drift_" + tag);
    }
}

NashSolution load_solution(const std::string& dir) {
    const nlohmann::json m = parse_manifest(dir);
    if (m.value("kind", "") != std::string("nash-solution"))
        throw IoError("not a solution directory: " + dir);
    NashSolution sol;
    sol.players = m.at("players").get<int>();
    sol.T = m.at("T").get<double>();
    sol.sigma = m.at("sigma").get<double>();
    sol.beta = m.at("beta").get<double>();
    if (sol.players < 1) throw IoError("solution manifest: bad player count in " + dir);
    for (const auto& s : m.value("picard", nlohmann::json::array())) {
        PicardStepStats st;
        st.step = s.value("step", 0);
        st.substeps = s.value("substeps", 1);
        st.iterations = s.value("iterations", 0);
        st.residual = s.value("residual", 0.0);
        st.damped = s.value("damped", false);
        sol.picard.push_back(st);
    }
    for (int i = 0; i < sol.players; ++i) {
        const std::string tag = std::to_string(i);
        sol.u.push_back(load_field(dir + "/u_" + tag + ".nlf"));
        sol.drift.push_back(load_field(dir + "/drift_" + tag + ".nlf"));
    }
    sol.grid = sol.u.front().grid;
    sol.times = sol.u.front().times;
    for (const Field& f : sol.u)
        if (f.grid != sol.grid || f.times != sol.times)
            throw IoError("solution fields disagree on grid/times in " + dir);
    for (const Field& f : sol.drift)
        if (f.grid != sol.grid || f.times != sol.times)
            throw IoError("solution fields disagree on grid/times in " + dir);
    if (sol.grid.axes != sol.players) throw IoError("solution grid does not match players in " + dir);
    return sol;
}

void save_mfg_solution(const MFGSolution& sol, const std::string& dir) {
    if (sol.u.empty() || sol.m.size() != sol.u.size())
        throw InvalidArgument("save mean-field solution: incomplete solution");
    fs::create_directories(dir);
    nlohmann::json m;
    m["kind"] = "mfg-solution";
    m["labels"] = sol.u.size();
    m["iterations"] = sol.iterations;
    m["picard_history"] = sol.picard_history;
    write_text(dir + "/manifest.json", m.dump(2) + "\n");
    for (std::size_t l = 0; l < sol.u.size(); ++l) {
        const std::string tag = std::to_string(l);
        save_field(sol.u[l], dir + "/u_" + tag + ".nlf", "u_" + tag);
        save_field(sol.m[l], dir + "/m_" + tag + ".nlf", "m_" + tag);
    }
    save_field(sol.mixture, dir + "/mixture.nlf", "mixture");
}

MFGSolution load_mfg_solution(const std::string& dir) {
    const nlohmann::json m = parse_manifest(dir);
    if (m.value("kind", "") != std::string("mfg-solution"))
        throw IoError("not a mean-field solution directory: " + dir);
    MFGSolution sol;
    const std::size_t labels = m.at("labels").get<std::size_t>();
    if (labels == 0) throw IoError("mean-field manifest: no labels in " + dir);
    sol.iterations = m.value("iterations", 0);
    sol.picard_history = m.value("picard_history", std::vector<double>{});
    for (std::size_t l = 0; l < labels; ++l) {
        const std::string tag = std::to_string(l);
        sol.u.push_back(load_field(dir + "/u_" + tag + ".nlf"));
        sol.m.push_back(load_field(dir + "/m_" + tag + ".nlf"));
    }
    sol.mixture = load_field(dir + "/mixture.nlf");
    sol.grid = sol.mixture.grid;
    sol.times = sol.mixture.times;
    for (const Field& f : sol.u)
        if (f.grid != sol.grid || f.times != sol.times)
            throw IoError("mean-field fields disagree on grid/times in " + dir);
    for (const Field& f : sol.m)
        if (f.grid != sol.grid || f.times != sol.times)
            throw IoError("mean-field fields disagree on grid/times in " + dir);
    return sol;
}

void save_riccati_json(const RiccatiSolution& sol, const std::string& path) {
    nlohmann::json root;
    root["players"] = sol.spec.players;
    root["T"] = sol.spec.T;
    root["sigma"] = sol.spec.sigma;
    root["beta"] = sol.spec.beta;
    nlohmann::json levels = nlohmann::json::array();
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        nlohmann::json rec;
        rec["t"] = sol.times[k];
        nlohmann::json per_player = nlohmann::json::array();
        for (int i = 0; i < sol.spec.players; ++i) {
            const std::size_t ui = static_cast<std::size_t>(i);
            const Eigen::MatrixXd& P = sol.P[k][ui];
            const Eigen::VectorXd& q = sol.q[k][ui];
            std::vector<double> pr, qr;
            for (Eigen::Index r = 0; r < P.rows(); ++r)
                for (Eigen::Index c = 0; c < P.cols(); ++c) pr.push_back(P(r, c));
            for (Eigen::Index r = 0; r < q.size(); ++r) qr.push_back(q(r));
            per_player.push_back({{"P", pr}, {"q", qr}, {"r", sol.r[k][ui]}});
        }
        rec["coefficients"] = std::move(per_player);
        levels.push_back(std::move(rec));
    }
    root["levels"] = std::move(levels);
    write_text(path, root.dump(2) + "\n");
}

std::string monotonicity_report_json(const SemimonotonicityReport& report) {
    auto entry = [](double v) {
        return std::isnan(v) ? nlohmann::json() : nlohmann::json(v);
    };
    nlohmann::json records = nlohmann::json::array();
    for (std::size_t k = 0; k < report.times.size(); ++k) {
        records.push_back({{"t", report.times[k]},
                           {"d_margin", entry(report.d_margin[k])},
                           {"l_margin", entry(report.l_margin[k])},
                           {"diag_margin", entry(report.diag_margin[k])},
                           {"block_margin", entry(report.block_margin[k])},
                           {"drift_osl_margin", entry(report.drift_osl_margin[k])}});
    }
    return nlohmann::json{{"levels", records}}.dump(2) + "\n";
}

}  // namespace nashlab
