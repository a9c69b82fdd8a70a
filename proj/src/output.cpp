#include "siwf/output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace siwf {

using nlohmann::json;

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string trajectory_csv(const TrajectoryRecord& rec, const std::vector<Observable>& observables,
                           std::size_t n_channels) {
    const bool stochastic = !rec.records.empty();
    const bool weighted = !rec.girsanov_weights.empty();
    std::ostringstream os;
    os << "time";
    if (stochastic) {
        for (std::size_t l = 1; l <= n_channels; ++l) os << ",W_" << l;
        for (std::size_t l = 1; l <= n_channels; ++l) os << ",B_" << l;
    }
    if (weighted) os << ",weight";
    for (const auto& o : observables) os << ',' << o.name;
    os << '\n';
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        os << format_double(rec.times[i]);
        if (stochastic) {
            for (double w : rec.innovations[i]) os << ',' << format_double(w);
            for (double b : rec.records[i]) os << ',' << format_double(b);
        }
        if (weighted) os << ',' << format_double(rec.girsanov_weights[i]);
        for (const auto& o : observables) os << ',' << format_double(rec.observables.at(o.name)[i]);
        os << '\n';
    }
    return os.str();
}

std::string mean_csv(const ObservableSeries& series) {
    std::ostringstream os;
    os << "time";
    for (const auto& n : series.names) os << ',' << n << "_mean," << n << "_se";
    os << '\n';
    for (std::size_t t = 0; t < series.times.size(); ++t) {
        os << format_double(series.times[t]);
        for (std::size_t o = 0; o < series.names.size(); ++o)
            os << ',' << format_double(series.mean[o][t]) << ',' << format_double(series.se[o][t]);
        os << '\n';
    }
    return os.str();
}

json densities_json(const TrajectoryRecord& rec) {
    json out;
    out["times"] = rec.times;
    out["densities"] = json::array();
    for (const auto& rho : rec.densities) out["densities"].push_back(matrix_to_json(rho.matrix()));
    return out;
}

json manifest_json(const SimConfig& cfg) {
    return {{"code_version", kCodeVersion}, {"seed", cfg.seed}, {"config", cfg.to_json()}};
}

json report_json(const CheckReport& r) {
    return {{"name", r.name},           {"kind", to_string(r.kind)}, {"statistic", r.statistic},
            {"threshold", r.threshold}, {"passed", r.passed},        {"details", r.details}};
}

std::string report_table(const std::vector<CheckReport>& reports, const std::vector<bool>& expected) {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-28s %-12s %14s %14s %-6s %-8s %s\n", "check", "kind", "statistic",
                  "threshold", "result", "expected", "verdict");
    os << line;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        const bool want = i < expected.size() ? expected[i] : true;
        std::snprintf(line, sizeof line, "%-28s %-12s %14.6g %14.6g %-6s %-8s %s\n", r.name.c_str(),
                      to_string(r.kind).c_str(), r.statistic, r.threshold, r.passed ? "pass" : "fail",
                      want ? "pass" : "fail", r.passed == want ? "OK" : "MISMATCH");
        os << line;
    }
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace siwf
