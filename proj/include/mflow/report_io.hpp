#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mflow/classifier.hpp"
#include "mflow/errors.hpp"
#include "mflow/metrics.hpp"
#include "mflow/simulator.hpp"

namespace mflow {

namespace report_detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << content;
}

}  // namespace report_detail

/// Writes the machine-readable report plus plot-ready CSVs into `dir`:
/// report.json, summary.csv, dwell_<node>.csv (bin_lo,bin_hi,count), and
/// observations.csv. Output is byte-stable for identical inputs and seed.
inline void write_report(const SimReport& report, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    using report_detail::fmt;
    fs::create_directories(dir);

    nlohmann::json root;
    root["spec_version"] = 1;
    root["seed"] = report.seed;
    root["trials"] = report.trials;
    root["mode"] = report.learning ? "learning" : "iid";
    root["end_to_end_rate"] = report.end_to_end_rate;
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& ns : report.nodes) {
        nlohmann::json nj;
        nj["id"] = ns.id;
        nj["successes"] = ns.successes;
        nj["success_rate"] = ns.success_rate;
        nj["standard_error"] = ns.standard_error;
        nj["mean_time"] = ns.mean_time;
        nj["entropy_bits"] = ns.entropy_bits;
        nj["flow_cv"] = ns.flow_cv;
        nj["utilization"] = ns.utilization;
        nj["saturated"] = ns.saturated;
        nj["dwell_times"] = ns.dwell_times;
        nj["precision_trajectory"] = ns.precision_trajectory;
        nodes.push_back(nj);
    }
    root["nodes"] = nodes;
    report_detail::write_file(dir / "report.json", root.dump(2) + "\n");

    std::string summary =
        "node_id,trials,success_rate,stderr,mean_time,entropy_bits,flow_cv,utilization,"
        "saturated\n";
    for (const auto& ns : report.nodes) {
        summary += ns.id + "," + std::to_string(report.trials) + "," + fmt(ns.success_rate) +
                   "," + fmt(ns.standard_error) + "," + fmt(ns.mean_time) + "," +
                   fmt(ns.entropy_bits) + "," + fmt(ns.flow_cv) + "," + fmt(ns.utilization) +
                   "," + (ns.saturated ? "true" : "false") + "\n";
    }
    report_detail::write_file(dir / "summary.csv", summary);

    for (const auto& ns : report.nodes) {
        const Histogram h = make_histogram(ns.dwell_times);
        std::string csv = "bin_lo,bin_hi,count\n";
        for (std::size_t b = 0; b < h.counts.size(); ++b)
            csv += fmt(h.edges[b]) + "," + fmt(h.edges[b + 1]) + "," +
                   std::to_string(h.counts[b]) + "\n";
        report_detail::write_file(dir / ("dwell_" + ns.id + ".csv"), csv);
    }

    std::string obs = "info,precision,time,experience\n";
    for (const auto& ns : report.nodes)
        for (const auto& row : ns.observations)
            obs += fmt(row.info) + "," + fmt(row.precision) + "," + fmt(row.time) + "," +
                   fmt(row.experience) + "\n";
    report_detail::write_file(dir / "observations.csv", obs);
}

/// Reads a report.json produced by write_report. Observations are not stored
/// in the JSON and come back empty.
inline SimReport read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open report file: " + path.string());
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("report syntax error: ") + e.what());
    }
    if (!root.is_object() || !root.contains("nodes") || root.value("spec_version", 0) != 1)
        throw DataError("not a simulation report: " + path.string());
    SimReport report;
    report.seed = root.value("seed", 0ULL);
    report.trials = root.value("trials", 0ULL);
    report.learning = root.value("mode", "iid") == std::string("learning");
    report.end_to_end_rate = root.value("end_to_end_rate", 0.0);
    for (const auto& nj : root["nodes"]) {
        NodeStats ns;
        ns.id = nj.at("id").get<std::string>();
        ns.successes = nj.value("successes", 0ULL);
        ns.success_rate = nj.value("success_rate", 0.0);
        ns.standard_error = nj.value("standard_error", 0.0);
        ns.mean_time = nj.value("mean_time", 0.0);
        ns.entropy_bits = nj.value("entropy_bits", 0.0);
        ns.flow_cv = nj.value("flow_cv", 0.0);
        ns.utilization = nj.value("utilization", 0.0);
        ns.saturated = nj.value("saturated", false);
        ns.dwell_times = nj.value("dwell_times", std::vector<double>{});
        ns.precision_trajectory = nj.value("precision_trajectory", std::vector<double>{});
        report.nodes.push_back(std::move(ns));
    }
    return report;
}

/// Re-emits plot-ready tables from a stored report: per-node dwelling-time
/// histograms, entropy trajectories, and (in learning mode) learning curves.
inline void emit_report_tables(const SimReport& report, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    using report_detail::fmt;
    fs::create_directories(dir);
    for (const auto& ns : report.nodes) {
        if (!ns.dwell_times.empty()) {
            const Histogram h = make_histogram(ns.dwell_times);
            std::string csv = "bin_lo,bin_hi,count\n";
            for (std::size_t b = 0; b < h.counts.size(); ++b)
                csv += fmt(h.edges[b]) + "," + fmt(h.edges[b + 1]) + "," +
                       std::to_string(h.counts[b]) + "\n";
            report_detail::write_file(dir / ("hist_" + ns.id + ".csv"), csv);
        }
        if (!ns.precision_trajectory.empty()) {
            const auto entropy = entropy_trajectory(ns.precision_trajectory);
            std::string csv = "trial,entropy_bits\n";
            for (std::size_t k = 0; k < entropy.size(); ++k)
                csv += std::to_string(k) + "," + fmt(entropy[k]) + "\n";
            report_detail::write_file(dir / ("entropy_" + ns.id + ".csv"), csv);
            if (report.learning) {
                std::string lc = "trial,precision_prob\n";
                for (std::size_t k = 0; k < ns.precision_trajectory.size(); ++k)
                    lc += std::to_string(k) + "," + fmt(ns.precision_trajectory[k]) + "\n";
                report_detail::write_file(dir / ("learning_" + ns.id + ".csv"), lc);
            }
        }
    }
}

/// Reads an observation CSV with header `info,precision,time,experience`
/// (experience optional; further columns are treated as external covariates).
inline ObservationSet read_observations_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open observations file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty observations file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header;
    std::size_t start = 0;
    while (start <= line.size()) {
        const std::size_t comma = line.find(',', start);
        header.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (header.size() < 3 || header[0] != "info" || header[1] != "precision" ||
        header[2] != "time")
        throw DataError("observations header must start with 'info,precision,time'; got '" +
                        line + "'");
    const bool has_exp = header.size() >= 4 && header[3] == "experience";
    ObservationSet obs;
    if (header.size() > (has_exp ? 4u : 3u)) {
        for (std::size_t c = has_exp ? 4 : 3; c < header.size(); ++c) {
            obs.covariate_names.push_back(header[c]);
            obs.covariates.emplace_back();
        }
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> fields;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const std::size_t comma = line.find(',', pos);
            const std::string tok =
                line.substr(pos, comma == std::string::npos ? comma : comma - pos);
            try {
                fields.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw DataError("observations line " + std::to_string(line_no) +
                                ": not a number: '" + tok + "'");
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (fields.size() != header.size())
            throw DataError("observations line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        obs.info.push_back(fields[0]);
        obs.precision.push_back(fields[1]);
        obs.time.push_back(fields[2]);
        if (has_exp) obs.experience.push_back(fields[3]);
        for (std::size_t c = 0; c < obs.covariates.size(); ++c)
            obs.covariates[c].push_back(fields[(has_exp ? 4 : 3) + c]);
    }
    obs.validate();
    return obs;
}

}  // namespace mflow
