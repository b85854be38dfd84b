#include "cilab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "cilab/errors.hpp"
#include "cilab/summation.hpp"

namespace cilab {

EvalReport summarize_maes(std::vector<SampleMae> per_sample,
                          std::string config_hash, std::string checkpoint_id) {
    if (per_sample.empty()) {
        throw ConfigError("cannot summarize an empty MAE vector");
    }
    const auto n = static_cast<double>(per_sample.size());

    CompensatedSum sum;
    for (const auto& s : per_sample) sum.add(s.mae);
    const double mean = sum.value() / n;

    CompensatedSum sq;
    for (const auto& s : per_sample) {
        const double d = s.mae - mean;
        sq.add(d * d);
    }
    const double stddev = std::sqrt(sq.value() / n);

    EvalReport r;
    r.n_samples = static_cast<std::int64_t>(per_sample.size());
    r.mae_mean = mean;
    r.mae_std = stddev;
    r.sem = stddev / std::sqrt(n);
    r.per_sample = std::move(per_sample);
    r.config_hash = std::move(config_hash);
    r.checkpoint_id = std::move(checkpoint_id);
    return r;
}

void write_report_json(const EvalReport& report, const std::filesystem::path& path) {
    nlohmann::json j;
    j["n_samples"] = report.n_samples;
    j["mae_mean"] = report.mae_mean;
    j["mae_std"] = report.mae_std;
    j["sem"] = report.sem;
    j["config_hash"] = report.config_hash;
    j["checkpoint_id"] = report.checkpoint_id;
    auto& per = j["per_sample"] = nlohmann::json::array();
    for (const auto& s : report.per_sample) {
        per.push_back({{"index", s.index}, {"mae", s.mae}});
    }
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    os << j.dump(2) << "\n";
    if (!os) throw IoError("write failed for " + path.string());
}

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    os << "index,mae\n";
    char line[64];
    for (const auto& s : report.per_sample) {
        std::snprintf(line, sizeof(line), "%lld,%.17g\n",
                      static_cast<long long>(s.index), s.mae);
        os << line;
    }
    if (!os) throw IoError("write failed for " + path.string());
}

} // namespace cilab
