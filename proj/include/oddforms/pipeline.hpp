#pragma once

#include "oddforms/counting.hpp"
#include "oddforms/forms.hpp"
#include "oddforms/localsolve.hpp"
#include "oddforms/regularize.hpp"
#include "oddforms/scale.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oddforms {

// Flat key=value configuration ('#' comments, comma lists).
std::map<std::string, std::string> parse_config_text(const std::string& text);

struct PipelineConfig {
    std::string system_text;
    std::string system_label = "system";

    GrowthFunctions growth;
    RegularizerOptions reg;

    std::uint64_t p_max = 30;
    unsigned precision = 8;
    PAdicSearchOptions padic;
    std::uint64_t fp_cap = 25000000;

    double real_tolerance = 1e-8;
    RealSolveOptions real;

    std::vector<std::uint64_t> n_schedule{1000};
    std::uint64_t count_cap = 2000000000;
    std::size_t sample_limit = 5;

    static PipelineConfig from_text(const std::string& text, const std::string& base_dir);
    static PipelineConfig from_file(const std::string& path);
};

struct StageStatus {
    std::string name;
    bool ok = false;
    std::string message;
};

struct PipelineReport {
    bool pass = false;
    std::string text;  // deterministic: no timings, fixed formatting

    std::optional<PreparedSystem> prepared;
    std::vector<PrimeDiagnosis> prime_diagnosis;
    std::optional<ScalingPlan> plan;
    std::optional<RealSolveResult> real;
    std::optional<ScaledLocalReport> local_report;
    std::vector<Int> embedding_multipliers;  // original coordinates; 0 = pinned to zero
    std::vector<CountRecord> records;
    std::optional<GrowthFit> fit;
    std::vector<std::vector<long long>> samples;
    std::vector<StageStatus> stages;
};

PipelineReport run_pipeline(const PipelineConfig& config);

// report.txt (deterministic), counts.csv (with timings), gprime.system,
// certificate.txt; all written atomically.
void write_report_files(const PipelineReport& report, const std::string& out_dir);

void atomic_write(const std::string& path, const std::string& content);

}  // namespace oddforms
