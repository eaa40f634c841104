#include "oddforms/pipeline.hpp"

#include "oddforms/modeval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace oddforms {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::uint64_t> parse_u64_list(const std::string& s) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stoull(item));
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw Error("config line " + std::to_string(lineno) + ": empty key");
        out[key] = value;
    }
    return out;
}

PipelineConfig PipelineConfig::from_text(const std::string& text, const std::string& base_dir) {
    auto kv = parse_config_text(text);
    PipelineConfig cfg;
    auto get = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    if (auto v = get("system")) {
        std::filesystem::path p(*v);
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        cfg.system_text = read_file(p.string());
        cfg.system_label = *v;
    } else if (auto w = get("system_text")) {
        cfg.system_text = *w;
    } else {
        throw Error("config requires 'system' (path) or 'system_text'");
    }
    if (auto v = get("growth_a")) cfg.growth.h_default.a = std::stoull(*v);
    if (auto v = get("growth_b")) cfg.growth.h_default.b = std::stoull(*v);
    if (auto v = get("growth_c")) cfg.growth.h_default.c = std::stoull(*v);
    if (auto v = get("rtarget_a")) cfg.growth.r_target.a = std::stoull(*v);
    if (auto v = get("rtarget_b")) cfg.growth.r_target.b = std::stoull(*v);
    if (auto v = get("rtarget_c")) cfg.growth.r_target.c = std::stoull(*v);
    if (auto v = get("height_bound")) cfg.reg.height_bound = std::stoul(*v);
    if (auto v = get("coeff_box")) cfg.reg.coeff_box = std::stoul(*v);
    if (auto v = get("budget")) cfg.reg.budget = std::stoull(*v);
    if (auto v = get("cleanup_primes")) cfg.reg.cleanup_primes = parse_u64_list(*v);
    if (auto v = get("enum_cap")) cfg.reg.enum_cap = std::stoull(*v);
    if (auto v = get("max_rounds")) cfg.reg.max_rounds = std::stoull(*v);
    if (auto v = get("max_steps")) cfg.reg.max_steps = std::stoull(*v);
    if (auto v = get("p_max")) cfg.p_max = std::stoull(*v);
    if (auto v = get("precision")) cfg.precision = std::stoul(*v);
    if (auto v = get("delta_max")) cfg.padic.delta_max = std::stoul(*v);
    if (auto v = get("seed_budget")) cfg.padic.seed_budget = std::stoull(*v);
    if (auto v = get("fp_cap")) cfg.fp_cap = std::stoull(*v);
    if (auto v = get("real_tolerance")) cfg.real_tolerance = std::stod(*v);
    if (auto v = get("real_restarts")) cfg.real.max_restarts = std::stoull(*v);
    if (auto v = get("seed")) cfg.real.rng_seed = std::stoull(*v);
    if (auto v = get("N")) cfg.n_schedule = parse_u64_list(*v);
    if (auto v = get("count_cap")) cfg.count_cap = std::stoull(*v);
    if (auto v = get("sample_limit")) cfg.sample_limit = std::stoull(*v);
    if (cfg.n_schedule.empty()) throw Error("config: empty N schedule");
    for (std::size_t i = 1; i < cfg.n_schedule.size(); ++i)
        if (cfg.n_schedule[i] <= cfg.n_schedule[i - 1])
            throw Error("config: N schedule must be strictly increasing");
    return cfg;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    return from_text(read_file(path),
                     std::filesystem::path(path).parent_path().string());
}

namespace {

void render_report(PipelineReport& rep, const PipelineConfig& cfg, const FormSystem& original) {
    std::ostringstream os;
    os << "pipeline report\n";
    os << "===============\n";
    os << "system: " << cfg.system_label << "\n";
    os << "seed: " << cfg.real.rng_seed << "\n";
    os << "\ninput system:\n" << to_text(original);

    for (const auto& st : rep.stages)
        os << "\n[" << (st.ok ? "ok" : "FAILED") << "] " << st.name
           << (st.message.empty() ? "" : (": " + st.message)) << "\n";

    if (rep.prepared) {
        os << "\nreduced system G':\n" << to_text(rep.prepared->system);
        os << "J_F (1-based):";
        if (rep.prepared->exceptional_set.empty()) os << " none";
        for (auto j : rep.prepared->exceptional_set) os << " " << (j + 1);
        os << "\n";
    }
    if (!rep.prime_diagnosis.empty()) {
        os << "\nbad prime scan (p <= " << cfg.p_max << "):";
        bool any = false;
        for (const auto& d : rep.prime_diagnosis)
            if (d.bad) {
                os << " " << d.p;
                any = true;
            }
        if (!any) os << " none";
        os << "\n";
    }
    if (rep.real && rep.real->point) {
        os << "\nreal non-singular solution:";
        for (auto x : *rep.real->point) os << " " << format_double(x);
        os << "\n  residual=" << format_double(rep.real->residual)
           << " sigma_min=" << format_double(rep.real->sigma_min)
           << " restarts=" << rep.real->restarts_used << "\n";
    }
    if (rep.plan && rep.prepared) os << "\n" << rep.plan->to_text(rep.prepared->system);
    if (rep.local_report) {
        os << "\nscaled local verification:\n";
        for (const auto& pv : rep.local_report->primes) {
            os << "  p=" << pv.p << " case=" << (pv.bad_case ? 1 : 2)
               << " residue=" << (pv.residue_ok ? "ok" : "BAD")
               << " units=" << (pv.units_ok ? "ok" : "BAD")
               << " minor_valuation=" << pv.minor_valuation
               << " unit_jacobian=" << (pv.unit_jacobian ? "yes" : "no")
               << " -> " << (pv.ok ? "pass" : "FAIL") << "\n";
        }
    }
    if (!rep.embedding_multipliers.empty()) {
        os << "\nembedding multipliers (0 = coordinate pinned to zero):";
        for (const auto& y : rep.embedding_multipliers) os << " " << y;
        os << "\n";
    }
    if (!rep.records.empty()) {
        os << "\ncounts:\n";
        os << "  N count predicted ratio\n";
        for (const auto& r : rep.records)
            os << "  " << r.N << " " << r.count << " " << format_double(r.predicted) << " "
               << format_double(r.ratio) << "\n";
    }
    if (rep.fit) {
        os << "\ngrowth fit: slope=" << format_double(rep.fit->slope)
           << " exponent=" << format_double(rep.fit->exponent)
           << " constant=" << format_double(rep.fit->constant) << "\n";
    }
    if (!rep.samples.empty()) {
        os << "\nsample solutions (original coordinates):\n";
        for (const auto& x : rep.samples) {
            os << " ";
            for (auto v : x) os << " " << v;
            os << "\n";
        }
    }
    os << "\nverdict: " << (rep.pass ? "PASS" : "FAIL") << "\n";
    rep.text = os.str();
}

}  // namespace

PipelineReport run_pipeline(const PipelineConfig& cfg) {
    PipelineReport rep;
    auto stage = [&](const std::string& name, bool ok, const std::string& msg) {
        rep.stages.push_back({name, ok, msg});
        return ok;
    };

    FormSystem original;
    try {
        original = parse_system(cfg.system_text);
        stage("parse", true, std::to_string(original.form_count()) + " forms in " +
                                 std::to_string(original.nvars()) + " variables");
    } catch (const Error& e) {
        stage("parse", false, e.what());
        rep.pass = false;
        render_report(rep, cfg, FormSystem::with_default_names(1));
        return rep;
    }

    bool aborted = false;

    try {
        rep.prepared = prepare_reduced_system(original, cfg.growth, cfg.reg);
        std::ostringstream msg;
        msg << rep.prepared->system.form_count() << " forms in "
            << rep.prepared->system.nvars() << " variables, |J_F|="
            << rep.prepared->exceptional_set.size();
        if (rep.prepared->cert.evidence_only) msg << " (rank evidence only)";
        stage("prepare_reduced_system", true, msg.str());
    } catch (const Error& e) {
        stage("prepare_reduced_system", false, e.what());
        aborted = true;
    }

    if (!aborted) {
        try {
            rep.prime_diagnosis = detect_bad_primes(rep.prepared->system, cfg.p_max, cfg.fp_cap);
            auto bad = bad_prime_list(rep.prime_diagnosis);
            std::ostringstream msg;
            msg << bad.size() << " bad prime(s)";
            stage("detect_bad_primes", true, msg.str());
        } catch (const Error& e) {
            stage("detect_bad_primes", false, e.what());
            aborted = true;
        }
    }

    if (!aborted) {
        try {
            auto bad = bad_prime_list(rep.prime_diagnosis);
            rep.plan = build_multipliers(rep.prepared->system, bad, cfg.precision, cfg.padic);
            stage("build_multipliers", true, "Y = " + rep.plan->max_multiplier.str());
        } catch (const Error& e) {
            stage("build_multipliers", false, e.what());
            aborted = true;
        }
    }

    if (!aborted) {
        rep.real = real_nonsingular_solution(rep.prepared->system, cfg.real_tolerance, cfg.real);
        if (rep.real->point) {
            apply_signs(*rep.plan, *rep.real->point);
            stage("real_solution_and_signs", true, "");
        } else {
            stage("real_solution_and_signs", rep.prepared->system.form_count() == 0,
                  "no real non-singular solution within budget; signs left positive");
        }
    }

    if (!aborted) {
        try {
            std::vector<std::uint64_t> primes;
            for (std::uint64_t p = 2; p <= cfg.p_max; ++p)
                if (is_prime_u64(p)) primes.push_back(p);
            rep.local_report =
                verify_scaled_local(rep.prepared->system, *rep.plan, primes, cfg.precision,
                                    cfg.fp_cap);
            stage("verify_scaled_local", rep.local_report->all_ok,
                  rep.local_report->all_ok ? "" : "a prime failed verification");
            if (!rep.local_report->all_ok) aborted = true;
        } catch (const Error& e) {
            stage("verify_scaled_local", false, e.what());
            aborted = true;
        }
    }

    if (!aborted) {
        try {
            const auto& surviving = rep.prepared->cert.surviving_vars;
            rep.embedding_multipliers.assign(original.nvars(), Int(0));
            for (std::size_t i = 0; i < surviving.size(); ++i)
                rep.embedding_multipliers[surviving[i]] = rep.plan->multipliers[i];
            CountOptions copt;
            copt.cap = cfg.count_cap;
            copt.sample_limit = cfg.sample_limit;
            for (auto n : cfg.n_schedule) {
                auto t0 = std::chrono::steady_clock::now();
                auto outcome = embedded_prime_count(original, rep.embedding_multipliers, n, copt);
                double elapsed =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                std::uint64_t ybound = rep.plan->max_multiplier.convert_to<std::uint64_t>();
                rep.records.push_back(make_count_record(n, ybound, outcome.count,
                                                        original.nvars(),
                                                        original.total_degree(), elapsed));
                if (rep.samples.empty()) rep.samples = outcome.samples;
            }
            stage("count", true, std::to_string(rep.records.size()) + " record(s)");
        } catch (const Error& e) {
            stage("count", false, e.what());
            aborted = true;
        }
    }

    if (!aborted && rep.records.size() >= 3) {
        try {
            rep.fit = growth_fit(rep.records, original.nvars(), original.total_degree());
            stage("growth_fit", true, "");
        } catch (const Error& e) {
            stage("growth_fit", false, e.what());
        }
    }

    rep.pass = !rep.stages.empty() &&
               std::all_of(rep.stages.begin(), rep.stages.end(),
                           [](const StageStatus& s) { return s.ok; });
    render_report(rep, cfg, original);
    return rep;
}

void atomic_write(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

void write_report_files(const PipelineReport& rep, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::filesystem::path dir(out_dir);
    atomic_write((dir / "report.txt").string(), rep.text);
    if (rep.prepared) {
        atomic_write((dir / "gprime.system").string(), to_text(rep.prepared->system));
        atomic_write((dir / "certificate.txt").string(), rep.prepared->cert.to_text());
    }
    std::ostringstream csv;
    csv << "N,Y,count,predicted,ratio,elapsed\n";
    for (const auto& r : rep.records)
        csv << r.N << "," << r.Y << "," << r.count << "," << format_double(r.predicted) << ","
            << format_double(r.ratio) << "," << format_double(r.elapsed_seconds) << "\n";
    atomic_write((dir / "counts.csv").string(), csv.str());
}

}  // namespace oddforms
