#include <CLI11.hpp>

#include "oddforms/counting.hpp"
#include "oddforms/forms.hpp"
#include "oddforms/localsolve.hpp"
#include "oddforms/modeval.hpp"
#include "oddforms/pipeline.hpp"
#include "oddforms/ranklab.hpp"
#include "oddforms/regularize.hpp"
#include "oddforms/scale.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace oddforms;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void emit(const std::string& csv_path, const std::string& content) {
    if (csv_path.empty()) {
        std::cout << content;
    } else {
        atomic_write(csv_path, content);
        std::cout << "wrote " << csv_path << "\n";
    }
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct CommonRankFlags {
    unsigned height = 1;
    unsigned box = 1;
    std::uint64_t budget = 200000;
    std::vector<std::uint64_t> primes;
    std::uint64_t sbound = 2000000;
};

int cmd_regularize(const std::string& system_path, const std::string& out_dir,
                   const GrowthFunctions& growth, const RegularizerOptions& opt) {
    auto sys = parse_system(read_file(system_path));
    auto prep = prepare_reduced_system(sys, growth, opt);
    std::filesystem::create_directories(out_dir);
    auto dir = std::filesystem::path(out_dir);
    atomic_write((dir / "gprime.system").string(), to_text(prep.system));
    atomic_write((dir / "certificate.txt").string(), prep.cert.to_text());
    std::cout << "reduced system: " << prep.system.form_count() << " forms in "
              << prep.system.nvars() << " variables\n";
    std::cout << "J_F (1-based):";
    if (prep.exceptional_set.empty()) std::cout << " none";
    for (auto j : prep.exceptional_set) std::cout << " " << (j + 1);
    std::cout << "\nwrote " << (dir / "gprime.system").string() << " and "
              << (dir / "certificate.txt").string() << "\n";
    return 0;
}

int cmd_rank(const std::string& system_path, const CommonRankFlags& flags,
             const std::string& csv_path) {
    auto sys = parse_system(read_file(system_path));
    RankLabOptions opt;
    opt.height_bound = flags.height;
    opt.coeff_box = flags.box;
    opt.budget = flags.budget;
    opt.primes = flags.primes;
    opt.sbound = flags.sbound;
    auto data = compute_block_rank_data(sys, opt);
    emit(csv_path, rank_report_csv(data));

    auto sb = verify_strength_birch(sys, data);
    std::cout << "strength-vs-birch: h=" << sb.lhs << " bound=" << sb.rhs << " -> "
              << (sb.ok ? "pass" : "FAIL") << "\n";
    auto lam = verify_lampert_codim(sys, opt.primes, opt.sbound, opt);
    std::cout << "joint singular locus: codim "
              << (lam.locus_empty ? std::string("empty") : std::to_string(lam.measured_codim))
              << " bound " << lam.bound << " -> " << (lam.ok ? "pass" : "FAIL") << "\n";
    return sb.ok && lam.ok ? 0 : 1;
}

int cmd_count_fp(const std::string& system_path, std::uint64_t pmin, std::uint64_t pmax,
                 std::uint64_t cap, const std::string& csv_path) {
    auto sys = parse_system(read_file(system_path));
    std::ostringstream csv;
    csv << "p,total,expected,bound,ok\n";
    for (std::uint64_t q = pmin; q <= pmax; ++q) {
        if (!is_prime_u64(q)) continue;
        auto c = count_points(sys, q, cap);
        csv << q << "," << c.total << "," << c.expected << "," << c.bound << ","
            << (c.bound_satisfied ? "true" : "false") << "\n";
    }
    emit(csv_path, csv.str());
    return 0;
}

int cmd_lift(const std::string& system_path, std::uint64_t p, unsigned k,
             const std::vector<std::uint64_t>& seed, const std::vector<std::size_t>& frozen1) {
    auto sys = parse_system(read_file(system_path));
    std::vector<std::size_t> frozen;
    for (auto f : frozen1) {
        if (f == 0) throw Error("--frozen indices are 1-based");
        frozen.push_back(f - 1);
    }
    auto pt = hensel_lift(sys, seed, p, k, frozen);
    std::cout << "lift mod " << p << "^" << k << ":";
    for (std::size_t i = 0; i < pt.coords.size(); ++i)
        std::cout << " " << sys.names()[i] << "=" << pt.coords[i] << " (v=" << pt.valuations[i]
                  << ")";
    std::cout << "\n";
    return 0;
}

int cmd_scale(const std::string& system_path, const std::string& out_dir, std::uint64_t p_max,
              unsigned k, const PAdicSearchOptions& padic, double tolerance,
              std::uint64_t rng_seed, std::uint64_t cap) {
    auto sys = parse_system(read_file(system_path));
    auto diag = detect_bad_primes(sys, p_max, cap);
    auto plan = build_multipliers(sys, bad_prime_list(diag), k, padic);
    RealSolveOptions ropt;
    ropt.rng_seed = rng_seed;
    auto real = real_nonsingular_solution(sys, tolerance, ropt);
    if (real.point) apply_signs(plan, *real.point);
    std::vector<std::uint64_t> primes;
    for (std::uint64_t q = 2; q <= p_max; ++q)
        if (is_prime_u64(q)) primes.push_back(q);
    auto report = verify_scaled_local(sys, plan, primes, k, cap);

    std::filesystem::create_directories(out_dir);
    auto dir = std::filesystem::path(out_dir);
    atomic_write((dir / "plan.txt").string(), plan.to_text(sys));
    auto scaled = scale_variables(sys, plan.multipliers);
    atomic_write((dir / "scaled.system").string(), to_text(scaled));
    std::cout << plan.to_text(sys);
    for (const auto& pv : report.primes)
        std::cout << "p=" << pv.p << " " << (pv.ok ? "pass" : "FAIL") << "\n";
    std::cout << "wrote " << (dir / "plan.txt").string() << " and "
              << (dir / "scaled.system").string() << "\n";
    return report.all_ok ? 0 : 1;
}

int cmd_count(const std::string& system_path, std::vector<std::uint64_t> ns, std::uint64_t y,
              const std::vector<std::size_t>& j1, bool allow_zero, bool weighted,
              std::uint64_t cap, const std::string& csv_path) {
    auto sys = parse_system(read_file(system_path));
    std::ostringstream csv;
    if (weighted) {
        csv << "N,weighted\n";
        for (auto n : ns)
            csv << n << "," << format_double(weighted_prime_count(sys, n, cap)) << "\n";
        emit(csv_path, csv.str());
        return 0;
    }
    CountQuery q;
    q.Y = y;
    q.allow_zero_y = allow_zero;
    for (auto idx : j1) {
        if (idx == 0) throw Error("--J indices are 1-based");
        q.exceptional.push_back(idx - 1);
    }
    CountOptions opt;
    opt.cap = cap;
    csv << "N,Y,count,predicted,ratio,elapsed\n";
    for (auto n : ns) {
        q.N = n;
        auto t0 = std::chrono::steady_clock::now();
        auto outcome = almost_prime_count(sys, q, opt);
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        auto rec =
            make_count_record(n, y, outcome.count, sys.nvars(), sys.total_degree(), elapsed);
        csv << rec.N << "," << rec.Y << "," << rec.count << "," << format_double(rec.predicted)
            << "," << format_double(rec.ratio) << "," << format_double(rec.elapsed_seconds)
            << "\n";
    }
    emit(csv_path, csv.str());
    return 0;
}

int cmd_pipeline(const std::string& config_path, const std::string& out_dir) {
    auto cfg = PipelineConfig::from_file(config_path);
    auto rep = run_pipeline(cfg);
    if (!out_dir.empty()) write_report_files(rep, out_dir);
    std::cout << rep.text;
    return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regularize, solve locally, scale, and count almost-prime solutions of "
                 "odd-degree form systems"};
    app.require_subcommand(1);

    std::string system_path, out_dir = "out", csv_path, config_path;
    CommonRankFlags rank_flags;
    GrowthFunctions growth;
    RegularizerOptions reg;
    std::uint64_t pmin = 3, pmax = 19, cap = 25000000, p_max = 30;
    unsigned k = 8;
    std::uint64_t rng_seed = 1;
    double tolerance = 1e-8;
    PAdicSearchOptions padic;
    std::vector<std::uint64_t> seed_coords, ns{1000};
    std::vector<std::size_t> frozen, jset;
    std::uint64_t y = 1, count_cap = 2000000000, p = 5;
    bool allow_zero = false, weighted = false;

    auto* reg_cmd = app.add_subcommand("regularize", "reduce a system and emit a certificate");
    reg_cmd->add_option("--system", system_path)->required();
    reg_cmd->add_option("--out", out_dir);
    reg_cmd->add_option("--height", reg.height_bound);
    reg_cmd->add_option("--box", reg.coeff_box);
    reg_cmd->add_option("--budget", reg.budget);
    reg_cmd->add_option("--growth-a", growth.h_default.a);
    reg_cmd->add_option("--growth-b", growth.h_default.b);
    reg_cmd->add_option("--growth-c", growth.h_default.c);
    reg_cmd->add_option("--rtarget-a", growth.r_target.a);
    reg_cmd->add_option("--rtarget-b", growth.r_target.b);
    reg_cmd->add_option("--rtarget-c", growth.r_target.c);
    reg_cmd->add_option("--primes", reg.cleanup_primes)->delimiter(',');
    reg_cmd->add_option("--cap", reg.enum_cap);

    auto* rank_cmd = app.add_subcommand("rank", "per-block rank report and inequality checks");
    rank_cmd->add_option("--system", system_path)->required();
    rank_cmd->add_option("--height", rank_flags.height);
    rank_cmd->add_option("--box", rank_flags.box);
    rank_cmd->add_option("--budget", rank_flags.budget);
    rank_cmd->add_option("--primes", rank_flags.primes)->delimiter(',');
    rank_cmd->add_option("--sbound", rank_flags.sbound);
    rank_cmd->add_option("--csv", csv_path);

    auto* fp_cmd = app.add_subcommand("count-fp", "exhaustive F_p point counts");
    fp_cmd->add_option("--system", system_path)->required();
    fp_cmd->add_option("--pmin", pmin);
    fp_cmd->add_option("--pmax", pmax);
    fp_cmd->add_option("--cap", cap);
    fp_cmd->add_option("--csv", csv_path);

    auto* lift_cmd = app.add_subcommand("lift", "Hensel-lift a seed to higher precision");
    lift_cmd->add_option("--system", system_path)->required();
    lift_cmd->add_option("--p", p)->required();
    lift_cmd->add_option("--k", k)->required();
    lift_cmd->add_option("--seed", seed_coords)->required()->delimiter(',');
    lift_cmd->add_option("--frozen", frozen)->delimiter(',');

    auto* scale_cmd = app.add_subcommand("scale", "build and verify scaling multipliers");
    scale_cmd->add_option("--system", system_path)->required();
    scale_cmd->add_option("--out", out_dir);
    scale_cmd->add_option("--p-max", p_max);
    scale_cmd->add_option("--k", k);
    scale_cmd->add_option("--delta-max", padic.delta_max);
    scale_cmd->add_option("--seed-budget", padic.seed_budget);
    scale_cmd->add_option("--tolerance", tolerance);
    scale_cmd->add_option("--seed", rng_seed);
    scale_cmd->add_option("--cap", cap);

    auto* count_cmd = app.add_subcommand("count", "almost-prime solution counts");
    count_cmd->add_option("--system", system_path)->required();
    count_cmd->add_option("--N", ns)->delimiter(',');
    count_cmd->add_option("--Y", y);
    count_cmd->add_option("--J", jset)->delimiter(',');
    count_cmd->add_flag("--allow-zero-y", allow_zero);
    count_cmd->add_flag("--weighted", weighted);
    count_cmd->add_option("--cap", count_cap);
    count_cmd->add_option("--csv", csv_path);

    auto* pipe_cmd = app.add_subcommand("pipeline", "full regularize/solve/scale/count run");
    pipe_cmd->add_option("--config", config_path)->required();
    pipe_cmd->add_option("--out", out_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (reg_cmd->parsed()) return cmd_regularize(system_path, out_dir, growth, reg);
        if (rank_cmd->parsed()) return cmd_rank(system_path, rank_flags, csv_path);
        if (fp_cmd->parsed()) return cmd_count_fp(system_path, pmin, pmax, cap, csv_path);
        if (lift_cmd->parsed()) return cmd_lift(system_path, p, k, seed_coords, frozen);
        if (scale_cmd->parsed())
            return cmd_scale(system_path, out_dir, p_max, k, padic, tolerance, rng_seed, cap);
        if (count_cmd->parsed())
            return cmd_count(system_path, ns, y, jset, allow_zero, weighted, count_cap,
                             csv_path);
        if (pipe_cmd->parsed()) return cmd_pipeline(config_path, out_dir);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
