#include "oddforms/regularize.hpp"

#include "oddforms/modeval.hpp"
#include "oddforms/qlinalg.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

namespace oddforms {

std::uint64_t GrowthParams::operator()(std::uint64_t r, std::uint64_t d) const {
    std::uint64_t base = r + d, pw = 1;
    for (std::uint64_t i = 0; i < b; ++i) pw *= base;
    return a * pw + c;
}

std::uint64_t GrowthFunctions::h(std::uint32_t degree, std::uint64_t r, std::uint64_t d) const {
    auto it = h_per_degree.find(degree);
    return it != h_per_degree.end() ? it->second(r, d) : h_default(r, d);
}

std::uint64_t GrowthFunctions::target(std::uint64_t r, std::uint64_t d) const {
    return r_target(r, d);
}

namespace {

std::string render_rats(const std::vector<Rat>& v) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ",";
        os << v[i];
    }
    os << ")";
    return os.str();
}

std::string render_vars(const FormSystem& sys, const std::vector<std::size_t>& idx) {
    std::ostringstream os;
    os << "{";
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i) os << ",";
        os << sys.names()[idx[i]];
    }
    os << "}";
    return os.str();
}

struct RestrictOutcome {
    std::vector<std::string> vanished;
    std::vector<std::size_t> kept;  // pre-restriction indices of surviving vars
};

// Rebuilds the system with the listed variables zeroed and dropped; an
// optional linear-block index is skipped (the dependent form of the step).
RestrictOutcome apply_restrict(FormSystem& g, const std::vector<std::size_t>& zero_cur,
                               std::optional<std::size_t> drop_linear_idx) {
    RestrictOutcome out;
    std::vector<bool> mask(g.nvars(), false);
    for (auto j : zero_cur) mask[j] = true;
    std::vector<std::string> names;
    for (std::size_t j = 0; j < g.nvars(); ++j)
        if (!mask[j]) {
            names.push_back(g.names()[j]);
            out.kept.push_back(j);
        }
    FormSystem next(std::move(names));
    for (const auto& [deg, block] : g.blocks()) {
        for (std::size_t i = 0; i < block.size(); ++i) {
            if (deg == 1 && drop_linear_idx && i == *drop_linear_idx) continue;
            Form f = block[i].restricted(mask, true);
            if (f.is_zero())
                out.vanished.push_back("deg=" + std::to_string(deg) + ": " +
                                       block[i].to_string(g.names()));
            else
                next.add_form(std::move(f));
        }
    }
    g = std::move(next);
    return out;
}

void apply_decompose(FormSystem& g, std::uint32_t degree, const std::vector<Form>& adjoined,
                     std::size_t drop_idx) {
    FormSystem next(g.names());
    for (const auto& [deg, block] : g.blocks())
        for (std::size_t i = 0; i < block.size(); ++i) {
            if (deg == degree && i == drop_idx) continue;
            next.add_form(block[i]);
        }
    for (const auto& f : adjoined) next.add_form(f);
    g = std::move(next);
}

void apply_linear_drop(FormSystem& g, std::size_t idx) {
    FormSystem next(g.names());
    for (const auto& [deg, block] : g.blocks())
        for (std::size_t i = 0; i < block.size(); ++i) {
            if (deg == 1 && i == idx) continue;
            next.add_form(block[i]);
        }
    g = std::move(next);
}

std::size_t last_nonzero_index(const std::vector<Rat>& v) {
    for (std::size_t i = v.size(); i-- > 0;)
        if (v[i] != 0) return i;
    throw Error("all-zero combination");
}

qla::Mat coefficient_matrix(std::span<const Form> block, const std::vector<Exponents>& basis) {
    qla::Mat a;
    a.reserve(block.size());
    for (const auto& f : block) a.push_back(f.coefficient_vector(basis));
    return a;
}

bool in_rational_span(const Form& v, std::span<const Form> others,
                      const std::vector<Exponents>& basis) {
    if (others.empty()) return false;
    qla::Mat a = coefficient_matrix(others, basis);
    std::size_t r0 = qla::rank(a);
    a.push_back(v.coefficient_vector(basis));
    return qla::rank(a) == r0;
}

struct RegContext {
    FormSystem sys;
    std::vector<std::size_t> var_map;  // current index -> original index
};

RegContext make_context(const FormSystem& sys) {
    RegContext ctx{sys, {}};
    ctx.var_map.resize(sys.nvars());
    for (std::size_t i = 0; i < ctx.var_map.size(); ++i) ctx.var_map[i] = i;
    return ctx;
}

void record_restriction(RegContext& ctx, RegStep& step, const RestrictOutcome& outcome) {
    step.vanished = outcome.vanished;
    std::vector<std::size_t> next_map;
    next_map.reserve(outcome.kept.size());
    for (auto j : outcome.kept) next_map.push_back(ctx.var_map[j]);
    ctx.var_map = std::move(next_map);
}

// Lower bound that can certify a block without a search. Point-count Birch
// estimates can overshoot on loci that are reducible over extensions (wrong
// dimension vote at p = 3 mod 4, say), so only symbolic bounds qualify.
unsigned proven_lower(const Form& f) {
    if (f.is_zero()) return 0;
    std::vector<Form> block{f};
    try {
        auto est = birch_rank(block, default_birch_primes(f.degree()), 2000000);
        if (est.confidence != RankConfidence::exact_symbolic) return 1;
        return std::max(1u, (est.value + 1) / 2);
    } catch (const Error&) {
        return 1;
    }
}

bool regularize_pass(RegContext& ctx, const GrowthFunctions& growth, std::uint32_t d0,
                     const RegularizerOptions& opt, BudgetCounter& budget,
                     std::vector<RegStep>& steps, std::size_t& steps_used, bool& cap_hit) {
    bool changed = false;
    while (true) {
        if (steps_used >= opt.max_steps) {
            cap_hit = true;
            break;
        }
        const std::uint64_t r_now = ctx.sys.form_count();
        bool fired = false;
        for (const auto& [deg, block] : ctx.sys.blocks()) {
            if (deg < 3) continue;
            const std::uint64_t thr = growth.h(deg, r_now, d0);
            if (block.size() == 1 && proven_lower(block[0]) >= thr) continue;
            auto res = schmidt_rank_system(block, opt.coeff_box, opt.height_bound, budget);
            if (res.interval.upper >= thr) continue;

            RegStep step;
            step.kind = RegStepKind::decompose;
            step.degree = deg;
            step.lambda = res.best_combo;
            step.witness = res.interval.witness ? *res.interval.witness
                                                : std::vector<FactorPair>{};
            step.dropped_index = last_nonzero_index(res.best_combo);
            step.has_drop = true;

            std::vector<Form> adjoined;
            for (const auto& pair : step.witness) {
                const Form& v = pair.v;
                auto basis = monomial_basis(ctx.sys.nvars(), v.degree());
                std::vector<Form> same_degree;
                if (const auto* b = ctx.sys.block(v.degree()))
                    same_degree.assign(b->begin(), b->end());
                for (const auto& a : adjoined)
                    if (a.degree() == v.degree()) same_degree.push_back(a);
                if (!in_rational_span(v, same_degree, basis)) adjoined.push_back(v);
            }
            step.adjoined = adjoined;
            {
                std::ostringstream os;
                os << "decompose deg=" << deg << " block: combination "
                   << render_rats(step.lambda) << " has rank " << step.witness.size() << " < "
                   << thr << "; adjoin [";
                for (std::size_t i = 0; i < adjoined.size(); ++i) {
                    if (i) os << "; ";
                    os << adjoined[i].to_string(ctx.sys.names());
                }
                os << "]; drop form #" << (step.dropped_index + 1);
                step.description = os.str();
            }
            apply_decompose(ctx.sys, deg, adjoined, step.dropped_index);
            steps.push_back(std::move(step));
            ++steps_used;
            fired = true;
            changed = true;
            break;
        }
        if (!fired) break;
    }

    // base case: maximal linearly independent subset of the linear block
    while (true) {
        const auto* block = ctx.sys.block(1);
        if (!block || block->size() < 2) break;
        auto basis = monomial_basis(ctx.sys.nvars(), 1);
        std::optional<std::size_t> dependent;
        for (std::size_t j = 1; j < block->size(); ++j) {
            std::vector<Form> prefix(block->begin(), block->begin() + j);
            if (in_rational_span((*block)[j], prefix, basis)) {
                dependent = j;
                break;
            }
        }
        if (!dependent) break;
        RegStep step;
        step.kind = RegStepKind::drop_dependent_linear;
        step.degree = 1;
        step.dropped_index = *dependent;
        step.has_drop = true;
        step.description = "drop dependent linear form #" + std::to_string(*dependent + 1) +
                           " (" + (*block)[*dependent].to_string(ctx.sys.names()) + ")";
        apply_linear_drop(ctx.sys, *dependent);
        steps.push_back(std::move(step));
        ++steps_used;
        changed = true;
    }
    return changed;
}

bool linear_cleanup_pass(RegContext& ctx, std::uint64_t threshold, std::vector<RegStep>& steps) {
    bool changed = false;
    if (threshold == 0) return false;
    while (true) {
        const auto* block = ctx.sys.block(1);
        if (!block || block->empty()) break;
        auto basis = monomial_basis(ctx.sys.nvars(), 1);
        qla::Mat a = coefficient_matrix(*block, basis);
        auto combo = qla::min_support_row_combo(a, threshold - 1);
        if (!combo) break;

        RegStep step;
        step.lambda = combo->combo;
        step.dropped_index = last_nonzero_index(combo->combo);
        step.has_drop = true;
        step.degree = 1;

        if (combo->support.empty()) {
            step.kind = RegStepKind::drop_dependent_linear;
            step.description = "linear block dependency " + render_rats(step.lambda) +
                               ": drop form #" + std::to_string(step.dropped_index + 1);
            apply_linear_drop(ctx.sys, step.dropped_index);
            steps.push_back(std::move(step));
            changed = true;
            continue;
        }

        // support positions are basis indices; convert to variable indices
        std::vector<std::size_t> zero_vars;
        for (auto bi : combo->support)
            for (std::size_t j = 0; j < ctx.sys.nvars(); ++j)
                if (basis[bi][j]) zero_vars.push_back(j);
        std::sort(zero_vars.begin(), zero_vars.end());

        step.kind = RegStepKind::linear_zero;
        step.zeroed_vars_current = zero_vars;
        for (auto j : zero_vars) step.zeroed_vars_original.push_back(ctx.var_map[j]);
        {
            std::ostringstream os;
            os << "linear combination " << render_rats(step.lambda) << " has rank "
               << zero_vars.size() << " < " << threshold << ": zero "
               << render_vars(ctx.sys, zero_vars) << ", drop form #"
               << (step.dropped_index + 1);
            step.description = os.str();
        }
        auto outcome = apply_restrict(ctx.sys, zero_vars, step.dropped_index);
        record_restriction(ctx, step, outcome);
        steps.push_back(std::move(step));
        changed = true;
    }
    return changed;
}

Rat expected_slice_threshold(std::uint64_t p, std::size_t s, std::size_t r) {
    // (1/2) p^(s-r)
    if (s >= r) return Rat(int_pow(p, s - r), 2);
    return Rat(1, 2 * int_pow(p, r - s));
}

std::uint64_t slice_count(const FormSystem& sys, std::uint64_t p, std::size_t var,
                          std::uint64_t cap) {
    const std::size_t s = sys.nvars();
    std::uint64_t budget_points = 1;
    for (std::size_t i = 0; i + 1 < s; ++i) {
        if (budget_points > cap / p) throw CapExceeded("slice enumeration cap exceeded");
        budget_points *= p;
    }
    ModpSystem mp(sys, p, false);
    std::vector<std::uint64_t> x(s, 0);
    std::uint64_t count = 0;
    // odometer over all coordinates except `var`
    while (true) {
        if (mp.vanishes_at(x)) ++count;
        std::size_t i = s;
        bool advanced = false;
        while (i-- > 0) {
            if (i == var) continue;
            if (++x[i] < p) {
                advanced = true;
                break;
            }
            x[i] = 0;
        }
        if (!advanced) break;
    }
    return count;
}

bool hyperplane_cleanup_pass(RegContext& ctx, std::span<const std::uint64_t> primes,
                             std::uint64_t cap, std::vector<RegStep>& steps,
                             bool& low_confidence) {
    bool changed = false;
    const std::size_t max_iter = ctx.sys.form_count();
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        const std::size_t s = ctx.sys.nvars();
        const std::size_t r = ctx.sys.form_count();
        if (r == 0 || s == 0) break;
        std::optional<std::size_t> found;
        std::string detail;
        for (std::size_t i = 0; i < s && !found; ++i) {
            std::size_t votes = 0, usable = 0;
            std::ostringstream counts;
            for (auto p : primes) {
                if (!is_prime_u64(p)) continue;
                std::uint64_t count = slice_count(ctx.sys, p, i, cap);
                ++usable;
                bool vote = Rat(Int(count)) >= expected_slice_threshold(p, s, r);
                if (vote) ++votes;
                counts << " p=" << p << ":" << count;
            }
            if (usable == 0) throw Error("no usable primes for hyperplane cleanup");
            if (2 * votes > usable) {
                found = i;
                detail = counts.str();
                if (votes < usable) low_confidence = true;
            } else if (votes > 0) {
                low_confidence = true;
            }
        }
        if (!found) break;
        RegStep step;
        step.kind = RegStepKind::hyperplane_zero;
        step.zeroed_vars_current = {*found};
        step.zeroed_vars_original = {ctx.var_map[*found]};
        step.description = "slice counts" + detail + " indicate a max-dimensional component in {" +
                           ctx.sys.names()[*found] + "=0}: zero it";
        auto outcome = apply_restrict(ctx.sys, {*found}, std::nullopt);
        record_restriction(ctx, step, outcome);
        steps.push_back(std::move(step));
        changed = true;
    }
    return changed;
}

void finalize_certificate(RegularizationCertificate& cert, const RegContext& ctx,
                          const GrowthFunctions& growth, std::uint32_t d0,
                          const RegularizerOptions& opt) {
    cert.output = ctx.sys;
    cert.surviving_vars = ctx.var_map;
    std::vector<std::size_t> zeroed;
    for (const auto& step : cert.steps)
        for (auto j : step.zeroed_vars_original) zeroed.push_back(j);
    std::sort(zeroed.begin(), zeroed.end());
    zeroed.erase(std::unique(zeroed.begin(), zeroed.end()), zeroed.end());
    cert.zeroed_vars = zeroed;

    const std::uint64_t r_final = ctx.sys.form_count();
    for (const auto& [deg, block] : ctx.sys.blocks()) {
        BlockRankSummary summary;
        summary.degree = deg;
        summary.block_size = block.size();
        if (deg == 1) {
            std::vector<std::uint64_t> nop;
            auto est = birch_rank(block, nop, opt.enum_cap);
            summary.interval = {est.value, est.value, std::nullopt, true};
            summary.threshold = 0;
            summary.proven = true;
        } else {
            summary.threshold = growth.h(deg, r_final, d0);
            if (block.size() == 1 && proven_lower(block[0]) >= summary.threshold) {
                // certified by the Birch lower bound alone; skip the search
                auto res = schmidt_rank_system(block, opt.coeff_box, opt.height_bound, 0);
                summary.interval = res.interval;
                summary.proven = true;
            } else {
                auto res =
                    schmidt_rank_system(block, opt.coeff_box, opt.height_bound, opt.budget);
                summary.interval = res.interval;
                summary.proven = summary.interval.lower >= summary.threshold;
                if (!summary.proven) cert.evidence_only = true;
                if (!summary.interval.exhaustive) cert.budget_flagged = true;
            }
        }
        cert.final_ranks.push_back(std::move(summary));
    }
    cert.jf_bound =
        cert.max_threshold_used * cert.max_post_regularize_forms + cert.max_post_regularize_forms;
}

}  // namespace

std::pair<FormSystem, RegularizationCertificate> regularize(const FormSystem& sys,
                                                            const GrowthFunctions& growth,
                                                            const RegularizerOptions& opt) {
    auto odd = sys.oddness();
    if (!odd.all_odd) throw Error("even degree form present");
    RegularizationCertificate cert;
    cert.input = sys;
    RegContext ctx = make_context(sys);
    BudgetCounter budget{opt.budget};
    std::size_t steps_used = 0;
    bool cap_hit = false;
    const std::uint32_t d0 = std::max<std::uint32_t>(sys.max_degree(), 1);
    regularize_pass(ctx, growth, d0, opt, budget, cert.steps, steps_used, cap_hit);
    cert.budget_flagged = budget.exhausted || cap_hit;
    cert.max_post_regularize_forms = ctx.sys.form_count();
    cert.max_threshold_used = growth.target(ctx.sys.form_count(), d0);
    finalize_certificate(cert, ctx, growth, d0, opt);
    return {ctx.sys, std::move(cert)};
}

CleanupResult linear_cleanup(const FormSystem& sys, std::uint64_t threshold) {
    RegContext ctx = make_context(sys);
    CleanupResult res;
    linear_cleanup_pass(ctx, threshold, res.steps);
    res.system = ctx.sys;
    res.kept_vars = ctx.var_map;
    for (const auto& step : res.steps)
        for (auto j : step.zeroed_vars_original) res.zeroed_vars.push_back(j);
    std::sort(res.zeroed_vars.begin(), res.zeroed_vars.end());
    return res;
}

CleanupResult hyperplane_cleanup(const FormSystem& sys, std::span<const std::uint64_t> primes,
                                 std::uint64_t cap) {
    RegContext ctx = make_context(sys);
    CleanupResult res;
    hyperplane_cleanup_pass(ctx, primes, cap, res.steps, res.low_confidence);
    res.system = ctx.sys;
    res.kept_vars = ctx.var_map;
    for (const auto& step : res.steps)
        for (auto j : step.zeroed_vars_original) res.zeroed_vars.push_back(j);
    std::sort(res.zeroed_vars.begin(), res.zeroed_vars.end());
    return res;
}

PreparedSystem prepare_reduced_system(const FormSystem& sys, const GrowthFunctions& growth,
                                      const RegularizerOptions& opt) {
    auto odd = sys.oddness();
    if (!odd.all_odd) throw Error("even degree form present");

    PreparedSystem prep;
    prep.cert.input = sys;
    RegContext ctx = make_context(sys);
    BudgetCounter budget{opt.budget};
    std::size_t steps_used = 0;
    bool cap_hit = false;
    const std::uint32_t d0 = std::max<std::uint32_t>(sys.max_degree(), 1);

    bool done = false;
    for (std::size_t round = 0; round < opt.max_rounds; ++round) {
        bool ch = regularize_pass(ctx, growth, d0, opt, budget, prep.cert.steps, steps_used,
                                  cap_hit);
        prep.cert.max_post_regularize_forms =
            std::max(prep.cert.max_post_regularize_forms, ctx.sys.form_count());
        std::uint64_t threshold = growth.target(ctx.sys.form_count(), d0);
        prep.cert.max_threshold_used = std::max(prep.cert.max_threshold_used, threshold);
        ch |= linear_cleanup_pass(ctx, threshold, prep.cert.steps);
        ch |= hyperplane_cleanup_pass(ctx, opt.cleanup_primes, opt.enum_cap, prep.cert.steps,
                                      prep.cert.low_confidence);
        if (!ch) {
            done = true;
            break;
        }
    }
    if (!done) throw Error("regularize/cleanup alternation cap exceeded");
    if (cap_hit) throw Error("regularization step cap exceeded");

    prep.cert.budget_flagged = budget.exhausted;
    finalize_certificate(prep.cert, ctx, growth, d0, opt);
    prep.system = ctx.sys;
    prep.exceptional_set = prep.cert.zeroed_vars;
    return prep;
}

ReplayResult replay(const RegularizationCertificate& cert) {
    FormSystem g = cert.input;
    std::vector<std::size_t> var_map(g.nvars());
    for (std::size_t i = 0; i < var_map.size(); ++i) var_map[i] = i;
    std::vector<std::size_t> zeroed;

    for (const auto& step : cert.steps) {
        switch (step.kind) {
            case RegStepKind::decompose:
                apply_decompose(g, step.degree, step.adjoined, step.dropped_index);
                break;
            case RegStepKind::drop_dependent_linear:
                apply_linear_drop(g, step.dropped_index);
                break;
            case RegStepKind::linear_zero:
            case RegStepKind::hyperplane_zero: {
                std::optional<std::size_t> drop;
                if (step.kind == RegStepKind::linear_zero && step.has_drop)
                    drop = step.dropped_index;
                for (auto j : step.zeroed_vars_current) zeroed.push_back(var_map[j]);
                auto outcome = apply_restrict(g, step.zeroed_vars_current, drop);
                std::vector<std::size_t> next_map;
                next_map.reserve(outcome.kept.size());
                for (auto j : outcome.kept) next_map.push_back(var_map[j]);
                var_map = std::move(next_map);
                break;
            }
        }
    }
    std::sort(zeroed.begin(), zeroed.end());
    zeroed.erase(std::unique(zeroed.begin(), zeroed.end()), zeroed.end());
    return {std::move(g), std::move(zeroed)};
}

std::string RegularizationCertificate::to_text() const {
    std::ostringstream os;
    os << "regularization certificate\n";
    os << "input system:\n" << oddforms::to_text(input);
    os << "steps: " << steps.size() << "\n";
    for (std::size_t i = 0; i < steps.size(); ++i) {
        os << "  step " << (i + 1) << ": " << steps[i].description << "\n";
        for (const auto& v : steps[i].vanished) os << "    vanished " << v << "\n";
    }
    os << "J_F (1-based):";
    for (auto j : zeroed_vars) os << " " << (j + 1);
    os << "\n";
    os << "surviving (1-based):";
    for (auto j : surviving_vars) os << " " << (j + 1);
    os << "\n";
    os << "final block ranks:\n";
    for (const auto& b : final_ranks) {
        os << "  deg=" << b.degree << " r_l=" << b.block_size << " h=[" << b.interval.lower << ","
           << b.interval.upper << "] exhaustive=" << (b.interval.exhaustive ? "yes" : "no")
           << " threshold=" << b.threshold << " proven=" << (b.proven ? "yes" : "no") << "\n";
    }
    os << "flags: evidence_only=" << (evidence_only ? "yes" : "no")
       << " budget_flagged=" << (budget_flagged ? "yes" : "no")
       << " low_confidence=" << (low_confidence ? "yes" : "no") << "\n";
    os << "|J_F|=" << zeroed_vars.size() << " bound=" << jf_bound << "\n";
    os << "output system:\n" << oddforms::to_text(output);
    return os.str();
}

}  // namespace oddforms
