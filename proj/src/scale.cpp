#include "oddforms/scale.hpp"

#include "oddforms/modeval.hpp"

#include <algorithm>
#include <sstream>

namespace oddforms {

namespace {

Int mod_reduce(const Int& v, const Int& m) {
    Int r = v % m;
    if (r < 0) r += m;
    return r;
}

Int mod_inverse_int(const Int& a, const Int& m) {
    Int old_r = mod_reduce(a, m), r = m;
    Int old_s = 1, s = 0;
    while (r != 0) {
        Int q = old_r / r;
        Int tmp = old_r - q * r;
        old_r = r;
        r = tmp;
        tmp = old_s - q * s;
        old_s = s;
        s = tmp;
    }
    if (old_r != 1) throw Error("element not invertible");
    return mod_reduce(old_s, m);
}

FormSystem p_content_normalized(const FormSystem& sys, std::uint64_t p) {
    FormSystem out(sys.names());
    for (const Form* f : sys.forms_in_order()) {
        unsigned v = padic_valuation(f->content(), p, 64);
        out.add_form(v ? f->divided_by(int_pow(p, v)) : *f);
    }
    return out;
}

std::vector<std::uint64_t> primes_up_to(std::uint64_t n) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t p = 2; p <= n; ++p)
        if (is_prime_u64(p)) out.push_back(p);
    return out;
}

}  // namespace

std::vector<PrimeDiagnosis> detect_bad_primes(const FormSystem& sys, std::uint64_t p_max,
                                              std::uint64_t cap) {
    std::vector<PrimeDiagnosis> out;
    for (auto p : primes_up_to(p_max)) {
        PrimeDiagnosis diag;
        diag.p = p;
        auto witnesses = find_nonsingular_unit_solutions(sys, p, cap, 1);
        diag.witnesses_found = witnesses.size();
        diag.bad = witnesses.empty();
        out.push_back(diag);
    }
    return out;
}

std::vector<std::uint64_t> bad_prime_list(std::span<const PrimeDiagnosis> diagnosis) {
    std::vector<std::uint64_t> out;
    for (const auto& d : diagnosis)
        if (d.bad) out.push_back(d.p);
    return out;
}

ScalingPlan build_multipliers(const FormSystem& sys, std::span<const std::uint64_t> bad_primes,
                              unsigned precision, const PAdicSearchOptions& opt) {
    ScalingPlan plan;
    plan.precision = precision;
    plan.bad_primes.assign(bad_primes.begin(), bad_primes.end());
    const std::size_t s = sys.nvars();
    plan.multipliers.assign(s, Int(1));
    for (auto p : bad_primes) {
        auto res = find_padic_nonzero_solution(sys, p, precision, opt);
        if (!res.point) {
            std::ostringstream os;
            os << "no non-zero-coordinate p-adic solution found for bad prime " << p
               << " within budget (seeds tried: " << res.seeds_tried
               << ", layers exhausted: " << (res.exhausted ? "yes" : "no") << ")";
            throw ScalerError(os.str());
        }
        for (std::size_t i = 0; i < s; ++i) {
            if (res.point->valuations[i] >= precision)
                throw ScalerError("p-adic coordinate indistinguishable from zero at precision");
            plan.multipliers[i] *= int_pow(p, res.point->valuations[i]);
        }
        plan.local_solutions.emplace(p, std::move(*res.point));
    }
    plan.max_multiplier = 0;
    for (const auto& y : plan.multipliers) {
        Int ay = y < 0 ? Int(-y) : y;
        if (ay > plan.max_multiplier) plan.max_multiplier = ay;
    }
    return plan;
}

void apply_signs(ScalingPlan& plan, std::span<const double> real_solution) {
    if (real_solution.size() != plan.multipliers.size())
        throw Error("real solution dimension mismatch");
    for (const auto& x : real_solution)
        if (x == 0.0) throw Error("real solution has a zero coordinate");
    for (std::size_t i = 0; i < plan.multipliers.size(); ++i) {
        Int mag = plan.multipliers[i] < 0 ? Int(-plan.multipliers[i]) : plan.multipliers[i];
        plan.multipliers[i] = real_solution[i] < 0 ? Int(-mag) : mag;
    }
    plan.sign_source.assign(real_solution.begin(), real_solution.end());
}

ScaledLocalReport verify_scaled_local(const FormSystem& sys, const ScalingPlan& plan,
                                      std::span<const std::uint64_t> primes, unsigned precision,
                                      std::uint64_t cap) {
    ScaledLocalReport report;
    report.all_ok = true;
    const std::size_t s = sys.nvars();

    FormSystem scaled = scale_variables(sys, plan.multipliers);

    for (auto p : primes) {
        if (!is_prime_u64(p)) continue;
        PrimeVerification pv;
        pv.p = p;
        Int pk = int_pow(p, precision);
        bool in_s = std::find(plan.bad_primes.begin(), plan.bad_primes.end(), p) !=
                    plan.bad_primes.end();
        pv.bad_case = in_s;

        std::vector<Int> w(s);
        if (in_s) {
            const PAdicPoint& x = plan.local_solutions.at(p);
            if (x.precision < precision)
                throw ScalerError("stored local solution has insufficient precision");
            for (std::size_t i = 0; i < s; ++i) {
                // y_i = sign * p^{e_i} * M_i with p not dividing M_i
                unsigned e = x.valuations[i];
                Int m = plan.multipliers[i] / int_pow(p, e);  // signed, unit mod p
                Int u = x.unit_parts[i];
                w[i] = mod_reduce(u * mod_inverse_int(m, pk), pk);
            }
        } else {
            auto seeds = find_nonsingular_unit_solutions(sys, p, cap, 1);
            if (seeds.empty()) {
                pv.ok = false;
                report.primes.push_back(pv);
                report.all_ok = false;
                continue;
            }
            PAdicPoint x = hensel_lift(sys, seeds.front(), p, precision);
            for (std::size_t i = 0; i < s; ++i)
                w[i] = mod_reduce(x.coords[i] * mod_inverse_int(plan.multipliers[i], pk), pk);
        }

        pv.witness = w;
        pv.units_ok = std::all_of(w.begin(), w.end(),
                                  [&](const Int& v) { return v % p != 0; });
        pv.residue_ok = true;
        for (const auto& value : evaluate(scaled, w, pk))
            if (value != 0) pv.residue_ok = false;

        FormSystem normalized = p_content_normalized(scaled, p);
        pv.minor_valuation = min_jacobian_minor_valuation(normalized, w, p, precision);
        pv.unit_jacobian = pv.minor_valuation == 0;
        pv.ok = pv.residue_ok && pv.units_ok && pv.minor_valuation < (precision + 1) / 2;
        report.primes.push_back(pv);
        if (!pv.ok) report.all_ok = false;
    }
    return report;
}

std::string ScalingPlan::to_text(const FormSystem& sys) const {
    std::ostringstream os;
    os << "scaling plan\n";
    os << "bad primes:";
    if (bad_primes.empty()) os << " none";
    for (auto p : bad_primes) os << " " << p;
    os << "\n";
    for (const auto& [p, pt] : local_solutions) {
        os << "  p=" << p << " solution mod p^" << pt.precision << ":";
        for (std::size_t i = 0; i < pt.coords.size(); ++i)
            os << " " << sys.names()[i] << "=" << pt.coords[i] << " (v=" << pt.valuations[i]
               << ")";
        os << "\n";
    }
    os << "multipliers y:";
    for (const auto& y : multipliers) os << " " << y;
    os << "\n";
    os << "Y = " << max_multiplier << "\n";
    if (!sign_source.empty()) {
        os << "sign source:";
        for (auto x : sign_source) os << " " << (x < 0 ? "-" : "+");
        os << "\n";
    }
    return os.str();
}

}  // namespace oddforms
