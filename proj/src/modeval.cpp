#include "oddforms/modeval.hpp"

namespace oddforms {

std::uint64_t mod_pow(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
    __uint128_t r = 1, bb = b % m;
    while (e) {
        if (e & 1) r = r * bb % m;
        bb = static_cast<__uint128_t>(bb) * bb % m;
        e >>= 1;
    }
    return static_cast<std::uint64_t>(r);
}

std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t p) {
    return mod_pow(a % p, p - 2, p);
}

bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

Int int_pow(const Int& base, std::uint64_t e) {
    Int r = 1, b = base;
    while (e) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

ModpSystem::ModpSystem(const FormSystem& sys, std::uint64_t p, bool with_jacobian)
    : p_(p), s_(sys.nvars()) {
    if (!is_prime_u64(p)) throw Error("modulus must be prime");
    max_exp_ = 1;
    for (const Form* f : sys.forms_in_order()) max_exp_ = std::max(max_exp_, f->degree());
    pows_.assign(p_ * (max_exp_ + 1), 1);
    for (std::uint64_t v = 0; v < p_; ++v) {
        pows_[v * (max_exp_ + 1)] = 1;
        for (std::uint32_t e = 1; e <= max_exp_; ++e)
            pows_[v * (max_exp_ + 1) + e] = pows_[v * (max_exp_ + 1) + e - 1] * v % p_;
    }
    for (const Form* f : sys.forms_in_order()) {
        forms_.push_back(compile(*f));
        if (with_jacobian) {
            std::vector<CompiledForm> row;
            row.reserve(s_);
            for (std::size_t j = 0; j < s_; ++j) row.push_back(compile(f->derivative(j)));
            jac_.push_back(std::move(row));
        }
    }
}

ModpSystem::CompiledForm ModpSystem::compile(const Form& f) const {
    CompiledForm cf;
    for (const auto& [exps, c] : f.terms()) {
        Int cr = c % static_cast<long long>(p_);
        if (cr < 0) cr += static_cast<long long>(p_);
        std::uint64_t cc = cr.convert_to<std::uint64_t>();
        if (cc == 0) continue;
        Term t{cc, {}};
        for (std::size_t j = 0; j < exps.size(); ++j)
            if (exps[j])
                t.factors.push_back({static_cast<std::uint16_t>(j),
                                     static_cast<std::uint16_t>(exps[j])});
        cf.push_back(std::move(t));
    }
    return cf;
}

std::uint64_t ModpSystem::eval_form(const CompiledForm& cf,
                                    std::span<const std::uint64_t> x) const {
    std::uint64_t acc = 0;
    const std::uint32_t stride = max_exp_ + 1;
    for (const auto& t : cf) {
        std::uint64_t v = t.coeff;
        for (const auto& fac : t.factors) v = v * pows_[x[fac.var] * stride + fac.exp] % p_;
        acc += v;
        if (acc >= p_) acc -= p_;
    }
    return acc;
}

void ModpSystem::eval(std::span<const std::uint64_t> x, std::span<std::uint64_t> out) const {
    for (std::size_t i = 0; i < forms_.size(); ++i) out[i] = eval_form(forms_[i], x);
}

bool ModpSystem::vanishes_at(std::span<const std::uint64_t> x) const {
    for (const auto& cf : forms_)
        if (eval_form(cf, x) != 0) return false;
    return true;
}

std::size_t ModpSystem::jacobian_rank(std::span<const std::uint64_t> x) const {
    std::vector<std::vector<std::uint64_t>> m(jac_.size(), std::vector<std::uint64_t>(s_));
    for (std::size_t i = 0; i < jac_.size(); ++i)
        for (std::size_t j = 0; j < s_; ++j) m[i][j] = eval_form(jac_[i][j], x);
    return matrix_rank_mod_p(std::move(m), p_);
}

bool next_point(std::span<std::uint64_t> x, std::uint64_t p, bool units_only) {
    const std::uint64_t lo = units_only ? 1 : 0;
    for (std::size_t i = x.size(); i-- > 0;) {
        if (++x[i] < p) return true;
        x[i] = lo;
    }
    return false;
}

std::size_t matrix_rank_mod_p(std::vector<std::vector<std::uint64_t>> m, std::uint64_t p) {
    if (m.empty()) return 0;
    std::size_t rows = m.size(), cols = m[0].size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t sel = r;
        while (sel < rows && m[sel][c] % p == 0) ++sel;
        if (sel == rows) continue;
        std::swap(m[sel], m[r]);
        std::uint64_t inv = mod_inverse(m[r][c] % p, p);
        for (std::size_t j = c; j < cols; ++j) m[r][j] = m[r][j] % p * inv % p;
        for (std::size_t i = r + 1; i < rows; ++i) {
            std::uint64_t f = m[i][c] % p;
            if (!f) continue;
            for (std::size_t j = c; j < cols; ++j)
                m[i][j] = (m[i][j] + (p - f) * m[r][j]) % p;
        }
        ++r;
    }
    return r;
}

}  // namespace oddforms
