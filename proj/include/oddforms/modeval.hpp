#pragma once

#include "oddforms/forms.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace oddforms {

std::uint64_t mod_pow(std::uint64_t b, std::uint64_t e, std::uint64_t m);
std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t p);
bool is_prime_u64(std::uint64_t n);
Int int_pow(const Int& base, std::uint64_t e);

// Compiled mod-p view of a system: coefficient-reduced terms plus power
// tables, with the Jacobian rows precompiled for rank queries. Enumeration
// loops over F_p^s run through this instead of exact Int arithmetic.
class ModpSystem {
public:
    ModpSystem(const FormSystem& sys, std::uint64_t p, bool with_jacobian = true);

    std::uint64_t p() const { return p_; }
    std::size_t nvars() const { return s_; }
    std::size_t nforms() const { return forms_.size(); }

    void eval(std::span<const std::uint64_t> x, std::span<std::uint64_t> out) const;
    bool vanishes_at(std::span<const std::uint64_t> x) const;
    std::size_t jacobian_rank(std::span<const std::uint64_t> x) const;

private:
    struct Factor {
        std::uint16_t var;
        std::uint16_t exp;
    };
    struct Term {
        std::uint64_t coeff;
        std::vector<Factor> factors;
    };
    using CompiledForm = std::vector<Term>;

    CompiledForm compile(const Form& f) const;
    std::uint64_t eval_form(const CompiledForm& cf, std::span<const std::uint64_t> x) const;

    std::uint64_t p_;
    std::size_t s_;
    std::uint32_t max_exp_;
    std::vector<std::uint64_t> pows_;  // pows_[v * (max_exp_+1) + e] = v^e mod p
    std::vector<CompiledForm> forms_;
    std::vector<std::vector<CompiledForm>> jac_;  // [form][var]
};

// Odometer over [0,p)^s (or [1,p)^s when units_only). Returns false once
// exhausted. Start from the all-zero (or all-one) tuple.
bool next_point(std::span<std::uint64_t> x, std::uint64_t p, bool units_only);

std::size_t matrix_rank_mod_p(std::vector<std::vector<std::uint64_t>> m, std::uint64_t p);

}  // namespace oddforms
