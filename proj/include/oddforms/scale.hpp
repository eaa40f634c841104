#pragma once

#include "oddforms/forms.hpp"
#include "oddforms/localsolve.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace oddforms {

struct PrimeDiagnosis {
    std::uint64_t p = 0;
    bool bad = false;
    std::uint64_t witnesses_found = 0;  // non-singular unit solutions seen (capped)
};

// Bad primes up to p_max: primes with no non-singular solution in (F_p^x)^s.
std::vector<PrimeDiagnosis> detect_bad_primes(const FormSystem& sys, std::uint64_t p_max,
                                              std::uint64_t cap);

std::vector<std::uint64_t> bad_prime_list(std::span<const PrimeDiagnosis> diagnosis);

struct ScalingPlan {
    std::vector<std::uint64_t> bad_primes;
    std::map<std::uint64_t, PAdicPoint> local_solutions;  // per bad prime
    std::vector<Int> multipliers;                         // signed y_i
    Int max_multiplier;                                   // Y = max |y_i|
    std::vector<double> sign_source;                      // real solution used for signs
    unsigned precision = 0;
    std::string to_text(const FormSystem& sys) const;
};

struct ScalerError : Error {
    using Error::Error;
};

// y_i = prod_{p in S} p^{e_{i,p}} from the valuations of per-prime p-adic
// solutions with non-zero coordinates; signs are applied separately.
ScalingPlan build_multipliers(const FormSystem& sys, std::span<const std::uint64_t> bad_primes,
                              unsigned precision, const PAdicSearchOptions& opt = {});

void apply_signs(ScalingPlan& plan, std::span<const double> real_solution);

struct PrimeVerification {
    std::uint64_t p = 0;
    bool bad_case = false;           // case 1 (p in S) vs case 2 (good prime)
    std::vector<Int> witness;        // unit vector w mod p^k
    bool residue_ok = false;         // G(y∘w) = 0 mod p^k
    bool units_ok = false;
    unsigned minor_valuation = 0;    // best R x R minor of the p-normalized scaled system
    bool unit_jacobian = false;      // full rank mod p
    bool ok = false;
};

struct ScaledLocalReport {
    std::vector<PrimeVerification> primes;
    bool all_ok = false;
};

// Scaled-system local check: for each prime, a unit witness w with G_y(w) = 0 mod
// p^k and a quantitatively non-singular Jacobian (some minor of the
// p-content-normalized scaled system has valuation < k/2).
ScaledLocalReport verify_scaled_local(const FormSystem& sys, const ScalingPlan& plan,
                                      std::span<const std::uint64_t> primes, unsigned precision,
                                      std::uint64_t cap);

}  // namespace oddforms
