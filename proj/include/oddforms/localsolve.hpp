#pragma once

#include "oddforms/forms.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace oddforms {

struct FpPointCount {
    std::uint64_t p = 0;
    std::uint64_t total = 0;                   // |V ∩ F_p^s|
    std::uint64_t unit_total = 0;              // |V ∩ (F_p^x)^s|
    std::uint64_t nonsingular_unit_total = 0;  // unit points with full Jacobian rank
    Rat expected;                              // p^(s-R)
    Rat bound;                                 // p^(s-R-1)
    bool bound_satisfied = false;              // |total - expected| <= bound
};

FpPointCount count_points(const FormSystem& sys, std::uint64_t p, std::uint64_t cap);

std::complex<double> exponential_sum(const FormSystem& sys, std::span<const std::uint64_t> a,
                                     std::uint64_t p, std::uint64_t cap);

std::vector<std::vector<std::uint64_t>> find_nonsingular_unit_solutions(const FormSystem& sys,
                                                                        std::uint64_t p,
                                                                        std::uint64_t cap,
                                                                        std::size_t limit);

// Truncated p-adic point: coordinates are residues mod p^k, decomposed as
// coord = p^e * u with u a unit whenever e < k; e = k flags a coordinate
// indistinguishable from 0 at this precision.
struct PAdicPoint {
    std::uint64_t p = 0;
    unsigned precision = 0;
    std::vector<Int> coords;
    std::vector<unsigned> valuations;
    std::vector<Int> unit_parts;  // u_i mod p^(k - e_i); 0 when e_i = k
};

PAdicPoint make_padic_point(std::uint64_t p, unsigned precision, std::vector<Int> coords);

struct SingularSeed : Error {
    using Error::Error;
};

// Newton iteration with doubling precision on a fixed unit R x R minor of the
// Jacobian; frozen coordinates are never corrected. Requires sys(seed) = 0
// (mod p) and Jacobian rank R (mod p) on the non-frozen columns.
PAdicPoint hensel_lift(const FormSystem& sys, std::span<const std::uint64_t> seed,
                       std::uint64_t p, unsigned precision,
                       std::span<const std::size_t> frozen = {});

struct PAdicSearchOptions {
    unsigned delta_max = 2;         // valuation layering cap per coordinate
    std::uint64_t seed_budget = 2000000;  // unit seeds examined across all layers
};

struct PAdicSearchResult {
    std::optional<PAdicPoint> point;
    bool exhausted = false;  // the whole layered space was enumerated
    std::uint64_t seeds_tried = 0;
    std::vector<unsigned> valuation_pattern;  // delta of the successful layer
};

// Searches x = p^delta ∘ z over small valuation patterns delta, solving for a
// unit z of the p-content-normalized scaled system and Hensel-lifting it. The
// returned point has sys(x) = 0 mod p^k, all valuations < k, and some R x R
// Jacobian minor of valuation < k/2.
PAdicSearchResult find_padic_nonzero_solution(const FormSystem& sys, std::uint64_t p,
                                              unsigned precision,
                                              const PAdicSearchOptions& opt = {});

struct RealSolveOptions {
    std::size_t max_restarts = 200;
    std::size_t newton_steps = 120;
    std::uint64_t rng_seed = 1;
};

struct RealSolveResult {
    std::optional<std::vector<double>> point;  // in (-1,1)^s, all |x_i| > tolerance
    double residual = 0;
    double sigma_min = 0;
    double min_abs_coord = 0;
    std::size_t restarts_used = 0;
};

RealSolveResult real_nonsingular_solution(const FormSystem& sys, double tolerance,
                                          const RealSolveOptions& opt = {});

// Minimum p-adic valuation over all R x R minors of the exact Jacobian at a
// point mod p^k; returns k when every minor vanishes at this precision.
unsigned min_jacobian_minor_valuation(const FormSystem& sys, std::span<const Int> point,
                                      std::uint64_t p, unsigned precision);

unsigned padic_valuation(const Int& v, std::uint64_t p, unsigned cap);

}  // namespace oddforms
