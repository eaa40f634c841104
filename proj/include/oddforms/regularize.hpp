#pragma once

#include "oddforms/forms.hpp"
#include "oddforms/ranklab.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace oddforms {

struct GrowthParams {
    std::uint64_t a = 2;
    std::uint64_t b = 2;
    std::uint64_t c = 0;
    std::uint64_t operator()(std::uint64_t r, std::uint64_t d) const;  // a*(r+d)^b + c
};

// Tunable thresholds of the reduction: per-degree rank targets H_l(R,d) plus the
// linear-rank target R(R,d).
struct GrowthFunctions {
    GrowthParams h_default{2, 2, 0};
    std::map<std::uint32_t, GrowthParams> h_per_degree;
    GrowthParams r_target{0, 0, 2};

    std::uint64_t h(std::uint32_t degree, std::uint64_t r, std::uint64_t d) const;
    std::uint64_t target(std::uint64_t r, std::uint64_t d) const;
};

enum class RegStepKind {
    decompose,              // low-rank block combination replaced by its odd factors
    drop_dependent_linear,  // base case: dependent linear form removed
    linear_zero,            // low-rank linear combination: zero its support
    hyperplane_zero         // max-dimensional component inside a hyperplane
};

struct RegStep {
    RegStepKind kind;
    std::uint32_t degree = 0;
    std::vector<Rat> lambda;
    std::vector<FactorPair> witness;
    std::vector<Form> adjoined;                      // in the space current at record time
    std::size_t dropped_index = 0;                   // index within the affected block
    bool has_drop = false;
    std::vector<std::size_t> zeroed_vars_current;    // current-space variable indices
    std::vector<std::size_t> zeroed_vars_original;   // original-system indices
    std::vector<std::string> vanished;               // forms killed by the restriction
    std::string description;                         // rendered at record time
};

struct BlockRankSummary {
    std::uint32_t degree = 0;
    std::size_t block_size = 0;
    SchmidtRankInterval interval;
    std::uint64_t threshold = 0;  // H_l(R',d) in force at certification time
    bool proven = false;          // lower bound met the threshold
};

struct RegularizationCertificate {
    FormSystem input;
    FormSystem output;
    std::vector<RegStep> steps;
    std::vector<std::size_t> zeroed_vars;     // J_F, original indices, sorted
    std::vector<std::size_t> surviving_vars;  // original indices of output variables
    std::vector<BlockRankSummary> final_ranks;
    bool evidence_only = false;       // some block passed without a proven lower bound
    bool budget_flagged = false;      // a rank search ran out of budget
    bool low_confidence = false;      // hyperplane proxy disagreement across primes
    std::size_t max_post_regularize_forms = 0;
    std::uint64_t max_threshold_used = 0;  // largest R_target(R',d) in force
    std::uint64_t jf_bound = 0;            // R_target*R' + R' with the maxima above
    std::string to_text() const;
};

struct RegularizerOptions {
    unsigned height_bound = 1;
    unsigned coeff_box = 1;
    std::uint64_t budget = 200000;
    std::vector<std::uint64_t> cleanup_primes{3, 5, 7};
    std::uint64_t enum_cap = 25000000;
    std::size_t max_rounds = 8;
    std::size_t max_steps = 500;
};

// One Schmidt regularization pass (no variable changes): replaces low-rank
// top blocks by their odd-degree co-factors until every block of degree >= 3
// certifies against H, then reduces the linear block to a maximal
// linearly-independent subset.
std::pair<FormSystem, RegularizationCertificate> regularize(
    const FormSystem& sys, const GrowthFunctions& growth, const RegularizerOptions& opt = {});

struct CleanupResult {
    FormSystem system;
    std::vector<std::size_t> zeroed_vars;  // input-system indices
    std::vector<std::size_t> kept_vars;    // input indices of surviving variables
    std::vector<RegStep> steps;
    bool low_confidence = false;
};

CleanupResult linear_cleanup(const FormSystem& sys, std::uint64_t threshold);

CleanupResult hyperplane_cleanup(const FormSystem& sys, std::span<const std::uint64_t> primes,
                                 std::uint64_t cap);

struct PreparedSystem {
    FormSystem system;                          // G'
    std::vector<std::size_t> exceptional_set;   // J_F, original indices
    RegularizationCertificate cert;
};

PreparedSystem prepare_reduced_system(const FormSystem& sys, const GrowthFunctions& growth,
                                      const RegularizerOptions& opt = {});

struct ReplayResult {
    FormSystem system;
    std::vector<std::size_t> zeroed_vars;
};

// Mechanically re-applies the recorded steps to the certificate's input; the
// result must reproduce the certificate's output and J_F exactly.
ReplayResult replay(const RegularizationCertificate& cert);

}  // namespace oddforms
