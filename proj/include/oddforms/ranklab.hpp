#pragma once

#include "oddforms/forms.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace oddforms {

Form multiply(const Form& a, const Form& b);

// One term of a decomposition f = sum u_scale_i * u_i * v_i. Both stored forms
// are primitive integer forms; the rational multiplier carries what exact
// solving produced. For odd-degree f the v slot holds the odd-degree factor.
struct FactorPair {
    Form u;
    Form v;
    Rat u_scale = 1;
};

struct SchmidtRankInterval {
    unsigned lower = 0;
    unsigned upper = 0;
    std::optional<std::vector<FactorPair>> witness;
    // true when every decomposition level below `upper` was fully enumerated
    // within the height box, so `upper` is optimal within the declared search
    // space (not necessarily over all of Q).
    bool exhaustive = false;
};

enum class RankConfidence { exact_symbolic, point_count_estimate };

std::string to_string(RankConfidence c);

struct BirchRankEstimate {
    unsigned value = 0;
    std::map<std::uint64_t, std::uint64_t> per_prime_counts;
    RankConfidence confidence = RankConfidence::point_count_estimate;
    bool primes_disagree = false;  // dimension vote tied or spread > 1
};

struct BudgetCounter {
    std::uint64_t remaining = 0;
    bool exhausted = false;
    bool step() {
        if (remaining == 0) {
            exhausted = true;
            return false;
        }
        --remaining;
        return true;
    }
};

unsigned linear_rank(const Form& f);

SchmidtRankInterval schmidt_rank(const Form& f, unsigned height_bound, std::uint64_t budget);
SchmidtRankInterval schmidt_rank(const Form& f, unsigned height_bound, BudgetCounter& budget);

struct SystemRankResult {
    SchmidtRankInterval interval;
    std::vector<Rat> best_combo;  // combination achieving interval.upper
};

SystemRankResult schmidt_rank_system(std::span<const Form> block, unsigned coeff_box,
                                     unsigned height_bound, std::uint64_t budget);
SystemRankResult schmidt_rank_system(std::span<const Form> block, unsigned coeff_box,
                                     unsigned height_bound, BudgetCounter& budget);

BirchRankEstimate birch_rank(std::span<const Form> block, std::span<const std::uint64_t> primes,
                             std::uint64_t sbound);

// Default prime set for dimension votes: the three smallest primes > max(3, d).
std::vector<std::uint64_t> default_birch_primes(std::uint32_t degree);

struct BlockRankData {
    std::uint32_t degree = 0;
    std::size_t block_size = 0;
    SchmidtRankInterval schmidt;
    BirchRankEstimate birch;
};

struct RankLabOptions {
    unsigned height_bound = 1;
    unsigned coeff_box = 1;
    std::uint64_t budget = 200000;
    std::vector<std::uint64_t> primes;  // empty: per-block defaults
    std::uint64_t sbound = 2000000;
};

std::vector<BlockRankData> compute_block_rank_data(const FormSystem& sys,
                                                   const RankLabOptions& opt = {});

struct StrengthBirchCheck {
    bool ok = false;
    Int lhs, rhs, margin;
};

// Baily-Lampert: h(F) <= 4^d d^2 R (B(F) + R - 1).
StrengthBirchCheck verify_strength_birch(const FormSystem& sys,
                                         std::span<const BlockRankData> data);

struct LampertCheck {
    bool ok = false;
    long long bound = 0;
    std::size_t measured_codim = 0;  // s + 1 when the locus is empty
    bool locus_empty = false;
    std::map<std::uint64_t, std::uint64_t> per_prime_counts;
    bool primes_disagree = false;
    unsigned block_rank_min = 0;
};

// Joint R x s Jacobian deficiency locus: measured codim >= B - R - d + 2.
LampertCheck verify_lampert_codim(const FormSystem& sys, std::span<const std::uint64_t> primes,
                                  std::uint64_t sbound, const RankLabOptions& opt = {});

std::string rank_report_csv(std::span<const BlockRankData> data);

}  // namespace oddforms
