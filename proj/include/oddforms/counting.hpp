#pragma once

#include "oddforms/forms.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace oddforms {

struct PrimeTools {
    std::uint64_t limit = 0;
    std::vector<std::uint32_t> primes;
    std::vector<bool> prime_flags;  // indexed 0..limit
    std::vector<double> lambda;     // von Mangoldt, indexed 0..limit

    static PrimeTools build(std::uint64_t n);
};

struct CountQuery {
    std::uint64_t N = 2;
    std::uint64_t Y = 1;
    std::vector<std::size_t> exceptional;  // J: coordinates free over [-N, N]
    bool allow_zero_y = false;

    void validate(std::size_t nvars) const;  // N >= 2, Y >= 1, J within range
};

struct CountOptions {
    std::uint64_t cap = 2000000000;  // enumerated-prefix cardinality cap
    std::size_t sample_limit = 0;
};

struct CountOutcome {
    Int count = 0;
    std::vector<std::vector<long long>> samples;
    bool solved_coordinate = false;
    std::size_t solved_var = 0;
};

// Exact count of solutions x in [-N,N]^s of the system with x_i = y_i p_i
// (p_i prime, 1 <= |y_i| <= Y, or x_i = 0 when allow_zero_y) for i outside J,
// and x_i a free integer for i in J. Counts solution vectors, not
// representations.
CountOutcome almost_prime_count(const FormSystem& sys, const CountQuery& query,
                                const CountOptions& opt = {});

// Pipeline embedding count: coordinates with multiplier 0 are pinned to zero
// (the exceptional set); the rest range over x_i = y_i q_i with q_i a positive
// prime and |x_i| <= N. Checked against the given (original) system.
CountOutcome embedded_prime_count(const FormSystem& sys, std::span<const Int> multipliers,
                                  std::uint64_t n, const CountOptions& opt = {});

// M_F(N): von Mangoldt weighted count over [1,N]^s.
double weighted_prime_count(const FormSystem& sys, std::uint64_t n, std::uint64_t cap);

struct CountRecord {
    std::uint64_t N = 0;
    std::uint64_t Y = 1;
    Int count = 0;
    double predicted = 0;  // N^(s-D) / (log N)^s
    double ratio = 0;
    double elapsed_seconds = 0;
};

CountRecord make_count_record(std::uint64_t n, std::uint64_t y, Int count, std::size_t s,
                              std::uint64_t total_degree, double elapsed_seconds);

struct GrowthFit {
    double slope = 0;     // least-squares slope of log(count) vs log(N)
    double exponent = 0;  // exponent of the growth-law fit c*N^b/(log N)^s
    double constant = 0;  // mean of count/predicted
    std::vector<double> residuals;
    std::vector<std::uint64_t> excluded_n;  // zero-count records left out
};

GrowthFit growth_fit(std::span<const CountRecord> records, std::size_t s,
                     std::uint64_t total_degree);

}  // namespace oddforms
