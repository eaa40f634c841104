#pragma once

// Independent counting oracles for cross-checking the optimized enumerators.
// These deliberately share no code with src/counting.cpp: membership is
// decided by trial division and evaluation goes through the exact evaluate().

#include "oddforms/counting.hpp"
#include "oddforms/forms.hpp"

#include <vector>

namespace testutil {

inline bool oracle_is_prime(long long n) {
    if (n < 2) return false;
    for (long long d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline bool oracle_admissible(long long v, long long n, long long y_max, bool allow_zero) {
    if (v == 0) return allow_zero;
    if (v < -n || v > n) return false;
    long long a = v < 0 ? -v : v;
    for (long long y = 1; y <= y_max; ++y) {
        if (a % y != 0) continue;
        if (oracle_is_prime(a / y)) return true;
    }
    return false;
}

inline oddforms::Int naive_almost_prime_count(const oddforms::FormSystem& sys,
                                              const oddforms::CountQuery& q) {
    const long long n = static_cast<long long>(q.N);
    std::vector<bool> in_j(sys.nvars(), false);
    for (auto j : q.exceptional) in_j[j] = true;

    std::vector<std::vector<long long>> domains(sys.nvars());
    for (std::size_t i = 0; i < sys.nvars(); ++i)
        for (long long v = -n; v <= n; ++v) {
            if (in_j[i] || oracle_admissible(v, n, static_cast<long long>(q.Y), q.allow_zero_y))
                domains[i].push_back(v);
        }

    oddforms::Int count = 0;
    std::vector<std::size_t> idx(sys.nvars(), 0);
    std::vector<oddforms::Int> x(sys.nvars());
    for (std::size_t i = 0; i < sys.nvars(); ++i) {
        if (domains[i].empty()) return 0;
        x[i] = domains[i][0];
    }
    while (true) {
        bool ok = true;
        for (const auto& value : oddforms::evaluate(sys, x))
            if (value != 0) {
                ok = false;
                break;
            }
        if (ok) count += 1;
        std::size_t i = sys.nvars();
        bool advanced = false;
        while (i-- > 0) {
            if (++idx[i] < domains[i].size()) {
                x[i] = domains[i][idx[i]];
                advanced = true;
                break;
            }
            idx[i] = 0;
            x[i] = domains[i][0];
        }
        if (!advanced) break;
    }
    return count;
}

}  // namespace testutil
