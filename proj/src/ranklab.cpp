#include "oddforms/ranklab.hpp"

#include "oddforms/modeval.hpp"
#include "oddforms/qlinalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace oddforms {

Form multiply(const Form& a, const Form& b) {
    if (a.nvars() != b.nvars()) throw Error("variable count mismatch in product");
    std::vector<Monomial> mons;
    for (const auto& [ea, ca] : a.terms())
        for (const auto& [eb, cb] : b.terms()) {
            Exponents e(ea.size());
            for (std::size_t j = 0; j < e.size(); ++j) e[j] = ea[j] + eb[j];
            mons.push_back({ca * cb, std::move(e)});
        }
    return Form::from_monomials(a.degree() + b.degree(), a.nvars(), mons);
}

std::string to_string(RankConfidence c) {
    return c == RankConfidence::exact_symbolic ? "exact-symbolic" : "point-count-estimate";
}

unsigned linear_rank(const Form& f) {
    if (f.is_zero()) return 0;
    if (f.degree() != 1) throw Error("linear_rank requires a degree-1 form");
    return static_cast<unsigned>(f.term_count());
}

namespace {

bool is_diagonal(const Form& f) {
    for (const auto& [e, c] : f.terms()) {
        std::size_t vars = 0;
        for (auto x : e)
            if (x) ++vars;
        if (vars != 1) return false;
    }
    return !f.is_zero();
}

// Upper bound by pulling out one variable at a time (greedy cover of the
// monomials); every piece is x_j * (integer form), so this is always a valid
// height-1 decomposition.
std::vector<FactorPair> greedy_split(const Form& f) {
    std::vector<FactorPair> pairs;
    auto remaining = f.terms();
    const std::size_t s = f.nvars();
    while (!remaining.empty()) {
        std::size_t best_var = 0, best_cover = 0;
        for (std::size_t j = 0; j < s; ++j) {
            std::size_t cover = 0;
            for (const auto& [e, c] : remaining)
                if (e[j]) ++cover;
            if (cover > best_cover) {
                best_cover = cover;
                best_var = j;
            }
        }
        std::vector<Monomial> group;
        for (auto it = remaining.begin(); it != remaining.end();) {
            if (it->first[best_var]) {
                Exponents e = it->first;
                e[best_var] -= 1;
                group.push_back({it->second, std::move(e)});
                it = remaining.erase(it);
            } else {
                ++it;
            }
        }
        Form u = Form::from_monomials(f.degree() - 1, s, group);
        Exponents ve(s, 0);
        ve[best_var] = 1;
        Monomial vm{1, ve};
        Form v = Form::from_monomials(1, s, std::span<const Monomial>(&vm, 1));
        pairs.push_back({std::move(u), std::move(v), Rat(1)});
    }
    return pairs;
}

// Canonical coefficient vectors in [-H, H]^n: primitive, first non-zero entry
// positive, visited in ascending lexicographic order.
struct VectorBox {
    long long H;
    std::vector<long long> c;
    bool started = false;

    explicit VectorBox(std::size_t n, unsigned height)
        : H(height), c(n, -static_cast<long long>(height)) {}

    bool advance() {
        for (std::size_t i = c.size(); i-- > 0;) {
            if (c[i] < H) {
                ++c[i];
                for (std::size_t j = i + 1; j < c.size(); ++j) c[j] = -H;
                return true;
            }
        }
        return false;
    }

    bool canonical() const {
        long long g = 0;
        bool positive_lead = false, seen = false;
        for (auto v : c) {
            if (v != 0 && !seen) {
                seen = true;
                positive_lead = v > 0;
            }
            g = std::gcd(g, std::llabs(v));
        }
        return seen && positive_lead && g == 1;
    }

    bool next() {
        if (!started) {
            started = true;
            if (canonical()) return true;
        }
        while (advance())
            if (canonical()) return true;
        return false;
    }
};

struct SchmidtSearcher {
    const Form& f;
    unsigned H;
    BudgetCounter& budget;
    std::size_t s;
    std::uint32_t d;
    std::map<std::uint32_t, std::vector<Form>> candidates;
    std::map<std::uint32_t, bool> candidates_complete;

    SchmidtSearcher(const Form& form, unsigned height, BudgetCounter& b)
        : f(form), H(height), budget(b), s(form.nvars()), d(form.degree()) {}

    std::vector<std::uint32_t> cofactor_degrees() const {
        std::vector<std::uint32_t> degs;
        if (d % 2 == 1) {
            for (std::uint32_t e = 1; e + 1 <= d; e += 2)
                if (e <= d - 1) degs.push_back(e);
        } else {
            for (std::uint32_t e = 1; e <= d / 2; ++e) degs.push_back(e);
        }
        return degs;
    }

    const std::vector<Form>& candidate_forms(std::uint32_t e) {
        auto it = candidates.find(e);
        if (it != candidates.end()) return it->second;
        auto basis = monomial_basis(s, e);
        std::vector<Form> out;
        VectorBox box(basis.size(), H);
        bool complete = true;
        while (box.next()) {
            if (!budget.step()) {
                complete = false;
                break;
            }
            std::vector<Monomial> mons;
            for (std::size_t i = 0; i < basis.size(); ++i)
                if (box.c[i]) mons.push_back({Int(box.c[i]), basis[i]});
            out.push_back(Form::from_monomials(e, s, mons));
        }
        candidates_complete[e] = complete;
        return candidates.emplace(e, std::move(out)).first->second;
    }

    // Solve f = sum u_i v_i for the u_i by exact linear algebra on monomial
    // coefficients.
    std::optional<std::vector<FactorPair>> solve_cofactors(
        const std::vector<const Form*>& vs) {
        std::map<Exponents, std::size_t> row_of;
        auto row_index = [&](const Exponents& e) {
            auto [it, fresh] = row_of.emplace(e, row_of.size());
            return it->second;
        };
        for (const auto& [e, c] : f.terms()) row_index(e);

        std::vector<std::vector<Exponents>> ubases;
        std::vector<std::size_t> col_offset;
        std::size_t cols = 0;
        for (const Form* v : vs) {
            col_offset.push_back(cols);
            ubases.push_back(monomial_basis(s, d - v->degree()));
            cols += ubases.back().size();
        }
        struct Entry {
            std::size_t row, col;
            Int c;
        };
        std::vector<Entry> entries;
        for (std::size_t j = 0; j < vs.size(); ++j) {
            for (std::size_t m = 0; m < ubases[j].size(); ++m) {
                for (const auto& [ev, cv] : vs[j]->terms()) {
                    Exponents key(s);
                    for (std::size_t t = 0; t < s; ++t) key[t] = ev[t] + ubases[j][m][t];
                    entries.push_back({row_index(key), col_offset[j] + m, cv});
                }
            }
        }
        qla::Mat a(row_of.size(), qla::Vec(cols, Rat(0)));
        qla::Vec b(row_of.size(), Rat(0));
        for (const auto& en : entries) a[en.row][en.col] += Rat(en.c);
        for (const auto& [e, c] : f.terms()) b[row_of[e]] = Rat(c);

        auto sol = qla::solve(a, b);
        if (!sol) return std::nullopt;

        std::vector<FactorPair> pairs;
        for (std::size_t j = 0; j < vs.size(); ++j) {
            std::map<Exponents, Rat> uterms;
            bool nonzero = false;
            for (std::size_t m = 0; m < ubases[j].size(); ++m) {
                Rat q = (*sol)[col_offset[j] + m];
                if (q != 0) nonzero = true;
                uterms[ubases[j][m]] = q;
            }
            if (!nonzero) continue;
            Form u = form_from_rational_terms(d - vs[j]->degree(), s, uterms);
            // scale between the rational solution and its primitive form
            Rat scale = 0;
            for (const auto& [e, c] : u.terms()) {
                scale = uterms[e] / Rat(c);
                break;
            }
            pairs.push_back({std::move(u), *vs[j], scale});
        }
        return pairs;
    }

    // First decomposition of length h found in deterministic order, or nullopt.
    std::optional<std::vector<FactorPair>> search_level(unsigned h, bool& level_complete) {
        level_complete = true;
        auto degs = cofactor_degrees();
        std::vector<std::uint32_t> multiset(h, 0);
        std::vector<std::size_t> didx(h, 0);

        // non-decreasing degree index tuples
        auto next_multiset = [&]() {
            for (std::size_t i = h; i-- > 0;) {
                if (didx[i] + 1 < degs.size()) {
                    ++didx[i];
                    for (std::size_t j = i + 1; j < h; ++j) didx[j] = didx[i];
                    return true;
                }
            }
            return false;
        };

        do {
            for (std::size_t i = 0; i < h; ++i) multiset[i] = degs[didx[i]];
            std::vector<const std::vector<Form>*> cand(h);
            bool any_empty = false;
            for (std::size_t i = 0; i < h; ++i) {
                cand[i] = &candidate_forms(multiset[i]);
                if (!candidates_complete[multiset[i]]) level_complete = false;
                if (cand[i]->empty()) any_empty = true;
            }
            if (budget.exhausted) {
                level_complete = false;
                return std::nullopt;
            }
            if (any_empty) continue;

            std::vector<std::size_t> idx(h, 0);
            while (true) {
                bool ordered = true;
                for (std::size_t i = 0; i + 1 < h; ++i)
                    if (multiset[i] == multiset[i + 1] && idx[i] > idx[i + 1]) ordered = false;
                if (ordered) {
                    if (!budget.step()) {
                        level_complete = false;
                        return std::nullopt;
                    }
                    std::vector<const Form*> vs(h);
                    for (std::size_t i = 0; i < h; ++i) vs[i] = &(*cand[i])[idx[i]];
                    if (auto pairs = solve_cofactors(vs)) return pairs;
                }
                std::size_t i = h;
                bool carried = false;
                while (i-- > 0) {
                    if (idx[i] + 1 < cand[i]->size()) {
                        ++idx[i];
                        for (std::size_t j = i + 1; j < h; ++j) idx[j] = 0;
                        carried = true;
                        break;
                    }
                }
                if (!carried) break;
            }
        } while (next_multiset());
        return std::nullopt;
    }
};

std::optional<BirchRankEstimate> birch_estimate_single(const Form& f, std::uint64_t sbound);

unsigned birch_lower_bound(const Form& f, std::uint64_t sbound) {
    // f = sum_{i<=h} u_i v_i puts {u_i = v_i = 0} inside the singular locus,
    // so codim V* <= 2h and h >= ceil(B/2). Derived fact, not a paper claim.
    auto est = birch_estimate_single(f, sbound);
    unsigned lower = f.is_zero() ? 0 : 1;
    if (est) lower = std::max(lower, (est->value + 1) / 2);
    return lower;
}

}  // namespace

SchmidtRankInterval schmidt_rank(const Form& f, unsigned height_bound, std::uint64_t budget) {
    BudgetCounter counter{budget};
    return schmidt_rank(f, height_bound, counter);
}

SchmidtRankInterval schmidt_rank(const Form& f, unsigned height_bound, BudgetCounter& budget) {
    if (f.is_zero()) return {0, 0, std::vector<FactorPair>{}, true};
    if (f.degree() < 2) throw Error("schmidt_rank requires degree >= 2 (use linear_rank)");

    SchmidtSearcher searcher(f, height_bound, budget);
    auto split = greedy_split(f);
    const unsigned upper0 = static_cast<unsigned>(split.size());

    bool all_levels_complete = true;
    for (unsigned h = 1; h < upper0; ++h) {
        bool level_complete = true;
        auto found = searcher.search_level(h, level_complete);
        if (found) {
            SchmidtRankInterval out;
            out.upper = static_cast<unsigned>(found->size());
            out.witness = std::move(found);
            out.exhaustive = all_levels_complete;
            out.lower = std::min(birch_lower_bound(f, 2000000), out.upper);
            if (out.lower == 0) out.lower = std::min(1u, out.upper);
            return out;
        }
        if (!level_complete) {
            all_levels_complete = false;
            break;
        }
    }
    SchmidtRankInterval out;
    out.upper = upper0;
    out.witness = std::move(split);
    out.exhaustive = all_levels_complete && !budget.exhausted;
    out.lower = std::max(1u, std::min(birch_lower_bound(f, 2000000), out.upper));
    return out;
}

SystemRankResult schmidt_rank_system(std::span<const Form> block, unsigned coeff_box,
                                     unsigned height_bound, std::uint64_t budget) {
    BudgetCounter counter{budget};
    return schmidt_rank_system(block, coeff_box, height_bound, counter);
}

SystemRankResult schmidt_rank_system(std::span<const Form> block, unsigned coeff_box,
                                     unsigned height_bound, BudgetCounter& budget) {
    if (block.empty()) throw Error("empty block");
    const std::uint32_t deg = block[0].degree();
    if (deg < 2) throw Error("schmidt_rank_system requires block degree >= 2");
    for (const auto& f : block)
        if (f.degree() != deg) throw Error("block forms must share one degree");

    SystemRankResult best;
    bool have = false;
    bool all_exhaustive = true;
    bool box_complete = true;
    unsigned min_lower = 0;

    VectorBox combos(block.size(), coeff_box);
    while (combos.next()) {
        if (budget.exhausted) {
            box_complete = false;
            break;
        }
        std::vector<Rat> c(block.size());
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = Rat(combos.c[i]);
        auto combo = linear_combination(block, c);
        SchmidtRankInterval interval;
        if (combo.is_zero) {
            interval = {0, 0, std::vector<FactorPair>{}, true};
        } else {
            interval = schmidt_rank(combo.form, height_bound, budget);
        }
        if (!have || interval.upper < best.interval.upper) {
            best.interval = interval;
            best.best_combo = c;
        }
        min_lower = have ? std::min(min_lower, interval.lower) : interval.lower;
        have = true;
        if (!interval.exhaustive) all_exhaustive = false;
        if (best.interval.upper == 0) break;  // cannot improve on a dependent block
    }
    if (!have) throw Error("no combination searched (empty box)");
    best.interval.lower = std::min(min_lower, best.interval.upper);
    best.interval.exhaustive = all_exhaustive && box_complete && !budget.exhausted;
    return best;
}

std::vector<std::uint64_t> default_birch_primes(std::uint32_t degree) {
    std::vector<std::uint64_t> out;
    std::uint64_t p = std::max<std::uint64_t>(3, degree) + 1;
    while (out.size() < 3) {
        if (is_prime_u64(p)) out.push_back(p);
        ++p;
    }
    return out;
}

namespace {

FormSystem wrap_block(std::span<const Form> block) {
    FormSystem sys = FormSystem::with_default_names(block[0].nvars());
    for (const auto& f : block) sys.add_form(f);
    return sys;
}

struct DimVote {
    int dim = -1;
    bool disagree = false;
};

DimVote vote_dimension(const std::map<std::uint64_t, std::uint64_t>& counts) {
    std::map<int, int> freq;
    int lo = 1 << 20, hi = -2;
    for (const auto& [p, n] : counts) {
        int dim = n == 0 ? -1
                         : static_cast<int>(std::llround(std::log(static_cast<double>(n)) /
                                                         std::log(static_cast<double>(p))));
        freq[dim]++;
        lo = std::min(lo, dim);
        hi = std::max(hi, dim);
    }
    DimVote v;
    int best = -1;
    for (const auto& [dim, n] : freq) {
        if (n > best) {
            best = n;
            v.dim = dim;
        }
    }
    int winners = 0;
    for (const auto& [dim, n] : freq)
        if (n == best) ++winners;
    v.disagree = winners > 1 || hi - lo > 1;
    return v;
}

std::optional<BirchRankEstimate> birch_estimate_single(const Form& f, std::uint64_t sbound) {
    if (f.is_zero()) return std::nullopt;
    if (f.degree() == 1) {
        BirchRankEstimate est;
        est.value = linear_rank(f);
        est.confidence = RankConfidence::exact_symbolic;
        return est;
    }
    if (is_diagonal(f)) {
        BirchRankEstimate est;
        est.value = static_cast<unsigned>(f.term_count());
        est.confidence = RankConfidence::exact_symbolic;
        return est;
    }
    auto primes = default_birch_primes(f.degree());
    for (auto p : primes) {
        double size = std::pow(static_cast<double>(p), static_cast<double>(f.nvars()));
        if (size > static_cast<double>(sbound)) return std::nullopt;
    }
    std::vector<Form> block{f};
    try {
        return birch_rank(block, primes, sbound);
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace

BirchRankEstimate birch_rank(std::span<const Form> block, std::span<const std::uint64_t> primes,
                             std::uint64_t sbound) {
    if (block.empty()) throw Error("empty block");
    const std::uint32_t deg = block[0].degree();
    const std::size_t s = block[0].nvars();
    for (const auto& f : block)
        if (f.degree() != deg || f.nvars() != s)
            throw Error("block forms must share degree and variable count");

    BirchRankEstimate est;

    if (deg == 1) {
        // exact: min over non-trivial combinations of the non-zero-coefficient count
        qla::Mat a(block.size(), qla::Vec(s, Rat(0)));
        for (std::size_t i = 0; i < block.size(); ++i)
            for (const auto& [e, c] : block[i].terms())
                for (std::size_t j = 0; j < s; ++j)
                    if (e[j]) a[i][j] = Rat(c);
        auto combo = qla::min_support_row_combo(a, s);
        est.value = combo ? static_cast<unsigned>(combo->support.size()) : 0;
        est.confidence = RankConfidence::exact_symbolic;
        return est;
    }

    if (block.size() == 1 && is_diagonal(block[0])) {
        est.value = static_cast<unsigned>(block[0].term_count());
        est.confidence = RankConfidence::exact_symbolic;
        return est;
    }

    std::vector<std::uint64_t> usable;
    for (auto p : primes)
        if (p > deg && is_prime_u64(p)) usable.push_back(p);
    if (usable.empty()) throw Error("no usable primes (need p > block degree)");

    FormSystem sys = wrap_block(block);
    for (auto p : usable) {
        double size = std::pow(static_cast<double>(p), static_cast<double>(s));
        if (size > static_cast<double>(sbound))
            throw CapExceeded("enumeration cap exceeded at p=" + std::to_string(p));
        ModpSystem mp(sys, p);
        std::vector<std::uint64_t> x(s, 0);
        std::uint64_t count = 0;
        do {
            if (mp.jacobian_rank(x) < block.size()) ++count;
        } while (next_point(x, p, false));
        est.per_prime_counts[p] = count;
    }
    auto v = vote_dimension(est.per_prime_counts);
    est.primes_disagree = v.disagree;
    est.value = static_cast<unsigned>(static_cast<int>(s) - v.dim);
    est.confidence = RankConfidence::point_count_estimate;
    return est;
}

std::vector<BlockRankData> compute_block_rank_data(const FormSystem& sys,
                                                   const RankLabOptions& opt) {
    std::vector<BlockRankData> out;
    for (const auto& [deg, block] : sys.blocks()) {
        BlockRankData data;
        data.degree = deg;
        data.block_size = block.size();
        if (deg == 1) {
            std::vector<std::uint64_t> nop;
            data.birch = birch_rank(block, nop, opt.sbound);
            data.schmidt =
                SchmidtRankInterval{data.birch.value, data.birch.value, std::nullopt, true};
        } else {
            auto primes = opt.primes.empty() ? default_birch_primes(deg) : opt.primes;
            data.birch = birch_rank(block, primes, opt.sbound);
            data.schmidt =
                schmidt_rank_system(block, opt.coeff_box, opt.height_bound, opt.budget).interval;
        }
        out.push_back(std::move(data));
    }
    return out;
}

StrengthBirchCheck verify_strength_birch(const FormSystem& sys,
                                         std::span<const BlockRankData> data) {
    if (data.empty() || data.size() != sys.blocks().size())
        throw Error("missing rank data for verify_strength_birch");
    StrengthBirchCheck check;
    bool first = true;
    unsigned b_min = 0;
    Int h_min = 0;
    for (const auto& d : data) {
        Int h = d.schmidt.upper;
        if (first || h < h_min) h_min = h;
        if (first || d.birch.value < b_min) b_min = d.birch.value;
        first = false;
    }
    const std::uint32_t dmax = sys.max_degree();
    const Int r = sys.form_count();
    check.lhs = h_min;
    check.rhs = int_pow(4, dmax) * dmax * dmax * r * (Int(b_min) + r - 1);
    check.margin = check.rhs - check.lhs;
    check.ok = check.lhs <= check.rhs;
    return check;
}

LampertCheck verify_lampert_codim(const FormSystem& sys, std::span<const std::uint64_t> primes,
                                  std::uint64_t sbound, const RankLabOptions& opt) {
    LampertCheck check;
    const std::size_t s = sys.nvars();
    const std::size_t R = sys.form_count();
    const std::uint32_t d = sys.max_degree();

    bool first = true;
    for (const auto& [deg, block] : sys.blocks()) {
        auto pr = deg == 1 ? std::vector<std::uint64_t>{}
                           : (primes.empty() ? default_birch_primes(deg)
                                             : std::vector<std::uint64_t>(primes.begin(),
                                                                          primes.end()));
        auto est = birch_rank(block, pr, sbound);
        if (first || est.value < check.block_rank_min) check.block_rank_min = est.value;
        first = false;
    }
    check.bound = static_cast<long long>(check.block_rank_min) - static_cast<long long>(R) -
                  static_cast<long long>(d) + 2;

    std::vector<std::uint64_t> usable;
    for (auto p : primes.empty() ? default_birch_primes(d)
                                 : std::vector<std::uint64_t>(primes.begin(), primes.end()))
        if (p > d && is_prime_u64(p)) usable.push_back(p);
    if (usable.empty()) throw Error("no usable primes for the joint singular locus");

    for (auto p : usable) {
        double size = std::pow(static_cast<double>(p), static_cast<double>(s));
        if (size > static_cast<double>(sbound))
            throw CapExceeded("enumeration cap exceeded at p=" + std::to_string(p));
        ModpSystem mp(sys, p);
        std::vector<std::uint64_t> x(s, 0);
        std::uint64_t count = 0;
        do {
            if (mp.jacobian_rank(x) < R) ++count;
        } while (next_point(x, p, false));
        check.per_prime_counts[p] = count;
    }
    auto v = vote_dimension(check.per_prime_counts);
    check.primes_disagree = v.disagree;
    check.locus_empty = v.dim < 0;
    check.measured_codim = check.locus_empty ? s + 1 : s - static_cast<std::size_t>(v.dim);
    check.ok = static_cast<long long>(check.measured_codim) >= check.bound;
    return check;
}

std::string rank_report_csv(std::span<const BlockRankData> data) {
    std::ostringstream os;
    os << "degree,r_l,h_lower,h_upper,exhaustive,B_value,confidence\n";
    for (const auto& d : data) {
        os << d.degree << "," << d.block_size << "," << d.schmidt.lower << "," << d.schmidt.upper
           << "," << (d.schmidt.exhaustive ? "true" : "false") << "," << d.birch.value << ","
           << to_string(d.birch.confidence) << "\n";
    }
    return os.str();
}

}  // namespace oddforms
