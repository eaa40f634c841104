#include "oddforms/counting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oddforms {

PrimeTools PrimeTools::build(std::uint64_t n) {
    if (n < 2) throw Error("sieve limit must be at least 2");
    PrimeTools t;
    t.limit = n;
    t.prime_flags.assign(n + 1, true);
    t.prime_flags[0] = t.prime_flags[1] = false;
    for (std::uint64_t i = 2; i * i <= n; ++i)
        if (t.prime_flags[i])
            for (std::uint64_t j = i * i; j <= n; j += i) t.prime_flags[j] = false;
    for (std::uint64_t i = 2; i <= n; ++i)
        if (t.prime_flags[i]) t.primes.push_back(static_cast<std::uint32_t>(i));
    t.lambda.assign(n + 1, 0.0);
    for (auto p : t.primes) {
        double lp = std::log(static_cast<double>(p));
        for (std::uint64_t q = p; q <= n; q *= p) {
            t.lambda[q] = lp;
            if (q > n / p) break;
        }
    }
    return t;
}

void CountQuery::validate(std::size_t nvars) const {
    if (N < 2) throw Error("count query requires N >= 2");
    if (Y < 1) throw Error("count query requires Y >= 1");
    for (auto j : exceptional)
        if (j >= nvars) throw Error("exceptional index out of range");
}

namespace {

// Per-coordinate value domain with a constant-time membership test for the
// solved coordinate.
struct CoordDomain {
    enum class Kind { admissible, free_range, scaled_primes, fixed_zero } kind;
    std::vector<long long> values;
    long long n = 0;
    long long y = 1;                            // scaled_primes
    const std::vector<bool>* prime_flags = nullptr;
    std::vector<bool> bitmap;                   // admissible, offset +n

    bool contains(long long v) const {
        switch (kind) {
            case Kind::admissible:
                return v >= -n && v <= n && bitmap[static_cast<std::size_t>(v + n)];
            case Kind::free_range:
                return v >= -n && v <= n;
            case Kind::scaled_primes: {
                if (v == 0 || v % y != 0) return false;
                long long q = v / y;
                return q >= 2 && q <= n && (*prime_flags)[static_cast<std::size_t>(q)];
            }
            case Kind::fixed_zero:
                return v == 0;
        }
        return false;
    }
};

CoordDomain admissible_domain(const PrimeTools& tools, std::uint64_t n, std::uint64_t y_max,
                              bool allow_zero) {
    CoordDomain d;
    d.kind = CoordDomain::Kind::admissible;
    d.n = static_cast<long long>(n);
    d.bitmap.assign(2 * n + 1, false);
    for (auto p : tools.primes) {
        if (p > n) break;
        for (std::uint64_t y = 1; y <= y_max && y * p <= n; ++y) {
            d.bitmap[n + y * p] = true;
            d.bitmap[n - y * p] = true;
        }
    }
    if (allow_zero) d.bitmap[n] = true;
    for (long long v = -d.n; v <= d.n; ++v)
        if (d.bitmap[static_cast<std::size_t>(v + d.n)]) d.values.push_back(v);
    return d;
}

CoordDomain free_domain(std::uint64_t n) {
    CoordDomain d;
    d.kind = CoordDomain::Kind::free_range;
    d.n = static_cast<long long>(n);
    d.values.reserve(2 * n + 1);
    for (long long v = -d.n; v <= d.n; ++v) d.values.push_back(v);
    return d;
}

CoordDomain scaled_primes_domain(const PrimeTools& tools, std::uint64_t n, const Int& y) {
    CoordDomain d;
    d.kind = CoordDomain::Kind::scaled_primes;
    d.n = static_cast<long long>(n);
    d.y = y.convert_to<long long>();
    d.prime_flags = &tools.prime_flags;
    for (auto p : tools.primes) {
        long long v = d.y * static_cast<long long>(p);
        if (std::llabs(v) > d.n) break;
        d.values.push_back(v);
    }
    std::sort(d.values.begin(), d.values.end());
    return d;
}

CoordDomain zero_domain() {
    CoordDomain d;
    d.kind = CoordDomain::Kind::fixed_zero;
    d.values = {0};
    return d;
}

struct CompiledForm {
    bool fits64 = false;
    struct Term64 {
        long long coeff;
        std::vector<std::pair<std::uint16_t, std::uint16_t>> factors;
    };
    std::vector<Term64> terms64;
    const Form* exact = nullptr;

    static CompiledForm compile(const Form& f, std::uint64_t n) {
        CompiledForm cf;
        cf.exact = &f;
        long double bound = 0;
        for (const auto& [e, c] : f.terms())
            bound += std::fabs(c.convert_to<long double>()) *
                     std::pow(static_cast<long double>(n), static_cast<long double>(f.degree()));
        cf.fits64 = bound < 4.0e18 / 2;
        if (cf.fits64) {
            for (const auto& [e, c] : f.terms()) {
                Term64 t{c.convert_to<long long>(), {}};
                for (std::size_t j = 0; j < e.size(); ++j)
                    if (e[j])
                        t.factors.push_back({static_cast<std::uint16_t>(j),
                                             static_cast<std::uint16_t>(e[j])});
                cf.terms64.push_back(std::move(t));
            }
        }
        return cf;
    }

    long long eval64(std::span<const long long> x) const {
        long long acc = 0;
        for (const auto& t : terms64) {
            long long v = t.coeff;
            for (auto [var, exp] : t.factors)
                for (std::uint16_t k = 0; k < exp; ++k) v *= x[var];
            acc += v;
        }
        return acc;
    }

    bool vanishes(std::span<const long long> x) const {
        if (fits64) return eval64(x) == 0;
        std::vector<Int> xi(x.begin(), x.end());
        return exact->eval(xi) == 0;
    }
};

struct SolveSplit {
    std::size_t var = 0;
    Form h;  // f = x_var * h + g
    Form g;
};

// A form is solvable for x_t when every monomial has exponent <= 1 in x_t.
std::optional<SolveSplit> split_linear_in(const Form& f, std::size_t var) {
    std::vector<Monomial> hterms, gterms;
    for (const auto& [e, c] : f.terms()) {
        if (e[var] > 1) return std::nullopt;
        if (e[var] == 1) {
            Exponents he = e;
            he[var] = 0;
            hterms.push_back({c, he});
        } else {
            gterms.push_back({c, e});
        }
    }
    if (hterms.empty()) return std::nullopt;
    SolveSplit s;
    s.var = var;
    s.h = Form::from_monomials(f.degree() - 1, f.nvars(), hterms);
    s.g = gterms.empty() ? Form(f.degree(), f.nvars())
                         : Form::from_monomials(f.degree(), f.nvars(), gterms);
    return s;
}

struct EnumerationPlan {
    bool solve = false;
    std::size_t solved_var = 0;
    std::size_t solved_form = 0;  // index into forms_in_order
    SolveSplit split;
};

EnumerationPlan choose_plan(const FormSystem& sys, const std::vector<CoordDomain>& domains) {
    EnumerationPlan plan;
    auto forms = sys.forms_in_order();
    // prefer low-degree forms (iterate blocks ascending degree)
    std::vector<std::size_t> order(forms.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = order.size() - 1 - i;
    std::size_t best_domain = 0;
    for (auto fi : order) {
        for (std::size_t var = 0; var < sys.nvars(); ++var) {
            if (domains[var].kind == CoordDomain::Kind::fixed_zero) continue;
            auto split = split_linear_in(*forms[fi], var);
            if (!split) continue;
            if (!plan.solve || domains[var].values.size() > best_domain ||
                (domains[var].values.size() == best_domain && var > plan.solved_var)) {
                plan.solve = true;
                plan.solved_var = var;
                plan.solved_form = fi;
                plan.split = std::move(*split);
                best_domain = domains[var].values.size();
            }
        }
        if (plan.solve) break;  // stay within the lowest-degree solvable form set
    }
    return plan;
}

Int domain_product(const std::vector<CoordDomain>& domains, std::optional<std::size_t> skip) {
    Int prod = 1;
    for (std::size_t i = 0; i < domains.size(); ++i) {
        if (skip && i == *skip) continue;
        prod *= static_cast<std::uint64_t>(domains[i].values.size());
    }
    return prod;
}

CountOutcome count_core(const FormSystem& sys, const std::vector<CoordDomain>& domains,
                        const CountOptions& opt) {
    const std::size_t s = sys.nvars();
    CountOutcome out;
    auto forms = sys.forms_in_order();
    std::uint64_t n_max = 0;
    for (const auto& d : domains)
        n_max = std::max<std::uint64_t>(n_max, static_cast<std::uint64_t>(d.n));
    std::vector<CompiledForm> compiled;
    for (const Form* f : forms) compiled.push_back(CompiledForm::compile(*f, n_max));

    auto plan = choose_plan(sys, domains);

    auto push_sample = [&](std::span<const long long> x) {
        if (out.samples.size() < opt.sample_limit)
            out.samples.emplace_back(x.begin(), x.end());
    };

    if (!plan.solve) {
        if (domain_product(domains, std::nullopt) > opt.cap)
            throw CapExceeded("full enumeration exceeds the counting cap");
        std::vector<std::size_t> idx(s, 0);
        std::vector<long long> x(s);
        for (std::size_t i = 0; i < s; ++i) {
            if (domains[i].values.empty()) return out;
            x[i] = domains[i].values[0];
        }
        while (true) {
            bool ok = true;
            for (const auto& cf : compiled)
                if (!cf.vanishes(x)) {
                    ok = false;
                    break;
                }
            if (ok) {
                out.count += 1;
                push_sample(x);
            }
            std::size_t i = s;
            bool advanced = false;
            while (i-- > 0) {
                if (++idx[i] < domains[i].values.size()) {
                    x[i] = domains[i].values[idx[i]];
                    advanced = true;
                    break;
                }
                idx[i] = 0;
                x[i] = domains[i].values[0];
            }
            if (!advanced) break;
        }
        return out;
    }

    out.solved_coordinate = true;
    out.solved_var = plan.solved_var;
    const std::size_t t = plan.solved_var;
    if (domain_product(domains, t) > opt.cap)
        throw CapExceeded("prefix enumeration exceeds the counting cap");

    CompiledForm ch = CompiledForm::compile(plan.split.h, n_max);
    CompiledForm cg = CompiledForm::compile(plan.split.g, n_max);
    const bool exact_needed = !ch.fits64 || !cg.fits64;

    std::vector<std::size_t> free_vars;
    for (std::size_t i = 0; i < s; ++i)
        if (i != t) free_vars.push_back(i);
    for (auto i : free_vars)
        if (domains[i].values.empty()) return out;

    std::vector<std::size_t> idx(free_vars.size(), 0);
    std::vector<long long> x(s, 0);
    for (std::size_t k = 0; k < free_vars.size(); ++k)
        x[free_vars[k]] = domains[free_vars[k]].values[0];

    auto check_rest = [&](std::span<const long long> point) {
        for (std::size_t i = 0; i < compiled.size(); ++i) {
            if (i == plan.solved_form) continue;
            if (!compiled[i].vanishes(point)) return false;
        }
        return true;
    };

    const bool only_form = compiled.size() == 1;
    while (true) {
        long long h64 = 0, g64 = 0;
        Int hint, gint;
        bool use64 = !exact_needed;
        if (use64) {
            h64 = ch.eval64(x);
            g64 = cg.eval64(x);
        } else {
            std::vector<Int> xi(x.begin(), x.end());
            hint = plan.split.h.is_zero() ? Int(0) : plan.split.h.eval(xi);
            gint = plan.split.g.is_zero() ? Int(0) : plan.split.g.eval(xi);
        }
        bool h_zero = use64 ? h64 == 0 : hint == 0;
        if (!h_zero) {
            bool divides;
            long long v = 0;
            if (use64) {
                divides = (-g64) % h64 == 0;
                if (divides) v = (-g64) / h64;
            } else {
                Int num = -gint;
                divides = num % hint == 0;
                if (divides) {
                    Int q = num / hint;
                    if (q > std::numeric_limits<long long>::max() ||
                        q < std::numeric_limits<long long>::min())
                        divides = false;
                    else
                        v = q.convert_to<long long>();
                }
            }
            if (divides && domains[t].contains(v)) {
                x[t] = v;
                if (only_form || check_rest(x)) {
                    out.count += 1;
                    push_sample(x);
                }
            }
        } else {
            bool g_zero = use64 ? g64 == 0 : gint == 0;
            if (g_zero) {
                if (only_form) {
                    out.count += static_cast<std::uint64_t>(domains[t].values.size());
                    if (out.samples.size() < opt.sample_limit)
                        for (auto v : domains[t].values) {
                            x[t] = v;
                            push_sample(x);
                            if (out.samples.size() >= opt.sample_limit) break;
                        }
                } else {
                    for (auto v : domains[t].values) {
                        x[t] = v;
                        if (check_rest(x)) {
                            out.count += 1;
                            push_sample(x);
                        }
                    }
                }
            }
        }
        std::size_t k = free_vars.size();
        bool advanced = false;
        while (k-- > 0) {
            std::size_t i = free_vars[k];
            if (++idx[k] < domains[i].values.size()) {
                x[i] = domains[i].values[idx[k]];
                advanced = true;
                break;
            }
            idx[k] = 0;
            x[i] = domains[i].values[0];
        }
        if (!advanced) break;
    }
    return out;
}

}  // namespace

CountOutcome almost_prime_count(const FormSystem& sys, const CountQuery& query,
                                const CountOptions& opt) {
    query.validate(sys.nvars());
    PrimeTools tools = PrimeTools::build(query.N);
    std::vector<bool> in_j(sys.nvars(), false);
    for (auto j : query.exceptional) in_j[j] = true;
    std::vector<CoordDomain> domains;
    CoordDomain shared = admissible_domain(tools, query.N, query.Y, query.allow_zero_y);
    for (std::size_t i = 0; i < sys.nvars(); ++i)
        domains.push_back(in_j[i] ? free_domain(query.N) : shared);
    return count_core(sys, domains, opt);
}

CountOutcome embedded_prime_count(const FormSystem& sys, std::span<const Int> multipliers,
                                  std::uint64_t n, const CountOptions& opt) {
    if (multipliers.size() != sys.nvars()) throw Error("multiplier dimension mismatch");
    if (n < 2) throw Error("embedded count requires N >= 2");
    PrimeTools tools = PrimeTools::build(n);
    std::vector<CoordDomain> domains;
    for (const auto& y : multipliers) {
        if (y == 0)
            domains.push_back(zero_domain());
        else
            domains.push_back(scaled_primes_domain(tools, n, y));
    }
    return count_core(sys, domains, opt);
}

double weighted_prime_count(const FormSystem& sys, std::uint64_t n, std::uint64_t cap) {
    if (n < 2) throw Error("weighted count requires N >= 2");
    const std::size_t s = sys.nvars();
    PrimeTools tools = PrimeTools::build(n);
    std::vector<long long> pp;  // prime powers with positive von Mangoldt weight
    for (std::uint64_t v = 2; v <= n; ++v)
        if (tools.lambda[v] > 0) pp.push_back(static_cast<long long>(v));

    auto forms = sys.forms_in_order();
    if (forms.empty()) {
        double total = 0;
        for (auto v : pp) total += tools.lambda[static_cast<std::size_t>(v)];
        return std::pow(total, static_cast<double>(s));
    }

    std::vector<CompiledForm> compiled;
    for (const Form* f : forms) compiled.push_back(CompiledForm::compile(*f, n));

    // reuse the solve-for-last-variable split against the positive box
    std::vector<CoordDomain> fake(s);
    for (auto& d : fake) {
        d.kind = CoordDomain::Kind::free_range;
        d.n = static_cast<long long>(n);
        d.values.assign(pp.begin(), pp.end());
    }
    auto plan = choose_plan(sys, fake);

    double pp_weight = 0;
    for (auto v : pp) pp_weight += tools.lambda[static_cast<std::size_t>(v)];

    double acc = 0;
    if (!plan.solve) {
        double points = std::pow(static_cast<double>(pp.size()), static_cast<double>(s));
        if (points > static_cast<double>(cap))
            throw CapExceeded("weighted enumeration exceeds the cap");
        std::vector<std::size_t> idx(s, 0);
        std::vector<long long> x(s, pp.empty() ? 0 : pp[0]);
        if (pp.empty()) return 0;
        while (true) {
            bool ok = true;
            for (const auto& cf : compiled)
                if (!cf.vanishes(x)) {
                    ok = false;
                    break;
                }
            if (ok) {
                double w = 1;
                for (auto v : x) w *= tools.lambda[static_cast<std::size_t>(v)];
                acc += w;
            }
            std::size_t i = s;
            bool advanced = false;
            while (i-- > 0) {
                if (++idx[i] < pp.size()) {
                    x[i] = pp[idx[i]];
                    advanced = true;
                    break;
                }
                idx[i] = 0;
                x[i] = pp[0];
            }
            if (!advanced) break;
        }
        return acc;
    }

    const std::size_t t = plan.solved_var;
    double points = std::pow(static_cast<double>(pp.size()), static_cast<double>(s - 1));
    if (points > static_cast<double>(cap))
        throw CapExceeded("weighted enumeration exceeds the cap");
    if (pp.empty()) return 0;

    CompiledForm ch = CompiledForm::compile(plan.split.h, n);
    CompiledForm cg = CompiledForm::compile(plan.split.g, n);

    std::vector<std::size_t> free_vars;
    for (std::size_t i = 0; i < s; ++i)
        if (i != t) free_vars.push_back(i);
    std::vector<std::size_t> idx(free_vars.size(), 0);
    std::vector<long long> x(s, pp[0]);

    auto check_rest = [&](std::span<const long long> point) {
        for (std::size_t i = 0; i < compiled.size(); ++i) {
            if (i == plan.solved_form) continue;
            if (!compiled[i].vanishes(point)) return false;
        }
        return true;
    };

    while (true) {
        double wprefix = 1;
        for (auto i : free_vars) wprefix *= tools.lambda[static_cast<std::size_t>(x[i])];
        long long h64, g64;
        if (ch.fits64 && cg.fits64) {
            h64 = ch.eval64(x);
            g64 = cg.eval64(x);
        } else {
            std::vector<Int> xi(x.begin(), x.end());
            Int hv = plan.split.h.is_zero() ? Int(0) : plan.split.h.eval(xi);
            Int gv = plan.split.g.is_zero() ? Int(0) : plan.split.g.eval(xi);
            h64 = hv.convert_to<long long>();
            g64 = gv.convert_to<long long>();
        }
        if (h64 != 0) {
            if ((-g64) % h64 == 0) {
                long long v = (-g64) / h64;
                if (v >= 2 && v <= static_cast<long long>(n) &&
                    tools.lambda[static_cast<std::size_t>(v)] > 0) {
                    x[t] = v;
                    if (check_rest(x)) acc += wprefix * tools.lambda[static_cast<std::size_t>(v)];
                }
            }
        } else if (g64 == 0) {
            if (compiled.size() == 1) {
                acc += wprefix * pp_weight;
            } else {
                for (auto v : pp) {
                    x[t] = v;
                    if (check_rest(x)) acc += wprefix * tools.lambda[static_cast<std::size_t>(v)];
                }
            }
        }
        std::size_t k = free_vars.size();
        bool advanced = false;
        while (k-- > 0) {
            std::size_t i = free_vars[k];
            if (++idx[k] < pp.size()) {
                x[i] = pp[idx[k]];
                advanced = true;
                break;
            }
            idx[k] = 0;
            x[i] = pp[0];
        }
        if (!advanced) break;
    }
    return acc;
}

CountRecord make_count_record(std::uint64_t n, std::uint64_t y, Int count, std::size_t s,
                              std::uint64_t total_degree, double elapsed_seconds) {
    CountRecord r;
    r.N = n;
    r.Y = y;
    r.count = count;
    double logn = std::log(static_cast<double>(n));
    double exponent = static_cast<double>(s) - static_cast<double>(total_degree);
    r.predicted = std::pow(static_cast<double>(n), exponent) /
                  std::pow(logn, static_cast<double>(s));
    r.ratio = count.convert_to<double>() / r.predicted;
    r.elapsed_seconds = elapsed_seconds;
    return r;
}

GrowthFit growth_fit(std::span<const CountRecord> records, std::size_t s,
                     std::uint64_t total_degree) {
    GrowthFit fit;
    std::vector<double> xs, ys, ys_law, ratios;
    for (const auto& r : records) {
        if (r.count == 0) {
            fit.excluded_n.push_back(r.N);
            continue;
        }
        double logn = std::log(static_cast<double>(r.N));
        double logc = std::log(r.count.convert_to<double>());
        xs.push_back(logn);
        ys.push_back(logc);
        ys_law.push_back(logc + static_cast<double>(s) * std::log(logn));
        double predicted = std::pow(static_cast<double>(r.N),
                                    static_cast<double>(s) - static_cast<double>(total_degree)) /
                           std::pow(logn, static_cast<double>(s));
        ratios.push_back(r.count.convert_to<double>() / predicted);
    }
    if (xs.size() < 3) throw Error("growth fit needs at least 3 usable records");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i] == xs[i - 1]) throw Error("growth fit needs distinct N values");

    auto ls_slope = [&](const std::vector<double>& y) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += y[i];
        }
        mx /= xs.size();
        my /= xs.size();
        double num = 0, den = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            num += (xs[i] - mx) * (y[i] - my);
            den += (xs[i] - mx) * (xs[i] - mx);
        }
        return std::pair<double, double>{num / den, my - num / den * mx};
    };
    auto [slope, intercept] = ls_slope(ys);
    fit.slope = slope;
    fit.exponent = ls_slope(ys_law).first;
    double sum = 0;
    for (auto r : ratios) sum += r;
    fit.constant = sum / static_cast<double>(ratios.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        fit.residuals.push_back(ys[i] - (intercept + slope * xs[i]));
    return fit;
}

}  // namespace oddforms
