#include "oddforms/localsolve.hpp"

#include "oddforms/modeval.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace oddforms {

namespace {

bool pow_within(std::uint64_t p, std::size_t s, std::uint64_t cap) {
    std::uint64_t acc = 1;
    for (std::size_t i = 0; i < s; ++i) {
        if (acc > cap / p) return false;
        acc *= p;
    }
    return acc <= cap;
}

Int mod_reduce(const Int& v, const Int& m) {
    Int r = v % m;
    if (r < 0) r += m;
    return r;
}

Int mod_inverse_int(const Int& a, const Int& m) {
    Int old_r = mod_reduce(a, m), r = m;
    Int old_s = 1, s = 0;
    while (r != 0) {
        Int q = old_r / r;
        Int tmp = old_r - q * r;
        old_r = r;
        r = tmp;
        tmp = old_s - q * s;
        old_s = s;
        s = tmp;
    }
    if (old_r != 1) throw Error("element not invertible");
    return mod_reduce(old_s, m);
}

// Bareiss fraction-free determinant.
Int det_int(std::vector<std::vector<Int>> m) {
    const std::size_t n = m.size();
    if (n == 0) return 1;
    Int prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k] == 0) {
            std::size_t sel = k + 1;
            while (sel < n && m[sel][k] == 0) ++sel;
            if (sel == n) return 0;
            std::swap(m[sel], m[k]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j)
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
        prev = m[k][k];
    }
    return sign * m[n - 1][n - 1];
}

double eval_double(const Form& f, std::span<const double> x) {
    double acc = 0;
    for (const auto& [e, c] : f.terms()) {
        double t = c.convert_to<double>();
        for (std::size_t j = 0; j < x.size(); ++j)
            for (std::uint32_t k = 0; k < e[j]; ++k) t *= x[j];
        acc += t;
    }
    return acc;
}

}  // namespace

unsigned padic_valuation(const Int& v, std::uint64_t p, unsigned cap) {
    if (v == 0) return cap;
    Int x = v;
    unsigned e = 0;
    while (e < cap && x % p == 0) {
        x /= p;
        ++e;
    }
    return e;
}

FpPointCount count_points(const FormSystem& sys, std::uint64_t p, std::uint64_t cap) {
    const std::size_t s = sys.nvars();
    const std::size_t R = sys.form_count();
    if (!pow_within(p, s, cap))
        throw CapExceeded("p^s exceeds the enumeration cap at p=" + std::to_string(p));
    FpPointCount out;
    out.p = p;
    Int ps = int_pow(p, s);
    if (s >= R + 1) {
        out.expected = Rat(int_pow(p, s - R));
        out.bound = Rat(int_pow(p, s - R - 1));
    } else if (s >= R) {
        out.expected = Rat(int_pow(p, s - R));
        out.bound = Rat(1, int_pow(p, R + 1 - s));
    } else {
        out.expected = Rat(1, int_pow(p, R - s));
        out.bound = Rat(1, int_pow(p, R + 1 - s));
    }
    ModpSystem mp(sys, p);
    std::vector<std::uint64_t> x(s, 0);
    do {
        if (!mp.vanishes_at(x)) continue;
        ++out.total;
        bool units = std::all_of(x.begin(), x.end(), [](std::uint64_t v) { return v != 0; });
        if (!units) continue;
        ++out.unit_total;
        if (mp.jacobian_rank(x) == R) ++out.nonsingular_unit_total;
    } while (next_point(x, p, false));
    Rat diff = Rat(Int(out.total)) - out.expected;
    if (diff < 0) diff = -diff;
    out.bound_satisfied = diff <= out.bound;
    return out;
}

std::complex<double> exponential_sum(const FormSystem& sys, std::span<const std::uint64_t> a,
                                     std::uint64_t p, std::uint64_t cap) {
    const std::size_t s = sys.nvars();
    const std::size_t R = sys.form_count();
    if (a.size() != R) throw Error("coefficient vector length must equal the form count");
    if (!pow_within(p, s, cap))
        throw CapExceeded("p^s exceeds the enumeration cap at p=" + std::to_string(p));
    std::vector<std::complex<double>> roots(p);
    for (std::uint64_t t = 0; t < p; ++t) {
        double ang = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(p);
        roots[t] = {std::cos(ang), std::sin(ang)};
    }
    ModpSystem mp(sys, p);
    std::vector<std::uint64_t> x(s, 0), vals(R);
    std::complex<double> acc = 0;
    do {
        mp.eval(x, vals);
        std::uint64_t phase = 0;
        for (std::size_t i = 0; i < R; ++i) phase = (phase + a[i] % p * vals[i]) % p;
        acc += roots[phase];
    } while (next_point(x, p, false));
    return acc;
}

std::vector<std::vector<std::uint64_t>> find_nonsingular_unit_solutions(const FormSystem& sys,
                                                                        std::uint64_t p,
                                                                        std::uint64_t cap,
                                                                        std::size_t limit) {
    const std::size_t s = sys.nvars();
    const std::size_t R = sys.form_count();
    if (!pow_within(p, s, cap))
        throw CapExceeded("p^s exceeds the enumeration cap at p=" + std::to_string(p));
    std::vector<std::vector<std::uint64_t>> out;
    if (p == 1 || limit == 0) return out;
    ModpSystem mp(sys, p);
    std::vector<std::uint64_t> x(s, 1);
    do {
        if (!mp.vanishes_at(x)) continue;
        if (mp.jacobian_rank(x) != R) continue;
        out.push_back(x);
        if (out.size() >= limit) break;
    } while (next_point(x, p, true));
    return out;
}

PAdicPoint make_padic_point(std::uint64_t p, unsigned precision, std::vector<Int> coords) {
    PAdicPoint pt;
    pt.p = p;
    pt.precision = precision;
    Int pk = int_pow(p, precision);
    pt.coords.reserve(coords.size());
    for (auto& c : coords) pt.coords.push_back(mod_reduce(c, pk));
    for (const auto& c : pt.coords) {
        unsigned e = padic_valuation(c, p, precision);
        pt.valuations.push_back(e);
        if (e >= precision) {
            pt.unit_parts.push_back(0);
        } else {
            Int u = c / int_pow(p, e);
            pt.unit_parts.push_back(mod_reduce(u, int_pow(p, precision - e)));
        }
    }
    return pt;
}

PAdicPoint hensel_lift(const FormSystem& sys, std::span<const std::uint64_t> seed,
                       std::uint64_t p, unsigned precision, std::span<const std::size_t> frozen) {
    const std::size_t s = sys.nvars();
    const std::size_t R = sys.form_count();
    if (seed.size() != s) throw Error("seed dimension mismatch");
    if (precision == 0) throw Error("precision must be positive");

    std::vector<bool> is_frozen(s, false);
    for (auto j : frozen) {
        if (j >= s) throw Error("frozen index out of range");
        is_frozen[j] = true;
    }

    ModpSystem mp(sys, p);
    std::vector<std::uint64_t> seed_red(seed.begin(), seed.end());
    for (auto& v : seed_red) v %= p;
    if (!mp.vanishes_at(seed_red)) throw SingularSeed("seed is not a zero of the system mod p");

    // pivot columns: leftmost non-frozen columns carrying a unit minor mod p
    std::vector<Int> seed_int(seed_red.begin(), seed_red.end());
    auto jac0 = jacobian(sys, seed_int, Int(p));
    std::vector<std::size_t> pivot_cols;
    {
        std::vector<std::vector<std::uint64_t>> m(R, std::vector<std::uint64_t>(0));
        std::vector<std::size_t> col_of;
        for (std::size_t j = 0; j < s; ++j) {
            if (is_frozen[j]) continue;
            for (std::size_t i = 0; i < R; ++i)
                m[i].push_back(jac0[i][j].convert_to<std::uint64_t>());
            col_of.push_back(j);
        }
        // Gaussian elimination, recording pivot columns
        std::size_t r = 0;
        for (std::size_t c = 0; c < col_of.size() && r < R; ++c) {
            std::size_t sel = r;
            while (sel < R && m[sel][c] % p == 0) ++sel;
            if (sel == R) continue;
            std::swap(m[sel], m[r]);
            std::uint64_t inv = mod_inverse(m[r][c] % p, p);
            for (std::size_t j = c; j < col_of.size(); ++j) m[r][j] = m[r][j] % p * inv % p;
            for (std::size_t i = 0; i < R; ++i) {
                if (i == r) continue;
                std::uint64_t f = m[i][c] % p;
                if (!f) continue;
                for (std::size_t j = c; j < col_of.size(); ++j)
                    m[i][j] = (m[i][j] + (p - f) * m[r][j]) % p;
            }
            pivot_cols.push_back(col_of[c]);
            ++r;
        }
        if (pivot_cols.size() < R)
            throw SingularSeed("Jacobian rank below the form count mod p (no unit minor)");
    }

    std::vector<Int> x(seed_red.begin(), seed_red.end());
    unsigned m = 1;
    while (m < precision) {
        unsigned m2 = std::min(2 * m, precision);
        Int mod2 = int_pow(p, m2);
        std::vector<Int> resid = evaluate(sys, x, mod2);
        // solve J_C * delta = resid (mod p^m2) on the pivot columns
        std::vector<std::vector<Int>> a(R, std::vector<Int>(R));
        auto jac = jacobian(sys, x, mod2);
        for (std::size_t i = 0; i < R; ++i)
            for (std::size_t j = 0; j < R; ++j) a[i][j] = jac[i][pivot_cols[j]];
        std::vector<Int> b = resid;
        // elimination with unit pivots
        std::vector<std::size_t> rows(R);
        for (std::size_t i = 0; i < R; ++i) rows[i] = i;
        for (std::size_t c = 0; c < R; ++c) {
            std::size_t sel = c;
            while (sel < R && a[sel][c] % p == 0) ++sel;
            if (sel == R) throw Error("internal: unit minor lost during lifting");
            std::swap(a[sel], a[c]);
            std::swap(b[sel], b[c]);
            Int inv = mod_inverse_int(a[c][c], mod2);
            for (std::size_t j = c; j < R; ++j) a[c][j] = mod_reduce(a[c][j] * inv, mod2);
            b[c] = mod_reduce(b[c] * inv, mod2);
            for (std::size_t i = 0; i < R; ++i) {
                if (i == c || a[i][c] == 0) continue;
                Int f = a[i][c];
                for (std::size_t j = c; j < R; ++j)
                    a[i][j] = mod_reduce(a[i][j] - f * a[c][j], mod2);
                b[i] = mod_reduce(b[i] - f * b[c], mod2);
            }
        }
        for (std::size_t j = 0; j < R; ++j)
            x[pivot_cols[j]] = mod_reduce(x[pivot_cols[j]] - b[j], mod2);
        m = m2;
    }

    Int pk = int_pow(p, precision);
    for (auto& c : x) c = mod_reduce(c, pk);
    for (const auto& v : evaluate(sys, x, pk))
        if (v != 0) throw Error("internal: Hensel residue non-zero after iteration");
    for (std::size_t j = 0; j < s; ++j)
        if (mod_reduce(x[j], Int(p)) != seed_red[j])
            throw Error("internal: lift does not reduce to the seed");
    return make_padic_point(p, precision, std::move(x));
}

unsigned min_jacobian_minor_valuation(const FormSystem& sys, std::span<const Int> point,
                                      std::uint64_t p, unsigned precision) {
    const std::size_t s = sys.nvars();
    const std::size_t R = sys.form_count();
    if (R == 0) return 0;  // empty minor is the unit determinant
    if (R > s) return precision;
    Int pk = int_pow(p, precision);
    auto jac = jacobian(sys, point, pk);
    std::vector<std::size_t> cols(R);
    for (std::size_t i = 0; i < R; ++i) cols[i] = i;
    unsigned best = precision;
    while (true) {
        std::vector<std::vector<Int>> minor(R, std::vector<Int>(R));
        for (std::size_t i = 0; i < R; ++i)
            for (std::size_t j = 0; j < R; ++j) minor[i][j] = jac[i][cols[j]];
        Int d = mod_reduce(det_int(std::move(minor)), pk);
        best = std::min(best, padic_valuation(d, p, precision));
        if (best == 0) return 0;
        std::size_t i = R;
        bool advanced = false;
        while (i-- > 0) {
            if (cols[i] != s - R + i) {
                ++cols[i];
                for (std::size_t j = i + 1; j < R; ++j) cols[j] = cols[j - 1] + 1;
                advanced = true;
                break;
            }
        }
        if (!advanced) break;
    }
    return best;
}

namespace {

std::vector<std::vector<unsigned>> valuation_patterns(std::size_t s, unsigned delta_max) {
    std::vector<std::vector<unsigned>> out;
    std::vector<unsigned> cur(s, 0);
    while (true) {
        out.push_back(cur);
        std::size_t i = s;
        bool advanced = false;
        while (i-- > 0) {
            if (cur[i] < delta_max) {
                ++cur[i];
                for (std::size_t j = i + 1; j < s; ++j) cur[j] = 0;
                advanced = true;
                break;
            }
        }
        if (!advanced) break;
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        unsigned sa = 0, sb = 0;
        for (auto v : a) sa += v;
        for (auto v : b) sb += v;
        if (sa != sb) return sa < sb;
        return a < b;
    });
    return out;
}

FormSystem p_content_normalized(const FormSystem& sys, std::uint64_t p) {
    FormSystem out(sys.names());
    for (const Form* f : sys.forms_in_order()) {
        unsigned v = padic_valuation(f->content(), p, 64);
        out.add_form(v ? f->divided_by(int_pow(p, v)) : *f);
    }
    return out;
}

}  // namespace

PAdicSearchResult find_padic_nonzero_solution(const FormSystem& sys, std::uint64_t p,
                                              unsigned precision, const PAdicSearchOptions& opt) {
    const std::size_t s = sys.nvars();
    const std::size_t R = sys.form_count();
    PAdicSearchResult res;
    if (opt.delta_max >= precision) throw Error("delta_max must be below the precision");
    res.exhausted = true;
    std::uint64_t budget = opt.seed_budget;

    for (const auto& delta : valuation_patterns(s, opt.delta_max)) {
        std::vector<Int> y(s);
        for (std::size_t j = 0; j < s; ++j) y[j] = int_pow(p, delta[j]);
        FormSystem scaled = scale_variables(sys, y);
        FormSystem t = p_content_normalized(scaled, p);
        ModpSystem mp(t, p);

        std::vector<std::uint64_t> z(s, 1);
        if (p == 1) break;
        bool layer_done = true;
        do {
            if (budget == 0) {
                res.exhausted = false;
                layer_done = false;
                break;
            }
            --budget;
            ++res.seeds_tried;
            if (!mp.vanishes_at(z)) continue;
            if (mp.jacobian_rank(z) != R) continue;
            PAdicPoint zl = hensel_lift(t, z, p, precision);
            std::vector<Int> x(s);
            Int pk = int_pow(p, precision);
            for (std::size_t j = 0; j < s; ++j) x[j] = mod_reduce(zl.coords[j] * y[j], pk);
            bool residue_ok = true;
            for (const auto& v : evaluate(sys, x, pk))
                if (v != 0) residue_ok = false;
            if (!residue_ok) continue;
            if (min_jacobian_minor_valuation(sys, x, p, precision) >= (precision + 1) / 2)
                continue;
            res.point = make_padic_point(p, precision, std::move(x));
            res.valuation_pattern = delta;
            return res;
        } while (next_point(z, p, true));
        if (!layer_done) break;
    }
    res.point = std::nullopt;
    return res;
}

RealSolveResult real_nonsingular_solution(const FormSystem& sys, double tolerance,
                                          const RealSolveOptions& opt) {
    const std::size_t s = sys.nvars();
    const std::size_t R = sys.form_count();
    RealSolveResult res;
    if (R == 0) {
        res.point = std::vector<double>(s, 0.5);
        res.sigma_min = std::numeric_limits<double>::infinity();
        res.min_abs_coord = 0.5;
        return res;
    }
    auto forms = sys.forms_in_order();
    std::vector<std::vector<Form>> derivs(R);
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < s; ++j) derivs[i].push_back(forms[i]->derivative(j));

    std::mt19937_64 rng(opt.rng_seed);
    std::uniform_real_distribution<double> mag(0.15, 0.8);
    std::bernoulli_distribution coin(0.5);

    for (std::size_t restart = 0; restart < opt.max_restarts; ++restart) {
        res.restarts_used = restart + 1;
        Eigen::VectorXd x(s);
        for (std::size_t j = 0; j < s; ++j) x[j] = (coin(rng) ? 1.0 : -1.0) * mag(rng);

        for (std::size_t it = 0; it < opt.newton_steps; ++it) {
            std::vector<double> xv(x.data(), x.data() + s);
            Eigen::VectorXd g(R);
            Eigen::MatrixXd jac(R, s);
            for (std::size_t i = 0; i < R; ++i) {
                g[i] = eval_double(*forms[i], xv);
                for (std::size_t j = 0; j < s; ++j) jac(i, j) = eval_double(derivs[i][j], xv);
            }
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac,
                                                  Eigen::ComputeThinU | Eigen::ComputeThinV);
            double sigma_min = svd.singularValues().minCoeff();
            double resid = g.cwiseAbs().maxCoeff();
            double min_abs = x.cwiseAbs().minCoeff();
            double max_abs = x.cwiseAbs().maxCoeff();
            if (resid < tolerance && sigma_min > tolerance && min_abs > tolerance &&
                max_abs < 1.0) {
                res.point = std::vector<double>(x.data(), x.data() + s);
                res.residual = resid;
                res.sigma_min = sigma_min;
                res.min_abs_coord = min_abs;
                return res;
            }
            if (sigma_min < 1e-14) break;
            Eigen::VectorXd delta = svd.solve(g);
            x -= delta;
            double norm = x.cwiseAbs().maxCoeff();
            if (norm >= 0.95) x *= 0.9 / norm;
            if (norm <= 0.02) break;  // collapsing toward the singular origin
        }
    }
    return res;
}

}  // namespace oddforms
