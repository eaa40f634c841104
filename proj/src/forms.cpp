#include "oddforms/forms.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

namespace oddforms {

namespace {

Int ipow(const Int& base, std::uint32_t e) {
    Int r = 1;
    Int b = base;
    while (e) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

Int mod_reduce(const Int& v, const Int& m) {
    Int r = v % m;
    if (r < 0) r += m;
    return r;
}

}  // namespace

ParseError::ParseError(std::size_t line_, std::size_t col_, const std::string& what_)
    : Error("parse error at line " + std::to_string(line_) + ", column " +
            std::to_string(col_) + ": " + what_),
      line(line_),
      col(col_) {}

std::uint32_t Monomial::degree() const {
    std::uint32_t d = 0;
    for (auto e : exps) d += e;
    return d;
}

Form Form::from_monomials(std::uint32_t degree, std::size_t nvars,
                          std::span<const Monomial> monomials) {
    Form f(degree, nvars);
    for (const auto& m : monomials) {
        if (m.exps.size() != nvars)
            throw Error("monomial exponent vector length does not match variable count");
        if (m.degree() != degree)
            throw Error("monomial of degree " + std::to_string(m.degree()) +
                        " in a form declared degree " + std::to_string(degree));
        f.terms_[m.exps] += m.coeff;
    }
    std::erase_if(f.terms_, [](const auto& kv) { return kv.second == 0; });
    return f;
}

Int Form::eval(std::span<const Int> point) const {
    if (point.size() != nvars_) throw Error("point dimension mismatch");
    Int acc = 0;
    for (const auto& [exps, c] : terms_) {
        Int t = c;
        for (std::size_t j = 0; j < nvars_; ++j)
            if (exps[j]) t *= ipow(point[j], exps[j]);
        acc += t;
    }
    return acc;
}

Int Form::eval_mod(std::span<const Int> point, const Int& modulus) const {
    if (point.size() != nvars_) throw Error("point dimension mismatch");
    if (modulus <= 0) throw Error("modulus must be positive");
    Int acc = 0;
    for (const auto& [exps, c] : terms_) {
        Int t = mod_reduce(c, modulus);
        for (std::size_t j = 0; j < nvars_; ++j)
            for (std::uint32_t e = 0; e < exps[j]; ++e)
                t = mod_reduce(t * mod_reduce(point[j], modulus), modulus);
        acc = mod_reduce(acc + t, modulus);
    }
    return acc;
}

std::uint64_t Form::eval_mod_u64(std::span<const std::uint64_t> point, std::uint64_t p) const {
    std::uint64_t acc = 0;
    for (const auto& [exps, c] : terms_) {
        Int cr = c % static_cast<long long>(p);
        if (cr < 0) cr += static_cast<long long>(p);
        std::uint64_t t = cr.convert_to<std::uint64_t>();
        for (std::size_t j = 0; j < nvars_; ++j)
            for (std::uint32_t e = 0; e < exps[j]; ++e) t = (t * (point[j] % p)) % p;
        acc = (acc + t) % p;
    }
    return acc;
}

Form Form::derivative(std::size_t var) const {
    Form d(degree_ ? degree_ - 1 : 0, nvars_);
    for (const auto& [exps, c] : terms_) {
        if (exps[var] == 0) continue;
        Exponents e = exps;
        Int nc = c * e[var];
        e[var] -= 1;
        d.terms_[e] += nc;
    }
    std::erase_if(d.terms_, [](const auto& kv) { return kv.second == 0; });
    return d;
}

Form Form::restricted(const std::vector<bool>& zeroed, bool drop_vars) const {
    if (zeroed.size() != nvars_) throw Error("restriction mask dimension mismatch");
    std::size_t kept = nvars_;
    if (drop_vars) kept = std::count(zeroed.begin(), zeroed.end(), false);
    Form out(degree_, kept);
    for (const auto& [exps, c] : terms_) {
        bool dies = false;
        for (std::size_t j = 0; j < nvars_; ++j)
            if (zeroed[j] && exps[j] > 0) { dies = true; break; }
        if (dies) continue;
        if (drop_vars) {
            Exponents e;
            e.reserve(kept);
            for (std::size_t j = 0; j < nvars_; ++j)
                if (!zeroed[j]) e.push_back(exps[j]);
            out.terms_[e] += c;
        } else {
            out.terms_[exps] += c;
        }
    }
    return out;
}

Form Form::scaled(std::span<const Int> multipliers) const {
    if (multipliers.size() != nvars_) throw Error("multiplier dimension mismatch");
    Form out(degree_, nvars_);
    for (const auto& [exps, c] : terms_) {
        Int nc = c;
        for (std::size_t j = 0; j < nvars_; ++j)
            if (exps[j]) nc *= ipow(multipliers[j], exps[j]);
        out.terms_[exps] = nc;
    }
    return out;
}

Form Form::divided_by(const Int& d) const {
    if (d == 0) throw Error("division by zero");
    Form out(degree_, nvars_);
    for (const auto& [exps, c] : terms_) {
        if (c % d != 0) throw Error("coefficient not divisible");
        out.terms_[exps] = c / d;
    }
    return out;
}

Int Form::content() const {
    Int g = 0;
    for (const auto& [exps, c] : terms_) g = boost::multiprecision::gcd(g, c);
    if (g < 0) g = -g;
    return g;
}

std::vector<Rat> Form::coefficient_vector(const std::vector<Exponents>& basis) const {
    std::vector<Rat> v(basis.size(), Rat(0));
    for (std::size_t i = 0; i < basis.size(); ++i) {
        auto it = terms_.find(basis[i]);
        if (it != terms_.end()) v[i] = Rat(it->second);
    }
    return v;
}

std::string Form::to_string(std::span<const std::string> names) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    // leading term first: reverse canonical order
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [exps, c] = *it;
        Int a = c;
        if (first) {
            if (a < 0) { os << "-"; a = -a; }
        } else {
            os << (a < 0 ? " - " : " + ");
            if (a < 0) a = -a;
        }
        first = false;
        bool printed = false;
        if (a != 1) { os << a.str(); printed = true; }
        for (std::size_t j = 0; j < nvars_; ++j) {
            if (!exps[j]) continue;
            if (printed) os << "*";
            os << names[j];
            if (exps[j] > 1) os << "^" << exps[j];
            printed = true;
        }
        if (!printed) os << "1";  // cannot happen for positive degree
    }
    return os.str();
}

Form form_from_rational_terms(std::uint32_t degree, std::size_t nvars,
                              const std::map<Exponents, Rat>& terms) {
    Int lcm = 1;
    for (const auto& [e, q] : terms) {
        if (q == 0) continue;
        lcm = boost::multiprecision::lcm(lcm, Int(boost::multiprecision::denominator(q)));
    }
    std::vector<Monomial> mons;
    for (const auto& [e, q] : terms) {
        if (q == 0) continue;
        Rat scaled = q * lcm;
        mons.push_back({Int(boost::multiprecision::numerator(scaled)), e});
    }
    Form f = Form::from_monomials(degree, nvars, mons);
    Int g = f.content();
    if (g > 1) f = f.divided_by(g);
    return f;
}

std::vector<Exponents> monomial_basis(std::size_t nvars, std::uint32_t degree) {
    std::vector<Exponents> out;
    Exponents cur(nvars, 0);
    // lexicographic generation matching std::map order over Exponents
    auto rec = [&](auto&& self, std::size_t pos, std::uint32_t left) -> void {
        if (pos + 1 == nvars) {
            cur[pos] = left;
            out.push_back(cur);
            return;
        }
        for (std::uint32_t e = 0; e <= left; ++e) {
            cur[pos] = e;
            self(self, pos + 1, left - e);
        }
        cur[pos] = 0;
    };
    if (nvars == 0) return out;
    rec(rec, 0, degree);
    std::sort(out.begin(), out.end());
    return out;
}

FormSystem::FormSystem(std::vector<std::string> names) : names_(std::move(names)) {}

FormSystem FormSystem::with_default_names(std::size_t nvars) {
    std::vector<std::string> names;
    names.reserve(nvars);
    for (std::size_t i = 1; i <= nvars; ++i) names.push_back("x" + std::to_string(i));
    return FormSystem(std::move(names));
}

void FormSystem::add_form(Form f) {
    if (f.nvars() != nvars()) throw Error("form variable count does not match system");
    if (f.is_zero()) throw Error("the zero form cannot be stored in a system");
    if (f.degree() == 0) throw Error("forms must have positive degree");
    blocks_[f.degree()].push_back(std::move(f));
}

std::size_t FormSystem::form_count() const {
    std::size_t r = 0;
    for (const auto& [d, b] : blocks_) r += b.size();
    return r;
}

std::uint64_t FormSystem::total_degree() const {
    std::uint64_t t = 0;
    for (const auto& [d, b] : blocks_) t += static_cast<std::uint64_t>(d) * b.size();
    return t;
}

std::map<std::uint32_t, std::size_t> FormSystem::profile() const {
    std::map<std::uint32_t, std::size_t> p;
    for (const auto& [d, b] : blocks_) p[d] = b.size();
    return p;
}

std::uint32_t FormSystem::max_degree() const {
    return blocks_.empty() ? 0 : blocks_.begin()->first;
}

const std::vector<Form>* FormSystem::block(std::uint32_t degree) const {
    auto it = blocks_.find(degree);
    return it == blocks_.end() ? nullptr : &it->second;
}

std::vector<const Form*> FormSystem::forms_in_order() const {
    std::vector<const Form*> out;
    for (const auto& [d, b] : blocks_)
        for (const auto& f : b) out.push_back(&f);
    return out;
}

OddnessCertificate FormSystem::oddness() const {
    OddnessCertificate cert;
    for (const auto& [d, b] : blocks_) {
        if (d % 2 == 0) {
            cert.all_odd = false;
            cert.offending_degrees.push_back(d);
        }
    }
    std::sort(cert.offending_degrees.begin(), cert.offending_degrees.end());
    return cert;
}

namespace {

struct Cursor {
    const std::string& s;
    std::size_t pos = 0;
    std::size_t line;

    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\r')) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= s.size() || s[pos] == '#';
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    [[noreturn]] void fail(const std::string& msg) { throw ParseError(line, pos + 1, msg); }
    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) { ++pos; return true; }
        return false;
    }
    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
            ++pos;
        if (pos == start) fail("expected identifier");
        return s.substr(start, pos - start);
    }
    Int integer() {
        skip_ws();
        std::size_t start = pos;
        if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
        std::size_t digits = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == digits) fail("expected integer");
        return Int(s.substr(start, pos - start));
    }
};

}  // namespace

FormSystem parse_system(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;
    std::optional<FormSystem> sys;
    std::map<std::string, std::size_t> var_index;
    std::size_t form_counter = 0;

    while (std::getline(in, raw)) {
        ++lineno;
        Cursor c{raw, 0, lineno};
        if (c.done()) continue;

        std::string head = c.ident();
        if (head == "vars") {
            if (!c.eat(':')) c.fail("expected ':' after 'vars'");
            if (sys) c.fail("duplicate vars line");
            std::vector<std::string> names;
            while (!c.done()) {
                std::string n = c.ident();
                if (var_index.count(n)) c.fail("duplicate variable '" + n + "'");
                var_index[n] = names.size();
                names.push_back(n);
            }
            if (names.empty()) c.fail("vars line declares no variables");
            sys = FormSystem(std::move(names));
            continue;
        }
        if (head != "form") c.fail("expected 'vars:' or 'form deg=...:'");
        if (!sys) c.fail("'form' line before 'vars:' line");

        std::string kw = c.ident();
        if (kw != "deg") c.fail("expected 'deg=' after 'form'");
        if (!c.eat('=')) c.fail("expected '=' after 'deg'");
        Int degi = c.integer();
        if (degi <= 0)
            c.fail("form degree must be a positive integer (constants are not admitted)");
        auto degree = degi.convert_to<std::uint32_t>();
        if (!c.eat(':')) c.fail("expected ':' after form degree");

        ++form_counter;
        std::vector<Monomial> mons;
        bool first_term = true;
        while (!c.done()) {
            int sign = 1;
            if (c.eat('+')) {
                sign = 1;
            } else if (c.eat('-')) {
                sign = -1;
            } else if (!first_term) {
                c.fail("expected '+' or '-' between monomials");
            }
            first_term = false;
            c.skip_ws();
            Int coeff = 1;
            bool saw_coeff = false;
            if (c.pos < raw.size() && std::isdigit(static_cast<unsigned char>(raw[c.pos]))) {
                coeff = c.integer();
                saw_coeff = true;
            }
            Exponents exps(sys->nvars(), 0);
            bool saw_var = false;
            bool expect_factor = !saw_coeff;
            while (true) {
                if (saw_coeff || saw_var) {
                    if (!c.eat('*')) break;
                    expect_factor = true;
                }
                c.skip_ws();
                if (c.pos >= raw.size() ||
                    !(std::isalpha(static_cast<unsigned char>(raw[c.pos])) || raw[c.pos] == '_')) {
                    if (expect_factor && (saw_coeff || saw_var)) c.fail("expected variable after '*'");
                    break;
                }
                std::size_t vcol = c.pos;
                std::string v = c.ident();
                auto it = var_index.find(v);
                if (it == var_index.end())
                    throw ParseError(lineno, vcol + 1, "unknown variable '" + v + "'");
                std::uint32_t e = 1;
                if (c.eat('^')) {
                    Int ei = c.integer();
                    if (ei <= 0) c.fail("exponent must be positive");
                    e = ei.convert_to<std::uint32_t>();
                }
                exps[it->second] += e;
                saw_var = true;
                expect_factor = false;
            }
            if (!saw_var) {
                if (!saw_coeff) c.fail("expected a monomial");
                c.fail("bare integer monomial requires deg=0, which is not admitted");
            }
            Monomial m{coeff * sign, std::move(exps)};
            if (m.degree() != degree)
                throw ParseError(lineno, 1,
                                 "form #" + std::to_string(form_counter) + " declared deg=" +
                                     std::to_string(degree) + " but contains a degree " +
                                     std::to_string(m.degree()) + " monomial");
            mons.push_back(std::move(m));
        }
        if (mons.empty()) c.fail("form has no monomials");
        Form f = Form::from_monomials(degree, sys->nvars(), mons);
        if (f.is_zero())
            throw ParseError(lineno, 1,
                             "form #" + std::to_string(form_counter) + " cancels to the zero form");
        sys->add_form(std::move(f));
    }
    if (!sys) throw ParseError(lineno ? lineno : 1, 1, "missing 'vars:' line");
    return *sys;
}

std::string to_text(const FormSystem& sys) {
    std::ostringstream os;
    os << "vars:";
    for (const auto& n : sys.names()) os << " " << n;
    os << "\n";
    for (const auto& [d, b] : sys.blocks())
        for (const auto& f : b) os << "form deg=" << d << ": " << f.to_string(sys.names()) << "\n";
    return os.str();
}

std::vector<Int> evaluate(const FormSystem& sys, std::span<const Int> point,
                          const std::optional<Int>& modulus) {
    if (point.size() != sys.nvars()) throw Error("point dimension mismatch");
    std::vector<Int> out;
    out.reserve(sys.form_count());
    for (const Form* f : sys.forms_in_order())
        out.push_back(modulus ? f->eval_mod(point, *modulus) : f->eval(point));
    return out;
}

std::vector<std::vector<Int>> jacobian(const FormSystem& sys, std::span<const Int> point,
                                       const std::optional<Int>& modulus) {
    if (point.size() != sys.nvars()) throw Error("point dimension mismatch");
    std::vector<std::vector<Int>> out;
    out.reserve(sys.form_count());
    for (const Form* f : sys.forms_in_order()) {
        std::vector<Int> row;
        row.reserve(sys.nvars());
        for (std::size_t j = 0; j < sys.nvars(); ++j) {
            Form d = f->derivative(j);
            row.push_back(modulus ? d.eval_mod(point, *modulus) : d.eval(point));
        }
        out.push_back(std::move(row));
    }
    return out;
}

RestrictionResult restrict_hyperplane(const FormSystem& sys,
                                      std::span<const std::size_t> zero_vars) {
    std::vector<bool> mask(sys.nvars(), false);
    for (auto j : zero_vars) {
        if (j >= sys.nvars()) throw Error("restriction index out of range");
        mask[j] = true;
    }
    RestrictionResult res;
    std::vector<std::string> names;
    for (std::size_t j = 0; j < sys.nvars(); ++j)
        if (!mask[j]) {
            names.push_back(sys.names()[j]);
            res.kept_vars.push_back(j);
        }
    res.system = FormSystem(std::move(names));
    for (const auto& [d, b] : sys.blocks()) {
        for (const auto& f : b) {
            Form g = f.restricted(mask, true);
            if (g.is_zero())
                res.removed_forms.push_back("deg=" + std::to_string(d) + ": " +
                                            f.to_string(sys.names()));
            else
                res.system.add_form(std::move(g));
        }
    }
    return res;
}

FormSystem scale_variables(const FormSystem& sys, std::span<const Int> multipliers) {
    if (multipliers.size() != sys.nvars()) throw Error("multiplier dimension mismatch");
    for (const auto& y : multipliers)
        if (y == 0) throw Error("zero multiplier rejected");
    FormSystem out(sys.names());
    for (const auto& [d, b] : sys.blocks())
        for (const auto& f : b) out.add_form(f.scaled(multipliers));
    return out;
}

LinearCombinationResult linear_combination(std::span<const Form> block,
                                           std::span<const Rat> coeffs) {
    if (block.empty()) throw Error("empty block");
    if (coeffs.size() != block.size()) throw Error("coefficient count does not match block");
    bool any = false;
    for (const auto& c : coeffs)
        if (c != 0) any = true;
    if (!any) throw Error("all-zero coefficient vector");
    std::uint32_t degree = block[0].degree();
    std::size_t nvars = block[0].nvars();
    for (const auto& f : block)
        if (f.degree() != degree || f.nvars() != nvars)
            throw Error("block forms must share degree and variable count");
    std::map<Exponents, Rat> acc;
    for (std::size_t i = 0; i < block.size(); ++i) {
        if (coeffs[i] == 0) continue;
        for (const auto& [e, c] : block[i].terms()) acc[e] += coeffs[i] * Rat(c);
    }
    LinearCombinationResult res;
    res.form = form_from_rational_terms(degree, nvars, acc);
    res.is_zero = res.form.is_zero();
    return res;
}

}  // namespace oddforms
