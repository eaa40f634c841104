#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace oddforms {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// Exponent vector of a monomial; length equals the ambient variable count.
using Exponents = std::vector<std::uint32_t>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    ParseError(std::size_t line, std::size_t col, const std::string& what);
    std::size_t line;
    std::size_t col;
};

struct CapExceeded : Error {
    using Error::Error;
};

struct Monomial {
    Int coeff;
    Exponents exps;
    std::uint32_t degree() const;
};

// A homogeneous polynomial with exact integer coefficients. Terms are kept in
// a map keyed by exponent vector, so representation and iteration order are
// canonical. The zero form (empty term map) is representable but is never
// stored inside a FormSystem.
class Form {
public:
    Form() = default;
    Form(std::uint32_t degree, std::size_t nvars) : degree_(degree), nvars_(nvars) {}

    // Merges duplicate exponent vectors, drops zero coefficients, checks
    // homogeneity of every surviving term.
    static Form from_monomials(std::uint32_t degree, std::size_t nvars,
                               std::span<const Monomial> monomials);

    std::uint32_t degree() const { return degree_; }
    std::size_t nvars() const { return nvars_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }
    const std::map<Exponents, Int>& terms() const { return terms_; }

    Int eval(std::span<const Int> point) const;
    Int eval_mod(std::span<const Int> point, const Int& modulus) const;
    std::uint64_t eval_mod_u64(std::span<const std::uint64_t> point, std::uint64_t p) const;

    // Partial derivative; the zero form when the variable is absent.
    Form derivative(std::size_t var) const;

    // Substitutes 0 for the flagged variables and, when drop_vars is set,
    // removes them from the ambient space.
    Form restricted(const std::vector<bool>& zeroed, bool drop_vars) const;

    Form scaled(std::span<const Int> multipliers) const;

    // Exact division of all coefficients (throws unless it divides).
    Form divided_by(const Int& d) const;

    Int content() const;  // gcd of coefficients, non-negative

    std::vector<Rat> coefficient_vector(const std::vector<Exponents>& basis) const;

    std::string to_string(std::span<const std::string> names) const;

    bool operator==(const Form&) const = default;

private:
    std::uint32_t degree_ = 0;
    std::size_t nvars_ = 0;
    std::map<Exponents, Int> terms_;
};

// Builds a primitive integer form from rational coefficients: multiply by the
// lcm of denominators, divide by the positive gcd, keep the sign.
Form form_from_rational_terms(std::uint32_t degree, std::size_t nvars,
                              const std::map<Exponents, Rat>& terms);

// All monomial exponent vectors of the given degree, in canonical (map) order.
std::vector<Exponents> monomial_basis(std::size_t nvars, std::uint32_t degree);

struct OddnessCertificate {
    bool all_odd = true;
    std::vector<std::uint32_t> offending_degrees;
};

// Degree-graded system F = (F^(d),...,F^(1)). Blocks are iterated in
// descending degree; value vectors follow block order then declaration order.
class FormSystem {
public:
    FormSystem() = default;
    explicit FormSystem(std::vector<std::string> names);
    static FormSystem with_default_names(std::size_t nvars);

    std::size_t nvars() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    void add_form(Form f);  // validates nvars, homogeneity, non-zero

    std::size_t form_count() const;                    // R
    std::uint64_t total_degree() const;                // D = sum of degrees
    std::map<std::uint32_t, std::size_t> profile() const;  // degree -> r_l
    std::uint32_t max_degree() const;

    const std::map<std::uint32_t, std::vector<Form>, std::greater<>>& blocks() const {
        return blocks_;
    }
    const std::vector<Form>* block(std::uint32_t degree) const;
    std::vector<const Form*> forms_in_order() const;

    OddnessCertificate oddness() const;

    bool operator==(const FormSystem&) const = default;

private:
    std::vector<std::string> names_;
    std::map<std::uint32_t, std::vector<Form>, std::greater<>> blocks_;
};

FormSystem parse_system(const std::string& text);
std::string to_text(const FormSystem& sys);

std::vector<Int> evaluate(const FormSystem& sys, std::span<const Int> point,
                          const std::optional<Int>& modulus = std::nullopt);

// Entry (i,j) = d(form i)/dx_j at the point, rows in block order.
std::vector<std::vector<Int>> jacobian(const FormSystem& sys, std::span<const Int> point,
                                       const std::optional<Int>& modulus = std::nullopt);

struct RestrictionResult {
    FormSystem system;                        // ambient space shrunk by |J|
    std::vector<std::string> removed_forms;   // forms that vanished, printed form
    std::vector<std::size_t> kept_vars;       // old indices of surviving variables
};

RestrictionResult restrict_hyperplane(const FormSystem& sys,
                                      std::span<const std::size_t> zero_vars);

FormSystem scale_variables(const FormSystem& sys, std::span<const Int> multipliers);

struct LinearCombinationResult {
    Form form;           // primitive integer form; empty when is_zero
    bool is_zero = false;
};

LinearCombinationResult linear_combination(std::span<const Form> block,
                                           std::span<const Rat> coeffs);

}  // namespace oddforms
