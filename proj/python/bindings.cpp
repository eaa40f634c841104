#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "oddforms/counting.hpp"
#include "oddforms/forms.hpp"
#include "oddforms/localsolve.hpp"
#include "oddforms/pipeline.hpp"
#include "oddforms/ranklab.hpp"
#include "oddforms/regularize.hpp"
#include "oddforms/scale.hpp"

namespace py = pybind11;

namespace pybind11::detail {

// arbitrary-precision integers cross the boundary as python ints via strings
template <>
struct type_caster<oddforms::Int> {
    PYBIND11_TYPE_CASTER(oddforms::Int, const_name("int"));

    bool load(handle src, bool) {
        if (!isinstance<int_>(src)) return false;
        value = oddforms::Int(static_cast<std::string>(str(src)));
        return true;
    }
    static handle cast(const oddforms::Int& v, return_value_policy, handle) {
        return PyLong_FromString(v.str().c_str(), nullptr, 10);
    }
};

template <>
struct type_caster<oddforms::Rat> {
    PYBIND11_TYPE_CASTER(oddforms::Rat, const_name("Union[int, str]"));

    bool load(handle src, bool) {
        if (isinstance<int_>(src) || isinstance<str>(src)) {
            value = oddforms::Rat(static_cast<std::string>(str(src)));
            return true;
        }
        return false;
    }
    static handle cast(const oddforms::Rat& v, return_value_policy, handle) {
        std::ostringstream os;
        os << v;
        return PyUnicode_FromString(os.str().c_str());
    }
};

}  // namespace pybind11::detail

namespace {

using namespace oddforms;

GrowthFunctions growth_from(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                            std::uint64_t target) {
    GrowthFunctions g;
    g.h_default = {a, b, c};
    g.r_target = {0, 0, target};
    return g;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "odd-degree form systems: regularization, local solutions, scaling, and "
              "almost-prime counting";
    m.attr("__version__") = "0.1.0";

    py::register_exception<Error>(m, "OddformsError");

    py::class_<Form>(m, "Form")
        .def_property_readonly("degree", &Form::degree)
        .def_property_readonly("nvars", &Form::nvars)
        .def_property_readonly("is_zero", &Form::is_zero)
        .def("terms",
             [](const Form& f) {
                 py::dict out;
                 for (const auto& [e, c] : f.terms())
                     out[py::tuple(py::cast(e))] = py::cast(c);
                 return out;
             })
        .def("__repr__", [](const Form& f) {
            auto names = FormSystem::with_default_names(f.nvars()).names();
            return "<Form deg=" + std::to_string(f.degree()) + ": " + f.to_string(names) + ">";
        });

    py::class_<FormSystem>(m, "FormSystem")
        .def_property_readonly("nvars", &FormSystem::nvars)
        .def_property_readonly("form_count", &FormSystem::form_count)
        .def_property_readonly("total_degree", &FormSystem::total_degree)
        .def_property_readonly("names", &FormSystem::names)
        .def("profile", &FormSystem::profile)
        .def("block",
             [](const FormSystem& s, std::uint32_t degree) {
                 std::vector<Form> out;
                 if (const auto* b = s.block(degree)) out = *b;
                 return out;
             })
        .def("forms",
             [](const FormSystem& s) {
                 std::vector<Form> out;
                 for (const Form* f : s.forms_in_order()) out.push_back(*f);
                 return out;
             })
        .def("all_odd", [](const FormSystem& s) { return s.oddness().all_odd; })
        .def("__str__", [](const FormSystem& s) { return to_text(s); })
        .def("__eq__", [](const FormSystem& a, const FormSystem& b) { return a == b; });

    m.def("parse_system", &parse_system, py::arg("text"));
    m.def("to_text", &to_text, py::arg("system"));

    m.def(
        "evaluate",
        [](const FormSystem& s, const std::vector<Int>& point, std::optional<Int> modulus) {
            return evaluate(s, point, modulus);
        },
        py::arg("system"), py::arg("point"), py::arg("modulus") = std::nullopt);
    m.def(
        "jacobian",
        [](const FormSystem& s, const std::vector<Int>& point, std::optional<Int> modulus) {
            return jacobian(s, point, modulus);
        },
        py::arg("system"), py::arg("point"), py::arg("modulus") = std::nullopt);
    m.def(
        "restrict_hyperplane",
        [](const FormSystem& s, const std::vector<std::size_t>& zero_vars) {
            auto r = restrict_hyperplane(s, zero_vars);
            return py::make_tuple(r.system, r.removed_forms, r.kept_vars);
        },
        py::arg("system"), py::arg("zero_vars"));
    m.def(
        "scale_variables",
        [](const FormSystem& s, const std::vector<Int>& y) { return scale_variables(s, y); },
        py::arg("system"), py::arg("multipliers"));
    m.def(
        "linear_combination",
        [](const std::vector<Form>& block, const std::vector<Rat>& coeffs) {
            auto r = linear_combination(block, coeffs);
            return py::make_tuple(r.form, r.is_zero);
        },
        py::arg("block"), py::arg("coeffs"));

    py::class_<FactorPair>(m, "FactorPair")
        .def_readonly("u", &FactorPair::u)
        .def_readonly("v", &FactorPair::v)
        .def_readonly("u_scale", &FactorPair::u_scale);

    py::class_<SchmidtRankInterval>(m, "SchmidtRankInterval")
        .def_readonly("lower", &SchmidtRankInterval::lower)
        .def_readonly("upper", &SchmidtRankInterval::upper)
        .def_readonly("witness", &SchmidtRankInterval::witness)
        .def_readonly("exhaustive", &SchmidtRankInterval::exhaustive);

    py::class_<BirchRankEstimate>(m, "BirchRankEstimate")
        .def_readonly("value", &BirchRankEstimate::value)
        .def_readonly("per_prime_counts", &BirchRankEstimate::per_prime_counts)
        .def_property_readonly(
            "confidence",
            [](const BirchRankEstimate& e) { return to_string(e.confidence); })
        .def_readonly("primes_disagree", &BirchRankEstimate::primes_disagree);

    m.def("linear_rank", &linear_rank, py::arg("form"));
    m.def(
        "schmidt_rank",
        [](const Form& f, unsigned height_bound, std::uint64_t budget) {
            return schmidt_rank(f, height_bound, budget);
        },
        py::arg("form"), py::arg("height_bound") = 1, py::arg("budget") = 200000);
    m.def(
        "schmidt_rank_system",
        [](const std::vector<Form>& block, unsigned box, unsigned height,
           std::uint64_t budget) {
            auto r = schmidt_rank_system(block, box, height, budget);
            return py::make_tuple(r.interval, r.best_combo);
        },
        py::arg("block"), py::arg("coeff_box") = 1, py::arg("height_bound") = 1,
        py::arg("budget") = 200000);
    m.def(
        "birch_rank",
        [](const std::vector<Form>& block, const std::vector<std::uint64_t>& primes,
           std::uint64_t sbound) { return birch_rank(block, primes, sbound); },
        py::arg("block"), py::arg("primes") = std::vector<std::uint64_t>{},
        py::arg("sbound") = 2000000);

    py::class_<FpPointCount>(m, "FpPointCount")
        .def_readonly("p", &FpPointCount::p)
        .def_readonly("total", &FpPointCount::total)
        .def_readonly("unit_total", &FpPointCount::unit_total)
        .def_readonly("nonsingular_unit_total", &FpPointCount::nonsingular_unit_total)
        .def_readonly("expected", &FpPointCount::expected)
        .def_readonly("bound", &FpPointCount::bound)
        .def_readonly("bound_satisfied", &FpPointCount::bound_satisfied);

    py::class_<PAdicPoint>(m, "PAdicPoint")
        .def_readonly("p", &PAdicPoint::p)
        .def_readonly("precision", &PAdicPoint::precision)
        .def_readonly("coords", &PAdicPoint::coords)
        .def_readonly("valuations", &PAdicPoint::valuations)
        .def_readonly("unit_parts", &PAdicPoint::unit_parts);

    m.def("count_points", &count_points, py::arg("system"), py::arg("p"),
          py::arg("cap") = 25000000);
    m.def(
        "exponential_sum",
        [](const FormSystem& s, const std::vector<std::uint64_t>& a, std::uint64_t p,
           std::uint64_t cap) { return exponential_sum(s, a, p, cap); },
        py::arg("system"), py::arg("a"), py::arg("p"), py::arg("cap") = 25000000);
    m.def("find_nonsingular_unit_solutions", &find_nonsingular_unit_solutions,
          py::arg("system"), py::arg("p"), py::arg("cap") = 25000000, py::arg("limit") = 1);
    m.def(
        "hensel_lift",
        [](const FormSystem& s, const std::vector<std::uint64_t>& seed, std::uint64_t p,
           unsigned precision, const std::vector<std::size_t>& frozen) {
            return hensel_lift(s, seed, p, precision, frozen);
        },
        py::arg("system"), py::arg("seed"), py::arg("p"), py::arg("precision"),
        py::arg("frozen") = std::vector<std::size_t>{});
    m.def(
        "find_padic_nonzero_solution",
        [](const FormSystem& s, std::uint64_t p, unsigned precision, unsigned delta_max,
           std::uint64_t seed_budget) {
            PAdicSearchOptions opt;
            opt.delta_max = delta_max;
            opt.seed_budget = seed_budget;
            auto r = find_padic_nonzero_solution(s, p, precision, opt);
            return py::make_tuple(r.point, r.valuation_pattern, r.exhausted);
        },
        py::arg("system"), py::arg("p"), py::arg("precision"), py::arg("delta_max") = 2,
        py::arg("seed_budget") = 2000000);
    m.def(
        "real_nonsingular_solution",
        [](const FormSystem& s, double tolerance, std::size_t restarts, std::uint64_t seed) {
            RealSolveOptions opt;
            opt.max_restarts = restarts;
            opt.rng_seed = seed;
            auto r = real_nonsingular_solution(s, tolerance, opt);
            return r.point;
        },
        py::arg("system"), py::arg("tolerance") = 1e-8, py::arg("restarts") = 200,
        py::arg("seed") = 1);

    py::class_<ScalingPlan>(m, "ScalingPlan")
        .def_readonly("bad_primes", &ScalingPlan::bad_primes)
        .def_readonly("multipliers", &ScalingPlan::multipliers)
        .def_readonly("max_multiplier", &ScalingPlan::max_multiplier)
        .def_readonly("precision", &ScalingPlan::precision);

    m.def(
        "detect_bad_primes",
        [](const FormSystem& s, std::uint64_t p_max, std::uint64_t cap) {
            return bad_prime_list(detect_bad_primes(s, p_max, cap));
        },
        py::arg("system"), py::arg("p_max") = 30, py::arg("cap") = 25000000);
    m.def(
        "build_multipliers",
        [](const FormSystem& s, const std::vector<std::uint64_t>& bad, unsigned precision) {
            return build_multipliers(s, bad, precision);
        },
        py::arg("system"), py::arg("bad_primes"), py::arg("precision") = 8);
    m.def(
        "apply_signs",
        [](ScalingPlan& plan, const std::vector<double>& real_solution) {
            apply_signs(plan, real_solution);
            return plan;
        },
        py::arg("plan"), py::arg("real_solution"));
    m.def(
        "verify_scaled_local",
        [](const FormSystem& s, const ScalingPlan& plan,
           const std::vector<std::uint64_t>& primes, unsigned precision, std::uint64_t cap) {
            auto rep = verify_scaled_local(s, plan, primes, precision, cap);
            std::vector<std::pair<std::uint64_t, bool>> rows;
            for (const auto& pv : rep.primes) rows.emplace_back(pv.p, pv.ok);
            return py::make_tuple(rep.all_ok, rows);
        },
        py::arg("system"), py::arg("plan"), py::arg("primes"), py::arg("precision") = 8,
        py::arg("cap") = 25000000);

    m.def(
        "prepare_reduced_system",
        [](const FormSystem& s, std::uint64_t growth_a, std::uint64_t growth_b,
           std::uint64_t growth_c, std::uint64_t rtarget) {
            auto prep = prepare_reduced_system(s, growth_from(growth_a, growth_b, growth_c,
                                                              rtarget));
            return py::make_tuple(prep.system, prep.exceptional_set, prep.cert.to_text());
        },
        py::arg("system"), py::arg("growth_a") = 2, py::arg("growth_b") = 2,
        py::arg("growth_c") = 0, py::arg("rtarget") = 2);

    m.def(
        "almost_prime_count",
        [](const FormSystem& s, std::uint64_t n, std::uint64_t y,
           const std::vector<std::size_t>& exceptional, bool allow_zero_y, std::uint64_t cap) {
            CountQuery q;
            q.N = n;
            q.Y = y;
            q.exceptional = exceptional;
            q.allow_zero_y = allow_zero_y;
            CountOptions opt;
            opt.cap = cap;
            return almost_prime_count(s, q, opt).count;
        },
        py::arg("system"), py::arg("N"), py::arg("Y") = 1,
        py::arg("J") = std::vector<std::size_t>{}, py::arg("allow_zero_y") = false,
        py::arg("cap") = 2000000000);
    m.def(
        "embedded_prime_count",
        [](const FormSystem& s, const std::vector<Int>& y, std::uint64_t n, std::uint64_t cap) {
            CountOptions opt;
            opt.cap = cap;
            return embedded_prime_count(s, y, n, opt).count;
        },
        py::arg("system"), py::arg("multipliers"), py::arg("N"), py::arg("cap") = 2000000000);
    m.def("weighted_prime_count", &weighted_prime_count, py::arg("system"), py::arg("N"),
          py::arg("cap") = 2000000000);
    m.def(
        "growth_fit",
        [](const std::vector<std::pair<std::uint64_t, Int>>& records, std::size_t s,
           std::uint64_t total_degree) {
            std::vector<CountRecord> recs;
            for (const auto& [n, count] : records)
                recs.push_back(make_count_record(n, 1, count, s, total_degree, 0.0));
            auto fit = growth_fit(recs, s, total_degree);
            return py::make_tuple(fit.slope, fit.exponent, fit.constant);
        },
        py::arg("records"), py::arg("s"), py::arg("total_degree"));

    m.def(
        "run_pipeline",
        [](const std::string& config_text, const std::string& base_dir) {
            auto cfg = PipelineConfig::from_text(config_text, base_dir);
            auto rep = run_pipeline(cfg);
            return py::make_tuple(rep.pass, rep.text);
        },
        py::arg("config_text"), py::arg("base_dir") = std::string());
}
