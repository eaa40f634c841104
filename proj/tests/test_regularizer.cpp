#include <doctest.h>

#include "helpers.hpp"
#include "oddforms/modeval.hpp"
#include "oddforms/regularize.hpp"

using namespace oddforms;
using testutil::sys_of;

namespace {

GrowthFunctions constant_growth(std::uint64_t h, std::uint64_t target = 2) {
    GrowthFunctions g;
    g.h_default = {0, 0, h};
    g.r_target = {0, 0, target};
    return g;
}

// Exhaustive zero-locus inclusion over F_p: every point of V(G') padded with
// zeros on J_F must be a zero of the original system.
void check_zero_locus_inclusion(const FormSystem& original, const PreparedSystem& prep,
                                std::uint64_t p) {
    const std::size_t s_red = prep.system.nvars();
    ModpSystem original_mod(original, p, false);
    std::vector<std::uint64_t> full(original.nvars(), 0);
    if (s_red == 0) {
        CHECK(original_mod.vanishes_at(full));
        return;
    }
    ModpSystem reduced(prep.system, p, false);
    std::vector<std::uint64_t> x(s_red, 0);
    do {
        if (!reduced.vanishes_at(x)) continue;
        std::fill(full.begin(), full.end(), 0);
        for (std::size_t i = 0; i < s_red; ++i) full[prep.cert.surviving_vars[i]] = x[i];
        CHECK(original_mod.vanishes_at(full));
    } while (next_point(x, p, false));
}

void check_odd_closure(const RegularizationCertificate& cert) {
    for (const auto& [deg, block] : cert.output.blocks()) CHECK(deg % 2 == 1);
    for (const auto& step : cert.steps)
        for (const auto& f : step.adjoined) CHECK(f.degree() % 2 == 1);
}

}  // namespace

TEST_CASE("growth functions evaluate and stay monotone") {
    GrowthFunctions g;  // defaults: H(R,d) = 2 (R+d)^2, target = 2
    CHECK(g.h(3, 1, 3) == 32);
    CHECK(g.target(5, 3) == 2);
    for (std::uint64_t r = 0; r < 6; ++r)
        for (std::uint64_t d = 1; d < 6; ++d) {
            CHECK(g.h(3, r + 1, d) >= g.h(3, r, d));
            CHECK(g.h(3, r, d + 1) >= g.h(3, r, d));
        }
}

TEST_CASE("regularize: reducible cubic collapses to its odd factor") {
    auto sys = sys_of("vars: x1 x2 x3\nform deg=3: x1^3 + x1*x2^2 + x1*x3^2\n");
    auto [g, cert] = regularize(sys, constant_growth(2));
    CHECK(g.form_count() == 1);
    REQUIRE(g.block(1) != nullptr);
    CHECK(g.block(1)->front().to_string(g.names()) == "x1");
    REQUIRE(cert.steps.size() == 1);
    CHECK(cert.steps[0].kind == RegStepKind::decompose);
    check_odd_closure(cert);
}

TEST_CASE("regularize: high-rank diagonal cubic is left unchanged") {
    auto sys = sys_of(
        "vars: x1 x2 x3 x4 x5 x6 x7 x8 x9\n"
        "form deg=3: x1^3+x2^3+x3^3+x4^3+x5^3+x6^3+x7^3+x8^3+x9^3\n");
    auto [g, cert] = regularize(sys, constant_growth(4));
    CHECK(g == sys);
    CHECK(cert.steps.empty());
}

TEST_CASE("regularize: linear base case keeps a maximal independent set") {
    auto sys = sys_of("vars: x1 x2\nform deg=1: x1+x2\nform deg=1: x1\n");
    auto [g, cert] = regularize(sys, constant_growth(2));
    CHECK(g == sys);

    auto dep = sys_of("vars: x1 x2\nform deg=1: x1+x2\nform deg=1: x1\nform deg=1: x2\n");
    auto [g2, cert2] = regularize(dep, constant_growth(2));
    CHECK(g2.form_count() == 2);
    REQUIRE(cert2.steps.size() == 1);
    CHECK(cert2.steps[0].kind == RegStepKind::drop_dependent_linear);
    CHECK(cert2.steps[0].dropped_index == 2);
}

TEST_CASE("regularize rejects even degrees") {
    auto sys = sys_of("vars: x1 x2\nform deg=2: x1*x2\n");
    CHECK_THROWS_WITH_AS(regularize(sys, constant_growth(2)),
                         doctest::Contains("even degree"), Error);
}

TEST_CASE("linear_cleanup cascades through dependent forms") {
    auto sys = sys_of("vars: x1 x2\nform deg=1: x1+x2\nform deg=1: x2\n");
    auto res = linear_cleanup(sys, 2);
    CHECK(res.system.form_count() == 0);
    CHECK(res.system.nvars() == 0);
    CHECK(res.zeroed_vars == std::vector<std::size_t>{0, 1});
}

TEST_CASE("linear_cleanup leaves high-rank and empty blocks alone") {
    auto wide = sys_of(
        "vars: x1 x2 x3 x4 x5 x6 x7 x8 x9 x10\n"
        "form deg=1: x1+x2+x3+x4+x5+x6+x7+x8+x9+x10\n");
    auto res = linear_cleanup(wide, 2);
    CHECK(res.system == wide);
    CHECK(res.zeroed_vars.empty());

    auto cubic = sys_of("vars: x1\nform deg=3: x1^3\n");
    auto res2 = linear_cleanup(cubic, 2);
    CHECK(res2.system == cubic);
}

TEST_CASE("hyperplane_cleanup examples") {
    std::vector<std::uint64_t> primes{3, 5, 7};
    SUBCASE("monomial cubic lives on a hyperplane") {
        auto sys = sys_of("vars: x1 x2 x3\nform deg=3: x1*x2*x3\n");
        auto res = hyperplane_cleanup(sys, primes, 2000000);
        CHECK(res.zeroed_vars == std::vector<std::size_t>{0});
        CHECK(res.system.form_count() == 0);
        CHECK(res.system.nvars() == 2);
    }
    SUBCASE("diagonal cubic has proper slices") {
        auto sys = sys_of("vars: x1 x2 x3\nform deg=3: x1^3+x2^3+x3^3\n");
        auto res = hyperplane_cleanup(sys, primes, 2000000);
        CHECK(res.system == sys);
        CHECK(res.zeroed_vars.empty());
    }
    SUBCASE("linear form has proper slices") {
        auto sys = sys_of("vars: x1 x2 x3\nform deg=1: x1+x2+x3\n");
        auto res = hyperplane_cleanup(sys, primes, 2000000);
        CHECK(res.system == sys);
        CHECK(res.zeroed_vars.empty());
    }
}

TEST_CASE("prepare_reduced_system: the alternating linear equation") {
    auto sys = sys_of("vars: x1 x2 x3\nform deg=1: x1-4*x2+16*x3\n");
    auto prep = prepare_reduced_system(sys, constant_growth(2));
    CHECK(prep.system == sys);
    CHECK(prep.exceptional_set.empty());
    CHECK(prep.cert.steps.empty());
}

TEST_CASE("prepare_reduced_system: reducible cubic zeroes its factor variable") {
    auto sys = sys_of("vars: x1 x2 x3\nform deg=3: x1^3 + x1*x2^2 + x1*x3^2\n");
    auto prep = prepare_reduced_system(sys, constant_growth(2));
    CHECK(prep.exceptional_set == std::vector<std::size_t>{0});
    CHECK(prep.system.form_count() == 0);
    CHECK(prep.system.nvars() == 2);
    CHECK(prep.cert.zeroed_vars.size() <= prep.cert.jf_bound);
    for (auto p : {3ull, 5ull, 7ull}) check_zero_locus_inclusion(sys, prep, p);
    check_odd_closure(prep.cert);
}

TEST_CASE("prepare_reduced_system: two-form cubic block with a rank-one combination") {
    auto sys = sys_of("vars: x1 x2\nform deg=3: x1^3\nform deg=3: x1^3+x2^3\n");
    auto prep = prepare_reduced_system(sys, GrowthFunctions{});
    CHECK(prep.system.form_count() == 0);
    CHECK(prep.exceptional_set == std::vector<std::size_t>{0, 1});
    CHECK(prep.cert.zeroed_vars.size() <= prep.cert.jf_bound);
    for (auto p : {3ull, 5ull, 7ull}) check_zero_locus_inclusion(sys, prep, p);
    check_odd_closure(prep.cert);
}

TEST_CASE("prepare_reduced_system: high-rank diagonal cubic passes through") {
    auto sys = sys_of(
        "vars: x1 x2 x3 x4 x5 x6 x7\n"
        "form deg=3: x1^3+x2^3+x3^3+x4^3+x5^3+x6^3+x7^3\n");
    auto prep = prepare_reduced_system(sys, constant_growth(4));
    CHECK(prep.system == sys);
    CHECK(prep.exceptional_set.empty());
}

TEST_CASE("prepare_reduced_system: 3AP system is already reduced") {
    auto sys = sys_of("vars: x1 x2 x3\nform deg=1: x1+x2-2*x3\n");
    auto prep = prepare_reduced_system(sys, constant_growth(2));
    CHECK(prep.system == sys);
    CHECK(prep.exceptional_set.empty());
}

TEST_CASE("replay reproduces the output exactly") {
    auto check_replay = [](const FormSystem& sys, const GrowthFunctions& growth) {
        auto prep = prepare_reduced_system(sys, growth);
        auto rep = replay(prep.cert);
        CHECK(to_text(rep.system) == to_text(prep.system));
        CHECK(rep.zeroed_vars == prep.exceptional_set);
    };
    check_replay(sys_of("vars: x1 x2 x3\nform deg=3: x1^3 + x1*x2^2 + x1*x3^2\n"),
                 constant_growth(2));
    check_replay(sys_of("vars: x1 x2\nform deg=3: x1^3\nform deg=3: x1^3+x2^3\n"),
                 GrowthFunctions{});
    check_replay(sys_of("vars: x1 x2\nform deg=1: x1+x2\nform deg=1: x2\n"),
                 constant_growth(2));
}

TEST_CASE("prepare runs are deterministic") {
    auto sys = sys_of("vars: x1 x2\nform deg=3: x1^3\nform deg=3: x1^3+x2^3\n");
    auto a = prepare_reduced_system(sys, GrowthFunctions{});
    auto b = prepare_reduced_system(sys, GrowthFunctions{});
    CHECK(a.cert.to_text() == b.cert.to_text());
}

TEST_CASE("certificate text carries the step trail") {
    auto sys = sys_of("vars: x1 x2 x3\nform deg=3: x1^3 + x1*x2^2 + x1*x3^2\n");
    auto prep = prepare_reduced_system(sys, constant_growth(2));
    auto text = prep.cert.to_text();
    CHECK(text.find("decompose deg=3") != std::string::npos);
    CHECK(text.find("J_F (1-based): 1") != std::string::npos);
    CHECK(text.find("verdict") == std::string::npos);  // certificates carry no verdict
}
