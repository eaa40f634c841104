#include <doctest.h>

#include "helpers.hpp"
#include "oddforms/localsolve.hpp"
#include "oddforms/modeval.hpp"

#include <complex>

using namespace oddforms;
using testutil::ints;
using testutil::sys_of;

TEST_CASE("count_points examples") {
    SUBCASE("linear form has exactly p^2 zeros") {
        auto sys = sys_of("vars: x1 x2 x3\nform deg=1: x1+x2+x3\n");
        auto c = count_points(sys, 5, 1000000);
        CHECK(c.total == 25);
        CHECK(c.expected == Rat(25));
        CHECK(c.bound_satisfied);
    }
    SUBCASE("diagonal cubic at p=7") {
        auto sys = sys_of("vars: x1 x2 x3\nform deg=3: x1^3+x2^3+x3^3\n");
        auto c = count_points(sys, 7, 1000000);
        CHECK(c.total == 55);
        CHECK(c.expected == Rat(49));
        CHECK(c.bound == Rat(7));
        CHECK(c.bound_satisfied);
        CHECK(c.unit_total == 0);  // unit cubes sum into {1,...,6} only
    }
    SUBCASE("single cube in two variables") {
        auto sys = sys_of("vars: x1 x2\nform deg=3: x1^3\n");
        auto c = count_points(sys, 5, 1000000);
        CHECK(c.total == 5);
    }
    SUBCASE("cap is enforced") {
        auto sys = sys_of("vars: x1 x2 x3\nform deg=1: x1+x2+x3\n");
        CHECK_THROWS_AS(count_points(sys, 101, 1000), CapExceeded);
    }
}

TEST_CASE("unit-solution counts meet the half bound at large enough p") {
    auto cubic5 = sys_of("vars: x1 x2 x3 x4 x5\nform deg=3: x1^3+x2^3+x3^3+x4^3+x5^3\n");
    for (std::uint64_t p : {11ull, 17ull}) {
        auto c = count_points(cubic5, p, 2000000);
        CHECK(Rat(Int(c.unit_total)) >= c.expected / 2);
    }
    auto quintic5 = sys_of("vars: x1 x2 x3 x4 x5\nform deg=5: x1^5+x2^5+x3^5+x4^5+x5^5\n");
    auto cq = count_points(quintic5, 13, 2000000);
    CHECK(cq.unit_total == 19140);  // ((p-1)^5 - (p-1))/p at p=13
    CHECK(Rat(Int(cq.unit_total)) >= cq.expected / 2);
    auto cubic4 = sys_of("vars: x1 x2 x3 x4\nform deg=3: x1^3+x2^3+x3^3+x4^3\n");
    auto c4 = count_points(cubic4, 7, 2000000);
    CHECK(c4.unit_total == 486);
    CHECK(Rat(Int(c4.unit_total)) >= c4.expected / 2);
}

TEST_CASE("exponential_sum examples") {
    auto sys = sys_of("vars: x1 x2\nform deg=1: x1+x2\n");
    SUBCASE("zero frequency counts all points") {
        std::vector<std::uint64_t> a{0};
        auto v = exponential_sum(sys, a, 3, 1000000);
        CHECK(std::abs(v - std::complex<double>(9, 0)) < 1e-9);
    }
    SUBCASE("complete linear character sum vanishes") {
        std::vector<std::uint64_t> a{1};
        auto v = exponential_sum(sys, a, 3, 1000000);
        CHECK(std::abs(v) < 1e-9);
    }
}

TEST_CASE("Fourier identity: p^R x |V| equals the full character sum") {
    auto check_identity = [](const FormSystem& sys, std::uint64_t p) {
        const std::size_t r = sys.form_count();
        auto c = count_points(sys, p, 2000000);
        std::complex<double> acc = 0;
        std::vector<std::uint64_t> a(r, 0);
        while (true) {
            acc += exponential_sum(sys, a, p, 2000000);
            std::size_t i = r;
            bool advanced = false;
            while (i-- > 0) {
                if (++a[i] < p) {
                    advanced = true;
                    break;
                }
                a[i] = 0;
            }
            if (!advanced) break;
        }
        double lhs = std::pow(static_cast<double>(p), static_cast<double>(r)) *
                     static_cast<double>(c.total);
        CHECK(std::abs(acc.imag()) / lhs < 1e-6);
        CHECK(std::abs(acc.real() - lhs) / lhs < 1e-6);
    };
    check_identity(sys_of("vars: x1 x2 x3\nform deg=3: x1^3+x2^3+x3^3\n"), 7);
    check_identity(sys_of("vars: x1 x2\nform deg=1: x1+x2\n"), 3);
    check_identity(
        sys_of("vars: x1 x2 x3\nform deg=3: x1^3+x2^3+x3^3\nform deg=1: x1+x2+x3\n"), 5);
}

TEST_CASE("find_nonsingular_unit_solutions examples") {
    SUBCASE("linear form mod 5") {
        auto sys = sys_of("vars: x1 x2 x3\nform deg=1: x1+x2+x3\n");
        auto sols = find_nonsingular_unit_solutions(sys, 5, 1000000, 1);
        REQUIRE(sols.size() == 1);
        CHECK(sols[0] == std::vector<std::uint64_t>{1, 1, 3});
    }
    SUBCASE("diagonal cubic mod 7 has no unit solutions") {
        auto sys = sys_of("vars: x1 x2 x3\nform deg=3: x1^3+x2^3+x3^3\n");
        CHECK(find_nonsingular_unit_solutions(sys, 7, 1000000, 10).empty());
    }
    SUBCASE("six cubes mod 7 contains (1,1,1,3,3,3)") {
        auto sys = sys_of(
            "vars: x1 x2 x3 x4 x5 x6\nform deg=3: x1^3+x2^3+x3^3+x4^3+x5^3+x6^3\n");
        auto sols = find_nonsingular_unit_solutions(sys, 7, 2000000, 100000);
        std::vector<std::uint64_t> want{1, 1, 1, 3, 3, 3};
        CHECK(std::find(sols.begin(), sols.end(), want) != sols.end());
    }
}

TEST_CASE("hensel_lift: cube root of 2 mod 125") {
    // dehomogenized scalar case as a form with a frozen variable
    auto sys = sys_of("vars: x1 x2\nform deg=3: x1^3-2*x2^3\n");
    // oracle: exhaustive residue search mod 125
    std::vector<Int> roots;
    for (int z = 0; z < 125; ++z)
        if (((z * z * z) - 2) % 125 == 0) roots.push_back(z);
    REQUIRE(roots == std::vector<Int>{53});

    std::vector<std::uint64_t> seed{3, 1};
    std::vector<std::size_t> frozen{1};
    auto pt = hensel_lift(sys, seed, 5, 3, frozen);
    CHECK(pt.coords[0] == 53);
    CHECK(pt.coords[1] == 1);
    CHECK(pt.valuations[0] == 0);
}

TEST_CASE("hensel_lift: exact zero is a fixed point") {
    auto sys = sys_of("vars: x1 x2 x3\nform deg=1: x1+x2-2*x3\n");
    std::vector<std::uint64_t> seed{1, 1, 1};
    auto pt = hensel_lift(sys, seed, 3, 4);
    CHECK(pt.coords == ints({1, 1, 1}));
}

TEST_CASE("hensel_lift: six cubes seed lifts to precision 5") {
    auto sys =
        sys_of("vars: x1 x2 x3 x4 x5 x6\nform deg=3: x1^3+x2^3+x3^3+x4^3+x5^3+x6^3\n");
    std::vector<std::uint64_t> seed{1, 1, 1, 3, 3, 3};
    auto pt = hensel_lift(sys, seed, 7, 5);
    Int mod = int_pow(7, 5);
    auto residues = evaluate(sys, pt.coords, mod);
    for (const auto& r : residues) CHECK(r == 0);
    for (std::size_t i = 0; i < 6; ++i) CHECK(pt.coords[i] % 7 == seed[i]);
}

TEST_CASE("hensel_lift rejects bad seeds") {
    auto sys = sys_of("vars: x1\nform deg=3: x1^3\n");
    std::vector<std::uint64_t> zero_seed{0};
    CHECK_THROWS_AS(hensel_lift(sys, zero_seed, 5, 3), SingularSeed);
    auto lin = sys_of("vars: x1 x2\nform deg=1: x1+x2\n");
    std::vector<std::uint64_t> nonzero{1, 1};
    CHECK_THROWS_AS(hensel_lift(lin, nonzero, 5, 3), SingularSeed);
}

TEST_CASE("hensel soundness across found seeds") {
    auto sys =
        sys_of("vars: x1 x2 x3 x4 x5 x6\nform deg=3: x1^3+x2^3+x3^3+x4^3+x5^3+x6^3\n");
    auto seeds = find_nonsingular_unit_solutions(sys, 7, 2000000, 5);
    REQUIRE_FALSE(seeds.empty());
    Int mod = int_pow(7, 8);
    for (const auto& seed : seeds) {
        auto pt = hensel_lift(sys, seed, 7, 8);
        for (const auto& r : evaluate(sys, pt.coords, mod)) CHECK(r == 0);
        for (std::size_t i = 0; i < seed.size(); ++i) CHECK(pt.coords[i] % 7 == seed[i]);
    }
}

TEST_CASE("p-adic valuation decomposition reconstructs coordinates") {
    std::vector<Int> coords{52, 1, 0, 75, 8};
    auto pt = make_padic_point(2, 6, coords);
    Int mod = int_pow(2, 6);
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (pt.valuations[i] >= 6) {
            CHECK(pt.coords[i] == 0);
            continue;
        }
        Int rebuilt = int_pow(2, pt.valuations[i]) * pt.unit_parts[i] % mod;
        CHECK(rebuilt == pt.coords[i]);
        CHECK(pt.unit_parts[i] % 2 == 1);
    }
    CHECK(pt.valuations[2] == 6);  // zero coordinate flagged at full precision
}

TEST_CASE("find_padic_nonzero_solution examples") {
    SUBCASE("all-unit solution at p=3") {
        auto sys = sys_of("vars: x1 x2 x3\nform deg=1: x1-x2+x3\n");
        auto res = find_padic_nonzero_solution(sys, 3, 6);
        REQUIRE(res.point.has_value());
        CHECK(res.valuation_pattern == std::vector<unsigned>{0, 0, 0});
        CHECK(res.point->coords[0] % 3 == 1);
        CHECK(res.point->coords[1] % 3 == 2);
    }
    SUBCASE("the alternating equation needs valuations (2,0,0) at p=2") {
        auto sys = sys_of("vars: x1 x2 x3\nform deg=1: x1-4*x2+16*x3\n");
        auto res = find_padic_nonzero_solution(sys, 2, 6);
        REQUIRE(res.point.has_value());
        CHECK(res.valuation_pattern == std::vector<unsigned>{2, 0, 0});
        CHECK(res.point->coords[0] == 52);  // -12 mod 64
        Int mod = int_pow(2, 6);
        for (const auto& r : evaluate(sys, res.point->coords, mod)) CHECK(r == 0);
    }
    SUBCASE("odd-odd-odd obstruction forces one even coordinate") {
        auto sys = sys_of("vars: x1 x2 x3\nform deg=1: x1-x2+x3\n");
        auto res = find_padic_nonzero_solution(sys, 2, 6);
        REQUIRE(res.point.has_value());
        CHECK(res.valuation_pattern == std::vector<unsigned>{0, 0, 1});
        Int mod = int_pow(2, 6);
        for (const auto& r : evaluate(sys, res.point->coords, mod)) CHECK(r == 0);
    }
}

TEST_CASE("layered search reports budget exhaustion honestly") {
    auto sys = sys_of("vars: x1 x2 x3\nform deg=1: x1-4*x2+16*x3\n");
    PAdicSearchOptions opt;
    opt.seed_budget = 1;
    auto res = find_padic_nonzero_solution(sys, 2, 6, opt);
    CHECK_FALSE(res.point.has_value());
    CHECK_FALSE(res.exhausted);
}

TEST_CASE("layered search can exhaust a space with no solution") {
    // x1 = 0 has no solution with a finite 2-adic valuation below the cap
    auto sys = sys_of("vars: x1\nform deg=1: x1\n");
    auto res = find_padic_nonzero_solution(sys, 2, 6);
    CHECK_FALSE(res.point.has_value());
    CHECK(res.exhausted);
}

TEST_CASE("real_nonsingular_solution finds interior points") {
    SUBCASE("linear system") {
        auto sys = sys_of("vars: x1 x2 x3\nform deg=1: x1+x2-2*x3\n");
        auto res = real_nonsingular_solution(sys, 1e-8);
        REQUIRE(res.point.has_value());
        CHECK(res.residual < 1e-8);
        CHECK(res.sigma_min > 1e-8);
        CHECK(res.min_abs_coord > 1e-8);
        for (auto v : *res.point) CHECK(std::abs(v) < 1.0);
    }
    SUBCASE("diagonal cubic with tight tolerance") {
        auto sys = sys_of("vars: x1 x2 x3\nform deg=3: x1^3+x2^3+x3^3\n");
        auto res = real_nonsingular_solution(sys, 1e-9);
        REQUIRE(res.point.has_value());
        CHECK(res.residual < 1e-9);
        CHECK(res.min_abs_coord > 1e-9);
    }
    SUBCASE("odd systems are symmetric under global sign flip") {
        auto sys = sys_of(
            "vars: x1 x2 x3\nform deg=3: x1^3+x2^3+x3^3\nform deg=1: x1+x2-2*x3\n");
        std::vector<Int> minus{-1, -1, -1};
        auto flipped = scale_variables(sys, minus);
        auto forms = sys.forms_in_order();
        auto fforms = flipped.forms_in_order();
        for (std::size_t i = 0; i < forms.size(); ++i) {
            std::vector<Rat> c{-1};
            auto neg = linear_combination(std::span<const Form>(fforms[i], 1), c);
            CHECK(neg.form == *forms[i]);
        }
    }
}

TEST_CASE("real search reports failure when every solution pins a coordinate") {
    auto sys = sys_of("vars: x1 x2\nform deg=1: x1\n");
    RealSolveOptions opt;
    opt.max_restarts = 10;
    auto res = real_nonsingular_solution(sys, 1e-6, opt);
    CHECK_FALSE(res.point.has_value());
}

TEST_CASE("deterministic seeds give deterministic real solutions") {
    auto sys = sys_of("vars: x1 x2 x3\nform deg=1: x1+x2-2*x3\n");
    RealSolveOptions opt;
    opt.rng_seed = 42;
    auto a = real_nonsingular_solution(sys, 1e-8, opt);
    auto b = real_nonsingular_solution(sys, 1e-8, opt);
    REQUIRE(a.point.has_value());
    CHECK(*a.point == *b.point);
}
