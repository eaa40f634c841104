import math

import pytest

import oddforms as of

ALT = "vars: x1 x2 x3\nform deg=1: x1-4*x2+16*x3\n"
AP3 = "vars: x1 x2 x3\nform deg=1: x1+x2-2*x3\n"
CUBIC = "vars: x1 x2 x3\nform deg=3: x1^3+x2^3+x3^3\n"


def test_parse_and_evaluate():
    sys = of.parse_system(ALT)
    assert sys.nvars == 3
    assert sys.form_count == 1
    assert sys.total_degree == 1
    assert of.evaluate(sys, [-12, 1, 1]) == [0]
    assert of.evaluate(sys, [1, 1, 1], modulus=5) == [(1 - 4 + 16) % 5]
    round_trip = of.parse_system(str(sys))
    assert round_trip == sys


def test_parse_error():
    with pytest.raises(of.OddformsError):
        of.parse_system("vars: x1\nform deg=3: x1^2\n")


def test_point_counts_and_fourier():
    sys = of.parse_system(CUBIC)
    c = of.count_points(sys, 7)
    assert c.total == 55
    assert c.bound_satisfied
    total = sum(of.exponential_sum(sys, [a], 7) for a in range(7))
    assert abs(total.real - 7 * 55) < 1e-6


def test_ranks():
    sys = of.parse_system(CUBIC)
    f = sys.forms()[0]
    interval = of.schmidt_rank(f, height_bound=1)
    assert (interval.lower, interval.upper) == (2, 2)
    est = of.birch_rank([f])
    assert est.value == 3
    assert est.confidence == "exact-symbolic"


def test_hensel_lift_cube_root():
    sys = of.parse_system("vars: x1 x2\nform deg=3: x1^3-2*x2^3\n")
    pt = of.hensel_lift(sys, [3, 1], 5, 3, frozen=[1])
    assert pt.coords[0] == 53
    assert pow(53, 3, 125) == 2


def test_padic_search_and_scaling():
    sys = of.parse_system(ALT)
    assert of.detect_bad_primes(sys, p_max=10) == [2]
    point, pattern, _ = of.find_padic_nonzero_solution(sys, 2, 6)
    assert pattern == [2, 0, 0]
    plan = of.build_multipliers(sys, [2], precision=8)
    assert plan.multipliers == [4, 1, 1]
    ok, rows = of.verify_scaled_local(sys, plan, [2, 3, 5, 7], precision=8)
    assert ok and all(flag for _, flag in rows)


def test_counting_and_growth():
    sys = of.parse_system(AP3)
    assert of.almost_prime_count(sys, 10) == 16
    weighted = of.weighted_prime_count(sys, 5)
    assert weighted > 0
    slope, exponent, constant = of.growth_fit(
        [(100, 100 * 100), (1000, 1000 * 1000), (10000, 10000 * 10000)], 3, 1
    )
    assert abs(slope - 2.0) < 1e-9
    assert constant > 0


def test_regularization_roundtrip():
    sys = of.parse_system("vars: x1 x2 x3\nform deg=3: x1^3 + x1*x2^2 + x1*x3^2\n")
    reduced, j_f, cert_text = of.prepare_reduced_system(sys, growth_a=0, growth_b=0, growth_c=2)
    assert j_f == [0]
    assert reduced.form_count == 0
    assert "decompose deg=3" in cert_text


def test_pipeline(tmp_path):
    system_file = tmp_path / "ap3.system"
    system_file.write_text(AP3)
    config = f"system = {system_file.name}\nN = 100,200\np_max = 10\nseed = 7\n"
    ok, report = of.run_pipeline(config, str(tmp_path))
    assert ok
    assert "verdict: PASS" in report
    assert "counts:" in report
