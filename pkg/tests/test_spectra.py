from fractions import Fraction

import numpy as np
import pytest

from combsplit import cps, inflate, spectra
from combsplit.combs import dirac_comb, lattice_comb
from combsplit.spectra import (
    polarisation_zero_check,
    pp_intensity,
    riesz_coefficients,
    tm_eta,
    tm_eta_bruteforce,
    tm_pair_prediction,
    tm_signed_sequence,
)
from combsplit.zroot5 import SQRT5, TAU, FourierModulePoint


def test_eta_small_values():
    table = tm_eta(8)
    assert table[0] == 1
    assert table[1] == Fraction(-1, 3)
    assert table[2] == Fraction(-1, 3)
    assert table[3] == Fraction(1, 3)
    assert table[4] == Fraction(-1, 3)
    assert table[5] == 0
    assert abs(table[6]) <= 1 and table.values[0] == 1


def test_eta_recursion_matches_bruteforce():
    brute = tm_eta_bruteforce(64, 2**20)
    rec = tm_eta(64).as_floats()
    assert np.abs(rec - brute).max() <= 2e-3


def test_signed_sequence_prefix():
    # fixed point from the unbarred letter: + - - + - + + -
    assert tm_signed_sequence(8).tolist() == [1, -1, -1, 1, -1, 1, 1, -1]


def test_signed_sequence_matches_substitution():
    n = 4096
    tps = inflate.realize_geometric(inflate.thue_morse_rule(), "a", float(n))
    letters = np.zeros(n, dtype=np.int8)
    letters[tps.points["b"][:, 0][tps.points["b"][:, 0] < n]] = 1
    assert np.array_equal(1 - 2 * letters, tm_signed_sequence(n))


def test_riesz_coefficient_values():
    assert riesz_coefficients(1).coefficient(0) == 1
    assert riesz_coefficients(1).coefficient(1) == Fraction(-1, 2)
    for L in (2, 5, 9):
        assert riesz_coefficients(L).coefficient(0) == 1
    rz = riesz_coefficients(20)
    assert abs(rz.coefficient(1) - Fraction(-1, 3)) <= Fraction(1, 10**5)


def test_riesz_matches_eta_exactly_rational():
    rz = riesz_coefficients(20)
    eta = tm_eta(8)
    for m in range(9):
        assert abs(rz.coefficient(m) - eta[m]) <= Fraction(1, 100000)


def test_riesz_symmetry_and_level_contraction():
    rz = riesz_coefficients(10)
    for m in range(0, 9):
        assert rz.coefficient(m) == rz.coefficient(-m)
    for L in range(6, 13):
        prev = riesz_coefficients(L - 1)
        cur = riesz_coefficients(L)
        for m in range(0, 9):
            gap = abs(cur.coefficient_float(m) - prev.coefficient_float(m))
            assert gap <= 2.0 ** -(L - 3)


def test_riesz_positive_on_dyadic_grid():
    vals = riesz_coefficients(14).evaluate_dyadic(14)
    assert vals.min() >= -1e-9


def test_riesz_depth_cap():
    with pytest.raises(ValueError):
        riesz_coefficients(25)


def test_pair_prediction_values():
    assert tm_pair_prediction("a", "a", 0) == pytest.approx(0.5)
    assert tm_pair_prediction("a", "b", 0) == pytest.approx(0.0)
    assert tm_pair_prediction("a", "a", 1) == pytest.approx(1 / 6)
    assert tm_pair_prediction("b", "a", 3) == pytest.approx(0.25 * (1 - 1 / 3))
    with pytest.raises(ValueError):
        tm_pair_prediction("a", "c", 0)


def test_pp_intensity_zero_frequency_is_density():
    spec = cps.ModelSetSpec(cps.fibonacci_windows())
    rows = pp_intensity(
        spec, {"a": 1.0, "b": 1.0}, [FourierModulePoint(0, 0)]
    )
    amps = rows[0].amplitudes
    assert amps["a"].real == pytest.approx(1 / SQRT5)
    assert amps["b"].real == pytest.approx((TAU - 1) / SQRT5)
    assert rows[0].intensity == pytest.approx((TAU / SQRT5) ** 2)


def test_pp_intensity_nonnegative():
    spec = cps.ModelSetSpec(cps.fibonacci_windows())
    ks = cps.fourier_module(2.0, 2.0)
    rows = pp_intensity(spec, {"a": 1.0, "b": -0.5j}, ks)
    assert all(r.intensity >= 0 for r in rows)


def test_pp_intensity_respects_alphas():
    spec = cps.ModelSetSpec(cps.twisted_fibonacci_windows())
    alphas = {t: 0.5 for t in spec.windows}
    rows = pp_intensity(
        spec, {t: 1.0 for t in spec.windows}, [FourierModulePoint(0, 0)], alphas
    )
    # four types at half weight add up to the full chain density
    assert sum(rows[0].amplitudes.values()).real == pytest.approx(2 * TAU / SQRT5 / 2)


def test_polarisation_lattice_counting():
    z = lattice_comb(-1200, 1200)
    res_100 = polarisation_zero_check(z, z, "symmetric", 100.0, 1.0)
    assert res_100 == pytest.approx((201 / 200) ** 2 - 1, abs=1e-12)
    res_1000 = polarisation_zero_check(z, z, "symmetric", 1000.0, 1.0)
    assert res_1000 < res_100


def test_polarisation_empty_set():
    empty = dirac_comb(np.empty((0, 2), dtype=np.int64), (-10.0, 10.0))
    assert polarisation_zero_check(empty, empty, "symmetric", 10.0, 0.0) == 0.0


def test_polarisation_golden_chain():
    tps = inflate.realize_geometric(inflate.fibonacci_rule(), "a", 1000.0)
    comb = tps.comb()
    expected = (TAU / SQRT5) ** 2
    res = polarisation_zero_check(comb, comb, "one_sided", 1000.0, expected)
    assert res / expected <= 0.01


def test_decomposition_report_matches_predictions():
    # the full typed correlation splits into a flat periodic part plus the
    # signed-sequence part, each recovered by the generic splitting kernel
    from combsplit.combs import lattice_comb, linear_combine
    from combsplit.eberlein import decomposition_report

    n = 2**18
    tps = inflate.realize_geometric(inflate.thue_morse_rule(), "a", float(n))
    half = lattice_comb(0, n, 0.5)
    splits = {
        t: (half, linear_combine([(1.0, tps.comb(t)), (-1.0, half)]))
        for t in ("a", "b")
    }
    eta = tm_eta(16)
    for a, b in (("a", "a"), ("a", "b")):
        rep = decomposition_report(
            tps.comb(a), tps.comb(b), splits[a], splits[b],
            "one_sided", float(n), 16.0,
            module_k=[0.25, 1 / 3],
        )
        assert rep.bilinear_residual <= 1e-12
        assert rep.cross_sup <= 2e-3
        sign = 1.0 if a == b else -1.0
        for m in range(-16, 17):
            got = complex(rep.zero_part.atom((m, 0))).real
            want = 0.25 * sign * float(eta[m])
            assert got == pytest.approx(want, abs=2e-3)
            s_got = complex(rep.s_part.atom((m, 0))).real
            assert s_got == pytest.approx(0.25, abs=2e-3)
        assert rep.zero_fb_max < 0.05
