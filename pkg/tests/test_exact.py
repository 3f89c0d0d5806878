import math
from collections import Counter
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from brute import dyck_walks, motzkin_walks, schroder_walks, walk_height
from leapgen.exact import (
    core_laws_exact,
    distortion,
    dyck_height_dp,
    dyck_height_table,
    gaussian_core_density,
    generic_core_law,
    height_law,
    joint_counts,
    motzkin_counts,
    motzkin_expansion,
    q_exact,
    q_identity,
    tv_exact,
    tv_height,
    tv_rej_exact,
)
from leapgen.families import get_family
from leapgen.leap import catalan, get_scheme
from leapgen.series import TruncatedSeries

MOTZKIN = get_scheme("motzkin")


# -- counts against enumeration --------------------------------------------------------

def test_motzkin_row_four():
    assert joint_counts(MOTZKIN, 4) == [1, 6, 2, 0, 0]
    assert motzkin_counts(4).c[4] == 9


@pytest.mark.parametrize("n", range(0, 11))
def test_motzkin_joint_counts_by_enumeration(n):
    by_k = Counter(sum(1 for s in w if s == 1) for w in motzkin_walks(n))
    assert joint_counts(MOTZKIN, n)[: n // 2 + 1] == [by_k[k] for k in range(n // 2 + 1)]


@pytest.mark.parametrize("n", range(1, 8))
def test_schroder_joint_counts_by_enumeration(n):
    by_k = Counter(sum(1 for s in w if s == 1) for w in schroder_walks(n))
    assert joint_counts(get_scheme("schroder"), n) == [by_k[k] for k in range(n + 1)]


def test_trivial_count_rows():
    t = motzkin_counts(60)
    for n in range(61):
        row = joint_counts(MOTZKIN, n)
        assert row[0] == 1 and sum(row) == t.c[n]
        if n % 2 == 0:
            assert row[n // 2] == catalan(n // 2)


def test_weighted_counts_carry_the_weight():
    spec = get_scheme("motzkin:2")
    for n in range(7):
        by_k = Counter()
        for w in motzkin_walks(n):
            by_k[sum(1 for s in w if s == 1)] += 2 ** sum(1 for s in w if s == 0)
        assert joint_counts(spec, n)[: n // 2 + 1] == [by_k[k] for k in range(n // 2 + 1)]


# -- exact identities and distortion ----------------------------------------------------------

@pytest.mark.parametrize("n", list(range(1, 60)) + [150, 301])
def test_exact_identities(n):
    pi, lp, d = core_laws_exact(MOTZKIN, n)
    assert sum(joint_counts(MOTZKIN, n)) == motzkin_counts(n).c[n]
    assert sum(pi[k] * d[k] for k in pi) == 1
    assert sum(lp.values()) == 1
    assert q_identity(MOTZKIN, n) == q_exact(MOTZKIN, n)


def test_distortion_singleton_and_errors():
    assert distortion(MOTZKIN, 1, 0) == 1
    with pytest.raises(ValueError):
        distortion(MOTZKIN, 10, -1)
    with pytest.raises(ValueError):
        distortion(get_scheme("schroder"), 10, 2)


def test_distortion_by_definition():
    # d_{n,k} = c_n rho^n / (q_n D a_k B^k)
    n, k = 12, 3
    expect = Fraction(motzkin_counts(n).c[n], 3 ** n) / (q_exact(MOTZKIN, n) * Fraction(3, 2)
                                                         * catalan(k) * Fraction(1, 4) ** k)
    assert distortion(MOTZKIN, n, k) == expect


def test_distortion_increases_near_the_mode():
    n = 400
    _, _, d = core_laws_exact(MOTZKIN, n)
    ks = range(int(n / 3) - 20, int(n / 3) + 21)
    vals = [d[k] for k in ks]
    assert all(a < b for a, b in zip(vals, vals[1:]))


# -- total variation -----------------------------------------------------------------------

def test_tv_small_cases():
    assert tv_exact(MOTZKIN, 1) == 0
    for n in range(1, 60):
        assert 0 <= tv_exact(MOTZKIN, n) <= 1


def test_tv_rational_and_float_paths_agree():
    for n in (300, 301, 302):
        exact = tv_exact(MOTZKIN, n, "rational")
        assert abs(float(exact) - tv_exact(MOTZKIN, n, "float")) < 1e-12 * float(exact)


def test_tv_bad_path():
    with pytest.raises(ValueError):
        tv_exact(MOTZKIN, 10, "decimal")


@pytest.mark.parametrize("a", [Fraction(1, 2), Fraction(1, 3)])
def test_rej_order_zero_is_leap(a):
    for n in (10, 40, 97):
        r = tv_rej_exact(MOTZKIN, n, 0, a)
        assert abs(r.value - float(tv_exact(MOTZKIN, n))) <= max(r.error, 1e-15)
        assert abs(r.W - float(a)) < 1e-15


def test_rej_beats_plain_leap():
    for n in range(20, 121):
        assert tv_rej_exact(MOTZKIN, n, 1).value < float(tv_exact(MOTZKIN, n))


def test_rej_float_path_matches_mp():
    mp = tv_rej_exact(MOTZKIN, 400, 1, path="mp")
    fl = tv_rej_exact(MOTZKIN, 400, 1, path="float")
    assert abs(mp.value - fl.value) < 1e-12
    assert mp.error < 1e-40


def test_higher_orders_are_more_uniform():
    vals = [tv_rej_exact(MOTZKIN, 500, r).value for r in (0, 1, 2, 3)]
    assert vals[0] > vals[1] > vals[2] > vals[3]


# -- heights --------------------------------------------------------------------------------------

def test_dyck_height_small_tables():
    t = dyck_height_table(3)
    assert t[2] == (0, 1, 1)
    assert t[3] == (0, 1, 3, 1)


@pytest.mark.parametrize("k", range(0, 9))
def test_dyck_heights_by_enumeration(k):
    brute = Counter(walk_height(w) for w in dyck_walks(k))
    row = dyck_height_table(k)[k]
    assert list(row) == [brute[h] for h in range(len(row))]
    assert sum(row) == catalan(k)
    assert k == 0 or row[0] == 0


def test_table_matches_ballot_recursion():
    assert [list(r) for r in dyck_height_table(14)] == dyck_height_dp(14)


def test_height_law_two():
    assert height_law(2).probs == {0: Fraction(1, 2), 1: Fraction(1, 2)}


@pytest.mark.parametrize("n", range(1, 11))
def test_height_laws_by_enumeration(n):
    walks = list(motzkin_walks(n))
    _, _, d = core_laws_exact(MOTZKIN, n)
    uni, leap = Counter(), Counter()
    for w in walks:
        h = walk_height(w)
        uni[h] += Fraction(1, len(walks))
        leap[h] += d[sum(1 for s in w if s == 1)] / len(walks)
    assert height_law(n, "uniform").probs == dict(uni)
    assert height_law(n, "leap").probs == dict(leap)
    assert sum(height_law(n, "leap").probs.values()) == 1


def test_height_distance_below_core_distance():
    for n in range(2, 80):
        assert tv_height(n) <= tv_exact(MOTZKIN, n)
    assert float(tv_height(60, "rej")) <= float(tv_height(60))


# -- generic core laws ------------------------------------------------------------------------------

def test_polya_two():
    assert generic_core_law(get_scheme("polya"), 2).probs == {2: 1.0}


def _series_core_law(name, n, dist):
    fam = get_family(name)
    b = fam.b_series(n)
    spec = get_scheme(name)
    power = TruncatedSeries([Fraction(1)] + [Fraction(0)] * n)
    out = {}
    with mpmath.workdps(40):
        rho, B = spec.rho, spec.b_rho
        for k in range(1, n + 1):
            power = power * b
            c = Fraction(power[n])
            if not c or k not in spec.support:
                continue
            ak = fam.core_coeff(k) if dist == "uniform" else 1
            w = mpmath.mpf(c.numerator) / c.denominator * mpmath.mpf(Fraction(ak).numerator) / Fraction(ak).denominator
            if dist == "leap":
                w = w * rho ** n / B ** k
            out[k] = w
        tot = mpmath.fsum(out.values())
        return {k: float(v / tot) for k, v in out.items()}


@pytest.mark.parametrize("name", ["polya", "phylo", "mobile:3", "schroder-mobile"])
@pytest.mark.parametrize("dist", ["uniform", "leap"])
def test_generic_law_matches_series_powers(name, dist):
    n = 13 if name == "mobile:3" else 12
    law = generic_core_law(get_scheme(name), n, dist)
    ref = _series_core_law(name, n, dist)
    assert set(law.probs) == set(ref)
    assert max(abs(law[k] - ref[k]) for k in ref) < 1e-12
    assert abs(law.total - 1) < 1e-9


@pytest.mark.parametrize("name", ["polya", "phylo"])
def test_generic_law_unimodal_near_mean(name):
    spec = get_scheme(name)
    law = generic_core_law(spec, 200)
    p = law.as_array()
    mode = int(np.argmax(p))
    # far tails carry a parity ripple from the gaps of B near z = 0
    bulk = np.flatnonzero(p >= 1e-2 * p[mode])
    lo, hi = bulk[0], bulk[-1]
    assert np.all(np.diff(p[lo: mode + 1]) >= 0) and np.all(np.diff(p[mode: hi + 1]) <= 0)
    assert abs(mode - 200 / spec.mu) <= 3


@pytest.mark.parametrize("name", ["polya", "phylo"])
def test_generic_law_is_locally_gaussian(name):
    spec = get_scheme(name)
    n = 500
    law = generic_core_law(spec, n)
    ks = np.array(law.support())
    ref = gaussian_core_density(spec, n, ks)
    t = (ks - n / spec.mu) / (spec.sigma * math.sqrt(n / spec.mu ** 3))
    p = np.array([law[k] for k in ks])
    core = np.abs(t) <= 2
    assert np.max(np.abs(p[core] / ref[core] - 1)) < 0.15


def test_generic_law_size_limit():
    with pytest.raises(ValueError, match="500"):
        generic_core_law(get_scheme("polya"), 501)


# -- expansion coefficients ----------------------------------------------------------------------------

def test_motzkin_expansion_coefficients():
    a1, c1 = motzkin_expansion()
    assert abs(a1 - Fraction(-9, 8)) < 1e-6
    assert abs(c1 - Fraction(-39, 16)) < 1e-6
    assert MOTZKIN.expansion["a1"] == Fraction(-9, 8)
