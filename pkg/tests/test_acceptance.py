"""Acceptance criteria 1-10.  Each test prints one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are written to the
terminal even when output capture is on.
"""
import math
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from brute import phylo_trees, polya_trees
from conftest import empirical_tv, zscores
from leapgen.boltzmann import component_sizes
from leapgen.campaign import make_rng
from leapgen.exact import (
    core_laws_exact,
    generic_core_law,
    joint_counts,
    motzkin_counts,
    q_exact,
    q_identity,
    tv_exact,
    tv_height,
    tv_rej_exact,
)
from leapgen.families import get_family
from leapgen.leap import CLASSES, get_scheme, leap_core_sizes, leap_sample, rejection_weight
from leapgen.series import rho_from_ratios

MOTZKIN = get_scheme("motzkin")
TV_CONST = 0.42314
REJ_CONST = 0.09074


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nC{number} {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail
    return emit


def test_c1_exact_tv_constant(report):
    t0 = time.perf_counter()
    vals = [math.sqrt(n) * float(tv_exact(MOTZKIN, n, "rational")) for n in (999, 1000, 1001)]
    mean = sum(vals) / 3
    secs = time.perf_counter() - t0
    rel = abs(mean - TV_CONST) / TV_CONST
    report(1, rel < 0.02 and secs < 300,
           f"mean sqrt(n) d_TV = {mean:.5f} (rel. dev. {rel:.4f}, limit 0.02), {secs:.1f}s")


def test_c2_accelerated_tv_constant(report):
    t0 = time.perf_counter()
    res = [tv_rej_exact(MOTZKIN, n, 1, Fraction(1, 2), path="float") for n in (1999, 2000, 2001)]
    mean = sum(n * r.value for n, r in zip((1999, 2000, 2001), res)) / 3
    rel = abs(mean - REJ_CONST) / REJ_CONST
    # the float path against the high-precision path at n = 1000
    fl = tv_rej_exact(MOTZKIN, 1000, 1, path="float").value
    mp = tv_rej_exact(MOTZKIN, 1000, 1, path="mp").value
    digits = abs(fl - mp) / mp
    plain = abs(tv_exact(MOTZKIN, 1000, "float") - float(tv_exact(MOTZKIN, 1000))) / float(tv_exact(MOTZKIN, 1000))
    # normalising constant and acceptance rate at n = 2000
    W = res[1].W
    accept = float(q_exact(MOTZKIN, 2000)) * W
    secs = time.perf_counter() - t0
    ok = rel < 0.05 and digits < 1e-12 and plain < 1e-12 and abs(accept - 1 / 6) < 0.01 / 6 and secs < 600
    report(2, ok, f"mean n d_rej = {mean:.5f} (rel. dev. {rel:.4f}, limit 0.05); float vs mp at n=1000 "
                  f"{digits:.1e}, plain {plain:.1e}; W_2000 = {W:.5f}, q W = {accept:.5f}; {secs:.1f}s")


def test_c3_exact_identities(report):
    counts = motzkin_counts(1000)  # raises if the recurrence disagrees
    bad = []
    for n in range(1, 1001):
        joint = joint_counts(MOTZKIN, n)
        pi, lp, d = core_laws_exact(MOTZKIN, n)
        if sum(joint) != counts.c[n]:
            bad.append((n, "sum c_nk"))
        if sum(pi[k] * d[k] for k in pi) != 1:
            bad.append((n, "sum pi d"))
        if q_identity(MOTZKIN, n) != q_exact(MOTZKIN, n):
            bad.append((n, "q_n"))
    report(3, not bad, f"three identities for n = 1..1000, failures: {bad[:5]}")


def test_c4_success_probability(report):
    rng = make_rng(401)
    b = leap_core_sizes(MOTZKIN, 1000, 33_334, rng)
    trials = int(b.trials.sum())
    q = float(q_exact(MOTZKIN, 1000))
    rate = len(b.trials) / trials
    z = (rate - q) / math.sqrt(q * (1 - q) / trials)
    gap = abs(q_exact(MOTZKIN, 1000) - Fraction(1, 3))
    report(4, abs(z) < 4 and gap <= Fraction(1, 10 ** 6),
           f"rate {rate:.5f} over {trials} trials vs q_n {q:.8f} (z = {z:.2f}); |q_n - 1/3| = {float(gap):.1e}")


def test_c5_end_to_end_leap_law(report):
    rng = make_rng(501)
    _, lp, _ = core_laws_exact(MOTZKIN, 10)
    ks = leap_core_sizes(MOTZKIN, 10, 10 ** 6, rng).core_sizes
    tv_leap = empirical_tv(ks, {k: float(v) for k, v in lp.items()})
    with mpmath.workdps(40):
        half = mpmath.mpf(1) / 2
        w = {k: rejection_weight(MOTZKIN, 10, k, 1, half, mp=True) for k in lp}
        L = {k: mpmath.mpf(v.numerator) / v.denominator for k, v in lp.items()}
        W = mpmath.fsum(L[k] * w[k] for k in L)
        rej_law = {k: float(L[k] * w[k] / W) for k in L}
    ks = leap_core_sizes(MOTZKIN, 10, 10 ** 6, rng, r=1, a=0.5).core_sizes
    tv_rej = empirical_tv(ks, rej_law)
    report(5, tv_leap < 0.005 and tv_rej < 0.005, f"TV leap {tv_leap:.5f}, TV rej {tv_rej:.5f} (limit 0.005)")


def test_c6_series_coefficients(report):
    ok = True
    for name, oracle in (("polya", polya_trees), ("phylo", phylo_trees)):
        s = get_family(name).series(12)
        ok &= list(s)[1:] == [len(oracle(n)) for n in range(1, 13)]
    est = {name: round(rho_from_ratios(list(get_family(name).series(200))), 3) for name in ("polya", "phylo")}
    ok &= est == {"polya": 0.338, "phylo": 0.403}
    report(6, ok, f"series match enumeration for n <= 12; ratio estimates {est}")


def test_c7_tree_leap_laws(report):
    rng = make_rng(701)
    out = {}
    for name in ("polya", "phylo"):
        spec = get_scheme(name)
        law = generic_core_law(spec, 100, dist="leap")
        ks = leap_core_sizes(spec, 100, 10 ** 6, rng).core_sizes
        out[name] = empirical_tv(ks, law.probs)
    report(7, max(out.values()) < 0.01, "TV at n=100 over 10^6 samples: "
           + ", ".join(f"{k} {v:.5f}" for k, v in out.items()) + " (limit 0.01)")


def _b_law(name, N):
    spec = get_scheme(name)
    if spec.kind == "walk":
        return [float(v) for v in spec.b_law(N)]
    fam = get_family(name)
    with mpmath.workdps(30):
        b = fam.b_series(N)
        return [float(fam.rho ** n * mpmath.mpf(Fraction(c).numerator) / Fraction(c).denominator / fam.b_at_rho)
                for n, c in enumerate(b)]


def test_c8_boltzmann_size_laws(report):
    rng = make_rng(801)
    worst = {}
    for name in CLASSES:
        law = _b_law(name, 10)
        sizes = component_sizes(name, 10 ** 6, rng)
        obs = np.bincount(sizes[sizes <= 10], minlength=11)
        z = zscores(obs[1:], 10 ** 6, law[1:])
        worst[name] = float(np.max(np.abs(z)))
    report(8, max(worst.values()) < 4, "max |z| over n <= 10: "
           + ", ".join(f"{k} {v:.2f}" for k, v in worst.items()) + " (limit 4)")


def _mean_ratio(spec, small, big, blocks, rng):
    """Mean wall time at 10^6 over mean at 10^5, sizes interleaved block by block."""
    leap_sample(spec, 1000, rng)
    ts, tb = [], []
    for _ in range(blocks):
        for _ in range(small):
            t0 = time.perf_counter()
            leap_sample(spec, 10 ** 5, rng)
            ts.append(time.perf_counter() - t0)
        for _ in range(big):
            t0 = time.perf_counter()
            leap_sample(spec, 10 ** 6, rng)
            tb.append(time.perf_counter() - t0)
    return float(np.mean(tb) / np.mean(ts)), len(ts), len(tb)


def test_c9_linear_scaling(report):
    rng = make_rng(901)
    m_ratio, m_s, m_b = _mean_ratio(MOTZKIN, 8, 2, 50, rng)
    p_ratio, p_s, p_b = _mean_ratio(get_scheme("polya"), 5, 1, 40, rng)
    t0 = time.perf_counter()
    big = leap_sample(get_scheme("polya"), 10 ** 7, rng)
    secs = time.perf_counter() - t0
    ok = 8 <= m_ratio <= 13 and 8 <= p_ratio <= 13 and big.object.size == 10 ** 7
    report(9, ok, f"motzkin ratio {m_ratio:.2f} ({m_s}/{m_b} samples), polya ratio {p_ratio:.2f} "
                  f"({p_s}/{p_b} samples), polya n=10^7 in {secs:.1f}s")


def test_c10_height_law_distance(report):
    rows = []
    ok = True
    for n in range(200, 1001, 100):
        dh = float(tv_height(n))
        d = float(tv_exact(MOTZKIN, n))
        rows.append(f"{n}:{n * dh:.4f}")
        ok &= 0.3 < n * dh < 1.0 and dh <= d
    report(10, ok, "n d_height: " + " ".join(rows) + " (bracket (0.3, 1.0), and below d_n)")
