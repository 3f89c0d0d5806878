"""Release checks: exact identities, small-size uniformity and moment checks."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import chisquare

from . import _kernels as K
from .boltzmann import component_sizes
from .campaign import make_rng
from .cores import cayley_uniform, dyck_uniform, phylo_uniform
from .exact import core_laws_exact, dyck_height_dp, dyck_height_table, joint_counts, q_identity
from .leap import get_scheme, leap_core_sizes, motzkin
from .series import (
    TruncatedSeries,
    boltzmann_moments,
    q_series,
    solve_phylo_series,
    solve_polya_series,
)

POLYA = [0, 1, 1, 2, 4, 9, 20, 48, 115, 286, 719, 1842, 4766]
PHYLO = [0, 1, 1, 1, 2, 3, 6, 11, 23, 46, 98, 207, 451]


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}" + (f"  {self.detail}" if self.detail else "")


def _series_checks():
    out = []
    for name, solve, ref in (("polya", solve_polya_series, POLYA), ("phylo", solve_phylo_series, PHYLO)):
        a = list(solve(12).coeffs)
        b = list(solve(12, method="iterate").coeffs)
        out.append(Check(f"{name} series", a == ref and b == ref, f"{a[-3:]}"))
    return out


def _motzkin_checks(spec):
    n_max = 150
    q = q_series(spec, n_max, exact=True)
    bad = []
    for n in range(1, n_max + 1):
        pi, lp, _ = core_laws_exact(spec, n)
        if sum(pi.values()) != 1 or sum(lp.values()) != 1 or q[n] != q_identity(spec, n):
            bad.append(n)
    out = [Check("motzkin exact identities n<=150", not bad, f"failures {bad[:5]}" if bad else "")]
    qf = q_series(spec, 1000, exact=False)[1000]
    ok = abs(qf - 1 / 3) <= 1e-6 and spec.b_rho == Fraction(1, 4)
    out.append(Check("q_n limit and criticality", ok, f"q_1000={qf:.12f} B(rho)={float(spec.b_rho):.12f}"))
    b = TruncatedSeries([Fraction(c) for c in get_scheme("motzkin").b_coeffs(200)])
    m = boltzmann_moments(b, 1 / 3)
    ok = abs(float(m.mu) - 3) < 1e-9 and abs(float(m.sigma) ** 2 - 1.5) < 1e-9 and abs(spec.mu - 3) < 1e-12
    out.append(Check("motzkin moments", ok, f"mu={float(m.mu):.9f} sigma2={float(m.sigma) ** 2:.9f}"))
    return out


def _uniformity_checks(seed):
    rng = make_rng(seed, 101)
    out = []
    c = Counter(dyck_uniform(3, rng).to_string() for _ in range(50000))
    p = chisquare(list(c.values())).pvalue if len(c) == 5 else 0.0
    out.append(Check("dyck k=3 uniform", len(c) == 5 and p > 1e-3, f"p={p:.3f}"))
    c = Counter(int(K.canonical_code(cayley_uniform(3, rng).parent)) for _ in range(45000))
    obs = sorted(c.values())
    p = chisquare(obs, [15000, 30000]).pvalue if len(c) == 2 else 0.0
    out.append(Check("cayley k=3 shapes 3/9, 6/9", p > 1e-3, f"p={p:.3f}"))
    cnt = Counter()
    for _ in range(45000):
        t, lab = phylo_uniform(4, rng, labels=True)
        cnt[_labeled_code(t.parent, lab)] += 1
    p = chisquare(list(cnt.values())).pvalue if len(cnt) == 15 else 0.0
    out.append(Check("phylo k=4 labeled uniform", len(cnt) == 15 and p > 1e-3, f"p={p:.3f}"))
    return out


def _labeled_code(parent, labels):
    n = len(parent)
    kids = [[] for _ in range(n)]
    for i in range(1, n):
        kids[parent[i]].append(i)
    code = [""] * n
    for v in range(n - 1, -1, -1):
        code[v] = str(labels[v]) if not kids[v] else "(" + ",".join(sorted(code[c] for c in kids[v])) + ")"
    return code[0]


def _leap_checks(seed):
    spec = get_scheme("motzkin")
    rng = make_rng(seed, 202)
    n, m = 10, 100000
    ks = leap_core_sizes(spec, n, m, rng).core_sizes
    _, lp, _ = core_laws_exact(spec, n)
    emp = np.bincount(ks, minlength=n // 2 + 1) / m
    tv = 0.5 * sum(abs(emp[k] - float(lp.get(k, 0))) for k in range(emp.size))
    return [Check("motzkin n=10 leap core law", tv < 0.01, f"tv={tv:.4f}")]


def _boltzmann_checks(seed):
    out = []
    for name in ("polya", "phylo", "mobile:3", "schroder-mobile"):
        spec = get_scheme(name)
        rng = make_rng(seed, 303)
        m = 100000
        sizes = component_sizes(name, m, rng)
        law = spec.b_law(8)
        z = []
        for s in range(1, 9):
            p = float(law[s])
            z.append((np.count_nonzero(sizes == s) - m * p) / np.sqrt(m * p * (1 - p)) if p > 0 else 0.0)
        zmax = float(np.max(np.abs(z)))
        out.append(Check(f"{name} B size law", zmax < 4.5, f"max|z|={zmax:.2f}"))
    return out


def _height_checks():
    ok = all(list(a) == b for a, b in zip(dyck_height_table(10), dyck_height_dp(10)))
    return [Check("dyck height table", ok)]


def run_selftest(seed: int = 0, perturb_rho: float | None = None) -> list[Check]:
    if perturb_rho:
        spec = motzkin(rho=Fraction(1, 3) * (1 + Fraction(perturb_rho)))
    else:
        spec = get_scheme("motzkin")
    checks = []
    checks += _series_checks()
    checks += _motzkin_checks(spec)
    checks += _height_checks()
    checks += _uniformity_checks(seed)
    checks += _leap_checks(seed)
    checks += _boltzmann_checks(seed)
    joint = joint_counts(get_scheme("motzkin"), 4)
    checks.append(Check("motzkin n=4 joint counts", joint[:3] == [1, 6, 2] and sum(joint) == 9))
    return checks
