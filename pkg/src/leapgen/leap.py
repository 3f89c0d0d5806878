"""Leap generators for composition schemes C = D x A(B).

A trial draws an optional D-part and then B-components until the total
size reaches n.  It succeeds when the size is hit exactly and the number of
components k is a possible core size; the core is then drawn uniformly
among objects of size k and its atoms are substituted by the components.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import mpmath
import numpy as np

from . import _kernels as K
from .boltzmann import PrimitiveParams, primitive_params
from .cores import core_sampler
from .families import Support, get_family
from .objects import BComponent, ComposedObject, LatticeWalk, RootedTree
from .series import DPS, boltzmann_moments

DEFAULT_MAX_TRIALS = 10 ** 9
_EMPTY = np.empty(0, np.float64)


class TrialCapError(RuntimeError):
    pass


def catalan(k: int) -> int:
    return math.comb(2 * k, k) // (k + 1)


@dataclass(frozen=True, eq=False)
class SchemeSpec:
    """Everything the samplers and the exact analysis need about one scheme."""
    name: str
    kind: str                      # "walk" or "tree"
    rho: object                    # Fraction when exact, else mpf
    mu: float
    sigma: float
    s: Fraction
    support: Support               # core sizes k with a_k != 0
    size_support: Support          # sizes n with c_n != 0
    exact: bool
    b_rho: object
    d_rho: object = None
    weight: Optional[float] = None
    expansion: dict = field(default_factory=dict)   # {"a1": .., "c1": ..}
    core: Callable = None
    a_coeff: Callable = None       # exact a_k = |A_k| (walks) or |A_k|/k! (trees)
    b_coeffs: Callable = None      # N -> [b_0..b_N]
    d_coeffs: Callable = None
    b_law: Callable = None         # N -> [rho^m b_m / B(rho)]
    d_law: Callable = None
    params: Optional[PrimitiveParams] = None
    walk: tuple = ()               # (p, pd, base) for walk kernels

    def __post_init__(self):
        if not (self.mu > 0 and self.sigma > 0):
            raise ValueError(f"{self.name}: moments must be positive")
        if self.support.period < 1:
            raise ValueError("period must be at least 1")
        for k in range(21):
            if (self.a_coeff(k) != 0) != (k in self.support):
                raise ValueError(f"{self.name}: support descriptor disagrees with a_{k}")

    @property
    def has_d(self) -> bool:
        return self.d_rho is not None

    @property
    def period(self) -> int:
        return self.support.period

    def mu_mp(self):
        return _frac_mp(self.expansion.get("mu", self.mu))

    def sigma_mp(self):
        v = self.expansion.get("sigma2")
        return mpmath.sqrt(_frac_mp(v)) if v is not None else mpmath.mpf(self.sigma)

    def check_size(self, n: int) -> None:
        if n < 1 or n not in self.size_support:
            raise ValueError(f"{self.name} has no object of size {n}")


def _frac_mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


# --------------------------------------------------------------------------
# scheme factories

def motzkin(u=1, rho=None) -> SchemeSpec:
    """Motzkin walks: Dyck core, B = (Z Seq Z)^2, D = Seq Z.

    ``u`` weights every flat step; u = 1 is the plain uniform case.
    ``rho`` overrides the singularity 1/(2+u) (only useful to test that
    the checks notice a wrong value).
    """
    u = Fraction(u)
    if u <= 0:
        raise ValueError("weight must be positive")
    rho = 1 / (2 + u) if rho is None else Fraction(rho)
    p = u * rho                               # geometric parameter of a flat run
    b_rho = rho ** 2 / (1 - p) ** 2           # = 1/4
    d_rho = 1 / (1 - p)
    mu = 2 / (1 - p)
    var = 2 * p / (1 - p) ** 2

    def b_coeffs(N):
        return [Fraction(0)] + [(m - 1) * u ** (m - 2) if m >= 2 else Fraction(0) for m in range(1, N + 1)]

    def d_coeffs(N):
        return [u ** m for m in range(N + 1)]

    def b_law(N):
        return [c * rho ** m / b_rho for m, c in enumerate(b_coeffs(N))]

    def d_law(N):
        return [c * rho ** m / d_rho for m, c in enumerate(d_coeffs(N))]

    exp = {"mu": mu, "sigma2": var}
    if u == 1 and rho == Fraction(1, 3):
        exp.update(a1=Fraction(-9, 8), c1=Fraction(-39, 16))
    return SchemeSpec(
        name="motzkin", kind="walk", rho=rho, mu=float(mu), sigma=math.sqrt(var),
        s=Fraction(-1, 2), support=Support(0, 1, 0), size_support=Support(0, 1, 0),
        exact=True, b_rho=b_rho, d_rho=d_rho, weight=None if u == 1 else float(u),
        expansion=exp, core=core_sampler("motzkin"), a_coeff=catalan,
        b_coeffs=b_coeffs, d_coeffs=d_coeffs, b_law=b_law, d_law=d_law,
        walk=(float(p), float(p), 2))


def schroder() -> SchemeSpec:
    """Schroder walks: Dyck core, B = Z Seq(Z)^2, D = Seq Z, rho = 3 - 2 sqrt 2."""
    with mpmath.workdps(DPS):
        rho = 3 - 2 * mpmath.sqrt(2)
        b_rho = rho / (1 - rho) ** 2
        d_rho = 1 / (1 - rho)
        mu = (1 + rho) / (1 - rho)
        var = 2 * rho / (1 - rho) ** 2

        def b_coeffs(N):
            return [0] + list(range(1, N + 1))

        def d_coeffs(N):
            return [1] * (N + 1)

        def b_law(N):
            with mpmath.workdps(DPS):
                return [c * rho ** m / b_rho for m, c in enumerate(b_coeffs(N))]

        def d_law(N):
            with mpmath.workdps(DPS):
                return [rho ** m / d_rho for m in range(N + 1)]

    return SchemeSpec(
        name="schroder", kind="walk", rho=rho, mu=float(mu), sigma=float(mpmath.sqrt(var)),
        s=Fraction(-1, 2), support=Support(0, 1, 0), size_support=Support(0, 1, 0),
        exact=False, b_rho=b_rho, d_rho=d_rho, expansion={"mu": mu, "sigma2": var},
        core=core_sampler("schroder"), a_coeff=catalan, b_coeffs=b_coeffs, d_coeffs=d_coeffs,
        b_law=b_law, d_law=d_law, walk=(float(rho), float(rho), 1))


def tree_scheme(name: str) -> SchemeSpec:
    """Polya trees, phylogenetic trees, k-ary mobiles or Schroder mobiles."""
    fam = get_family(name)
    with mpmath.workdps(DPS):
        rho = fam.rho
        mom = boltzmann_moments(fam.b_closed_form(), rho, name=f"B[{name}]")
    sup = fam.support
    size_sup = Support(1, sup.period, 1)
    return SchemeSpec(
        name=name, kind="tree", rho=rho, mu=float(mom.mu), sigma=float(mom.sigma), s=fam.s,
        support=sup, size_support=size_sup, exact=False, b_rho=fam.b_at_rho,
        expansion={"mu": mom.mu, "sigma2": mom.sigma ** 2}, core=core_sampler(name),
        a_coeff=fam.core_coeff, b_coeffs=lambda N: fam.b_series(N, exact=True).coeffs,
        b_law=fam.b_law, params=primitive_params(name))


@lru_cache(maxsize=None)
def get_scheme(name: str) -> SchemeSpec:
    """Scheme by class id: motzkin[:u], schroder, polya, phylo, mobile:k, schroder-mobile."""
    if name == "motzkin":
        return motzkin()
    if name.startswith("motzkin:"):
        return motzkin(Fraction(name.split(":", 1)[1]))
    if name == "schroder":
        return schroder()
    if name in ("polya", "phylo", "schroder-mobile") or name.startswith("mobile:"):
        return tree_scheme(name)
    raise KeyError(f"unknown class {name!r}")


CLASSES = ("motzkin", "schroder", "polya", "phylo", "mobile:3", "mobile:4", "schroder-mobile")


# --------------------------------------------------------------------------
# rejection weights

def p_inf(spec: SchemeSpec, i: int, t, mp: bool = False):
    """Correction polynomials of the distortion factor (i = 1, 2, 3)."""
    if i not in (1, 2, 3):
        raise ValueError("correction polynomials are available for i <= 3")
    if i >= 2 and not {"a1", "c1"} <= spec.expansion.keys():
        raise ValueError(f"{spec.name}: expansion coefficients needed for order {i}")
    if mp:
        mu, sg = spec.mu_mp(), spec.sigma_mp()
        s = _frac_mp(spec.s)
        a1 = _frac_mp(spec.expansion.get("a1", 0))
        c1 = _frac_mp(spec.expansion.get("c1", 0))
        sqrt = mpmath.sqrt
    else:
        mu, sg, s = spec.mu, spec.sigma, float(spec.s)
        a1 = float(spec.expansion.get("a1", 0))
        c1 = float(spec.expansion.get("c1", 0))
        sqrt = math.sqrt
    if i == 1:
        return -(sg / sqrt(mu)) * (s - 1) * t
    if i == 2:
        return (s - 1) * s * sg ** 2 / (2 * mu) * t ** 2 + c1 - a1 * mu
    return (s * (1 - s ** 2) * sg ** 3 / (6 * mu * sqrt(mu)) * t ** 3
            + (sg * sqrt(mu) * s * a1 - (s - 1) * (sg / sqrt(mu)) * c1) * t)


def t_value(spec: SchemeSpec, n, k, mp: bool = False):
    if mp:
        mu, sg = spec.mu_mp(), spec.sigma_mp()
        return (k - n / mu) / (sg * mpmath.sqrt(n / mu ** 3))
    return (k - n / spec.mu) / (spec.sigma * math.sqrt(n / spec.mu ** 3))


def y_poly(spec: SchemeSpec, r: int, n, t, mp: bool = False):
    """1 + sum_{i<=r} p_i(t) n^(-i/2)."""
    if r < 0 or r > 3:
        raise ValueError("acceleration order must be 0..3")
    y = mpmath.mpf(1) if mp else 1.0
    root = mpmath.sqrt(n) if mp else math.sqrt(n)
    for i in range(1, r + 1):
        y = y + p_inf(spec, i, t, mp) / root ** i
    return y


def rejection_weight(spec: SchemeSpec, n: int, k: int, r: int, a, mp: bool = False):
    y = y_poly(spec, r, n, t_value(spec, n, k, mp), mp)
    return a / y if y >= a else (mpmath.mpf(1) if mp else 1.0)


def rejection_weights(spec: SchemeSpec, n: int, r: int, a: float) -> np.ndarray:
    """w_{n,k} for k = 0..n as doubles."""
    if not 0 < a < 1:
        raise ValueError("target acceptance a must lie in (0, 1)")
    y_poly(spec, r, n, 0.0)  # validates r and the coefficients
    k = np.arange(n + 1, dtype=np.float64)
    t = (k - n / spec.mu) / (spec.sigma * math.sqrt(n / spec.mu ** 3))
    y = np.ones_like(t)
    for i in range(1, r + 1):
        y += p_inf(spec, i, t) * n ** (-i / 2)
    return np.where(y >= a, a / np.where(y >= a, y, 1.0), 1.0)


# --------------------------------------------------------------------------
# assembly

def _tree_atoms(spec_name: str, core: RootedTree) -> np.ndarray:
    if spec_name == "polya":
        return np.arange(len(core), dtype=np.int64)
    return np.flatnonzero(core.child_counts() == 0).astype(np.int64)


def assemble(tag: str, d_part, core, components) -> ComposedObject:
    """Substitute the components into the atoms of the core.

    Walks: the D-part is a leading flat run, and component m provides the
    flat runs after core steps 2m-1 and 2m.  Trees: the root of component m
    replaces core atom m (vertex m for Polya trees, the m-th leaf otherwise).
    """
    comps = list(components)
    if isinstance(core, LatticeWalk):
        k = len(core) // 2
        if len(comps) != k:
            raise ValueError(f"core of size {k} needs {k} components, got {len(comps)}")
        runs = np.array([c.payload for c in comps], dtype=np.int64).reshape(k, 2)
        d = int(d_part or 0)
        n = d + 2 * k + int(runs.sum())
        steps = K.assemble_walk(core.steps, runs, k, d, n)
        return ComposedObject(tag, LatticeWalk(steps), k, d, core, comps)
    atoms = _tree_atoms(tag, core)
    if atoms.size != len(comps):
        raise ValueError(f"core with {atoms.size} atoms needs as many components, got {len(comps)}")
    parents = [np.asarray(c.payload.parent, np.int64) for c in comps]
    cstart = np.cumsum([0] + [p.size for p in parents])[:-1].astype(np.int64)
    flat = np.concatenate(parents) if parents else np.empty(0, np.int64)
    # component parent arrays are local; the kernel expects global indices
    flat = np.where(flat >= 0, flat + np.repeat(cstart, [p.size for p in parents]), flat)
    out = K.assemble_tree(core.parent, atoms, flat, cstart, len(comps), flat.size)
    return ComposedObject(tag, RootedTree(out, tag), len(comps), None, core, comps)


# --------------------------------------------------------------------------
# samplers

@dataclass(eq=False)
class LeapOutcome:
    object: ComposedObject
    core_size: int
    trials: int
    draws: int
    failed_atoms: int


def _walk_components(spec, runs, k):
    base = spec.walk[2]
    return [BComponent(spec.name, (int(i), int(j)), int(i + j + base)) for i, j in runs[:k]]


def _tree_components(spec, parent, cstart, ncomp, nodes):
    out = []
    for c in range(ncomp):
        s = cstart[c]
        e = cstart[c + 1] if c + 1 < ncomp else nodes
        par = parent[s:e] - s
        par[0] = -1
        t = RootedTree(par, spec.name)
        size = len(t) if spec.name == "polya" else t.n_leaves()
        out.append(BComponent(spec.name, t, size))
    return out


def _run(spec: SchemeSpec, n: int, rng, wacc, max_trials: int, keep: bool) -> LeapOutcome:
    spec.check_size(n)
    if spec.kind == "walk":
        p, pd, base = spec.walk
        runs = np.empty((max(16, n // 2), 2), np.int64)
        ok, k, d, trials, draws, failed, runs = K.walk_trials(
            n, p, pd, spec.has_d, base, wacc, max_trials, rng, runs)
        if not ok:
            raise TrialCapError(f"{spec.name}: no success within {max_trials} trials")
        core = spec.core(int(k), rng)
        steps = K.assemble_walk(core.steps, runs, k, d, d + 2 * k + int(runs[:k].sum()))
        comps = _walk_components(spec, runs, k) if keep else None
        obj = ComposedObject(spec.name, LatticeWalk(steps), int(k), int(d),
                             core if keep else None, comps)
        return LeapOutcome(obj, int(k), int(trials), int(draws), int(failed))
    pp = spec.params
    sup = spec.support
    parent = np.empty(max(64, 2 * n), np.int64)
    cstart = np.empty(max(16, n), np.int64)
    csize = np.empty(max(16, n), np.int64)
    ok, k, trials, draws, failed, parent, cstart, csize, nodes = K.tree_trials(
        n, sup.offset, sup.period, sup.minimum, wacc, max_trials, pp.cls, pp.emax, pp.tables,
        pp.count_leaves, rng, parent, cstart, csize)
    if not ok:
        raise TrialCapError(f"{spec.name}: no success within {max_trials} trials")
    core = spec.core(int(k), rng)
    atoms = _tree_atoms(spec.name, core)
    out = K.assemble_tree(core.parent, atoms, parent, cstart, k, nodes)
    comps = _tree_components(spec, parent, cstart, k, nodes) if keep else None
    obj = ComposedObject(spec.name, RootedTree(out, spec.name), int(k), None,
                         core if keep else None, comps)
    return LeapOutcome(obj, int(k), int(trials), int(draws), int(failed))


def leap_sample(spec: SchemeSpec, n: int, rng, max_trials: int = DEFAULT_MAX_TRIALS,
                keep: bool = False) -> LeapOutcome:
    """One object of size n from the leap distribution.

    ``keep`` retains the core and the component list in the output.
    """
    return _run(spec, n, rng, _EMPTY, max_trials, keep)


def rejection_leap_sample(spec: SchemeSpec, n: int, r: int, a: float, rng,
                          max_trials: int = DEFAULT_MAX_TRIALS, keep: bool = False) -> LeapOutcome:
    """Leap sampler with a final Bernoulli(w_{n,k}) acceptance step."""
    spec.check_size(n)
    return _run(spec, n, rng, rejection_weights(spec, n, r, a), max_trials, keep)


@dataclass(eq=False)
class SinglePassOutcome:
    object: Optional[ComposedObject]
    size: int
    deficit: int
    core_size: int


def single_pass_sample(spec: SchemeSpec, n: int, rng) -> SinglePassOutcome:
    """One leap trial without restart, keeping the components that fit in n.

    On periodic schemes trailing components are dropped until the core size
    is admissible.  The result is None when not even the D-part fits.
    """
    if n < 1:
        raise ValueError("size must be positive")
    sup = spec.support
    if spec.kind == "walk":
        p, pd, base = spec.walk
        d = int(K.geometric(pd, rng)) if spec.has_d else 0
        if d > n:
            return SinglePassOutcome(None, 0, n, 0)
        runs = np.empty((max(16, n // 2), 2), np.int64)
        runs, k, total = K.walk_components(n - d, 1 << 62, p, base, rng, runs)
        if d + total > n:
            k -= 1
            total -= int(runs[k].sum()) + base
        core = spec.core(int(k), rng)
        size = d + total
        steps = K.assemble_walk(core.steps, runs, k, d, d + 2 * k + int(runs[:k].sum()))
        obj = ComposedObject(spec.name, LatticeWalk(steps), int(k), d, core,
                             _walk_components(spec, runs, k))
        return SinglePassOutcome(obj, int(size), int(n - size), int(k))
    pp = spec.params
    parent = np.empty(max(64, 2 * n), np.int64)
    cstart = np.empty(max(16, n), np.int64)
    csize = np.empty(max(16, n), np.int64)
    parent, cstart, csize, k, total, nodes = K.tree_components(
        n, 1 << 62, pp.cls, 0, pp.emax, pp.tables, pp.count_leaves, rng, parent, cstart, csize)
    while k > 0 and (total > n or k not in sup):
        k -= 1
        total -= csize[k]
        nodes = cstart[k]
    if k == 0 or k not in sup:
        return SinglePassOutcome(None, 0, n, 0)
    core = spec.core(int(k), rng)
    out = K.assemble_tree(core.parent, _tree_atoms(spec.name, core), parent, cstart, k, nodes)
    obj = ComposedObject(spec.name, RootedTree(out, spec.name), int(k), None, core,
                         _tree_components(spec, parent, cstart, k, nodes))
    return SinglePassOutcome(obj, int(total), int(n - total), int(k))


def single_pass_deficits(spec: SchemeSpec, n: int, count: int, rng) -> np.ndarray:
    """Size deficits n - Z_n of ``count`` single-pass runs (objects not built)."""
    out = np.empty(count, np.int64)
    sup = spec.support
    if spec.kind == "walk":
        p, pd, base = spec.walk
        runs = np.empty((max(16, n // 2), 2), np.int64)
        for i in range(count):
            d = int(K.geometric(pd, rng)) if spec.has_d else 0
            if d > n:
                out[i] = n
                continue
            runs, k, total = K.walk_components(n - d, 1 << 62, p, base, rng, runs)
            if d + total > n:
                total -= int(runs[k - 1].sum()) + base
            out[i] = n - d - total
        return out
    pp = spec.params
    parent = np.empty(max(64, 2 * n), np.int64)
    cstart = np.empty(max(16, n), np.int64)
    csize = np.empty(max(16, n), np.int64)
    for i in range(count):
        parent, cstart, csize, k, total, nodes = K.tree_components(
            n, 1 << 62, pp.cls, 0, pp.emax, pp.tables, pp.count_leaves, rng, parent, cstart, csize)
        while k > 0 and (total > n or k not in sup):
            k -= 1
            total -= csize[k]
        out[i] = n - total if k > 0 else n
    return out


# --------------------------------------------------------------------------
# batch statistics (no objects built)

@dataclass(eq=False)
class CoreSizeBatch:
    core_sizes: np.ndarray
    trials: np.ndarray
    draws: np.ndarray


def leap_core_sizes(spec: SchemeSpec, n: int, count: int, rng, r: Optional[int] = None,
                    a: float = 0.5, max_trials: int = DEFAULT_MAX_TRIALS) -> CoreSizeBatch:
    """Core sizes of ``count`` leap samples (rejection variant when r is given)."""
    spec.check_size(n)
    wacc = _EMPTY if r is None else rejection_weights(spec, n, r, a)
    try:
        if spec.kind == "walk":
            p, pd, base = spec.walk
            ks, tr, dr = K.walk_core_sizes(count, n, p, pd, spec.has_d, base, wacc, max_trials, rng)
        else:
            pp, sup = spec.params, spec.support
            ks, tr, dr = K.tree_core_sizes(count, n, sup.offset, sup.period, sup.minimum, wacc,
                                           max_trials, pp.cls, pp.emax, pp.tables,
                                           pp.count_leaves, rng)
    except RuntimeError as exc:
        raise TrialCapError(f"{spec.name}: {exc}") from None
    return CoreSizeBatch(ks, tr, dr)


def leap_walk_heights(spec: SchemeSpec, n: int, count: int, rng, r: Optional[int] = None,
                      a: float = 0.5, max_trials: int = DEFAULT_MAX_TRIALS):
    """(heights, core sizes) of ``count`` leap-sampled walks."""
    if spec.kind != "walk":
        raise ValueError("heights by core only for walks")
    spec.check_size(n)
    wacc = _EMPTY if r is None else rejection_weights(spec, n, r, a)
    p, pd, base = spec.walk
    return K.walk_heights(count, n, p, pd, spec.has_d, base, wacc, max_trials, rng)


def reference_core_sizes(spec: SchemeSpec, n: int, count: int, rng) -> np.ndarray:
    """Plain-Python leap loop on the public Boltzmann samplers (slow; for testing)."""
    from . import boltzmann as bz

    spec.check_size(n)
    if spec.name == "motzkin":
        u = spec.weight or 1.0
        draw_b = lambda: bz.gamma_B_motzkin(rng, u).size
        draw_d = lambda: bz.gamma_D_seq(u / (2 + u), rng)
    elif spec.name == "schroder":
        draw_b = lambda: bz.gamma_B_schroder(rng).size
        draw_d = lambda: bz.gamma_D_seq(bz.SCHRODER_RHO, rng)
    else:
        pp = spec.params
        draw_b = lambda: int(K.tree_component_sizes(1, pp.cls, 0, pp.emax, pp.tables,
                                                    pp.count_leaves, rng)[0])
        draw_d = lambda: 0
    out = np.empty(count, np.int64)
    for i in range(count):
        while True:
            total = draw_d()
            k = 0
            while total < n:
                total += draw_b()
                k += 1
            if total == n and k in spec.support:
                out[i] = k
                break
    return out
