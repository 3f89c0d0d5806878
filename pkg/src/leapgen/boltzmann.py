"""Boltzmann samplers for the inner classes B and the unlabeled classes A~.

Probability tables are computed in high precision and rounded once to
double; all sampling is by inversion against those tables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from . import _kernels as K
from .families import get_family
from .objects import BComponent, RootedTree
from .series import DPS, euler_phi, divisors

_CLS = {"polya": K.POLYA, "phylo": K.PHYLO, "schroder-mobile": K.SCHRODER_MOBILE}


def _check_prob(p, name="p"):
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise ValueError(f"{name}={p!r} is not a probability")


def _check_rate(lam):
    if not (lam >= 0.0) or math.isinf(lam):
        raise ValueError(f"Poisson rate {lam!r} out of range")


def draw_geometric(p: float, rng) -> int:
    """Pr(i) = (1-p) p^i for i >= 0."""
    _check_prob(p)
    if p == 1.0:
        raise ValueError("geometric law needs p < 1")
    return int(K.geometric(float(p), rng))


def draw_poisson(lam: float, rng) -> int:
    _check_rate(lam)
    return int(K.poisson(float(lam), math.exp(-lam), rng))


def draw_poisson_ge1(lam: float, rng) -> int:
    """Poisson conditioned to be positive (inversion on the shifted CDF)."""
    _check_rate(lam)
    if lam == 0.0:
        raise ValueError("Pois>=1 needs a positive rate")
    return int(K.poisson_ge1(float(lam), math.exp(-lam), -math.expm1(-lam), rng))


def draw_bernoulli(p: float, rng) -> int:
    _check_prob(p)
    return int(K.bernoulli(float(p), rng))


def draw_logseries(a: float, rng, minimum: int = 1) -> int:
    """Pr(m) proportional to a^m/m on m >= minimum (minimum 1 or 2)."""
    if not 0.0 < a < 1.0:
        raise ValueError("log-series parameter must lie in (0, 1)")
    norm = -math.log1p(-a) - (a if minimum == 2 else 0.0)
    return int(K.logseries(float(a), minimum, norm, rng))


# --------------------------------------------------------------------------
# tables

@dataclass(frozen=True)
class PrimitiveParams:
    """Double-precision tables driving the tree Boltzmann kernel at one x.

    Row e of every table describes a node drawn at x^e; row 0 describes the
    root of a B-component (drawn at x with the self-similar part removed).
    """
    family: str
    x: float
    cls: int
    emax: int
    count_leaves: bool
    tables: tuple
    b_value: float
    atilde_value: float

    @property
    def max_index_cdf(self) -> np.ndarray:
        """Pr(K <= k) for the B-root (Polya only)."""
        return self.tables[1][0]

    def leaf_probability(self, row: int = 0) -> float:
        if self.cls == K.POLYA:
            return float(self.tables[1][row][0]) if row else self.max_index_cdf[1]
        return float(self.tables[0][row])


def _emax(x):
    # beyond this exponent a node is a leaf with probability 1.0 in double
    return max(2, int(math.ceil(math.log(2.0 ** -54) / math.log(float(x)))) + 1)


def _pad(rows, fill):
    width = max(len(r) for r in rows)
    out = np.full((len(rows), width), fill, dtype=np.float64)
    for i, r in enumerate(rows):
        out[i, : len(r)] = r
    return out


@lru_cache(maxsize=64)
def _tables(name: str, x_str: str) -> PrimitiveParams:
    fam = get_family(name)
    with mpmath.workdps(DPS):
        x = mpmath.mpf(x_str)
        if x <= 0 or x > fam.rho * (1 + mpmath.mpf(10) ** (-DPS + 5)):
            raise ValueError(f"x={x_str} outside (0, rho] for {name}")
        cache = {}

        def A(m):
            if m not in cache:
                cache[m] = fam.atilde(x ** m)
            return cache[m]

        emax = _emax(x)
        bval = fam.b_value(x)
        empty = np.zeros((1, 1))
        dummy_i = np.zeros(1, dtype=np.int64)
        if name == "polya":
            T_rows, lam_rows = [], []
            for row in range(emax + 1):
                e = max(row, 1)
                lam = [mpmath.mpf(0)]
                j = 1
                while True:
                    v = A(e * j) / j
                    lam.append(v)
                    if v < mpmath.mpf(10) ** -60:
                        break
                    j += 1
                if row == 0:
                    lam[1] = mpmath.mpf(0)
                # tail[k] = sum_{j>k} lam_j
                tail = [mpmath.mpf(0)] * (len(lam) + 1)
                for k in range(len(lam) - 1, -1, -1):
                    tail[k] = tail[k + 1] + (lam[k + 1] if k + 1 < len(lam) else 0)
                cdf = []
                for k in range(len(lam)):
                    c = float(mpmath.exp(-tail[k]))
                    cdf.append(c)
                    # the B root needs the K = 1 cell even when it has all the mass
                    if c == 1.0 and (row or k >= 1):
                        break
                if row == 0:
                    cdf[0] = 0.0  # K counts from 1 for the B root
                cdf[-1] = 1.0
                T_rows.append(cdf)
                lam_rows.append([float(v) for v in lam])
            T = _pad(T_rows, 1.0)
            lam = _pad(lam_rows, 0.0)
            width = max(T.shape[1], lam.shape[1])
            lamw = np.zeros((lam.shape[0], width))
            lamw[:, : lam.shape[1]] = lam
            pz = np.exp(-lamw)
            pnz = -np.expm1(-lamw)
            tb = (np.zeros(emax + 1), T, lamw, pz, pnz, empty, dummy_i, dummy_i, empty, empty)
            cls, leaves = K.POLYA, False
        elif name == "phylo":
            pleaf = np.zeros(emax + 1)
            dcum = np.zeros((emax + 1, 1))
            for row in range(emax + 1):
                e = max(row, 1)
                xe = x ** e
                if row == 0:
                    pleaf[0] = float(x / bval)
                    dcum[0, 0] = 0.0
                    continue
                a = A(e)
                pleaf[row] = float(xe / a)
                dcum[row, 0] = float((a * a / 2) / (a - xe)) if a > xe else 1.0
            tb = (pleaf, np.ones((1, 1)), empty, empty, empty, dcum, dummy_i, dummy_i, empty, empty)
            cls, leaves = K.PHYLO, True
        elif name.startswith("mobile:"):
            r = fam.arity
            divs = divisors(r)
            pleaf = np.zeros(emax + 1)
            dcum = np.zeros((emax + 1, len(divs)))
            for row in range(emax + 1):
                e = max(row, 1)
                w = []
                for d in divs:
                    if row == 0 and d == 1:
                        w.append(mpmath.mpf(0))
                    else:
                        w.append(euler_phi(d) * A(e * d) ** (r // d) / r)
                tot = mpmath.fsum(w)
                pleaf[row] = float(x / bval) if row == 0 else float(x ** e / A(e))
                acc = mpmath.mpf(0)
                for i, wi in enumerate(w):
                    acc += wi
                    dcum[row, i] = float(acc / tot) if tot > 0 else 1.0
                dcum[row, -1] = 1.0
            dval = np.array(divs, dtype=np.int64)
            dcount = np.array([r // d for d in divs], dtype=np.int64)
            tb = (pleaf, np.ones((1, 1)), empty, empty, empty, dcum, dval, dcount, empty, empty)
            cls, leaves = K.KARY, True
        elif name == "schroder-mobile":
            rows_w, rows_a, rows_z = [], [], []
            pleaf = np.zeros(emax + 1)
            for row in range(emax + 1):
                e = max(row, 1)
                w, aa, zz = [], [], []
                d = 1
                while True:
                    a = A(e * d)
                    L = -mpmath.log1p(-a)
                    if d == 1:
                        mass = L - a
                        wd = mpmath.mpf(0) if row == 0 else mass
                    else:
                        mass = L
                        wd = mpmath.mpf(euler_phi(d)) / d * L
                    w.append(wd)
                    aa.append(float(a))
                    zz.append(float(mass))
                    if d > 1 and a < mpmath.mpf(10) ** -40:
                        break
                    d += 1
                tot = mpmath.fsum(w)
                pleaf[row] = float(x / bval) if row == 0 else float(x ** e / A(e))
                acc = mpmath.mpf(0)
                cum = []
                for wi in w:
                    acc += wi
                    cum.append(float(acc / tot))
                cum[-1] = 1.0
                rows_w.append(cum)
                rows_a.append(aa)
                rows_z.append(zz)
            dcum = _pad(rows_w, 1.0)
            lsa = _pad(rows_a, 0.0)
            lsz = _pad(rows_z, 1.0)
            dval = np.arange(1, dcum.shape[1] + 1, dtype=np.int64)
            tb = (pleaf, np.ones((1, 1)), empty, empty, empty, dcum, dval, dval, lsa, lsz)
            cls, leaves = K.SCHRODER_MOBILE, True
        else:
            raise KeyError(name)
        return PrimitiveParams(family=name, x=float(x), cls=cls, emax=emax, count_leaves=leaves,
                               tables=tb, b_value=float(bval), atilde_value=float(A(1)))


def primitive_params(family, x=None) -> PrimitiveParams:
    """Tables for ``family`` (name or object) at ``x`` (default: its singularity)."""
    name = family if isinstance(family, str) else family.name
    fam = get_family(name)
    if x is None:
        x = fam.rho
    with mpmath.workdps(DPS):
        return _tables(name, mpmath.nstr(mpmath.mpf(x), DPS))


def draw_max_index(params: PrimitiveParams, rng, row: int = 0) -> int:
    """Max_Index of the forest at a B root (row 0) or at a node drawn at x^row.

    Row 0 counts from 1 (K = 1 means no repeated subtree); other rows from 0.
    """
    if params.cls != K.POLYA:
        raise ValueError("Max_Index tables exist only for Polya trees")
    return int(K.cdf_index(params.tables[1][row], rng.random()))


# --------------------------------------------------------------------------
# samplers

def _one(params: PrimitiveParams, root_row: int, rng, max_nodes: int | None = None):
    parent = np.empty(64, np.int64)
    cstart = np.empty(2, np.int64)
    csize = np.empty(2, np.int64)
    parent, cstart, csize, k, total, nodes = K.tree_components(
        1, 1, params.cls, root_row, params.emax, params.tables, params.count_leaves, rng,
        parent, cstart, csize)
    return RootedTree(parent[:nodes].copy(), params.family), int(total)


def gamma_atilde(family, x, rng) -> RootedTree:
    """Boltzmann sampler of the unlabeled class at x: P(t) = x^|t| / A~(x)."""
    p = primitive_params(family, x)
    return _one(p, 1, rng)[0]


def gamma_polya_tree(x, rng) -> RootedTree:
    return gamma_atilde("polya", x, rng)


def _component(family: str, x, rng) -> BComponent:
    p = primitive_params(family, x)
    tree, size = _one(p, 0, rng)
    return BComponent(family, tree, size)


def gamma_B_polya(x, rng) -> BComponent:
    """A root carrying a forest in which every subtree is repeated j >= 2 times."""
    return _component("polya", x, rng)


def gamma_B_phylo(x, rng) -> BComponent:
    return _component("phylo", x, rng)


def gamma_B_mobile(family, x, rng) -> BComponent:
    name = family if isinstance(family, str) else family.name
    if not (name.startswith("mobile:") or name == "schroder-mobile"):
        raise ValueError(f"{name} is not a mobile class")
    return _component(name, x, rng)


MOTZKIN_RHO = 1.0 / 3.0
SCHRODER_RHO = 3.0 - 2.0 * math.sqrt(2.0)


def gamma_B_motzkin(rng, u: float = 1.0) -> BComponent:
    """Two flat runs of geometric length; with horizontal weight u the singularity is 1/(2+u)."""
    p = u / (2.0 + u)
    i, j = int(K.geometric(p, rng)), int(K.geometric(p, rng))
    return BComponent("motzkin", (i, j), i + j + 2)


def gamma_B_schroder(rng) -> BComponent:
    i, j = int(K.geometric(SCHRODER_RHO, rng)), int(K.geometric(SCHRODER_RHO, rng))
    return BComponent("schroder", (i, j), i + j + 1)


def gamma_D_seq(x, rng) -> int:
    if not 0.0 < x < 1.0:
        raise ValueError("x must lie in (0, 1)")
    return int(K.geometric(float(x), rng))


def _walk_runs(name: str, count: int, rng, u: float = 1.0) -> np.ndarray:
    if name == "motzkin":
        p, base = u / (2.0 + u), 2
    elif name == "schroder":
        p, base = SCHRODER_RHO, 1
    else:
        raise KeyError(name)
    runs, k, _ = K.walk_components(np.iinfo(np.int64).max, count, p, base,
                                   rng, np.empty((count, 2), np.int64))
    return runs[:k], base


def component_sizes(family, count: int, rng, x=None, root_row: int = 0, u: float = 1.0) -> np.ndarray:
    """Sizes of ``count`` independent B-draws (or A~-draws with root_row=1).

    Walk classes are drawn at their singularity; ``u`` weights Motzkin flat steps.
    """
    name = family if isinstance(family, str) else family.name
    if name in ("motzkin", "schroder"):
        runs, base = _walk_runs(name, count, rng, u)
        return runs.sum(axis=1) + base
    p = primitive_params(family, x)
    return K.tree_component_sizes(count, p.cls, root_row, p.emax, p.tables, p.count_leaves, rng)
