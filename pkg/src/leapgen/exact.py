"""Exact laws of the core size and of the height, and the distances between them.

Two arithmetic paths are offered.  The rational path works with Python
fractions (exact identities hold with zero tolerance).  The float path
builds each law from ratios of consecutive terms, starting at the mode, so
that no huge counts ever appear; it is used for large n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .leap import SchemeSpec, catalan, get_scheme, rejection_weight, rejection_weights
from .series import expansion_coefficient, q_series

MAX_GENERIC_N = 500


@dataclass(frozen=True)
class ExactDist:
    """A law over integer indices; values are Fractions, mpf or floats."""
    n: int
    probs: dict
    total: object

    def __getitem__(self, k):
        return self.probs.get(k, 0)

    def support(self):
        return sorted(k for k, p in self.probs.items() if p)

    def as_array(self, size: int | None = None) -> np.ndarray:
        size = size or (max(self.probs) + 1 if self.probs else 0)
        out = np.zeros(size)
        for k, p in self.probs.items():
            if k < size:
                out[k] = float(p)
        return out

    def mean(self) -> float:
        return float(sum(k * float(p) for k, p in self.probs.items()))


def tv_distance(p: dict, q: dict):
    keys = set(p) | set(q)
    return sum(abs(p.get(k, 0) - q.get(k, 0)) for k in keys) / 2


# --------------------------------------------------------------------------
# counts

@dataclass(frozen=True)
class CountTable:
    """c_n, a_k and (lazily) c_{n,k} for a walk scheme, with its exact constants."""
    name: str
    n_max: int
    c: tuple
    a: tuple
    rho: object
    b_rho: object
    d_rho: object

    def joint(self, n: int) -> list:
        return joint_counts(get_scheme(self.name), n)


def joint_counts(spec: SchemeSpec, n: int) -> list:
    """c_{n,k} for k = 0..n (zero where impossible)."""
    if spec.name == "motzkin":
        u = Fraction(spec.weight) if spec.weight else 1
        out = [catalan(k) * math.comb(n, 2 * k) * u ** (n - 2 * k) for k in range(n // 2 + 1)]
    elif spec.name == "schroder":
        out = [catalan(k) * math.comb(n + k, 2 * k) for k in range(n + 1)]
    else:
        raise ValueError(f"no closed form for the joint counts of {spec.name}")
    return out + [0] * (n + 1 - len(out))


def motzkin_counts(n_max: int, u=1) -> CountTable:
    """Motzkin numbers by summing Cat_k binom(n, 2k), checked against their recurrence."""
    spec = get_scheme("motzkin" if u == 1 else f"motzkin:{Fraction(u)}")
    c = [sum(joint_counts(spec, n)) for n in range(n_max + 1)]
    if u == 1:
        rec = [1, 1]
        for n in range(2, n_max + 1):
            rec.append(((2 * n + 1) * rec[-1] + 3 * (n - 1) * rec[-2]) // (n + 2))
        if rec[: n_max + 1] != c:
            raise ArithmeticError("Motzkin counts disagree with the recurrence")
    a = tuple(catalan(k) for k in range(n_max // 2 + 1))
    return CountTable(spec.name, n_max, tuple(c), a, spec.rho, spec.b_rho, spec.d_rho)


@lru_cache(maxsize=8)
def _q_exact(spec_name: str, n_max: int) -> tuple:
    return tuple(q_series(get_scheme(spec_name), n_max, exact=True))


def q_exact(spec: SchemeSpec, n: int) -> Fraction:
    """q_n on the rational path (tables are shared across calls)."""
    size = max(64, 1 << (n.bit_length()))
    return _q_exact(_spec_key(spec), size)[n]


def _spec_key(spec):
    return spec.name if spec.weight is None else f"{spec.name}:{Fraction(spec.weight)}"


def q_identity(spec: SchemeSpec, n: int) -> Fraction:
    """sum_k (c_{n,k}/a_k) rho^n / (D(rho) B(rho)^k), which must equal q_n."""
    joint = joint_counts(spec, n)
    rho, B, D = spec.rho, spec.b_rho, spec.d_rho
    acc = Fraction(0)
    for k, c in enumerate(joint):
        if c:
            acc += Fraction(c, spec.a_coeff(k)) / B ** k
    return acc * rho ** n / D


# --------------------------------------------------------------------------
# distortion and total variation (walk schemes)

def distortion(spec: SchemeSpec, n: int, k: int, q=None) -> Fraction:
    """d_{n,k} = c_n rho^n / (q_n D(rho) a_k B(rho)^k) on the rational path."""
    if not spec.exact:
        raise ValueError(f"{spec.name}: no exact rational data")
    if k not in spec.support or spec.a_coeff(k) == 0:
        raise ValueError(f"core size {k} is outside the support")
    q = q_exact(spec, n) if q is None else q
    c_n = sum(joint_counts(spec, n))
    return Fraction(c_n) * spec.rho ** n / (q * spec.d_rho * spec.a_coeff(k) * spec.b_rho ** k)


def core_laws_exact(spec: SchemeSpec, n: int):
    """(pi, pi', d) over k as Fractions: uniform law, leap law, distortion factors."""
    joint = joint_counts(spec, n)
    c_n = sum(joint)
    q = q_exact(spec, n)
    scale = spec.rho ** n / (q * spec.d_rho)
    pi, lp, d = {}, {}, {}
    for k, c in enumerate(joint):
        if not c:
            continue
        pi[k] = Fraction(c, c_n)
        lp[k] = Fraction(c, spec.a_coeff(k)) * scale / spec.b_rho ** k
        d[k] = lp[k] / pi[k]
    return pi, lp, d


def _ratio_laws(spec: SchemeSpec, n: int):
    """Uniform and leap laws over k in double precision, built from term ratios."""
    if spec.name == "motzkin":
        u = float(spec.weight or 1.0)
        kmax = n // 2
        k = np.arange(kmax, dtype=np.float64)
        # binom(n, 2k+2)/binom(n, 2k) / u^2 and Cat_{k+1}/Cat_k
        rb = (n - 2 * k) * (n - 2 * k - 1) / ((2 * k + 1) * (2 * k + 2)) / (u * u)
    elif spec.name == "schroder":
        kmax = n
        k = np.arange(kmax, dtype=np.float64)
        rb = (n + k + 1) * (n - k) / ((2 * k + 1) * (2 * k + 2))
    else:
        raise ValueError(f"no closed form for the joint counts of {spec.name}")
    rc = 2 * (2 * k + 1) / (k + 2)
    r_uni = rb * rc
    r_leap = rb / float(spec.b_rho)
    return _from_ratios(r_uni), _from_ratios(r_leap)


def _from_ratios(r: np.ndarray) -> np.ndarray:
    """Normalised law with p[k+1]/p[k] = r[k], accumulated outward from the mode."""
    m = r.size + 1
    # log-concave here, so the mode is where the ratio crosses 1
    below = np.nonzero(r < 1.0)[0]
    k0 = int(below[0]) if below.size else m - 1
    p = np.zeros(m)
    p[k0] = 1.0
    for j in range(k0, m - 1):
        p[j + 1] = p[j] * r[j]
    for j in range(k0 - 1, -1, -1):
        p[j] = p[j + 1] / r[j]
    return p / math.fsum(p)


def tv_exact(spec: SchemeSpec, n: int, path: str = "rational"):
    """d_TV(pi_n, pi'_n): a Fraction on the rational path, a float otherwise."""
    if path == "rational":
        pi, lp, _ = core_laws_exact(spec, n)
        return tv_distance(pi, lp)
    if path == "float":
        pu, pl = _ratio_laws(spec, n)
        return 0.5 * math.fsum(np.abs(pu - pl))
    raise ValueError("path must be 'rational' or 'float'")


@dataclass(frozen=True)
class RejTV:
    value: float
    error: float
    W: float          # normalising constant sum_k pi'_k w_k
    path: str


def tv_rej_exact(spec: SchemeSpec, n: int, r: int, a=Fraction(1, 2), path: str = "mp",
                 dps: int = 60) -> RejTV:
    """d_TV(pi_n, pi^rej_n) for rejection weights of order r.

    The weights are irrational, so the "mp" path evaluates them with ``dps``
    digits from the rational laws; the reported error bounds the rounding.
    """
    if path == "mp":
        pi, lp, _ = core_laws_exact(spec, n)
        with mpmath.workdps(dps):
            af = mpmath.mpf(Fraction(a).numerator) / Fraction(a).denominator
            P = {k: mpmath.mpf(v.numerator) / v.denominator for k, v in pi.items()}
            L = {k: mpmath.mpf(v.numerator) / v.denominator for k, v in lp.items()}
            w = {k: rejection_weight(spec, n, k, r, af, mp=True) for k in L}
            W = mpmath.fsum(L[k] * w[k] for k in L)
            tv = mpmath.fsum(abs(P[k] - L[k] * w[k] / W) for k in P) / 2
            err = len(P) * mpmath.mpf(10) ** (-dps + 5)
            return RejTV(float(tv), float(err), float(W), "mp")
    if path == "float":
        pu, pl = _ratio_laws(spec, n)
        w = rejection_weights(spec, n, r, float(a))[: pl.size]
        W = math.fsum(pl * w)
        tv = 0.5 * math.fsum(np.abs(pu - pl * w / W))
        return RejTV(tv, pu.size * 1e-15, W, "float")
    raise ValueError("path must be 'mp' or 'float'")


# --------------------------------------------------------------------------
# heights of Motzkin walks

@lru_cache(maxsize=4)
def dyck_height_table(k_max: int, h_max: int | None = None) -> tuple:
    """a[k][h]: Dyck walks of semilength k and height exactly h.

    Uses the reflection formula for walks confined to [0, h]:
    sum_j binom(2k, k - j(h+2)) - binom(2k, k - j(h+2) + h + 1).
    """
    h_max = k_max if h_max is None else h_max
    table = []
    for k in range(k_max + 1):
        row = [math.comb(2 * k, i) for i in range(2 * k + 1)]

        def B(i):
            return row[i] if 0 <= i <= 2 * k else 0

        def at_most(h):
            if h < 0:
                return 0
            if h >= k:
                return row[k] - row[k + 1] if k else 1
            tot = 0
            period = h + 2
            j = -(k // period) - 1
            while j * period <= k + h + 1:
                tot += B(k - j * period) - B(k - j * period + h + 1)
                j += 1
            return tot

        H = min(k, h_max)
        le = [at_most(h) for h in range(-1, H + 1)]
        table.append(tuple(le[h + 1] - le[h] for h in range(H + 1)))
    return tuple(table)


def dyck_height_dp(k_max: int) -> list:
    """Same table through the bounded-height ballot recursion (small k)."""
    out = []
    for k in range(k_max + 1):
        counts = []
        for h in range(k + 1):
            # walks of length 2k in [0, h] from 0 to 0
            f = [1] + [0] * h
            for _ in range(2 * k):
                f = [(f[y - 1] if y > 0 else 0) + (f[y + 1] if y < h else 0) for y in range(h + 1)]
            counts.append(f[0])
        out.append([counts[0]] + [counts[h] - counts[h - 1] for h in range(1, k + 1)])
    return out


def _mix_heights(core_law: dict, table) -> dict:
    out: dict = {}
    for k, p in core_law.items():
        if not p:
            continue
        share = p / catalan(k)
        for h, c in enumerate(table[k]):
            if c:
                out[h] = out.get(h, 0) + share * c
    return out


def height_law(n: int, dist: str = "uniform", r: int = 1, a=Fraction(1, 2), spec=None) -> ExactDist:
    """Law of the height of a Motzkin walk of length n under uniform, leap or rej sampling.

    The height of the walk is that of its Dyck core, so the law mixes the
    Dyck height tables over the core-size law.
    """
    spec = spec or get_scheme("motzkin")
    pi, lp, _ = core_laws_exact(spec, n)
    table = dyck_height_table(n // 2)
    if dist == "uniform":
        law = pi
    elif dist == "leap":
        law = lp
    elif dist == "rej":
        with mpmath.workdps(60):
            L = {k: mpmath.mpf(v.numerator) / v.denominator for k, v in lp.items()}
            w = {k: rejection_weight(spec, n, k, r, mpmath.mpf(Fraction(a).numerator) / Fraction(a).denominator, mp=True) for k in L}
            W = mpmath.fsum(L[k] * w[k] for k in L)
            law = {k: L[k] * w[k] / W for k in L}
            out = _mix_heights(law, table)
            return ExactDist(n, out, mpmath.fsum(out.values()))
    else:
        raise ValueError("dist must be uniform, leap or rej")
    out = _mix_heights(law, table)
    return ExactDist(n, out, sum(out.values()))


def tv_height(n: int, dist: str = "leap", r: int = 1, a=Fraction(1, 2)):
    """d_TV between the uniform height law and the height law under ``dist``."""
    u = height_law(n, "uniform")
    o = height_law(n, dist, r, a)
    if dist == "rej":
        with mpmath.workdps(60):
            U = {h: mpmath.mpf(v.numerator) / v.denominator for h, v in u.probs.items()}
            return tv_distance(U, o.probs)
    return tv_distance(u.probs, o.probs)


# --------------------------------------------------------------------------
# tree schemes

def _law_powers(b: np.ndarray, n: int, kmax: int) -> np.ndarray:
    """P(S_k = n) for k = 0..kmax where S_k is a sum of k draws of law b."""
    out = np.zeros(kmax + 1)
    cur = np.zeros(n + 1)
    cur[0] = 1.0
    out[0] = 1.0 if n == 0 else 0.0
    for k in range(1, kmax + 1):
        cur = np.convolve(cur, b[: n + 1])[: n + 1]
        out[k] = cur[n]
    return out


def generic_core_law(spec: SchemeSpec, n: int, dist: str = "uniform") -> ExactDist:
    """Core-size law at size n (floats) from powers of the B size law.

    uniform: proportional to a_k [z^n] B(z)^k; leap: proportional to the
    probability that k independent B-draws have total size n.
    """
    if n > MAX_GENERIC_N:
        raise ValueError(f"generic core laws are limited to n <= {MAX_GENERIC_N}")
    spec.check_size(n)
    with mpmath.workdps(30):
        b = np.array([float(v) for v in spec.b_law(n)])
        logB = float(mpmath.log(spec.b_rho))
    pk = _law_powers(b, n, n)
    ks = np.array([k for k in range(1, n + 1) if k in spec.support and pk[k] > 0])
    if dist == "leap":
        w = pk[ks]
        w = w / w.sum()
    elif dist == "uniform":
        fam_log = np.array([_core_log(spec, int(k)) for k in ks])
        logw = np.log(pk[ks]) + fam_log + ks * logB
        logw -= logw.max()
        w = np.exp(logw)
        w = w / w.sum()
    else:
        raise ValueError("dist must be 'uniform' or 'leap'")
    probs = {int(k): float(p) for k, p in zip(ks, w)}
    return ExactDist(n, probs, math.fsum(probs.values()))


def _core_log(spec, k):
    from .families import get_family

    return get_family(spec.name).core_log_count(k)


def gaussian_core_density(spec: SchemeSpec, n: int, k):
    """Local-limit reference curve for the core size."""
    mu, sg = spec.mu, spec.sigma
    t = (np.asarray(k, float) - n / mu) / (sg * math.sqrt(n / mu ** 3))
    return math.sqrt(mu ** 3) / (sg * math.sqrt(n)) * np.exp(-t * t / 2) / math.sqrt(2 * math.pi)


# --------------------------------------------------------------------------
# asymptotic expansion coefficients

def motzkin_expansion(N: int = 300, order: int = 12):
    """(a1, c1) for Catalan and Motzkin numbers by Richardson extrapolation."""
    cat = [catalan(k) for k in range(N + order + 2)]
    mot = list(motzkin_counts(N + order + 2).c)
    _, a1 = expansion_coefficient(cat, Fraction(1, 4), Fraction(-1, 2), N, order)
    _, c1 = expansion_coefficient(mot, Fraction(1, 3), Fraction(-1, 2), N, order)
    return a1, c1
