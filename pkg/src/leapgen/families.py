"""Unlabeled tree families seen as composition schemes C = A(B(z)).

Each family bundles the unlabeled counting series of C, the closed-form
labeled core A, the inner class B and the singularity rho of C, computed
from B(rho) = rho_A.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import mpmath

from .series import (
    DPS,
    ClosedForm,
    TruncatedSeries,
    divisors,
    euler_phi,
    series_exp,
    series_log_inv,
    series_pow,
    solve_mobile_series,
    solve_phylo_series,
    solve_polya_series,
    solve_schroder_mobile_series,
    to_mp,
)

SERIES_ORDER = 200


def _dps():
    return max(DPS, mpmath.mp.dps)


def _monotone_root(f, lo, hi):
    """Root of an increasing function on [lo, hi] by bisection."""
    lo, hi = mpmath.mpf(lo), mpmath.mpf(hi)
    for _ in range(mpmath.mp.prec + 8):
        mid = (lo + hi) / 2
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= mpmath.eps * abs(mid):
            break
    return (lo + hi) / 2


@dataclass(frozen=True)
class Support:
    """Integers k >= minimum with k = offset (mod period)."""
    offset: int = 0
    period: int = 1
    minimum: int = 0

    def __contains__(self, k: int) -> bool:
        return k >= self.minimum and (k - self.offset) % self.period == 0


class TreeFamily:
    name = "tree"
    unit = "nodes"  # atoms are nodes or leaves
    s = Fraction(-1, 2)

    def __init__(self):
        self._coeffs = None

    # -- counting series -------------------------------------------------
    def _solve(self, N: int) -> TruncatedSeries:
        raise NotImplementedError

    def series(self, N: int) -> TruncatedSeries:
        if self._coeffs is None or self._coeffs.order < N:
            self._coeffs = self._solve(max(N, 16))
        return self._coeffs.truncate(N)

    @cached_property
    def _mp_coeffs(self):
        with mpmath.workdps(DPS + 10):
            return [mpmath.mpf(c) for c in self.series(SERIES_ORDER).coeffs]

    # -- labeled core ------------------------------------------------------
    @property
    def rho_A(self):
        raise NotImplementedError

    @property
    def A_at_rho_A(self):
        raise NotImplementedError

    def core_inverse(self, u):
        """A(u): the core EGF evaluated through its implicit equation."""
        raise NotImplementedError

    def core_log_count(self, k: int) -> float:
        """log a_k where a_k = |A_k|/k!."""
        raise NotImplementedError

    def core_coeff(self, k: int) -> Fraction:
        raise NotImplementedError

    support = Support(0, 1, 1)

    # -- inner class B -----------------------------------------------------
    def b_from(self, x, at):
        """B(x) given at(j) = A~(x^j) for j >= 2."""
        raise NotImplementedError

    def b_series(self, N: int, exact: bool = True) -> TruncatedSeries:
        raise NotImplementedError

    # -- evaluation --------------------------------------------------------
    def _series_value(self, y):
        # terms decay at least like 0.6^m here, so stop once they are negligible
        acc = mpmath.mpf(0)
        p = mpmath.mpf(1)
        tol = mpmath.eps
        for m, a in enumerate(self._mp_coeffs):
            if a:
                t = a * p
                acc += t
                if m > 4 and t < tol * acc:
                    break
            p *= y
        return acc

    def _series_ok(self, y) -> bool:
        return y <= mpmath.mpf("0.6") * self.rho_estimate

    @cached_property
    def rho_estimate(self):
        s = self.series(SERIES_ORDER)
        return mpmath.mpf(1) / s.ratio_estimate() * mpmath.mpf("0.99")

    def atilde(self, y):
        """A~(y) for 0 <= y <= rho."""
        with mpmath.workdps(_dps()):
            y = mpmath.mpf(y)
            if y <= 0:
                return mpmath.mpf(0)
            if self._series_ok(y):
                return self._series_value(y)
            b = self.b_value(y)
            if b > self.rho_A * (1 + mpmath.mpf(10) ** (-DPS + 8)):
                raise ValueError(f"{self.name}: {mpmath.nstr(y, 12)} is beyond the singularity")
            return self.core_inverse(min(b, self.rho_A))

    def atilde_error(self, y):
        y = mpmath.mpf(y)
        if self._series_ok(y):
            s = self.series(SERIES_ORDER)
            return s.tail_bound(y)
        return mpmath.mpf(10) ** (-DPS + 10)

    def b_value(self, x):
        with mpmath.workdps(_dps()):
            x = mpmath.mpf(x)
            return self.b_from(x, lambda j: self.atilde(x ** j))

    @cached_property
    def rho(self):
        """Singularity of C: the root of B(x) = rho_A."""
        with mpmath.workdps(_dps()):
            lo = mpmath.mpf("0.5") * self.rho_estimate
            hi = min(mpmath.mpf("1.15") * self.rho_estimate, mpmath.sqrt(self.rho_estimate) * mpmath.mpf("0.95"))
            f = lambda x: self.b_value(x) - self.rho_A
            if not (f(lo) < 0 < f(hi)):
                raise RuntimeError(f"{self.name}: could not bracket the singularity")
            return _monotone_root(f, lo, hi)

    @cached_property
    def b_at_rho(self):
        return self.b_value(self.rho)

    def b_closed_form(self) -> ClosedForm:
        with mpmath.workdps(_dps()):
            return ClosedForm(f"B[{self.name}]", self.b_value, radius=mpmath.sqrt(self.rho))

    def atilde_closed_form(self) -> ClosedForm:
        return ClosedForm(self.name, self.atilde, radius=self.rho)

    def b_law(self, N: int) -> list:
        """Pr(|beta| = m) = b_m rho^m / B(rho) for m = 0..N, in mp floats."""
        with mpmath.workdps(_dps()):
            b = self.b_series(N, exact=False)
            r = self.rho
            tot = self.b_at_rho
            return [c * r ** m / tot for m, c in enumerate(b.coeffs)]


class PolyaFamily(TreeFamily):
    """Rooted unordered trees; core = Cayley trees, B = Z * MSet of >=2-fold subtrees."""
    name = "polya"
    unit = "nodes"
    support = Support(0, 1, 1)

    def _solve(self, N):
        return solve_polya_series(N)

    @property
    def rho_A(self):
        return mpmath.exp(-1)

    @property
    def A_at_rho_A(self):
        return mpmath.mpf(1)

    def core_inverse(self, u):
        with mpmath.workdps(_dps()):
            u = mpmath.mpf(u)
            if u >= self.rho_A:
                return mpmath.mpf(1)
            return -mpmath.re(mpmath.lambertw(-u))

    def core_log_count(self, k):
        return (k - 1) * math.log(k) - math.lgamma(k + 1)

    def core_coeff(self, k):
        if k < 1:
            return Fraction(0)
        return Fraction(k ** (k - 1), math.factorial(k))

    def b_from(self, x, at):
        tot = mpmath.mpf(0)
        j = 2
        while True:
            v = at(j)
            tot += v / j
            if v < mpmath.eps * 1e-5:
                break
            j += 1
        return x * mpmath.exp(tot)

    def b_series(self, N, exact=True):
        a = self.series(N)
        if not exact:
            a = to_mp(a)
        s = TruncatedSeries.zeros(N, exact=exact)
        for j in range(2, N + 1):
            s = s + a.dilate(j) * (Fraction(1, j) if exact else mpmath.mpf(1) / j)
        e = series_exp(s)
        return TruncatedSeries([e[0] * 0] + list(e.coeffs[:N]))


class PhyloFamily(TreeFamily):
    """Unordered binary trees counted by leaves; core = labeled phylogenetic trees."""
    name = "phylo"
    unit = "leaves"
    support = Support(0, 1, 1)

    def _solve(self, N):
        return solve_phylo_series(N)

    @property
    def rho_A(self):
        return mpmath.mpf(1) / 2

    @property
    def A_at_rho_A(self):
        return mpmath.mpf(1)

    def core_inverse(self, u):
        with mpmath.workdps(_dps()):
            u = mpmath.mpf(u)
            return 1 - mpmath.sqrt(max(1 - 2 * u, mpmath.mpf(0)))

    def core_log_count(self, k):
        if k == 1:
            return 0.0
        # (2k-3)!! = (2k-2)! / (2^(k-1) (k-1)!)
        return math.lgamma(2 * k - 1) - (k - 1) * math.log(2) - math.lgamma(k) - math.lgamma(k + 1)

    def core_coeff(self, k):
        if k < 1:
            return Fraction(0)
        df = 1
        for i in range(1, 2 * k - 2, 2):
            df *= i
        return Fraction(df, math.factorial(k))

    def b_from(self, x, at):
        return x + at(2) / 2

    def b_series(self, N, exact=True):
        a = self.series(N)
        if not exact:
            a = to_mp(a)
        half = Fraction(1, 2) if exact else mpmath.mpf(1) / 2
        c = list((a.dilate(2) * half).coeffs)
        c[1] = c[1] + (1 if exact else mpmath.mpf(1))
        return TruncatedSeries(c)


class MobileFamily(TreeFamily):
    """k-ary mobiles: every internal node carries a cycle of exactly k subtrees."""
    unit = "leaves"

    def __init__(self, arity: int):
        super().__init__()
        if arity < 2:
            raise ValueError("arity must be at least 2")
        self.arity = arity
        self.name = f"mobile:{arity}"
        self.support = Support(1, arity - 1, 1)

    def _solve(self, N):
        return solve_mobile_series(self.arity, N)

    @property
    def rho_A(self):
        return 1 - mpmath.mpf(1) / self.arity

    @property
    def A_at_rho_A(self):
        return mpmath.mpf(1)

    def core_inverse(self, u):
        r = self.arity
        with mpmath.workdps(_dps()):
            u = mpmath.mpf(u)
            if u >= self.rho_A:
                return mpmath.mpf(1)
            return _monotone_root(lambda A: A - A ** r / r - u, 0, 1)

    def _internal(self, k):
        if k < 1:
            return None
        m, rem = divmod(k - 1, self.arity - 1)
        if rem:
            return None
        return m

    def core_log_count(self, k):
        m = self._internal(k)
        if m is None:
            return -math.inf
        r = self.arity
        return math.lgamma(r * m + 1) - math.lgamma(m + 1) - m * math.log(r) - math.lgamma(k + 1)

    def core_coeff(self, k):
        m = self._internal(k)
        if m is None:
            return Fraction(0)
        r = self.arity
        return Fraction(math.factorial(r * m), math.factorial(m) * r ** m * math.factorial(k))

    def labeled_count(self, k) -> int:
        m = self._internal(k)
        if m is None:
            return 0
        r = self.arity
        return math.factorial(r * m) // (math.factorial(m) * r ** m)

    def _terms(self, x, at):
        r = self.arity
        out = {}
        for d in divisors(r):
            if d > 1:
                out[d] = euler_phi(d) * at(d) ** (r // d) / r
        return out

    def b_from(self, x, at):
        return x + sum(self._terms(x, at).values())

    def b_series(self, N, exact=True):
        a = self.series(N)
        if not exact:
            a = to_mp(a)
        r = self.arity
        acc = TruncatedSeries.zeros(N, exact=exact)
        for d in divisors(r):
            if d > 1:
                w = Fraction(euler_phi(d), r) if exact else mpmath.mpf(euler_phi(d)) / r
                acc = acc + series_pow(a, r // d).dilate(d) * w
        one = 1 if exact else mpmath.mpf(1)
        c = list(acc.coeffs)
        c[1] = c[1] + one
        return TruncatedSeries(c)


class SchroderMobileFamily(TreeFamily):
    """Mobiles where every internal node carries a cycle of length >= 2."""
    name = "schroder-mobile"
    unit = "leaves"
    support = Support(0, 1, 1)

    def _solve(self, N):
        return solve_schroder_mobile_series(N)

    @property
    def rho_A(self):
        return 1 - mpmath.log(2)

    @property
    def A_at_rho_A(self):
        return mpmath.mpf(1) / 2

    def core_inverse(self, u):
        with mpmath.workdps(_dps()):
            u = mpmath.mpf(u)
            if u >= self.rho_A:
                return mpmath.mpf(1) / 2
            return _monotone_root(lambda A: 2 * A + mpmath.log(1 - A) - u, 0, mpmath.mpf(1) / 2)

    @cached_property
    def _labeled(self):
        # a_n = [n=1] + (1/n) sum_{i<n} i g_i a_{n-i},  g = log(1/(1-A))
        N = 600
        with mpmath.workdps(_dps()):
            a = [mpmath.mpf(0)] * (N + 1)
            g = [mpmath.mpf(0)] * (N + 1)
            for n in range(1, N + 1):
                conv = mpmath.fsum(i * g[i] * a[n - i] for i in range(1, n)) / n
                a[n] = conv + (1 if n == 1 else 0)
                g[n] = a[n] + conv
            return a

    def core_coeff(self, k):
        a = [Fraction(0)] * (k + 1)
        g = [Fraction(0)] * (k + 1)
        for n in range(1, k + 1):
            conv = Fraction(sum(i * g[i] * a[n - i] for i in range(1, n)), n)
            a[n] = conv + (1 if n == 1 else 0)
            g[n] = a[n] + conv
        return a[k]

    def core_log_count(self, k):
        if k < len(self._labeled):
            return float(mpmath.log(self._labeled[k]))
        raise ValueError("core counts tabulated up to 600 leaves")

    def _terms(self, x, at):
        out = {}
        d = 2
        while True:
            v = at(d)
            out[d] = mpmath.mpf(euler_phi(d)) / d * mpmath.log(1 / (1 - v))
            if v < mpmath.eps * 1e-5:
                break
            d += 1
        return out

    def b_from(self, x, at):
        return x + sum(self._terms(x, at).values())

    def b_series(self, N, exact=True):
        a = self.series(N)
        if not exact:
            a = to_mp(a)
        acc = TruncatedSeries.zeros(N, exact=exact)
        # log(1/(1 - A(z^d))) is L(z^d) with L computed once
        L = series_log_inv(a)
        for d in range(2, N + 1):
            w = Fraction(euler_phi(d), d) if exact else mpmath.mpf(euler_phi(d)) / d
            acc = acc + L.dilate(d) * w
        one = 1 if exact else mpmath.mpf(1)
        c = list(acc.coeffs)
        c[1] = c[1] + one
        return TruncatedSeries(c)


_FAMILIES: dict = {}


def get_family(name: str) -> TreeFamily:
    """Shared family instances: polya, phylo, mobile:k, schroder-mobile."""
    if name not in _FAMILIES:
        if name == "polya":
            fam = PolyaFamily()
        elif name == "phylo":
            fam = PhyloFamily()
        elif name == "schroder-mobile":
            fam = SchroderMobileFamily()
        elif name.startswith("mobile:"):
            fam = MobileFamily(int(name.split(":", 1)[1]))
        else:
            raise KeyError(f"unknown tree family {name!r}")
        _FAMILIES[name] = fam
    return _FAMILIES[name]
