"""Truncated power series, fixed-point solvers for the unlabeled tree classes,
evaluation tables and Boltzmann moments.

Coefficients are either exact (``int``/``Fraction``) or high-precision reals
(``mpmath.mpf``).  The two representations are never mixed silently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np

DPS = 40


def _is_exact(c) -> bool:
    return isinstance(c, (int, Fraction)) and not isinstance(c, bool)


class TruncatedSeries:
    """Coefficients ``c_0..c_N`` of a power series known up to order ``N``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        c = tuple(coeffs)
        if not c:
            raise ValueError("a truncated series needs at least one coefficient")
        self.coeffs = c

    @classmethod
    def zeros(cls, order: int, exact: bool = True) -> "TruncatedSeries":
        zero = 0 if exact else mpmath.mpf(0)
        return cls([zero] * (order + 1))

    @classmethod
    def monomial(cls, degree: int, order: int, coeff=1) -> "TruncatedSeries":
        c = [0] * (order + 1)
        if degree <= order:
            c[degree] = coeff
        return cls(c)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def exact(self) -> bool:
        return all(_is_exact(c) for c in self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]

    def __iter__(self):
        return iter(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        shown = ", ".join(str(c) for c in self.coeffs[:8])
        more = ", ..." if len(self.coeffs) > 8 else ""
        return f"TruncatedSeries([{shown}{more}], order={self.order})"

    def _compatible(self, other: "TruncatedSeries") -> None:
        if self.exact != other.exact:
            raise TypeError("cannot combine exact and floating coefficient series")

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            self._compatible(other)
            n = min(self.order, other.order) + 1
            return TruncatedSeries(a + b for a, b in zip(self.coeffs[:n], other.coeffs[:n]))
        c = list(self.coeffs)
        c[0] = c[0] + other
        return TruncatedSeries(c)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(-a for a in self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        return TruncatedSeries(a * other for a in self.coeffs)

    __rmul__ = __mul__

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise ValueError("cannot extend a truncated series")
        return TruncatedSeries(self.coeffs[: order + 1])

    def dilate(self, i: int) -> "TruncatedSeries":
        """Substitute z -> z**i, keeping the same truncation order."""
        if i < 1:
            raise ValueError("dilation factor must be positive")
        zero = self.coeffs[0] * 0
        c = [zero] * (self.order + 1)
        for m, a in enumerate(self.coeffs):
            if m * i > self.order:
                break
            c[m * i] = a
        return TruncatedSeries(c)

    def derivative(self) -> "TruncatedSeries":
        if self.order == 0:
            return TruncatedSeries([self.coeffs[0] * 0])
        return TruncatedSeries(m * a for m, a in enumerate(self.coeffs) if m > 0)

    def __call__(self, x):
        acc = self.coeffs[-1] * 0
        for a in reversed(self.coeffs):
            acc = acc * x + a
        return acc

    def ratio_estimate(self) -> float:
        """Growth rate 1/R estimated from the last non-zero coefficients.

        Periodic series are handled by comparing the last two non-zero
        coefficients and taking the appropriate root.
        """
        nz = [m for m, a in enumerate(self.coeffs) if a != 0]
        if len(nz) < 2:
            return 0.0
        m1, m0 = nz[-1], nz[-2]
        r = mpmath.mpf(self.coeffs[m1]) / mpmath.mpf(self.coeffs[m0])
        return float(r ** (mpmath.mpf(1) / (m1 - m0)))

    def tail_bound(self, x, growth: float | None = None):
        """Geometric bound on the omitted terms sum_{m>N} c_m x^m."""
        g = self.ratio_estimate() if growth is None else growth
        # safety factor covers the sub-exponential n^(-3/2) correction
        g = g * (1.0 + 2.0 / max(self.order, 1))
        q = mpmath.mpf(x) * g
        if q >= 1:
            return mpmath.inf
        nz = [m for m, a in enumerate(self.coeffs) if a != 0]
        if not nz:
            return mpmath.mpf(0)
        m = nz[-1]
        last = abs(mpmath.mpf(self.coeffs[m])) * mpmath.mpf(x) ** m
        return last * q / (1 - q) * (self.order + 1 - m + 1)

    def to_strings(self) -> list[str]:
        out = []
        for c in self.coeffs:
            if isinstance(c, Fraction):
                out.append(f"{c.numerator}/{c.denominator}" if c.denominator != 1 else str(c.numerator))
            elif isinstance(c, int):
                out.append(str(c))
            else:
                out.append(mpmath.nstr(mpmath.mpf(c), DPS))
        return out

    @classmethod
    def from_strings(cls, items: Sequence[str]) -> "TruncatedSeries":
        out = []
        for s in items:
            if "/" in s:
                out.append(Fraction(s))
            elif any(ch in s for ch in ".eE") or s in ("inf", "-inf", "nan"):
                out.append(mpmath.mpf(s))
            else:
                out.append(int(s))
        return cls(out)


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product truncated at the smaller of the two orders."""
    a._compatible(b)
    n = min(a.order, b.order)
    ac, bc = a.coeffs, b.coeffs
    zero = ac[0] * 0
    out = [zero] * (n + 1)
    nzb = [(j, bc[j]) for j in range(n + 1) if bc[j] != 0]
    for i in range(n + 1):
        ai = ac[i]
        if ai == 0:
            continue
        lim = n - i
        for j, bj in nzb:
            if j > lim:
                break
            out[i + j] += ai * bj
    return TruncatedSeries(out)


def series_exp(f: TruncatedSeries) -> TruncatedSeries:
    """exp(f) for a series with zero constant term."""
    if f[0] != 0:
        raise ValueError("series_exp needs f(0) = 0")
    n = f.order
    one = Fraction(1) if f.exact else mpmath.mpf(1)
    e = [one] + [one * 0] * n
    for m in range(1, n + 1):
        s = one * 0
        for k in range(1, m + 1):
            if f[k] != 0:
                s += k * f[k] * e[m - k]
        e[m] = s / m
    return TruncatedSeries(e)


def series_log_inv(f: TruncatedSeries) -> TruncatedSeries:
    """log(1/(1-f)) for a series with zero constant term."""
    if f[0] != 0:
        raise ValueError("series_log_inv needs f(0) = 0")
    n = f.order
    one = Fraction(1) if f.exact else mpmath.mpf(1)
    g = [one * 0] * (n + 1)
    for m in range(1, n + 1):
        s = one * m * f[m]
        for i in range(1, m):
            if g[i] != 0 and f[m - i] != 0:
                s += i * g[i] * f[m - i]
        g[m] = s / m
    return TruncatedSeries(g)


def series_pow(f: TruncatedSeries, e: int) -> TruncatedSeries:
    if e < 0:
        raise ValueError("negative powers are not supported")
    if f.exact:
        out = TruncatedSeries.monomial(0, f.order)
    else:
        out = TruncatedSeries([mpmath.mpf(1)] + [mpmath.mpf(0)] * f.order)
    base = f
    while e:
        if e & 1:
            out = series_mul(out, base)
        e >>= 1
        if e:
            base = series_mul(base, base)
    return out


def to_mp(f: TruncatedSeries) -> TruncatedSeries:
    return TruncatedSeries(mpmath.mpf(c) if not isinstance(c, Fraction) else mpmath.mpf(c.numerator) / c.denominator
                           for c in f.coeffs)


def euler_phi(n: int) -> int:
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


# ---------------------------------------------------------------------------
# fixed-point steps and solvers for the unlabeled tree classes

def polya_step(f: TruncatedSeries) -> TruncatedSeries:
    """One application of f -> z exp(sum_i f(z^i)/i)."""
    n = f.order
    s = TruncatedSeries.zeros(n)
    for i in range(1, n + 1):
        s = s + f.dilate(i) * Fraction(1, i)
    e = series_exp(s)
    return TruncatedSeries([0] + [_norm(c) for c in e.coeffs[:n]])


def phylo_step(f: TruncatedSeries) -> TruncatedSeries:
    """One application of f -> z + (f^2 + f(z^2))/2."""
    n = f.order
    g = (series_mul(f, f) + f.dilate(2)) * Fraction(1, 2)
    g = g + TruncatedSeries.monomial(1, n)
    return TruncatedSeries(_norm(c) for c in g.coeffs)


def mobile_step(f: TruncatedSeries, arity: int) -> TruncatedSeries:
    """f -> z + (1/k) sum_{d|k} phi(d) f(z^d)^(k/d)."""
    n = f.order
    acc = TruncatedSeries.zeros(n)
    for d in divisors(arity):
        acc = acc + series_pow(f.dilate(d), arity // d) * euler_phi(d)
    g = acc * Fraction(1, arity) + TruncatedSeries.monomial(1, n)
    return TruncatedSeries(_norm(c) for c in g.coeffs)


def schroder_mobile_step(f: TruncatedSeries) -> TruncatedSeries:
    """f -> z + sum_{d>=1} (phi(d)/d) log(1/(1-f(z^d))) - f."""
    n = f.order
    acc = TruncatedSeries.monomial(1, n) - f
    for d in range(1, n + 1):
        acc = acc + series_log_inv(f.dilate(d)) * Fraction(euler_phi(d), d)
    return TruncatedSeries(_norm(c) for c in acc.coeffs)


def _norm(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


def iterate_fixed_point(step: Callable[[TruncatedSeries], TruncatedSeries], order: int):
    """Iterate ``step`` from the zero series until a fixed point is reached.

    Returns ``(series, iterations)``.  Each application fixes at least one
    more coefficient, so ``order + 2`` applications always suffice.
    """
    f = TruncatedSeries.zeros(order)
    for it in range(1, order + 3):
        g = step(f)
        if g == f:
            return f, it
        f = g
    raise RuntimeError(f"fixed-point iteration did not settle within {order + 2} steps")


def solve_polya_series(N: int, method: str = "recurrence") -> TruncatedSeries:
    """Counts of rooted unordered (Polya) trees by number of nodes, up to ``N``."""
    if N < 1:
        raise ValueError("order must be at least 1")
    if method == "iterate":
        return iterate_fixed_point(polya_step, N)[0]
    a = [0, 1]
    s = [0, 1]  # s_k = sum_{d|k} d a_d
    for n in range(1, N):
        tot = 0
        for k in range(1, n + 1):
            tot += s[k] * a[n - k + 1]
        a.append(tot // n)
        m = n + 1
        s.append(sum(d * a[d] for d in range(1, m + 1) if m % d == 0))
    return TruncatedSeries(a[: N + 1])


def solve_phylo_series(N: int, method: str = "recurrence") -> TruncatedSeries:
    """Counts of unordered binary trees by number of leaves, up to ``N``."""
    if N < 1:
        raise ValueError("order must be at least 1")
    if method == "iterate":
        return iterate_fixed_point(phylo_step, N)[0]
    a = [0, 1]
    for n in range(2, N + 1):
        tot = sum(a[i] * a[n - i] for i in range(1, n))
        if n % 2 == 0:
            tot += a[n // 2]
        a.append(tot // 2)
    return TruncatedSeries(a)


def solve_mobile_series(arity: int, N: int, method: str = "recurrence") -> TruncatedSeries:
    """Unlabeled ``arity``-ary mobiles (cyclic child order) by number of leaves."""
    if arity < 2:
        raise ValueError("arity must be at least 2")
    if N < 1:
        raise ValueError("order must be at least 1")
    if method == "iterate":
        return iterate_fixed_point(lambda f: mobile_step(f, arity), N)[0]
    divs = divisors(arity)
    # pw[e][m] = [z^m] A^e
    pw = [[0] * (N + 1) for _ in range(arity + 1)]
    a = pw[1]
    for n in range(1, N + 1):
        for e in range(2, arity + 1):
            prev = pw[e - 1]
            pw[e][n] = sum(a[i] * prev[n - i] for i in range(1, n))
        tot = 0
        for d in divs:
            if n % d == 0:
                tot += euler_phi(d) * pw[arity // d][n // d]
        val = Fraction(tot, arity) + (1 if n == 1 else 0)
        if val.denominator != 1:
            raise ArithmeticError("non-integral mobile count: the recurrence is inconsistent")
        a[n] = val.numerator
    return TruncatedSeries(a)


def solve_schroder_mobile_series(N: int, method: str = "recurrence") -> TruncatedSeries:
    """Unlabeled Schroder mobiles (cycles of length >= 2) by number of leaves."""
    if N < 1:
        raise ValueError("order must be at least 1")
    if method == "iterate":
        return iterate_fixed_point(schroder_mobile_step, N)[0]
    a = [0] * (N + 1)
    g = [Fraction(0)] * (N + 1)  # g = log(1/(1-A))
    for n in range(1, N + 1):
        conv = Fraction(sum(i * g[i] * a[n - i] for i in range(1, n)), n)
        val = conv + (1 if n == 1 else 0)
        for d in range(2, n + 1):
            if n % d == 0:
                val += Fraction(euler_phi(d), d) * g[n // d]
        if val.denominator != 1:
            raise ArithmeticError("non-integral Schroder mobile count")
        a[n] = val.numerator
        g[n] = a[n] + conv
    return TruncatedSeries(a)


def rho_from_ratios(coeffs: Sequence[int], period: int = 1) -> float:
    """Radius of convergence from coefficient ratios (Domb-Sykes extrapolation).

    The ratios r_n = a_{n+1}/a_n behave like (1/rho)(1 + c/n + O(n^-2)); a
    linear fit in 1/n through the last two ratios removes the first
    correction.
    """
    idx = [m for m, c in enumerate(coeffs) if c != 0]
    idx = idx[-3:]
    if len(idx) < 3:
        raise ValueError("need at least three non-zero coefficients")
    n0, n1, n2 = idx
    with mpmath.workdps(30):
        r1 = (mpmath.mpf(coeffs[n1]) / coeffs[n0]) ** (mpmath.mpf(1) / (n1 - n0))
        r2 = (mpmath.mpf(coeffs[n2]) / coeffs[n1]) ** (mpmath.mpf(1) / (n2 - n1))
        # r(n) ~ L + c/n at n = n0, n1
        L = (n1 * r2 - n0 * r1) / (n1 - n0)
        return float(1 / L)


# ---------------------------------------------------------------------------
# evaluation handles

@dataclass(frozen=True)
class ClosedForm:
    """A generating function known through an mpmath-evaluable formula."""
    name: str
    func: Callable
    radius: object = mpmath.inf
    # True if derivatives stay finite at x = radius
    finite_at_radius: bool = False

    def __call__(self, x):
        return self.func(mpmath.mpf(x))


@dataclass(frozen=True)
class BoltzmannMoments:
    x: object
    value: object
    mu: object
    sigma: object

    @property
    def variance(self):
        return self.sigma ** 2


def boltzmann_moments(gf, x, name: str | None = None) -> BoltzmannMoments:
    """Mean and standard deviation of the Boltzmann size at ``x``.

    ``gf`` is a :class:`TruncatedSeries` (evaluated with a geometric tail
    bound) or a :class:`ClosedForm` (differentiated numerically in high
    precision).
    """
    label = name or getattr(gf, "name", "series")
    with mpmath.workdps(DPS):
        x = mpmath.mpf(x)
        if isinstance(gf, TruncatedSeries):
            s = to_mp(gf) if gf.exact else gf
            if not math.isfinite(float(s.tail_bound(x))):
                raise ValueError(f"{label}: x={mpmath.nstr(x, 8)} is outside the disk of convergence")
            d1 = s.derivative()
            d2 = d1.derivative()
            g0, g1, g2 = s(x), d1(x), d2(x)
        else:
            if x > gf.radius or (x == gf.radius and not gf.finite_at_radius):
                raise ValueError(f"{label}: derivative diverges at x={mpmath.nstr(x, 8)}")
            g0 = gf(x)
            g1 = mpmath.diff(gf.func, x, 1)
            g2 = mpmath.diff(gf.func, x, 2)
        if g0 <= 0:
            raise ValueError(f"{label}: generating function vanishes at x")
        mu = x * g1 / g0
        # sigma^2 = x mu'(x)
        var = x * (g1 + x * g2) / g0 - mu ** 2
        if var < 0:
            var = mpmath.mpf(0)
        return BoltzmannMoments(x=x, value=g0, mu=mu, sigma=mpmath.sqrt(var))


@dataclass(frozen=True)
class EvalTable:
    """Values of A(x^j) for j = 1..J with error estimates."""
    x: object
    values: tuple
    J: int
    errors: tuple
    eps: float

    def value(self, j: int):
        if j < 1:
            raise IndexError("exponents start at 1")
        if j > self.J:
            return mpmath.mpf(0)
        return self.values[j - 1]

    def floats(self) -> list[float]:
        return [float(v) for v in self.values]


def _eval_series(s: TruncatedSeries, y, eps) -> tuple:
    tb = s.tail_bound(y)
    val = s(mpmath.mpf(y))
    return val, tb


def build_eval_table(gf, x, eps: float = 1e-12) -> EvalTable:
    """Tabulate A(x^j) until the remaining Max_Index factors are below ``eps``.

    ``gf`` is either a :class:`TruncatedSeries` of the unlabeled class or a
    tree family object exposing ``atilde(y)`` (value through the implicit
    equation) and ``rho``.
    """
    with mpmath.workdps(DPS):
        x = mpmath.mpf(x)
        if not 0 < x < 1:
            raise ValueError("evaluation point must lie in (0, 1)")
        if isinstance(gf, TruncatedSeries):
            s = to_mp(gf) if gf.exact else gf
            growth = s.ratio_estimate()
            if growth and x * growth >= 1:
                raise ValueError(
                    f"x={mpmath.nstr(x, 10)} is at or beyond the radius of convergence "
                    f"(estimated {1 / growth:.6g})")

            def evaluate(y):
                v, tb = _eval_series(s, y, eps)
                if tb > eps:
                    raise ValueError(f"series of order {s.order} cannot certify A({mpmath.nstr(y, 6)}) to {eps:g}")
                return v, tb
        else:
            if x > gf.rho * (1 + mpmath.mpf(10) ** (-DPS + 5)):
                raise ValueError(
                    f"x={mpmath.nstr(x, 10)} exceeds the radius of convergence "
                    f"{mpmath.nstr(gf.rho, 10)} of {gf.name}")

            def evaluate(y):
                return gf.atilde(y), gf.atilde_error(y)

        vals, errs = [], []
        j = 0
        while True:
            j += 1
            v, e = evaluate(x ** j)
            vals.append(v)
            errs.append(e)
            # sum_{i>=j} A(x^i)/i <= A(x^j) / (j (1-x))
            if v / (j * (1 - x)) < eps:
                break
            if j > 100000:
                raise RuntimeError("evaluation table did not terminate")
        return EvalTable(x=x, values=tuple(vals), J=j, errors=tuple(errs), eps=eps)


# ---------------------------------------------------------------------------
# success probabilities and asymptotic fits

def q_series(spec, n_max: int, exact: bool | None = None) -> list:
    """Per-trial success probabilities q_0..q_n_max of the leap process.

    q_n = [z^n] D(rho z)/D(rho) / (1 - B(rho z)/B(rho)).  ``spec`` supplies
    ``b_law``/``d_law`` (size laws of one B- or D-draw).  On the exact path
    the recurrence runs on rho^-n q_n so that only the small denominators of
    B(rho), D(rho) appear.
    """
    exact = spec.exact if exact is None else exact
    if exact and not spec.exact:
        raise ValueError(f"{spec.name}: no exact rational data")
    if exact:
        rho = spec.rho
        b = [c / spec.b_rho for c in spec.b_coeffs(n_max)]
        g = [Fraction(1)]
        for n in range(1, n_max + 1):
            g.append(sum(b[m] * g[n - m] for m in range(1, n + 1) if b[m]))
        if spec.has_d:
            d = [c / spec.d_rho for c in spec.d_coeffs(n_max)]
            g = [sum(d[m] * g[n - m] for m in range(n + 1) if d[m]) for n in range(n_max + 1)]
        out, p = [], Fraction(1)
        for n in range(n_max + 1):
            out.append(g[n] * p)
            p *= rho
        return out
    b = np.array([float(v) for v in spec.b_law(n_max)])
    f = np.zeros(n_max + 1)
    f[0] = 1.0
    for n in range(1, n_max + 1):
        f[n] = np.dot(b[1 : n + 1], f[n - 1 :: -1])
    if spec.has_d:
        d = np.array([float(v) for v in spec.d_law(n_max)])
        f = np.array([np.dot(d[: n + 1], f[n::-1]) for n in range(n_max + 1)])
    return list(f)


def richardson(values: Sequence, ns: Sequence[int]):
    """Limit of f(n) = L + c_1/n + ... + c_m/n^m from m+1 consecutive samples."""
    m = len(values) - 1
    N = ns[0]
    if list(ns) != list(range(N, N + m + 1)):
        raise ValueError("Richardson extrapolation needs consecutive indices")
    acc = 0
    for j, v in enumerate(values):
        sign = -1 if (m + j) % 2 else 1
        acc += sign * v * mpmath.mpf(N + j) ** m / (math.factorial(j) * math.factorial(m - j))
    return acc


def expansion_coefficient(counts: Sequence[int], rho, s, N: int, order: int = 12):
    """First-order coefficients of [z^n]F = K rho^-n n^(s-1) (1 + f1/n + ...).

    Returns (K', f1) with K' = K/Gamma(s), from Richardson extrapolation of
    e_n = counts[n] rho^n n^(1-s) and of n (e_n/K' - 1) at n = N..N+order.
    """
    with mpmath.workdps(80):
        rho = mpmath.mpf(rho) if not isinstance(rho, Fraction) else mpmath.mpf(rho.numerator) / rho.denominator
        s = mpmath.mpf(s.numerator) / s.denominator if isinstance(s, Fraction) else mpmath.mpf(s)
        ns = list(range(N, N + order + 1))
        e = [mpmath.mpf(counts[n]) * rho ** n * mpmath.mpf(n) ** (1 - s) for n in ns]
        K = richardson(e, ns)
        f = [n * (v / K - 1) for n, v in zip(ns, e)]
        f1 = richardson(f[:-1], ns[:-1])
        return K, f1
