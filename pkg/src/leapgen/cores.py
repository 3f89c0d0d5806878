"""Exact-size uniform samplers for the labeled core classes."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels as K
from .families import Support
from .objects import LatticeWalk, RootedTree


class SupportError(ValueError):
    """Requested size has no object in the class."""


def dyck_uniform(k: int, rng) -> LatticeWalk:
    """Uniform Dyck walk of semilength k (cycle lemma)."""
    if k < 0:
        raise SupportError("semilength must be non-negative")
    return LatticeWalk(K.dyck_cycle(int(k), rng))


def cayley_uniform(k: int, rng, labels: bool = False):
    """Shape of a uniform rooted labeled tree on k vertices.

    With ``labels=True`` the tree comes from a random Pruefer code and the
    label of each node is returned too.  Without labels the shape is drawn
    as a Poisson(1) GW tree with k nodes: the degree vector is multinomial
    with equal cell probabilities (already exchangeable), then rotated by
    the cycle lemma.  Both give the same shape law; the second touches
    memory sequentially, which matters past a few 10^5 vertices.
    """
    if k < 1:
        raise SupportError("a tree needs at least one vertex")
    k = int(k)
    if labels:
        parent, lab = K.cayley_tree(k, rng)
        return RootedTree(parent, "polya"), lab
    if k == 1:
        return RootedTree(np.full(1, -1, np.int64), "polya")
    deg = rng.multinomial(k - 1, np.full(k, 1.0 / k)).astype(np.int64)
    return RootedTree(K.preorder_parents(K.lukasiewicz_rotate(deg)), "polya")


def phylo_uniform(k: int, rng, labels: bool = False):
    """Shape of a uniform leaf-labeled binary tree with k leaves.

    With ``labels=True`` Remy's leaf insertion is used and leaf labels are
    returned.  Otherwise a uniform plane binary tree is drawn (random
    arrangement of the preorder word plus cycle lemma): every unordered
    leaf-labeled tree has exactly 2^(k-1) plane embeddings, so the shape
    laws agree.
    """
    if k < 1:
        raise SupportError("a tree needs at least one leaf")
    k = int(k)
    if labels:
        parent, lab = K.remy_tree(k, rng)
        return RootedTree(parent, "phylo"), lab
    word = K.lukasiewicz_rotate(K.binary_word(k, rng))
    return RootedTree(K.preorder_parents(word), "phylo")


# --------------------------------------------------------------------------
# mobiles through Galton-Watson trees

@dataclass(frozen=True)
class OffspringSpec:
    """Critical offspring law of A = z * Phi(A) with Phi = 1/(1 - G).

    A node of the GW tree is a leaf of the mobile; its j children are split
    into blocks, a block of size e standing for one cycle node of arity e+1.
    ``part_weight[e]`` is the coefficient g_e of G, ``tau`` the critical point.
    """
    name: str
    support: Support
    tau: float
    part_weight: np.ndarray   # g_e, e >= 1 (index 0 unused)
    phi: np.ndarray           # [y^j] Phi(tau*y)
    fixed_part: int = 0

    @property
    def probs(self) -> np.ndarray:
        return self.phi / self.phi.sum()

    def truncation(self, k: int) -> int:
        """Largest degree kept for trees with k nodes (k * tail mass < 1e-16)."""
        p = self.probs
        tail = np.cumsum(p[::-1])[::-1]
        ok = np.nonzero(tail * max(k, 1) < 1e-16)[0]
        J = int(ok[0]) if ok.size else p.size
        return max(1, min(J, k))

    def comp_table(self, dmax: int) -> np.ndarray:
        """comp[j, e] = g_e tau^e phi_{j-e}; comp[j, 0] = phi_j."""
        dmax = max(dmax, 1)
        g = np.zeros(dmax + 1)
        m = min(dmax + 1, self.part_weight.size)
        g[1:m] = self.part_weight[1:m] * self.tau ** np.arange(1, m)
        phi = np.zeros(dmax + 1)
        m = min(dmax + 1, self.phi.size)
        phi[:m] = self.phi[:m]
        comp = np.zeros((dmax + 1, dmax + 1))
        for j in range(1, dmax + 1):
            comp[j, 1 : j + 1] = g[1 : j + 1] * phi[j - 1 :: -1][:j]
            comp[j, 0] = phi[j]
        return comp


def _phi_from_parts(g: np.ndarray, tau: float, J: int) -> np.ndarray:
    gt = g[: J + 1] * tau ** np.arange(min(J + 1, g.size))
    phi = np.zeros(J + 1)
    phi[0] = 1.0
    for j in range(1, J + 1):
        e = np.arange(1, min(j, gt.size - 1) + 1)
        phi[j] = np.dot(gt[e], phi[j - e])
    return phi


@lru_cache(maxsize=None)
def kary_offspring(arity: int) -> OffspringSpec:
    """k-ary mobiles: Phi(y) = 1/(1 - y^(k-1)/k), critical at tau = 1."""
    if arity < 2:
        raise ValueError("arity must be at least 2")
    r = arity
    mmax = int(math.ceil(745 / math.log(r)))   # r^-m underflows past this
    J = (r - 1) * mmax
    g = np.zeros(r)
    g[r - 1] = 1.0 / r
    phi = np.zeros(J + 1)
    phi[:: r - 1] = float(r) ** -np.arange(mmax + 1, dtype=float)
    return OffspringSpec(f"mobile:{r}", Support(1, r - 1, 1), 1.0, g, phi, fixed_part=r - 1)


@lru_cache(maxsize=None)
def schroder_offspring() -> OffspringSpec:
    """Schroder mobiles: G(y) = (log(1/(1-y)) - y)/y, critical at tau = 1/2.

    tau solves tau*G'(tau) = 1 - G(tau); since tau*G'(tau) = tau/(1-tau) - G(tau)
    this reduces to tau/(1-tau) = 1.
    """
    J = 1600
    g = np.zeros(J + 1)
    g[1:] = 1.0 / (np.arange(1, J + 1) + 1.0)
    phi = _phi_from_parts(g, 0.5, J)
    nz = np.nonzero(phi > 1e-300)[0]
    phi = phi[: nz[-1] + 1]
    return OffspringSpec("schroder-mobile", Support(0, 1, 1), 0.5, g, phi)


def get_offspring(name: str) -> OffspringSpec:
    if name == "schroder-mobile":
        return schroder_offspring()
    if name.startswith("mobile:"):
        return kary_offspring(int(name.split(":", 1)[1]))
    raise KeyError(f"no Galton-Watson description for {name!r}")


def _gw_degrees(spec: OffspringSpec, k: int, rng) -> np.ndarray:
    """Degree sequence of a GW tree conditioned on k nodes, in preorder."""
    J = spec.truncation(k)
    if spec.fixed_part:
        step = spec.fixed_part
        cats = np.arange(0, J + 1, step)
        p = spec.probs[cats]
    else:
        cats = np.arange(J + 1)
        p = spec.probs[: J + 1]
    p = p / p.sum()
    # rejection on the total degree; draws are batched and the first hit in
    # draw order is kept, which is the same as drawing one at a time
    batch = 1 if k < 50 else 256
    while True:
        draws = rng.multinomial(k, p, size=batch)
        hit = np.flatnonzero(draws @ cats == k - 1)
        if hit.size:
            counts = draws[hit[0]]
            break
    # small dtype keeps the shuffle cache-friendly at large k
    deg = np.repeat(cats, counts).astype(np.int16 if J < 2 ** 15 else np.int64)
    K.shuffle(deg, rng)
    return K.lukasiewicz_rotate(deg)


def gw_core_uniform(spec: OffspringSpec, k: int, rng, gw: bool = False):
    """Uniform labeled mobile with k leaves, returned as its shape.

    Draws the GW tree with k nodes (multinomial degrees conditioned on the
    sum, then the cycle lemma) and expands each node into its leaf and the
    cycle nodes above it.  With ``gw=True`` the GW tree is returned as well.
    """
    if k < 1 or k not in spec.support:
        raise SupportError(f"{spec.name} has no object with {k} leaves")
    deg = _gw_degrees(spec, int(k), rng)
    gw_parent = K.preorder_parents(deg)
    comp = spec.comp_table(int(deg.max()) if deg.size else 1)
    parent, isleaf = K.mobile_from_gw(deg, gw_parent, comp, rng, spec.fixed_part)
    t = RootedTree(parent, spec.name)
    return (t, RootedTree(gw_parent, "gw")) if gw else t


def core_sampler(name: str):
    """Callable (k, rng) -> core object for a class name."""
    if name in ("motzkin", "schroder"):
        return dyck_uniform
    if name == "polya":
        return cayley_uniform
    if name == "phylo":
        return phylo_uniform
    spec = get_offspring(name)
    return lambda k, rng: gw_core_uniform(spec, k, rng)
