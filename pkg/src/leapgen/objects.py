"""Combinatorial objects produced by the samplers."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from . import _kernels as K

_STEP_CHARS = np.array([ord("D"), ord("E"), ord("U")], dtype=np.uint8)


@dataclass(eq=False)
class LatticeWalk:
    """Steps +1 (U), 0 (E), -1 (D) stored as int8."""
    steps: np.ndarray

    def __post_init__(self):
        self.steps = np.asarray(self.steps, dtype=np.int8)

    def __len__(self):
        return int(self.steps.shape[0])

    def __eq__(self, other):
        return isinstance(other, LatticeWalk) and np.array_equal(self.steps, other.steps)

    def __str__(self):
        return self.to_string()

    @classmethod
    def from_string(cls, s: str) -> "LatticeWalk":
        table = {"U": 1, "E": 0, "D": -1}
        try:
            return cls(np.array([table[c] for c in s.replace(" ", "")], dtype=np.int8))
        except KeyError as exc:
            raise ValueError(f"invalid step {exc.args[0]!r}") from None

    def to_string(self) -> str:
        return _STEP_CHARS[self.steps.astype(np.int64) + 1].tobytes().decode()

    @property
    def is_valid(self) -> bool:
        h = np.cumsum(self.steps, dtype=np.int64)
        return bool(h.size == 0 or (h.min() >= 0 and h[-1] == 0))

    def height(self) -> int:
        return int(K.walk_height(self.steps))

    def n_up(self) -> int:
        return int(np.count_nonzero(self.steps == 1))


@njit(cache=True)
def _parens(parent):
    n = parent.shape[0]
    nchild = np.zeros(n + 1, np.int64)
    for i in range(1, n):
        nchild[parent[i] + 1] += 1
    for i in range(n):
        nchild[i + 1] += nchild[i]
    kids = np.empty(max(n - 1, 1), np.int64)
    fill = nchild[:n].copy()
    for i in range(1, n):
        p = parent[i]
        kids[fill[p]] = i
        fill[p] += 1
    out = np.empty(2 * n, np.uint8)
    pos = 0
    # iterative DFS: stack of (node, next child cursor)
    stack = np.empty(n, np.int64)
    cur = np.empty(n, np.int64)
    top = 0
    stack[0] = 0
    cur[0] = nchild[0]
    out[pos] = 40
    pos += 1
    top = 1
    while top > 0:
        v = stack[top - 1]
        if cur[top - 1] < nchild[v + 1]:
            c = kids[cur[top - 1]]
            cur[top - 1] += 1
            out[pos] = 40
            pos += 1
            stack[top] = c
            cur[top] = nchild[c]
            top += 1
        else:
            out[pos] = 41
            pos += 1
            top -= 1
    return out


@njit(cache=True)
def _from_parens(codes):
    n = codes.shape[0] // 2
    parent = np.empty(n, np.int64)
    stack = np.empty(n, np.int64)
    top = 0
    nxt = 0
    for ch in codes:
        if ch == 40:
            parent[nxt] = stack[top - 1] if top > 0 else -1
            stack[top] = nxt
            top += 1
            nxt += 1
        else:
            top -= 1
    return parent


@dataclass(eq=False)
class RootedTree:
    """Rooted tree as a parent array with ``parent[i] < i`` and root 0.

    Child order (by index) is a storage artifact: Polya and phylogenetic
    trees are unordered, mobiles cyclic.
    """
    parent: np.ndarray
    kind: str = "tree"

    def __post_init__(self):
        self.parent = np.asarray(self.parent, dtype=np.int64)

    def __len__(self):
        return int(self.parent.shape[0])

    @property
    def n_nodes(self) -> int:
        return len(self)

    def check(self) -> None:
        p = self.parent
        if p.size == 0 or p[0] != -1:
            raise ValueError("root must be node 0 with parent -1")
        if p.size > 1 and not np.all((p[1:] >= 0) & (p[1:] < np.arange(1, p.size))):
            raise ValueError("parent array is not topologically ordered")

    def child_counts(self) -> np.ndarray:
        return np.bincount(self.parent[1:], minlength=len(self))

    def n_leaves(self) -> int:
        return int(np.count_nonzero(self.child_counts() == 0))

    def stats(self):
        h, leaves, cherries, mean_depth = K.tree_stats(self.parent)
        return int(h), int(leaves), int(cherries), float(mean_depth)

    def height(self) -> int:
        return self.stats()[0]

    def to_parens(self) -> str:
        return _parens(self.parent).tobytes().decode()

    @classmethod
    def from_parens(cls, s: str, kind: str = "tree") -> "RootedTree":
        codes = np.frombuffer(s.strip().encode(), dtype=np.uint8)
        if codes.size == 0 or codes.size % 2 or not set(np.unique(codes)) <= {40, 41}:
            raise ValueError("not a balanced parenthesis string")
        depth = np.cumsum(np.where(codes == 40, 1, -1))
        if depth.min() < 0 or depth[-1] != 0 or np.count_nonzero(depth == 0) != 1:
            raise ValueError("not a single rooted tree")
        return cls(_from_parens(codes), kind)

    def canonical(self) -> str:
        """Canonical string of the unordered shape (children sorted)."""
        n = len(self)
        kids = [[] for _ in range(n)]
        for i in range(1, n):
            kids[self.parent[i]].append(i)
        code = [""] * n
        for v in range(n - 1, -1, -1):
            code[v] = "(" + "".join(sorted(code[c] for c in kids[v])) + ")"
        return code[0]

    def __eq__(self, other):
        return isinstance(other, RootedTree) and np.array_equal(self.parent, other.parent)

    def __str__(self):
        return self.to_parens()


@dataclass(eq=False)
class BComponent:
    """One Boltzmann draw of the inner class.

    ``payload`` is a pair of run lengths for walks and a :class:`RootedTree`
    (root = substitution vertex) for trees.
    """
    tag: str
    payload: object
    size: int

    def atom_count(self) -> int:
        if isinstance(self.payload, RootedTree):
            if self.tag in ("polya",):
                return len(self.payload)
            return self.payload.n_leaves()
        i, j = self.payload
        return i + j + (2 if self.tag == "motzkin" else 1)


@dataclass(eq=False)
class ComposedObject:
    """Output of a leap generator, with the optional decomposition it came from."""
    tag: str
    obj: object
    core_size: int
    d_part: Optional[int] = None
    core: Optional[object] = None
    components: Optional[object] = field(default=None, repr=False)

    @property
    def size(self) -> int:
        if isinstance(self.obj, LatticeWalk):
            if self.tag == "schroder":
                return int(np.count_nonzero(self.obj.steps == 1) + np.count_nonzero(self.obj.steps == 0))
            return len(self.obj)
        if self.tag == "polya":
            return len(self.obj)
        return self.obj.n_leaves()

    def serialize(self) -> str:
        return self.obj.to_string() if isinstance(self.obj, LatticeWalk) else self.obj.to_parens()
