"""Compiled inner loops.

Trees are parent arrays in topological order (``parent[i] < i``, root 0 with
parent -1).  Walks are int8 step arrays (+1 up, 0 flat, -1 down).  All
randomness comes from a numpy ``Generator`` passed in by the caller.
"""
import numpy as np
from numba import njit

# tree classes for the Boltzmann kernel
POLYA = 0
PHYLO = 1
KARY = 2
SCHRODER_MOBILE = 3

_EXPAND = 0
_GROUP = 1
_COPY = 2


# --------------------------------------------------------------------------
# primitive laws by inversion

@njit(cache=True)
def geometric(p, rng):
    """Pr(i) = (1-p) p^i, by sequential inversion of the CDF 1 - p^(i+1)."""
    if p <= 0.0:
        return 0
    t = 1.0 - rng.random()
    i = 0
    q = p
    while t <= q:
        i += 1
        q *= p
    return i


@njit(cache=True)
def poisson(lam, pz, rng):
    """Poisson(lam) by inversion; pz = exp(-lam) is passed in precomputed."""
    if lam <= 0.0:
        return 0
    u = rng.random()
    k = 0
    pk = pz
    cdf = pk
    while u >= cdf:
        k += 1
        pk *= lam / k
        cdf += pk
        if pk == 0.0 and k > lam:
            break
    return k


@njit(cache=True)
def poisson_ge1(lam, pz, pnz, rng):
    """Poisson(lam) conditioned on >= 1, by inversion of the shifted CDF.

    pnz = 1 - exp(-lam) is passed in precomputed (via expm1).
    """
    u = rng.random() * pnz
    k = 1
    pk = lam * pz
    cdf = pk
    while u >= cdf:
        k += 1
        pk *= lam / k
        cdf += pk
        if pk == 0.0 and k > lam:
            break
    return k


@njit(cache=True)
def bernoulli(p, rng):
    return rng.random() < p


@njit(cache=True)
def logseries(a, m0, norm, rng):
    """Pr(m) proportional to a^m/m for m >= m0; norm is the total mass."""
    u = rng.random() * norm
    m = m0
    pw = a ** m0
    cdf = pw / m
    while u >= cdf:
        m += 1
        pw *= a
        term = pw / m
        cdf += term
        if term == 0.0:
            break
    return m


@njit(cache=True)
def cdf_index(row, u):
    k = 0
    n = row.shape[0]
    while k < n - 1 and u >= row[k]:
        k += 1
    return k


# --------------------------------------------------------------------------
# Boltzmann generator for the tree classes

@njit(cache=True)
def _grow1(a, need):
    if need <= a.shape[0]:
        return a
    cap = a.shape[0] * 2
    while cap < need:
        cap *= 2
    b = np.empty(cap, a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _grow2(a, need):
    if need <= a.shape[0]:
        return a
    cap = a.shape[0] * 2
    while cap < need:
        cap *= 2
    b = np.empty((cap, a.shape[1]), a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _expand(cls, row, tb, rng, groups):
    """Decide the children of one node drawn at exponent row (row 0 = B root).

    Writes (exponent, count, multiplicity) triples into ``groups`` and
    returns their number; 0 means the node is a leaf.
    """
    pleaf, T, lam, pz, pnz, dcum, dval, dcount, lsa, lsz = tb
    e = row if row > 0 else 1
    ng = 0
    if cls == POLYA:
        K = cdf_index(T[row], rng.random())
        if K == 0:
            return 0
        for j in range(1, K + 1):
            if j < K:
                c = poisson(lam[row, j], pz[row, j], rng)
            elif lam[row, j] > 0.0:
                c = poisson_ge1(lam[row, j], pz[row, j], pnz[row, j], rng)
            else:
                c = 0
            for _ in range(c):
                if ng == groups.shape[0]:
                    raise RuntimeError("group scratch exhausted")
                groups[ng, 0] = e * j
                groups[ng, 1] = 1
                groups[ng, 2] = j
                ng += 1
        return ng
    if rng.random() < pleaf[row]:
        return 0
    if cls == PHYLO:
        if rng.random() < dcum[row, 0]:
            groups[0, 0] = e
            groups[0, 1] = 2
            groups[0, 2] = 1
        else:
            groups[0, 0] = 2 * e
            groups[0, 1] = 1
            groups[0, 2] = 2
        return 1
    idx = cdf_index(dcum[row], rng.random())
    d = dval[idx]
    if cls == KARY:
        groups[0, 0] = e * d
        groups[0, 1] = dcount[idx]
        groups[0, 2] = d
        return 1
    # Schroder mobile: a cycle of d identical blocks of m >= 1 subtrees
    m0 = 2 if d == 1 else 1
    m = logseries(lsa[row, idx], m0, lsz[row, idx], rng)
    groups[0, 0] = e * d
    groups[0, 1] = m
    groups[0, 2] = d
    return 1


@njit(cache=True)
def _draw_one(cls, root_row, emax, tb, rng, parent, pos, stack, groups, count_leaves):
    """Grow one Boltzmann tree starting at ``pos``; returns (parent, pos, stack, size)."""
    parent = _grow1(parent, pos + 1)
    root = pos
    parent[pos] = -1
    pos += 1
    leaves = 0
    top = 0
    stack[0, 0] = _EXPAND
    stack[0, 1] = root
    stack[0, 2] = root_row
    top = 1
    while top > 0:
        top -= 1
        kind = stack[top, 0]
        if kind == _EXPAND:
            node = stack[top, 1]
            row = stack[top, 2]
            if row > emax:
                leaves += 1
                continue
            ng = _expand(cls, row, tb, rng, groups)
            if ng == 0:
                leaves += 1
                continue
            stack = _grow2(stack, top + ng + 1)
            for g in range(ng):
                stack[top, 0] = _GROUP
                stack[top, 1] = node
                stack[top, 2] = groups[g, 0]
                stack[top, 3] = groups[g, 1]
                stack[top, 4] = groups[g, 2]
                top += 1
        elif kind == _GROUP:
            node = stack[top, 1]
            row = stack[top, 2]
            count = stack[top, 3]
            mult = stack[top, 4]
            start = pos
            parent = _grow1(parent, pos + count)
            stack = _grow2(stack, top + count + 2)
            if mult > 1:
                stack[top, 0] = _COPY
                stack[top, 1] = start
                stack[top, 2] = leaves
                stack[top, 3] = mult
                top += 1
            for c in range(count):
                parent[pos] = node
                stack[top, 0] = _EXPAND
                stack[top, 1] = pos
                stack[top, 2] = row
                top += 1
                pos += 1
        else:
            start = stack[top, 1]
            block_leaves = leaves - stack[top, 2]
            mult = stack[top, 3]
            L = pos - start
            parent = _grow1(parent, pos + (mult - 1) * L)
            for t in range(1, mult):
                shift = t * L
                for i in range(L):
                    p = parent[start + i]
                    parent[pos] = p + shift if p >= start else p
                    pos += 1
            leaves += (mult - 1) * block_leaves
    size = leaves if count_leaves else pos - root
    return parent, pos, stack, size


@njit(cache=True)
def tree_components(budget, max_components, cls, root_row, emax, tb, count_leaves, rng,
                    parent, cstart, csize):
    """Draw Boltzmann components until their total size reaches ``budget``.

    Returns (parent, cstart, csize, ncomp, total, nodes_used).
    """
    stack = np.empty((64, 5), np.int64)
    groups = np.empty((4096, 3), np.int64)
    pos = 0
    total = 0
    ncomp = 0
    while total < budget and ncomp < max_components:
        cstart = _grow1(cstart, ncomp + 1)
        csize = _grow1(csize, ncomp + 1)
        cstart[ncomp] = pos
        parent, pos, stack, size = _draw_one(cls, root_row, emax, tb, rng, parent, pos, stack,
                                             groups, count_leaves)
        csize[ncomp] = size
        total += size
        ncomp += 1
    return parent, cstart, csize, ncomp, total, pos


@njit(cache=True)
def tree_trials(n, sup_off, sup_per, sup_min, wacc, max_trials, cls, emax, tb, count_leaves, rng,
                parent, cstart, csize):
    """Leap trials for a tree scheme (no distinguished component).

    Returns (ok, k, trials, draws, failed_atoms, parent, cstart, csize, nodes).
    ``wacc`` holds per-core-size acceptance probabilities (empty: accept).
    """
    trials = 0
    draws = 0
    failed = 0
    while trials < max_trials:
        trials += 1
        parent, cstart, csize, k, total, nodes = tree_components(
            n, 1 << 62, cls, 0, emax, tb, count_leaves, rng, parent, cstart, csize)
        draws += k
        if total == n and k >= sup_min and (k - sup_off) % sup_per == 0:
            if wacc.shape[0] == 0 or rng.random() < wacc[k]:
                return True, k, trials, draws, failed, parent, cstart, csize, nodes
        failed += total
    return False, 0, trials, draws, failed, parent, cstart, csize, 0


@njit(cache=True)
def tree_core_sizes(count, n, sup_off, sup_per, sup_min, wacc, max_trials, cls, emax, tb,
                    count_leaves, rng):
    """Core sizes, trial counts and B-draw counts of ``count`` leap samples."""
    ks = np.empty(count, np.int64)
    tr = np.empty(count, np.int64)
    dr = np.empty(count, np.int64)
    parent = np.empty(max(16, 2 * n), np.int64)
    cstart = np.empty(max(16, n), np.int64)
    csize = np.empty(max(16, n), np.int64)
    for s in range(count):
        ok, k, trials, draws, failed, parent, cstart, csize, nodes = tree_trials(
            n, sup_off, sup_per, sup_min, wacc, max_trials, cls, emax, tb, count_leaves, rng,
            parent, cstart, csize)
        if not ok:
            raise RuntimeError("trial cap reached")
        ks[s] = k
        tr[s] = trials
        dr[s] = draws
    return ks, tr, dr


@njit(cache=True)
def tree_component_sizes(count, cls, root_row, emax, tb, count_leaves, rng):
    """Sizes of ``count`` independent Boltzmann draws (node buffer reused)."""
    out = np.empty(count, np.int64)
    parent = np.empty(1024, np.int64)
    stack = np.empty((64, 5), np.int64)
    groups = np.empty((4096, 3), np.int64)
    for i in range(count):
        parent, pos, stack, size = _draw_one(cls, root_row, emax, tb, rng, parent, 0, stack,
                                             groups, count_leaves)
        out[i] = size
    return out


# --------------------------------------------------------------------------
# walks

@njit(cache=True)
def walk_components(budget, max_components, p, base, rng, runs):
    """Pairs of geometric runs until the total size reaches ``budget``."""
    total = 0
    k = 0
    while total < budget and k < max_components:
        if k == runs.shape[0]:
            runs = _grow2(runs, k + 1)
        i = geometric(p, rng)
        j = geometric(p, rng)
        runs[k, 0] = i
        runs[k, 1] = j
        total += i + j + base
        k += 1
    return runs, k, total


@njit(cache=True)
def walk_trials(n, p, pd, has_d, base, wacc, max_trials, rng, runs):
    """Leap trials for Motzkin/Schroder walks with a leading flat run.

    Returns (ok, k, d, trials, draws, failed_atoms, runs).
    """
    trials = 0
    draws = 0
    failed = 0
    while trials < max_trials:
        trials += 1
        d = geometric(pd, rng) if has_d else 0
        if d > n:
            failed += d
            continue
        runs, k, total = walk_components(n - d, 1 << 62, p, base, rng, runs)
        draws += k
        if d + total == n:
            if wacc.shape[0] == 0 or rng.random() < wacc[k]:
                return True, k, d, trials, draws, failed, runs
        failed += d + total
    return False, 0, 0, trials, draws, failed, runs


@njit(cache=True)
def walk_core_sizes(count, n, p, pd, has_d, base, wacc, max_trials, rng):
    ks = np.empty(count, np.int64)
    tr = np.empty(count, np.int64)
    dr = np.empty(count, np.int64)
    runs = np.empty((max(16, n), 2), np.int64)
    for s in range(count):
        ok, k, d, trials, draws, failed, runs = walk_trials(n, p, pd, has_d, base, wacc, max_trials, rng, runs)
        if not ok:
            raise RuntimeError("trial cap reached")
        ks[s] = k
        tr[s] = trials
        dr[s] = draws
    return ks, tr, dr


@njit(cache=True)
def walk_heights(count, n, p, pd, has_d, base, wacc, max_trials, rng):
    """Heights of leap-sampled walks; the height is that of the Dyck core."""
    hs = np.empty(count, np.int64)
    ks = np.empty(count, np.int64)
    runs = np.empty((max(16, n), 2), np.int64)
    for s in range(count):
        ok, k, d, trials, draws, failed, runs = walk_trials(n, p, pd, has_d, base, wacc, max_trials, rng, runs)
        if not ok:
            raise RuntimeError("trial cap reached")
        steps = dyck_cycle(k, rng)
        hs[s] = walk_height(steps)
        ks[s] = k
    return hs, ks


# --------------------------------------------------------------------------
# exact-size cores

@njit(cache=True)
def shuffle(a, rng):
    for i in range(a.shape[0] - 1, 0, -1):
        j = rng.integers(0, i + 1)
        t = a[i]
        a[i] = a[j]
        a[j] = t


@njit(cache=True)
def dyck_cycle(k, rng):
    """Uniform Dyck walk of semilength k via the cycle lemma."""
    m = 2 * k + 1
    seq = np.empty(m, np.int8)
    for i in range(m):
        seq[i] = 1 if i <= k else -1
    shuffle(seq, rng)
    # start after the last minimum of the prefix sums P_0..P_{m-1}
    best = 0
    arg = 0
    s = 0
    for i in range(m):
        if s <= best:
            best = s
            arg = i
        s += seq[i]
    out = np.empty(2 * k, np.int8)
    for t in range(1, m):
        out[t - 1] = seq[(arg + t) % m]
    return out


@njit(cache=True)
def _orient(n, eu, ev, root):
    """Parent array in BFS order of the tree with edges (eu, ev) rooted at root."""
    deg = np.zeros(n + 1, np.int64)
    for i in range(eu.shape[0]):
        deg[eu[i] + 1] += 1
        deg[ev[i] + 1] += 1
    for i in range(n):
        deg[i + 1] += deg[i]
    adj = np.empty(2 * eu.shape[0], np.int64)
    fill = deg[:n].copy()
    for i in range(eu.shape[0]):
        adj[fill[eu[i]]] = ev[i]
        fill[eu[i]] += 1
        adj[fill[ev[i]]] = eu[i]
        fill[ev[i]] += 1
    new = np.full(n, -1, np.int64)
    order = np.empty(n, np.int64)
    parent = np.empty(n, np.int64)
    order[0] = root
    new[root] = 0
    parent[0] = -1
    head = 0
    tail = 1
    while head < tail:
        v = order[head]
        for t in range(deg[v], deg[v + 1]):
            w = adj[t]
            if new[w] < 0:
                new[w] = tail
                order[tail] = w
                parent[tail] = new[v]
                tail += 1
        head += 1
    return parent, order


@njit(cache=True)
def prufer_decode(seq, n):
    """Edges of the labeled tree on n vertices with Prufer sequence ``seq``."""
    deg = np.ones(n, np.int64)
    for x in seq:
        deg[x] += 1
    eu = np.empty(n - 1, np.int64)
    ev = np.empty(n - 1, np.int64)
    ptr = 0
    while deg[ptr] != 1:
        ptr += 1
    leaf = ptr
    e = 0
    for x in seq:
        eu[e] = leaf
        ev[e] = x
        e += 1
        deg[x] -= 1
        if x < ptr and deg[x] == 1:
            leaf = x
        else:
            ptr += 1
            while deg[ptr] != 1:
                ptr += 1
            leaf = ptr
    # last edge joins the remaining leaf with n-1
    eu[e] = leaf
    ev[e] = n - 1
    return eu, ev


@njit(cache=True)
def cayley_tree(k, rng):
    """Uniform rooted labeled tree on k vertices; returns (parent, labels)."""
    if k == 1:
        return np.full(1, -1, np.int64), np.zeros(1, np.int64)
    seq = np.empty(k - 2, np.int64)
    for i in range(k - 2):
        seq[i] = rng.integers(0, k)
    eu, ev = prufer_decode(seq, k)
    root = rng.integers(0, k)
    return _orient(k, eu, ev, root)


@njit(cache=True)
def remy_tree(k, rng):
    """Uniform leaf-labeled binary tree with k leaves by sequential insertion.

    Returns (parent in BFS order, leaf label per node or -1).
    """
    m = 2 * k - 1
    par = np.full(m, -1, np.int64)
    left = np.full(m, -1, np.int64)
    right = np.full(m, -1, np.int64)
    label = np.full(m, -1, np.int64)
    label[0] = 0
    root = 0
    used = 1
    for j in range(1, k):
        u = rng.integers(0, used)
        w = used
        leaf = used + 1
        used += 2
        pu = par[u]
        par[w] = pu
        if pu < 0:
            root = w
        elif left[pu] == u:
            left[pu] = w
        else:
            right[pu] = w
        left[w] = u
        right[w] = leaf
        par[u] = w
        par[leaf] = w
        label[leaf] = j
    # relabel in BFS order
    parent = np.empty(m, np.int64)
    lab = np.empty(m, np.int64)
    order = np.empty(m, np.int64)
    newid = np.empty(m, np.int64)
    order[0] = root
    newid[root] = 0
    parent[0] = -1
    head = 0
    tail = 1
    while head < tail:
        v = order[head]
        lab[head] = label[v]
        for c in (left[v], right[v]):
            if c >= 0:
                newid[c] = tail
                order[tail] = c
                parent[tail] = head
                tail += 1
        head += 1
    return parent, lab


@njit(cache=True)
def lukasiewicz_rotate(deg):
    """Rotate a degree sequence with sum(deg - 1) = -1 to a valid preorder word."""
    n = deg.shape[0]
    best = 1
    arg = 0
    s = 0
    for i in range(n):
        s += deg[i] - 1
        if s < best:
            best = s
            arg = i
    out = np.empty(n, deg.dtype)
    for t in range(n):
        out[t] = deg[(arg + 1 + t) % n]
    return out


@njit(cache=True)
def binary_word(k, rng):
    """Uniform arrangement of k-1 twos and k zeros (sequential selection)."""
    n = 2 * k - 1
    out = np.zeros(n, np.int8)
    twos = k - 1
    for i in range(n):
        if twos > 0 and rng.random() * (n - i) < twos:
            out[i] = 2
            twos -= 1
    return out


@njit(cache=True)
def preorder_parents(deg):
    """Parent array (preorder indices) of the plane tree with preorder degrees."""
    n = deg.shape[0]
    parent = np.empty(n, np.int64)
    stack = np.empty(n, np.int64)
    left = np.empty(n, np.int64)
    top = 0
    parent[0] = -1
    if deg[0] > 0:
        stack[0] = 0
        left[0] = deg[0]
        top = 1
    for i in range(1, n):
        v = stack[top - 1]
        parent[i] = v
        left[top - 1] -= 1
        if left[top - 1] == 0:
            top -= 1
        if deg[i] > 0:
            stack[top] = i
            left[top] = deg[i]
            top += 1
    return parent


@njit(cache=True)
def mobile_from_gw(deg, gw_parent, comp_weights, rng, fixed_part):
    """Expand each node of a plane GW tree into a spine of cycle nodes plus a leaf.

    A node with j children is split into parts e_1..e_p (sum j) chosen with
    probability proportional to prod comp_weights[e_i] * (table-normalised),
    or into parts of size ``fixed_part`` when that is positive.  Spine node i
    carries the next spine node (or the leaf) and the e_i children of block
    i.  Returns the parent array of the mobile and the leaf mask.
    """
    n = deg.shape[0]
    total_internal = 0
    # upper bound on spine nodes: sum of degrees = n - 1
    cap = 2 * n + 1
    parent = np.empty(cap, np.int64)
    isleaf = np.zeros(cap, np.bool_)
    attach = np.empty(n, np.int64)   # mobile node under which GW node v hangs
    attach[0] = -1
    # children of each GW node are contiguous in BFS?  preorder: collect per parent
    first = np.full(n, -1, np.int64)
    nxt = np.full(n, -1, np.int64)
    lastc = np.full(n, -1, np.int64)
    for v in range(1, n):
        p = gw_parent[v]
        if first[p] < 0:
            first[p] = v
        else:
            nxt[lastc[p]] = v
        lastc[p] = v
    pos = 0
    parts = np.empty(n + 1, np.int64)
    order = np.empty(n, np.int64)
    order[0] = 0
    head = 0
    tail = 1
    while head < tail:
        v = order[head]
        head += 1
        j = deg[v]
        # choose the composition of j
        np_ = 0
        rem = j
        while rem > 0:
            if fixed_part > 0:
                e = fixed_part
            else:
                u = rng.random() * comp_weights[rem, 0]
                e = 1
                acc = comp_weights[rem, 1]
                while u >= acc and e < rem:
                    e += 1
                    acc += comp_weights[rem, e]
            parts[np_] = e
            np_ += 1
            rem -= e
        up = attach[v]
        c = first[v]
        for i in range(np_):
            parent[pos] = up
            s = pos
            pos += 1
            total_internal += 1
            for _ in range(parts[i]):
                attach[c] = s
                order[tail] = c
                tail += 1
                c = nxt[c]
            up = s
        parent[pos] = up
        isleaf[pos] = True
        pos += 1
    # nodes were created in BFS order of GW nodes, so parent[i] < i already
    return parent[:pos], isleaf[:pos]


# --------------------------------------------------------------------------
# assembly

@njit(cache=True)
def assemble_tree(core_parent, atoms, comp_parent, cstart, ncomp, nodes_end):
    """Attach component c (root identified with core node atoms[c])."""
    m = core_parent.shape[0]
    total = m + (nodes_end - ncomp)
    out = np.empty(total, np.int64)
    out[:m] = core_parent
    base = m
    for c in range(ncomp):
        s = cstart[c]
        e = cstart[c + 1] if c + 1 < ncomp else nodes_end
        for g in range(s + 1, e):
            p = comp_parent[g]
            out[base + (g - s - 1)] = atoms[c] if p == s else base + (p - s - 1)
        base += e - s - 1
    return out


@njit(cache=True)
def assemble_walk(core, runs, k, d, n):
    out = np.zeros(n, np.int8)
    pos = d
    for s in range(2 * k):
        out[pos] = core[s]
        pos += 1
        pos += runs[s // 2, s % 2]
    return out


# --------------------------------------------------------------------------
# statistics

@njit(cache=True)
def tree_depths(parent):
    n = parent.shape[0]
    depth = np.zeros(n, np.int64)
    for i in range(1, n):
        depth[i] = depth[parent[i]] + 1
    return depth


@njit(cache=True)
def tree_stats(parent):
    """(height, leaves, cherries, mean depth) of a topologically ordered tree."""
    n = parent.shape[0]
    depth = np.zeros(n, np.int64)
    nchild = np.zeros(n, np.int64)
    h = 0
    tot = 0
    for i in range(1, n):
        d = depth[parent[i]] + 1
        depth[i] = d
        nchild[parent[i]] += 1
        tot += d
        if d > h:
            h = d
    leaves = 0
    for i in range(n):
        if nchild[i] == 0:
            leaves += 1
    leafkids = np.zeros(n, np.int64)
    for i in range(1, n):
        if nchild[i] == 0:
            leafkids[parent[i]] += 1
    cherries = 0
    for i in range(n):
        if nchild[i] == 2 and leafkids[i] == 2:
            cherries += 1
    return h, leaves, cherries, tot / n


@njit(cache=True)
def walk_height(steps):
    h = 0
    y = 0
    for s in steps:
        y += s
        if y > h:
            h = y
    return h


@njit(cache=True)
def canonical_code(parent):
    """Bit-string code of the unordered shape (trees up to 31 nodes)."""
    n = parent.shape[0]
    val = np.zeros(n, np.int64)
    ln = np.zeros(n, np.int64)
    nchild = np.zeros(n, np.int64)
    for i in range(1, n):
        nchild[parent[i]] += 1
    start = np.zeros(n + 1, np.int64)
    for i in range(n):
        start[i + 1] = start[i] + nchild[i]
    kids = np.empty(max(n - 1, 1), np.int64)
    fill = start[:n].copy()
    for i in range(1, n):
        p = parent[i]
        kids[fill[p]] = i
        fill[p] += 1
    for v in range(n - 1, -1, -1):
        a = start[v]
        b = start[v + 1]
        # insertion sort of children by (length, value)
        for i in range(a + 1, b):
            x = kids[i]
            j = i - 1
            while j >= a and (ln[kids[j]] > ln[x] or (ln[kids[j]] == ln[x] and val[kids[j]] > val[x])):
                kids[j + 1] = kids[j]
                j -= 1
            kids[j + 1] = x
        code = 1
        length = 1
        for i in range(a, b):
            c = kids[i]
            code = (code << ln[c]) | val[c]
            length += ln[c]
        code = code << 1
        length += 1
        val[v] = code
        ln[v] = length
    return val[0]
