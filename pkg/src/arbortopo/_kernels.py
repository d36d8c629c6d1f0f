"""Hot numeric kernels: counter-based RNG, tree generation, per-tree stats.

Every kernel is compiled with numba when available; setting
``ARBORTOPO_DISABLE_NUMBA=1`` (or any value other than ``0``) selects the
pure-numpy/python path instead. Both paths are bit-identical: the RNG is
splitmix64 on wrapping uint64 arithmetic, and uniforms are built as
``(z >> 11) * 2**-53`` in both cases.

Public entry points wrap calls in ``np.errstate(over="ignore")`` because the
pure path's uint64 scalar arithmetic wraps by design and numpy warns on it.
"""

import os

import numpy as np

_DISABLE = os.environ.get("ARBORTOPO_DISABLE_NUMBA", "") not in ("", "0")

USING_NUMBA = False
if not _DISABLE:
    try:
        import numba

        _jit = numba.njit(cache=True)
        USING_NUMBA = True
    except ImportError:
        def _jit(f):
            return f
else:
    def _jit(f):
        return f

U64_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
U64_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
U64_MIX2 = np.uint64(0x94D049BB133111EB)
_SH30 = np.uint64(30)
_SH27 = np.uint64(27)
_SH31 = np.uint64(31)
_SH11 = np.uint64(11)
_INV_2_53 = 1.0 / 9007199254740992.0


@_jit
def _mix64(x):
    x = (x ^ (x >> _SH30)) * U64_MIX1
    x = (x ^ (x >> _SH27)) * U64_MIX2
    return x ^ (x >> _SH31)


@_jit
def _substream(master, index):
    return _mix64(np.uint64(master) + (np.uint64(index) + np.uint64(1)) * U64_GOLDEN)


@_jit
def _uniform(state):
    state = state + U64_GOLDEN
    z = _mix64(state)
    return state, np.float64(z >> _SH11) * _INV_2_53


@_jit
def _generate_parents(seed, a, b, c, max_order):
    """Grow one tree breadth-first; returns (status, parent array).

    status 0: complete tree. status 1: a node at order >= max_order wanted to
    branch --- the partial array is returned only so callers can report size.
    Homogeneous models are expressed as a=0, b=0, c=p.
    """
    state = np.uint64(seed)
    cap = 64
    parent = np.empty(cap, dtype=np.int32)
    parent[0] = -1  # soma stub
    parent[1] = 0
    m = 2
    frontier = np.empty(1, dtype=np.int32)
    frontier[0] = 1
    n_frontier = 1
    k = 1
    while n_frontier > 0:
        pk = 1.0
        if k > 1:
            pk = b * np.exp(-a * k) + c
            if pk > 1.0:
                pk = 1.0
        nxt = np.empty(2 * n_frontier, dtype=np.int32)
        n_next = 0
        for i in range(n_frontier):
            node = frontier[i]
            if k == 1:
                branch = True  # the first branching is unconditional, no draw
            else:
                state, u = _uniform(state)
                branch = u < pk
            if branch:
                if k >= max_order:
                    return 1, parent[:m].copy()
                if m + 2 > cap:
                    new_cap = cap * 2
                    new_parent = np.empty(new_cap, dtype=np.int32)
                    new_parent[:m] = parent[:m]
                    parent = new_parent
                    cap = new_cap
                parent[m] = node
                parent[m + 1] = node
                nxt[n_next] = m
                nxt[n_next + 1] = m + 1
                n_next += 2
                m += 2
        frontier = nxt
        n_frontier = n_next
        k += 1
    return 0, parent[:m].copy()


@_jit
def _node_arrays(parent):
    """Child links, child counts, orders, and subtree terminal counts.

    Relies on the canonical topological ordering (parent[i] < i) so one
    forward and one reverse pass suffice.
    """
    m = parent.shape[0]
    child1 = np.full(m, -1, dtype=np.int32)
    child2 = np.full(m, -1, dtype=np.int32)
    nchild = np.zeros(m, dtype=np.int32)
    order = np.zeros(m, dtype=np.int32)
    for i in range(1, m):
        p = parent[i]
        order[i] = order[p] + 1
        if child1[p] == -1:
            child1[p] = i
        else:
            child2[p] = i
        nchild[p] += 1
    term = np.zeros(m, dtype=np.int64)
    for i in range(m - 1, -1, -1):
        if nchild[i] == 0:
            term[i] = 1
        elif nchild[i] == 2:
            term[i] = term[child1[i]] + term[child2[i]]
        else:
            term[i] = term[child1[i]]
    return child1, child2, nchild, order, term


@_jit
def _tree_stats(parent):
    """Fused per-tree statistics pass.

    Returns (N, k_max, j_max, nB, nM, nS, A, a_eligible, Ep, ep_eligible)
    with A/Ep as NaN when no node is eligible.
    """
    m = parent.shape[0]
    child1, child2, nchild, order, term = _node_arrays(parent)
    kmax = 0
    for i in range(1, m):
        if order[i] > kmax:
            kmax = order[i]
    jcounts = np.zeros(kmax + 1, dtype=np.int64)
    N = 0
    nB = 0
    nM = 0
    nS = 0
    a_sum = 0.0
    a_n = 0
    ep_sum = 0.0
    ep_n = 0
    for i in range(1, m):
        if nchild[i] != 2:
            continue
        N += 1
        jcounts[order[i]] += 1
        c1 = child1[i]
        c2 = child2[i]
        bb = 0
        if nchild[c1] == 2:
            bb += 1
        if nchild[c2] == 2:
            bb += 1
        if bb == 2:
            nB += 1
        elif bb == 1:
            nM += 1
        else:
            nS += 1
        r = term[c1]
        s = term[c2]
        if r + s > 2:
            a_sum += abs(r - s) / (r + s - 2.0)
            a_n += 1
        if bb == 2:
            g1 = term[child1[c1]]
            g2 = term[child2[c1]]
            g3 = term[child1[c2]]
            g4 = term[child2[c2]]
            # observed pairing is (g1+g2 | g3+g4); shuffle mean runs over the
            # three pairings of the granddaughters into two pairs, skipping
            # any (1,1) partition (unreachable: each side is a sum of two
            # counts >= 1, hence >= 2 -- kept as a guard).
            pm = 0.0
            pn = 0
            r1 = g1 + g2
            s1 = g3 + g4
            if r1 + s1 > 2:
                pm += abs(r1 - s1) / (r1 + s1 - 2.0)
                pn += 1
            r2 = g1 + g3
            s2 = g2 + g4
            if r2 + s2 > 2:
                pm += abs(r2 - s2) / (r2 + s2 - 2.0)
                pn += 1
            r3 = g1 + g4
            s3 = g2 + g3
            if r3 + s3 > 2:
                pm += abs(r3 - s3) / (r3 + s3 - 2.0)
                pn += 1
            if r1 + s1 > 2 and pn > 0:
                obs = abs(r1 - s1) / (r1 + s1 - 2.0)
                ep_sum += obs - pm / pn
                ep_n += 1
    jmax = 0
    for k in range(kmax + 1):
        if jcounts[k] > jmax:
            jmax = jcounts[k]
    A = a_sum / a_n if a_n > 0 else np.nan
    Ep = ep_sum / ep_n if ep_n > 0 else np.nan
    return N, kmax, jmax, nB, nM, nS, A, a_n, Ep, ep_n


@_jit
def _simulate_stats(master_seed, n, a, b, c, max_order):
    """Generate n trees and collect their stats without materializing them.

    Returns (status, index, stats[n, 10]); status 1 flags a truncation at
    tree ``index`` (stats rows beyond it are undefined).
    """
    out = np.empty((n, 10), dtype=np.float64)
    for i in range(n):
        seed = _substream(np.uint64(master_seed), np.uint64(i))
        status, parent = _generate_parents(seed, a, b, c, max_order)
        if status != 0:
            return 1, i, out
        N, kmax, jmax, nB, nM, nS, A, a_n, Ep, ep_n = _tree_stats(parent)
        out[i, 0] = N
        out[i, 1] = kmax
        out[i, 2] = jmax
        out[i, 3] = nB
        out[i, 4] = nM
        out[i, 5] = nS
        out[i, 6] = A
        out[i, 7] = a_n
        out[i, 8] = Ep
        out[i, 9] = ep_n
    return 0, n, out


def substream_seed(master_seed, index):
    """Per-tree seed for tree ``index`` under ``master_seed`` (uint64)."""
    with np.errstate(over="ignore"):
        return int(_substream(np.uint64(master_seed), np.uint64(index)))


def uniform_block(seed, n):
    """n uniforms in [0, 1) from the counter stream at ``seed``, vectorized.

    Element j equals the j-th sequential draw a generation loop seeded with
    ``seed`` would produce.
    """
    with np.errstate(over="ignore"):
        idx = np.arange(1, n + 1, dtype=np.uint64)
        s = np.uint64(seed) + idx * U64_GOLDEN
        s = (s ^ (s >> _SH30)) * U64_MIX1
        s = (s ^ (s >> _SH27)) * U64_MIX2
        s = s ^ (s >> _SH31)
        return (s >> _SH11) * _INV_2_53


def generate_parents(seed, a, b, c, max_order):
    with np.errstate(over="ignore"):
        return _generate_parents(np.uint64(seed), float(a), float(b), float(c),
                                 int(max_order))


def node_arrays(parent):
    with np.errstate(over="ignore"):
        return _node_arrays(parent)


def tree_stats(parent):
    with np.errstate(over="ignore"):
        return _tree_stats(parent)


def simulate_stats(master_seed, n, a, b, c, max_order):
    with np.errstate(over="ignore"):
        return _simulate_stats(np.uint64(master_seed), int(n), float(a),
                               float(b), float(c), int(max_order))
