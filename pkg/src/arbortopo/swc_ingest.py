"""SWC parsing and neuron decomposition into canonical binary trees.

SWC is line-oriented: ``#`` comments, 7 whitespace-separated fields per data
line (id, structure_code, x, y, z, radius, parent_id), parent −1 for a root.

``decompose`` turns one traced neuron into canonical trees: soma points
(structure code 1 connected to the root) collapse into a single vertex, each
neurite stemming from it becomes a candidate tree, unbranched stems are
dropped, multifurcations are split into left-leaning bifurcation cascades
with zero-length synthetic edges, and the largest remaining tree (by
branching-node count) is labeled the axon, the rest dendrites.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import SwcParseError
from .tree import Tree

SOMA_CODE = 1


@dataclass(frozen=True)
class SwcPoint:
    id: int
    structure_code: int
    x: float
    y: float
    z: float
    radius: float
    parent_id: int


@dataclass
class SwcFile:
    points: list
    source_path: str | None = None


def parse_swc(data, source_path=None) -> SwcFile:
    """Parse SWC text (str or bytes) into an SwcFile.

    Raises SwcParseError with a 1-based line number for malformed lines,
    duplicate ids, dangling parent references, and parent-link cycles.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    points = []
    line_of = {}
    seen = {}
    for lineno, raw in enumerate(data.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 7:
            raise SwcParseError(
                f"expected 7 fields, got {len(fields)}", line=lineno, path=source_path)
        try:
            pid = int(fields[0])
            code = int(fields[1])
            x, y, z, radius = (float(v) for v in fields[2:6])
            parent = int(fields[6])
        except ValueError:
            raise SwcParseError(
                f"non-numeric field in {fields!r}", line=lineno, path=source_path) from None
        if pid <= 0:
            raise SwcParseError(f"point id must be positive, got {pid}",
                                line=lineno, path=source_path)
        if pid in seen:
            raise SwcParseError(
                f"duplicate point id {pid} (first at line {seen[pid]})",
                line=lineno, path=source_path)
        seen[pid] = lineno
        line_of[pid] = lineno
        points.append(SwcPoint(pid, code, x, y, z, radius, parent))
    ids = set(seen)
    root_found = False
    for p in points:
        if p.parent_id == -1:
            root_found = True
        elif p.parent_id not in ids:
            raise SwcParseError(
                f"point {p.id} references missing parent {p.parent_id}",
                line=line_of[p.id], path=source_path)
    if not root_found:
        raise SwcParseError("no root point (parent_id -1) in file", path=source_path)
    _check_cycles(points, line_of, source_path)
    return SwcFile(points=points, source_path=source_path)


def _check_cycles(points, line_of, source_path):
    parent = {p.id: p.parent_id for p in points}
    state = {}  # 0 in progress, 1 done
    for p in points:
        chain = []
        cur = p.id
        while cur != -1 and cur not in state:
            state[cur] = 0
            chain.append(cur)
            cur = parent[cur]
        if cur != -1 and state[cur] == 0:
            raise SwcParseError(f"parent-link cycle through point {cur}",
                                line=line_of[cur], path=source_path)
        for c in chain:
            state[c] = 1


def decompose(swc: SwcFile, on_multiple_roots: str = "error",
              with_stats: bool = False):
    """Decompose a parsed neuron into canonical axon/dendrite trees.

    on_multiple_roots: "error" rejects files with several roots; "largest"
    keeps the connected component with the most traced points (first root
    wins ties) and ignores the rest.

    Returns trees in stem order; the axon label goes to the tree with the
    largest branching-node count (tie: lowest stem point id, and the winner
    gets ``axon_tie_break=True``). Stems without any branching point are
    dropped, so the list may be empty. ``with_stats=True`` returns
    ``(trees, {"stems": total stem count, "dropped": unbranched stems})``.
    """
    points = swc.points
    by_id = {p.id: p for p in points}
    children = {p.id: [] for p in points}
    roots = []
    for p in points:  # file order drives every tie-break below
        if p.parent_id == -1:
            roots.append(p.id)
        else:
            children[p.parent_id].append(p.id)

    if len(roots) > 1:
        if on_multiple_roots == "largest":
            root = _largest_component_root(roots, children)
        elif on_multiple_roots == "error":
            raise SwcParseError(
                f"file has {len(roots)} root points {roots[:5]}; pass "
                "on_multiple_roots='largest' to keep the biggest component",
                path=swc.source_path)
        else:
            raise ValueError(f"on_multiple_roots must be 'error' or 'largest', "
                             f"got {on_multiple_roots!r}")
    else:
        root = roots[0]

    soma = _soma_cluster(root, by_id, children)

    stems = []
    for p in points:
        if p.id not in soma and p.parent_id in soma:
            stems.append(p.id)

    trees = []
    for stem in stems:
        t = _build_tree(stem, by_id, children, swc.source_path)
        if t.n_branching >= 1:
            trees.append(t)

    if trees:
        best_n = max(t.n_branching for t in trees)
        winners = [t for t in trees if t.n_branching == best_n]
        axon = min(winners, key=lambda t: t.stem_point_id)
        for t in trees:
            t.kind = "axon" if t is axon else "dendrite"
        axon.axon_tie_break = len(winners) > 1
    if with_stats:
        return trees, {"stems": len(stems), "dropped": len(stems) - len(trees)}
    return trees


def _largest_component_root(roots, children):
    best_root, best_size = None, -1
    for r in roots:
        size = 0
        stack = [r]
        while stack:
            cur = stack.pop()
            size += 1
            stack.extend(children[cur])
        if size > best_size:
            best_root, best_size = r, size
    return best_root


def _soma_cluster(root, by_id, children):
    """Root plus every structure-code-1 point reachable through such points."""
    soma = {root}
    queue = deque([root])
    while queue:
        cur = queue.popleft()
        for ch in children[cur]:
            if ch not in soma and by_id[ch].structure_code == SOMA_CODE:
                soma.add(ch)
                queue.append(ch)
    return soma


def _build_tree(stem, by_id, children, source):
    """Canonical binary tree for the neurite rooted at traced point ``stem``."""

    def dist(a, b):
        pa, pb = by_id[a], by_id[b]
        return math.dist((pa.x, pa.y, pa.z), (pb.x, pb.y, pb.z))

    def walk(anchor, start):
        # Follow the traced chain until a branch point or terminal,
        # accumulating geometric length from the anchor point.
        length = dist(anchor, start)
        cur = start
        while True:
            kids = children[cur]
            if len(kids) == 1:
                length += dist(cur, kids[0])
                cur = kids[0]
            else:
                return cur, length, kids

    parent_idx = [-1]
    elens = [0.0]
    queue = deque()

    def expand(pt, canon_parent, anchor):
        end, length, kids = walk(anchor, pt)
        idx = len(parent_idx)
        parent_idx.append(canon_parent)
        elens.append(length)
        if len(kids) >= 2:
            queue.append((idx, end, kids))
        return idx

    expand(stem, 0, by_id[stem].parent_id)
    while queue:
        canon, anchor, kids = queue.popleft()
        cur = canon
        while len(kids) > 2:
            # split a multifurcation: first child (file order) stays on the
            # real node, the rest hang off a zero-length synthetic node
            expand(kids[0], cur, anchor)
            parent_idx.append(cur)
            elens.append(0.0)
            cur = len(parent_idx) - 1
            kids = kids[1:]
        for pt in kids:
            expand(pt, cur, anchor)

    t = Tree(parent=np.array(parent_idx, dtype=np.int32),
             lengths=np.array(elens, dtype=np.float64),
             source=source, stem_point_id=stem)
    if t.n_branching >= 1:
        t.validate()
    return t
