"""Cell/spine decomposition of a closed triangulated manifold.

Growing from a root facet, coordinates spread across one shared ridge at a
time ("gates"); the ridges never crossed form the spine.  Gates trace a
spanning tree of the dual graph in absorption order, so every prefix of the
gate list spans a connected subtree containing the root.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass
from itertools import combinations

from .simplicial import InvalidComplexError, SimplicialComplex, build_dual_graph

STRATEGIES = ("bfs", "dfs", "random")


@dataclass(frozen=True)
class GateStep:
    parent: int
    gate: int    # ridge id
    child: int


@dataclass(frozen=True)
class Decomposition:
    root: int
    gates: tuple      # GateStep in growth order
    spine: tuple      # sorted ridge ids never used as gates
    strategy: str
    seed: int

    def gate_ids(self):
        return tuple(g.gate for g in self.gates)

    def to_json_obj(self, c: SimplicialComplex):
        ridge_faces = c.faces[c.dimension - 1]
        return {
            "root": self.root,
            "gates": [[g.parent, g.gate, g.child] for g in self.gates],
            "spine": [list(ridge_faces[rid]) for rid in self.spine],
            "strategy": self.strategy,
            "seed": self.seed,
        }

    def to_json(self, c: SimplicialComplex) -> str:
        return json.dumps(self.to_json_obj(c), sort_keys=True, separators=(",", ":"))


def decomposition_from_json(c: SimplicialComplex, obj) -> Decomposition:
    ridge_index = c.face_index[c.dimension - 1]
    spine = tuple(sorted(ridge_index[tuple(sorted(f))] for f in obj["spine"]))
    gates = tuple(GateStep(p, g, ch) for p, g, ch in obj["gates"])
    return Decomposition(obj["root"], gates, spine, obj["strategy"], obj["seed"])


def decompose(c: SimplicialComplex, root: int = 0, strategy: str = "bfs",
              seed: int = 0) -> Decomposition:
    """Paint outward from ``root``, one unpainted facet per step.

    Any search order is legal; ``bfs`` (default) grows shallow trees, ``dfs``
    deep ones, ``random`` draws the next crossing from a seeded generator.
    """
    if strategy not in STRATEGIES:
        raise InvalidComplexError(f"unknown strategy {strategy!r}; use one of {STRATEGIES}")
    graph = build_dual_graph(c)   # raises if ridges are bad or dual graph splits
    if not 0 <= root < graph.node_count:
        raise InvalidComplexError(f"no facet with id {root}")

    rng = random.Random(seed) if strategy == "random" else None
    painted = [False] * graph.node_count
    painted[root] = True
    frontier = deque()
    frontier.extend((root, rid, nbr) for rid, nbr in graph.adjacency[root])
    gates = []
    gate_ids = set()
    while frontier:
        if strategy == "bfs":
            parent, rid, child = frontier.popleft()
        elif strategy == "dfs":
            parent, rid, child = frontier.pop()
        else:
            k = rng.randrange(len(frontier))
            frontier[k], frontier[-1] = frontier[-1], frontier[k]
            parent, rid, child = frontier.pop()
        if painted[child]:
            continue
        painted[child] = True
        gates.append(GateStep(parent, rid, child))
        gate_ids.add(rid)
        frontier.extend((child, r, nb) for r, nb in graph.adjacency[child]
                        if not painted[nb])
    if len(gates) != graph.node_count - 1:
        raise InvalidComplexError("growth stalled; dual graph is disconnected")
    spine = tuple(sorted(rid for rid, _, _ in graph.edges if rid not in gate_ids))
    return Decomposition(root, tuple(gates), spine, strategy, seed)


@dataclass(frozen=True)
class Subcomplex:
    complex: SimplicialComplex
    vertex_map: tuple   # new vertex id -> vertex id in the parent complex


def spine_subcomplex(c: SimplicialComplex, d: Decomposition) -> Subcomplex:
    """Closure of the spine ridges as a standalone complex of dimension n-1."""
    ridge_faces = c.faces[c.dimension - 1]
    verts = sorted({v for rid in d.spine for v in ridge_faces[rid]})
    back = tuple(verts)
    fwd = {v: i for i, v in enumerate(verts)}
    tops = [tuple(fwd[v] for v in ridge_faces[rid]) for rid in d.spine]
    return Subcomplex(SimplicialComplex(c.dimension - 1, tops), back)


def spine_connected(c: SimplicialComplex, d: Decomposition) -> bool:
    """A nonempty complex is connected iff its 1-skeleton is."""
    if not d.spine:
        raise InvalidComplexError("decomposition has an empty spine")
    ridge_faces = c.faces[c.dimension - 1]
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for rid in d.spine:
        vs = ridge_faces[rid]
        for v in vs:
            parent.setdefault(v, v)
        anchor = find(vs[0])
        for v in vs[1:]:
            parent[find(v)] = anchor
    roots = {find(v) for v in parent}
    return len(roots) == 1


@dataclass(frozen=True)
class PartitionReport:
    """Census of the white (cell-side) and black (spine closure) faces."""

    white_by_dim: tuple     # per k: tuple of face ids
    black_by_dim: tuple
    discrepancies: tuple    # (k, face id, reason)

    @property
    def ok(self):
        return not self.discrepancies

    def counts(self):
        return {
            "white": tuple(len(w) for w in self.white_by_dim),
            "black": tuple(len(b) for b in self.black_by_dim),
        }


def verify_cell_partition(c: SimplicialComplex, d: Decomposition) -> PartitionReport:
    """White means: facet interiors, gate interiors, and interiors of lower
    faces not contained in the spine closure.  Black is the spine closure.
    The two must partition the whole face list."""
    n = c.dimension
    ridge_faces = c.faces[n - 1]
    spine_closure = [set() for _ in range(n)]
    for rid in d.spine:
        face = ridge_faces[rid]
        for k in range(n):
            for sub in combinations(face, k + 1):
                spine_closure[k].add(c.face_index[k][sub])
    gate_ids = set(d.gate_ids())

    white, black = [], []
    discrepancies = []
    for k in range(n + 1):
        w, b = [], []
        for fid in range(len(c.faces[k])):
            if k == n:
                w.append(fid)
            elif k == n - 1:
                in_spine = fid in spine_closure[k]
                if fid in gate_ids:
                    w.append(fid)
                    if in_spine:
                        discrepancies.append((k, fid, "gate inside spine closure"))
                elif in_spine:
                    b.append(fid)
                else:
                    discrepancies.append((k, fid, "ridge neither gate nor spine"))
            else:
                (b if fid in spine_closure[k] else w).append(fid)
        white.append(tuple(w))
        black.append(tuple(b))
        if sorted(w + b) != list(range(len(c.faces[k]))):
            discrepancies.append((k, -1, "faces not partitioned"))
    return PartitionReport(tuple(white), tuple(black), tuple(discrepancies))
