"""Coordinates on the open cell: stretch extensions, broken lines, retraction.

The cell is charted from the root facet outward.  The root carries the radial
interval family (rays from its barycenter c0 to boundary points); every other
facet carries the family of chords entering through its gate and running
parallel, in barycentric-affine terms, to the segment from the gate center to
the opposite vertex.  Crossing a gate rescales arc length on the parent's own
interval so that it covers the parent interval plus the child chord — the
composite map is therefore piecewise linear along every broken line, one
linear piece per traversed facet.

All point evaluations are lazy walks over the extension records; nothing is
meshed globally.  Charts are immutable after construction and evaluations are
pure, so they can run concurrently.
"""

from __future__ import annotations

import math
import os
import random
from dataclasses import dataclass

from .simplicial import MEMBERSHIP_TOL, InvalidComplexError, Metric, SimplicialComplex
from .spine import Decomposition


class ChartDomainError(ValueError):
    """Point outside the domain the requested chart operation covers."""


class BlackPointError(ChartDomainError):
    """Point sits on the spine closure, where cell coordinates do not reach."""


def geometric_tol() -> float:
    """Geometric identity tolerance; SPINEFORGE_TOL overrides the 1e-9 default."""
    raw = os.environ.get("SPINEFORGE_TOL")
    return float(raw) if raw else 1e-9


@dataclass(frozen=True)
class PointRef:
    """A point of the manifold: facet id plus barycentric coordinates."""

    top: int
    bary: tuple

    def __post_init__(self):
        s = sum(self.bary)
        if abs(s - 1.0) > MEMBERSHIP_TOL:
            raise ChartDomainError(f"barycentric sum {s} too far from 1")
        if any(x < -MEMBERSHIP_TOL for x in self.bary):
            raise ChartDomainError(f"negative barycentric coordinate in {self.bary}")


@dataclass(frozen=True)
class ExtensionRecord:
    """One coordinate extension across a gate, in growth order.

    The parent's interval family emanates from ``apex`` (the root barycenter)
    on the root step and from the parent's own entry gate afterwards, in which
    case ``apex`` is None.
    """

    gate: int
    parent: int
    child: int
    apex: object          # PointRef | None
    gate_center: PointRef
    opposite_vertex: int


@dataclass(frozen=True)
class Segment:
    top: int
    start: PointRef
    end: PointRef
    length: float


@dataclass(frozen=True)
class BrokenLine:
    """Polygonal path from c0 to a spine point z, one segment per facet."""

    segments: tuple
    endpoint: PointRef
    length: float

    def point_at_arc(self, s: float) -> PointRef:
        if s <= 0.0:
            return self.segments[0].start
        acc = 0.0
        for seg in self.segments:
            if s <= acc + seg.length or seg is self.segments[-1]:
                w = (s - acc) / seg.length if seg.length > 0 else 1.0
                if w >= 1.0:
                    w = 1.0
                return PointRef(seg.top, _lerp(seg.start.bary, seg.end.bary, w))
            acc += seg.length
        return self.endpoint


def stretch(s: float, s1: float, s2: float) -> float:
    """Arc-length rescale of one extension step: [0, s1] onto [0, s1+s2]."""
    if s1 <= 0.0:
        raise ChartDomainError(f"parent interval length {s1} must be positive")
    if s2 < 0.0:
        raise ChartDomainError(f"child interval length {s2} must be non-negative")
    if s < 0.0 or s > s1 * (1.0 + 1e-12):
        raise ChartDomainError(f"arc {s} outside parent interval [0, {s1}]")
    return s * (s1 + s2) / s1


def _lerp(a, b, w):
    return tuple(x + w * (y - x) for x, y in zip(a, b))


class CellChart:
    """Ordered extension records realizing the cell coordinates."""

    def __init__(self, complex: SimplicialComplex, decomposition: Decomposition,
                 metric: Metric, records):
        self.complex = complex
        self.decomposition = decomposition
        self.metric = metric
        self.records = tuple(records)
        self.root = decomposition.root
        n = complex.dimension
        self.c0 = PointRef(self.root, (1.0 / (n + 1),) * (n + 1))

        self.entry = {}          # child facet -> its entry record
        self.gate_record = {}    # ridge id -> record
        self.opposite_local = {}  # child facet -> local index of the off-gate vertex
        for rec in self.records:
            self.entry[rec.child] = rec
            self.gate_record[rec.gate] = rec
            child_verts = complex.top_simplices[rec.child]
            self.opposite_local[rec.child] = child_verts.index(rec.opposite_vertex)

        self.spine_set = frozenset(decomposition.spine)
        ridge_faces = complex.faces[n - 1]
        closure = {}
        from itertools import combinations
        for rid in decomposition.spine:
            face = ridge_faces[rid]
            for k in range(n):
                for sub in combinations(face, k + 1):
                    closure.setdefault(sub, rid)
        self.spine_closure = closure

    # -- low-level geometry ------------------------------------------------

    def _verts(self, top):
        return self.complex.top_simplices[top]

    def _dist(self, top, a, b):
        return self.metric.dist(self._verts(top), a, b)

    def _facet_ridge(self, top, local):
        verts = self._verts(top)
        face = verts[:local] + verts[local + 1:]
        return self.complex.face_index[self.complex.dimension - 1][face]

    def _transfer(self, bary, from_top, to_top):
        """Re-express a shared-face point in another facet's coordinates."""
        fv = self._verts(from_top)
        tv = self._verts(to_top)
        weights = dict(zip(fv, bary))
        out = []
        stray = 0.0
        for v in tv:
            out.append(weights.pop(v, 0.0))
        for v, w in weights.items():
            stray += abs(w)
        if stray > 1e3 * MEMBERSHIP_TOL:
            raise ChartDomainError(
                f"point carries weight {stray} outside the face shared by "
                f"facets {from_top} and {to_top}")
        return tuple(max(x, 0.0) for x in out)

    def _ray(self, x):
        """Radial ray of the root through x != c0.

        Returns (boundary bary b, arc of x from c0, ray length, exit local index).
        """
        n1 = self.complex.dimension + 1
        c = 1.0 / n1
        direction = [xi - c for xi in x]
        t_max = None
        exit_local = None
        for i, d in enumerate(direction):
            if d < 0.0:
                t = c / (-d)
                if t_max is None or t < t_max - 1e-15 * t_max:
                    t_max = t
                    exit_local = i
        if t_max is None:
            raise ChartDomainError("point coincides with the root barycenter")
        b = [c + t_max * d for d in direction]
        b[exit_local] = 0.0
        b = tuple(max(v, 0.0) for v in b)
        s_point = self._dist(self.root, (c,) * n1, x)
        s_ray = self._dist(self.root, (c,) * n1, b)
        return b, s_point, s_ray, exit_local

    def _chord(self, top, y):
        """Interval-family chord of a non-root facet through y.

        Returns (junction p, exit q, arc of y from p, chord length, exit local).
        """
        n = self.complex.dimension
        ov = self.opposite_local[top]
        t_y = max(y[ov], 0.0)
        p = [yi + t_y / n for yi in y]
        p[ov] = 0.0
        m = None
        exit_local = None
        for i, pi in enumerate(p):
            if i == ov:
                continue
            if m is None or pi < m - 1e-15:
                m = pi
                exit_local = i
        if m <= MEMBERSHIP_TOL:
            raise ChartDomainError(
                f"interval family of facet {top} degenerates at {tuple(y)}; "
                "point sits on a gate-boundary stratum")
        t_max = n * m
        q = [pi - m for pi in p]
        q[ov] = t_max
        q[exit_local] = 0.0
        p = tuple(p)
        q = tuple(max(v, 0.0) for v in q)
        length = self._dist(top, p, q)
        arc = length * (t_y / t_max)
        return p, q, arc, length, exit_local

    # -- broken lines --------------------------------------------------------

    def _descend(self, segments, top, start):
        """Chords from a gate junction down to the spine; returns z."""
        while True:
            p, q, _, length, exit_local = self._chord(top, start)
            segments.append(Segment(top, PointRef(top, p), PointRef(top, q), length))
            rid = self._facet_ridge(top, exit_local)
            rec = self.gate_record.get(rid)
            if rec is not None:
                if rec.parent != top:
                    raise ChartDomainError(
                        f"line re-enters facet {top} through its entry gate")
                start = self._transfer(q, top, rec.child)
                top = rec.child
            elif rid in self.spine_set:
                return PointRef(top, q)
            else:
                raise InvalidComplexError(f"ridge {rid} is neither gate nor spine")

    def _line_from_exit(self, b, exit_local) -> BrokenLine:
        segments = []
        s_ray = self._dist(self.root, self.c0.bary, b)
        bref = PointRef(self.root, b)
        segments.append(Segment(self.root, self.c0, bref, s_ray))
        rid = self._facet_ridge(self.root, exit_local)
        rec = self.gate_record.get(rid)
        if rec is not None:
            start = self._transfer(b, self.root, rec.child)
            z = self._descend(segments, rec.child, start)
        elif rid in self.spine_set:
            z = bref
        else:
            raise InvalidComplexError(f"ridge {rid} is neither gate nor spine")
        total = math.fsum(seg.length for seg in segments)
        return BrokenLine(tuple(segments), z, total)

    def _root_exit_of(self, top, junction):
        """Walk entry gates upward from a junction until the root boundary."""
        cur = top
        j = junction
        while True:
            rec = self.entry[cur]
            parent = rec.parent
            j = self._transfer(j, cur, parent)
            if parent == self.root:
                # j lies on the root facet shared with `cur`
                off = self._verts(self.root).index(
                    next(v for v in self._verts(self.root)
                         if v not in self.complex.faces[self.complex.dimension - 1][rec.gate]))
                return j, off
            ov = self.opposite_local[parent]
            n = self.complex.dimension
            t_j = max(j[ov], 0.0)
            start = [ji + t_j / n for ji in j]
            start[ov] = 0.0
            j = tuple(max(v, 0.0) for v in start)
            cur = parent

    def spine_face_of(self, pt: PointRef):
        """Spine ridge whose closure carries pt, or None when pt is white."""
        verts = self._verts(pt.top)
        carrier = tuple(v for v, x in zip(verts, pt.bary) if x > MEMBERSHIP_TOL)
        if len(carrier) == len(verts):
            return None
        return self.spine_closure.get(carrier)

    def locate(self, pt: PointRef):
        """Broken line through a white point and the point's arc from c0."""
        rid = self.spine_face_of(pt)
        if rid is not None:
            face = self.complex.faces[self.complex.dimension - 1][rid]
            raise BlackPointError(f"point lies on spine face {face}")
        if pt.top == self.root:
            b, s_point, _, exit_local = self._ray(pt.bary)
            return self._line_from_exit(b, exit_local), s_point
        p, _, arc, _, _ = self._chord(pt.top, pt.bary)
        b, exit_local = self._root_exit_of(pt.top, p)
        line = self._line_from_exit(b, exit_local)
        prefix = 0.0
        for seg in line.segments:
            if seg.top == pt.top:
                return line, prefix + arc
            prefix += seg.length
        raise ChartDomainError(f"facet {pt.top} missing from its own broken line")


def build_chart(c: SimplicialComplex, d: Decomposition, m: Metric) -> CellChart:
    """One extension record per gate, in growth order."""
    n = c.dimension
    records = []
    root_c0 = PointRef(d.root, (1.0 / (n + 1),) * (n + 1))
    for step in d.gates:
        gate_face = c.faces[n - 1][step.gate]
        child_verts = c.top_simplices[step.child]
        opposite = next(v for v in child_verts if v not in gate_face)
        parent_verts = c.top_simplices[step.parent]
        center = [0.0] * (n + 1)
        for v in gate_face:
            center[parent_verts.index(v)] = 1.0 / n if n else 1.0
        records.append(ExtensionRecord(
            gate=step.gate,
            parent=step.parent,
            child=step.child,
            apex=root_c0 if step.parent == d.root else None,
            gate_center=PointRef(step.parent, tuple(center)),
            opposite_vertex=opposite,
        ))
    return CellChart(c, d, m, records)


def forward_map(chart: CellChart, p: PointRef) -> PointRef:
    """Image of a root-interior point under the full extension composite."""
    if p.top != chart.root:
        raise ChartDomainError("forward_map takes points of the root facet")
    if any(x <= MEMBERSHIP_TOL for x in p.bary):
        raise ChartDomainError("forward_map is defined on the open root only")
    if max(abs(x - chart.c0.bary[0]) for x in p.bary) < MEMBERSHIP_TOL:
        return chart.c0
    b, s, s1, exit_local = chart._ray(p.bary)
    top = chart.root
    seg_start, seg_end = chart.c0.bary, b
    while True:
        rid = chart._facet_ridge(top, exit_local)
        rec = chart.gate_record.get(rid)
        if rec is None or rec.parent != top:
            return PointRef(top, _lerp(seg_start, seg_end, s / s1))
        junction = chart._transfer(seg_end, top, rec.child)
        _, q, _, s2, child_exit = chart._chord(rec.child, junction)
        sigma = stretch(s, s1, s2)
        if sigma <= s1:
            return PointRef(top, _lerp(seg_start, seg_end, sigma / s1))
        s = sigma - s1
        top = rec.child
        seg_start, seg_end = junction, q
        s1 = s2
        exit_local = child_exit


def inverse_map(chart: CellChart, q: PointRef) -> PointRef:
    """Preimage in the root of any white point; rejects spine points."""
    rid = chart.spine_face_of(q)
    if rid is not None:
        face = chart.complex.faces[chart.complex.dimension - 1][rid]
        raise BlackPointError(f"point lies on spine face {face}; outside the cell")
    if q.top == chart.root:
        if max(abs(x - chart.c0.bary[0]) for x in q.bary) < MEMBERSHIP_TOL:
            return chart.c0
        b, s, s1, exit_local = chart._ray(q.bary)
        rec = chart.gate_record.get(chart._facet_ridge(chart.root, exit_local))
        if rec is None:
            return q
        junction = chart._transfer(b, chart.root, rec.child)
        _, _, _, s2, _ = chart._chord(rec.child, junction)
        pre = s * s1 / (s1 + s2)
        return PointRef(chart.root, _lerp(chart.c0.bary, b, pre / s1))

    p, q_exit, arc, length, exit_local = chart._chord(q.top, q.bary)
    rec_out = chart.gate_record.get(chart._facet_ridge(q.top, exit_local))
    if rec_out is not None and rec_out.parent == q.top:
        junction = chart._transfer(q_exit, q.top, rec_out.child)
        _, _, _, s2, _ = chart._chord(rec_out.child, junction)
        arc = arc * length / (length + s2)

    cur = q.top
    j = p
    seg_len = length
    n = chart.complex.dimension
    while True:
        rec = chart.entry[cur]
        parent = rec.parent
        j = chart._transfer(j, cur, parent)
        if parent == chart.root:
            s1 = chart._dist(chart.root, chart.c0.bary, j)
            pre = s1 * (s1 + arc) / (s1 + seg_len)
            return PointRef(chart.root, _lerp(chart.c0.bary, j, pre / s1))
        ov = chart.opposite_local[parent]
        t_j = max(j[ov], 0.0)
        start = [ji + t_j / n for ji in j]
        start[ov] = 0.0
        start = tuple(max(v, 0.0) for v in start)
        s1 = chart._dist(parent, start, j)
        arc = s1 * (s1 + arc) / (s1 + seg_len)
        seg_len = s1
        j = start
        cur = parent


def broken_line_to(chart: CellChart, z: PointRef, side: int | None = None) -> BrokenLine:
    """The broken line ending at a spine point; `side` (facet id) picks which
    of the two cofacet approaches is meant, defaulting to z's own facet."""
    if side is not None and side != z.top:
        z = PointRef(side, chart._transfer(z.bary, z.top, side))
    if chart.spine_face_of(z) is None:
        raise ChartDomainError("endpoint is not on the spine closure")
    if z.top == chart.root:
        b, _, _, exit_local = chart._ray(z.bary)
        line = chart._line_from_exit(b, exit_local)
    else:
        p, _, _, _, _ = chart._chord(z.top, z.bary)
        b, exit_local = chart._root_exit_of(z.top, p)
        line = chart._line_from_exit(b, exit_local)
    gap = chart._dist(z.top, line.endpoint.bary, z.bary) \
        if line.endpoint.top == z.top else float("inf")
    if gap > max(geometric_tol(), 1e-9) * 1e3:
        raise ChartDomainError(
            f"reconstructed line ends {gap} away from the requested endpoint")
    return line


def retract(chart: CellChart, x: PointRef, t: float) -> PointRef:
    """Homotopy flow toward the spine: the image sits on x's broken line at
    arc (1-t)*s(x) from the endpoint z; spine points never move."""
    if not 0.0 <= t <= 1.0:
        raise ChartDomainError(f"homotopy time {t} outside [0, 1]")
    if chart.spine_face_of(x) is not None:
        return x
    if t == 0.0:
        return x
    if x.top == chart.root and \
            max(abs(v - chart.c0.bary[0]) for v in x.bary) < MEMBERSHIP_TOL:
        # s(c0) depends on the line chosen; fixed convention: the line through
        # the first gate's center.
        first = chart.records[0]
        b = first.gate_center.bary
        exit_local = chart._verts(chart.root).index(
            next(v for v in chart._verts(chart.root)
                 if v not in chart.complex.faces[chart.complex.dimension - 1][first.gate]))
        line = chart._line_from_exit(b, exit_local)
        arc = 0.0
    else:
        line, arc = chart.locate(x)
    if t == 1.0:
        return line.endpoint
    s_x = line.length - arc
    return line.point_at_arc(line.length - (1.0 - t) * s_x)


def ambient_position(c: SimplicialComplex, pt: PointRef):
    """Coordinates of a point under the vertex embedding (needs coords)."""
    if c.vertex_coords is None:
        raise InvalidComplexError("complex carries no vertex coordinates")
    verts = c.top_simplices[pt.top]
    d = len(c.vertex_coords[0])
    out = [0.0] * d
    for w, v in zip(pt.bary, verts):
        for i in range(d):
            out[i] += w * c.vertex_coords[v][i]
    return tuple(out)


def point_gap(chart: CellChart, a: PointRef, b: PointRef) -> float:
    """Metric distance between two point refs, transferring across a shared
    face when they live in different facets."""
    if a.top == b.top:
        return chart._dist(a.top, a.bary, b.bary)
    try:
        bb = chart._transfer(b.bary, b.top, a.top)
        return chart._dist(a.top, a.bary, bb)
    except ChartDomainError:
        aa = chart._transfer(a.bary, a.top, b.top)
        return chart._dist(b.top, aa, b.bary)


def sample_interior(c: SimplicialComplex, rng: random.Random, top: int) -> PointRef:
    """Uniform-ish interior point of one facet (normalized exponentials)."""
    raw = [-math.log(rng.random()) for _ in range(c.dimension + 1)]
    s = sum(raw)
    return PointRef(top, tuple(x / s for x in raw))


def retraction_samples(chart: CellChart, count: int, t_steps: int, seed: int = 0):
    """Rows (t, facet id, bary...) tracking sampled points under the flow."""
    rng = random.Random(seed)
    rows = []
    tops = len(chart.complex.top_simplices)
    for _ in range(count):
        x = sample_interior(chart.complex, rng, rng.randrange(tops))
        for k in range(t_steps + 1):
            t = k / t_steps
            y = retract(chart, x, t)
            rows.append((t, y.top) + tuple(y.bary))
    return rows


def retraction_csv(chart: CellChart, count: int, t_steps: int, seed: int = 0) -> str:
    """CSV text of the sampled flow, for animation tooling."""
    n = chart.complex.dimension
    header = ",".join(["t", "top"] + [f"b{i}" for i in range(n + 1)])
    lines = [header]
    for row in retraction_samples(chart, count, t_steps, seed):
        lines.append(",".join(repr(x) if isinstance(x, float) else str(x)
                              for x in row))
    return "\n".join(lines) + "\n"
