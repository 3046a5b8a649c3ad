"""OFF export of complexes, spines, and sampled point clouds.

OFF is 3-D: complexes of dimension up to 3 with embedded vertices are
accepted (lower-dimensional coordinates are zero-padded).  Dimension-1 faces
are written as 2-vertex polygons, which most viewers accept as polylines.
"""

from __future__ import annotations

from .simplicial import InvalidComplexError, SimplicialComplex
from .spine import Decomposition

SPINE_COLOR = (255, 0, 0)


def _vertex_rows(c: SimplicialComplex):
    if c.vertex_coords is None:
        raise InvalidComplexError("complex carries no vertex coordinates")
    if c.dimension > 3:
        raise InvalidComplexError(f"OFF export supports dimension <= 3, got {c.dimension}")
    d = len(c.vertex_coords[0])
    if d > 3:
        raise InvalidComplexError(f"OFF is 3-D; coordinates have dimension {d}")
    return [tuple(p) + (0.0,) * (3 - d) for p in c.vertex_coords]


def format_off(vertices, faces, colors=None) -> str:
    out = ["OFF", f"{len(vertices)} {len(faces)} 0"]
    for p in vertices:
        out.append(" ".join(repr(float(x)) for x in p))
    for i, f in enumerate(faces):
        row = f"{len(f)} " + " ".join(str(v) for v in f)
        if colors is not None:
            row += " " + " ".join(str(x) for x in colors[i])
        out.append(row)
    return "\n".join(out) + "\n"


def complex_off(c: SimplicialComplex) -> str:
    verts = _vertex_rows(c)
    if c.dimension >= 2:
        faces = list(c.faces[2]) if c.dimension >= 3 else list(c.top_simplices)
    else:
        faces = list(c.top_simplices)
    return format_off(verts, faces)


def spine_off(c: SimplicialComplex, d: Decomposition) -> str:
    verts = _vertex_rows(c)
    ridge_faces = c.faces[c.dimension - 1]
    faces = [ridge_faces[rid] for rid in d.spine]
    colors = [SPINE_COLOR] * len(faces)
    return format_off(verts, faces, colors)


def points_off(points) -> str:
    rows = []
    for p in points:
        p = tuple(float(x) for x in p)
        if len(p) > 3:
            raise InvalidComplexError("OFF is 3-D; point has higher dimension")
        rows.append(p + (0.0,) * (3 - len(p)))
    return format_off(rows, [])
