import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

import spineforge as sf
from spineforge.chart import (BlackPointError, ChartDomainError, PointRef,
                              ambient_position, broken_line_to, build_chart,
                              forward_map, geometric_tol, inverse_map,
                              point_gap, retract, retraction_samples,
                              sample_interior, stretch)
from spineforge.simplicial import Metric

ALL = ["circle3", "sphere_tet", "torus7", "rp2_6", "sphere3_pent"]


def uniform(n):
    return (1.0 / (n + 1),) * (n + 1)


class TestStretch:
    def test_formula_midpoint(self):
        assert stretch(0.5, 1.0, 1.0) == 1.0

    def test_fixed_start(self):
        assert stretch(0.0, 2.0, 3.0) == 0.0

    def test_identity_when_child_empty(self):
        assert stretch(1.0, 1.0, 0.0) == 1.0

    def test_endpoint_identity(self):
        for s1, s2 in [(0.7, 1.3), (2.0, 0.25), (1e-3, 5.0)]:
            assert abs(stretch(s1, s1, s2) - (s1 + s2)) <= 1e-12 * (s1 + s2)

    def test_domain_violations(self):
        with pytest.raises(ChartDomainError):
            stretch(0.5, 0.0, 1.0)
        with pytest.raises(ChartDomainError):
            stretch(0.5, 1.0, -1.0)
        with pytest.raises(ChartDomainError):
            stretch(-0.1, 1.0, 1.0)
        with pytest.raises(ChartDomainError):
            stretch(1.5, 1.0, 1.0)

    @given(st.floats(0.01, 0.99), st.floats(0.01, 0.99),
           st.floats(0.1, 10.0), st.floats(0.0, 10.0))
    def test_strictly_increasing(self, a, b, s1, s2):
        lo, hi = sorted((a * s1, b * s1))
        if lo < hi:
            assert stretch(lo, s1, s2) < stretch(hi, s1, s2)


class TestBuildChart:
    def test_record_counts(self, census, charts):
        for name, expected in [("circle3", 2), ("sphere_tet", 3), ("torus7", 13)]:
            assert len(charts[name].records) == expected

    def test_root_step_apex_is_barycenter(self, charts):
        chart = charts["sphere_tet"]
        rec = chart.records[0]
        assert rec.apex == chart.c0
        assert rec.parent == chart.root

    def test_later_steps_inherit_gate_structure(self, charts):
        chart = charts["torus7"]
        for rec in chart.records:
            if rec.parent != chart.root:
                assert rec.apex is None

    def test_records_follow_growth_order(self, charts):
        chart = charts["torus7"]
        gates = chart.decomposition.gates
        assert [r.gate for r in chart.records] == [g.gate for g in gates]

    def test_gate_center_and_opposite_vertex(self, census, charts):
        c = census["sphere_tet"]
        chart = charts["sphere_tet"]
        for rec in chart.records:
            gate_face = c.faces[1][rec.gate]
            assert rec.opposite_vertex not in gate_face
            assert rec.opposite_vertex in c.top_simplices[rec.child]
            center = rec.gate_center
            assert center.top == rec.parent
            verts = c.top_simplices[rec.parent]
            for v, w in zip(verts, center.bary):
                assert w == (0.5 if v in gate_face else 0.0)

    def test_circle3_child_intervals_are_whole_edges(self, census):
        # n=1: the gate "face center" is the vertex itself and each child
        # interval runs across the whole edge
        c = census["circle3"]
        chart = build_chart(c, sf.decompose(c), Metric.from_complex(c))
        for rec in chart.records:
            p, q, _, length, _ = chart._chord(
                rec.child, chart._transfer(rec.gate_center.bary, rec.parent, rec.child))
            assert sorted((p, q)) == sorted(((1.0, 0.0), (0.0, 1.0)))
            assert length == pytest.approx(
                Metric.from_complex(c).length(*c.top_simplices[rec.child]))


class TestForwardMap:
    def test_barycenter_is_fixed(self, charts):
        for chart in charts.values():
            assert forward_map(chart, chart.c0) == chart.c0

    def test_circle3_midpoint_lands_on_gate_when_lengths_match(self, census):
        # s1 = s2 = 0.5: the ray midpoint stretches exactly onto the junction
        c = census["circle3"]
        d = sf.decompose(c, root=0)
        m = Metric({(0, 1): 1.0, (0, 2): 0.5, (1, 2): 0.5})
        chart = build_chart(c, d, m)
        img = forward_map(chart, PointRef(0, (0.75, 0.25)))
        assert img.top == 0
        assert img.bary == pytest.approx((1.0, 0.0), abs=1e-12)

    def test_rejects_non_root_and_boundary(self, charts):
        chart = charts["sphere_tet"]
        with pytest.raises(ChartDomainError):
            forward_map(chart, PointRef(1, uniform(2)))
        with pytest.raises(ChartDomainError):
            forward_map(chart, PointRef(0, (0.5, 0.5, 0.0)))

    @pytest.mark.parametrize("name", ALL)
    def test_round_trip_forward_then_inverse(self, charts, name):
        chart = charts[name]
        rng = random.Random(101)
        worst = 0.0
        for _ in range(300):
            x = sample_interior(chart.complex, rng, chart.root)
            back = inverse_map(chart, forward_map(chart, x))
            assert back.top == chart.root
            worst = max(worst, max(abs(a - b) for a, b in zip(x.bary, back.bary)))
        assert worst <= 1e-9

    @pytest.mark.parametrize("name", ALL)
    def test_round_trip_inverse_then_forward(self, charts, name):
        chart = charts[name]
        rng = random.Random(33)
        worst = 0.0
        for _ in range(300):
            q = sample_interior(chart.complex, rng,
                                rng.randrange(len(chart.complex.top_simplices)))
            again = forward_map(chart, inverse_map(chart, q))
            worst = max(worst, point_gap(chart, q, again))
        assert worst <= 1e-9

    def test_monotone_along_a_ray(self, charts):
        # increasing radial arc maps to strictly increasing arc along the line
        chart = charts["torus7"]
        rng = random.Random(5)
        direction = sample_interior(chart.complex, rng, chart.root)
        arcs = []
        for k in range(1, 40):
            w = k / 40.0
            x = PointRef(chart.root, tuple(
                c + w * (d - c) for c, d in zip(chart.c0.bary, direction.bary)))
            y = forward_map(chart, x)
            line, arc = chart.locate(y)
            arcs.append(arc)
        assert all(a < b for a, b in zip(arcs, arcs[1:]))

    def test_gate_seam_modulus_of_continuity(self, charts):
        # approach the preimage of a gate junction; halving the domain offset
        # must (at least) halve the image gap, 4 dyadic levels
        chart = charts["sphere_tet"]
        rec = chart.records[0]
        b = rec.gate_center.bary
        s_ray = chart._dist(chart.root, chart.c0.bary, b)
        junction = chart._transfer(b, chart.root, rec.child)
        _, _, _, s2, _ = chart._chord(rec.child, junction)
        s_star = s_ray * s_ray / (s_ray + s2)   # preimage arc of the junction
        jref = PointRef(rec.child, junction)
        gaps = []
        for k in range(4):
            offset = 0.05 / (2 ** k)
            arc = s_star * (1 - offset)
            x = PointRef(chart.root, tuple(
                c + (arc / s_ray) * (d - c) for c, d in zip(chart.c0.bary, b)))
            gaps.append(point_gap(chart, jref, forward_map(chart, x)))
        for a, b_ in zip(gaps, gaps[1:]):
            assert b_ <= 0.5001 * a + 1e-12


class TestInverseMap:
    def test_barycenter(self, charts):
        chart = charts["rp2_6"]
        assert inverse_map(chart, chart.c0) == chart.c0

    def test_gate_interior_sample_maps_inside(self, charts):
        chart = charts["sphere_tet"]
        rec = chart.records[0]
        junction = chart._transfer(rec.gate_center.bary, rec.parent, rec.child)
        pre = inverse_map(chart, PointRef(rec.child, junction))
        assert pre.top == chart.root
        assert all(x > 1e-9 for x in pre.bary)

    def test_spine_point_rejected_with_diagnostic(self, census, charts):
        c = census["sphere_tet"]
        chart = charts["sphere_tet"]
        rid = chart.decomposition.spine[0]
        face = c.faces[1][rid]
        verts = c.top_simplices[c.ridge_cofacets[rid][0]]
        bary = tuple(0.5 if v in face else 0.0 for v in verts)
        with pytest.raises(BlackPointError) as err:
            inverse_map(chart, PointRef(c.ridge_cofacets[rid][0], bary))
        assert str(face) in str(err.value)


class TestBrokenLines:
    def test_circle3_star_tree_two_segments_each_side(self, census):
        c = census["circle3"]
        d = sf.decompose(c, root=0, strategy="bfs")       # gates at both root ends
        chart = build_chart(c, d, Metric.from_complex(c))
        spine_vertex = c.faces[0][d.spine[0]][0]
        for side in set(c.ridge_cofacets[d.spine[0]]):
            verts = c.top_simplices[side]
            z = PointRef(side, tuple(1.0 if v == spine_vertex else 0.0 for v in verts))
            line = broken_line_to(chart, z)
            assert len(line.segments) == 2

    def test_circle3_path_tree_one_and_three_segments(self, census):
        # dfs grows a path, so the spine vertex bounds the root: the two sides
        # reach it with one segment and with three
        c = census["circle3"]
        d = sf.decompose(c, root=0, strategy="dfs")
        chart = build_chart(c, d, Metric.from_complex(c))
        spine_vertex = c.faces[0][d.spine[0]][0]
        lengths = []
        for side in sorted(set(c.ridge_cofacets[d.spine[0]])):
            verts = c.top_simplices[side]
            z = PointRef(side, tuple(1.0 if v == spine_vertex else 0.0 for v in verts))
            lengths.append(len(broken_line_to(chart, z).segments))
        assert sorted(lengths) == [1, 3]

    def test_sphere_tet_segment_count_is_depth_plus_one(self, census, charts):
        c = census["sphere_tet"]
        chart = charts["sphere_tet"]
        depth = {chart.root: 0}
        for rec in chart.records:
            depth[rec.child] = depth[rec.parent] + 1
        for rid in chart.decomposition.spine:
            face = c.faces[1][rid]
            for side in c.ridge_cofacets[rid]:
                verts = c.top_simplices[side]
                z = PointRef(side, tuple(0.5 if v in face else 0.0 for v in verts))
                line = broken_line_to(chart, z)
                assert len(line.segments) == depth[side] + 1
                assert line.segments[0].start == chart.c0

    @pytest.mark.parametrize("name", ALL)
    def test_junction_consistency(self, census, charts, name):
        c = census[name]
        chart = charts[name]
        rng = random.Random(77)
        worst = 0.0
        for rid in chart.decomposition.spine:
            for side in c.ridge_cofacets[rid]:
                face = c.faces[c.dimension - 1][rid]
                raw = [rng.random() + 0.1 for _ in face]
                s = sum(raw)
                weights = dict(zip(face, (x / s for x in raw)))
                verts = c.top_simplices[side]
                z = PointRef(side, tuple(weights.get(v, 0.0) for v in verts))
                line = broken_line_to(chart, z)
                for a, b in zip(line.segments, line.segments[1:]):
                    worst = max(worst, point_gap(chart, a.end, b.start))
                worst = max(worst, point_gap(chart, line.segments[-1].end, z))
        assert worst <= 1e-9

    def test_endpoint_must_be_black(self, charts):
        chart = charts["torus7"]
        with pytest.raises(ChartDomainError):
            broken_line_to(chart, chart.c0)

    def test_side_argument_transfers(self, census, charts):
        c = census["sphere_tet"]
        chart = charts["sphere_tet"]
        rid = chart.decomposition.spine[0]
        a, b = c.ridge_cofacets[rid]
        face = c.faces[1][rid]
        za = PointRef(a, tuple(0.5 if v in face else 0.0 for v in c.top_simplices[a]))
        line_b = broken_line_to(chart, za, side=b)
        assert line_b.segments[-1].top == b


class TestRetract:
    @pytest.mark.parametrize("name", ALL)
    def test_time_zero_is_bit_exact_identity(self, charts, name):
        chart = charts[name]
        rng = random.Random(9)
        for _ in range(50):
            x = sample_interior(chart.complex, rng,
                                rng.randrange(len(chart.complex.top_simplices)))
            assert retract(chart, x, 0.0) is x

    @pytest.mark.parametrize("name", ALL)
    def test_time_one_lands_on_spine(self, charts, name):
        chart = charts[name]
        rng = random.Random(10)
        for _ in range(50):
            x = sample_interior(chart.complex, rng,
                                rng.randrange(len(chart.complex.top_simplices)))
            z = retract(chart, x, 1.0)
            assert chart.spine_face_of(z) is not None

    def test_arc_length_law(self, charts):
        chart = charts["torus7"]
        rng = random.Random(11)
        for _ in range(100):
            x = sample_interior(chart.complex, rng,
                                rng.randrange(len(chart.complex.top_simplices)))
            t = rng.random()
            line, arc = chart.locate(x)
            s_x = line.length - arc
            y = retract(chart, x, t)
            line2, arc2 = chart.locate(y)
            assert abs((line2.length - arc2) - (1 - t) * s_x) <= 1e-9

    def test_explicit_arc_value(self, census):
        # t = 0.5 with s(x) = 0.8 puts the image at arc 0.4 from z
        c = census["circle3"]
        d = sf.decompose(c, root=0)
        m = Metric({(0, 1): 1.0, (0, 2): 0.6, (1, 2): 0.6})
        chart = build_chart(c, d, m)
        x = PointRef(0, (0.8, 0.2))   # arc 0.3 from c0, line length 1.1, s(x)=0.8
        line, arc = chart.locate(x)
        assert line.length - arc == pytest.approx(0.8)
        y = retract(chart, x, 0.5)
        line2, arc2 = chart.locate(y)
        assert line2.length - arc2 == pytest.approx(0.4, abs=1e-9)

    def test_spine_points_never_move(self, census, charts):
        c = census["rp2_6"]
        chart = charts["rp2_6"]
        rid = chart.decomposition.spine[0]
        side = c.ridge_cofacets[rid][0]
        face = c.faces[1][rid]
        z = PointRef(side, tuple(0.5 if v in face else 0.0 for v in c.top_simplices[side]))
        for t in (0.0, 0.3, 1.0):
            assert retract(chart, z, t) is z

    def test_barycenter_uses_first_gate_convention(self, charts):
        chart = charts["sphere_tet"]
        y = retract(chart, chart.c0, 1.0)
        assert chart.spine_face_of(y) is not None

    def test_time_out_of_range(self, charts):
        chart = charts["circle3"]
        with pytest.raises(ChartDomainError):
            retract(chart, chart.c0, 1.5)


class TestSamplingAndTolerance:
    def test_retraction_samples_shape(self, charts):
        chart = charts["sphere_tet"]
        rows = retraction_samples(chart, count=5, t_steps=4, seed=1)
        assert len(rows) == 25
        for row in rows:
            assert 0.0 <= row[0] <= 1.0
            assert len(row) == 2 + chart.complex.dimension + 1

    def test_retraction_csv(self, charts):
        from spineforge.chart import retraction_csv
        text = retraction_csv(charts["torus7"], count=3, t_steps=2, seed=1)
        lines = text.strip().splitlines()
        assert lines[0] == "t,top,b0,b1,b2"
        assert len(lines) == 1 + 3 * 3
        assert text == retraction_csv(charts["torus7"], count=3, t_steps=2, seed=1)

    def test_ambient_position(self, census):
        c = census["sphere_tet"]
        pt = PointRef(0, (1.0, 0.0, 0.0))
        assert ambient_position(c, pt) == c.vertex_coords[c.top_simplices[0][0]]

    def test_tolerance_env_override(self, monkeypatch):
        monkeypatch.setenv("SPINEFORGE_TOL", "1e-6")
        assert geometric_tol() == 1e-6
        monkeypatch.delenv("SPINEFORGE_TOL")
        assert geometric_tol() == 1e-9
