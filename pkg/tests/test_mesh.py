import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from speclab.errors import InvalidParameter
from speclab.mesh import (
    MetricDescriptor,
    annulus,
    boundary_frame,
    cap,
    disk,
    ellipse,
    gen_domain,
    parse_domain,
    read_fmesh,
    refine,
    square,
    write_fmesh,
)


def _area(mesh):
    return float(np.abs(mesh.signed_areas).sum())


def _perimeter(mesh):
    e = mesh.boundary_edges
    return float(np.linalg.norm(mesh.vertices[e[:, 1]] - mesh.vertices[e[:, 0]], axis=1).sum())


def _edge_incidence(mesh):
    t = mesh.triangles
    e = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
    _, counts = np.unique(e, axis=0, return_counts=True)
    return counts


def test_disk_topology():
    m = gen_domain(disk(1.0), 0.5)
    assert m.euler_characteristic == 1
    assert len(m.loops) == 1


def test_annulus_topology():
    m = gen_domain(annulus(0.5, 1.0), 0.2)
    assert m.euler_characteristic == 0
    assert len(m.loops) == 2


@pytest.mark.parametrize("tag", [disk(1.0), annulus(0.5, 1.0), ellipse(1.0, 0.6), square(1.0), cap(math.pi / 3)])
def test_invariants(tag):
    m = gen_domain(tag, 0.2)
    counts = _edge_incidence(m)
    assert set(counts.tolist()) <= {1, 2}
    assert np.sum(counts == 1) == len(m.boundary_edges)
    assert np.all(m.signed_areas > 0)
    assert m.max_edge <= 0.2 + 1e-12
    r = refine(m)
    assert np.all(r.signed_areas > 0)
    assert r.euler_characteristic == m.euler_characteristic


def test_disk_area_perimeter_second_order():
    errs = []
    m = gen_domain(disk(1.0), 0.2)
    for _ in range(3):
        errs.append((abs(_area(m) - math.pi), abs(_perimeter(m) - 2 * math.pi)))
        m = refine(m)
    errs = np.array(errs)
    rates = np.log2(errs[:-1] / errs[1:])
    assert np.all(rates > 1.8)


def test_boundary_vertices_on_curve():
    m = refine(gen_domain(disk(1.0), 0.3))
    r = np.hypot(*m.vertices[m.boundary_vertices].T)
    assert np.max(np.abs(r - 1.0)) < 1e-14


def test_refine_quadruples_faces(disk_coarse):
    assert refine(disk_coarse).n_triangles == 4 * disk_coarse.n_triangles


def test_refine_square_similarity_classes():
    def classes(m):
        P = m.vertices[m.triangles]
        L = np.sort(np.linalg.norm(P - np.roll(P, 1, axis=1), axis=2), axis=1)
        return {tuple(np.round(row / row[0], 9)) for row in L}

    m = gen_domain(square(1.0), 0.3)
    assert classes(refine(refine(m))) == classes(m)


def test_frame_disk_normal_and_curvature():
    m = gen_domain(disk(1.0), 0.05)
    fr = boundary_frame(m)
    x = m.vertices[fr.vertices]
    assert np.allclose(fr.normal, -x, atol=1e-12)
    i = np.argmin(np.hypot(x[:, 0] - 1, x[:, 1]))
    assert np.allclose(fr.normal[i], [-1, 0], atol=1e-12)
    assert np.max(np.abs(fr.curvature - 1.0)) < 1e-3


def test_frame_orthonormal_and_inward(ellipse_coarse):
    m = ellipse_coarse
    fr = boundary_frame(m)
    assert np.allclose(np.linalg.norm(fr.normal, axis=1), 1)
    assert np.allclose(np.linalg.norm(fr.tangent, axis=1), 1)
    assert np.allclose(np.sum(fr.normal * fr.tangent, axis=1), 0)
    # inward: the normal points toward the centroid of an incident triangle
    cent = m.vertices[m.triangles].mean(axis=1)
    for k, v in enumerate(fr.vertices):
        tri = np.flatnonzero(np.any(m.triangles == v, axis=1))
        assert np.all((cent[tri] - m.vertices[v]) @ fr.normal[k] > 0)


def test_hemisphere_geodesic_curvature_zero():
    m = gen_domain(cap(math.pi / 2), 0.1)
    assert np.max(np.abs(boundary_frame(m).curvature)) < 1e-3


def test_cap_geodesic_curvature_cot():
    m = gen_domain(cap(math.pi / 3), 0.1)
    k = boundary_frame(m).curvature
    assert np.max(np.abs(k - 1 / math.tan(math.pi / 3))) < 1e-3


def test_square_corners_flagged():
    fr = boundary_frame(gen_domain(square(1.0), 0.2))
    assert fr.corner.sum() == 4
    assert np.all(np.isnan(fr.curvature[fr.corner]))


def test_cap_metric():
    m = gen_domain(cap(1.0), 0.2)
    assert m.metric.kind == "cap" and m.metric.alpha == 1.0
    r = np.hypot(*m.vertices[m.boundary_vertices].T)
    assert np.allclose(r, math.tan(0.5))
    assert np.all(m.metric.mu(*m.vertices.T) > 0)
    assert np.all(MetricDescriptor().mu(*m.vertices.T) == 1)


@pytest.mark.parametrize("bad", [lambda: gen_domain(disk(1.0), -0.1),
                                 lambda: gen_domain(annulus(1.0, 0.5), 0.1),
                                 lambda: gen_domain(cap(4.0), 0.1),
                                 lambda: parse_domain("torus", "1")])
def test_invalid_parameters(bad):
    with pytest.raises(InvalidParameter):
        bad()


@pytest.mark.parametrize("tag", [disk(1.0), annulus(0.5, 1.0), ellipse(1.0, 0.6), square(1.0), cap(1.5708)])
def test_fmesh_round_trip(tag):
    m = gen_domain(tag, 0.3)
    buf = io.StringIO()
    text = write_fmesh(m, buf)
    back = read_fmesh(io.StringIO(text))
    assert np.array_equal(back.vertices, m.vertices)
    assert np.array_equal(back.triangles, m.triangles)
    assert np.array_equal(back.boundary_edges, m.boundary_edges)
    assert back.metric == m.metric
    assert str(back.domain) == str(m.domain)
    assert write_fmesh(back, io.StringIO()) == text


def test_generation_deterministic():
    a = write_fmesh(gen_domain(annulus(0.5, 1.0), 0.2), io.StringIO())
    b = write_fmesh(gen_domain(annulus(0.5, 1.0), 0.2), io.StringIO())
    assert a == b


@settings(max_examples=15, deadline=None)
@given(h=st.floats(0.15, 0.6), kind=st.sampled_from(["disk", "annulus", "ellipse", "square", "cap"]))
def test_property_generated_meshes_valid(h, kind):
    m = gen_domain(parse_domain(kind), h)
    m.validate()
    assert m.max_edge <= h + 1e-12
    assert m.euler_characteristic == (0 if kind == "annulus" else 1)
    counts = _edge_incidence(m)
    assert np.sum(counts == 1) == len(m.boundary_edges)
