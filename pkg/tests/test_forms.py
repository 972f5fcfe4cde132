import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from speclab.errors import InvalidParameter, MeshMismatch, UnsupportedDegree
from speclab.forms import FormField, ParallelForm, hodge_star, parallel_product, trace_split
from speclab.mesh import boundary_frame, disk, gen_domain

_MESH = gen_domain(disk(1.0), 0.3)
_FRAME = boundary_frame(_MESH)


def _top_vertex(frame, mesh):
    x = mesh.vertices[frame.vertices]
    return int(np.argmin(np.hypot(x[:, 0], x[:, 1] - 1)))


def test_dx_trace_components():
    w = FormField(1, np.vstack([np.ones(_MESH.n_vertices), np.zeros(_MESH.n_vertices)]), _MESH)
    tr = trace_split(w, _FRAME)
    assert np.array_equal(tr.tangential, _FRAME.tangent[:, 0])
    assert np.array_equal(tr.normal, _FRAME.normal[:, 0])
    # near (0, 1) the frame is nu = (0, -1), t = (-1, 0)
    m = gen_domain(disk(1.0), 0.05)
    fr = boundary_frame(m)
    i = _top_vertex(fr, m)
    tr = trace_split(FormField(1, np.vstack([np.ones(m.n_vertices), np.zeros(m.n_vertices)]), m), fr)
    assert abs(tr.tangential[i] + 1) < 1e-3 and abs(tr.normal[i]) < 2e-2


def test_scalar_has_no_normal_part():
    tr = trace_split(FormField(0, np.arange(_MESH.n_vertices, dtype=float), _MESH), _FRAME)
    assert not tr.normal.any()
    assert np.array_equal(tr.tangential, np.arange(_MESH.n_vertices, dtype=float)[_FRAME.vertices])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_property_trace_split_isometry(seed):
    vals = np.random.default_rng(seed).normal(size=(2, _MESH.n_vertices))
    tr = trace_split(FormField(1, vals, _MESH), _FRAME)
    assert np.allclose(tr.norm_sq(), np.sum(vals[:, _FRAME.vertices] ** 2, axis=0), rtol=1e-14, atol=0)


def test_parallel_product_slots():
    ones = FormField(0, np.ones(_MESH.n_vertices), _MESH)
    w = parallel_product(ones, ParallelForm("dx"))
    assert np.all(w.values[0] == 1) and np.all(w.values[1] == 0)
    f = FormField(0, _MESH.vertices[:, 0] ** 2, _MESH)
    top = parallel_product(f, ParallelForm("dxdy"))
    assert top.p == 2 and np.array_equal(top.values[0], f.values[0])


def test_parallel_product_vanishing_on_boundary_has_zero_traces():
    x, y = _MESH.vertices.T
    f = FormField(0, 1 - x**2 - y**2, _MESH)
    for name in ("1", "dx", "dy", "dxdy"):
        tr = trace_split(parallel_product(f, ParallelForm(name)), _FRAME)
        assert np.max(np.abs(tr.norm_sq())) < 1e-28


def test_hodge_star_rules():
    n = _MESH.n_vertices
    dx = FormField(1, np.vstack([np.ones(n), np.zeros(n)]), _MESH)
    assert np.array_equal(hodge_star(dx).values, np.vstack([np.zeros(n), np.ones(n)]))
    one = FormField(0, np.ones(n), _MESH)
    assert hodge_star(one).p == 2 and np.all(hodge_star(one).values == 1)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), p=st.sampled_from([0, 1, 2]))
def test_property_hodge_involution_and_isometry(seed, p):
    nc = 2 if p == 1 else 1
    w = FormField(p, np.random.default_rng(seed).normal(size=(nc, _MESH.n_vertices)), _MESH)
    ww = hodge_star(hodge_star(w))
    sign = (-1) ** (p * (2 - p))
    assert np.array_equal(ww.values, sign * w.values)
    assert np.allclose(hodge_star(w).pointwise_norm_sq(), w.pointwise_norm_sq(), rtol=1e-14)


def test_errors():
    with pytest.raises(UnsupportedDegree):
        FormField(3, np.zeros(_MESH.n_vertices), _MESH)
    with pytest.raises(MeshMismatch):
        FormField(1, np.zeros(_MESH.n_vertices), _MESH)
    with pytest.raises(InvalidParameter):
        ParallelForm("dz")
    other = boundary_frame(gen_domain(disk(1.0), 0.5))
    with pytest.raises(MeshMismatch):
        trace_split(FormField(0, np.zeros(_MESH.n_vertices), _MESH), other)
