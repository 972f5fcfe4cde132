import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from speclab.assembly import OperatorPencil, ProblemSpec, assemble, bs_harmonic_quotient
from speclab.eig import cluster, dedup, dense_reference, residuals, richardson, solve

from conftest import generated_pencils


def _chain_pencil(n, h=1.0):
    A = sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], format="csr") / h**2
    I = sp.identity(n, format="csr")
    return OperatorPencil(A, I, I, "smallest", ProblemSpec("dirichlet", 0), None)


@pytest.mark.parametrize("n", [9, 200])
def test_chain_laplacian_closed_form(n):
    h = 1.0 / (n + 1)
    spec = solve(_chain_pencil(n, h), 3)
    exact = 4 * np.sin(np.pi * np.arange(1, 4) * h / 2) ** 2 / h**2
    assert np.allclose(spec.eigenvalues, exact, rtol=1e-12, atol=0)


def test_identity_pencil():
    I = sp.identity(30, format="csr")
    pen = OperatorPencil(I, I, I, "smallest", ProblemSpec("dirichlet", 0), None)
    assert np.allclose(solve(pen, 5).eigenvalues, 1.0)


@pytest.mark.parametrize("label,mesh,spec", generated_pencils(), ids=lambda v: v if isinstance(v, str) else "")
def test_lanczos_matches_dense(label, mesh, spec):
    pen = bs_harmonic_quotient(0, mesh) if spec == "harmonic" else assemble(spec, mesh)
    assert pen.size <= 1500
    k = 1 if spec == "harmonic" else 4
    it = solve(pen, k)
    ref = dense_reference(pen, k)
    scale = max(1.0, float(np.abs(ref.eigenvalues).max()))
    assert np.max(np.abs(it.eigenvalues - ref.eigenvalues)) <= 1e-8 * scale
    assert np.all(it.residuals <= 1e-9)


def test_residuals_reported(disk_coarse):
    pen = assemble(ProblemSpec("neumann", 1), disk_coarse)
    spec = solve(pen, 4)
    again = residuals(pen.A, pen.B, spec.eigenvalues, spec.eigenvectors)
    assert np.allclose(again, spec.residuals)


def test_deterministic_bytes(annulus_coarse):
    pen = assemble(ProblemSpec("bs", 1), annulus_coarse)
    a, b = solve(pen, 4, seed=7), solve(pen, 4, seed=7)
    assert a.eigenvalues.tobytes() == b.eigenvalues.tobytes()
    assert a.eigenvectors.tobytes() == b.eigenvectors.tobytes()
    assert a.meta["seed"] == 7


def test_sign_convention(disk_coarse):
    v = solve(assemble(ProblemSpec("dirichlet", 0), disk_coarse), 3).eigenvectors
    for col in v.T:
        first = col[np.flatnonzero(np.abs(col) > 1e-12)[0]]
        assert first > 0


def test_kmode_square_doubled_multiplicities(square_coarse):
    q0 = solve(assemble(ProblemSpec("bs", 0), square_coarse), 4).eigenvalues
    q1 = solve(assemble(ProblemSpec("bs", 1), square_coarse), 8).eigenvalues
    assert np.allclose(q1, np.repeat(q0, 2), rtol=1e-8)


def test_richardson_synthetic():
    e = richardson(1 + 0.1**2, 1 + 0.05**2, 1 + 0.025**2)
    assert math.isclose(e.value, 1.0, abs_tol=1e-14)
    assert math.isclose(e.observed_order, 2.0, rel_tol=1e-10)


def test_richardson_constant():
    e = richardson(3.0, 3.0, 3.0)
    assert e.value == 3.0 and e.infinite_order


def test_richardson_oscillating_is_conservative():
    e = richardson(1.0, 1.2, 1.1)
    assert not e.monotone and e.value == 1.1 and e.error_estimate >= 0.1


def test_cluster_and_dedup():
    vals = [1.0, 1.0 + 1e-9, 2.0, 2.0, 2.0, 3.5]
    assert [m for _, m in cluster(vals)] == [2, 3, 1]
    assert np.allclose(dedup(vals), [1.0, 2.0, 3.5])


@settings(max_examples=25, deadline=None)
@given(c=st.floats(-10, 10), a=st.floats(0.1, 10), order=st.floats(0.5, 4))
def test_property_richardson_exact_on_power_law(c, a, order):
    seq = [c + a * h**order for h in (0.1, 0.05, 0.025)]
    e = richardson(*seq)
    assert math.isclose(e.value, c, abs_tol=1e-9 * max(1, abs(c)) + 1e-10)
    assert math.isclose(e.observed_order, order, rel_tol=1e-6)
