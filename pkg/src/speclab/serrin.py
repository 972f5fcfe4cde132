"""Torsion (Serrin) problem ``Delta f = 1, f = 0 on the boundary`` and its flux.

A domain is harmonic when the inward normal derivative of the torsion
function is constant along the boundary. On such a domain ``f * omega0`` is a
biharmonic Steklov eigenform for every parallel form ``omega0``, with
eigenvalue ``1 / c``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .assembly import (
    ProblemSpec,
    assemble,
    boundary_lumped_mass,
    corrected_lumped_mass,
    form_mass,
    form_stiffness,
    weak_conormal_trace,
)
from .errors import FactorizationFailure, NonFlatMetric
from .forms import FormField, ParallelForm, parallel_product, trace_split
from .mesh import SimplicialMesh, boundary_frame

__all__ = [
    "SerrinSolution",
    "SerrinFormReport",
    "HARMONIC_THRESHOLD",
    "solve_serrin",
    "harmonic_domain_score",
    "is_harmonic",
    "verify_serrin_form",
]

#: classification threshold on the (extrapolated) constancy score
HARMONIC_THRESHOLD = 1e-2


@dataclass(frozen=True, eq=False)
class SerrinSolution:
    f: np.ndarray
    flux: np.ndarray
    c_mean: float
    constancy_score: float
    vol_M: float
    flux_integral: float
    mesh: SimplicialMesh = field(repr=False)


def solve_serrin(mesh: SimplicialMesh) -> SerrinSolution:
    """Solve the torsion problem and recover the inward boundary flux.

    The load uses the lumped mass with boundary rows folded into the interior,
    so the recovered flux integrates exactly to the volume.
    """
    L = form_stiffness(mesh, 0)
    load = corrected_lumped_mass(mesh, 0)
    interior = mesh.interior_vertices
    L_II = L[interior][:, interior].tocsc()
    try:
        f_I = sla.splu(L_II).solve(load[interior])
    except RuntimeError as exc:
        raise FactorizationFailure(str(exc)) from exc
    f = np.zeros(mesh.n_vertices)
    f[interior] = f_I
    frame = boundary_frame(mesh)
    # the residual of the full system at boundary rows is the weak flux
    r = L @ f - load
    bv = mesh.boundary_vertices
    m_bd = frame.mass
    flux = -r[bv] / m_bd
    total = float(m_bd @ flux)
    c_mean = total / float(m_bd.sum())
    var = float(m_bd @ (flux - c_mean) ** 2) / float(m_bd.sum())
    score = np.sqrt(var) / c_mean
    vol = float(form_mass(mesh, 0).sum())
    f.setflags(write=False)
    flux.setflags(write=False)
    return SerrinSolution(f, flux, c_mean, float(score), vol, total, mesh)


def harmonic_domain_score(mesh: SimplicialMesh) -> float:
    """Relative standard deviation of the torsion flux along the boundary."""
    return solve_serrin(mesh).constancy_score


def is_harmonic(score, threshold=HARMONIC_THRESHOLD):
    return bool(score < threshold)


@dataclass(frozen=True)
class SerrinFormReport:
    residual: float
    residual_tangential: float
    residual_normal: float
    quotient: float
    q: float
    c_mean: float


def verify_serrin_form(mesh: SimplicialMesh, omega0: ParallelForm) -> SerrinFormReport:
    """Check that ``f * omega0`` satisfies ``Delta omega = q nabla_nu omega`` with ``q = 1/c``.

    Returns the boundary L2 norm of the defect, split into its
    tangential and normal boundary conditions, together with the
    biharmonic Steklov Rayleigh quotient of the form.
    """
    if not mesh.metric.is_flat:
        raise NonFlatMetric("parallel forms are only available on flat charts")
    sol = solve_serrin(mesh)
    omega = parallel_product(FormField(0, sol.f, mesh), omega0)
    p = omega0.p
    frame = boundary_frame(mesh)
    # Delta omega = omega0 exactly; on the boundary its trace is that of omega0
    ones = FormField(0, np.ones(mesh.n_vertices), mesh)
    lap = parallel_product(ones, omega0)
    lap_tr = trace_split(lap, frame)
    nu_d, iota_delta = weak_conormal_trace(omega, frame, source=lap.values)
    # nabla_nu omega has orthonormal coefficients (nu_d, -iota_delta)
    # split as (iota*, nu-|) exactly like any boundary form
    q = 1.0 / sol.c_mean
    m_bd = frame.mass
    d_tan = lap_tr.tangential - q * nu_d
    d_nor = lap_tr.normal - q * (-iota_delta)
    if p == 0:
        d_nor = np.zeros_like(d_tan)
    if p == 2:
        d_tan = np.zeros_like(d_nor)
    res_t = float(np.sqrt(m_bd @ d_tan**2))
    res_n = float(np.sqrt(m_bd @ d_nor**2))
    residual = float(np.hypot(res_t, res_n))

    pen = assemble(ProblemSpec("bs", p), mesh)
    x = pen.P.T @ omega.vector()
    quotient = float(x @ (pen.A @ x)) / float(x @ (pen.B @ x))
    return SerrinFormReport(residual, res_t, res_n, quotient, q, sol.c_mean)
