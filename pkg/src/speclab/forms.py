"""Discrete differential forms on a two-dimensional chart.

A p-form is a bundle of ``C(2, p)`` nodal P1 fields holding Cartesian
coefficients: ``f`` for p=0, ``(u, v)`` for ``u dx + v dy`` and ``w`` for
``w dx^dy``. Boundary quantities are returned as coefficients in the
orthonormal frame of the metric ``g = mu**2 (dx**2 + dy**2)``, so pointwise
norms can be compared without further weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, MeshMismatch, UnsupportedDegree
from .mesh import BoundaryFrame, SimplicialMesh

__all__ = [
    "FormField",
    "BoundaryTrace",
    "ParallelForm",
    "trace_split",
    "parallel_product",
    "hodge_star",
    "PARALLEL_FORMS",
]


@dataclass(frozen=True, eq=False)
class FormField:
    """Degree ``p`` form with component array ``values`` of shape ``(C(2,p), n_vertices)``."""

    p: int
    values: np.ndarray
    mesh: SimplicialMesh

    def __post_init__(self):
        if self.p not in (0, 1, 2):
            raise UnsupportedDegree(f"degree {self.p} not in {{0, 1, 2}}")
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.ndim == 1:
            vals = vals[None, :]
        nc = 2 if self.p == 1 else 1
        if vals.shape != (nc, self.mesh.n_vertices):
            raise MeshMismatch(f"expected components of shape {(nc, self.mesh.n_vertices)}, got {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n_components(self):
        return self.values.shape[0]

    @classmethod
    def from_vector(cls, p, vec, mesh):
        nc = 2 if p == 1 else 1
        return cls(p, np.asarray(vec, dtype=float).reshape(nc, mesh.n_vertices), mesh)

    def vector(self):
        return self.values.ravel()

    def pointwise_norm_sq(self):
        """``|omega|_g**2`` at every vertex."""
        mu = self.mesh.metric.mu(self.mesh.vertices[:, 0], self.mesh.vertices[:, 1])
        return np.sum(self.values**2, axis=0) * mu ** (-2 * self.p)


@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    """Orthonormal-frame coefficients of ``iota* omega`` and ``nu -| omega`` per boundary vertex.

    ``tangential`` is the coefficient of ``iota* omega`` (empty meaning for
    p=2, stored as zeros); ``normal`` is the coefficient of ``nu -| omega``
    on the unit tangent (zeros for p=0).
    """

    p: int
    tangential: np.ndarray
    normal: np.ndarray

    def norm_sq(self):
        return self.tangential**2 + self.normal**2


@dataclass(frozen=True)
class ParallelForm:
    """Constant-coefficient form ``1``, ``dx``, ``dy`` or ``dx^dy``."""

    name: str

    def __post_init__(self):
        if self.name not in PARALLEL_FORMS:
            raise InvalidParameter(f"unknown parallel form {self.name!r}")

    @property
    def p(self):
        return PARALLEL_FORMS[self.name][0]

    @property
    def slot(self):
        return PARALLEL_FORMS[self.name][1]

    @property
    def unit_norm(self):
        return True


PARALLEL_FORMS = {"1": (0, 0), "dx": (1, 0), "dy": (1, 1), "dxdy": (2, 0)}


def _check_frame(mesh, frame):
    if not isinstance(frame, BoundaryFrame) or not np.array_equal(frame.vertices, mesh.boundary_vertices):
        raise MeshMismatch("boundary frame does not belong to this mesh")


def trace_split(omega: FormField, frame: BoundaryFrame) -> BoundaryTrace:
    """Split the boundary values of ``omega`` into tangential and normal parts.

    Examples
    --------
    >>> from speclab.mesh import gen_domain, disk, boundary_frame
    >>> m = gen_domain(disk(1.0), 0.5)
    >>> w = FormField(1, np.vstack([np.ones(m.n_vertices), np.zeros(m.n_vertices)]), m)
    >>> tr = trace_split(w, boundary_frame(m))
    >>> bool(np.allclose(tr.norm_sq(), 1.0))
    True
    """
    mesh = omega.mesh
    _check_frame(mesh, frame)
    bv = frame.vertices
    mu = frame.mu
    vals = omega.values[:, bv]
    if omega.p == 0:
        return BoundaryTrace(0, vals[0].copy(), np.zeros(len(bv)))
    if omega.p == 1:
        tan = (vals[0] * frame.tangent[:, 0] + vals[1] * frame.tangent[:, 1]) / mu
        nor = (vals[0] * frame.normal[:, 0] + vals[1] * frame.normal[:, 1]) / mu
        return BoundaryTrace(1, tan, nor)
    # dx^dy (nu, t) = -1 for the frame orientation used here
    return BoundaryTrace(2, np.zeros(len(bv)), -vals[0] / mu**2)


def parallel_product(f: FormField, omega0: ParallelForm) -> FormField:
    """The form ``f * omega0`` for a scalar field ``f``."""
    if f.p != 0:
        raise InvalidParameter("parallel_product needs a 0-form factor")
    p = omega0.p
    nc = 2 if p == 1 else 1
    vals = np.zeros((nc, f.mesh.n_vertices))
    vals[omega0.slot] = f.values[0]
    return FormField(p, vals, f.mesh)


def hodge_star(omega: FormField) -> FormField:
    """Hodge star of the chart metric, mapping degree p to 2 - p.

    On a conformal chart 1-forms transform as in the flat case, while
    ``*1 = mu**2 dx^dy`` and ``*(dx^dy) = mu**-2``.
    """
    mesh = omega.mesh
    mu = mesh.metric.mu(mesh.vertices[:, 0], mesh.vertices[:, 1])
    v = omega.values
    if omega.p == 0:
        return FormField(2, v * mu**2, mesh)
    if omega.p == 1:
        return FormField(1, np.vstack([-v[1], v[0]]), mesh)
    return FormField(0, v / mu**2, mesh)
