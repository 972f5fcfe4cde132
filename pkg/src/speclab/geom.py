"""Geometric inputs of the eigenvalue bounds.

Volumes, inner radius, boundary curvatures, the space-form comparison
function ``s_K``, the integral of ``Theta`` and the constants of the sphere
inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate, optimize
from scipy.sparse.csgraph import dijkstra
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .assembly import form_mass
from .errors import CornerDomain, DegreeOutOfRange, InvalidParameter
from .mesh import SimplicialMesh, _to_sphere, boundary_frame

__all__ = [
    "GeometryReport",
    "geometry_report",
    "inner_radius",
    "p_curvatures",
    "s_K",
    "ds_K",
    "theta",
    "theta_integral",
    "bs_constant",
]


@dataclass(frozen=True)
class GeometryReport:
    vol_M: float
    vol_bd: float
    ratio: float
    inner_radius: float
    H0: float | None
    sigma: dict
    K: float
    corners: bool

    def require_curvature(self):
        if self.corners:
            raise CornerDomain("boundary curvature is undefined at corners")
        return self.H0


def _boundary_samples(mesh, per_edge=8):
    be = mesh.boundary_edges
    a = mesh.vertices[be[:, 0]]
    b = mesh.vertices[be[:, 1]]
    s = np.arange(per_edge) / per_edge
    return (a[:, None, :] + s[None, :, None] * (b - a)[:, None, :]).reshape(-1, 2)


def _probe_points(mesh):
    P = mesh.vertices
    e = mesh.edges
    t = mesh.triangles
    return np.concatenate([P, 0.5 * (P[e[:, 0]] + P[e[:, 1]]), P[t].mean(axis=1)])


def inner_radius(mesh: SimplicialMesh, method="nearest"):
    """Largest distance from the mesh to its boundary.

    ``method="nearest"`` measures the metric distance from vertices, edge
    midpoints and centroids to a dense sampling of the boundary polygon.
    ``method="graph"`` runs a multi-source shortest path over the edge graph
    and is an upper bound with O(h) error.
    """
    if method == "graph":
        e = mesh.edges
        w = mesh.edge_lengths()
        n = mesh.n_vertices
        G = sp.coo_matrix((w, (e[:, 0], e[:, 1])), shape=(n, n)).tocsr()
        d = dijkstra(G, directed=False, indices=mesh.boundary_vertices, min_only=True)
        return float(d.max())
    if method != "nearest":
        raise InvalidParameter(f"unknown inner radius method {method!r}")
    samples = _boundary_samples(mesh)
    probes = _probe_points(mesh)
    if mesh.metric.is_flat:
        d, _ = cKDTree(samples).query(probes)
        return float(d.max())
    # chord distance on the unit sphere is monotone in geodesic distance
    d, _ = cKDTree(_to_sphere(samples)).query(_to_sphere(probes))
    return float(2.0 * np.arcsin(np.clip(d / 2.0, 0.0, 1.0)).max())


def p_curvatures(etas):
    """Partial sums ``sigma_p = eta_1 + ... + eta_p`` of sorted principal curvatures."""
    return np.cumsum(np.sort(np.asarray(etas, dtype=float)))


def geometry_report(mesh: SimplicialMesh, allow_corners=False) -> GeometryReport:
    """Volumes, inner radius and boundary curvature bounds of a meshed domain.

    Examples
    --------
    >>> from speclab.mesh import gen_domain, disk
    >>> g = geometry_report(gen_domain(disk(1.0), 0.1))
    >>> abs(g.ratio - 2.0) < 0.01
    True
    """
    vol = float(form_mass(mesh, 0).sum())
    frame = boundary_frame(mesh)
    vol_bd = float(frame.mass.sum())
    corners = bool(frame.corner.any())
    if corners and not allow_corners:
        raise CornerDomain("boundary curvature is undefined at corners")
    if corners:
        H0 = None
        sigma = {}
    else:
        H0 = float(np.nanmin(frame.curvature))
        sigma = {1: H0}
    return GeometryReport(
        vol_M=vol,
        vol_bd=vol_bd,
        ratio=vol_bd / vol,
        inner_radius=inner_radius(mesh),
        H0=H0,
        sigma=sigma,
        K=mesh.metric.curvature,
        corners=corners,
    )


def s_K(K, r):
    """Space-form comparison function (sine-like solution of ``s'' + K s = 0``)."""
    r = np.asarray(r, dtype=float)
    if K > 0:
        k = math.sqrt(K)
        return np.sin(k * r) / k
    if K < 0:
        k = math.sqrt(-K)
        return np.sinh(k * r) / k
    return r.copy() if r.ndim else float(r)


def ds_K(K, r):
    r = np.asarray(r, dtype=float)
    if K > 0:
        return np.cos(math.sqrt(K) * r)
    if K < 0:
        return np.cosh(math.sqrt(-K) * r)
    return np.ones_like(r) if r.ndim else 1.0


def theta(K, H0, r, n=2):
    """``(s_K'(r) - H0 s_K(r))**(n-1)``."""
    return (ds_K(K, r) - H0 * s_K(K, r)) ** (n - 1)


def _first_zero(K, H0, R):
    base = lambda r: float(ds_K(K, r) - H0 * s_K(K, r))  # noqa: E731
    grid = np.linspace(0.0, R, 2049)
    vals = np.array([base(r) for r in grid])
    neg = np.flatnonzero(vals <= 0)
    if len(neg) == 0:
        return R
    j = neg[0]
    if j == 0:
        return 0.0
    if vals[j] == 0:
        return float(grid[j])
    return optimize.brentq(base, grid[j - 1], grid[j], xtol=1e-15, rtol=1e-15)


def theta_integral(K, H0, R, n=2):
    """Integral of ``Theta`` over ``[0, R]``, stopped at the first zero of Theta.

    Examples
    --------
    >>> round(theta_integral(0.0, 1.0, 1.0), 12)
    0.5
    """
    if R < 0:
        raise InvalidParameter("R must be non-negative")
    upper = _first_zero(K, H0, R)
    if upper == 0.0:
        return 0.0
    val, _ = integrate.quad(lambda r: theta(K, H0, r, n), 0.0, upper, epsabs=0, epsrel=1e-12, limit=200)
    return float(val)


def bs_constant(p, n):
    """Constants ``a(p, n)`` and ``C(p, n)`` of the sphere inequality, as exact fractions.

    Examples
    --------
    >>> bs_constant(1, 2)
    (2, Fraction(6, 1))
    """
    if not (isinstance(p, (int, np.integer)) and isinstance(n, (int, np.integer))) or not 1 <= p <= n - 1:
        raise DegreeOutOfRange(f"need 1 <= p <= n-1, got p={p}, n={n}")
    a = max(p + 1, n - p + 1)
    r = Fraction(a - 1, p * (n - p) * a)
    C = 4 * r + 2 * n + 2 * n * (2 * p - n) ** 2 * r**2
    return a, C
