"""Triangle meshes of planar domains and of spherical caps in a stereographic chart.

Supported domains are disks, annuli, axis-aligned ellipses, squares and
geodesic caps of the unit sphere. Caps are meshed in the chart obtained by
stereographic projection from the antipode of the cap centre, where the round
metric reads ``mu**2 (dx**2 + dy**2)`` with ``mu = 2 / (1 + x**2 + y**2)``.

Meshes are immutable: all arrays are flagged read-only after construction.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import Delaunay

from .errors import DegenerateBoundary, InvalidParameter

__all__ = [
    "DomainTag",
    "MetricDescriptor",
    "SimplicialMesh",
    "BoundaryFrame",
    "disk",
    "annulus",
    "ellipse",
    "square",
    "cap",
    "gen_domain",
    "refine",
    "boundary_frame",
    "write_fmesh",
    "read_fmesh",
    "parse_domain",
]


# --------------------------------------------------------------------------
# domain and metric descriptors
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DomainTag:
    kind: str
    params: tuple

    def __str__(self):
        return f"{self.kind}({','.join(f'{p:g}' for p in self.params)})"

    @property
    def simply_connected(self):
        return self.kind != "annulus"

    @property
    def smooth(self):
        return self.kind != "square"


def disk(R=1.0):
    return DomainTag("disk", (float(R),))


def annulus(r_in=0.5, r_out=1.0):
    return DomainTag("annulus", (float(r_in), float(r_out)))


def ellipse(a=1.0, b=0.6):
    return DomainTag("ellipse", (float(a), float(b)))


def square(side=1.0):
    return DomainTag("square", (float(side),))


def cap(alpha=math.pi / 2):
    return DomainTag("cap", (float(alpha),))


_ARITY = {"disk": 1, "annulus": 2, "ellipse": 2, "square": 1, "cap": 1}


def parse_domain(kind, param=None):
    """Build a DomainTag from a kind name and a comma separated parameter string."""
    if kind not in _ARITY:
        raise InvalidParameter(f"unknown domain kind {kind!r}")
    if param is None or param == "":
        defaults = {"disk": disk(), "annulus": annulus(), "ellipse": ellipse(),
                    "square": square(), "cap": cap()}
        return defaults[kind]
    if isinstance(param, str):
        values = tuple(float(v) for v in param.split(","))
    else:
        values = tuple(float(v) for v in np.atleast_1d(param))
    if len(values) != _ARITY[kind]:
        raise InvalidParameter(f"{kind} takes {_ARITY[kind]} parameter(s), got {len(values)}")
    return DomainTag(kind, values)


@dataclass(frozen=True)
class MetricDescriptor:
    """Flat metric, or the round unit-sphere metric on a stereographic cap chart."""

    kind: str = "flat"
    alpha: float | None = None

    @property
    def is_flat(self):
        return self.kind == "flat"

    @property
    def curvature(self):
        """Constant sectional curvature of the ambient space form."""
        return 0.0 if self.is_flat else 1.0

    def mu(self, x, y):
        if self.is_flat:
            return np.ones_like(np.asarray(x, dtype=float) + np.asarray(y, dtype=float))
        return 2.0 / (1.0 + np.asarray(x) ** 2 + np.asarray(y) ** 2)

    def grad_log_mu(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.is_flat:
            return np.zeros(x.shape + (2,))
        s = 1.0 + x**2 + y**2
        return np.stack([-2 * x / s, -2 * y / s], axis=-1)

    def distance(self, p, q):
        """Metric distance between chart points (Euclidean or great-circle)."""
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        if self.is_flat:
            return np.linalg.norm(p - q, axis=-1)
        P = _to_sphere(p)
        Q = _to_sphere(q)
        c = np.clip(np.sum(P * Q, axis=-1), -1.0, 1.0)
        # arccos is ill-conditioned near 0; use the chord instead
        chord = np.linalg.norm(P - Q, axis=-1)
        return 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0)) * (c > -2)


def _to_sphere(p):
    x, y = p[..., 0], p[..., 1]
    s = 1.0 + x**2 + y**2
    return np.stack([2 * x / s, 2 * y / s, (2.0 - s) / s], axis=-1)


# --------------------------------------------------------------------------
# mesh container
# --------------------------------------------------------------------------


def _frozen(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SimplicialMesh:
    """Oriented triangle mesh with ordered boundary loops.

    ``boundary_edges`` lists every boundary edge once, oriented with the
    domain on its left, grouped loop by loop (outer loop first) and in
    traversal order inside each loop. ``loop_starts`` marks where each loop
    begins in that array.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    loop_starts: tuple
    metric: MetricDescriptor
    h_target: float
    domain: DomainTag | None

    def __post_init__(self):
        object.__setattr__(self, "vertices", _frozen(self.vertices, float))
        object.__setattr__(self, "triangles", _frozen(self.triangles, np.int64))
        object.__setattr__(self, "boundary_edges", _frozen(self.boundary_edges, np.int64))
        object.__setattr__(self, "loop_starts", tuple(int(s) for s in self.loop_starts))

    # basic counts -------------------------------------------------------
    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @cached_property
    def edges(self):
        """Unique undirected edges, sorted lexicographically."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return _frozen(np.unique(e, axis=0), np.int64)

    @property
    def euler_characteristic(self):
        return self.n_vertices - len(self.edges) + self.n_triangles

    @cached_property
    def boundary_vertices(self):
        """Boundary vertex indices in loop traversal order."""
        return _frozen(self.boundary_edges[:, 0], np.int64)

    @cached_property
    def is_boundary(self):
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.boundary_vertices] = True
        mask.setflags(write=False)
        return mask

    @cached_property
    def interior_vertices(self):
        return _frozen(np.flatnonzero(~self.is_boundary), np.int64)

    @property
    def loops(self):
        """List of boundary-edge arrays, one per loop."""
        bounds = list(self.loop_starts) + [len(self.boundary_edges)]
        return [self.boundary_edges[a:b] for a, b in zip(bounds[:-1], bounds[1:])]

    @cached_property
    def signed_areas(self):
        v = self.vertices[self.triangles]
        d1 = v[:, 1] - v[:, 0]
        d2 = v[:, 2] - v[:, 0]
        return _frozen(0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]), float)

    def edge_lengths(self):
        e = self.edges
        return self.metric.distance(self.vertices[e[:, 0]], self.vertices[e[:, 1]])

    @property
    def max_edge(self):
        return float(self.edge_lengths().max())

    def with_domain(self, domain):
        return dataclasses.replace(self, domain=domain)

    def validate(self):
        """Check the structural invariants; raise InvalidParameter on violation."""
        if np.any(self.signed_areas <= 0):
            raise InvalidParameter("mesh has non-positive triangle areas")
        t = self.triangles
        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        und = np.sort(directed, axis=1)
        _, counts = np.unique(und, axis=0, return_counts=True)
        if counts.max() > 2:
            raise InvalidParameter("edge shared by more than two triangles")
        n_bd = int(np.sum(counts == 1))
        if n_bd != len(self.boundary_edges):
            raise InvalidParameter("boundary edge list inconsistent with triangles")
        for loop in self.loops:
            if not np.array_equal(loop[1:, 0], loop[:-1, 1]) or loop[-1, 1] != loop[0, 0]:
                raise InvalidParameter("boundary loop is not closed")
        expected = 1 if len(self.loops) == 1 else 0
        if len(self.loops) <= 2 and self.euler_characteristic != expected:
            raise InvalidParameter("Euler characteristic does not match the loop count")
        return True


# --------------------------------------------------------------------------
# construction helpers
# --------------------------------------------------------------------------


def _orient(points, tris):
    v = points[tris]
    d1 = v[:, 1] - v[:, 0]
    d2 = v[:, 2] - v[:, 0]
    area = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    tris = tris.copy()
    flip = area < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return tris


def _boundary_loops(tris, points):
    """Extract oriented boundary loops (domain on the left), outer loop first."""
    directed = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    und = np.sort(directed, axis=1)
    _, inv, counts = np.unique(und, axis=0, return_inverse=True, return_counts=True)
    bd = directed[counts[inv] == 1]
    nxt = {int(a): int(b) for a, b in bd}
    if len(nxt) != len(bd):
        raise DegenerateBoundary("boundary is not a disjoint union of simple loops")
    loops = []
    remaining = set(nxt)
    while remaining:
        start = min(remaining)
        loop = []
        v = start
        while True:
            remaining.discard(v)
            w = nxt[v]
            loop.append((v, w))
            v = w
            if v == start:
                break
            if v not in remaining:
                raise DegenerateBoundary("open boundary chain")
        loops.append(np.array(loop, dtype=np.int64))

    def enclosed(loop):
        p = points[loop[:, 0]]
        q = points[loop[:, 1]]
        return 0.5 * np.sum(p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0])

    # outer loop is counter-clockwise with the largest enclosed area
    loops.sort(key=lambda lp: -enclosed(lp))
    starts = np.cumsum([0] + [len(lp) for lp in loops[:-1]])
    return np.concatenate(loops), tuple(starts)


def _assemble(points, tris, metric, h, domain):
    tris = _orient(points, np.asarray(tris, dtype=np.int64))
    # drop unused points (keeps vertex numbering compact)
    used = np.unique(tris)
    if len(used) != len(points):
        remap = -np.ones(len(points), dtype=np.int64)
        remap[used] = np.arange(len(used))
        points = points[used]
        tris = remap[tris]
    bedges, starts = _boundary_loops(tris, points)
    mesh = SimplicialMesh(points, tris, bedges, starts, metric, float(h), domain)
    mesh.validate()
    return mesh


def _ring_points(radii, counts, scale=(1.0, 1.0)):
    pts = [np.zeros((1, 2))] if radii[0] == 0 else []
    for r, n in zip(radii, counts):
        if r == 0:
            continue
        phi = 2 * np.pi * np.arange(n) / n
        pts.append(np.column_stack([scale[0] * r * np.cos(phi), scale[1] * r * np.sin(phi)]))
    return np.concatenate(pts)


def _disk_like(m, radius_of_ring, count_of_ring, scale=(1.0, 1.0)):
    radii = [radius_of_ring(k) for k in range(m + 1)]
    counts = [count_of_ring(k) for k in range(m + 1)]
    pts = _ring_points(radii, counts, scale)
    tri = Delaunay(pts).simplices
    return pts, tri


def _build(tag, m):
    kind, prm = tag.kind, tag.params
    if kind == "disk":
        (R,) = prm
        pts, tri = _disk_like(m, lambda k: R * k / m, lambda k: 6 * k)
        return pts, tri, MetricDescriptor()
    if kind == "ellipse":
        a, b = prm
        pts, tri = _disk_like(m, lambda k: k / m, lambda k: 6 * k, scale=(a, b))
        return pts, tri, MetricDescriptor()
    if kind == "cap":
        (alpha,) = prm

        def count(k):
            if k == 0:
                return 1
            theta = alpha * k / m
            return max(6, int(round(6 * k * math.sin(theta) / theta)))

        pts, tri = _disk_like(m, lambda k: math.tan(alpha * k / (2 * m)), count)
        return pts, tri, MetricDescriptor("cap", float(alpha))
    if kind == "annulus":
        r_in, r_out = prm
        dr = (r_out - r_in) / m
        radii = [r_in + k * dr for k in range(m + 1)]
        counts = [max(6, int(math.ceil(2 * np.pi * r / (1.05 * dr)))) for r in radii]
        pts = _ring_points(radii, counts)
        tri = Delaunay(pts).simplices
        cen = pts[tri].mean(axis=1)
        keep = np.hypot(cen[:, 0], cen[:, 1]) > r_in
        return pts, tri[keep], MetricDescriptor()
    if kind == "square":
        (s,) = prm
        n = m
        g = np.linspace(-s / 2, s / 2, n + 1)
        X, Y = np.meshgrid(g, g, indexing="ij")
        pts = np.column_stack([X.ravel(), Y.ravel()])
        idx = np.arange((n + 1) ** 2).reshape(n + 1, n + 1)
        tris = []
        for i in range(n):
            for j in range(n):
                a, b, c, d = idx[i, j], idx[i + 1, j], idx[i + 1, j + 1], idx[i, j + 1]
                # diagonals radiate from the centre so every corner touches one
                if (i < n / 2) == (j < n / 2):
                    tris += [(a, b, c), (a, c, d)]
                else:
                    tris += [(a, b, d), (b, c, d)]
        return pts, np.array(tris), MetricDescriptor()
    raise InvalidParameter(f"unknown domain kind {kind!r}")


def _check_tag(tag):
    kind, prm = tag.kind, tag.params
    if any(not np.isfinite(p) or p <= 0 for p in prm):
        raise InvalidParameter(f"geometric parameters must be positive: {tag}")
    if kind == "annulus" and not prm[0] < prm[1]:
        raise InvalidParameter("annulus requires r_in < r_out")
    if kind == "cap" and not prm[0] < math.pi:
        raise InvalidParameter("cap requires 0 < alpha < pi")


def _initial_rings(tag, h):
    kind, prm = tag.kind, tag.params
    if kind == "disk":
        return max(1, math.ceil(prm[0] / h))
    if kind == "ellipse":
        return max(1, math.ceil(max(prm) / h))
    if kind == "cap":
        return max(1, math.ceil(prm[0] / h))
    if kind == "annulus":
        return max(1, math.ceil((prm[1] - prm[0]) / h))
    if kind == "square":
        n = max(2, math.ceil(math.sqrt(2) * prm[0] / h))
        return n + (n % 2)
    raise InvalidParameter(f"unknown domain kind {kind!r}")


def gen_domain(tag: DomainTag, h: float) -> SimplicialMesh:
    """Generate a mesh of ``tag`` whose longest (metric) edge is at most ``h``.

    Examples
    --------
    >>> m = gen_domain(disk(1.0), 0.5)
    >>> m.euler_characteristic, len(m.loops)
    (1, 1)
    """
    if not (np.isfinite(h) and h > 0):
        raise InvalidParameter(f"mesh size must be positive, got {h!r}")
    _check_tag(tag)
    scale = max(tag.params) if tag.kind != "cap" else tag.params[0]
    if h > 2 * scale:
        raise InvalidParameter(f"h={h} too coarse for {tag}")
    m = _initial_rings(tag, h)
    for _ in range(200):
        pts, tri, metric = _build(tag, m)
        mesh = _assemble(pts, tri, metric, h, tag)
        if mesh.max_edge <= h * (1 + 1e-12) and min(len(lp) for lp in mesh.loops) >= 3:
            return mesh
        m += 2 if tag.kind == "square" else 1
    raise InvalidParameter(f"could not reach h={h} for {tag}")  # pragma: no cover


# --------------------------------------------------------------------------
# refinement
# --------------------------------------------------------------------------


def _project_to_boundary(tag, p):
    if tag is None:
        return p
    kind, prm = tag.kind, tag.params
    r = np.hypot(p[:, 0], p[:, 1])
    if kind == "disk":
        return p * (prm[0] / r)[:, None]
    if kind == "cap":
        return p * (math.tan(prm[0] / 2) / r)[:, None]
    if kind == "annulus":
        target = np.where(np.abs(r - prm[0]) < np.abs(r - prm[1]), prm[0], prm[1])
        return p * (target / r)[:, None]
    if kind == "ellipse":
        a, b = prm
        s = np.sqrt((p[:, 0] / a) ** 2 + (p[:, 1] / b) ** 2)
        return p / s[:, None]
    return p


def refine(mesh: SimplicialMesh) -> SimplicialMesh:
    """Split every triangle into four through edge midpoints.

    Boundary midpoints are projected back onto the analytic boundary curve
    when the mesh carries a domain tag.
    """
    edges = mesh.edges
    nv = mesh.n_vertices
    key = edges[:, 0] * nv + edges[:, 1]
    mids = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])

    be = np.sort(mesh.boundary_edges, axis=1)
    bkey = be[:, 0] * nv + be[:, 1]
    bpos = np.searchsorted(key, bkey)
    mids[bpos] = _project_to_boundary(mesh.domain, mids[bpos])

    def mid_index(a, b):
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        return nv + np.searchsorted(key, lo * nv + hi)

    t = mesh.triangles
    a, b, c = t[:, 0], t[:, 1], t[:, 2]
    ab, bc, ca = mid_index(a, b), mid_index(b, c), mid_index(c, a)
    new_t = np.concatenate([
        np.column_stack([a, ab, ca]),
        np.column_stack([ab, b, bc]),
        np.column_stack([ca, bc, c]),
        np.column_stack([ab, bc, ca]),
    ])
    # keep children of one parent adjacent for locality
    new_t = new_t.reshape(4, -1, 3).transpose(1, 0, 2).reshape(-1, 3)
    pts = np.concatenate([mesh.vertices, mids])

    ob = mesh.boundary_edges
    m = mid_index(ob[:, 0], ob[:, 1])
    new_b = np.stack([np.column_stack([ob[:, 0], m]), np.column_stack([m, ob[:, 1]])], axis=1)
    new_b = new_b.reshape(-1, 2)
    starts = tuple(2 * s for s in mesh.loop_starts)
    out = SimplicialMesh(pts, new_t, new_b, starts, mesh.metric, mesh.h_target / 2, mesh.domain)
    out.validate()
    return out


# --------------------------------------------------------------------------
# boundary frame
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BoundaryFrame:
    """Per boundary vertex (in ``mesh.boundary_vertices`` order) frame data.

    ``curvature`` is NaN at corners, where it is undefined.
    """

    vertices: np.ndarray
    normal: np.ndarray
    tangent: np.ndarray
    mass: np.ndarray
    curvature: np.ndarray
    corner: np.ndarray
    mu: np.ndarray


def _rot90(d):
    return np.column_stack([-d[:, 1], d[:, 0]])


def boundary_frame(mesh: SimplicialMesh) -> BoundaryFrame:
    """Inward normals, tangents, lumped boundary measure and curvature."""
    P = mesh.vertices
    verts = mesh.boundary_vertices
    normals = np.empty((len(verts), 2))
    prev_vec = np.empty((len(verts), 2))
    next_vec = np.empty((len(verts), 2))
    pos = 0
    for loop in mesh.loops:
        n = len(loop)
        d = P[loop[:, 1]] - P[loop[:, 0]]
        prev_vec[pos:pos + n] = np.roll(d, 1, axis=0)
        next_vec[pos:pos + n] = d
        pos += n
    lp = np.linalg.norm(prev_vec, axis=1)
    ln = np.linalg.norm(next_vec, axis=1)
    if np.any(lp <= 1e-14 * max(1.0, lp.max())) or np.any(ln <= 1e-14 * max(1.0, ln.max())):
        raise DegenerateBoundary("duplicate boundary points")
    n_prev = _rot90(prev_vec / lp[:, None])
    n_next = _rot90(next_vec / ln[:, None])
    s = n_prev + n_next
    sn = np.linalg.norm(s, axis=1)
    if np.any(sn < 1e-12):
        raise DegenerateBoundary("boundary folds back on itself")
    normals = s / sn[:, None]
    tangent = np.column_stack([normals[:, 1], -normals[:, 0]])

    cross = prev_vec[:, 0] * next_vec[:, 1] - prev_vec[:, 1] * next_vec[:, 0]
    dot = np.sum(prev_vec * next_vec, axis=1)
    turning = np.arctan2(cross, dot)
    kappa = turning / (0.5 * (lp + ln))

    x, y = P[verts, 0], P[verts, 1]
    mu = mesh.metric.mu(x, y)
    if not mesh.metric.is_flat:
        # geodesic curvature under g = mu^2 g0:  k_g = (k0 - d_nu log mu) / mu
        dlog = np.sum(mesh.metric.grad_log_mu(x, y) * normals, axis=1)
        kappa = (kappa - dlog) / mu

    if mesh.domain is not None and mesh.domain.kind == "square":
        half = mesh.domain.params[0] / 2
        corner = (np.abs(np.abs(x) - half) < 1e-12 * half) & (np.abs(np.abs(y) - half) < 1e-12 * half)
    else:
        corner = np.abs(turning) > np.pi / 3
    kappa = np.where(corner, np.nan, kappa)

    from .assembly import boundary_lumped_mass  # local import: assembly depends on mesh

    mass = boundary_lumped_mass(mesh, weight_power=1)
    for a in (normals, tangent, mass, kappa, corner, mu):
        a.setflags(write=False)
    return BoundaryFrame(verts, normals, tangent, mass, kappa, corner, mu)


# --------------------------------------------------------------------------
# FMESH v1 text format
# --------------------------------------------------------------------------


def write_fmesh(mesh: SimplicialMesh, path_or_file):
    """Write ``mesh`` in FMESH v1; output is byte-identical for identical meshes."""
    lines = []
    head = f"fmesh 1 {mesh.n_vertices} {mesh.n_triangles} {len(mesh.boundary_edges)} {mesh.metric.kind}"
    if not mesh.metric.is_flat:
        head += f" {mesh.metric.alpha:.17g}"
    lines.append(head)
    lines += [f"{x:.17g} {y:.17g}" for x, y in mesh.vertices]
    lines += [f"{i} {j} {k}" for i, j, k in mesh.triangles]
    lines += [f"{i} {j}" for i, j in mesh.boundary_edges]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    return text


def _infer_domain(pts, bedges, starts, metric):
    if not metric.is_flat:
        return cap(metric.alpha)
    bounds = list(starts) + [len(bedges)]
    loops = [bedges[a:b] for a, b in zip(bounds[:-1], bounds[1:])]
    rel = 1e-9
    radii = [np.hypot(*pts[lp[:, 0]].T) for lp in loops]
    if len(loops) == 1:
        r = radii[0]
        if np.ptp(r) <= rel * r.max():
            return disk(float(np.round(r.mean(), 12)))
        b = pts[loops[0][:, 0]]
        m = np.abs(b).max(axis=0)
        if np.allclose(m[0], m[1]) and np.all(
            (np.abs(np.abs(b[:, 0]) - m[0]) < rel) | (np.abs(np.abs(b[:, 1]) - m[1]) < rel)
        ):
            return square(float(np.round(2 * m[0], 12)))
        a_, b_ = float(np.round(m[0], 12)), float(np.round(m[1], 12))
        if np.allclose((b[:, 0] / a_) ** 2 + (b[:, 1] / b_) ** 2, 1.0, atol=1e-9):
            return ellipse(a_, b_)
        return None
    if len(loops) == 2 and all(np.ptp(r) <= rel * r.max() for r in radii):
        r_out, r_in = radii[0].mean(), radii[1].mean()
        return annulus(float(np.round(r_in, 12)), float(np.round(r_out, 12)))
    return None


def read_fmesh(path_or_file) -> SimplicialMesh:
    if hasattr(path_or_file, "read"):
        text = path_or_file.read()
    else:
        with open(path_or_file, encoding="ascii") as fh:
            text = fh.read()
    lines = text.strip().splitlines()
    head = lines[0].split()
    if len(head) < 6 or head[0] != "fmesh" or head[1] != "1":
        raise InvalidParameter("not an FMESH v1 file")
    nv, nt, nbe = int(head[2]), int(head[3]), int(head[4])
    kind = head[5]
    metric = MetricDescriptor("cap", float(head[6])) if kind == "cap" else MetricDescriptor()
    body = lines[1:]
    if len(body) < nv + nt + nbe:
        raise InvalidParameter("truncated FMESH file")
    pts = np.array([[float(v) for v in ln.split()] for ln in body[:nv]]).reshape(nv, 2)
    tri = np.array([[int(v) for v in ln.split()] for ln in body[nv:nv + nt]]).reshape(nt, 3)
    be = np.array([[int(v) for v in ln.split()] for ln in body[nv + nt:nv + nt + nbe]]).reshape(nbe, 2)
    starts = [0] + [i for i in range(1, nbe) if be[i, 0] != be[i - 1, 1]]
    domain = _infer_domain(pts, be, starts, metric)
    m = SimplicialMesh(pts, tri, be, tuple(starts), metric, 0.0, domain)
    m = dataclasses.replace(m, h_target=m.max_edge)
    m.validate()
    return m
