"""Sparse symmetric eigensolvers for assembled pencils, with dense references.

ARPACK (through :func:`scipy.sparse.linalg.eigsh`) does the Lanczos work in
shift-invert or regular-inverse mode; LAPACK (:func:`scipy.linalg.eigh`)
provides the dense cross-check. Start vectors come from a seeded generator so
that identical inputs give identical spectra.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla_dense
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .assembly import OperatorPencil
from .errors import FactorizationFailure, InvalidParameter, NoConvergence

__all__ = [
    "Spectrum",
    "ExtrapolatedValue",
    "default_seed",
    "solve",
    "solve_smallest",
    "solve_kmode",
    "solve_harmonic",
    "dense_reference",
    "residuals",
    "cluster",
    "dedup",
    "richardson",
]

DEFAULT_TOL = 1e-9


def default_seed():
    """Seed from ``SPECLAB_SEED`` or 42."""
    return int(os.environ.get("SPECLAB_SEED", "42"))


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.eigenvalues)

    def __getitem__(self, i):
        return self.eigenvalues[i]


@dataclass(frozen=True)
class ExtrapolatedValue:
    value: float
    error_estimate: float
    observed_order: float
    inputs: tuple
    monotone: bool = True
    infinite_order: bool = False


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _start_vector(n, seed):
    return np.random.default_rng(seed).standard_normal(n)


def _norm1(A):
    if A is None:
        return 0.0
    if sp.issparse(A):
        return float(sla.norm(A, 1))
    return float(np.linalg.norm(A, 1))


def residuals(A, B, values, vectors):
    """Backward errors ``|A v - lam B v| / ((|A|_1 + |lam| |B|_1) |v|)``."""
    na, nb = _norm1(A), _norm1(B)
    out = np.empty(len(values))
    for j, lam in enumerate(values):
        v = vectors[:, j]
        r = A @ v - lam * (B @ v)
        out[j] = np.linalg.norm(r) / max((na + abs(lam) * nb) * np.linalg.norm(v), 1e-300)
    return out


def _normalize_signs(vectors):
    vectors = np.array(vectors, dtype=float, copy=True)
    for j in range(vectors.shape[1]):
        v = vectors[:, j]
        big = np.flatnonzero(np.abs(v) > 1e-8 * np.abs(v).max())
        if len(big) and v[big[0]] < 0:
            vectors[:, j] = -v
    return vectors


def _finish(values, vectors, res, tol, meta):
    order = np.argsort(values, kind="stable")
    values = np.asarray(values)[order]
    vectors = _normalize_signs(np.asarray(vectors)[:, order])
    res = np.asarray(res)[order]
    if np.any(res > tol):
        raise NoConvergence(f"residual {res.max():.3e} above tolerance {tol:.1e}")
    for a in (values, vectors, res):
        a.setflags(write=False)
    meta = dict(meta)
    meta["tolerance"] = tol
    return Spectrum(values, vectors, res, meta)


def _factor(M):
    try:
        lu = sla.splu(sp.csc_matrix(M))
    except RuntimeError as exc:
        raise FactorizationFailure(str(exc)) from exc
    return lu


def _check_k(k, n):
    if k < 1:
        raise InvalidParameter("k must be at least 1")
    if k > n:
        raise InvalidParameter(f"k={k} exceeds pencil size {n}")


def _meta(pencil, solver, seed, extra=None):
    spec = pencil.spec
    meta = {
        "problem": spec.problem,
        "p": spec.p,
        "tau": spec.tau,
        "h": None if pencil.mesh is None else pencil.mesh.h_target,
        "n_vertices": None if pencil.mesh is None else pencil.mesh.n_vertices,
        "size": pencil.size,
        "solver": solver,
        "seed": seed,
        "kind": pencil.kind,
    }
    if extra:
        meta.update(extra)
    return meta


# --------------------------------------------------------------------------
# solvers
# --------------------------------------------------------------------------


def _shift(A, B):
    ta = float(A.diagonal().sum())
    tb = float(B.diagonal().sum())
    return -1e-4 * ta / tb


def solve_smallest(pencil: OperatorPencil, k=6, tol=DEFAULT_TOL, seed=None) -> Spectrum:
    """Smallest eigenpairs of a ``smallest`` or ``schur`` pencil.

    Uses shift-invert Lanczos about a small negative shift so that a
    singular ``A`` (Neumann kernels, Dirichlet-to-Neumann constants) never
    breaks the factorization. For ``schur`` pencils ``B`` only lives on the
    boundary and the interior directions sit at infinity, out of reach.
    """
    if pencil.kind not in ("smallest", "schur"):
        raise InvalidParameter(f"solve_smallest needs a smallest/schur pencil, got {pencil.kind}")
    seed = default_seed() if seed is None else seed
    A, B = pencil.A, pencil.B
    n = A.shape[0]
    n_eff = len(pencil.extra["boundary_index"]) if pencil.kind == "schur" else n
    _check_k(k, n_eff)
    if n_eff - k < 2 or n <= 60:
        spec = dense_reference(pencil, k)
        return _finish(spec.eigenvalues, spec.eigenvectors, spec.residuals, tol,
                       _meta(pencil, "lapack", seed))
    sigma = _shift(A, B)
    lu = _factor(A - sigma * B)
    v0 = _start_vector(n, seed)

    def run(kk, V):
        proj, proj_t = _deflator(V, B)
        op = sla.LinearOperator(A.shape, matvec=lambda y: proj(lu.solve(proj_t(y))), dtype=float)
        return sla.eigsh(A, k=kk, M=B, sigma=sigma, OPinv=op, which="LM", v0=proj(v0), tol=0)

    vals, vecs = _complete(run, k, n_eff, B, lambda v: v)
    vals, vecs = _purify(A, B, lu, vecs)
    res = residuals(A, B, vals, vecs)
    return _finish(vals, vecs, res, tol, _meta(pencil, "arpack-shift-invert", seed, {"shift": sigma}))


def _reciprocal(mu):
    if np.any(mu <= 0):
        raise NoConvergence("non-positive Rayleigh quotient in the boundary operator")
    return 1.0 / mu


def _deflator(V, M):
    """M-orthogonal projector onto the complement of ``V`` and its transpose.

    Applying both sides keeps the deflated operator self-adjoint in the M
    inner product, which the Lanczos recurrence relies on.
    """
    if V is None:
        return (lambda y: y), (lambda y: y)
    MV = M @ V
    return (lambda y: y - V @ (MV.T @ y)), (lambda y: y - MV @ (V.T @ y))


def _m_orthonormal(V, M):
    G = V.T @ (M @ V)
    L = np.linalg.cholesky(0.5 * (G + G.T))
    return np.linalg.solve(L, V.T).T


def _complete(run, k, n_avail, M, to_values, rounds=6):
    """Lanczos pairs with missing copies of multiple eigenvalues filled in.

    A single Krylov sequence only sees one direction of each eigenspace, so
    extra copies of a repeated eigenvalue surface through rounding at best.
    Each round reruns Lanczos on the M-orthogonal complement of the pairs
    found so far and merges any value that belongs among the ``k`` smallest.
    """
    try:
        raw, vecs = run(k, None)
        vals = to_values(raw)
        for _ in range(rounds):
            room = n_avail - len(vals) - 1
            if room < 1:
                break
            V = _m_orthonormal(vecs, M)
            raw, new_vecs = run(min(k, room), V)
            new = to_values(raw)
            top = vals.max()
            take = new <= top + 1e-8 * abs(top)
            if not take.any():
                break
            vals = np.concatenate([vals, new[take]])
            vecs = np.column_stack([vecs, new_vecs[:, take]])
            order = np.argsort(vals, kind="stable")[:k]
            if np.all(order < len(vals) - take.sum()):
                vals, vecs = vals[order], vecs[:, order]
                break
            vals, vecs = vals[order], vecs[:, order]
    except sla.ArpackNoConvergence as exc:
        raise NoConvergence(str(exc)) from exc
    except RuntimeError as exc:
        raise NoConvergence(str(exc)) from exc
    return vals, vecs


def _purify(A, B, lu, vecs):
    """One inverse-iteration sweep and a Rayleigh-Ritz step on the Ritz vectors.

    With a singular ``B`` the Lanczos vectors can carry components in its null
    space; applying ``(A - sigma B)^-1 B`` removes them and the small projected
    problem restores accurate pairs inside clusters.
    """
    W = np.column_stack([lu.solve(B @ vecs[:, j]) for j in range(vecs.shape[1])])
    W, _ = np.linalg.qr(W)
    Ar = W.T @ (A @ W)
    Br = W.T @ (B @ W)
    vals, Y = sla_dense.eigh(0.5 * (Ar + Ar.T), 0.5 * (Br + Br.T))
    return vals, W @ Y


def solve_kmode(pencil: OperatorPencil, k=6, tol=DEFAULT_TOL, seed=None) -> Spectrum:
    """Largest eigenvalues ``mu`` of ``A^-1 B``, reported as ``q = 1/mu`` ascending.

    Lanczos runs in the ``A`` inner product with ``A^-1`` applied as
    ``K^-1 M K^-1`` from a single sparse factorization of ``K``.
    """
    if pencil.kind != "kmode":
        raise InvalidParameter(f"solve_kmode needs a kmode pencil, got {pencil.kind}")
    seed = default_seed() if seed is None else seed
    A, B = pencil.A, pencil.B
    n = A.shape[0]
    n_eff = len(pencil.extra["boundary_mass"])
    _check_k(k, min(n, n_eff))
    if n <= 60 or min(n, n_eff) - k < 2:
        spec = dense_reference(pencil, k)
        return _finish(spec.eigenvalues, spec.eigenvectors, spec.residuals, tol,
                       _meta(pencil, "lapack", seed))
    lu = _factor(pencil.extra["K_II"])
    mt = pencil.extra["mass_tilde"]
    v0 = _start_vector(n, seed)

    def run(kk, V):
        proj, _ = _deflator(V, A)
        ainv = sla.LinearOperator(A.shape, matvec=lambda x: proj(lu.solve(mt * lu.solve(x))), dtype=float)
        bop = sla.LinearOperator(A.shape, matvec=lambda x: B @ proj(x), dtype=float)
        return sla.eigsh(bop, k=kk, M=A, Minv=ainv, which="LA", v0=proj(v0), tol=0)

    q, vecs = _complete(run, k, min(n, n_eff), A, _reciprocal)
    res = residuals(A, B, q, vecs)
    return _finish(q, vecs, res, tol, _meta(pencil, "arpack-inverse-kmode", seed))


def _harmonic_operator(pencil):
    ex = pencil.extra
    lu = _factor(ex["K_II"])
    K_Ib, M_II, M_Ib, M_bb = ex["K_Ib"], ex["M_II"], ex["M_Ib"], ex["M_bb"]

    def matvec(x):
        xi = -lu.solve(K_Ib @ x)
        return M_bb @ x + M_Ib.T @ xi + K_Ib.T @ lu.solve(-(M_II @ xi + M_Ib @ x))

    n = pencil.A.shape[0]
    return sla.LinearOperator((n, n), matvec=matvec, dtype=float), lu


def _harmonic_dense(pencil):
    ex = pencil.extra
    Kii = ex["K_II"].toarray()
    E = -np.linalg.solve(Kii, ex["K_Ib"].toarray())
    Mb = ex["M_bb"].toarray() + ex["M_Ib"].T.toarray() @ E + E.T @ ex["M_Ib"].toarray()
    Mb = Mb + E.T @ ex["M_II"].toarray() @ E
    return 0.5 * (Mb + Mb.T)


def solve_harmonic(pencil: OperatorPencil, k=1, tol=DEFAULT_TOL, seed=None) -> Spectrum:
    """Smallest boundary/volume quotients over discrete harmonic fields."""
    if pencil.kind != "harmonic":
        raise InvalidParameter(f"solve_harmonic needs a harmonic pencil, got {pencil.kind}")
    seed = default_seed() if seed is None else seed
    A = pencil.A
    n = A.shape[0]
    _check_k(k, n)
    if n <= 60 or n - k < 2:
        spec = dense_reference(pencil, k)
        return _finish(spec.eigenvalues, spec.eigenvectors, spec.residuals, tol,
                       _meta(pencil, "lapack", seed))
    Bop, _ = _harmonic_operator(pencil)
    alu = _factor(A)
    v0 = _start_vector(n, seed)

    def run(kk, V):
        proj, _ = _deflator(V, A)
        ainv = sla.LinearOperator(A.shape, matvec=lambda x: proj(alu.solve(x)), dtype=float)
        bop = sla.LinearOperator(A.shape, matvec=lambda x: Bop @ proj(x), dtype=float)
        return sla.eigsh(bop, k=kk, M=A, Minv=ainv, which="LA", v0=proj(v0), tol=0)

    lam, vecs = _complete(run, k, n, A, _reciprocal)
    Bv = np.column_stack([Bop @ vecs[:, j] for j in range(vecs.shape[1])])
    na = _norm1(A)
    res = np.array([
        np.linalg.norm(A @ vecs[:, j] - lam[j] * Bv[:, j])
        / ((na + lam[j] * np.linalg.norm(Bv[:, j]) / np.linalg.norm(vecs[:, j])) * np.linalg.norm(vecs[:, j]))
        for j in range(len(lam))
    ])
    return _finish(lam, vecs, res, tol, _meta(pencil, "arpack-harmonic", seed))


def solve(pencil: OperatorPencil, k=6, tol=DEFAULT_TOL, seed=None) -> Spectrum:
    """Dispatch on the pencil kind."""
    if pencil.kind == "kmode":
        return solve_kmode(pencil, k, tol, seed)
    if pencil.kind == "harmonic":
        return solve_harmonic(pencil, k, tol, seed)
    return solve_smallest(pencil, k, tol, seed)


def dense_reference(pencil: OperatorPencil, k=None) -> Spectrum:
    """Dense LAPACK solution of the same problem, for cross-checks on small pencils."""
    kind = pencil.kind
    if kind == "harmonic":
        A = pencil.A.toarray()
        B = _harmonic_dense(pencil)
        vals, vecs = sla_dense.eigh(B, A)
        vals, vecs = 1.0 / vals[::-1], vecs[:, ::-1]
        res = residuals(A, B, vals, vecs)
    elif kind == "kmode":
        A = pencil.A.toarray()
        B = pencil.B.toarray()
        mu, vecs = sla_dense.eigh(B, A)
        keep = mu > 1e-12 * mu.max()
        mu, vecs = mu[keep][::-1], vecs[:, keep][:, ::-1]
        vals = 1.0 / mu
        res = residuals(A, B, vals, vecs)
    elif kind == "schur":
        A = pencil.A.toarray()
        B = pencil.B.toarray()
        b = pencil.extra["boundary_index"]
        i = pencil.extra["interior_index"]
        Kbi = A[np.ix_(b, i)]
        S = A[np.ix_(b, b)] - Kbi @ np.linalg.solve(A[np.ix_(i, i)], Kbi.T)
        S = 0.5 * (S + S.T)
        vals, vb = sla_dense.eigh(S, B[np.ix_(b, b)])
        vecs = np.zeros((A.shape[0], len(vals)))
        vecs[b] = vb
        vecs[i] = -np.linalg.solve(A[np.ix_(i, i)], Kbi.T @ vb)
        res = residuals(A, B, vals, vecs)
    else:
        A = pencil.A.toarray()
        B = pencil.B.toarray()
        vals, vecs = sla_dense.eigh(A, B)
        res = residuals(A, B, vals, vecs)
    if k is not None:
        vals, vecs, res = vals[:k], vecs[:, :k], res[:k]
    vals = np.array(vals)
    return Spectrum(vals, _normalize_signs(vecs), np.asarray(res),
                    {"solver": "lapack", "kind": kind, "size": pencil.size})


# --------------------------------------------------------------------------
# post-processing
# --------------------------------------------------------------------------


def cluster(values, rel_gap=1e-6):
    """Group sorted values into multiplets ``[(mean, multiplicity), ...]``."""
    values = np.sort(np.asarray(values, dtype=float))
    out = []
    group = [values[0]] if len(values) else []
    for v in values[1:]:
        scale = max(abs(v), abs(group[-1]), 1e-300)
        if abs(v - group[-1]) <= rel_gap * scale:
            group.append(v)
        else:
            out.append((float(np.mean(group)), len(group)))
            group = [v]
    if group:
        out.append((float(np.mean(group)), len(group)))
    return out


def dedup(values, rel_gap=1e-6):
    """Distinct values of a spectrum, multiplicities ignored."""
    return np.array([v for v, _ in cluster(values, rel_gap)])


def richardson(v_h, v_h2, v_h4) -> ExtrapolatedValue:
    """Extrapolate three values from uniform refinements h, h/2, h/4.

    Examples
    --------
    >>> e = richardson(1.25, 1.0625, 1.015625)
    >>> round(e.value, 12), round(e.observed_order, 12)
    (1.0, 2.0)
    """
    v0, v1, v2 = float(v_h), float(v_h2), float(v_h4)
    d1, d2 = v0 - v1, v1 - v2
    inputs = (v0, v1, v2)
    scale = max(abs(v2), 1e-300)
    if abs(d1) <= 1e-14 * scale and abs(d2) <= 1e-14 * scale:
        return ExtrapolatedValue(v2, 0.0, math.inf, inputs, True, True)
    if abs(d2) <= 1e-14 * scale or d1 * d2 <= 0 or abs(d2) >= abs(d1):
        # no contraction or oscillation: keep the finest value with a wide error
        err = max(abs(d1), abs(d2))
        return ExtrapolatedValue(v2, err, float("nan"), inputs, False, False)
    order = math.log2(abs(d1) / abs(d2))
    value = v2 - d2 / (2.0**order - 1.0)
    return ExtrapolatedValue(value, abs(value - v2), order, inputs, True, False)
