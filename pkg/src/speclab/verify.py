"""Theorem checkers: evaluate both sides of each bound over a refinement study.

Every checker works on a :class:`Study`, a sequence of uniformly refined
meshes of one domain (h, h/2, h/4, ...). Each side of an inequality is
computed on every level and extrapolated; the margin ``rhs - lhs`` is
judged against the extrapolation error of the margin sequence itself.

Verdicts
--------
``FAIL``         margin below ``-3 err``
``EQUALITY``     ``|margin| <= 3 err`` for checks whose equality case is meaningful
``PASS``         margin above ``err``
``INCONCLUSIVE`` anything else (under-resolved)
``SKIPPED``      a hypothesis of the statement fails; the reason is in ``meta``
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import __version__
from .assembly import (
    ProblemSpec,
    assemble,
    boundary_consistent_mass,
    bs_harmonic_quotient,
    form_mass,
    n_components,
)
from .eig import cluster, dedup, default_seed, richardson, solve
from .geom import bs_constant, geometry_report, theta_integral
from .mesh import DomainTag, SimplicialMesh, boundary_frame, gen_domain, refine
from .serrin import HARMONIC_THRESHOLD, solve_serrin

__all__ = [
    "TheoremReport",
    "Study",
    "THEOREM_IDS",
    "check_upper_bound_ratio",
    "check_theta_lower_bound",
    "check_hodge_duality",
    "check_flat_coincidence",
    "check_sphere_inequality",
    "check_robin_sandwich",
    "check_robin_dirichlet_neumann",
    "check_robin_gap",
    "check_robin_bs",
    "check_dtn_ratio",
    "run_suite",
    "reports_to_json",
]

THEOREM_IDS = (
    "upper_bound_ratio",
    "theta_lower_bound",
    "hodge_duality",
    "flat_coincidence",
    "sphere_inequality",
    "robin_sandwich",
    "robin_dirichlet_neumann",
    "robin_gap",
    "robin_bs",
    "dtn_ratio",
)

EQUALITY_FACTOR = 3.0
DEFAULT_TAUS = (0.1, 1.0, 10.0, 1e4, 1e8)


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------


@dataclass
class TheoremReport:
    theorem_id: str
    domain: str
    p: object
    lhs: float | None
    rhs: float | None
    margin: float | None
    tolerance: float | None
    verdict: str
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "theorem_id": self.theorem_id,
            "domain": self.domain,
            "p": self.p,
            "lhs": _clean(self.lhs),
            "rhs": _clean(self.rhs),
            "margin": _clean(self.margin),
            "tolerance": _clean(self.tolerance),
            "verdict": self.verdict,
            "meta": _clean(self.meta),
        }


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    return x


def reports_to_json(reports, extra=None):
    """Deterministic JSON text for a list of reports."""
    payload = [r.to_dict() for r in reports]
    if extra is not None:
        payload = {"reports": payload, **_clean(extra)}
    return json.dumps(payload, indent=2, sort_keys=True)


def judge(lhs_seq, rhs_seq, equality=False, floor=0.0):
    """Extrapolate both sides and the margin, and classify.

    Returns ``(lhs, rhs, margin, tolerance, verdict, info)``.
    """
    lhs_seq = [float(v) for v in lhs_seq]
    rhs_seq = [float(v) for v in rhs_seq]
    margins = [r - l for l, r in zip(lhs_seq, rhs_seq)]
    if len(lhs_seq) >= 3:
        el = richardson(*lhs_seq[-3:])
        er = richardson(*rhs_seq[-3:])
        em = richardson(*margins[-3:])
        lhs, rhs = el.value, er.value
        margin = rhs - lhs
        err = max(em.error_estimate, abs(margin - em.value))
        info = {
            "lhs_levels": lhs_seq,
            "rhs_levels": rhs_seq,
            "lhs_order": el.observed_order,
            "rhs_order": er.observed_order,
            "margin_order": em.observed_order,
            "extrapolation_error": err,
        }
    else:
        lhs, rhs = lhs_seq[-1], rhs_seq[-1]
        margin = rhs - lhs
        err = 0.0
        info = {"lhs_levels": lhs_seq, "rhs_levels": rhs_seq, "extrapolation_error": 0.0}
    scale = max(abs(lhs), abs(rhs), 1e-300)
    err = max(err, floor, 1e-12 * scale)
    tol = EQUALITY_FACTOR * err
    if margin < -tol:
        verdict = "FAIL"
    elif equality and abs(margin) <= tol:
        verdict = "EQUALITY"
    elif margin > err:
        verdict = "PASS"
    else:
        verdict = "INCONCLUSIVE"
    return lhs, rhs, margin, tol, verdict, info


# --------------------------------------------------------------------------
# refinement study with cached spectra
# --------------------------------------------------------------------------


def _mesh_hash(mesh):
    h = hashlib.sha256()
    h.update(mesh.vertices.tobytes())
    h.update(mesh.triangles.tobytes())
    h.update(mesh.boundary_edges.tobytes())
    return h.hexdigest()[:16]


class Study:
    """Uniform refinement ladder of one domain with memoised solves.

    Parameters
    ----------
    source : DomainTag or SimplicialMesh
        Either a domain (meshed at ``h``) or a ready coarse mesh.
    h : float
        Coarse mesh size when ``source`` is a tag.
    levels : int
        Number of meshes (h, h/2, ...). Three levels are needed for
        extrapolation.
    """

    def __init__(self, source, h=None, levels=3, tol=1e-9, seed=None):
        if isinstance(source, SimplicialMesh):
            coarse = source
        elif isinstance(source, DomainTag):
            coarse = gen_domain(source, h)
        else:
            raise TypeError("source must be a DomainTag or a SimplicialMesh")
        self.levels = int(levels)
        self.tol = tol
        self.seed = default_seed() if seed is None else seed
        self._meshes = [coarse]
        self._cache = {}
        self._locks = {}
        self._guard = threading.Lock()

    # meshes --------------------------------------------------------------
    @property
    def domain(self):
        return self._meshes[0].domain

    @property
    def name(self):
        return str(self.domain) if self.domain is not None else "mesh"

    @property
    def flat(self):
        return self._meshes[0].metric.is_flat

    def mesh(self, level):
        with self._guard:
            while len(self._meshes) <= level:
                self._meshes.append(refine(self._meshes[-1]))
            return self._meshes[level]

    @property
    def meshes(self):
        return [self.mesh(i) for i in range(self.levels)]

    def _memo(self, key, fn):
        with self._guard:
            if key in self._cache:
                return self._cache[key]
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            with self._guard:
                if key in self._cache:
                    return self._cache[key]
            value = fn()
            with self._guard:
                self._cache[key] = value
            return value

    def provenance(self):
        ms = self.meshes
        return {
            "h_list": [m.h_target for m in ms],
            "n_vertices": [m.n_vertices for m in ms],
            "seeds": [self.seed],
            "hashes": [_mesh_hash(m) for m in ms],
        }

    # solves ----------------------------------------------------------------
    def pencil(self, problem, p, level, tau=None):
        key = ("pencil", problem, p, tau, level)
        return self._memo(key, lambda: assemble(ProblemSpec(problem, p, tau), self.mesh(level)))

    def spectrum(self, problem, p, level, k=4, tau=None):
        """Lowest eigenpairs, solved at a fixed bucket size of at least ``k``.

        Every request in a bucket shares the same solve, so results do not
        depend on which checker asked first.
        """
        bucket = 8 if k <= 8 else 16 * math.ceil(k / 16)
        key = ("spectrum", problem, p, tau, level, bucket)

        def run():
            pencil = self.pencil(problem, p, level, tau)
            return solve(pencil, min(bucket, pencil.size - 1), self.tol, self.seed)

        return self._memo(key, run)

    def values(self, problem, p, index=0, tau=None, k=None):
        """Eigenvalue ``index`` (0-based) on every level."""
        k = max(k or 0, index + 1, 4)
        return [float(self.spectrum(problem, p, lv, k, tau).eigenvalues[index]) for lv in range(self.levels)]

    def harmonic_q1(self, p, level):
        key = ("harmonic", p, level)
        return self._memo(key, lambda: solve(bs_harmonic_quotient(p, self.mesh(level)), 1, self.tol, self.seed))

    def geometry(self, level):
        key = ("geometry", level)
        return self._memo(key, lambda: geometry_report(self.mesh(level), allow_corners=True))

    def serrin(self, level):
        key = ("serrin", level)
        return self._memo(key, lambda: solve_serrin(self.mesh(level)))

    def harmonic_score(self):
        scores = [self.serrin(lv).constancy_score for lv in range(self.levels)]
        if len(scores) >= 3:
            ex = richardson(*scores[-3:])
            # a score is non-negative; extrapolating below zero means "tends to zero"
            return max(ex.value, 0.0), scores
        return scores[-1], scores

    def kernel_dimension(self, problem, p, k=6):
        """Kernel size of a Neumann or Steklov pencil, read off the refinement ladder.

        An eigenvalue belongs to the kernel when its extrapolated limit is
        zero within three times its extrapolation error. The literal count of
        values below ``1e-8`` times the largest computed value on the finest
        level is returned alongside.
        """
        seqs = [self.values(problem, p, j, k=k) for j in range(k)]
        finest = np.array([s[-1] for s in seqs])
        lam_max = float(np.max(np.abs(finest)))
        literal = int(np.sum(np.abs(finest) <= 1e-8 * lam_max))
        dim = 0
        for s in seqs:
            if abs(s[-1]) <= 1e-8 * lam_max:
                dim += 1
                continue
            if len(s) >= 3:
                ex = richardson(*s[-3:])
                if ex.monotone and abs(ex.value) <= EQUALITY_FACTOR * ex.error_estimate:
                    dim += 1
                    continue
            break
        return dim, literal, seqs


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _as_study(obj, levels=3):
    if isinstance(obj, Study):
        return obj
    if isinstance(obj, SimplicialMesh):
        return Study(obj, levels=levels)
    raise TypeError("expected a Study or a SimplicialMesh")


def _report(study, theorem_id, p, judged, extra=None):
    lhs, rhs, margin, tol, verdict, info = judged
    meta = study.provenance()
    meta.update(info)
    if extra:
        meta.update(extra)
    return TheoremReport(theorem_id, study.name, p, lhs, rhs, margin, tol, verdict, meta)


def _skipped(study, theorem_id, p, reason, extra=None):
    meta = study.provenance()
    meta["reason"] = reason
    if extra:
        meta.update(extra)
    return TheoremReport(theorem_id, study.name, p, None, None, None, None, "SKIPPED", meta)


def _structural(study, theorem_id, p, deviation, tolerance, extra=None):
    """Report for an identity checked at a fixed tolerance (no extrapolation)."""
    margin = tolerance - deviation
    verdict = "PASS" if margin >= 0 else "FAIL"
    meta = study.provenance()
    meta["extrapolation_error"] = 0.0
    if extra:
        meta.update(extra)
    return TheoremReport(theorem_id, study.name, p, deviation, tolerance, margin, tolerance, verdict, meta)


def _vol_ratio(study, level):
    g = study.geometry(level)
    return g.ratio


def _bd_norm_sq(mesh, p, vec):
    """``int_{bd} |omega|_g**2`` for a full component vector."""
    w = 0 if mesh.metric.is_flat else 1 - 2 * p
    Mb = boundary_consistent_mass(mesh, w)
    nc = n_components(p)
    Mb = sp.block_diag([Mb] * nc, format="csr")
    return float(vec @ (Mb @ vec))


def _vol_norm_sq(mesh, p, vec):
    return float(vec @ (form_mass(mesh, p) @ vec))


# --------------------------------------------------------------------------
# checkers
# --------------------------------------------------------------------------


def check_upper_bound_ratio(study, p=0):
    """First biharmonic Steklov eigenvalue against ``Vol(bd)/Vol(M)``."""
    study = _as_study(study)
    if not study.flat and p not in (0, 2):
        return _skipped(study, "upper_bound_ratio", p, "no parallel p-form on a curved domain")
    q = study.values("bs", p, 0)
    ratio = [_vol_ratio(study, lv) for lv in range(study.levels)]
    score, scores = study.harmonic_score()
    extra = {"harmonic_score": score, "harmonic_score_levels": scores,
             "harmonic_domain": bool(score < HARMONIC_THRESHOLD)}
    return _report(study, "upper_bound_ratio", p, judge(q, ratio, equality=True), extra)


def _theta_bound(study, level, n=2):
    g = study.geometry(level)
    return 1.0 / theta_integral(g.K, g.H0, g.inner_radius, n)


def check_theta_lower_bound(study, p=0):
    """``1 / int_0^R Theta`` against the first biharmonic Steklov eigenvalue."""
    study = _as_study(study)
    g0 = study.geometry(0)
    if g0.corners:
        return _skipped(study, "theta_lower_bound", p, "corners: mean curvature undefined")
    # in two dimensions the curvature term of the Bochner formula is K p(2-p) >= 0
    bound = [_theta_bound(study, lv) for lv in range(study.levels)]
    q = study.values("bs", p, 0)
    geo = [study.geometry(lv) for lv in range(study.levels)]
    extra = {
        "K": g0.K,
        "H0_levels": [g.H0 for g in geo],
        "R_levels": [g.inner_radius for g in geo],
        "inner_radius_method": "nearest boundary sample",
    }
    return _report(study, "theta_lower_bound", p, judge(bound, q, equality=True), extra)


def check_hodge_duality(study, p=0, k=3):
    """Compare the first ``k`` q-values on p-forms and (2-p)-forms."""
    study = _as_study(study)
    dual = 2 - p
    if dual == p:
        return _structural(study, "hodge_duality", p, 0.0, 1e-10, {"reason": "self-dual degree"})
    lv = study.levels - 1
    a = np.array(study.spectrum("bs", p, lv, k).eigenvalues[:k])
    b = np.array(study.spectrum("bs", dual, lv, k).eigenvalues[:k])
    dev = float(np.max(np.abs(a - b) / np.abs(a)))
    tol = 1e-10 if study.flat else 1e-2
    return _structural(study, "hodge_duality", [p, dual], dev, tol,
                       {"q_p": a, "q_dual": b, "k": k})


def check_flat_coincidence(study, k=4):
    """Distinct q-values on 1-forms equal those on functions (flat domains)."""
    study = _as_study(study)
    if not study.flat:
        return _skipped(study, "flat_coincidence", [0, 1], "metric is not flat")
    lv = study.levels - 1
    q0 = study.spectrum("bs", 0, lv, k).eigenvalues[:k]
    q1 = study.spectrum("bs", 1, lv, 2 * k).eigenvalues[:2 * k]
    d0, d1 = dedup(q0), dedup(q1)
    m = min(len(d0), len(d1)) - 1
    m = max(m, 1)
    dev = float(np.max(np.abs(d0[:m] - d1[:m]) / np.abs(d0[:m])))
    return _structural(study, "flat_coincidence", [0, 1], dev, 1e-8,
                       {"distinct_q0": d0[:m], "distinct_q1": d1[:m],
                        "multiplets_q0": cluster(q0), "multiplets_q1": cluster(q1)})


def check_sphere_inequality(study, p=1, n=2):
    """``q_{1,p-1} + (n-p) q_{1,p+1} < C(p,n) q_{1,p}`` on spherical domains.

    The variant with a factor ``p`` on the first term is evaluated as well;
    for ``(p, n) = (1, 2)`` both coincide.
    """
    study = _as_study(study)
    if study.flat:
        return _skipped(study, "sphere_inequality", p, "domain is not in the round sphere")
    a, C = bs_constant(p, n)
    qm = np.array(study.values("bs", p - 1, 0))
    qp = np.array(study.values("bs", p + 1, 0))
    q = np.array(study.values("bs", p, 0))
    lhs = qm + (n - p) * qp
    lhs_alt = p * qm + (n - p) * qp
    rhs = float(C) * q
    alt = judge(lhs_alt, rhs)
    extra = {
        "a": a,
        "C": str(C),
        "q_minus_levels": qm,
        "q_levels": q,
        "q_plus_levels": qp,
        "variant_weighted_lhs": alt[0],
        "variant_weighted_margin": alt[2],
        "variant_weighted_verdict": alt[4],
    }
    return _report(study, "sphere_inequality", p, judge(lhs, rhs), extra)


def check_robin_sandwich(study, p=1, taus=DEFAULT_TAUS):
    """Neumann <= Robin(tau) <= Dirichlet, nondecreasing in tau.

    Every link of the chain is judged on its own extrapolated gap; the
    report carries the tightest link.
    """
    study = _as_study(study)
    taus = sorted(float(t) for t in taus)
    chain = [("neumann", None)] + [("robin", t) for t in taus] + [("dirichlet", None)]
    seqs = [study.values(prob, p, 0, tau=t) for prob, t in chain]
    links = []
    worst = None
    for (pa, ta), (pb, tb), sa, sb in zip(chain[:-1], chain[1:], seqs[:-1], seqs[1:]):
        j = judge(sa, sb)
        links.append({"lower": pa if ta is None else f"robin({ta:g})",
                      "upper": pb if tb is None else f"robin({tb:g})",
                      "margin": j[2], "tolerance": j[3], "verdict": j[4]})
        rank = {"FAIL": 0, "INCONCLUSIVE": 1, "PASS": 2}[j[4]]
        key = (rank, j[2] - j[3])
        if worst is None or key < worst[0]:
            worst = (key, j)
    per_level_monotone = all(
        all(seqs[i][lv] <= seqs[i + 1][lv] * (1 + 1e-12) + 1e-12 for i in range(len(seqs) - 1))
        for lv in range(study.levels)
    )
    lam_d = seqs[-1][-1]
    lam_top = seqs[-2][-1]
    limit_gap = abs(lam_d - lam_top) / lam_d
    extra = {
        "taus": taus,
        "chain_levels": seqs,
        "links": links,
        "monotone_on_every_level": per_level_monotone,
        "largest_tau_relative_gap": limit_gap,
    }
    report = _report(study, "robin_sandwich", p, worst[1], extra)
    if not per_level_monotone or limit_gap > 1e-3:
        report.verdict = "FAIL"
    return report


def _eigvecs_full(study, problem, p, level, count, tau=None):
    spec = study.spectrum(problem, p, level, max(count, 4), tau)
    P = study.pencil(problem, p, level, tau).P
    return spec.eigenvalues, P @ spec.eigenvectors[:, :count]


def _eigenspace_size(values, rel=1e-6):
    return cluster(values[: max(2, len(values))], rel)[0][1]


def check_robin_dirichlet_neumann(study, p=1, tau=1.0, part=1):
    """Lower bounds on ``1/lambda(tau)`` from Dirichlet and Neumann data."""
    study = _as_study(study)
    tid = "robin_dirichlet_neumann"
    tag = {"part": part, "tau": tau}
    lam_tau = study.values("robin", p, 0, tau=tau)
    lam_d = study.values("dirichlet", p, 0)
    if part == 1:
        dim, literal, _ = study.kernel_dimension("neumann", p)
        tag.update({"absolute_cohomology_dim": dim, "kernel_count_literal": literal})
        if dim == 0:
            return _skipped(study, tid, p, "absolute cohomology vanishes", tag)
        proj_rel, proj_vol, proj_bd = [], [], []
        for lv in range(study.levels):
            mesh = study.mesh(lv)
            vals_d, vd = _eigvecs_full(study, "dirichlet", p, lv, 4)
            mult = _eigenspace_size(vals_d)
            vd = vd[:, :mult]
            _, vk = _eigvecs_full(study, "neumann", p, lv, max(dim, 4))
            vk = vk[:, :dim]
            M = form_mass(mesh, p)
            # orthonormal kernel basis, then the eigenspace member with the largest projection
            G = vk.T @ (M @ vk)
            Lc = np.linalg.cholesky(G)
            Q = vk @ np.linalg.inv(Lc).T
            Gd = vd.T @ (M @ vd)
            Ld = np.linalg.cholesky(Gd)
            D = vd @ np.linalg.inv(Ld).T
            C = Q.T @ (M @ D)
            u, s, vt = np.linalg.svd(C)
            coeff = u[:, 0] * s[0]
            w0 = Q @ coeff
            proj_rel.append(float(s[0]))
            proj_vol.append(_vol_norm_sq(mesh, p, w0))
            proj_bd.append(_bd_norm_sq(mesh, p, w0))
        tag["projection_norm_levels"] = proj_rel
        ex = richardson(*proj_rel[-3:]) if len(proj_rel) >= 3 else None
        vanishing = proj_rel[-1] < 1e-6 or (
            ex is not None and abs(ex.value) <= EQUALITY_FACTOR * ex.error_estimate)
        if vanishing:
            return _skipped(study, tid, p,
                            "projection of the Dirichlet eigenform on harmonic fields vanishes", tag)
        lhs = [1.0 / ld + v**2 / (tau * b) for ld, v, b in zip(lam_d, proj_vol, proj_bd)]
        rhs = [1.0 / lt for lt in lam_tau]
        return _report(study, tid, p, judge(lhs, rhs), tag)

    lam_n = study.values("neumann", p, 0)
    dim, literal, _ = study.kernel_dimension("neumann", p)
    tag.update({"neumann_kernel_dim": dim})
    if dim > 0:
        return _skipped(study, tid, p, "first Neumann eigenvalue is zero", tag)
    alphas = []
    for lv in range(study.levels):
        mesh = study.mesh(lv)
        _, vn = _eigvecs_full(study, "neumann", p, lv, 1)
        w = vn[:, 0]
        alphas.append(_bd_norm_sq(mesh, p, w) / _vol_norm_sq(mesh, p, w))
    lhs = []
    for ln, ld, a in zip(lam_n, lam_d, alphas):
        lhs.append(1.0 / ln - tau * a * (ld - ln) / (ln * (tau * a * ld + ln * (ld - ln))))
    rhs = [1.0 / lt for lt in lam_tau]
    tag["alpha_N_levels"] = alphas
    return _report(study, tid, p, judge(lhs, rhs), tag)


def check_robin_gap(study, q=1, p=1, tau=1.0):
    """Boundary/volume ratio of a Robin q-eigenform against the gap over sigma_p."""
    study = _as_study(study)
    tid = "robin_gap"
    label = [q, p]
    if not study.flat:
        return _skipped(study, tid, label, "statement is for Euclidean domains")
    g0 = study.geometry(0)
    if g0.corners:
        return _skipped(study, tid, label, "corners: p-curvature undefined")
    if p != 1 or q != 1:
        return _skipped(study, tid, label, "only q = p = 1 arises in two dimensions")
    sig = [study.geometry(lv).sigma[1] for lv in range(study.levels)]
    if richardson(*sig[-3:]).value <= 0 if len(sig) >= 3 else sig[-1] <= 0:
        return _skipped(study, tid, label, "sigma_p is not positive", {"sigma_levels": sig})
    lam_q = study.values("robin", q, 0, tau=tau)
    lam_qp = study.values("robin", q - p, 0, tau=tau)
    ratio = []
    for lv in range(study.levels):
        mesh = study.mesh(lv)
        _, v = _eigvecs_full(study, "robin", q, lv, 1, tau)
        w = v[:, 0]
        ratio.append(_bd_norm_sq(mesh, q, w) / _vol_norm_sq(mesh, q, w))
    rhs = [(a - b) / s for a, b, s in zip(lam_q, lam_qp, sig)]
    extra = {"tau": tau, "sigma_levels": sig, "lambda_q_levels": lam_q, "lambda_q_minus_p_levels": lam_qp}
    return _report(study, tid, label, judge(ratio, rhs), extra)


def check_robin_bs(study, p=0, tau=1.0):
    """``1/lambda(tau) <= 1/lambda_D + 1/(tau q_1)``."""
    study = _as_study(study)
    lam_tau = study.values("robin", p, 0, tau=tau)
    lam_d = study.values("dirichlet", p, 0)
    q = study.values("bs", p, 0)
    lhs = [1.0 / lt for lt in lam_tau]
    rhs = [1.0 / ld + 1.0 / (tau * qq) for ld, qq in zip(lam_d, q)]
    return _report(study, "robin_bs", p, judge(lhs, rhs), {"tau": tau})


def check_dtn_ratio(study, p=1, n=2):
    """``min(nu_{1,p-1}, nu_{1,n-1-p}) <= Vol(bd)/Vol(M)`` on harmonic domains.

    Both readings of the first eigenvalue are reported: the bottom of the
    spectrum (kernel zeros included) and the first positive eigenvalue. The
    verdict uses the first positive one, the stronger statement.
    """
    study = _as_study(study)
    tid = "dtn_ratio"
    if not 1 <= p <= n - 1:
        return _skipped(study, tid, p, "needs 1 <= p <= n-1")
    if not study.flat:
        return _skipped(study, tid, p, "parallel forms need a flat metric")
    score, scores = study.harmonic_score()
    if score >= HARMONIC_THRESHOLD:
        return _skipped(study, tid, p, "not a harmonic domain", {"harmonic_score": score})
    g0 = study.geometry(0)
    if g0.corners or not (g0.H0 > 0):
        return _skipped(study, tid, p, "needs sigma_p > 0 or sigma_{n-p} > 0")
    degs = sorted({p - 1, n - 1 - p})
    first, positive, info = {}, {}, {}
    for d in degs:
        dim, literal, seqs = study.kernel_dimension("dtn", d)
        first[d] = seqs[0]
        positive[d] = seqs[dim]
        info[f"kernel_dim_{d}"] = dim
        info[f"kernel_count_literal_{d}"] = literal
    pick_pos = [min(positive[d][lv] for d in degs) for lv in range(study.levels)]
    pick_first = [min(first[d][lv] for d in degs) for lv in range(study.levels)]
    ratio = [_vol_ratio(study, lv) for lv in range(study.levels)]
    kernel_conv = judge(pick_first, ratio)
    # relative Steklov duality check at the finest level
    lv = study.levels - 1
    dual_dev = 0.0
    for d in degs:
        rel = study.spectrum("dtn_dual", n - 1 - d, lv, 4).eigenvalues[:4]
        direct = study.spectrum("dtn", d, lv, 4).eigenvalues[:4]
        dual_dev = max(dual_dev, float(np.max(np.abs(rel - direct)) / max(np.abs(direct).max(), 1e-300)))
    info.update({
        "harmonic_score": score,
        "convention": "first positive eigenvalue",
        "kernel_convention_lhs": kernel_conv[0],
        "kernel_convention_margin": kernel_conv[2],
        "kernel_convention_verdict": kernel_conv[4],
        "relative_dtn_duality_deviation": dual_dev,
    })
    report = _report(study, tid, p, judge(pick_pos, ratio), info)
    if dual_dev > 1e-8:
        report.meta["relative_dtn_duality_verdict"] = "FAIL"
        report.verdict = "FAIL"
    return report


# --------------------------------------------------------------------------
# suite runner
# --------------------------------------------------------------------------


def _suite_jobs(study):
    jobs = [
        ("upper_bound_ratio", lambda: check_upper_bound_ratio(study, 0)),
        ("upper_bound_ratio", lambda: check_upper_bound_ratio(study, 1)),
        ("theta_lower_bound", lambda: check_theta_lower_bound(study, 0)),
        ("hodge_duality", lambda: check_hodge_duality(study, 0, 3)),
        ("flat_coincidence", lambda: check_flat_coincidence(study, 4)),
        ("sphere_inequality", lambda: check_sphere_inequality(study, 1)),
        ("robin_sandwich", lambda: check_robin_sandwich(study, 1)),
        ("robin_dirichlet_neumann", lambda: check_robin_dirichlet_neumann(study, 1, 1.0, part=1)),
        ("robin_dirichlet_neumann", lambda: check_robin_dirichlet_neumann(study, 1, 0.5, part=2)),
        ("robin_dirichlet_neumann", lambda: check_robin_dirichlet_neumann(study, 1, 2.0, part=2)),
        ("robin_gap", lambda: check_robin_gap(study, 1, 1, 1.0)),
        ("robin_bs", lambda: check_robin_bs(study, 0, 0.1)),
        ("robin_bs", lambda: check_robin_bs(study, 0, 1.0)),
        ("robin_bs", lambda: check_robin_bs(study, 0, 10.0)),
        ("robin_bs", lambda: check_robin_bs(study, 1, 1.0)),
        ("dtn_ratio", lambda: check_dtn_ratio(study, 1)),
    ]
    return jobs


def run_suite(study, suite="all", jobs=1):
    """Run every checker of ``suite`` (``"all"`` or a theorem id) on a study.

    Reports come back in a fixed order regardless of ``jobs``.
    """
    study = _as_study(study)
    todo = [(tid, fn) for tid, fn in _suite_jobs(study) if suite == "all" or tid == suite]
    if not todo:
        raise ValueError(f"unknown suite {suite!r}")
    if jobs <= 1:
        return [fn() for _, fn in todo]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn) for _, fn in todo]
        return [f.result() for f in futures]


def version_string():
    return f"speclab {__version__}"
