import math

import numpy as np
import pytest

from speclab.assembly import ProblemSpec, assemble
from speclab.eig import richardson, solve
from speclab.errors import NonFlatMetric
from speclab.forms import ParallelForm
from speclab.mesh import cap, disk, ellipse, gen_domain, refine, square
from speclab.serrin import is_harmonic, solve_serrin, verify_serrin_form


def _scores(tag, h=0.2):
    m = gen_domain(tag, h)
    out = []
    for _ in range(3):
        out.append(solve_serrin(m).constancy_score)
        m = refine(m)
    return out


def test_disk_torsion_function():
    m = refine(gen_domain(disk(1.0), 0.1))
    sol = solve_serrin(m)
    r2 = np.sum(m.vertices**2, axis=1)
    exact = (1 - r2) / 4
    assert np.max(np.abs(sol.f - exact)) <= 1e-2 * sol.f.max()
    assert math.isclose(sol.c_mean, 0.5, rel_tol=1e-2)


@pytest.mark.parametrize("tag", [disk(1.0), square(1.0), ellipse(1.0, 0.6), cap(math.pi / 3)])
def test_flux_integrates_to_volume(tag):
    sol = solve_serrin(gen_domain(tag, 0.2))
    assert abs(sol.flux_integral / sol.vol_M - 1) < 1e-10


@pytest.mark.parametrize("tag", [disk(1.0), square(1.0)])
def test_torsion_nonnegative(tag):
    assert solve_serrin(gen_domain(tag, 0.15)).f.min() >= 0


def test_disk_score_decreases_to_zero():
    s = _scores(disk(1.0))
    assert s[0] > s[1] > s[2]
    assert is_harmonic(s[-1]) and is_harmonic(abs(richardson(*s).value))


@pytest.mark.parametrize("tag,alpha", [(cap(math.pi / 3), 1), (cap(math.pi / 2), 1)])
def test_caps_are_harmonic(tag, alpha):
    s = _scores(tag)
    assert s[2] < s[1] < s[0] and is_harmonic(s[-1])


def test_square_score_plateau():
    s = _scores(square(1.0))
    assert min(s) > 0.05 and richardson(*s).value > 0.05
    assert not is_harmonic(s[-1])


def test_ellipse_not_harmonic():
    s = _scores(ellipse(1.0, 0.6))
    assert min(s) > 0.1


def test_disk_serrin_form_residual_decreases():
    m = gen_domain(disk(1.0), 0.1)
    rep = []
    for _ in range(3):
        rep.append(verify_serrin_form(m, ParallelForm("dx")))
        m = refine(m)
    res = [r.residual for r in rep]
    assert res[0] > res[1] > res[2]
    assert abs(rep[-1].quotient - 2) < 1e-3


def test_hodge_dual_forms_share_residual():
    m = gen_domain(disk(1.0), 0.15)
    a = verify_serrin_form(m, ParallelForm("1"))
    b = verify_serrin_form(m, ParallelForm("dxdy"))
    assert math.isclose(a.residual, b.residual, rel_tol=1e-12)


def test_square_quotient_above_q1(square_coarse):
    rep = verify_serrin_form(square_coarse, ParallelForm("dx"))
    q1 = solve(assemble(ProblemSpec("bs", 1), square_coarse), 1).eigenvalues[0]
    assert rep.quotient >= q1


def test_cap_rejected():
    with pytest.raises(NonFlatMetric):
        verify_serrin_form(gen_domain(cap(1.0), 0.3), ParallelForm("dx"))
