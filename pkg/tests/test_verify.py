import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from speclab.mesh import disk, gen_domain, square
from speclab.verify import (
    THEOREM_IDS,
    Study,
    TheoremReport,
    check_dtn_ratio,
    check_robin_gap,
    check_sphere_inequality,
    check_theta_lower_bound,
    judge,
    reports_to_json,
    run_suite,
)

_H = [0.4, 0.2, 0.1]


def _seq(limit, a, order=2):
    return [limit + a * h**order for h in _H]


def test_judge_equality():
    *_, verdict, _ = judge(_seq(2.0, 0.3), _seq(2.0, -0.2), equality=True)
    assert verdict == "EQUALITY"


def test_judge_pass_and_fail():
    assert judge(_seq(1.0, 0.1), _seq(2.0, 0.1))[4] == "PASS"
    assert judge(_seq(2.0, 0.1), _seq(1.0, 0.1))[4] == "FAIL"


def test_judge_inconclusive_when_margin_within_error():
    # margin sequence oscillates, so the error estimate swamps a tiny positive margin
    lhs = [1.0, 1.0, 1.0]
    rhs = [1.0 + 1e-3, 1.0 - 1e-3, 1.0 + 2e-4]
    assert judge(lhs, rhs)[4] == "INCONCLUSIVE"


def test_judge_extrapolates_sides_separately():
    lhs, rhs, margin, tol, verdict, info = judge(_seq(1.0, 0.5), _seq(3.0, -0.5))
    assert math.isclose(lhs, 1.0, abs_tol=1e-12) and math.isclose(rhs, 3.0, abs_tol=1e-12)
    assert math.isclose(margin, 2.0, abs_tol=1e-12) and verdict == "PASS"
    assert info["lhs_levels"] == _seq(1.0, 0.5)


@settings(max_examples=50, deadline=None)
@given(l=st.floats(0.1, 10), gap=st.floats(0.05, 5), a=st.floats(-1, 1), b=st.floats(-1, 1))
def test_property_judge_sign(l, gap, a, b):
    # exact power-law sequences are extrapolated exactly, so only the sign matters
    assert judge(_seq(l, a), _seq(l + gap, b))[4] == "PASS"
    assert judge(_seq(l + gap, a), _seq(l, b))[4] == "FAIL"


@pytest.fixture(scope="module")
def coarse_disk():
    return Study(disk(1.0), 0.3, levels=3)


@pytest.fixture(scope="module")
def coarse_square():
    return Study(square(1.0), 0.3, levels=3)


def test_skip_reasons(coarse_disk, coarse_square):
    assert check_sphere_inequality(coarse_disk).verdict == "SKIPPED"
    for rep in (check_theta_lower_bound(coarse_square), check_robin_gap(coarse_square)):
        assert rep.verdict == "SKIPPED" and rep.meta["reason"].startswith("corners")
    assert check_dtn_ratio(coarse_square).verdict == "SKIPPED"


def test_disk_ratio_equality(coarse_disk):
    reps = run_suite(coarse_disk, "upper_bound_ratio")
    assert [r.verdict for r in reps] == ["EQUALITY", "EQUALITY"]


def test_suite_order_and_json_determinism(coarse_disk):
    a = run_suite(coarse_disk)
    b = run_suite(Study(disk(1.0), 0.3, levels=3), jobs=3)
    assert [r.theorem_id for r in a] == [r.theorem_id for r in b]
    assert set(r.theorem_id for r in a) == set(THEOREM_IDS)
    assert reports_to_json(a) == reports_to_json(b)


def test_report_json_cleans_values():
    rep = TheoremReport("x", "disk", 0, np.float64(1.0), math.inf, None, None, "PASS", {"a": np.arange(2)})
    d = json.loads(reports_to_json([rep], {"seed": np.int64(3)}))
    assert d["reports"][0]["rhs"] == "inf" and d["reports"][0]["meta"]["a"] == [0, 1] and d["seed"] == 3


def test_study_provenance(coarse_disk):
    prov = coarse_disk.provenance()
    assert len(prov["h_list"]) == 3 and prov["n_vertices"] == sorted(prov["n_vertices"])


def test_study_accepts_mesh():
    m = gen_domain(disk(1.0), 0.4)
    s = Study(m, levels=2)
    assert s.mesh(0) is m and s.mesh(1).n_triangles == 4 * m.n_triangles
