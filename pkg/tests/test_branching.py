import dataclasses
import math

import numpy as np
import pytest

from eqindex.branching import (BUDGET, LOOP, TRIVIAL_RECONNECT, UNBOUNDED,
                               ATTRACTOR_REPELLER, GLOBAL_STATIC, Branch,
                               BranchPoint, bifurcating_set_index,
                               classify_trichotomy, continue_branch,
                               local_branch_existence, m2_dichotomy,
                               reduced_zeros, sine_mask, switch_branches)
from eqindex.config import RunConfig
from eqindex.degree import _full_newton
from eqindex.errors import ValidationError
from eqindex.fourier import FourierVector
from eqindex.manifold import reduce_at
from eqindex.planar import hausdorff_distance
from eqindex.problem import ProblemSpec, galerkin_residual, galerkin_jacobian

CFG = RunConfig()
SQRT_PI = math.sqrt(math.pi)


def sinx_spec(N=10):
    return ProblemSpec(a=FourierVector.from_terms(N, sin={1: 1.0}),
                       h_terms=(), N=N)


def cubic_spec(N=10):
    return ProblemSpec(a=FourierVector.zero(N),
                       h_terms=((3, FourierVector.from_terms(N, const=-1.0)),),
                       N=N)


def twomode_spec():
    return ProblemSpec(a=FourierVector.from_terms(2, sin={1: 1.0, 2: 1.0}),
                       h_terms=(), N=2)


# -- index formulas ------------------------------------------------------------

def test_formula_cubic_even_crossing_right_is_zero():
    r = bifurcating_set_index(cubic_spec(), 1, "right", CFG)
    assert r["chi"] == 1 and r["m2"] == 2
    assert r["index"] == 0 and r["shell_index"] == 0
    assert r["origin_classification"] == "attractor"


def test_formula_cubic_left_is_zero():
    r = bifurcating_set_index(cubic_spec(), 1, "left", CFG)
    assert r["index"] == 0 and r["shell_index"] == 0


def test_formula_odd_crossing_attractor_gives_two():
    # k = 0 is a simple eigenvalue; the cubic problem's scalar reduction has
    # an attracting origin, so the right-hand index is 2 * (-1)^m1 = 2
    r = bifurcating_set_index(cubic_spec(), 0, "right", CFG,
                              sample_offset=1.5e-3)
    assert r["m1"] == 0 and r["m2"] == 1 and r["chi"] == 1
    assert r["index"] == 2 and r["shell_index"] == 2


def test_formula_sinx_both_sides_one():
    for side in ("left", "right"):
        r = bifurcating_set_index(sinx_spec(), 1, side, CFG)
        assert r["chi"] == 0 and r["m1"] == 1
        assert r["index"] == 1 and r["shell_index"] == 1


def test_formula_degenerate_quadratic_forms():
    # a = sin 2x at k = 1 kills both quadratic forms; the cubic part of the
    # reduced field has chi = -3 and the formula value 4 is confirmed by the
    # independent shell count on both sides
    N = 12
    spec = ProblemSpec(a=FourierVector.from_terms(N, sin={2: 1.0}),
                       h_terms=(), N=N)
    for side in ("left", "right"):
        r = bifurcating_set_index(spec, 1, side, CFG, sample_offset=2e-4)
        assert r["chi"] == -3
        assert r["index"] == 4 and r["shell_index"] == 4


# -- local branch existence ------------------------------------------------------

def test_local_branches_sinx_both_sides():
    res = local_branch_existence(sinx_spec(), 1, CFG)
    assert res["right"] and res["left"]
    assert set(res["witnesses"]) == {"right", "left"}
    for w in res["witnesses"].values():
        assert w["norm"] > 5e-4


def test_local_branches_silent_for_attractor_case():
    res = local_branch_existence(cubic_spec(), 1, CFG)
    assert not res["right"] and not res["left"]
    assert res["witnesses"] == {}


def test_local_branches_odd_crossing_always_fires():
    # m2 = 1 transcritical at k = 0: chi = 0 differs from both 1 and -1
    N = 8
    spec = ProblemSpec(a=FourierVector.from_terms(N, const=1.0, sin={1: 1.0}),
                       h_terms=(), N=N)
    res = local_branch_existence(spec, 0, CFG, eps0=0.02)
    assert res["right"] and res["left"]
    assert set(res["witnesses"]) == {"right", "left"}


# -- continuation ------------------------------------------------------------------

def _equilibrium_at(spec, rf, lam, guess_kernel):
    seed = rf.manifold.lift(np.atleast_1d(np.asarray(guess_kernel)))
    sol = _full_newton(
        lambda u: galerkin_residual(spec, FourierVector(u), lam).coeffs,
        lambda u: galerkin_jacobian(spec, FourierVector(u), lam),
        seed.coeffs, CFG.newton_tol)
    assert sol is not None
    return FourierVector(sol)


def test_transcritical_traversal_records_crossing():
    # a = 1 + sin x at k = 0: the branch passes straight through (0, 0) with
    # parameter slope -1/sqrt(2 pi) in the kernel amplitude
    N = 8
    spec = ProblemSpec(a=FourierVector.from_terms(N, const=1.0, sin={1: 1.0}),
                       h_terms=(), N=N)
    rf = reduce_at(spec, 0)
    lam_start = 0.08
    c_guess = -lam_start * math.sqrt(2 * math.pi)
    start = _equilibrium_at(spec, rf, lam_start, [c_guess])
    cfg = dataclasses.replace(CFG, max_steps=800, lambda_min=-0.5,
                              lambda_max=0.5, r_max=3.0)
    branch = continue_branch(spec, start, lam_start,
                             origin=(start, lam_start), direction=-1.0,
                             cfg=cfg, exclude_eig=0, with_stability=False)
    crossings = [e for e in branch.events if e["type"] == "trivial_crossing"]
    assert len(crossings) >= 1
    assert abs(crossings[0]["lambda"]) < 1e-3
    lams = np.array([p.lam for p in branch.points])
    assert lams.min() < -0.05 and lams.max() > 0.05  # traversed both sides
    # slope of lambda against the kernel amplitude near the crossing
    amps = np.array([p.u.coeffs[0] for p in branch.points])
    near = np.abs(amps) < 0.05
    slope = np.polyfit(amps[near], lams[near], 1)[0]
    assert abs(slope) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=0.05)


def test_cubic_branch_matches_radial_closed_form_near_onset():
    # very close to lambda0 the subspace branch norm matches the reduced
    # radial root sqrt((lambda-1) 4 pi / 3); the manifold error is cubic in
    # the amplitude, so the window must stay small for the 1e-5 agreement
    spec = cubic_spec(N=12)
    cfg = dataclasses.replace(CFG, max_steps=400, h_max=0.02,
                              lambda_max=1.01, lambda_min=0.99)
    branches = switch_branches(spec, 1, cfg=cfg, mask=sine_mask(spec),
                               with_stability=False)
    assert branches
    checked = 0
    for b in branches:
        for p in b.points:
            if 1.0 + 2e-4 < p.lam <= 1.0 + 1.5e-3:
                oracle = math.sqrt((p.lam - 1.0) * 4.0 * math.pi / 3.0)
                assert p.norm == pytest.approx(oracle, abs=1e-5)
                checked += 1
    assert checked >= 3


def test_branch_budget_on_lambda_range():
    spec = cubic_spec()
    cfg = dataclasses.replace(CFG, lambda_max=1.2, max_steps=4000)
    branches = switch_branches(spec, 1, cfg=cfg, mask=sine_mask(spec),
                               with_stability=False)
    assert all(b.termination == BUDGET for b in branches)
    assert all(b.termination_data.get("reason") == "lambda range exhausted"
               for b in branches)


def test_branch_point_invariants():
    spec = sinx_spec()
    cfg = dataclasses.replace(CFG, max_steps=120)
    branches = switch_branches(spec, 1, cfg=cfg, with_stability=True)
    assert branches
    for b in branches:
        for p in b.points:
            assert galerkin_residual(spec, p.u, p.lam).norm() < 1e-9
            assert p.stability >= 0
        tangents = [p.tangent for p in b.points]
        assert all(t1 @ t2 > 0.0 for t1, t2 in zip(tangents, tangents[1:]))
        arcs = np.array([p.arclength for p in b.points])
        gaps = np.diff(arcs)
        assert np.all(gaps > 0.5 * cfg.h_min)
        assert np.all(gaps < 2.0 * cfg.h_max + 1e-12)


def test_branch_symmetry_orbit_mapping():
    # u -> -u maps the cubic problem's branches onto each other
    spec = cubic_spec()
    cfg = dataclasses.replace(CFG, max_steps=150)
    branches = switch_branches(spec, 1, cfg=cfg, mask=sine_mask(spec),
                               with_stability=False)
    assert len(branches) == 2
    lam_grid = np.linspace(1.002, 1.01, 5)

    def sample(branch):
        lams = np.array([p.lam for p in branch.points])
        out = []
        for lam in lam_grid:
            i = int(np.argmin(np.abs(lams - lam)))
            out.append(np.concatenate([branch.points[i].u.coeffs,
                                       [branch.points[i].lam]]))
        return np.array(out)

    s0, s1 = sample(branches[0]), sample(branches[1])
    flipped = s1.copy()
    flipped[:, :-1] *= -1.0
    assert hausdorff_distance(s0, flipped) < 1e-6


# -- trichotomy --------------------------------------------------------------------

def test_cubic_branch_unbounded_at_r_max():
    cfg = dataclasses.replace(CFG, max_steps=2000, lambda_max=50.0)
    branches = switch_branches(cubic_spec(), 1, cfg=cfg,
                               mask=sine_mask(cubic_spec()),
                               with_stability=False)
    assert branches
    for b in branches:
        assert b.termination == UNBOUNDED
        assert b.termination_data["norm"] > cfg.r_max
    assert classify_trichotomy(branches)["case"] == "unbounded"


def test_twomode_trivial_reconnect_at_four():
    # engineered two-mode quadratic coupling: the branch from lambda0 = 1
    # sweeps through the second quadrant of the (sin 1, sin 2) plane and
    # lands back on the trivial line at the next eigenvalue
    cfg = dataclasses.replace(CFG, max_steps=4000, lambda_min=-30.0,
                              lambda_max=40.0, r_max=40.0, h_max=0.2)
    spec = twomode_spec()
    branches = switch_branches(spec, 1, cfg=cfg, mask=sine_mask(spec),
                               with_stability=False)
    labels = [b.termination for b in branches]
    assert TRIVIAL_RECONNECT in labels
    b = branches[labels.index(TRIVIAL_RECONNECT)]
    assert b.termination_data["m"] == 2
    assert abs(b.termination_data["lambda_end"] - 4.0) < 1e-3
    assert b.termination_data["norm_end"] < CFG.reconnect_tol
    tri = classify_trichotomy(branches)
    assert tri["case"] == "trivial_reconnect"
    assert tri["data"]["m"] == 2


def test_classify_trichotomy_mapping():
    def mk(term, data=None):
        return Branch(origin=(FourierVector.zero(2), 1.0), points=[],
                      termination=term, termination_data=data or {})

    assert classify_trichotomy([mk(UNBOUNDED), mk(BUDGET)])["case"] == "unbounded"
    assert classify_trichotomy([mk(LOOP)])["case"] == "loop"
    assert classify_trichotomy([mk(BUDGET)])["case"] == "inconclusive(budget)"
    res = classify_trichotomy([mk(BUDGET), mk(TRIVIAL_RECONNECT, {"m": 2})])
    assert res["case"] == "trivial_reconnect" and res["data"]["m"] == 2


# -- dichotomy driver --------------------------------------------------------------

def test_dichotomy_cubic_attractor_repeller():
    rep = m2_dichotomy(cubic_spec(), 1, CFG)
    assert rep.classification == ATTRACTOR_REPELLER
    assert rep.chi == 1 and rep.m1 == 1 and rep.m2 == 2
    assert rep.K_index_left == 0 and rep.K_index_right == 0
    circle = rep.details["invariant_circle"]
    assert circle["found"]
    lam_s = rep.details["circle_lambda"]
    r_star = math.sqrt((lam_s - 1.0) * 4.0 * math.pi / 3.0)
    assert circle["radius_mean"] == pytest.approx(r_star, abs=1e-4)


def test_dichotomy_sinx_global_static():
    cfg = dataclasses.replace(CFG, max_steps=400)
    rep = m2_dichotomy(sinx_spec(), 1, cfg)
    assert rep.classification == GLOBAL_STATIC
    assert rep.chi == 0
    assert rep.K_index_left == 1 and rep.K_index_right == 1
    assert rep.local_branch == {"right": True, "left": True}
    assert rep.details["two_solution_counts"] == {"right": 1, "left": 1}
    assert rep.details["trichotomy"]["case"] in (
        "unbounded", "trivial_reconnect", "loop", "inconclusive(budget)")


def test_dichotomy_requires_double_eigenvalue():
    with pytest.raises(ValidationError):
        m2_dichotomy(cubic_spec(), 0, CFG)


def test_reduced_zeros_match_transcritical_root():
    rf = reduce_at(sinx_spec(), 1)
    lam = 1.02
    zeros = reduced_zeros(rf, lam, 0.15, CFG)
    assert len(zeros) == 1
    expected = -4.0 * SQRT_PI * (lam - 1.0) / 3.0
    assert zeros[0][0] == pytest.approx(expected, abs=2e-4)
    assert abs(zeros[0][1]) < 1e-8
