import math

import numpy as np
import pytest

from eqindex.config import RunConfig
from eqindex.degree import (CoefRegion, PlanarRegion, conjugacy_invariance_check,
                            galerkin_equilibrium_index, index_continuation_check,
                            planar_index, reduction_identity_check,
                            winding_degree, zero_count_degree)
from eqindex.errors import (BoundaryZeroError, DegenerateZeroError,
                            ValidationError)
from eqindex.fourier import FourierVector
from eqindex.manifold import reduce_at
from eqindex.problem import ProblemSpec
from eqindex.rng import Lcg

CFG = RunConfig()


def sinx_spec(N=10):
    return ProblemSpec(a=FourierVector.from_terms(N, sin={1: 1.0}),
                       h_terms=(), N=N)


def cubic_spec(N=10):
    return ProblemSpec(a=FourierVector.zero(N),
                       h_terms=((3, FourierVector.from_terms(N, const=-1.0)),),
                       N=N)


def field(fx, fy):
    return lambda p: np.stack([fx(p[..., 0], p[..., 1]),
                               fy(p[..., 0], p[..., 1])], axis=-1)


IDENT = field(lambda x, y: x, lambda x, y: y)
SADDLE = field(lambda x, y: x, lambda x, y: -y)
RIGHT = field(lambda x, y: x * x + y * y, lambda x, y: 0.0 * x)


def test_winding_examples():
    disk = PlanarRegion.disk(radius=1.0)
    assert winding_degree(IDENT, disk) == 1
    assert winding_degree(SADDLE, disk) == -1
    assert winding_degree(RIGHT, disk) == 0


def test_winding_boundary_zero_raises():
    f = field(lambda x, y: x - 1.0, lambda x, y: y)
    with pytest.raises(BoundaryZeroError):
        winding_degree(f, PlanarRegion.disk(radius=1.0))


def test_winding_additive_over_annulus():
    zsq = field(lambda x, y: x * x - y * y, lambda x, y: 2 * x * y)
    for f, center in ((IDENT, (0.3, 0.1)), (zsq, (0.0, 0.0))):
        outer = PlanarRegion.disk(center=center, radius=1.0)
        inner = PlanarRegion.disk(center=center, radius=0.4)
        annulus = PlanarRegion.annulus(center=center, r_in=0.4, r_out=1.0)
        assert winding_degree(f, annulus) == \
            winding_degree(f, outer) - winding_degree(f, inner)


def test_zero_count_identity_field():
    rep = zero_count_degree(IDENT, PlanarRegion.disk(radius=1.0))
    assert rep.index == 1
    assert len(rep.witnesses) == 1
    assert np.allclose(rep.witnesses[0]["point"], [0.0, 0.0], atol=1e-9)


def test_zero_count_two_zeros_cancel():
    eps = 0.3
    f = field(lambda x, y: x * x - eps * eps, lambda x, y: y)
    rep = zero_count_degree(f, PlanarRegion.disk(radius=1.0))
    assert rep.index == 0
    pts = sorted(w["point"][0] for w in rep.witnesses)
    assert pts == [pytest.approx(-eps, abs=1e-8), pytest.approx(eps, abs=1e-8)]
    signs = {round(w["point"][0], 3): w["sign"] for w in rep.witnesses}
    assert signs[-eps] == -1 and signs[eps] == 1


def test_zero_count_degenerate_raises():
    f = field(lambda x, y: x * x, lambda x, y: y)
    with pytest.raises(DegenerateZeroError):
        zero_count_degree(f, PlanarRegion.disk(radius=1.0))


def test_methods_agree_on_random_cubic_fields():
    # module-level sample of the degree-oracle equivalence (the acceptance
    # suite runs the full 200)
    rng = Lcg(20240601)
    checked = 0
    while checked < 40:
        coefs = np.array([rng.uniform(-1.0, 1.0) for _ in range(20)])
        f = _poly_field(coefs)
        center = (rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3))
        radius = rng.uniform(0.4, 1.4)
        region = PlanarRegion.disk(center=center, radius=radius)
        try:
            rep = planar_index(f, region, method="both")
        except (BoundaryZeroError, DegenerateZeroError):
            continue
        checked += 1
        assert rep.method == "both"


def _poly_field(c):
    def fx(x, y):
        return (c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y
                + c[5] * y * y + c[6] * x**3 + c[7] * x * x * y
                + c[8] * x * y * y + c[9] * y**3)

    def fy(x, y):
        return (c[10] + c[11] * x + c[12] * y + c[13] * x * x + c[14] * x * y
                + c[15] * y * y + c[16] * x**3 + c[17] * x * x * y
                + c[18] * x * y * y + c[19] * y**3)

    return field(fx, fy)


def test_polygon_region():
    square = PlanarRegion.polygon([(-1, -1), (1, -1), (1, 1), (-1, 1)])
    assert winding_degree(IDENT, square) == 1
    with pytest.raises(ValidationError):
        PlanarRegion.polygon([(-1, -1), (-1, 1), (1, 1), (1, -1)])  # clockwise


def test_trivial_index_closed_form():
    # only the zero equilibrium in a small ball: index = sign prod(n^2 - lam)
    spec = sinx_spec()
    for lam in (0.5, 2.0, 5.5):
        expected = int(np.sign(np.prod(
            [n * n - lam for n in range(spec.N + 1)]
            + [n * n - lam for n in range(1, spec.N + 1)])))
        rep = galerkin_equilibrium_index(spec, lam, CoefRegion.ball(0.05), CFG)
        assert rep.index == expected


def test_ball_index_constant_through_crossing():
    # {0, q_lambda} both sit inside the ball; the index is 0 on both sides
    spec = sinx_spec()
    for lam in (0.9, 1.1):
        rep = galerkin_equilibrium_index(spec, lam, CoefRegion.ball(0.5), CFG)
        assert rep.index == 0
        assert len(rep.witnesses) == 2


def test_rotation_circle_is_degenerate():
    spec = cubic_spec()
    rf = reduce_at(spec, 1)
    seeds = [rf.manifold.lift(np.array([0.4576, 0.0]))]
    with pytest.raises(DegenerateZeroError):
        galerkin_equilibrium_index(spec, 1.05, CoefRegion.shell(0.2, 0.9),
                                   CFG, seeds=seeds)


def test_conjugacy_invariance():
    spec = sinx_spec(N=6)
    rf = reduce_at(spec, 1)
    seeds = [rf.manifold.lift(np.array([-4 * math.sqrt(math.pi) * 0.05 / 3, 0.0]))]
    region = CoefRegion.ball(0.4)
    m = spec.dim
    assert conjugacy_invariance_check(spec, 1.05, np.eye(m), region, CFG,
                                      seeds=seeds)["equal"]
    rng = np.random.default_rng(5)
    Q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    assert conjugacy_invariance_check(spec, 1.05, Q, region, CFG,
                                      seeds=seeds)["equal"]
    D = np.eye(m)
    D[0, 0] = 2.0
    assert conjugacy_invariance_check(spec, 1.05, D, region, CFG,
                                      seeds=seeds)["equal"]


def test_conjugacy_rejects_ill_conditioned():
    spec = sinx_spec(N=4)
    T = np.eye(spec.dim)
    T[0, 0] = 1e9
    with pytest.raises(ValidationError):
        conjugacy_invariance_check(spec, 0.5, T, CoefRegion.ball(0.1), CFG)


def test_index_continuation_no_eigenvalue_inside():
    spec = sinx_spec(N=8)
    res = index_continuation_check(spec, (0.2, 0.8), CoefRegion.ball(0.05), 7, CFG)
    assert res["constant"]
    assert set(res["indices"]) == {-1}


def test_index_continuation_across_crossing():
    spec = sinx_spec(N=8)
    lams = (0.9, 1.12)  # avoids lambda0 itself where q merges with 0
    res = index_continuation_check(spec, lams, CoefRegion.ball(0.5), 5, CFG)
    assert res["constant"]
    assert set(res["indices"]) == {0}


def test_index_continuation_empty_region():
    spec = sinx_spec(N=8)
    res = index_continuation_check(spec, (0.3, 0.6), CoefRegion.shell(0.03, 0.06),
                                   4, CFG)
    assert res["constant"] and set(res["indices"]) == {0}


def test_reduction_identity_both_sides():
    spec = sinx_spec()
    for lam in (0.97, 1.03):
        res = reduction_identity_check(spec, 1, lam, 0.01, 0.3, CFG)
        assert res["equal"]
        assert res["lhs"] == res["rhs"] == 1
        assert res["planar_degree"] == -1 and res["m1"] == 1


def test_reduction_identity_trivial_only_shell():
    # a shell holding no equilibria: both sides vanish
    spec = sinx_spec()
    res = reduction_identity_check(spec, 1, 1.01, 0.12, 0.3, CFG)
    assert res["equal"] and res["lhs"] == 0
