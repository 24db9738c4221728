import json
import math

import numpy as np
import pytest

from eqindex.errors import ValidationError
from eqindex.fourier import FourierVector
from eqindex.problem import (ProblemSpec, galerkin_jacobian, galerkin_residual,
                             nonlinearity)

from oracles import quad_grid, quad_integral, quad_project, synthesize

SQRT_PI = math.sqrt(math.pi)


def sinx_spec(N=8):
    return ProblemSpec(a=FourierVector.from_terms(N, sin={1: 1.0}),
                       h_terms=(), N=N)


def cubic_spec(N=8):
    return ProblemSpec(a=FourierVector.zero(N),
                       h_terms=((3, FourierVector.from_terms(N, const=-1.0)),),
                       N=N)


def test_trivial_equilibrium_line():
    spec = sinx_spec()
    for lam in (-2.0, 0.0, 5.3):
        assert galerkin_residual(spec, FourierVector.zero(spec.N), lam).norm() == 0.0


def test_pure_cubic_residual():
    # a = 0, c3 = -1: F(eps e1, 1) = P_N[eps^3 sin^3 x / pi^{3/2}]
    spec = cubic_spec()
    eps = 0.17
    u = eps * FourierVector.basis(spec.N, 1, "sin")
    F = galerkin_residual(spec, u, 1.0)
    x, w = quad_grid(spec.N)
    vals = (eps * np.sin(x) / SQRT_PI) ** 3
    oracle = quad_project(vals, spec.N, x, w)
    assert np.allclose(F.coeffs, oracle, atol=1e-13)
    # symbolic: sin^3 = (3 sin x - sin 3x)/4
    assert F.coeffs[1] == pytest.approx(eps**3 * 3.0 / (4.0 * math.pi**1.5) * SQRT_PI,
                                        abs=1e-15)
    assert F.coeffs[5] == pytest.approx(-eps**3 / (4.0 * math.pi**1.5) * SQRT_PI,
                                        abs=1e-15)


def test_sinx_residual_mode3():
    # a = sin x, u = e1, lambda = 1: the linear part cancels on wavenumber 1
    # and the projected nonlinearity has sin-3x component -sqrt(pi)/(4 pi)
    # flipped by the residual's minus sign
    spec = sinx_spec()
    u = FourierVector.basis(spec.N, 1, "sin")
    F = galerkin_residual(spec, u, 1.0)
    x, w = quad_grid(spec.N)
    vals = np.sin(x) * (np.sin(x) / SQRT_PI) ** 2
    oracle = -quad_project(vals, spec.N, x, w)
    assert np.allclose(F.coeffs, oracle, atol=1e-13)
    assert F.coeffs[5] == pytest.approx(SQRT_PI / (4.0 * math.pi), abs=1e-14)


def test_jacobian_diagonal_at_zero():
    spec = sinx_spec()
    J = galerkin_jacobian(spec, FourierVector.zero(spec.N), 1.0)
    expected = np.diag([n * n - 1.0 for n in
                        [0] + [m for n in range(1, spec.N + 1) for m in (n, n)]])
    assert np.array_equal(J, expected)


def test_jacobian_finite_difference_slope():
    # central differences converge with slope 2 in eps (needs a cubic term;
    # for a purely quadratic residual they are exact)
    spec = ProblemSpec(
        a=FourierVector.from_terms(8, sin={1: 1.0}),
        h_terms=((3, FourierVector.from_terms(8, const=-1.0)),), N=8)
    rng = np.random.default_rng(2)
    u = FourierVector(0.2 * rng.standard_normal(spec.dim))
    v = rng.standard_normal(spec.dim)
    J = galerkin_jacobian(spec, u, 0.7)
    errs = []
    eps_list = [1e-2, 1e-3]
    for eps in eps_list:
        fd = (galerkin_residual(spec, FourierVector(u.coeffs + eps * v), 0.7).coeffs
              - galerkin_residual(spec, FourierVector(u.coeffs - eps * v), 0.7).coeffs) / (2 * eps)
        errs.append(np.max(np.abs(fd - J @ v)))
    slope = np.log(errs[0] / errs[1]) / np.log(eps_list[0] / eps_list[1])
    assert slope == pytest.approx(2.0, abs=0.2)


def test_jacobian_exact_for_quadratic_nonlinearity():
    spec = sinx_spec()
    rng = np.random.default_rng(2)
    u = FourierVector(0.2 * rng.standard_normal(spec.dim))
    v = rng.standard_normal(spec.dim)
    J = galerkin_jacobian(spec, u, 0.7)
    eps = 1e-3
    fd = (galerkin_residual(spec, FourierVector(u.coeffs + eps * v), 0.7).coeffs
          - galerkin_residual(spec, FourierVector(u.coeffs - eps * v), 0.7).coeffs) / (2 * eps)
    assert np.max(np.abs(fd - J @ v)) < 1e-9


def test_jacobian_coupling_entry_against_quadrature():
    # entry coupling e0 and e1 for a = sin x at u = e1 equals the quadrature
    # of -2 a u e0 e1
    spec = sinx_spec()
    u = FourierVector.basis(spec.N, 1, "sin")
    J = galerkin_jacobian(spec, u, 1.0)
    x, w = quad_grid(spec.N)
    au = np.sin(x) * (np.sin(x) / SQRT_PI)
    e0 = np.full_like(x, 1.0 / math.sqrt(2 * math.pi))
    e1 = np.sin(x) / SQRT_PI
    expected = -2.0 * quad_integral(au * e0 * e1, w)
    assert J[0, 1] == pytest.approx(expected, abs=1e-12)
    assert J[1, 0] == pytest.approx(expected, abs=1e-12)


def test_nonlinearity_full_degree():
    spec = sinx_spec(N=4)
    u = FourierVector.from_terms(4, sin={4: 1.0})
    g = nonlinearity(spec, u)      # a u^2 has wavenumbers up to 9
    assert g.N >= 9
    x, w = quad_grid(12)
    vals = np.sin(x) * synthesize(u.coeffs, x) ** 2
    oracle = quad_project(vals, g.N, x, w)
    assert np.allclose(g.coeffs, oracle, atol=1e-12)


def test_h_power_validation():
    N = 4
    with pytest.raises(ValidationError):
        ProblemSpec(a=FourierVector.zero(N),
                    h_terms=((2, FourierVector.from_terms(N, const=1.0)),), N=N)
    with pytest.raises(ValidationError):
        ProblemSpec(a=FourierVector.zero(N),
                    h_terms=((3, FourierVector.zero(N)), (3, FourierVector.zero(N))),
                    N=N)


def test_json_roundtrip(tmp_path):
    spec = ProblemSpec(
        a=FourierVector.from_terms(6, const=0.25, sin={1: 1.0, 3: -0.5}),
        h_terms=((3, FourierVector.from_terms(6, const=-1.0)),
                 (5, FourierVector.from_terms(6, cos={2: 0.125}))),
        N=6)
    path = tmp_path / "prob.json"
    path.write_text(json.dumps(spec.to_dict()), encoding="utf-8")
    back = ProblemSpec.from_json(str(path))
    assert back.N == spec.N
    assert np.allclose(back.a.coeffs, spec.a.coeffs, atol=1e-15)
    assert [p for p, _ in back.h_terms] == [3, 5]
    for (_, c1), (_, c2) in zip(back.h_terms, spec.h_terms):
        assert np.allclose(c1.coeffs, c2.coeffs, atol=1e-15)


def test_json_missing_arrays_mean_zero(tmp_path):
    path = tmp_path / "p.json"
    path.write_text('{"N": 3, "a": {"sin": [2.0]}}', encoding="utf-8")
    spec = ProblemSpec.from_json(str(path))
    assert spec.a.coeffs[1] == pytest.approx(2.0 * SQRT_PI)
    assert spec.h_terms == ()


def test_json_validation_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("not json", encoding="utf-8")
    with pytest.raises(ValidationError):
        ProblemSpec.from_json(str(bad))
    bad.write_text('{"a": {}}', encoding="utf-8")
    with pytest.raises(ValidationError):
        ProblemSpec.from_json(str(bad))
    bad.write_text('{"N": 2, "h": [{"p": 3, "c": {"sin": [1, 2, 3]}}]}',
                   encoding="utf-8")
    with pytest.raises(ValidationError):
        ProblemSpec.from_json(str(bad))


def test_rotation_symmetry_flag():
    assert cubic_spec().is_rotation_symmetric()
    assert not sinx_spec().is_rotation_symmetric()
