"""Quadratic center-manifold reduction at a bifurcation eigenvalue.

At lambda0 = k^2 (k >= 1) the kernel of A - lambda0 is spanned by the
normalized pair e1 = sin(kx)/sqrt(pi), e2 = cos(kx)/sqrt(pi).  Writing
u1 = c1 e1 + c2 e2, the manifold is approximated to quadratic order by

    phi(u1) = c1^2 v1 + 2 c1 c2 v0 + c2^2 v2,

where the v_i solve L v_i = w_i on the orthogonal complement, L is the
diagonal operator n^2 - k^2 there, and the w_i are the complement parts of
a*e1^2, a*e1*e2, a*e2^2.  The reduced planar field is

    c_i' = (lambda - lambda0) c_i + <g(u1 + phi(u1)), e_i>,

whose quadratic part is the pair of forms B1, B2.  The reduction for the
simple eigenvalue k = 0 is the same construction one dimension down.

The reduced field is also compiled once into an exact bivariate polynomial
(the nonlinearity is polynomial in u, hence in (c1, c2)); integrators and
degree computations evaluate that polynomial, which is algebraically
identical to evaluating g spectrally at every call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OrderCheckFailure, ValidationError
from .fourier import (COS, SIN, CONST, FourierVector, inner_product,
                      product_full, power_full, wavenumbers)
from .problem import ProblemSpec, nonlinearity


@dataclass(frozen=True)
class QuadraticManifold:
    spec: ProblemSpec
    k: int
    lam0: float
    kernel: tuple[FourierVector, ...]       # (e1, e2) or (e0,)
    w: tuple[FourierVector, ...]            # (w1, w0, w2) or (w00,)
    v: tuple[FourierVector, ...]            # matching solutions of L v = w

    @property
    def kernel_dim(self) -> int:
        return len(self.kernel)

    def phi(self, c: np.ndarray) -> FourierVector:
        if self.kernel_dim == 1:
            return float(c[0] ** 2) * self.v[0]
        c1, c2 = float(c[0]), float(c[1])
        return c1 * c1 * self.v[0] + 2.0 * c1 * c2 * self.v[1] + c2 * c2 * self.v[2]

    def phi_prime(self, c: np.ndarray, d: np.ndarray) -> FourierVector:
        """Directional derivative of phi at c in kernel direction d (analytic)."""
        if self.kernel_dim == 1:
            return 2.0 * float(c[0]) * float(d[0]) * self.v[0]
        c1, c2 = float(c[0]), float(c[1])
        d1, d2 = float(d[0]), float(d[1])
        return (2.0 * c1 * d1) * self.v[0] \
            + 2.0 * (d1 * c2 + c1 * d2) * self.v[1] \
            + (2.0 * c2 * d2) * self.v[2]

    def lift(self, c: np.ndarray) -> FourierVector:
        u1 = sum((float(ci) * e for ci, e in zip(c, self.kernel)),
                 FourierVector.zero(self.spec.N))
        return u1 + self.phi(c)

    def kernel_components(self, u: FourierVector) -> np.ndarray:
        return np.array([inner_product(u.truncate(self.spec.N), e)
                         for e in self.kernel])


def quadratic_coefficients(spec: ProblemSpec, k: int) -> QuadraticManifold:
    if k < 0 or k > spec.N:
        raise ValidationError(f"kernel wavenumber k={k} outside 0..N={spec.N}")
    lam0 = float(k * k)
    N = spec.N
    if k == 0:
        kernel = (FourierVector.basis(N, 0, CONST),)
        pairs = [(kernel[0], kernel[0])]
    else:
        e1 = FourierVector.basis(N, k, SIN)
        e2 = FourierVector.basis(N, k, COS)
        kernel = (e1, e2)
        pairs = [(e1, e1), (e1, e2), (e2, e2)]

    lam_n = wavenumbers(N).astype(np.float64) ** 2
    ker_idx = [e.coeffs.argmax() for e in kernel]

    ws, vs = [], []
    for f, g in pairs:
        prod = product_full(spec.a, product_full(f, g)).truncate(N)
        wc = prod.coeffs.copy()
        wc[ker_idx] = 0.0                      # complement part only
        w = FourierVector(wc)
        denom = lam_n - lam0
        vc = np.zeros_like(wc)
        mask = np.abs(denom) > 1e-12
        vc[mask] = wc[mask] / denom[mask]      # diagonal solve on the complement
        ws.append(w)
        vs.append(FourierVector(vc))
    return QuadraticManifold(spec=spec, k=k, lam0=lam0,
                             kernel=kernel, w=tuple(ws), v=tuple(vs))


# -- compiled reduced field ---------------------------------------------------

class _VecPoly:
    """Polynomial in the kernel coordinates with Fourier-vector coefficients."""

    def __init__(self, terms: dict[tuple[int, ...], FourierVector]):
        self.terms = terms

    def multiply(self, other: "_VecPoly") -> "_VecPoly":
        out: dict[tuple[int, ...], FourierVector] = {}
        for ea, va in self.terms.items():
            for eb, vb in other.terms.items():
                key = tuple(x + y for x, y in zip(ea, eb))
                prod = product_full(va, vb)
                if key in out:
                    out[key] = out[key].pad_to(max(out[key].N, prod.N)) \
                        + prod.pad_to(max(out[key].N, prod.N))
                else:
                    out[key] = prod
        return _VecPoly(out)


@dataclass(frozen=True)
class ReducedField:
    """The center-manifold vector field in kernel coordinates.

    Evaluation uses the compiled polynomial; B1/B2 store the quadratic forms
    as symmetric kernel_dim x kernel_dim matrices.
    """
    manifold: QuadraticManifold
    B: tuple[np.ndarray, ...]
    exponents: np.ndarray        # (n_terms, kernel_dim)
    coefficients: np.ndarray     # (n_terms, kernel_dim)

    @property
    def lam0(self) -> float:
        return self.manifold.lam0

    @property
    def kernel_dim(self) -> int:
        return self.manifold.kernel_dim

    def __call__(self, points: np.ndarray, lam: float) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        powers = np.ones((pts.shape[0], self.exponents.shape[0]))
        for d in range(self.kernel_dim):
            powers *= pts[:, d:d + 1] ** self.exponents[None, :, d]
        out = powers @ self.coefficients
        out += (lam - self.lam0) * pts
        if np.asarray(points).ndim == 1:
            return out[0]
        return out

    def jacobian(self, points: np.ndarray, lam: float) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        n, dim = pts.shape
        J = np.zeros((n, dim, dim))
        for d in range(dim):
            exps = self.exponents.copy()
            fac = exps[:, d].astype(np.float64)
            keep = fac > 0
            exps = exps[keep]
            exps[:, d] -= 1
            coefs = self.coefficients[keep] * fac[keep, None]
            powers = np.ones((n, exps.shape[0]))
            for e in range(dim):
                powers *= pts[:, e:e + 1] ** exps[None, :, e]
            J[:, :, d] = powers @ coefs
        J += (lam - self.lam0) * np.eye(dim)[None, :, :]
        if np.asarray(points).ndim == 1:
            return J[0]
        return J

    def planar_field(self, lam: float):
        return lambda pts: self(pts, lam)

    def planar_jacobian(self, lam: float):
        return lambda pts: self.jacobian(pts, lam)

    def spectral_reference(self, c: np.ndarray, lam: float) -> np.ndarray:
        """Direct spectral evaluation (same algebra, used to cross-check the
        compiled polynomial)."""
        man = self.manifold
        u = man.lift(np.asarray(c, dtype=np.float64))
        g = nonlinearity(man.spec, u)
        comp = man.kernel_components(g)
        return (lam - man.lam0) * np.asarray(c, dtype=np.float64) + comp


def reduce_at(spec: ProblemSpec, k: int) -> ReducedField:
    man = quadratic_coefficients(spec, k)
    dim = man.kernel_dim
    zero = (0,) * dim
    # u(c) as a vector polynomial: kernel part plus the quadratic manifold map
    terms: dict[tuple[int, ...], FourierVector] = {}
    if dim == 1:
        terms[(1,)] = man.kernel[0]
        terms[(2,)] = man.v[0]
    else:
        terms[(1, 0)] = man.kernel[0]
        terms[(0, 1)] = man.kernel[1]
        terms[(2, 0)] = man.v[0]
        terms[(1, 1)] = 2.0 * man.v[1]
        terms[(0, 2)] = man.v[2]
    u_poly = _VecPoly(terms)

    a_poly = _VecPoly({zero: spec.a})
    powers: dict[int, _VecPoly] = {1: u_poly}
    max_p = max([2] + [p for p, _ in spec.h_terms])
    for p in range(2, max_p + 1):
        powers[p] = powers[p - 1].multiply(u_poly)

    g_terms: dict[tuple[int, ...], FourierVector] = {}

    def accumulate(poly: _VecPoly):
        for key, vec in poly.terms.items():
            if key in g_terms:
                top = max(g_terms[key].N, vec.N)
                g_terms[key] = g_terms[key].pad_to(top) + vec.pad_to(top)
            else:
                g_terms[key] = vec

    accumulate(a_poly.multiply(powers[2]))
    for p, c in spec.h_terms:
        accumulate(_VecPoly({zero: c}).multiply(powers[p]))

    ker_idx = [e.coeffs.argmax() for e in man.kernel]
    exps, coefs = [], []
    for key in sorted(g_terms):
        vec = g_terms[key]
        row = [float(vec.coeffs[i]) if i < vec.coeffs.size else 0.0
               for i in ker_idx]
        if any(r != 0.0 for r in row):
            exps.append(key)
            coefs.append(row)
    if not exps:
        exps = [zero]
        coefs = [[0.0] * dim]

    # quadratic forms from the pure kernel monomials
    B = []
    lookup = {tuple(e): np.array(c) for e, c in zip(exps, coefs)}
    if dim == 1:
        for i in range(1):
            B.append(np.array([[lookup.get((2,), np.zeros(1))[0]]]))
    else:
        q20 = lookup.get((2, 0), np.zeros(2))
        q11 = lookup.get((1, 1), np.zeros(2))
        q02 = lookup.get((0, 2), np.zeros(2))
        for i in range(2):
            B.append(np.array([[q20[i], 0.5 * q11[i]],
                               [0.5 * q11[i], q02[i]]]))

    return ReducedField(manifold=man, B=tuple(B),
                        exponents=np.array(exps, dtype=np.int64),
                        coefficients=np.array(coefs, dtype=np.float64))


def reduced_vector_field(rf: ReducedField, c1: float, c2: float,
                         lam: float) -> tuple[float, float]:
    if rf.kernel_dim != 2:
        raise ValidationError("planar evaluation needs a two-dimensional kernel")
    out = rf(np.array([c1, c2]), lam)
    return float(out[0]), float(out[1])


def quadratic_part(rf: ReducedField, c1: float, c2: float) -> tuple[float, float]:
    """The forms (B1, B2) alone, no manifold or higher-order feedback."""
    c = np.array([c1, c2])
    return tuple(float(c @ Bi @ c) for Bi in rf.B)


def bilinear_definiteness(rf: ReducedField, i: int, tol_def: float = 1e-9) -> dict:
    if i not in range(1, rf.kernel_dim + 1):
        raise ValidationError(f"component index {i} out of range")
    Bi = rf.B[i - 1]
    if Bi.shape == (1, 1):
        gamma = float(Bi[0, 0])
    else:
        tr, det = Bi[0, 0] + Bi[1, 1], Bi[0, 0] * Bi[1, 1] - Bi[0, 1] ** 2
        disc = math.sqrt(max(0.0, tr * tr / 4.0 - det))
        gamma = float(tr / 2.0 - disc)
    return {"definite": bool(gamma > tol_def), "gamma": gamma}


# -- remainder order ----------------------------------------------------------

def manifold_defect(man: QuadraticManifold, c: np.ndarray) -> FourierVector:
    """Invariance defect of the quadratic manifold map at kernel point c.

    Zero defect would mean phi parametrizes an exactly invariant manifold;
    for the quadratic approximation it decays with the cube of the radius.
    """
    spec = man.spec
    N = spec.N
    u = man.lift(c)
    g = nonlinearity(spec, u).truncate(N)
    gk = man.kernel_components(g)
    # kernel equation: u1' = P1 g  (L vanishes on the kernel)
    first = man.phi_prime(c, -gk)
    # complement equation: L phi - P2 g
    lam_n = wavenumbers(N).astype(np.float64) ** 2
    phi_vec = man.phi(c)
    lphi = FourierVector(phi_vec.coeffs * (lam_n - man.lam0))
    p2g = g.coeffs.copy()
    for e, comp in zip(man.kernel, gk):
        p2g = p2g - comp * e.coeffs
    second = lphi - FourierVector(p2g)
    return first - second


def residual_order_check(spec: ProblemSpec, k: int, radii, n_angles: int = 16,
                         required_slope: float = 2.9) -> dict:
    radii = [float(r) for r in radii]
    if any(r < 1e-5 for r in radii):
        raise ValidationError("radii below 1e-5 drown the remainder in roundoff")
    if sorted(radii, reverse=True) != radii:
        raise ValidationError("radii must be given in descending order")
    man = quadratic_coefficients(spec, k)
    dim = man.kernel_dim
    maxima = []
    for r in radii:
        worst = 0.0
        if dim == 1:
            samples = [np.array([r]), np.array([-r])]
        else:
            angles = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
            samples = [r * np.array([np.cos(t), np.sin(t)]) for t in angles]
        for c in samples:
            worst = max(worst, manifold_defect(man, c).norm())
        maxima.append(worst)

    floor = 1e-14
    if max(maxima) < floor:
        return {"slope": math.inf, "radii": radii, "defects": maxima,
                "converged": True}
    logs_r = np.log([r for r, m in zip(radii, maxima) if m > floor])
    logs_m = np.log([m for m in maxima if m > floor])
    if logs_r.size < 2:
        raise OrderCheckFailure("not enough resolvable radii", table=list(zip(radii, maxima)))
    slope = float(np.polyfit(logs_r, logs_m, 1)[0])
    result = {"slope": slope, "radii": radii, "defects": maxima, "converged": False}
    if slope < required_slope:
        raise OrderCheckFailure(
            f"remainder slope {slope:.3f} below {required_slope}",
            slope=slope, table=list(zip(radii, maxima)))
    return result
