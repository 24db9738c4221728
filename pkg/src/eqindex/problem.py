"""Problem definition and the Galerkin residual / Jacobian.

A problem is the periodic equation

    -u'' = lambda * u + a(x) * u^2 + h(x, u),      h(x, u) = sum_p c_p(x) u^p

with every power p >= 3, so the quadratic coefficient a carries the whole
second-order structure at u = 0.  Stationary states of the truncated system
are zeros of

    F(u, lambda) = A u - lambda u - P_N [ a u^2 + sum_p c_p u^p ]

where P_N drops wavenumbers above the truncation.  Products inside the
bracket are expanded exactly; truncation happens once, at the end.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fourier import (FourierVector, SQRT_2PI, apply_A, multiplication_matrix,
                      power_full, product_full, wavenumbers)


@dataclass(frozen=True)
class ProblemSpec:
    a: FourierVector
    h_terms: tuple[tuple[int, FourierVector], ...]
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValidationError("truncation must be at least 1")
        if self.a.N > self.N:
            raise ValidationError("quadratic coefficient exceeds truncation")
        seen = set()
        for p, c in self.h_terms:
            if p < 3:
                raise ValidationError(f"h term with power {p} < 3 breaks h = O(u^3)")
            if p in seen:
                raise ValidationError(f"duplicate h power {p}")
            seen.add(p)
            if c.N > self.N:
                raise ValidationError("h coefficient exceeds truncation")
        object.__setattr__(self, "a", self.a.pad_to(self.N))
        object.__setattr__(
            self, "h_terms",
            tuple(sorted(((p, c.pad_to(self.N)) for p, c in self.h_terms))))

    @property
    def dim(self) -> int:
        return 2 * self.N + 1

    def is_rotation_symmetric(self) -> bool:
        """True when the problem commutes with all x-translations.

        That happens exactly when a = 0 and every c_p is constant in x, in
        which case nontrivial equilibria come in full circles and Newton on
        isolated zeros is the wrong tool.
        """
        if np.any(self.a.coeffs != 0.0):
            return False
        for _, c in self.h_terms:
            if np.any(c.coeffs[1:] != 0.0):
                return False
        return True

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        return {"N": self.N, "a": _vec_to_dict(self.a),
                "h": [{"p": p, "c": _vec_to_dict(c)} for p, c in self.h_terms]}

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemSpec":
        if not isinstance(data, dict):
            raise ValidationError("problem document must be a JSON object")
        try:
            N = int(data["N"])
        except (KeyError, TypeError, ValueError):
            raise ValidationError("problem document needs an integer field N")
        a = _vec_from_dict(data.get("a", {}), N)
        terms = []
        for item in data.get("h", []):
            try:
                p = int(item["p"])
            except (KeyError, TypeError, ValueError):
                raise ValidationError("each h term needs an integer power p")
            terms.append((p, _vec_from_dict(item.get("c", {}), N)))
        return cls(a=a, h_terms=tuple(terms), N=N)

    @classmethod
    def from_json(cls, path: str) -> "ProblemSpec":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"invalid JSON in {path}: {exc}")
        return cls.from_dict(data)


def _vec_to_dict(v: FourierVector) -> dict:
    sin = [float(v.coeffs[2 * n - 1] / np.sqrt(np.pi)) for n in range(1, v.N + 1)]
    cos = [float(v.coeffs[2 * n] / np.sqrt(np.pi)) for n in range(1, v.N + 1)]
    while sin and sin[-1] == 0.0:
        sin.pop()
    while cos and cos[-1] == 0.0:
        cos.pop()
    return {"const": float(v.coeffs[0] / SQRT_2PI), "sin": sin, "cos": cos}


def _vec_from_dict(data: dict, N: int) -> FourierVector:
    if not isinstance(data, dict):
        raise ValidationError("coefficient entries must be JSON objects")
    sin = data.get("sin", []) or []
    cos = data.get("cos", []) or []
    if len(sin) > N or len(cos) > N:
        raise ValidationError("coefficient arrays exceed the truncation N")
    return FourierVector.from_terms(
        N, const=float(data.get("const", 0.0)),
        sin={n + 1: float(b) for n, b in enumerate(sin)},
        cos={n + 1: float(a) for n, a in enumerate(cos)})


# -- residual and Jacobian ---------------------------------------------------

def nonlinearity(spec: ProblemSpec, u: FourierVector) -> FourierVector:
    """g(u) = a u^2 + h(x, u), exact up to its full wavenumber content."""
    degree = spec.N + 2 * u.N
    for p, _ in spec.h_terms:
        degree = max(degree, spec.N + p * u.N)
    total = FourierVector.zero(degree)
    if np.any(spec.a.coeffs != 0.0):
        total = total + product_full(spec.a, power_full(u, 2)).pad_to(degree)
    for p, c in spec.h_terms:
        if np.any(c.coeffs != 0.0):
            total = total + product_full(c, power_full(u, p)).pad_to(degree)
    return total


def galerkin_residual(spec: ProblemSpec, u: FourierVector, lam: float) -> FourierVector:
    u = u.pad_to(spec.N) if u.N < spec.N else u.truncate(spec.N)
    linear = apply_A(u) - lam * u
    return linear - nonlinearity(spec, u).truncate(spec.N)


def galerkin_jacobian(spec: ProblemSpec, u: FourierVector, lam: float) -> np.ndarray:
    """dF/du as a symmetric (2N+1) x (2N+1) matrix.

    The derivative of the bracket is multiplication by
    w = 2 a u + sum_p p c_p u^{p-1}; w is formed exactly up to wavenumber 2N,
    which is all the Galerkin matrix of a multiplication operator consumes.
    """
    u = u.pad_to(spec.N) if u.N < spec.N else u.truncate(spec.N)
    N = spec.N
    degree = 2 * N
    w = FourierVector.zero(degree)
    if np.any(spec.a.coeffs != 0.0):
        w = w + (2.0 * product_full(spec.a, u)).truncate(degree)
    for p, c in spec.h_terms:
        if np.any(c.coeffs != 0.0):
            w = w + (float(p) * product_full(c, power_full(u, p - 1))).truncate(degree)
    diag = wavenumbers(N).astype(np.float64) ** 2 - lam
    return np.diag(diag) - multiplication_matrix(w, N)


def residual_norm(spec: ProblemSpec, u: FourierVector, lam: float) -> float:
    return galerkin_residual(spec, u, lam).norm()
