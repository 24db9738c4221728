"""Trigonometric eigenbasis of -d^2/dx^2 on [-pi, pi] with periodic boundary.

Normalized basis functions, in the fixed coefficient order used by every
matrix in the package:

    index 0        e0(x)      = 1/sqrt(2*pi)
    index 2n-1     sin_n(x)   = sin(n*x)/sqrt(pi)      n = 1..N
    index 2n       cos_n(x)   = cos(n*x)/sqrt(pi)

so a truncation N holds m = 2N+1 coefficients ordered
[const, sin 1, cos 1, sin 2, cos 2, ...].  The basis is orthonormal in
L^2(-pi, pi), hence <u, v> = sum(u_i * v_i) and -u'' acts diagonally with
eigenvalue n^2 on wavenumber n.

Pointwise products are computed exactly by product-to-sum convolution of the
complex spectra; truncation happens only where an operation's contract says
it does.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ValidationError

SQRT_PI = np.sqrt(np.pi)
SQRT_2PI = np.sqrt(2.0 * np.pi)

CONST = "const"
SIN = "sin"
COS = "cos"


@dataclass(frozen=True)
class TrigMode:
    n: int
    parity: str

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError("wavenumber must be nonnegative")
        if self.n == 0 and self.parity != CONST:
            raise ValidationError("wavenumber 0 only carries the constant mode")
        if self.n > 0 and self.parity not in (SIN, COS):
            raise ValidationError("positive wavenumbers carry sin/cos modes")

    @property
    def eigenvalue(self) -> float:
        return float(self.n * self.n)

    def index(self) -> int:
        if self.parity == CONST:
            return 0
        return 2 * self.n - 1 if self.parity == SIN else 2 * self.n


def mode_of_index(i: int) -> TrigMode:
    if i == 0:
        return TrigMode(0, CONST)
    n = (i + 1) // 2
    return TrigMode(n, SIN if i % 2 == 1 else COS)


def wavenumbers(N: int) -> np.ndarray:
    """Array of wavenumbers per coefficient slot: [0, 1, 1, 2, 2, ...]."""
    out = np.empty(2 * N + 1, dtype=np.int64)
    out[0] = 0
    for n in range(1, N + 1):
        out[2 * n - 1] = n
        out[2 * n] = n
    return out


@dataclass(frozen=True, eq=False)
class FourierVector:
    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=np.float64)
        if arr.ndim != 1 or arr.size % 2 == 0:
            raise ValidationError("coefficient array must have odd length 2N+1")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def N(self) -> int:
        return (self.coeffs.size - 1) // 2

    @classmethod
    def zero(cls, N: int) -> "FourierVector":
        return cls(np.zeros(2 * N + 1))

    @classmethod
    def basis(cls, N: int, n: int, parity: str) -> "FourierVector":
        mode = TrigMode(n, parity)
        if n > N:
            raise ValidationError("basis wavenumber exceeds truncation")
        c = np.zeros(2 * N + 1)
        c[mode.index()] = 1.0
        return cls(c)

    @classmethod
    def from_terms(cls, N: int, const: float = 0.0,
                   sin: dict[int, float] | None = None,
                   cos: dict[int, float] | None = None) -> "FourierVector":
        """Build from raw function coefficients: const + sum b_n sin nx + a_n cos nx."""
        c = np.zeros(2 * N + 1)
        c[0] = const * SQRT_2PI
        for n, b in (sin or {}).items():
            c[2 * n - 1] = b * SQRT_PI
        for n, a in (cos or {}).items():
            c[2 * n] = a * SQRT_PI
        return cls(c)

    def copy_with(self, coeffs: np.ndarray) -> "FourierVector":
        return FourierVector(coeffs)

    def pad_to(self, N: int) -> "FourierVector":
        if N < self.N:
            raise ValidationError("pad target below current truncation")
        out = np.zeros(2 * N + 1)
        out[: self.coeffs.size] = self.coeffs
        return FourierVector(out)

    def truncate(self, N: int) -> "FourierVector":
        if N >= self.N:
            return self.pad_to(N)
        return FourierVector(self.coeffs[: 2 * N + 1].copy())

    def __add__(self, other: "FourierVector") -> "FourierVector":
        _check_same(self, other)
        return FourierVector(self.coeffs + other.coeffs)

    def __sub__(self, other: "FourierVector") -> "FourierVector":
        _check_same(self, other)
        return FourierVector(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "FourierVector":
        return FourierVector(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "FourierVector":
        return FourierVector(-self.coeffs)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Synthesize function values (used for CSV emission and seeding)."""
        x = np.asarray(x, dtype=np.float64)
        vals = np.full_like(x, self.coeffs[0] / SQRT_2PI)
        for n in range(1, self.N + 1):
            s, c = self.coeffs[2 * n - 1], self.coeffs[2 * n]
            if s != 0.0:
                vals = vals + (s / SQRT_PI) * np.sin(n * x)
            if c != 0.0:
                vals = vals + (c / SQRT_PI) * np.cos(n * x)
        return vals


def _check_same(u: FourierVector, v: FourierVector) -> None:
    if u.coeffs.size != v.coeffs.size:
        raise DimensionMismatchError(
            f"truncation mismatch: {u.N} vs {v.N}")


def inner_product(u: FourierVector, v: FourierVector) -> float:
    _check_same(u, v)
    return float(np.dot(u.coeffs, v.coeffs))


def apply_A(u: FourierVector) -> FourierVector:
    lam = wavenumbers(u.N).astype(np.float64) ** 2
    return FourierVector(u.coeffs * lam)


# -- exact trig products ----------------------------------------------------
#
# Internally a vector is expanded into its complex spectrum
#   u(x) = sum_{|n| <= N} c_n e^{inx},  c_{-n} = conj(c_n),
# products become convolutions, and the result is mapped back.  No rounding
# beyond float arithmetic enters; wavenumbers are only dropped when a caller
# truncates the result.

def _spectrum(u: FourierVector) -> np.ndarray:
    N = u.N
    spec = np.zeros(2 * N + 1, dtype=np.complex128)  # slot k holds wave k-N
    spec[N] = u.coeffs[0] / SQRT_2PI
    for n in range(1, N + 1):
        alpha = u.coeffs[2 * n] / SQRT_PI       # cos amplitude
        beta = u.coeffs[2 * n - 1] / SQRT_PI    # sin amplitude
        spec[N + n] = 0.5 * (alpha - 1j * beta)
        spec[N - n] = 0.5 * (alpha + 1j * beta)
    return spec


def _from_spectrum(spec: np.ndarray) -> FourierVector:
    size = spec.size
    N = (size - 1) // 2
    out = np.zeros(2 * N + 1)
    out[0] = spec[N].real * SQRT_2PI
    for n in range(1, N + 1):
        out[2 * n] = 2.0 * spec[N + n].real * SQRT_PI
        out[2 * n - 1] = -2.0 * spec[N + n].imag * SQRT_PI
    return FourierVector(out)


def product_full(u: FourierVector, v: FourierVector) -> FourierVector:
    """Exact pointwise product at truncation deg(u) + deg(v)."""
    spec = np.convolve(_spectrum(u), _spectrum(v))
    return _from_spectrum(spec)


def pointwise_product(u: FourierVector, v: FourierVector) -> FourierVector:
    """Galerkin product: exact product-to-sum expansion truncated back to N."""
    _check_same(u, v)
    return product_full(u, v).truncate(u.N)


def power_full(u: FourierVector, p: int) -> FourierVector:
    if p < 1:
        raise ValidationError("power must be >= 1")
    spec = _spectrum(u)
    acc = spec
    for _ in range(p - 1):
        acc = np.convolve(acc, spec)
    return _from_spectrum(acc)


# -- multiplication operator ------------------------------------------------

def _raw_arrays(w: FourierVector, degree: int) -> tuple[float, np.ndarray, np.ndarray]:
    """Raw function coefficients (A0, A[1..degree], B[1..degree]) of w."""
    A = np.zeros(degree + 1)
    B = np.zeros(degree + 1)
    top = min(degree, w.N)
    A0 = w.coeffs[0] / SQRT_2PI
    for n in range(1, top + 1):
        A[n] = w.coeffs[2 * n] / SQRT_PI
        B[n] = w.coeffs[2 * n - 1] / SQRT_PI
    return A0, A, B


def multiplication_matrix(w: FourierVector, N: int) -> np.ndarray:
    """Galerkin matrix of pointwise multiplication by w on truncation N.

    Entry (i, j) is the integral of w * basis_i * basis_j; the closed-form
    product-to-sum identities make the assembly exact and symmetric by
    construction.  w must carry its wavenumbers up to 2N (higher ones never
    contribute to entries at truncation N).
    """
    A0, A, B = _raw_arrays(w, 2 * N)
    Atil = A.copy()
    Atil[0] = 2.0 * A0
    m = 2 * N + 1
    M = np.zeros((m, m))

    ns = np.arange(1, N + 1)
    # const/const and const/(sin, cos)
    M[0, 0] = A0
    M[0, 2 * ns] = A[ns] / np.sqrt(2.0)
    M[2 * ns, 0] = M[0, 2 * ns]
    M[0, 2 * ns - 1] = B[ns] / np.sqrt(2.0)
    M[2 * ns - 1, 0] = M[0, 2 * ns - 1]

    mi = ns[:, None]
    nj = ns[None, :]
    diff = np.abs(mi - nj)
    tot = mi + nj
    # cos/cos, sin/sin
    cc = 0.5 * (Atil[diff] + Atil[tot])
    ss = 0.5 * (Atil[diff] - Atil[tot])
    # sin(m)/cos(n): sin m cos n = (sin(m+n) + sgn(m-n) sin|m-n|)/2
    sgn = np.sign(mi - nj)
    sc = 0.5 * (B[tot] + sgn * B[diff])

    M[np.ix_(2 * ns, 2 * ns)] = cc
    M[np.ix_(2 * ns - 1, 2 * ns - 1)] = ss
    M[np.ix_(2 * ns - 1, 2 * ns)] = sc
    M[np.ix_(2 * ns, 2 * ns - 1)] = sc.T
    return M
