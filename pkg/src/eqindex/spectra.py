"""Eigenstructure of linearizations: band splitting and spectral projections.

The linearizations arising here are symmetric (the multiplication operator
is self-adjoint), so the spectrum is real and the eigensolver of choice for
these small dense matrices is cyclic Jacobi with a threshold sweep.

A split sorts the spectrum into three bands around a gap width delta:

    band 1:  mu <= -2*delta      (unstable flow directions, m1 of them)
    band 2:  |mu| <= delta       (center directions, m2 of them)
    band 3:  mu >= +2*delta      (stable flow directions)

delta is manufactured as large as the spectrum allows; if an eigenvalue
falls between the bands the split fails loudly rather than guessing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, SplitError, ValidationError
from .fourier import FourierVector
from .problem import ProblemSpec, galerkin_jacobian


def eigendecompose_symmetric(M: np.ndarray, sweep_tol: float = 1e-12,
                             symmetry_tol: float = 1e-10):
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Returns eigenvalues sorted ascending and the matching orthonormal
    eigenvector columns.  Sweeps run until the off-diagonal Frobenius norm
    drops below sweep_tol * ||M||_F.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(M))))
    if float(np.max(np.abs(M - M.T))) > symmetry_tol * scale:
        raise ValidationError("matrix is not symmetric to tolerance")

    m = M.shape[0]
    A = 0.5 * (M + M.T)
    V = np.eye(m)
    norm = np.linalg.norm(A)
    if norm == 0.0:
        return np.zeros(m), V

    def offdiag(B):
        return np.sqrt(max(0.0, np.linalg.norm(B) ** 2 - np.sum(np.diag(B) ** 2)))

    max_sweeps = 60
    for sweep in range(max_sweeps):
        off = offdiag(A)
        if off <= sweep_tol * norm:
            break
        threshold = off / m  # classical threshold strategy
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = A[p, q]
                if abs(apq) <= threshold * 1e-3:
                    continue
                app, aqq = A[p, p], A[q, q]
                theta = 0.5 * (aqq - app) / apq
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) \
                    if theta != 0.0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * A[:, p] - s * A[:, q]
                rot_q = s * A[:, p] + c * A[:, q]
                A[:, p], A[:, q] = rot_p, rot_q
                rot_p = c * A[p, :] - s * A[q, :]
                rot_q = s * A[p, :] + c * A[q, :]
                A[p, :], A[q, :] = rot_p, rot_q
                A[p, q] = A[q, p] = 0.0
                rot_p = c * V[:, p] - s * V[:, q]
                rot_q = s * V[:, p] + c * V[:, q]
                V[:, p], V[:, q] = rot_p, rot_q

    eigs = np.diag(A).copy()
    order = np.argsort(eigs, kind="stable")
    eigs = eigs[order]
    V = V[:, order]
    _orthonormalize_clusters(eigs, V)
    return eigs, V


def _orthonormalize_clusters(eigs: np.ndarray, V: np.ndarray,
                             cluster_tol: float = 1e-8) -> None:
    """Gram-Schmidt inside eigenvalue clusters (any orthonormal cluster basis
    is acceptable downstream, only projections are consumed)."""
    m = eigs.size
    start = 0
    while start < m:
        stop = start + 1
        while stop < m and abs(eigs[stop] - eigs[stop - 1]) < cluster_tol:
            stop += 1
        if stop - start > 1:
            block = V[:, start:stop]
            for j in range(block.shape[1]):
                v = block[:, j]
                for i in range(j):
                    v = v - np.dot(block[:, i], v) * block[:, i]
                nrm = np.linalg.norm(v)
                if nrm > 0.0:
                    block[:, j] = v / nrm
            V[:, start:stop] = block
        start = stop


@dataclass(frozen=True)
class SpectralSplit:
    eigenvalues: np.ndarray
    basis: np.ndarray
    delta: float
    sigma1: tuple[int, ...]
    sigma2: tuple[int, ...]
    sigma3: tuple[int, ...]

    @property
    def m1(self) -> int:
        return len(self.sigma1)

    @property
    def m2(self) -> int:
        return len(self.sigma2)

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "delta": float(self.delta),
            "sigma1": list(self.sigma1),
            "sigma2": list(self.sigma2),
            "sigma3": list(self.sigma3),
            "m1": self.m1,
            "m2": self.m2,
        }


@dataclass(frozen=True)
class ProjectionSet:
    P1: np.ndarray
    P2: np.ndarray
    P3: np.ndarray

    def all(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.P1, self.P2, self.P3


def split_spectrum(eigs: np.ndarray, vecs: np.ndarray,
                   delta_hint: float | None = None,
                   tol_center: float = 1e-8) -> SpectralSplit:
    """Partition an eigendecomposition into the three bands.

    Without a hint, delta = d/3 with d the smallest eigenvalue magnitude
    above tol_center; by construction that is the largest always-safe gap
    width.  An explicit delta_hint is taken as the requested family-uniform
    gap width and validated: an eigenvalue falling strictly between the
    bands raises SplitError.
    """
    eigs = np.asarray(eigs, dtype=np.float64)
    order = np.argsort(eigs, kind="stable")
    eigs = eigs[order]
    vecs = np.asarray(vecs, dtype=np.float64)[:, order]

    mags = np.abs(eigs)
    nonzero = mags[mags > tol_center]
    if delta_hint is not None:
        delta = float(delta_hint)
    elif nonzero.size:
        delta = float(nonzero.min()) / 3.0
    else:
        delta = 1.0

    s1, s2, s3 = [], [], []
    for i, mu in enumerate(eigs):
        if abs(mu) <= delta:
            s2.append(i)
        elif mu <= -2.0 * delta:
            s1.append(i)
        elif mu >= 2.0 * delta:
            s3.append(i)
        else:
            raise SplitError(
                f"eigenvalue {mu} falls between the bands for delta={delta}",
                eigenvalue=float(mu))
    return SpectralSplit(eigenvalues=eigs, basis=vecs, delta=delta,
                         sigma1=tuple(s1), sigma2=tuple(s2), sigma3=tuple(s3))


def family_split(eigs: np.ndarray, vecs: np.ndarray,
                 reference: SpectralSplit) -> SpectralSplit:
    """Band assignment for a nearby member of a parameter family.

    Along a family the band dimensions stay constant while individual
    eigenvalues drift (center ones typically cross zero), so each eigenvalue
    is assigned to the band of the nearest reference eigenvalue.  Fails when
    the resulting band sizes disagree with the reference, which signals the
    parameter step left the family's validity interval.
    """
    eigs = np.asarray(eigs, dtype=np.float64)
    order = np.argsort(eigs, kind="stable")
    eigs = eigs[order]
    vecs = np.asarray(vecs, dtype=np.float64)[:, order]
    if eigs.size != reference.eigenvalues.size:
        raise ValidationError("family member has a different dimension")

    band_of_ref = np.empty(reference.eigenvalues.size, dtype=np.int64)
    for b, idx in enumerate((reference.sigma1, reference.sigma2, reference.sigma3)):
        for i in idx:
            band_of_ref[i] = b
    # sorted spectra of nearby symmetric matrices pair up index-by-index
    s1, s2, s3 = [], [], []
    for i in range(eigs.size):
        (s1, s2, s3)[band_of_ref[i]].append(i)
    split = SpectralSplit(eigenvalues=eigs, basis=vecs, delta=reference.delta,
                          sigma1=tuple(s1), sigma2=tuple(s2), sigma3=tuple(s3))
    if split.m1 != reference.m1 or split.m2 != reference.m2:
        raise SplitError("band sizes changed along the family")
    return split


def family_split_linearization(spec: ProblemSpec, u: FourierVector, lam: float,
                               reference: SpectralSplit) -> SpectralSplit:
    eigs, vecs = eigendecompose_symmetric(galerkin_jacobian(spec, u, lam))
    return family_split(eigs, vecs, reference)


def projections(split: SpectralSplit) -> ProjectionSet:
    def proj(idx):
        if not idx:
            return np.zeros((split.basis.shape[0],) * 2)
        B = split.basis[:, list(idx)]
        P = B @ B.T
        return 0.5 * (P + P.T)

    return ProjectionSet(proj(split.sigma1), proj(split.sigma2), proj(split.sigma3))


def split_linearization(spec: ProblemSpec, u: FourierVector, lam: float,
                        delta_hint: float | None = None,
                        tol_center: float = 1e-8) -> SpectralSplit:
    eigs, vecs = eigendecompose_symmetric(galerkin_jacobian(spec, u, lam))
    return split_spectrum(eigs, vecs, delta_hint=delta_hint, tol_center=tol_center)


# -- transversal crossing ----------------------------------------------------

def crossing_check(spec: ProblemSpec, lam0: float, nu: float) -> dict:
    """Verify the center band of J(0, lambda) crosses zero at lam0.

    lam0 must be an eigenvalue n^2 of the operator.  At u = 0 the Jacobian is
    exactly diag(n^2 - lambda), so the m2 center eigenvalues equal
    lam0 - lambda + ...; sampled at the band edges they must be positive for
    lambda < lam0 and negative for lambda > lam0, i.e. the flow destabilizes
    in the center directions as lambda increases.
    """
    if nu <= 0:
        raise ValidationError("crossing width nu must be positive")
    k = int(round(np.sqrt(max(lam0, 0.0))))
    if abs(k * k - lam0) > 1e-12 or k > spec.N:
        raise ValidationError(
            f"lambda0={lam0} is not an eigenvalue n^2 with n <= N={spec.N}")
    m2 = 1 if k == 0 else 2

    def center_eigs(lam):
        eigs, _ = eigendecompose_symmetric(galerkin_jacobian(
            spec, FourierVector.zero(spec.N), lam))
        idx = np.argsort(np.abs(eigs - (lam0 - lam)))[:m2]
        return eigs[idx]

    below = center_eigs(lam0 - nu)
    above = center_eigs(lam0 + nu)
    split0 = split_linearization(spec, FourierVector.zero(spec.N), lam0)
    satisfied = bool(np.all(below > 0.0) and np.all(above < 0.0))
    return {"satisfied": satisfied, "m1": split0.m1, "m2": split0.m2,
            "lambda0": float(lam0), "center_below": [float(x) for x in below],
            "center_above": [float(x) for x in above]}


# -- subspace-aligning isomorphism -------------------------------------------

def subspace_align(base: ProjectionSet, other: ProjectionSet,
                   tol: float = 0.5) -> tuple[np.ndarray, float]:
    """Isomorphism T with T * (band spaces of `other`) = band spaces of `base`.

    T = sum_j P_base^j @ P_other^j.  Requires every projection distance
    ||P_other^i - P_base^i|| (spectral norm) to stay below 1/2; the largest
    distance is returned as the alignment margin.  T reduces to the identity
    when the projections coincide.
    """
    margins = []
    for Pb, Po in zip(base.all(), other.all()):
        margins.append(float(np.linalg.norm(Po - Pb, ord=2)))
    margin = max(margins)
    if margin >= tol:
        raise AlignmentError(
            f"projection distance {margin:.3g} >= {tol}; shrink the parameter step",
            margins=margins)
    T = sum(Pb @ Po for Pb, Po in zip(base.all(), other.all()))
    return T, margin
