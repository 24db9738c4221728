"""Bifurcating-set index formulas, branch continuation and classification.

The index of the set bifurcating from the trivial line at lambda0 = k^2 is
computed from the Euler number chi of the reduced flow's Conley index at
lambda0 together with the band dimensions (m1, m2):

    left  of lambda0:  (-1)^m1 * (chi - 1)
    right of lambda0:  (-1)^m1 * (chi - (-1)^m2)

and every formula value is cross-validated against an independently
computed shell index before being reported.

Branches of stationary solutions are continued by pseudo-arclength
predictor/corrector with a bordered Newton corrector.  Termination labels
realize the global alternatives: a branch either leaves the norm ball
R_max (unbounded), returns to the trivial line at another eigenvalue
(trivial reconnect), comes back to its starting point (loop), or runs out
of budget, which is reported honestly as inconclusive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .config import RunConfig, parallel_map
from .degree import (CoefRegion, PlanarRegion, _batched_newton, _dedup_points,
                     _full_newton, galerkin_equilibrium_index)
from .errors import (ConfirmationFailure, ConsistencyError,
                     DegenerateZeroError, ValidationError)
from .fourier import FourierVector, SIN
from .manifold import ReducedField, reduce_at
from .planar import (ATTRACTOR, REPELLER, NOT_ISOLATING, classify_block,
                     detect_invariant_circle)
from .problem import ProblemSpec, galerkin_jacobian, galerkin_residual
from .spectra import crossing_check, eigendecompose_symmetric, split_linearization

UNBOUNDED = "unbounded"
TRIVIAL_RECONNECT = "trivial_reconnect"
LOOP = "loop"
BUDGET = "budget"

ATTRACTOR_REPELLER = "attractor_repeller_bifurcation"
GLOBAL_STATIC = "global_static_bifurcation"
TWO_SOLUTION = "two_solution_neighborhood"


@dataclass(frozen=True)
class BranchPoint:
    u: FourierVector
    lam: float
    arclength: float
    tangent: np.ndarray
    stability: int

    @property
    def norm(self) -> float:
        return self.u.norm()


@dataclass
class Branch:
    origin: tuple[FourierVector, float]
    points: list[BranchPoint] = dataclass_field(default_factory=list)
    termination: str = BUDGET
    termination_data: dict = dataclass_field(default_factory=dict)
    events: list = dataclass_field(default_factory=list)

    def csv_rows(self, n_leading: int = 5):
        rows = []
        for p in self.points:
            head = [float(c) for c in p.u.coeffs[:n_leading]]
            rows.append([p.arclength, p.lam, p.norm] + head + [p.stability])
        return rows


def _stability_count(spec: ProblemSpec, u: FourierVector, lam: float) -> int:
    eigs, _ = eigendecompose_symmetric(galerkin_jacobian(spec, u, lam))
    return int(np.sum(eigs < 0.0))


class _MaskedSystem:
    """Stationary system restricted to an invariant coefficient subspace.

    For rotation-symmetric problems the circle of equilibria is degenerate
    for Newton; restricting to pure sine modes pins the phase and makes the
    branch points isolated while still solving the full residual (the
    subspace is invariant, so off-subspace components vanish identically).
    """

    def __init__(self, spec: ProblemSpec, mask: np.ndarray | None):
        self.spec = spec
        self.mask = mask if mask is not None else np.arange(spec.dim)

    @property
    def dim(self) -> int:
        return len(self.mask)

    def embed(self, x: np.ndarray) -> FourierVector:
        full = np.zeros(self.spec.dim)
        full[self.mask] = x
        return FourierVector(full)

    def restrict(self, u: FourierVector) -> np.ndarray:
        return u.coeffs[self.mask].copy()

    def residual(self, x: np.ndarray, lam: float) -> np.ndarray:
        return galerkin_residual(self.spec, self.embed(x), lam).coeffs[self.mask]

    def jacobian(self, x: np.ndarray, lam: float) -> np.ndarray:
        J = galerkin_jacobian(self.spec, self.embed(x), lam)
        return J[np.ix_(self.mask, self.mask)]


def sine_mask(spec: ProblemSpec) -> np.ndarray:
    return np.array([2 * n - 1 for n in range(1, spec.N + 1)])


def _branch_tangent(sys: _MaskedSystem, x: np.ndarray, lam: float,
                    prev: np.ndarray) -> np.ndarray:
    n = sys.dim
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = sys.jacobian(x, lam)
    A[:n, n] = -x  # dF/dlam = -u
    A[n, :] = prev
    rhs = np.zeros(n + 1)
    rhs[n] = 1.0
    t = np.linalg.solve(A, rhs)
    return t / np.linalg.norm(t)


def _corrector(sys: _MaskedSystem, y_pred: np.ndarray, tangent: np.ndarray,
               tol: float, max_iter: int = 12):
    y = y_pred.copy()
    n = sys.dim
    for _ in range(max_iter):
        F = sys.residual(y[:n], y[n])
        if np.linalg.norm(F) <= tol:
            return y
        A = np.zeros((n + 1, n + 1))
        A[:n, :n] = sys.jacobian(y[:n], y[n])
        A[:n, n] = -y[:n]
        A[n, :] = tangent
        rhs = np.concatenate([F, [tangent @ (y - y_pred)]])
        try:
            delta = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError:
            return None
        y = y - delta
        if not np.isfinite(y).all():
            return None
    F = sys.residual(y[:n], y[n])
    return y if np.linalg.norm(F) <= tol else None


def continue_branch(spec: ProblemSpec, start_u: FourierVector, start_lam: float,
                    origin: tuple[FourierVector, float], direction: float,
                    cfg: RunConfig | None = None, exclude_eig: int | None = None,
                    mask: np.ndarray | None = None,
                    with_stability: bool = True,
                    loop_at_origin_eig: bool = False,
                    crossing_zone: float = 0.5) -> Branch:
    """Pseudo-arclength continuation from an already-converged point.

    Near the trivial line the step shrinks proportionally to ||u|| so that a
    crossing is resolved down to reconnect_tol rather than stepped over.  A
    crossing at an eigenvalue different from exclude_eig terminates as a
    trivial reconnect; a crossing back at the branch's own bifurcation
    eigenvalue terminates as a loop when loop_at_origin_eig is set and is
    otherwise recorded as a traversal event and stepped through.
    """
    cfg = cfg or RunConfig()
    sys = _MaskedSystem(spec, mask)
    x = sys.restrict(start_u)
    lam = float(start_lam)
    if np.linalg.norm(sys.residual(x, lam)) > 10.0 * cfg.corrector_tol:
        raise ValidationError("continuation start does not satisfy the residual")

    branch = Branch(origin=origin)
    origin_vec = np.concatenate([sys.restrict(origin[0]), [origin[1]]])

    seed_prev = np.concatenate([x - sys.restrict(origin[0]), [lam - origin[1]]])
    nrm = np.linalg.norm(seed_prev)
    seed_prev = seed_prev / nrm if nrm > 0 else \
        np.concatenate([np.zeros(sys.dim), [1.0]])
    tangent = _branch_tangent(sys, x, lam, seed_prev)
    if direction < 0:
        tangent = -tangent

    h = 4.0 * cfg.h_min
    arclength = 0.0
    last_crossing_arc = -math.inf

    def record(xv, lamv, tng):
        u_full = sys.embed(xv)
        stab = _stability_count(spec, u_full, lamv) if with_stability else -1
        branch.points.append(BranchPoint(u=u_full, lam=float(lamv),
                                         arclength=float(arclength),
                                         tangent=tng.copy(), stability=stab))

    record(x, lam, tangent)

    for _ in range(cfg.max_steps):
        y = np.concatenate([x, [lam]])
        y_pred = y + h * tangent
        corrected = _corrector(sys, y_pred, tangent, cfg.corrector_tol)
        if corrected is None:
            if h <= cfg.h_min * (1.0 + 1e-12):
                branch.termination = BUDGET
                branch.termination_data = {"reason": "corrector stalled at h_min"}
                return branch
            h = max(cfg.h_min, 0.5 * h)
            continue

        step_len = float(np.linalg.norm(corrected - y))
        if step_len > 2.0 * cfg.h_max and h > cfg.h_min * (1.0 + 1e-12):
            h = max(cfg.h_min, 0.5 * h)  # corrector wandered; retry shorter
            continue
        new_tangent = _branch_tangent(sys, corrected[:sys.dim], corrected[sys.dim],
                                      tangent)
        if new_tangent @ tangent < 0:
            new_tangent = -new_tangent
        arclength += step_len
        x, lam = corrected[:sys.dim], float(corrected[sys.dim])
        tangent = new_tangent
        record(x, lam, tangent)

        norm_u = float(np.linalg.norm(x))
        if norm_u > cfg.r_max:
            branch.termination = UNBOUNDED
            branch.termination_data = {"norm": norm_u, "lambda": lam}
            return branch
        if arclength > 10.0 * cfg.h_min and \
                float(np.linalg.norm(np.concatenate([x, [lam]]) - origin_vec)) < 1e-5:
            branch.termination = LOOP
            branch.termination_data = {"lambda": lam}
            return branch
        if norm_u < cfg.reconnect_tol and arclength > 10.0 * cfg.h_min:
            m_near = int(round(math.sqrt(max(lam, 0.0))))
            at_eig = abs(lam - m_near * m_near) < cfg.eig_tol
            if at_eig and (exclude_eig is None or m_near != exclude_eig):
                branch.termination = TRIVIAL_RECONNECT
                branch.termination_data = {"lambda_end": lam, "m": m_near,
                                           "norm_end": norm_u}
                return branch
            if at_eig and m_near == exclude_eig:
                if loop_at_origin_eig:
                    branch.termination = LOOP
                    branch.termination_data = {"lambda": lam, "norm_end": norm_u}
                    return branch
                if arclength - last_crossing_arc > 20.0 * cfg.h_min:
                    branch.events.append({"type": "trivial_crossing",
                                          "lambda": lam,
                                          "arclength": arclength})
                    last_crossing_arc = arclength
        if not (cfg.lambda_min <= lam <= cfg.lambda_max):
            branch.termination = BUDGET
            branch.termination_data = {"reason": "lambda range exhausted",
                                       "lambda": lam}
            return branch

        # step control: proportional slowdown near the trivial line so that
        # crossings cannot be stepped over
        if norm_u < crossing_zone:
            h = float(np.clip(0.3 * norm_u, cfg.h_min, cfg.h_max))
        else:
            h = min(cfg.h_max, h * 1.3)

    branch.termination = BUDGET
    branch.termination_data = {"reason": "max_steps reached"}
    return branch


# -- branch switching at a bifurcation point ----------------------------------

def _pinned_newton(sys: _MaskedSystem, u0: np.ndarray, lam0: float,
                   pin_dir: np.ndarray, pin_value: float, tol: float,
                   max_iter: int = 60):
    """Solve F(u, lam) = 0 with the amplitude constraint <u, d> = pin_value."""
    y = np.concatenate([u0, [lam0]])
    n = sys.dim
    for _ in range(max_iter):
        F = sys.residual(y[:n], y[n])
        c = pin_dir @ y[:n] - pin_value
        if np.linalg.norm(F) <= tol and abs(c) <= tol:
            return y
        A = np.zeros((n + 1, n + 1))
        A[:n, :n] = sys.jacobian(y[:n], y[n])
        A[:n, n] = -y[:n]
        A[n, :n] = pin_dir
        rhs = np.concatenate([F, [c]])
        try:
            delta = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError:
            return None
        step = 1.0
        cand = y - step * delta
        y = cand
        if not np.isfinite(y).all():
            return None
    return None


def switch_branches(spec: ProblemSpec, k: int, rf: ReducedField | None = None,
                    amplitude: float = 2e-2, cfg: RunConfig | None = None,
                    mask: np.ndarray | None = None,
                    with_stability: bool = True) -> list[Branch]:
    """Continue every branch emanating from (0, k^2).

    Predictor seeds sit along the kernel directions at the given amplitude
    with the parameter guess supplied by the reduced field's quadratic data
    (transcritical versus pitchfork geometry comes out automatically); each
    seed is corrected by an amplitude-pinned Newton before continuation runs
    in both arclength directions.
    """
    cfg = cfg or RunConfig()
    rf = rf if rf is not None else reduce_at(spec, k)
    lam0 = float(k * k)
    sys = _MaskedSystem(spec, mask)

    if rf.kernel_dim == 1:
        angles = [(1.0,), (-1.0,)]
    else:
        angles = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]

    origin = (FourierVector.zero(spec.N), lam0)
    starts = []
    for ang in angles:
        c = amplitude * np.asarray(ang)
        nonlin = rf(c, lam0)
        lam_guess = lam0 - float(np.dot(nonlin, c)) / float(np.dot(c, c))
        u_seed = rf.manifold.lift(c)
        pin_dir_full = sum((float(a) * e for a, e in zip(ang, rf.manifold.kernel)),
                           FourierVector.zero(spec.N)).coeffs
        pin = pin_dir_full[sys.mask]
        if np.linalg.norm(pin) < 1e-12:
            continue  # kernel direction not representable in the mask
        sol = _pinned_newton(sys, sys.restrict(u_seed), lam_guess, pin,
                             amplitude, cfg.newton_tol)
        if sol is None:
            continue
        u_conv = sys.embed(sol[:sys.dim])
        if u_conv.norm() < 0.25 * amplitude:
            continue  # collapsed onto the trivial line
        starts.append((u_conv, float(sol[sys.dim])))

    # deduplicate converged starts (opposite kernel seeds can meet)
    unique = []
    for u, lam in starts:
        if all(max((u - v).norm(), abs(lam - lm)) > 10.0 * cfg.dedup_tol
               for v, lm in unique):
            unique.append((u, lam))

    def run(args):
        u, lam, direction = args
        return continue_branch(spec, u, lam, origin, direction, cfg,
                               exclude_eig=k, mask=mask,
                               with_stability=with_stability,
                               loop_at_origin_eig=True)

    jobs = [(u, lam, +1.0) for u, lam in unique]
    return parallel_map(run, jobs)


def classify_trichotomy(branches: list[Branch]) -> dict:
    """Map branch terminations onto the global alternatives."""
    labels = [b.termination for b in branches]
    if UNBOUNDED in labels:
        case, data = "unbounded", {}
    elif TRIVIAL_RECONNECT in labels:
        b = branches[labels.index(TRIVIAL_RECONNECT)]
        case, data = "trivial_reconnect", dict(b.termination_data)
    elif LOOP in labels:
        case, data = "loop", {}
    else:
        case, data = "inconclusive(budget)", {}
    return {"case": case, "labels": labels, "data": data}


# -- planar zero location on the reduced field --------------------------------

def reduced_zeros(rf: ReducedField, lam: float, radius: float,
                  cfg: RunConfig | None = None,
                  nontrivial_floor: float = 1e-4) -> list[np.ndarray]:
    """Nontrivial zeros of the reduced planar field inside a kernel disk."""
    cfg = cfg or RunConfig()
    g = cfg.grid
    xs, ys = np.meshgrid(np.linspace(-radius, radius, g),
                         np.linspace(-radius, radius, g))
    starts = np.stack([xs.ravel(), ys.ravel()], axis=1)
    starts = starts[np.linalg.norm(starts, axis=1) <= radius]
    found = _batched_newton(rf.planar_field(lam), rf.planar_jacobian(lam),
                            starts, cfg.newton_tol, 60, np.zeros(2),
                            10.0 * radius)
    if len(found) == 0:
        return []
    found = found[np.linalg.norm(found, axis=1) <= 1.5 * radius]
    zeros = _dedup_points(found, cfg.dedup_tol)
    return [z for z in zeros if np.linalg.norm(z) > nontrivial_floor]


# -- index formulas -----------------------------------------------------------

def reduced_chi(rf: ReducedField, cfg: RunConfig | None = None,
                radius: float | None = None) -> dict:
    """Euler number of the reduced flow's Conley index of the origin at lambda0."""
    cfg = cfg or RunConfig()
    r = radius if radius is not None else 0.5 * cfg.validity_radius
    if rf.kernel_dim == 1:
        f = lambda c: float(rf(np.array([c]), rf.lam0)[0])
        right, left = f(r), f(-r)
        if right == 0.0 or left == 0.0:
            raise ValidationError("scalar block endpoint sits on a zero")
        exits = (1 if right > 0 else 0) + (1 if left < 0 else 0)
        if exits == 0:
            return {"chi": 1, "classification": ATTRACTOR, "radius": r}
        if exits == 2:
            return {"chi": -1, "classification": REPELLER, "radius": r}
        return {"chi": 0, "classification": "neither", "radius": r}
    report = classify_block(rf.planar_field(rf.lam0), (0.0, 0.0), r,
                            jacobian=rf.planar_jacobian(rf.lam0), cfg=cfg)
    if report.classification == NOT_ISOLATING or report.chi is None:
        raise ValidationError("origin block is not isolating at lambda0")
    return {"chi": int(report.chi), "classification": report.classification,
            "radius": report.radius, "exit_arcs": report.exit_arcs}


def _formula_value(chi: int, m1: int, m2: int, side: str) -> int:
    if side == "left":
        return (-1) ** m1 * (chi - 1)
    if side == "right":
        return (-1) ** m1 * (chi - (-1) ** m2)
    raise ValidationError("side must be 'left' or 'right'")


def _perturbed_shell_index(spec: ProblemSpec, lam: float, region: CoefRegion,
                           cfg: RunConfig, seeds, eps: float = 1e-5) -> int:
    """Shell index for rotation-symmetric problems.

    The equilibrium circle is degenerate for Newton, so the residual is
    perturbed by a fixed small multiple of the first sine mode; the total
    degree over the shell is unchanged while the circle breaks into
    nondegenerate points.
    """
    direction = np.zeros(spec.dim)
    direction[1] = 1.0  # sin(x) slot

    def residual(u):
        return galerkin_residual(spec, FourierVector(u), lam).coeffs - eps * direction

    def jacobian(u):
        return galerkin_jacobian(spec, FourierVector(u), lam)

    from .rng import Lcg
    starts = [s.coeffs if isinstance(s, FourierVector) else np.asarray(s)
              for s in (seeds or [])]
    rng = Lcg(cfg.seed)
    for _ in range(cfg.random_starts):
        r = rng.uniform(region.r_in, region.r_out)
        starts.append(r * np.array(rng.unit_vector(spec.dim)))
    converged = [u for u in (_full_newton(residual, jacobian, u0, cfg.newton_tol)
                             for u0 in starts)
                 if u is not None and region.contains_norm(float(np.linalg.norm(u)))]
    zeros = _dedup_points(np.array(converged), cfg.dedup_tol) \
        if converged else np.zeros((0, spec.dim))
    total = 0
    for z in zeros:
        sign = int(np.linalg.slogdet(jacobian(z))[0])
        if sign == 0:
            raise DegenerateZeroError("perturbed zero still degenerate")
        total += sign
    return total


def bifurcating_set_index(spec: ProblemSpec, k: int, side: str,
                          cfg: RunConfig | None = None,
                          rf: ReducedField | None = None,
                          sample_offset: float = 0.03,
                          cross_validate: bool = True) -> dict:
    """Index of the set bifurcating at lambda0 = k^2 on the requested side.

    The formula value is cross-validated against a shell index computed by
    zero counting at a sampled lambda on that side; disagreement raises,
    since equality is a theorem.
    """
    cfg = cfg or RunConfig()
    lam0 = float(k * k)
    crossing = crossing_check(spec, lam0, min(sample_offset, 0.1))
    if not crossing["satisfied"]:
        raise ValidationError("transversal crossing fails at lambda0")
    m1, m2 = crossing["m1"], crossing["m2"]
    rf = rf if rf is not None else reduce_at(spec, k)
    chi_info = reduced_chi(rf, cfg)
    chi = chi_info["chi"]
    value = _formula_value(chi, m1, m2, side)
    result = {"k": k, "lambda0": lam0, "side": side, "m1": m1, "m2": m2,
              "chi": chi, "origin_classification": chi_info["classification"],
              "index": value}
    if not cross_validate:
        return result

    lam_s = lam0 + sample_offset if side == "right" else lam0 - sample_offset
    if rf.kernel_dim == 2:
        zeros = reduced_zeros(rf, lam_s, 1.5 * cfg.validity_radius, cfg)
    else:
        zeros = _scalar_zeros(rf, lam_s, 1.5 * cfg.validity_radius, cfg)
    if zeros:
        radii = [float(np.linalg.norm(z)) for z in zeros]
        r_in, r_out = 0.3 * min(radii), 3.0 * max(radii)
    else:
        r_in = 0.2 * cfg.validity_radius
        r_out = 0.8 * cfg.validity_radius
    region = CoefRegion.shell(r_in, r_out)
    seeds = [rf.manifold.lift(np.atleast_1d(z)) for z in zeros]
    if spec.is_rotation_symmetric():
        shell_index = _perturbed_shell_index(spec, lam_s, region, cfg, seeds)
        method = "perturbed_zero_count"
    else:
        rep = galerkin_equilibrium_index(spec, lam_s, region, cfg, seeds=seeds)
        shell_index = rep.index
        method = "zero_count"
    result.update({"shell_index": int(shell_index), "shell_method": method,
                   "sampled_lambda": lam_s, "shell": [r_in, r_out]})
    if shell_index != value:
        raise ConsistencyError(
            f"index formula {value} disagrees with shell index {shell_index} "
            f"at lambda={lam_s}")
    return result


def _scalar_zeros(rf: ReducedField, lam: float, radius: float,
                  cfg: RunConfig, floor: float = 1e-4) -> list[np.ndarray]:
    grid = np.linspace(-radius, radius, 201)
    vals = np.array([float(rf(np.array([c]), lam)[0]) for c in grid])
    zeros = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0 or vals[i] * vals[i + 1] < 0.0:
            lo, hi = grid[i], grid[i + 1]
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                fm = float(rf(np.array([mid]), lam)[0])
                if fm == 0.0:
                    lo = hi = mid
                    break
                if fm * vals[i] < 0.0:
                    hi = mid
                else:
                    lo = mid
            z = 0.5 * (lo + hi)
            if abs(z) > floor:
                zeros.append(np.array([z]))
    return [z for z in _dedup_points(np.array(zeros), cfg.dedup_tol)] if zeros else []


def local_branch_existence(spec: ProblemSpec, k: int,
                           cfg: RunConfig | None = None,
                           rf: ReducedField | None = None,
                           eps0: float = 0.05, halvings: int = 5) -> dict:
    """Static local-branch criteria plus empirical confirmation.

    right flag: chi != (-1)^m2,  left flag: chi != 1.  A raised flag is
    confirmed by actually finding a nontrivial equilibrium at lambda0 +/- eps
    via reduced-field seeding and a full Newton polish, shrinking eps up to
    `halvings` times; the criteria are existence theorems, so failure to
    confirm raises.
    """
    cfg = cfg or RunConfig()
    lam0 = float(k * k)
    rf = rf if rf is not None else reduce_at(spec, k)
    crossing = crossing_check(spec, lam0, 0.05)
    m2 = crossing["m2"]
    chi = reduced_chi(rf, cfg)["chi"]
    flags = {"right": chi != (-1) ** m2, "left": chi != 1}
    witnesses = {}
    for side in ("right", "left"):
        if not flags[side]:
            continue
        eps = eps0
        found = None
        for _ in range(halvings):
            lam = lam0 + eps if side == "right" else lam0 - eps
            found = _confirm_nontrivial(spec, rf, lam, cfg)
            if found is not None:
                break
            eps *= 0.5
        if found is None:
            raise ConfirmationFailure(
                f"{side} branch flagged but no nontrivial equilibrium found "
                f"near lambda0={lam0}")
        witnesses[side] = found
    return {"right": flags["right"], "left": flags["left"],
            "chi": chi, "m2": m2, "witnesses": witnesses}


def _confirm_nontrivial(spec: ProblemSpec, rf: ReducedField, lam: float,
                        cfg: RunConfig, floor: float = 5e-4):
    if rf.kernel_dim == 2:
        zeros = reduced_zeros(rf, lam, 1.5 * cfg.validity_radius, cfg)
    else:
        zeros = _scalar_zeros(rf, lam, 1.5 * cfg.validity_radius, cfg)
    mask = sine_mask(spec) if spec.is_rotation_symmetric() else None
    sys = _MaskedSystem(spec, mask)
    for z in zeros:
        seed = rf.manifold.lift(np.atleast_1d(z))
        sol = _full_newton(lambda x: sys.residual(x, lam),
                           lambda x: sys.jacobian(x, lam),
                           sys.restrict(seed), cfg.newton_tol)
        if sol is not None and np.linalg.norm(sol) > floor:
            u = sys.embed(sol)
            return {"lambda": float(lam), "norm": u.norm(),
                    "kernel_components": [float(c) for c in
                                          rf.manifold.kernel_components(u)]}
    return None


def two_solution_count(spec: ProblemSpec, k: int, rf: ReducedField,
                       eps: float, cfg: RunConfig) -> dict:
    """Distinct nontrivial equilibria near the bifurcation point per side."""
    lam0 = float(k * k)
    counts = {}
    mask = sine_mask(spec) if spec.is_rotation_symmetric() else None
    sys = _MaskedSystem(spec, mask)
    for side, lam in (("right", lam0 + eps), ("left", lam0 - eps)):
        if rf.kernel_dim == 2:
            zeros = reduced_zeros(rf, lam, 1.5 * cfg.validity_radius, cfg)
        else:
            zeros = _scalar_zeros(rf, lam, 1.5 * cfg.validity_radius, cfg)
        polished = []
        for z in zeros:
            sol = _full_newton(lambda x: sys.residual(x, lam),
                               lambda x: sys.jacobian(x, lam),
                               sys.restrict(rf.manifold.lift(np.atleast_1d(z))),
                               cfg.newton_tol)
            if sol is not None and np.linalg.norm(sol) > 5e-4:
                polished.append(sol)
        distinct = _dedup_points(np.array(polished), cfg.dedup_tol) \
            if polished else []
        counts[side] = len(distinct)
    return counts


@dataclass(frozen=True)
class BifurcationReport:
    lambda0: float
    k: int
    m1: int
    m2: int
    chi: int
    K_index_left: int
    K_index_right: int
    local_branch: dict
    classification: str
    details: dict

    def to_dict(self) -> dict:
        return {"lambda0": self.lambda0, "k": self.k, "m1": self.m1,
                "m2": self.m2, "chi": self.chi,
                "K_index_left": self.K_index_left,
                "K_index_right": self.K_index_right,
                "local_branch": dict(self.local_branch),
                "classification": self.classification,
                "details": dict(self.details)}


def _circle_radius_probe(rf: ReducedField, lam: float, r_max: float) -> float | None:
    """Radial sign change of the reduced field along the first kernel axis."""
    rs = np.linspace(1e-3, r_max, 400)
    pts = np.stack([rs, np.zeros_like(rs)], axis=1)
    vals = rf(pts, lam)
    radial = vals[:, 0]
    sign0 = np.sign(radial[0])
    for i in range(1, len(rs)):
        if np.sign(radial[i]) != sign0 and radial[i] != 0.0:
            return float(rs[i])
    return None


def m2_dichotomy(spec: ProblemSpec, k: int, cfg: RunConfig | None = None,
                 sample_offset: float = 0.05,
                 run_branches: bool = True) -> BifurcationReport:
    """Attractor/repeller bifurcation versus global static bifurcation.

    With a two-dimensional center band the origin of the reduced flow at
    lambda0 is either an attractor or repeller, in which case an invariant
    circle is born on the unstable side, or neither, in which case chi <= 0
    and the static machinery produces branches.
    """
    cfg = cfg or RunConfig()
    if k < 1:
        raise ValidationError("the dichotomy driver needs a double eigenvalue, k >= 1")
    lam0 = float(k * k)
    split = split_linearization(spec, FourierVector.zero(spec.N), lam0)
    if split.m2 != 2:
        raise ValidationError(f"center band has dimension {split.m2}, expected 2")
    rf = reduce_at(spec, k)
    chi_info = reduced_chi(rf, cfg)
    chi = chi_info["chi"]
    left = bifurcating_set_index(spec, k, "left", cfg, rf=rf,
                                 sample_offset=sample_offset)
    right = bifurcating_set_index(spec, k, "right", cfg, rf=rf,
                                  sample_offset=sample_offset)
    details: dict = {"origin": chi_info["classification"]}

    if chi_info["classification"] in (ATTRACTOR, REPELLER):
        side = +1.0 if chi_info["classification"] == ATTRACTOR else -1.0
        lam_s = lam0 + side * sample_offset
        r_hat = _circle_radius_probe(rf, lam_s, 4.0)
        if r_hat is not None:
            circle = detect_invariant_circle(
                rf.planar_field(lam_s), r_hat / 3.0, 3.0 * r_hat,
                jacobian=rf.planar_jacobian(lam_s), cfg=cfg)
        else:
            circle = {"found": False, "kind": None,
                      "diagnostics": "no radial sign change located"}
        details["invariant_circle"] = circle
        details["circle_lambda"] = lam_s
        classification = ATTRACTOR_REPELLER
        local = {"right": right["index"] != 0, "left": left["index"] != 0}
    else:
        local = local_branch_existence(spec, k, cfg, rf=rf)
        counts = two_solution_count(spec, k, rf, sample_offset, cfg)
        details["two_solution_counts"] = counts
        if counts["right"] >= 2 and counts["left"] >= 2:
            classification = TWO_SOLUTION
        else:
            classification = GLOBAL_STATIC
        if run_branches:
            mask = sine_mask(spec) if spec.is_rotation_symmetric() else None
            branches = switch_branches(spec, k, rf=rf, cfg=cfg, mask=mask,
                                       with_stability=False)
            details["trichotomy"] = classify_trichotomy(branches)
        local = {"right": bool(local["right"]), "left": bool(local["left"])}

    return BifurcationReport(lambda0=lam0, k=k, m1=split.m1, m2=split.m2,
                             chi=chi, K_index_left=left["index"],
                             K_index_right=right["index"],
                             local_branch=local, classification=classification,
                             details=details)
