"""Planar dynamics: orbit integration, isolating blocks, exit arcs.

A circular block around an equilibrium is classified by the outward flux
s(theta) = <f, n> on the boundary circle.  Maximal arcs with s > 0 are exit
arcs, with s < 0 entry arcs; isolated zeros are tangencies.  A tangency is
only compatible with an isolating block when the tangent orbit leaves the
disk to both sides ("bounce-off"), which on a circle of radius R amounts to

    d^2/dt^2 |x(t)|^2 = 2 (|f|^2 + <x, Df f>) > 0

at the tangency.  Internal tangencies (orbit inside) disqualify the circle;
the radius is then halved a few times before giving up.

The Euler number of the Conley index of the maximal invariant set inside a
valid block is 1 for an attractor (no exit arc), 1 for a repeller (flux
positive everywhere, the index is a pointed 2-sphere), and 1 - #exit arcs
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .degree import PlanarRegion, finite_difference_jacobian, winding_degree
from .errors import BoundaryZeroError, ConsistencyError, ValidationError

ATTRACTOR = "attractor"
REPELLER = "repeller"
NEITHER = "neither"
NOT_ISOLATING = "not_isolating"


@dataclass(frozen=True)
class OrbitSample:
    times: np.ndarray
    states: np.ndarray
    terminal: str                    # left_domain | period_detected | time_budget
    period: float | None = None

    def last(self) -> np.ndarray:
        return self.states[-1]


def integrate_rk4(field, x0, dt: float, t_max: float, domain_radius: float,
                  detect_period: bool = True,
                  period_tol: float = 1e-6,
                  inner_radius: float = 0.0,
                  stop_speed: float = 0.0) -> OrbitSample:
    """Classical fixed-step RK4 in the plane.

    Stops on leaving the domain disk (or, when inner_radius is set, falling
    inside the inner disk) or exhausting t_max; reports a period when the
    orbit re-crosses its Poincare section (the line through x0 orthogonal to
    the initial velocity) within period_tol of an earlier crossing point.
    A positive stop_speed halts the orbit once |field| drops below it, which
    signals convergence toward an equilibrium.
    """
    if dt <= 0:
        raise ValidationError("time step must be positive")
    x = np.asarray(x0, dtype=np.float64).copy()
    f0 = np.asarray(field(x[None, :]))[0]
    normal = f0 / np.linalg.norm(f0) if np.linalg.norm(f0) > 0 else None

    n_steps = int(math.ceil(t_max / dt))
    times = [0.0]
    states = [x.copy()]
    crossings: list[tuple[float, np.ndarray]] = []
    terminal = "time_budget"
    period = None

    def rhs(y):
        return np.asarray(field(y[None, :]))[0]

    prev_side = 0.0 if normal is None else float((x - x0) @ normal)
    t = 0.0
    for _ in range(n_steps):
        k1 = rhs(x)
        if stop_speed > 0.0 and float(np.linalg.norm(k1)) < stop_speed:
            terminal = "stalled"
            break
        k2 = rhs(x + 0.5 * dt * k1)
        k3 = rhs(x + 0.5 * dt * k2)
        k4 = rhs(x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += dt
        times.append(t)
        states.append(x.copy())
        if np.linalg.norm(x) > domain_radius or \
                (inner_radius > 0.0 and np.linalg.norm(x) < inner_radius):
            terminal = "left_domain"
            break
        if detect_period and normal is not None:
            side = float((x - np.asarray(x0)) @ normal)
            if prev_side < 0.0 <= side:
                # linear interpolation of the positive section crossing
                frac = prev_side / (prev_side - side)
                xc = states[-2] + frac * (x - states[-2])
                tc = t - dt + frac * dt
                for t_old, x_old in crossings:
                    if np.linalg.norm(xc - x_old) < period_tol:
                        terminal = "period_detected"
                        period = tc - t_old
                        break
                crossings.append((tc, xc))
                if terminal == "period_detected":
                    break
            prev_side = side

    return OrbitSample(times=np.array(times), states=np.array(states),
                       terminal=terminal, period=period)


def scaled_step(field, x0, dt_base: float) -> float:
    """Fix the RK4 step once from the field magnitude near the start."""
    mag = float(np.linalg.norm(np.asarray(field(np.atleast_2d(x0))), axis=1).max())
    return float(np.clip(dt_base / max(mag, 1e-8), 1e-6, 0.25))


# -- isolating blocks ---------------------------------------------------------

@dataclass(frozen=True)
class BlockReport:
    center: tuple[float, float]
    radius: float
    exit_arcs: int
    entry_arcs: int
    tangencies: tuple[float, ...]
    chi: int | None
    classification: str
    flux_samples: tuple[tuple[float, float], ...]
    shrinks: int = 0

    def to_dict(self) -> dict:
        return {"center": list(self.center), "radius": self.radius,
                "exit_arcs": self.exit_arcs, "entry_arcs": self.entry_arcs,
                "tangencies": list(self.tangencies), "chi": self.chi,
                "classification": self.classification,
                "shrinks": self.shrinks}


def _refine_zero(sfun, lo: float, hi: float, tol: float = 1e-8) -> float:
    flo = sfun(lo)
    for _ in range(80):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        fmid = sfun(mid)
        if flo * fmid <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def _tangency_outward(field, jac, point: np.ndarray, center: np.ndarray) -> float:
    """Second derivative of |x - center|^2 along the orbit, normalized."""
    f = np.asarray(field(point[None, :]))[0]
    Df = jac(point[None, :])[0]
    rel = point - center
    raw = float(f @ f + rel @ (Df @ f))
    scale = float(f @ f + np.linalg.norm(rel) * np.linalg.norm(Df @ f)) + 1e-300
    return raw / scale


def classify_block(field, center, radius: float, jacobian=None,
                   cfg: RunConfig | None = None,
                   max_shrinks: int = 6) -> BlockReport:
    cfg = cfg or RunConfig()
    jac = jacobian if jacobian is not None else finite_difference_jacobian(field)
    center = np.asarray(center, dtype=np.float64)

    r = float(radius)
    last_exc: BoundaryZeroError | None = None
    for shrink in range(max_shrinks + 1):
        try:
            report = _classify_circle(field, jac, center, r, cfg)
        except BoundaryZeroError as exc:
            last_exc = exc
            r *= 0.5
            continue
        if report.classification == NOT_ISOLATING and shrink < max_shrinks:
            r *= 0.5
            continue
        return BlockReport(**{**report.__dict__, "shrinks": shrink})
    if last_exc is not None:
        raise last_exc
    return BlockReport(center=tuple(center), radius=r, exit_arcs=0,
                       entry_arcs=0, tangencies=(), chi=None,
                       classification=NOT_ISOLATING,
                       flux_samples=(), shrinks=max_shrinks)


def _classify_circle(field, jac, center: np.ndarray, radius: float,
                     cfg: RunConfig) -> BlockReport:
    n = cfg.block_samples
    thetas = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    normals = np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
    pts = center[None, :] + radius * normals
    vals = np.asarray(field(pts))
    fmag = np.linalg.norm(vals, axis=1)
    fscale = float(fmag.max())
    if fscale == 0.0:
        raise BoundaryZeroError("field vanishes on the whole circle")
    s = np.einsum("ij,ij->i", vals, normals)
    stol = 1e-9 * fscale

    near_zero = np.abs(s) <= stol
    if near_zero.all():
        return BlockReport(center=tuple(center), radius=radius, exit_arcs=0,
                           entry_arcs=0, tangencies=(), chi=None,
                           classification=NOT_ISOLATING,
                           flux_samples=tuple(zip(map(float, thetas), map(float, s))))
    # a run of consecutive near-zero samples is a tangency interval
    runs = np.flatnonzero(near_zero & np.roll(near_zero, 1))
    if runs.size:
        return BlockReport(center=tuple(center), radius=radius, exit_arcs=0,
                           entry_arcs=0,
                           tangencies=tuple(float(thetas[i]) for i in runs[:8]),
                           chi=None, classification=NOT_ISOLATING,
                           flux_samples=tuple(zip(map(float, thetas), map(float, s))))
    # field zero on the circle: flux and field both below margin
    dead = fmag < cfg.margin_tol * fscale
    if dead.any():
        i = int(np.argmin(fmag))
        raise BoundaryZeroError("field zero on the block boundary",
                                location=tuple(float(v) for v in pts[i]))

    def sfun(theta):
        nvec = np.array([np.cos(theta), np.sin(theta)])
        return float(np.asarray(field((center + radius * nvec)[None, :]))[0] @ nvec)

    signs = np.where(s > 0.0, 1, -1)
    flips = np.flatnonzero(signs != np.roll(signs, -1))

    if flips.size == 0:
        if signs[0] > 0:
            cls, chi, exit_arcs, entry_arcs = REPELLER, 1, 1, 0
        else:
            cls, chi, exit_arcs, entry_arcs = ATTRACTOR, 1, 0, 1
        return BlockReport(center=tuple(center), radius=radius,
                           exit_arcs=exit_arcs, entry_arcs=entry_arcs,
                           tangencies=(), chi=chi, classification=cls,
                           flux_samples=tuple(zip(map(float, thetas), map(float, s))))

    # refine each sign change and test the tangency direction there
    tangencies = []
    for i in flips:
        lo = thetas[i]
        hi = thetas[(i + 1) % n] if i + 1 < n else 2.0 * np.pi
        theta_star = _refine_zero(sfun, lo, hi)
        tangencies.append(theta_star)
        p = center + radius * np.array([np.cos(theta_star), np.sin(theta_star)])
        out = _tangency_outward(field, jac, p, center)
        if out < 1e-4:
            # internal or degenerate tangency: not a block at this radius
            return BlockReport(center=tuple(center), radius=radius, exit_arcs=0,
                               entry_arcs=0, tangencies=(float(theta_star),),
                               chi=None, classification=NOT_ISOLATING,
                               flux_samples=tuple(zip(map(float, thetas), map(float, s))))

    exit_arcs = int(flips.size) // 2
    entry_arcs = exit_arcs
    chi = 1 - exit_arcs
    return BlockReport(center=tuple(center), radius=radius,
                       exit_arcs=exit_arcs, entry_arcs=entry_arcs,
                       tangencies=tuple(float(t) for t in tangencies),
                       chi=chi, classification=NEITHER,
                       flux_samples=tuple(zip(map(float, thetas), map(float, s))))


def chi_consistency(field, center, radius: float, jacobian=None,
                    cfg: RunConfig | None = None) -> bool:
    """chi of the block equals the winding degree over the same circle."""
    cfg = cfg or RunConfig()
    report = classify_block(field, center, radius, jacobian, cfg)
    if report.classification == NOT_ISOLATING or report.chi is None:
        raise ValidationError("block classification failed; chi undefined")
    disk = PlanarRegion.disk(center=tuple(np.asarray(center)), radius=report.radius)
    deg = winding_degree(field, disk, cfg)
    if deg != report.chi:
        raise ConsistencyError(
            f"chi={report.chi} disagrees with winding degree {deg}")
    return True


# -- invariant circles --------------------------------------------------------

def detect_invariant_circle(field, annulus_r_in: float, annulus_r_out: float,
                            jacobian=None, cfg: RunConfig | None = None,
                            n_seeds: int = 32, gap_tol: float = 0.5) -> dict:
    """Look for a compact invariant circle inside an annulus around 0.

    Seeds on the mid ring are integrated forward.  A detected periodic orbit
    reports kind 'closed_orbit'; otherwise orbit tails are Newton-polished
    toward equilibria, and the invariant set counts as a topological circle
    when the polished points plus orbit tails cover the full angle range
    without a gap larger than gap_tol.
    """
    cfg = cfg or RunConfig()
    if not 0 < annulus_r_in < annulus_r_out:
        raise ValidationError("annulus needs 0 < r_in < r_out")
    jac = jacobian if jacobian is not None else finite_difference_jacobian(field)
    r_mid = 0.5 * (annulus_r_in + annulus_r_out)
    seeds = [r_mid * np.array([np.cos(t), np.sin(t)])
             for t in np.linspace(0.0, 2.0 * np.pi, n_seeds, endpoint=False)]
    dt = scaled_step(field, np.array(seeds), cfg.rk_dt)
    ring_speed = float(np.linalg.norm(np.asarray(field(np.array(seeds))),
                                      axis=1).max())

    tail_points: list[np.ndarray] = []
    equilibria: list[np.ndarray] = []
    escaped = 0
    for s in seeds:
        orbit = integrate_rk4(field, s, dt, cfg.t_max,
                              domain_radius=2.0 * annulus_r_out,
                              inner_radius=0.5 * annulus_r_in,
                              stop_speed=1e-5 * ring_speed)
        if orbit.terminal == "period_detected":
            pts = orbit.states[len(orbit.states) // 2:]
            radii = np.linalg.norm(pts, axis=1)
            return {"found": True, "kind": "closed_orbit",
                    "period": orbit.period,
                    "radius_mean": float(radii.mean()),
                    "witnesses": [list(map(float, p)) for p in pts[:: max(1, len(pts) // 64)]]}
        final = orbit.last()
        fr = float(np.linalg.norm(final))
        if orbit.terminal == "left_domain" or fr < annulus_r_in or fr > annulus_r_out:
            escaped += 1
            continue
        tail = orbit.states[int(0.5 * len(orbit.states)):]
        tail_points.extend(tail[:: max(1, len(tail) // 32)])
        from .degree import _batched_newton
        polished = _batched_newton(field, jac, final[None, :], cfg.newton_tol,
                                   60, np.zeros(2), 4.0 * annulus_r_out)
        if len(polished):
            equilibria.append(polished[0])

    if not equilibria:
        return {"found": False, "kind": None, "escaped": escaped,
                "diagnostics": "no seed converged to an equilibrium in the annulus"}

    pts = np.array(tail_points + equilibria)
    pts = pts[(np.linalg.norm(pts, axis=1) >= 0.5 * annulus_r_in)
              & (np.linalg.norm(pts, axis=1) <= 1.5 * annulus_r_out)]
    angles = np.sort(np.arctan2(pts[:, 1], pts[:, 0]))
    gaps = np.diff(angles, append=angles[0] + 2.0 * np.pi)
    max_gap = float(gaps.max()) if len(gaps) else 2.0 * np.pi
    covered = max_gap <= gap_tol

    eq = np.array(equilibria)
    dedup: list[np.ndarray] = []
    for p in eq:
        if all(np.linalg.norm(p - q) > cfg.dedup_tol for q in dedup):
            dedup.append(p)
    radii = [float(np.linalg.norm(p)) for p in dedup]
    return {"found": bool(covered), "kind": "equilibria_with_connections",
            "witnesses": [list(map(float, p)) for p in dedup],
            "radius_mean": float(np.mean(radii)),
            "max_angular_gap": max_gap, "escaped": escaped}


# -- point sets ---------------------------------------------------------------

def directed_hausdorff(A, B) -> float:
    """sup_{a in A} d(a, B); empty A gives 0 by convention."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    if A.size == 0:
        return 0.0
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if B.size == 0:
        raise ValidationError("distance to an empty set is undefined")
    d = np.linalg.norm(A[:, None, :] - B[None, :, :], axis=2)
    return float(d.min(axis=1).max())


def hausdorff_distance(A, B) -> float:
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.size == 0 or B.size == 0:
        raise ValidationError("two-sided Hausdorff distance needs nonempty sets")
    return max(directed_hausdorff(A, B), directed_hausdorff(B, A))
