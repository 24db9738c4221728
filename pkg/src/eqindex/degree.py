"""Topological degree and the equilibrium index of stationary sets.

Two independent routes to the planar Brouwer degree:

  * winding_degree: total signed rotation of the field along the positively
    oriented region boundary, with adaptive refinement until consecutive
    field directions turn by less than pi/2;
  * zero_count_degree: multistart Newton locates every zero inside, and the
    degree is the sum of Jacobian determinant signs.

In the full coefficient space the degree is only ever computed by zero
counting (the whole point of the planar reduction is that winding lives in
the plane).  For a statically isolated set of the Galerkin flow the
equilibrium index equals the sum of sign det dF over its nondegenerate
equilibria, which is what galerkin_equilibrium_index returns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .config import RunConfig, parallel_map
from .errors import (BoundaryZeroError, ConsistencyError, DegenerateZeroError,
                     ValidationError)
from .fourier import FourierVector
from .problem import ProblemSpec, galerkin_jacobian, galerkin_residual
from .rng import Lcg


# -- regions ------------------------------------------------------------------

@dataclass(frozen=True)
class PlanarRegion:
    """Disk, annulus or simple positively-oriented polygon in the plane."""

    kind: str
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 0.0
    r_in: float = 0.0
    r_out: float = 0.0
    vertices: tuple[tuple[float, float], ...] = ()

    @classmethod
    def disk(cls, center=(0.0, 0.0), radius=1.0) -> "PlanarRegion":
        if radius <= 0:
            raise ValidationError("disk radius must be positive")
        return cls(kind="disk", center=tuple(center), radius=float(radius))

    @classmethod
    def annulus(cls, center=(0.0, 0.0), r_in=0.5, r_out=1.0) -> "PlanarRegion":
        if not 0 < r_in < r_out:
            raise ValidationError("annulus needs 0 < r_in < r_out")
        return cls(kind="annulus", center=tuple(center),
                   r_in=float(r_in), r_out=float(r_out))

    @classmethod
    def polygon(cls, vertices) -> "PlanarRegion":
        verts = tuple((float(x), float(y)) for x, y in vertices)
        if len(verts) < 3:
            raise ValidationError("polygon needs at least three vertices")
        area = 0.0
        for (x1, y1), (x2, y2) in zip(verts, verts[1:] + verts[:1]):
            area += x1 * y2 - x2 * y1
        if area <= 0:
            raise ValidationError("polygon must be positively oriented")
        return cls(kind="polygon", vertices=verts)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        if self.kind == "disk":
            d = np.linalg.norm(pts - np.asarray(self.center), axis=1)
            return d < self.radius
        if self.kind == "annulus":
            d = np.linalg.norm(pts - np.asarray(self.center), axis=1)
            return (d > self.r_in) & (d < self.r_out)
        # ray casting
        verts = np.asarray(self.vertices)
        x, y = pts[:, 0], pts[:, 1]
        inside = np.zeros(len(pts), dtype=bool)
        n = len(verts)
        for i in range(n):
            x1, y1 = verts[i]
            x2, y2 = verts[(i + 1) % n]
            crosses = ((y1 > y) != (y2 > y)) & \
                (x < (x2 - x1) * (y - y1) / (y2 - y1 + 1e-300) + x1)
            inside ^= crosses
        return inside

    def boundary_distance(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        if self.kind == "disk":
            d = np.linalg.norm(pts - np.asarray(self.center), axis=1)
            return np.abs(self.radius - d)
        if self.kind == "annulus":
            d = np.linalg.norm(pts - np.asarray(self.center), axis=1)
            return np.minimum(np.abs(d - self.r_in), np.abs(self.r_out - d))
        verts = np.asarray(self.vertices)
        n = len(verts)
        best = np.full(len(pts), np.inf)
        for i in range(n):
            a, b = verts[i], verts[(i + 1) % n]
            ab = b - a
            t = np.clip(((pts - a) @ ab) / (ab @ ab), 0.0, 1.0)
            proj = a + t[:, None] * ab[None, :]
            best = np.minimum(best, np.linalg.norm(pts - proj, axis=1))
        return best

    def bounding_box(self) -> tuple[float, float, float, float]:
        if self.kind in ("disk", "annulus"):
            r = self.radius if self.kind == "disk" else self.r_out
            cx, cy = self.center
            return cx - r, cx + r, cy - r, cy + r
        verts = np.asarray(self.vertices)
        return (verts[:, 0].min(), verts[:, 0].max(),
                verts[:, 1].min(), verts[:, 1].max())

    def boundary_curves(self):
        """Closed curves whose union is the positively oriented boundary.

        Each curve maps parameters in [0, 1) to points; the annulus hole is
        traversed clockwise so the region stays on the left.
        """
        cx, cy = self.center if self.kind != "polygon" else (0.0, 0.0)

        def circle(r, orient):
            def param(t):
                ang = orient * 2.0 * np.pi * np.asarray(t)
                return np.stack([cx + r * np.cos(ang), cy + r * np.sin(ang)], axis=-1)
            return param

        if self.kind == "disk":
            return [circle(self.radius, +1.0)]
        if self.kind == "annulus":
            return [circle(self.r_out, +1.0), circle(self.r_in, -1.0)]

        verts = np.asarray(self.vertices)
        n = len(verts)

        def poly_param(t):
            t = np.asarray(t) % 1.0
            seg = np.minimum((t * n).astype(int), n - 1)
            local = t * n - seg
            a = verts[seg]
            b = verts[(seg + 1) % n]
            return a + local[..., None] * (b - a)

        return [poly_param]


@dataclass(frozen=True)
class IndexReport:
    index: int
    method: str
    witnesses: tuple[dict, ...] = ()
    margins: dict = dataclass_field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"index": int(self.index), "method": self.method,
                "witnesses": [dict(w) for w in self.witnesses],
                "margins": dict(self.margins)}


# -- winding ------------------------------------------------------------------

def _wrap_angle(d: np.ndarray) -> np.ndarray:
    return (d + np.pi) % (2.0 * np.pi) - np.pi


def _curve_winding(field, curve, cfg: RunConfig) -> tuple[float, float]:
    """Signed turns of `field` along one closed curve plus the margin seen."""
    n0 = 256
    ts = np.linspace(0.0, 1.0, n0, endpoint=False)
    while True:
        pts = curve(ts)
        vals = field(pts)
        mags = np.linalg.norm(vals, axis=1)
        scale = float(mags.max())
        if scale == 0.0 or float(mags.min()) < cfg.margin_tol * scale:
            i = int(np.argmin(mags))
            raise BoundaryZeroError(
                "field vanishes (or nearly) on the region boundary",
                location=tuple(float(x) for x in pts[i]))
        ang = np.arctan2(vals[:, 1], vals[:, 0])
        d = _wrap_angle(np.diff(ang, append=ang[:1]))
        bad = np.abs(d) >= 0.5 * np.pi
        if not bad.any():
            return float(d.sum() / (2.0 * np.pi)), float(mags.min())
        if ts.size * 2 > cfg.max_boundary_samples:
            i = int(np.flatnonzero(bad)[0])
            raise BoundaryZeroError(
                "boundary refinement cap reached; field direction unresolved",
                location=tuple(float(x) for x in pts[i]))
        # split every offending interval
        nxt = np.roll(ts, -1)
        nxt[-1] = 1.0
        mids = 0.5 * (ts[bad] + nxt[np.flatnonzero(bad)])
        ts = np.sort(np.concatenate([ts, mids]), kind="stable")


def winding_degree(field, region: PlanarRegion, cfg: RunConfig | None = None) -> int:
    cfg = cfg or RunConfig()
    total = 0.0
    margin = math.inf
    for curve in region.boundary_curves():
        turns, m = _curve_winding(field, curve, cfg)
        total += turns
        margin = min(margin, m)
    nearest = round(total)
    if abs(total - nearest) > 0.1:
        raise BoundaryZeroError(
            f"winding total {total} is not an integer; boundary unresolved")
    return int(nearest)


# -- planar zero counting -----------------------------------------------------

def finite_difference_jacobian(field):
    def jac(pts):
        pts = np.atleast_2d(pts)
        h = 1e-6 * np.maximum(1.0, np.linalg.norm(pts, axis=1))[:, None]
        J = np.empty((len(pts), 2, 2))
        for d in range(2):
            e = np.zeros(2)
            e[d] = 1.0
            J[:, :, d] = (field(pts + h * e) - field(pts - h * e)) / (2.0 * h)
        return J

    return jac


def _batched_newton(field, jac, starts, tol, max_iter, center, bound):
    x = np.array(starts, dtype=np.float64)
    if x.size == 0:
        return x.reshape(0, 2)
    F = field(x)
    fn = np.linalg.norm(F, axis=1)
    alive = np.ones(len(x), dtype=bool)
    for _ in range(max_iter):
        alive &= fn > tol
        alive &= np.linalg.norm(x - center, axis=1) <= bound
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        J = jac(x[idx])
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        ok = np.abs(det) > 1e-300
        alive[idx[~ok]] = False
        idx = idx[ok]
        if idx.size == 0:
            continue
        J = J[ok]
        det = det[ok]
        Fi = F[idx]
        step = np.empty((idx.size, 2))
        step[:, 0] = (J[:, 1, 1] * Fi[:, 0] - J[:, 0, 1] * Fi[:, 1]) / det
        step[:, 1] = (-J[:, 1, 0] * Fi[:, 0] + J[:, 0, 0] * Fi[:, 1]) / det
        t = np.ones(idx.size)
        cand = x[idx] - step
        Fc = field(cand)
        nc = np.linalg.norm(Fc, axis=1)
        for _ in range(15):
            worse = nc > fn[idx]
            if not worse.any():
                break
            t[worse] *= 0.5
            cand[worse] = x[idx[worse]] - t[worse, None] * step[worse]
            sub = field(cand[worse])
            Fc[worse] = sub
            nc[worse] = np.linalg.norm(sub, axis=1)
        stalled = nc >= fn[idx] * (1.0 - 1e-12)
        x[idx] = cand
        F[idx] = Fc
        fn[idx] = nc
        alive[idx[stalled & (nc > tol)]] = False
    return x[fn <= tol]


def _dedup_points(points: np.ndarray, tol: float) -> np.ndarray:
    if len(points) == 0:
        return points.reshape(0, points.shape[-1] if points.ndim > 1 else 2)
    order = np.lexsort(points.T[::-1])
    kept: list[np.ndarray] = []
    for p in points[order]:
        if all(np.linalg.norm(p - q) > tol for q in kept):
            kept.append(p)
    return np.array(kept)


def zero_count_degree(field, region: PlanarRegion, jacobian=None,
                      cfg: RunConfig | None = None,
                      extra_starts=None) -> IndexReport:
    cfg = cfg or RunConfig()
    jac = jacobian if jacobian is not None else finite_difference_jacobian(field)
    x0, x1, y0, y1 = region.bounding_box()
    g = cfg.grid
    xs, ys = np.meshgrid(np.linspace(x0, x1, g), np.linspace(y0, y1, g))
    starts = np.stack([xs.ravel(), ys.ravel()], axis=1)
    starts = starts[region.contains(starts)]
    if extra_starts is not None and len(extra_starts):
        starts = np.vstack([np.atleast_2d(extra_starts), starts])
    center = np.array([(x0 + x1) / 2.0, (y0 + y1) / 2.0])
    bound = 10.0 * max(x1 - x0, y1 - y0, 1e-9)
    found = _batched_newton(field, jac, starts, cfg.newton_tol, 60, center, bound)
    found = found[region.contains(found)] if len(found) else found
    zeros = _dedup_points(found, cfg.dedup_tol)

    witnesses = []
    total = 0
    for z in zeros:
        if region.boundary_distance(z[None, :])[0] < cfg.dedup_tol:
            raise BoundaryZeroError("zero located on the region boundary",
                                    location=tuple(float(v) for v in z))
        J = jac(z[None, :])[0]
        det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
        if abs(det) <= 1e-8:
            raise DegenerateZeroError(
                f"degenerate zero with |det|={abs(det):.2e}",
                point=tuple(float(v) for v in z))
        sign = 1 if det > 0 else -1
        total += sign
        witnesses.append({"point": [float(v) for v in z], "sign": sign,
                          "det": det})

    margin = _boundary_margin(field, region)
    return IndexReport(index=total, method="zero_count",
                       witnesses=tuple(witnesses),
                       margins={"min_boundary_field": margin})


def _boundary_margin(field, region: PlanarRegion, samples: int = 512) -> float:
    margin = math.inf
    ts = np.linspace(0.0, 1.0, samples, endpoint=False)
    for curve in region.boundary_curves():
        vals = field(curve(ts))
        margin = min(margin, float(np.linalg.norm(vals, axis=1).min()))
    return margin


def planar_index(field, region: PlanarRegion, jacobian=None,
                 cfg: RunConfig | None = None, method: str = "both") -> IndexReport:
    """Planar degree by the requested method; 'both' cross-checks the two."""
    cfg = cfg or RunConfig()
    if method == "winding":
        deg = winding_degree(field, region, cfg)
        return IndexReport(index=deg, method="winding",
                           margins={"min_boundary_field": _boundary_margin(field, region)})
    if method == "count":
        return zero_count_degree(field, region, jacobian, cfg)
    if method != "both":
        raise ValidationError(f"unknown method {method!r}")
    by_count = zero_count_degree(field, region, jacobian, cfg)
    by_wind = winding_degree(field, region, cfg)
    if by_wind != by_count.index:
        raise ConsistencyError(
            f"winding degree {by_wind} != zero-count degree {by_count.index}")
    return IndexReport(index=by_count.index, method="both",
                       witnesses=by_count.witnesses, margins=by_count.margins)


# -- full coefficient space ---------------------------------------------------

@dataclass(frozen=True)
class CoefRegion:
    """Ball (r_in = 0) or shell around the origin in coefficient norm."""

    r_in: float
    r_out: float

    @classmethod
    def ball(cls, radius: float) -> "CoefRegion":
        if radius <= 0:
            raise ValidationError("ball radius must be positive")
        return cls(0.0, float(radius))

    @classmethod
    def shell(cls, r_in: float, r_out: float) -> "CoefRegion":
        if not 0 < r_in < r_out:
            raise ValidationError("shell needs 0 < r_in < r_out")
        return cls(float(r_in), float(r_out))

    def contains_norm(self, r: float) -> bool:
        return self.r_in < r < self.r_out if self.r_in > 0 else r < self.r_out

    def boundary_distance_norm(self, r: float) -> float:
        if self.r_in > 0:
            return min(abs(r - self.r_in), abs(self.r_out - r))
        return abs(self.r_out - r)


def _full_newton(residual, jacobian, u0: np.ndarray, tol: float,
                 max_iter: int = 60, bound: float = 1e6):
    u = u0.astype(np.float64).copy()
    F = residual(u)
    fn = np.linalg.norm(F)
    for _ in range(max_iter):
        if fn <= tol:
            return u
        if np.linalg.norm(u) > bound:
            return None
        J = jacobian(u)
        try:
            step = np.linalg.solve(J, F)
        except np.linalg.LinAlgError:
            return None
        t = 1.0
        for _ in range(15):
            cand = u - t * step
            Fc = residual(cand)
            nc = np.linalg.norm(Fc)
            if nc < fn:
                u, F, fn = cand, Fc, nc
                break
            t *= 0.5
        else:
            return None
    return u if fn <= tol else None


def galerkin_equilibrium_index(spec: ProblemSpec, lam: float, region: CoefRegion,
                               cfg: RunConfig | None = None,
                               seeds=None) -> IndexReport:
    """Equilibrium index over a coefficient-space ball or shell.

    Zeros of the stationary residual are located by multistart Newton from
    caller seeds plus LCG-seeded random directions; the index is the sum of
    sign det dF over the nondegenerate zeros found inside.
    """
    cfg = cfg or RunConfig()
    m = spec.dim

    def residual(u):
        return galerkin_residual(spec, FourierVector(u), lam).coeffs

    def jacobian(u):
        return galerkin_jacobian(spec, FourierVector(u), lam)

    starts: list[np.ndarray] = []
    if region.r_in == 0.0:
        starts.append(np.zeros(m))
    for s in seeds or []:
        starts.append(s.coeffs if isinstance(s, FourierVector) else np.asarray(s, float))
    rng = Lcg(cfg.seed)
    lo = region.r_in if region.r_in > 0 else 0.0
    for _ in range(cfg.random_starts):
        r = rng.uniform(lo, region.r_out)
        direction = np.array(rng.unit_vector(m))
        starts.append(r * direction)

    results = parallel_map(
        lambda u0: _full_newton(residual, jacobian, u0, cfg.newton_tol,
                                bound=100.0 * max(1.0, region.r_out)),
        starts)
    converged = [u for u in results if u is not None
                 and region.contains_norm(float(np.linalg.norm(u)))]
    zeros = _dedup_points(np.array(converged), cfg.dedup_tol) \
        if converged else np.zeros((0, m))

    witnesses = []
    total = 0
    for z in zeros:
        r = float(np.linalg.norm(z))
        if region.boundary_distance_norm(r) < cfg.dedup_tol:
            raise BoundaryZeroError("equilibrium sits on the region boundary")
        J = jacobian(z)
        smin = float(np.linalg.svd(J, compute_uv=False)[-1])
        if smin <= 1e-8 * max(1.0, float(np.abs(J).max())):
            raise DegenerateZeroError(
                f"degenerate equilibrium, sigma_min={smin:.2e}",
                point=[float(v) for v in z])
        sign = int(np.linalg.slogdet(J)[0])
        total += sign
        witnesses.append({"norm": r, "sign": sign,
                          "point_head": [float(v) for v in z[:5]]})

    return IndexReport(index=total, method="zero_count",
                       witnesses=tuple(witnesses),
                       margins={"n_starts": len(starts)})


def conjugacy_invariance_check(spec: ProblemSpec, lam: float, T: np.ndarray,
                               region: CoefRegion,
                               cfg: RunConfig | None = None,
                               seeds=None) -> dict:
    """Index invariance under the conjugated system v -> T F(T^{-1} v)."""
    cfg = cfg or RunConfig()
    T = np.asarray(T, dtype=np.float64)
    cond = float(np.linalg.cond(T))
    if cond > 1e6:
        raise ValidationError(f"transformation too ill-conditioned: cond={cond:.2e}")
    Tinv = np.linalg.inv(T)

    base = galerkin_equilibrium_index(spec, lam, region, cfg, seeds=seeds)

    def residual(v):
        return T @ galerkin_residual(spec, FourierVector(Tinv @ v), lam).coeffs

    def jacobian(v):
        return T @ galerkin_jacobian(spec, FourierVector(Tinv @ v), lam) @ Tinv

    starts = [T @ (w if not isinstance(w, FourierVector) else w.coeffs)
              for w in (seeds or [])]
    rng = Lcg(cfg.seed)
    lo = region.r_in if region.r_in > 0 else 0.0
    for _ in range(cfg.random_starts):
        r = rng.uniform(lo, region.r_out)
        starts.append(T @ (r * np.array(rng.unit_vector(spec.dim))))
    if region.r_in == 0.0:
        starts.append(np.zeros(spec.dim))

    results = [
        _full_newton(residual, jacobian, u0, cfg.newton_tol * max(1.0, cond))
        for u0 in starts]
    converged = [v for v in results if v is not None
                 and region.contains_norm(float(np.linalg.norm(Tinv @ v)))]
    zeros = _dedup_points(np.array(converged), cfg.dedup_tol) \
        if converged else np.zeros((0, spec.dim))
    total = 0
    for z in zeros:
        J = jacobian(z)
        sign = int(np.linalg.slogdet(J)[0])
        if sign == 0:
            raise DegenerateZeroError("degenerate zero in conjugated system")
        total += sign
    return {"equal": total == base.index, "index": base.index,
            "transformed_index": total}


def reduction_identity_check(spec: ProblemSpec, k: int, lam: float,
                             r_in: float, r_out: float,
                             cfg: RunConfig | None = None) -> dict:
    """Full-space shell index against (-1)^m1 times the planar shell degree.

    Both sides are computed independently: the left by multistart Newton on
    the stationary residual over the coefficient-norm shell, the right by
    zero counting (cross-checked by winding) on the reduced planar field
    over the kernel-plane annulus.  Equality is a theorem, so a mismatch is
    reported as such rather than absorbed.
    """
    cfg = cfg or RunConfig()
    from .manifold import reduce_at
    from .spectra import split_linearization

    rf = reduce_at(spec, k)
    if rf.kernel_dim != 2:
        raise ValidationError("reduction identity check needs a planar kernel")
    split = split_linearization(spec, FourierVector.zero(spec.N), float(k * k))
    m1 = split.m1

    annulus = PlanarRegion.annulus(r_in=r_in, r_out=r_out)
    planar = planar_index(rf.planar_field(lam), annulus,
                          jacobian=rf.planar_jacobian(lam), cfg=cfg,
                          method="both")
    # lift the planar zeros through the manifold map to seed the full search
    seeds = [rf.manifold.lift(np.asarray(w["point"])) for w in planar.witnesses]
    full = galerkin_equilibrium_index(spec, lam, CoefRegion.shell(r_in, r_out),
                                      cfg, seeds=seeds)
    lhs = full.index
    rhs = (-1) ** m1 * planar.index
    result = {"lhs": int(lhs), "rhs": int(rhs), "equal": bool(lhs == rhs),
              "m1": int(m1), "planar_degree": int(planar.index),
              "lambda": float(lam)}
    if lhs != rhs:
        raise ConsistencyError(
            f"reduction identity failed at lambda={lam}: {lhs} != {rhs}")
    return result


def index_continuation_check(spec: ProblemSpec, lam_range: tuple[float, float],
                             region: CoefRegion, steps: int,
                             cfg: RunConfig | None = None,
                             seeds_for=None) -> dict:
    """Constancy of the index over a statically isolating region in lambda."""
    cfg = cfg or RunConfig()
    lams = np.linspace(lam_range[0], lam_range[1], steps)
    indices = []
    for lam in lams:
        seeds = seeds_for(lam) if seeds_for is not None else None
        rep = galerkin_equilibrium_index(spec, float(lam), region, cfg, seeds=seeds)
        for w in rep.witnesses:
            dist = region.boundary_distance_norm(w["norm"])
            if dist < 10.0 * cfg.dedup_tol:
                return {"constant": False, "failure_lambda": float(lam),
                        "reason": "equilibrium touches the region boundary",
                        "indices": indices}
        indices.append(rep.index)
    return {"constant": len(set(indices)) == 1,
            "indices": indices, "lambdas": [float(x) for x in lams]}
