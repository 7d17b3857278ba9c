"""Radial decomposition of a space under a contracting scaling action.

Given an action act(a, x) with act(0, .) = x0, act(1, .) = id and
multiplicative composition, shrinking orbits cross the sphere of radius
eps about x0 exactly once. Bisection on the scalar orbit function
rho_x(b) = d(act(b, x), x0) finds that crossing; the crossing scale and
sphere point are polar-style cone coordinates, and round trips through
them witness that the eps-ball is a cone over the sphere with the
apex-radial metric pulled back along the coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cone_builder import ConePoint, build_cone, cone_distance
from .errors import DecompositionError, DomainError, PreconditionError
from .metric_core import Space, ToleranceConfig
from .report import CheckRecord, VerificationReport, jsonable
from .seeding import child_rng

_BRACKET_CAP = 1e12
_BISECT_ITERS = 80
GRID_ORACLE_POINTS = 4096


@dataclass(frozen=True)
class RadialAction:
    """Scaling action oracle about the space basepoint.

    declared_shrinking announces d(act(a,x), x0) < d(x, x0) for a < 1 and
    x != x0; the verifier falsifies the declaration when it fails.
    expanding says scales beyond 1 are meaningful to the oracle.
    """

    space: Space
    act: Callable[[float, object], object]
    name: str = "action"
    declared_shrinking: bool = True
    expanding: bool = True


@dataclass(frozen=True)
class ConeCoords:
    """Cone coordinates (scale, sphere point); the center has no preferred
    sphere point, so its base is flagged arbitrary rather than invented."""

    alpha: float
    base: object
    basepoint_arbitrary: bool = False

    def as_json(self):
        return {"alpha": self.alpha, "base": jsonable(self.base),
                "basepoint_arbitrary": self.basepoint_arbitrary}


def _shrinking_violation(action: RadialAction, cfg: ToleranceConfig):
    """Max of d(act(a,x), x0) - d(x, x0) over samples; strictly negative
    values witness genuine shrinking."""
    space = action.space
    x0 = space.basepoint
    rng = child_rng(cfg.seed, "shrink:" + action.name)
    xs = space.sample(max(16, cfg.sample_pairs // 4), cfg.seed)
    worst, witness, n = -np.inf, None, 0
    for x in xs:
        d0 = space.distance(x, x0)
        if d0 <= cfg.abs_tol:
            continue
        a = float(rng.uniform(0.1, 0.95))
        diff = space.distance(action.act(a, x), x0) - d0
        n += 1
        if diff > worst:
            worst, witness = diff, {"alpha": a, "x": jsonable(x), "difference": diff}
    if n == 0:
        raise DecompositionError(f"action {action.name}: no points away from the "
                                 "center to test shrinking on")
    return worst, witness, n


def verify_radial_action(action: RadialAction, cfg: ToleranceConfig) -> VerificationReport:
    """Check the action laws on samples: act(0,.)=x0, act(1,.)=id,
    multiplicative composition, and the shrinking declaration."""
    space = action.space
    if space.basepoint is None:
        raise DomainError(f"space {space.id} has no basepoint")
    x0 = space.basepoint
    report = VerificationReport(command=f"verify_radial_action:{action.name}",
                                seed=cfg.seed, tolerances=cfg.as_json())
    xs = space.sample(max(16, cfg.sample_pairs // 4), cfg.seed)
    if not xs:
        raise DomainError(f"space {space.id} produced no sample points")
    rng = child_rng(cfg.seed, "action:" + action.name)

    worst, witness = 0.0, None
    for x in xs:
        v = space.distance(action.act(0.0, x), x0)
        if v > worst:
            worst, witness = v, {"x": jsonable(x)}
    report.add(CheckRecord.from_violation(
        "act_zero", "act(0, x) = x0 on sampled points", len(xs), worst, witness,
        cfg.abs_tol))

    worst, witness = 0.0, None
    for x in xs:
        v = space.distance(action.act(1.0, x), x)
        if v > worst:
            worst, witness = v, {"x": jsonable(x)}
    report.add(CheckRecord.from_violation(
        "act_one", "act(1, x) = x on sampled points", len(xs), worst, witness,
        cfg.abs_tol))

    worst, witness, n = 0.0, None, 0
    for x in xs:
        a = float(rng.uniform(0.05, 1.0))
        b = float(rng.uniform(0.05, 1.0))
        v = space.distance(action.act(a, action.act(b, x)), action.act(a * b, x))
        n += 1
        if v > worst:
            worst, witness = v, {"alpha": a, "beta": b, "x": jsonable(x)}
    report.add(CheckRecord.from_violation(
        "act_composition", "act(a, act(b, x)) = act(a*b, x) on sampled points",
        n, worst, witness, cfg.abs_tol))

    if action.declared_shrinking:
        worst, witness, n = _shrinking_violation(action, cfg)
        report.add(CheckRecord(
            "shrinking", "d(act(a,x), x0) < d(x, x0) strictly for a < 1, x != x0",
            n, float(worst), witness, bool(worst < 0.0)))
    return report


def _require_shrinking(action: RadialAction, cfg: ToleranceConfig) -> None:
    if not action.declared_shrinking:
        raise PreconditionError(f"action {action.name} does not declare the "
                                "shrinking property")
    worst, witness, _ = _shrinking_violation(action, cfg)
    if not worst < 0.0:
        raise PreconditionError(
            f"action {action.name} violates the strict shrinking property: "
            f"witness {jsonable(witness)}")


def _crossing_beta(action: RadialAction, x, epsilon: float, cfg: ToleranceConfig) -> float:
    """Scale b with d(act(b, x), x0) = epsilon, by bracketing + bisection.

    Shrinking makes rho_x monotone, so the sphere crossing is unique;
    bracketing grows the scale along a projected-secant schedule so exact
    radial orbits land in one step and bounded domains are approached
    from inside.
    """
    space = action.space
    x0 = space.basepoint

    def rho(b):
        return space.distance(action.act(b, x), x0)

    d0 = space.distance(x, x0)
    if d0 <= 0.0:
        raise DecompositionError("the center has no sphere crossing")
    if abs(d0 - epsilon) <= cfg.abs_tol:
        return 1.0
    if d0 > epsilon:
        lo, hi = 0.0, 1.0
    else:
        # grow along a projected-secant schedule; exact radial orbits land in
        # one step, which also keeps bounded domains reachable when the
        # sphere touches the domain boundary
        lo = 1.0
        b = epsilon / d0
        hi = None
        shrink_budget, grow_budget = 60, 200
        while hi is None:
            grow_budget -= 1
            if grow_budget <= 0:
                raise DecompositionError(
                    f"bracketing the sphere crossing for {jsonable(x)} stalled",
                    witness={"x": jsonable(x), "beta": b})
            try:
                r = rho(b)
            except DomainError:
                shrink_budget -= 1
                b = 0.5 * (lo + b)
                if shrink_budget <= 0 or b - lo <= 1e-12 * max(1.0, lo):
                    raise DecompositionError(
                        f"orbit of {jsonable(x)} leaves the domain before reaching "
                        f"the sphere of radius {epsilon}",
                        witness={"x": jsonable(x), "beta": b})
                continue
            if abs(r - epsilon) <= cfg.abs_tol:
                return b
            if r > epsilon:
                hi = b
            else:
                lo = b
                factor = min(4.0, epsilon / max(r, 1e-300))
                if factor <= 1.0 + 1e-12:
                    factor = 2.0
                b = b * factor
                if b > _BRACKET_CAP:
                    raise DecompositionError(
                        f"orbit of {jsonable(x)} never reaches the sphere of "
                        f"radius {epsilon}: rho stalled at {r:.6g}",
                        witness={"x": jsonable(x), "rho": r, "beta": lo})

    mid = 0.5 * (lo + hi)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        r = rho(mid)
        if abs(r - epsilon) <= cfg.abs_tol:
            return mid
        if r < epsilon:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-17 * max(1.0, hi):
            break
    r = rho(mid)
    if abs(r - epsilon) <= 10 * cfg.abs_tol:
        return mid
    raise DecompositionError(
        f"bisection on the orbit of {jsonable(x)} did not meet the sphere: "
        f"residual {r - epsilon:.3g}", witness={"x": jsonable(x), "residual": r - epsilon})


def gamma(action: RadialAction, x, epsilon: float, cfg: ToleranceConfig) -> float:
    """Crossing scale of x's fiber: the scale a with act(a, c) = x for the
    sphere point c on x's orbit. Gamma(x0) = 0; points on the sphere give 1.
    """
    space = action.space
    d0 = space.distance(x, space.basepoint)
    if d0 <= cfg.exact_tol:
        return 0.0
    if not action.expanding and d0 > epsilon * (1.0 + 1e-9):
        raise PreconditionError("point outside the ball for a [0,1]-indexed action")
    return 1.0 / _crossing_beta(action, x, epsilon, cfg)


def gamma_grid_oracle(action: RadialAction, x, epsilon: float,
                      cfg: ToleranceConfig, n: int = GRID_ORACLE_POINTS):
    """Crossing bracket from a uniform scale grid, per the intermediate
    value argument; returns (cell_lo, cell_hi, cell_width) in scale units.

    Kept as an independent cross-check for the bisection path.
    """
    space = action.space
    x0 = space.basepoint

    def rho(b):
        return space.distance(action.act(b, x), x0)

    d0 = space.distance(x, x0)
    if d0 <= 0.0:
        raise DecompositionError("the center has no sphere crossing")
    hi = 1.0
    while rho(hi) < epsilon:
        hi *= 2.0
        if hi > _BRACKET_CAP:
            raise DecompositionError("grid oracle found no crossing")
    width = hi / n
    prev = 0.0
    for i in range(1, n + 1):
        b = hi * i / n
        if rho(b) >= epsilon:
            return prev, b, width
        prev = b
    raise DecompositionError("grid oracle lost the crossing it bracketed")


def boundary_set(action: RadialAction, epsilon: float, cfg: ToleranceConfig,
                 count: int | None = None) -> list:
    """Sample of the base set: sampled points pushed along their orbits to
    the sphere of radius epsilon about the center."""
    space = action.space
    xs = space.sample(count or cfg.sample_pairs, cfg.seed)
    out = []
    for x in xs:
        d0 = space.distance(x, space.basepoint)
        if d0 <= cfg.abs_tol:
            continue
        if not action.expanding and d0 < epsilon:
            continue
        out.append(action.act(_crossing_beta(action, x, epsilon, cfg), x))
    if not out:
        raise DecompositionError(
            f"no sphere sample at radius {epsilon}: every sampled point sits at "
            "the center or cannot be pushed to the sphere")
    return out


def cone_coordinates(action: RadialAction, x, epsilon: float,
                     cfg: ToleranceConfig) -> ConeCoords:
    """Polar-style coordinates (scale, sphere point) of x."""
    space = action.space
    d0 = space.distance(x, space.basepoint)
    if d0 <= cfg.exact_tol:
        return ConeCoords(0.0, None, basepoint_arbitrary=True)
    beta = _crossing_beta(action, x, epsilon, cfg)
    return ConeCoords(1.0 / beta, action.act(beta, x), basepoint_arbitrary=False)


def default_epsilon(action: RadialAction, cfg: ToleranceConfig) -> float:
    """Sphere radius with a 10% margin inside the sampled window."""
    space = action.space
    xs = space.sample(max(64, cfg.sample_pairs), cfg.seed)
    top = max(space.distance(x, space.basepoint) for x in xs)
    if top <= 0.0:
        raise DecompositionError(f"space {space.id} collapses to its center")
    return 0.9 * top


def _thin(points, space: Space, count: int) -> list:
    """Greedy farthest-point subsample for well-separated witnesses."""
    if len(points) <= count:
        return list(points)
    chosen = [points[0]]
    dists = [space.distance(points[0], p) for p in points]
    while len(chosen) < count:
        i = int(np.argmax(dists))
        chosen.append(points[i])
        dists = [min(d, space.distance(points[i], p)) for d, p in zip(dists, points)]
    return chosen


def verify_partition(action: RadialAction, cfg: ToleranceConfig,
                     epsilon: float | None = None) -> VerificationReport:
    """Cover + disjointness of the fibers {act(a, C)}: every sampled point
    reconstructs from its cone coordinates, and distinct sampled (scale,
    sphere point) pairs land at separated points."""
    space = action.space
    eps = epsilon if epsilon is not None else default_epsilon(action, cfg)
    report = VerificationReport(command=f"verify_partition:{action.name}",
                                seed=cfg.seed, tolerances=cfg.as_json())
    report.info["epsilon"] = eps

    xs = space.sample(cfg.sample_pairs, cfg.seed)
    sphere = boundary_set(action, eps, cfg, count=max(24, cfg.sample_pairs // 4))
    c_ref = sphere[0]

    worst, witness, n = 0.0, None, 0
    for x in xs:
        coords = cone_coordinates(action, x, eps, cfg)
        base = c_ref if coords.base is None else coords.base
        v = space.distance(action.act(coords.alpha, base), x)
        n += 1
        if v > worst:
            worst, witness = v, {"x": jsonable(x), "alpha": coords.alpha}
    report.add(CheckRecord.from_violation(
        "cover", "every sampled point reconstructs from its cone coordinates",
        n, worst, witness, 10.0 * cfg.abs_tol))

    cs = _thin(sphere, space, 8)
    alphas = [0.25, 0.5, 0.75, 1.0]
    images = [(a, i, action.act(a, c)) for a in alphas for i, c in enumerate(cs)]
    best, witness, n = np.inf, None, 0
    for i in range(len(images)):
        for j in range(i + 1, len(images)):
            (a, ci, p), (b, cj, q) = images[i], images[j]
            if a == b and ci == cj:
                continue
            d = space.distance(p, q)
            n += 1
            if d < best:
                best, witness = d, {"alpha": a, "beta": b,
                                    "c1": jsonable(cs[ci]), "c2": jsonable(cs[cj])}
    report.add(CheckRecord(
        "disjointness", "distinct sampled (scale, sphere point) pairs stay separated",
        n, float(-best), witness, bool(best > cfg.abs_tol),
        info={"min_separation": float(best)}))

    base_dists = [space.distance(c, space.basepoint) for c in sphere]
    report.info["base_min_distance_to_center"] = float(min(base_dists))
    report.info["base_max_distance_to_center"] = float(max(base_dists))
    report.info["base_sample_size"] = len(sphere)
    return report


def verify_cone_homeomorphism(action: RadialAction, epsilon: float,
                              cfg: ToleranceConfig) -> VerificationReport:
    """Sampled round trips and separation for the coordinates-to-point map.

    Requires the strict shrinking property; one-sided [0,1] actions are
    checked on the closed ball, expanding ones on the whole window.
    """
    _require_shrinking(action, cfg)
    space = action.space
    report = VerificationReport(command=f"verify_cone_homeomorphism:{action.name}",
                                seed=cfg.seed, tolerances=cfg.as_json())
    report.info["epsilon"] = epsilon
    xs = space.sample(cfg.sample_pairs, cfg.seed)
    if not action.expanding:
        xs = [x for x in xs if space.distance(x, space.basepoint) <= epsilon * (1 + 1e-9)]
    coords = []
    kept = []
    worst, witness, n = 0.0, None, 0
    sphere_ref = None
    for x in xs:
        cc = cone_coordinates(action, x, epsilon, cfg)
        if cc.base is None:
            if sphere_ref is None:
                continue
            cc = ConeCoords(0.0, sphere_ref, True)
        else:
            sphere_ref = cc.base
        rec = action.act(cc.alpha, cc.base)
        v = space.distance(rec, x)
        n += 1
        coords.append(cc)
        kept.append(x)
        if v > worst:
            worst, witness = v, {"x": jsonable(x), "alpha": cc.alpha}
    if n == 0:
        raise DecompositionError("no points to round-trip inside the ball")
    report.add(CheckRecord.from_violation(
        "roundtrip", "act(coords(x)) returns to x on sampled points", n, worst,
        witness, 10.0 * cfg.abs_tol))

    best, bw, m = np.inf, None, 0
    for i in range(min(len(kept), 48)):
        for j in range(i + 1, min(len(kept), 48)):
            if space.distance(kept[i], kept[j]) <= 10.0 * cfg.abs_tol:
                continue
            ci, cj = coords[i], coords[j]
            sep = abs(ci.alpha - cj.alpha) * epsilon
            if not (ci.basepoint_arbitrary or cj.basepoint_arbitrary):
                sep += min(ci.alpha, cj.alpha) * space.distance(ci.base, cj.base)
            m += 1
            if sep < best:
                best, bw = sep, {"x": jsonable(kept[i]), "y": jsonable(kept[j])}
    report.add(CheckRecord(
        "injectivity_separation",
        "distinct sampled points carry separated cone coordinates",
        m, float(-best) if m else 0.0, bw, bool(m == 0 or best > cfg.abs_tol),
        info={"min_coordinate_separation": float(best) if m else None}))
    return report


def verify_metric_cone(action: RadialAction, epsilon: float,
                       cfg: ToleranceConfig) -> VerificationReport:
    """Pull the apex-radial cone metric back through cone coordinates and
    check the action becomes an exact dilation of every scale in (0,1]."""
    _require_shrinking(action, cfg)
    space = action.space
    report = VerificationReport(command=f"verify_metric_cone:{action.name}",
                                seed=cfg.seed, tolerances=cfg.as_json())
    report.info["epsilon"] = epsilon

    sphere = _thin(boundary_set(action, epsilon, cfg,
                                count=max(32, cfg.sample_pairs // 4)), space, 24)

    # sphere points are only crossing-tolerance accurate, so the normalized
    # sample can overshoot diameter 2 by ~abs_tol/eps; renormalize by the
    # measured overshoot, which stays within that tolerance
    dmax = max((space.distance(a, b) for i, a in enumerate(sphere)
                for b in sphere[i + 1:]), default=0.0) / epsilon
    norm = max(1.0, dmax / 2.0)

    def sphere_dist(c1, c2):
        return space.distance(c1, c2) / (epsilon * norm)

    def sphere_sampler(rng, k):
        return [sphere[int(i)] for i in rng.integers(0, len(sphere), size=k)]

    base = Space(f"sphere:{space.id}@eps={epsilon:g}", "derived",
                 sphere_dist, sphere_sampler)
    cone = build_cone(base, cfg)
    report.info["sphere_sample_size"] = len(sphere)
    report.info["sphere_diameter_renormalization"] = norm

    def cone_point(cc: ConeCoords) -> ConePoint:
        if cc.base is None or cc.alpha <= 0.0:
            return cone.apex
        return ConePoint.interior(min(cc.alpha, 1.0), cc.base)

    def pulled(xc: ConeCoords, yc: ConeCoords) -> float:
        return epsilon * cone_distance(cone, cone_point(xc), cone_point(yc))

    xs = [x for x in space.sample(cfg.sample_pairs, cfg.seed)
          if space.distance(x, space.basepoint) <= epsilon * (1 + 1e-9)]
    if len(xs) < 4:
        raise DecompositionError("too few sampled points inside the ball")
    xs = xs[:24]
    coords = {i: cone_coordinates(action, x, epsilon, cfg) for i, x in enumerate(xs)}

    rng = child_rng(cfg.seed, "metric_cone:" + action.name)
    worst, witness, n = 0.0, None, 0
    for _ in range(min(48, 4 * len(xs))):
        i, j = rng.integers(0, len(xs), size=2)
        if i == j:
            continue
        a = float(rng.uniform(0.05, 1.0))
        dxy = pulled(coords[int(i)], coords[int(j)])
        ax = action.act(a, xs[int(i)])
        ay = action.act(a, xs[int(j)])
        dax = pulled(cone_coordinates(action, ax, epsilon, cfg),
                     cone_coordinates(action, ay, epsilon, cfg))
        v = abs(dax - a * dxy)
        n += 1
        if v > worst:
            worst, witness = v, {"alpha": a, "x": jsonable(xs[int(i)]),
                                 "y": jsonable(xs[int(j)])}
    report.add(CheckRecord.from_violation(
        "exact_dilation_pullback",
        "act(a, .) scales the pulled-back cone metric exactly by a on the ball",
        n, worst, witness, 10.0 * cfg.abs_tol))

    worst, witness = 0.0, None
    for i, x in enumerate(xs):
        cc = coords[i]
        if cc.base is None:
            continue
        v = abs(pulled(cc, ConeCoords(0.0, None, True)) - epsilon * cc.alpha)
        if v > worst:
            worst, witness = v, {"x": jsonable(x)}
    report.add(CheckRecord.from_violation(
        "radial_distance_to_center",
        "pulled-back distance to the center is epsilon times the radial coordinate",
        len(xs), worst, witness, 10.0 * cfg.abs_tol))
    return report
