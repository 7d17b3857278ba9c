"""Cones over a bounded base with the apex-radial metric.

The cone over a base (C, d) with diameter at most 2 is the set of pairs
(radius, base point) with radius in (0,1], plus an apex absorbing radius
zero, metrized by

    D((a,c1), (b,c2)) = |a - b| + min(a, b) * d(c1, c2)
    D((a,c),  apex)   = a

The diameter bound on d is exactly what makes D a metric; scaling the
radius is then an exact dilation about the apex, distances add along rays,
and the unit sphere about the apex is the radius-1 copy of the base.
"""
from __future__ import annotations

import numpy as np

from .dilation_family import DilationFamily, IndexSetDescriptor
from .errors import DomainError, PreconditionError
from .metric_core import DiameterEstimate, Space, ToleranceConfig, diameter
from .report import CheckRecord, VerificationReport, jsonable

_RADIUS_SLACK = 1e-12


class ConePoint:
    """Apex or (radius, base point), radius in (0,1].

    Radius 0 is normalized to the apex at construction, so the quotient
    identification is structural rather than tolerance based.
    """

    __slots__ = ("radius", "base")

    def __init__(self, radius, base):
        self.radius = float(radius)
        self.base = base

    @classmethod
    def apex(cls) -> "ConePoint":
        return cls(0.0, None)

    @classmethod
    def interior(cls, radius, base) -> "ConePoint":
        r = float(radius)
        if r < 0.0:
            raise DomainError(f"cone radius {r} is negative")
        if r == 0.0:
            return cls.apex()
        if r > 1.0 + _RADIUS_SLACK:
            raise DomainError(f"cone radius {r} exceeds 1")
        if base is None:
            raise DomainError("interior cone point needs a base point")
        return cls(min(r, 1.0), base)

    @property
    def is_apex(self) -> bool:
        return self.base is None

    def __eq__(self, other):
        if not isinstance(other, ConePoint):
            return NotImplemented
        if self.is_apex or other.is_apex:
            return self.is_apex and other.is_apex
        if self.radius != other.radius:
            return False
        if isinstance(self.base, np.ndarray) or isinstance(other.base, np.ndarray):
            return bool(np.array_equal(self.base, other.base))
        return self.base == other.base

    def __repr__(self):
        if self.is_apex:
            return "ConePoint.apex()"
        return f"ConePoint.interior({self.radius}, {self.base!r})"

    def as_json(self):
        if self.is_apex:
            return {"apex": True}
        return {"radius": self.radius, "base": jsonable(self.base)}


class ConeSpace:
    """A base space of diameter at most 2 with its induced cone metric.

    The induced Space view (``.space``) plugs the cone metric and a seeded
    cone-point sampler into the generic verifiers; its basepoint is the apex.
    """

    def __init__(self, base: Space, base_diameter: DiameterEstimate):
        self.base = base
        self.base_diameter = base_diameter
        self.apex = ConePoint.apex()

        cone = self

        def dist(u, v):
            return cone_distance(cone, u, v)

        def sampler(rng, k):
            radii = 1.0 - rng.random(k)
            apex_mask = rng.random(k) < 1.0 / 16.0
            base_pts = base._sampler_fn(rng, k)
            out = []
            for i in range(k):
                if apex_mask[i]:
                    out.append(ConePoint.apex())
                else:
                    out.append(ConePoint.interior(radii[i], base_pts[i]))
            return out

        self.space = Space(f"cone:{base.id}", "derived", dist, sampler,
                           basepoint=self.apex)

    def distance(self, u: ConePoint, v: ConePoint) -> float:
        return cone_distance(self, u, v)


def build_cone(base: Space, cfg: ToleranceConfig | None = None,
               allow_unsafe_diameter: bool = False) -> ConeSpace:
    """Construct the cone, guarding the diameter-at-most-2 precondition.

    The guard bypass exists only to demonstrate that the hypothesis is
    necessary: an over-diameter base produces genuine triangle violations.
    """
    cfg = cfg or ToleranceConfig()
    est = diameter(base, cfg)
    if est.value > 2.0 + cfg.exact_tol and not allow_unsafe_diameter:
        raise PreconditionError(
            f"base {base.id} has diameter {est.value:.6g} > 2 "
            f"(worst sampled pair {jsonable(est.witness)}); rescale it first")
    return ConeSpace(base, est)


def cone_distance(cone: ConeSpace, u: ConePoint, v: ConePoint) -> float:
    """Apex-radial metric; symmetric by construction."""
    if not isinstance(u, ConePoint) or not isinstance(v, ConePoint):
        raise DomainError("cone_distance expects ConePoint values")
    if u.is_apex and v.is_apex:
        return 0.0
    if u.is_apex:
        return v.radius
    if v.is_apex:
        return u.radius
    return abs(u.radius - v.radius) + min(u.radius, v.radius) * cone.base.distance(u.base, v.base)


def canonical_family(cone: ConeSpace) -> DilationFamily:
    """The radius-scaling family F(a)(r, c) = (r*a, c), F(0) = apex.

    This is the family the cone metric is built for: scaling is exact and
    orbits are radially additive.
    """
    apex = cone.apex

    def cmap(alpha, p):
        a = float(alpha)
        if a == 0.0 or p.is_apex:
            return apex
        return ConePoint.interior(p.radius * a, p.base)

    return DilationFamily(space=cone.space, index=IndexSetDescriptor("interval_01"),
                          map=cmap, name=f"cone_canonical:{cone.base.id}", exact=True)


def unit_sphere_check(cone: ConeSpace, cfg: ToleranceConfig) -> VerificationReport:
    """Distance-level-set form of the unit-sphere claim.

    Radius-1 points sit at distance exactly 1 from the apex and every
    smaller radius sits strictly inside; level sets are literally
    assertable where topological boundaries are not.
    """
    report = VerificationReport(command=f"unit_sphere_check:{cone.space.id}",
                                seed=cfg.seed, tolerances=cfg.as_json())
    k = max(cfg.sample_pairs, 8)
    cs = cone.base.sample(k, cfg.seed)
    if not cs:
        raise DomainError(f"base {cone.base.id} produced no sample points")

    worst, witness = 0.0, None
    for c in cs:
        v = abs(cone_distance(cone, ConePoint.interior(1.0, c), cone.apex) - 1.0)
        if v > worst:
            worst, witness = v, {"base": jsonable(c)}
    report.add(CheckRecord.from_violation(
        "unit_sphere_radius_one", "D((1,c), apex) = 1 for sampled base points c",
        len(cs), worst, witness, cfg.exact_tol))

    rng = np.random.default_rng(cfg.seed)
    worst, witness, inside = 0.0, None, True
    for c in cs:
        r = float(rng.uniform(1e-6, 1.0 - 1e-6))
        d = cone_distance(cone, ConePoint.interior(r, c), cone.apex)
        inside = inside and d < 1.0
        v = abs(d - r)
        if v > worst:
            worst, witness = v, {"radius": r, "base": jsonable(c)}
    rec = CheckRecord.from_violation(
        "unit_sphere_interior", "D((r,c), apex) = r < 1 for sampled r < 1",
        len(cs), worst, witness, cfg.exact_tol)
    rec.passed = rec.passed and inside
    report.add(rec)

    v = cone_distance(cone, cone.apex, cone.apex)
    report.add(CheckRecord.from_violation(
        "apex_distance_zero", "D(apex, apex) = 0", 1, abs(v), None, cfg.exact_tol))
    return report
