"""Derived metrics: the small-scale limit metric and the translation sup metric.

Two ways to upgrade a metric d into one under which given maps become exact
dilations. The first rescales d along a scaling family and takes the
small-scale limit D(x,y) = lim_{a->0} sup{ d(F(b)x, F(b)y)/b : b <= a },
which exists under two-sided local bi-Lipschitz bounds. The second takes
D(x,y) = sup_c d(c*x, c*y) over all left translations of a group, which is
finite under equicontinuous translations, is left invariant, and induces a
homogeneous norm ||x|| = D(x, identity) when the dilations are group
homomorphisms.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dilation_family import DilationFamily
from .errors import DomainError, HypothesisViolationError, NonConvergenceError
from .metric_core import Space, ToleranceConfig, point_residual
from .report import CheckRecord, VerificationReport, jsonable
from .seeding import child_rng

_A_CAP = 1e6
_STEPS_PER_DECADE = 4
_SUP_DEFAULT = 10_000


@dataclass(frozen=True)
class GroupStructure:
    """Group operation oracle with identity at the space basepoint.

    op_many is an optional batched form (k,dim) x (dim,) -> (k,dim) used to
    keep translation sups fast; elements enumerates finite groups so their
    sups are exact rather than sampled.
    """

    op: Callable
    inverse: Callable
    identity: object
    op_many: Callable | None = None
    elements: tuple | None = None
    name: str = "group"

    def as_json(self):
        return {"name": self.name, "finite": self.elements is not None}


@dataclass(frozen=True)
class BiLipschitzEstimate:
    """Scale threshold alpha_x and constant A_x with
    b*d(x,y)/A_x <= d(F(b)x, F(b)y) <= A_x*b*d(x,y) for sampled y, b < alpha_x."""

    alpha_x: float
    A_x: float
    max_ratio: float
    witness: object
    profile: tuple

    def as_json(self):
        return {"alpha_x": self.alpha_x, "A_x": self.A_x,
                "max_ratio": self.max_ratio, "witness": jsonable(self.witness),
                "profile": [list(p) for p in self.profile]}


def check_group_axioms(space: Space, grp: GroupStructure,
                       cfg: ToleranceConfig) -> list:
    """Associativity, identity and inverse laws on sampled elements."""
    pts = space.sample(max(12, cfg.sample_pairs // 16), cfg.seed)
    if not pts:
        raise DomainError(f"space {space.id} produced no sample points")
    e = grp.identity
    records = []

    worst, witness = 0.0, None
    for i in range(len(pts) - 2):
        a, b, c = pts[i], pts[i + 1], pts[i + 2]
        v = point_residual(space, grp.op(grp.op(a, b), c), grp.op(a, grp.op(b, c)))
        if v > worst:
            worst, witness = v, {"a": jsonable(a), "b": jsonable(b), "c": jsonable(c)}
    records.append(CheckRecord.from_violation(
        "group_associativity", "(a*b)*c = a*(b*c) on sampled triples",
        max(len(pts) - 2, 0), worst, witness, cfg.exact_tol))

    worst, witness = 0.0, None
    for x in pts:
        v = max(point_residual(space, grp.op(e, x), x),
                point_residual(space, grp.op(x, e), x))
        if v > worst:
            worst, witness = v, {"x": jsonable(x)}
    records.append(CheckRecord.from_violation(
        "group_identity", "e*x = x*e = x on sampled elements", len(pts), worst,
        witness, cfg.exact_tol))

    worst, witness = 0.0, None
    for x in pts:
        v = max(point_residual(space, grp.op(x, grp.inverse(x)), e),
                point_residual(space, grp.op(grp.inverse(x), x), e))
        if v > worst:
            worst, witness = v, {"x": jsonable(x)}
    records.append(CheckRecord.from_violation(
        "group_inverse", "x * x^-1 = x^-1 * x = e on sampled elements", len(pts),
        worst, witness, cfg.exact_tol))
    return records


def estimate_local_bilipschitz(space: Space, fam: DilationFamily, x,
                               cfg: ToleranceConfig) -> BiLipschitzEstimate:
    """Smallest constant and largest scale threshold for the two-sided
    comparison between d and its scaled images at x, over sampled (y, b).

    Fails loudly when no constant up to the cap works even at the smallest
    sampled scales.
    """
    ys = [y for y in space.sample(max(16, cfg.sample_pairs // 8), cfg.seed)
          if space.distance(x, y) > cfg.abs_tol]
    if not ys:
        raise DomainError("no sampled points distinct from x")
    betas = np.geomspace(cfg.beta_floor, 0.5, 3 * cfg.grid_size)
    rows = []
    worst_ratio, worst_witness = 1.0, None
    for y in ys:
        base = space.distance(x, y)
        for b in betas:
            b = float(b)
            ratio = space.distance(fam.map(b, x), fam.map(b, y)) / (b * base)
            need = max(ratio, 1.0 / ratio) if ratio > 0 else np.inf
            rows.append((b, need, y))
            if need > worst_ratio:
                worst_ratio, worst_witness = need, {"y": jsonable(y), "beta": b,
                                                    "ratio": ratio}

    profile = []
    for thr in betas:
        needs = [need for b, need, _ in rows if b <= thr]
        profile.append((float(thr), float(max(needs)) if needs else 1.0))
    feasible = [(thr, amax) for thr, amax in profile if amax <= _A_CAP]
    if not feasible:
        raise HypothesisViolationError(
            f"no constant up to {_A_CAP:g} satisfies the two-sided bound at "
            f"{jsonable(x)}", witness=worst_witness)
    alpha_x, a_req = feasible[-1]
    return BiLipschitzEstimate(alpha_x=alpha_x, A_x=max(1.0, a_req),
                               max_ratio=worst_ratio, witness=worst_witness,
                               profile=tuple(profile))


def limsup_metric(space: Space, fam: DilationFamily, x, y,
                  cfg: ToleranceConfig, alpha_start: float | None = None) -> float:
    """Small-scale limit of sup_{b <= a} d(F(b)x, F(b)y)/b on a geometric
    scale grid down to cfg.beta_floor.

    Tail sups must stabilize (two consecutive decade tails within abs_tol);
    non-stabilization is surfaced as an error, never hidden.
    """
    if space.distance(x, y) == 0.0:
        return 0.0
    if alpha_start is None:
        ex = estimate_local_bilipschitz(space, fam, x, cfg)
        ey = estimate_local_bilipschitz(space, fam, y, cfg)
        alpha_start = min(ex.alpha_x, ey.alpha_x)
    floor = cfg.beta_floor
    if alpha_start <= floor * 10.0:
        alpha_start = floor * 100.0
    decades = np.log10(alpha_start / floor)
    n = max(int(np.ceil(decades * _STEPS_PER_DECADE)) + 1, 2 * _STEPS_PER_DECADE + 2)
    betas = np.geomspace(alpha_start, floor, n)
    qs = np.array([space.distance(fam.map(float(b), x), fam.map(float(b), y)) / float(b)
                   for b in betas])
    tails = np.maximum.accumulate(qs[::-1])[::-1]
    w = _STEPS_PER_DECADE
    if abs(tails[-1 - w] - tails[-1]) > cfg.abs_tol:
        raise NonConvergenceError(
            "tail sups did not stabilize above the scale floor",
            residual=(float(tails[-1 - w]), float(tails[-1])))
    return float(max(qs[-w:]))


def verify_limsup_metric(space: Space, fam: DilationFamily,
                         cfg: ToleranceConfig) -> VerificationReport:
    """Metric axioms of the small-scale limit metric D, the exact-dilation
    identity under D, and the two-sided ball inclusions that witness
    topology equivalence. A failed bi-Lipschitz hypothesis is reported and
    the metric checks are skipped."""
    report = VerificationReport(command=f"verify_limsup_metric:{fam.name}",
                                seed=cfg.seed, tolerances=cfg.as_json())
    m = max(6, min(16, cfg.sample_pairs // 12))
    pts = space.sample(3 * m, cfg.seed)
    if len(pts) < 6:
        raise DomainError(f"space {space.id} produced too few sample points")

    try:
        estimates = [estimate_local_bilipschitz(space, fam, p, cfg) for p in pts]
    except HypothesisViolationError as err:
        report.add(CheckRecord(
            "bilipschitz_hypothesis",
            "two-sided local bounds b*d/A <= d(F(b)x, F(b)y) <= A*b*d hold",
            len(pts), 1.0, jsonable(err.witness), False,
            info={"skipped_metric_checks": True}))
        return report

    alpha_start = min(e.alpha_x for e in estimates)
    a_max = max(e.A_x for e in estimates)
    report.add(CheckRecord(
        "bilipschitz_hypothesis",
        "two-sided local bounds b*d/A <= d(F(b)x, F(b)y) <= A*b*d hold",
        len(pts), 0.0, None, True,
        info={"alpha_start": alpha_start, "A_max": a_max}))

    def D(u, v):
        return limsup_metric(space, fam, u, v, cfg, alpha_start=alpha_start)

    triples = [(pts[3 * i], pts[3 * i + 1], pts[3 * i + 2]) for i in range(m)]

    worst, witness = 0.0, None
    for x, y, z in triples:
        v = abs(D(x, x))
        if v > worst:
            worst, witness = v, {"x": jsonable(x)}
    report.add(CheckRecord.from_violation(
        "limsup_identity", "D(x,x) = 0 on sampled points", m, worst, witness,
        cfg.abs_tol))

    worst, witness = 0.0, None
    for x, y, _ in triples:
        v = abs(D(x, y) - D(y, x))
        if v > worst:
            worst, witness = v, {"x": jsonable(x), "y": jsonable(y)}
    report.add(CheckRecord.from_violation(
        "limsup_symmetry", "D(x,y) = D(y,x) on sampled pairs", m, worst, witness,
        cfg.abs_tol))

    worst, witness = 0.0, None
    for x, y, z in triples:
        v = D(x, z) - D(x, y) - D(y, z)
        if v > worst:
            worst, witness = v, {"x": jsonable(x), "y": jsonable(y), "z": jsonable(z)}
    report.add(CheckRecord.from_violation(
        "limsup_triangle", "D(x,z) <= D(x,y) + D(y,z) on sampled triples", m,
        worst, witness, cfg.abs_tol))

    gammas = [g for g in fam.index.sample(max(6, cfg.grid_size // 2), cfg.seed)
              if 0.0 < g <= 1.0]
    worst, witness, n = 0.0, None, 0
    for g in gammas:
        for x, y, _ in triples[:6]:
            v = abs(D(fam.map(g, x), fam.map(g, y)) - g * D(x, y))
            n += 1
            if v > worst:
                worst, witness = v, {"gamma": g, "x": jsonable(x), "y": jsonable(y)}
    report.add(CheckRecord.from_violation(
        "limsup_exact_dilation", "D(F(g)x, F(g)y) = g * D(x,y) for sampled g in I",
        n, worst, witness, cfg.abs_tol))

    worst, witness = 0.0, None
    for x, y, _ in triples:
        base = space.distance(x, y)
        dv = D(x, y)
        v = max(base / a_max - dv, dv - a_max * base)
        if v > worst:
            worst, witness = v, {"x": jsonable(x), "y": jsonable(y), "D": dv, "d": base}
    report.add(CheckRecord.from_violation(
        "limsup_sandwich", "d/A <= D <= A*d on sampled pairs", m, worst, witness,
        cfg.abs_tol))

    worst, witness, n = 0.0, None, 0
    for x, y, _ in triples:
        base = space.distance(x, y)
        dv = D(x, y)
        for eps in (0.5, 1.0, 2.0):
            n += 1
            if base < eps / (2.0 * a_max):
                v = dv - eps
                if v > worst:
                    worst, witness = v, {"x": jsonable(x), "y": jsonable(y), "eps": eps,
                                         "side": "d-ball into D-ball"}
            if dv < eps / a_max:
                v = base - eps
                if v > worst:
                    worst, witness = v, {"x": jsonable(x), "y": jsonable(y), "eps": eps,
                                         "side": "D-ball into d-ball"}
    report.add(CheckRecord.from_violation(
        "limsup_ball_inclusions",
        "d(x,y) < eps/(2A) forces D(x,y) < eps and D(x,y) < eps/A forces d(x,y) < eps",
        n, worst, witness, cfg.abs_tol))
    return report


def sup_metric(space: Space, grp: GroupStructure, x, y, cfg: ToleranceConfig,
               count: int | None = None) -> float:
    """Sup of d(c*x, c*y) over sampled translations c, plus the identity.

    Finite groups are enumerated exactly; for sampled groups the value is a
    lower bound and refinement growth beyond 5% flags a likely
    equicontinuity failure.
    """
    if grp.elements is not None:
        cs = list(grp.elements)
        exact = True
    else:
        cs = space.sample(count or _SUP_DEFAULT, cfg.seed + 1)
        exact = False
    cs = [grp.identity] + cs

    if grp.op_many is not None and space._distance_many_fn is not None:
        C = np.stack([np.asarray(c, dtype=float) for c in cs])
        A = grp.op_many(C, np.asarray(x, dtype=float))
        B = grp.op_many(C, np.asarray(y, dtype=float))
        dm = space.distance_many(A, B)
        sups = [float(np.max(dm[: max(len(dm) // 4, 1)])),
                float(np.max(dm[: max(len(dm) // 2, 1)])),
                float(np.max(dm))]
    else:
        vals = [space.distance(grp.op(c, x), grp.op(c, y)) for c in cs]
        sups = [max(vals[: max(len(vals) // 4, 1)]),
                max(vals[: max(len(vals) // 2, 1)]),
                max(vals)]
    if not exact:
        growth_1 = sups[1] - sups[0]
        growth_2 = sups[2] - sups[1]
        margin = max(cfg.abs_tol, 0.05 * max(sups[1], 1e-30))
        if growth_1 > margin and growth_2 > margin:
            raise HypothesisViolationError(
                "translation sups keep growing across sample refinements; "
                "translations do not look equicontinuous",
                witness={"sups": sups})
    return sups[2]


def _homomorphism_violation(space: Space, grp: GroupStructure,
                            fam: DilationFamily, cfg: ToleranceConfig):
    alphas = [a for a in fam.index.sample(6, cfg.seed) if a > 0.0]
    pts = space.sample(12, cfg.seed + 2)
    worst, witness, n = 0.0, None, 0
    for a in alphas:
        for i in range(0, len(pts) - 1, 2):
            p, q = pts[i], pts[i + 1]
            v = point_residual(space, fam.map(a, grp.op(p, q)),
                               grp.op(fam.map(a, p), fam.map(a, q)))
            n += 1
            if v > worst:
                worst, witness = v, {"alpha": a, "p": jsonable(p), "q": jsonable(q)}
    return worst, witness, n


def homogeneous_norm(space: Space, grp: GroupStructure, fam: DilationFamily,
                     x, cfg: ToleranceConfig, count: int | None = None) -> float:
    """||x|| = D(x, identity) under the translation sup metric.

    The family members must act as group homomorphisms; a sampled failure
    of that hypothesis is an error, not a silent wrong number.
    """
    worst, witness, _ = _homomorphism_violation(space, grp, fam, cfg)
    if worst > cfg.abs_tol:
        raise HypothesisViolationError(
            "family members are not group homomorphisms on the sample",
            witness=witness)
    return sup_metric(space, grp, x, grp.identity, cfg, count=count)


def verify_conical_group(space: Space, grp: GroupStructure, fam: DilationFamily,
                         cfg: ToleranceConfig, count: int | None = None) -> VerificationReport:
    """Norm laws and dilation compatibility for the translation sup metric:
    left invariance, inverse symmetry, subadditivity, homogeneity and the
    exact-dilation property under D. Reports failures instead of raising so
    negative controls land in the record they break."""
    report = VerificationReport(command=f"verify_conical_group:{fam.name}",
                                seed=cfg.seed, tolerances=cfg.as_json())
    report.extend(check_group_axioms(space, grp, cfg))
    sup_count = count or 5000
    report.info["translation_sample"] = sup_count

    worst, witness, n = _homomorphism_violation(space, grp, fam, cfg)
    report.add(CheckRecord.from_violation(
        "dilation_homomorphism", "T_a(p*q) = T_a(p) * T_a(q) on sampled elements",
        n, worst, witness, cfg.abs_tol))

    def D(u, v):
        return sup_metric(space, grp, u, v, cfg, count=sup_count)

    def norm(u):
        return D(u, grp.identity)

    pts = space.sample(24, cfg.seed + 3)
    pairs = [(pts[2 * i], pts[2 * i + 1]) for i in range(len(pts) // 2)]
    zs = space.sample(6, cfg.seed + 4)

    worst, witness, n = 0.0, None, 0
    for z in zs[:4]:
        for x, y in pairs[:6]:
            v = abs(D(grp.op(z, x), grp.op(z, y)) - D(x, y))
            n += 1
            if v > worst:
                worst, witness = v, {"z": jsonable(z), "x": jsonable(x), "y": jsonable(y)}
    report.add(CheckRecord.from_violation(
        "left_invariance", "D(z*x, z*y) = D(x,y) for sampled z", n, worst, witness,
        cfg.abs_tol))

    worst, witness = 0.0, None
    for x, _ in pairs:
        v = abs(norm(grp.inverse(x)) - norm(x))
        if v > worst:
            worst, witness = v, {"x": jsonable(x)}
    report.add(CheckRecord.from_violation(
        "norm_inverse_symmetry", "||x^-1|| = ||x|| on sampled elements",
        len(pairs), worst, witness, cfg.abs_tol))

    worst, witness = 0.0, None
    for x, y in pairs:
        v = norm(grp.op(x, y)) - norm(x) - norm(y)
        if v > worst:
            worst, witness = v, {"x": jsonable(x), "y": jsonable(y)}
    report.add(CheckRecord.from_violation(
        "norm_subadditivity", "||x*y|| <= ||x|| + ||y|| on sampled pairs",
        len(pairs), worst, witness, cfg.abs_tol))

    alphas = [a for a in fam.index.sample(6, cfg.seed + 5) if a > 0.0]
    worst, witness, n = 0.0, None, 0
    for a in alphas:
        for x, _ in pairs[:6]:
            v = abs(norm(fam.map(a, x)) - a * norm(x))
            n += 1
            if v > worst:
                worst, witness = v, {"alpha": a, "x": jsonable(x)}
    report.add(CheckRecord.from_violation(
        "norm_homogeneity", "||T_a(x)|| = a * ||x|| for sampled a", n, worst,
        witness, cfg.abs_tol))

    worst, witness, n = 0.0, None, 0
    for a in alphas:
        for x, y in pairs[:6]:
            v = abs(D(fam.map(a, x), fam.map(a, y)) - a * D(x, y))
            n += 1
            if v > worst:
                worst, witness = v, {"alpha": a, "x": jsonable(x), "y": jsonable(y)}
    report.add(CheckRecord.from_violation(
        "dilation_scale_under_D", "D(T_a x, T_a y) = a * D(x,y) for sampled a",
        n, worst, witness, cfg.abs_tol))

    worst, witness, n = 0.0, None, 0
    for a in alphas[:3]:
        for b in alphas[:3]:
            for x, _ in pairs[:4]:
                v = point_residual(space, fam.map(a, fam.map(b, x)),
                                   fam.map(a * b, x))
                n += 1
                if v > worst:
                    worst, witness = v, {"alpha": a, "beta": b, "x": jsonable(x)}
    report.add(CheckRecord.from_violation(
        "dilation_composition", "T_a(T_b(x)) = T_ab(x) on sampled elements",
        n, worst, witness, cfg.abs_tol))
    return report
