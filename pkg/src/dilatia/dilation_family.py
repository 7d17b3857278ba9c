"""Index sets and dilation families, with numeric verifiers for their laws.

A dilation family about a center x0 is a set of maps T_a, indexed by a
multiplicative set of nonnegative scales, where T_a multiplies every
distance exactly by a, fixes x0, composes multiplicatively
(T_a . T_b = T_ab) and admits a pointwise limit as a -> 1. None of this is
assumed: every law is checked on seeded samples and reported with the
worst witness found. Index sets themselves are symbolic descriptors, so
closure and purity are certified structurally and only spot-checked
numerically.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable

import numpy as np

from .errors import DomainError, NonConvergenceError, PreconditionError, SpecError
from .metric_core import Space, ToleranceConfig
from .report import CheckRecord, VerificationReport, jsonable
from .seeding import child_rng

_KINDS = ("interval_01", "interval_01_open_zero", "ray_1", "full_ray",
          "positive_ray", "geometric", "rationals_01", "explicit")
_SLACK = 1e-12
_RATIONAL_DEN_CAP = 10_000


def _looks_rational(a: float) -> bool:
    """Certifying predicate for the rational index set: a float counts as a
    member when it sits within 1e-12 of a fraction with a small denominator.

    Sound but incomplete; the refinement grids construct decimal rationals
    directly, which are members regardless of what this test can certify.
    """
    return abs(float(Fraction(a).limit_denominator(_RATIONAL_DEN_CAP)) - a) <= 1e-12


@dataclass(frozen=True)
class IndexSetDescriptor:
    """Symbolic index set with membership, sampling and purity metadata.

    Kinds: [0,1], (0,1], [1,inf), [0,inf), (0,inf), {q^n : n in Z},
    the rationals in (0,1], and explicit finite lists. Every float is a
    dyadic rational, so rational membership reduces to the range check;
    the rational structure shows up in how the sampler and the closure
    grids pick representatives.
    """

    kind: str
    q: float = 0.0
    members: tuple = ()
    adjoined_zero: bool = False

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise SpecError(f"unknown index set kind {self.kind!r}")
        if self.kind == "geometric":
            if self.q <= 0 or self.q == 1.0:
                raise SpecError("geometric index set needs q > 0, q != 1")
        if self.kind == "explicit":
            if not self.members:
                raise SpecError("explicit index set needs members")
            ms = tuple(sorted(float(m) for m in self.members))
            if any(m < 0 for m in ms):
                raise SpecError("index set members must be nonnegative")
            object.__setattr__(self, "members", ms)

    # -- structure ---------------------------------------------------------

    @property
    def contains_zero(self) -> bool:
        if self.adjoined_zero:
            return True
        if self.kind in ("interval_01", "full_ray"):
            return True
        return self.kind == "explicit" and 0.0 in self.members

    @property
    def subset_01(self) -> bool:
        if self.kind in ("interval_01", "interval_01_open_zero", "rationals_01"):
            return True
        return self.kind == "explicit" and max(self.members) <= 1.0

    @property
    def subset_1inf(self) -> bool:
        if self.adjoined_zero:
            return False
        if self.kind == "ray_1":
            return True
        return self.kind == "explicit" and min(self.members) >= 1.0

    def purity_case(self) -> int:
        if self.subset_01:
            return 2
        if self.subset_1inf:
            return 1
        return 3

    def meets_below_one(self) -> bool:
        """Whether I intersects [0,1)."""
        if self.kind == "ray_1":
            return False
        if self.kind == "explicit":
            return any(m < 1.0 for m in self.members) or self.adjoined_zero
        return True

    # -- membership and closure --------------------------------------------

    def membership(self, alpha) -> bool:
        a = float(alpha)
        if a == 0.0:
            return self.contains_zero
        if a < 0.0:
            return False
        if self.kind == "interval_01":
            return a <= 1.0 + _SLACK
        if self.kind == "interval_01_open_zero":
            return a <= 1.0 + _SLACK
        if self.kind == "rationals_01":
            return a <= 1.0 + _SLACK and _looks_rational(a)
        if self.kind == "ray_1":
            return a >= 1.0 - _SLACK
        if self.kind in ("full_ray", "positive_ray"):
            return True
        if self.kind == "geometric":
            n = round(math.log(a) / math.log(self.q))
            return abs(self.q ** n - a) <= 1e-9 * max(1.0, a)
        return any(abs(a - m) <= _SLACK * max(1.0, m) for m in self.members)

    def closure_contains(self, alpha) -> bool:
        a = float(alpha)
        if self.membership(a):
            return True
        if a < 0.0:
            return False
        if self.kind in ("interval_01", "interval_01_open_zero", "rationals_01"):
            return a <= 1.0 + _SLACK
        if self.kind == "ray_1":
            return a >= 1.0 - _SLACK
        if self.kind in ("full_ray", "positive_ray"):
            return True
        if self.kind == "geometric":
            return a == 0.0
        return False

    def sample(self, k: int, seed: int) -> list:
        """k representative scales, sorted, endpoints included where they exist."""
        rng = child_rng(seed, f"index:{self.kind}:{self.q}")
        k = max(int(k), 2)
        if self.kind == "interval_01":
            vals = [0.0, 1.0] + list(rng.random(max(k - 2, 0)))
        elif self.kind == "interval_01_open_zero":
            vals = [1.0] + list(1.0 - rng.random(max(k - 1, 0)))
        elif self.kind == "rationals_01":
            vals = [1.0]
            for _ in range(max(k - 1, 0)):
                den = int(rng.integers(1, 64))
                num = int(rng.integers(1, den + 1))
                vals.append(num / den)
        elif self.kind == "ray_1":
            vals = [1.0] + list(np.exp(rng.uniform(0.0, math.log(8.0), max(k - 1, 0))))
        elif self.kind == "full_ray":
            vals = [0.0, 1.0] + list(np.exp(rng.uniform(math.log(1e-3), math.log(4.0),
                                                        max(k - 2, 0))))
        elif self.kind == "positive_ray":
            vals = [1.0] + list(np.exp(rng.uniform(math.log(1e-3), math.log(4.0),
                                                   max(k - 1, 0))))
        elif self.kind == "geometric":
            exps = sorted(set(int(e) for e in rng.integers(-3, 4, k)) | {0})
            vals = [self.q ** e for e in exps]
        else:
            vals = list(self.members)
        if self.adjoined_zero:
            vals.append(0.0)
        return sorted(set(float(v) for v in vals))

    def approach(self, alpha, level: int) -> float:
        """A member of I within a level-shrinking distance of alpha.

        Only meaningful for alpha in the closure of I; level 1 is coarse and
        each level shrinks the gap by an order of magnitude.
        """
        a = float(alpha)
        if self.membership(a):
            return a
        if self.kind == "rationals_01":
            scale = 10.0 ** level
            r = round(a * scale) / scale
            if r <= 0.0:
                r = 1.0 / scale
            return min(r, 1.0)
        if a == 0.0:
            if self.kind == "geometric":
                step = level + 2
                return self.q ** (-step) if self.q > 1.0 else self.q ** step
            return 10.0 ** (-(level + 2))
        if self.kind == "explicit":
            return min(self.members, key=lambda m: abs(m - a))
        return a

    def near_one(self, level: int) -> float:
        """Member of I near 1, used for limit-at-1 grids; 1 itself when
        the set is discrete around 1."""
        if self.kind in ("interval_01", "interval_01_open_zero", "rationals_01",
                         "full_ray", "positive_ray"):
            return 1.0 - 10.0 ** (-level)
        if self.kind == "ray_1":
            return 1.0 + 10.0 ** (-level)
        return 1.0

    def as_json(self):
        out = {"kind": self.kind}
        if self.kind == "geometric":
            out["q"] = self.q
        if self.kind == "explicit":
            out["members"] = list(self.members)
        if self.adjoined_zero:
            out["adjoined_zero"] = True
        return out


_CASE_CLAIMS = {
    1: "I in [1,inf) and b/a in I for every a < b in I",
    2: "I in [0,1] and a/b in I for every a < b in I",
    3: "I closed under nonzero division",
}


def check_pure_set(idx: IndexSetDescriptor, cfg: ToleranceConfig) -> VerificationReport:
    """Verify 1 in I, multiplicative closure and the case-appropriate
    quotient closure on sampled pairs; the applicable case is classified
    from the descriptor."""
    report = VerificationReport(command=f"check_pure_set:{idx.kind}",
                                seed=cfg.seed, tolerances=cfg.as_json())
    case = idx.purity_case()
    report.info["purity_case"] = case
    alphas = idx.sample(max(cfg.grid_size, 8), cfg.seed)

    ok_one = idx.membership(1.0)
    report.add(CheckRecord("pure_contains_one", "1 is a member of I", 1,
                           0.0 if ok_one else 1.0, None if ok_one else 1.0, ok_one))

    bad = None
    pairs = 0
    for a in alphas:
        for b in alphas:
            pairs += 1
            if not idx.membership(a * b) and bad is None:
                bad = {"a": a, "b": b, "product": a * b}
    report.add(CheckRecord("pure_multiplicative_closure",
                           "a*b is a member of I for sampled a, b in I",
                           pairs, 0.0 if bad is None else 1.0, bad, bad is None))

    bad_q = None
    count = 0
    for a, b in combinations(alphas, 2):
        lo, hi = (a, b) if a < b else (b, a)
        if case == 2:
            count += 1
            if hi > 0 and not idx.membership(lo / hi):
                bad_q = bad_q or {"a": lo, "b": hi, "quotient": lo / hi}
        elif case == 1:
            count += 1
            if lo > 0 and not idx.membership(hi / lo):
                bad_q = bad_q or {"a": lo, "b": hi, "quotient": hi / lo}
        else:
            if lo > 0:
                count += 1
                for r in (lo / hi, hi / lo):
                    if not idx.membership(r):
                        bad_q = bad_q or {"a": lo, "b": hi, "quotient": r}
    report.add(CheckRecord("pure_quotient_closure", _CASE_CLAIMS[case], count,
                           0.0 if bad_q is None else 1.0, bad_q, bad_q is None,
                           info={"case": case}))
    return report


@dataclass(frozen=True)
class DilationFamily:
    """Center, index set and the map oracle (alpha, p) -> T_alpha(p).

    The family asserts nothing about itself; verify_dilation_family is the
    authority on whether the laws actually hold.
    """

    space: Space
    index: IndexSetDescriptor
    map: Callable[[float, object], object]
    name: str = "family"
    exact: bool = False


def _pairs_from(space: Space, n_pairs: int, seed: int, label: str):
    pts = space.sample(2 * n_pairs, seed)
    if not pts:
        raise DomainError(f"space {space.id} produced no sample points for {label}")
    return [(pts[2 * i], pts[2 * i + 1]) for i in range(len(pts) // 2)]


def _checked_map(fam: DilationFamily, alpha: float, p):
    out = fam.map(alpha, p)
    if not fam.space.contains(out):
        raise DomainError(f"family {fam.name}: map leaves the space domain at "
                          f"alpha={alpha} applied to {jsonable(p)}")
    return out


def verify_dilation_family(fam: DilationFamily, cfg: ToleranceConfig) -> VerificationReport:
    """Check all four family laws plus their two consequences.

    Records: scale_exactness, center_fixed, composition (with a*b
    re-membership verified before evaluation), limit_exists (Cauchy
    increments on a grid toward 1), identity_at_one, limit_equals_identity,
    and zero_map when 0 is in the index set.
    """
    space = fam.space
    if space.basepoint is None:
        raise DomainError(f"space {space.id} has no basepoint; a dilation family "
                          "needs a center")
    x0 = space.basepoint
    report = VerificationReport(command=f"verify_dilation_family:{fam.name}",
                                seed=cfg.seed, tolerances=cfg.as_json())
    alphas = fam.index.sample(max(8, cfg.grid_size), cfg.seed)
    pairs = _pairs_from(space, cfg.sample_pairs, cfg.seed, fam.name)
    xs = [p for p, _ in pairs[:max(8, min(32, len(pairs)))]]

    # condition 1: exact distance scaling
    worst, witness, rel = 0.0, None, 0.0
    n = 0
    for a in alphas:
        for x, y in pairs:
            base = space.distance(x, y)
            v = abs(space.distance(_checked_map(fam, a, x), _checked_map(fam, a, y))
                    - a * base)
            n += 1
            rel = max(rel, v / (1.0 + a * base))
            if v > worst:
                worst, witness = v, {"alpha": a, "x": jsonable(x), "y": jsonable(y)}
    report.add(CheckRecord.from_violation(
        "scale_exactness", "d(T_a(x), T_a(y)) = a * d(x,y) for sampled a, x, y",
        n, worst, witness, cfg.abs_tol, info={"max_relative": rel}))

    # condition 2: the center is fixed
    worst, witness = 0.0, None
    for a in alphas:
        v = space.distance(_checked_map(fam, a, x0), x0)
        if v > worst:
            worst, witness = v, {"alpha": a}
    report.add(CheckRecord.from_violation(
        "center_fixed", "T_a(x0) = x0 for sampled a", len(alphas), worst, witness,
        cfg.abs_tol))

    # condition 3: multiplicative composition
    worst, witness, n = 0.0, None, 0
    alpha_pairs = [(a, b) for a in alphas for b in alphas if fam.index.membership(a * b)]
    alpha_pairs = alpha_pairs[:64]
    for a, b in alpha_pairs:
        for x in xs:
            v = space.distance(_checked_map(fam, a, _checked_map(fam, b, x)),
                               _checked_map(fam, a * b, x))
            n += 1
            if v > worst:
                worst, witness = v, {"alpha": a, "beta": b, "x": jsonable(x)}
    report.add(CheckRecord.from_violation(
        "composition", "T_a(T_b(x)) = T_ab(x) for sampled a, b with ab in I",
        n, worst, witness, cfg.abs_tol))

    # condition 4 witness: Cauchy increments along a grid toward 1, plus the
    # two consequences T_1 = id and lim_{a->1} T_a(x) = x
    levels = list(range(1, cfg.grid_size + 1))
    grid = [fam.index.near_one(l) for l in levels]
    sup_profile = []
    inc_profile = []
    prev_pts = None
    for a in grid:
        cur = [_checked_map(fam, a, x) for x in xs]
        sup_profile.append(max(space.distance(c, x) for c, x in zip(cur, xs)))
        if prev_pts is not None:
            inc_profile.append(max(space.distance(c, p) for c, p in zip(cur, prev_pts)))
        prev_pts = cur
    report.add(CheckRecord.from_violation(
        "limit_exists", "a -> T_a(x) is Cauchy along a grid approaching 1",
        len(xs) * len(grid), inc_profile[-1] if inc_profile else 0.0,
        {"increments": inc_profile}, cfg.abs_tol))
    report.add(CheckRecord.from_violation(
        "limit_equals_identity",
        "sup_x d(T_a(x), x) falls below tolerance as a -> 1",
        len(xs) * len(grid), sup_profile[-1], {"sup_profile": sup_profile}, cfg.abs_tol))

    if fam.index.membership(1.0):
        worst, witness = 0.0, None
        for x in xs:
            v = space.distance(_checked_map(fam, 1.0, x), x)
            if v > worst:
                worst, witness = v, {"x": jsonable(x)}
        report.add(CheckRecord.from_violation(
            "identity_at_one", "T_1(x) = x on sampled points", len(xs), worst,
            witness, cfg.abs_tol))

    if fam.index.contains_zero:
        worst, witness = 0.0, None
        for x in xs:
            v = space.distance(_checked_map(fam, 0.0, x), x0)
            if v > worst:
                worst, witness = v, {"x": jsonable(x)}
        report.add(CheckRecord.from_violation(
            "zero_map", "T_0 is the constant map onto x0", len(xs), worst,
            witness, cfg.abs_tol))
    return report


def verify_linearity(fam: DilationFamily, cfg: ToleranceConfig) -> VerificationReport:
    """Check radial additivity: for a <= b <= c in I the distances from
    T_a(x) to T_b(x) and T_b(x) to T_c(x) sum exactly to the distance from
    T_a(x) to T_c(x)."""
    space = fam.space
    report = VerificationReport(command=f"verify_linearity:{fam.name}",
                                seed=cfg.seed, tolerances=cfg.as_json())
    alphas = sorted(fam.index.sample(max(8, cfg.grid_size), cfg.seed))
    triples = list(combinations(alphas, 3))[:80]
    if len(alphas) >= 3:
        triples.append((alphas[0], alphas[len(alphas) // 2], alphas[-1]))
    xs = [p for p, _ in _pairs_from(space, max(8, cfg.sample_pairs // 8),
                                    cfg.seed, fam.name)]
    worst, witness, n = 0.0, None, 0
    for a, b, c in triples:
        for x in xs:
            pa = _checked_map(fam, a, x)
            pb = _checked_map(fam, b, x)
            pc = _checked_map(fam, c, x)
            v = abs(space.distance(pa, pc) - space.distance(pa, pb)
                    - space.distance(pb, pc))
            n += 1
            if v > worst:
                worst, witness = v, {"alpha": a, "beta": b, "gamma": c, "x": jsonable(x)}
    report.add(CheckRecord.from_violation(
        "linearity",
        "d(T_a x, T_c x) = d(T_a x, T_b x) + d(T_b x, T_c x) for a <= b <= c",
        n, worst, witness, cfg.abs_tol))
    return report


def adjoin_zero(fam: DilationFamily) -> DilationFamily:
    """Extend the family by T_0 = const x0 over J = I union {0}.

    Requires I to meet [0,1); expanding-only families cannot absorb a zero
    map. Families already containing 0 come back unchanged.
    """
    if fam.index.contains_zero:
        return fam
    if not fam.index.meets_below_one():
        raise PreconditionError(
            f"index set of {fam.name} does not meet [0,1); adjoining 0 would "
            "break purity")
    x0 = fam.space.basepoint
    if x0 is None:
        raise DomainError(f"space {fam.space.id} has no basepoint")
    base_map = fam.map

    def zmap(alpha, p):
        if float(alpha) == 0.0:
            return x0
        return base_map(alpha, p)

    return dataclasses.replace(
        fam, index=dataclasses.replace(fam.index, adjoined_zero=True),
        map=zmap, name=fam.name + "+0")


def extend_to_closure(fam: DilationFamily, alpha: float, x,
                      cfg: ToleranceConfig):
    """Evaluate the closure extension T-bar_alpha(x) as a witnessed limit.

    Members of I approaching alpha are taken on a refining grid until two
    successive images are within abs_tol; the last image is returned. The
    limit is never assumed: failing to stabilize within the grid budget is
    an error carrying the残 residual.
    """
    idx = fam.index
    a = float(alpha)
    if not idx.closure_contains(a):
        raise PreconditionError(f"alpha={a} is not in the closure of the index set")
    if idx.membership(a):
        return fam.map(a, x)
    space = fam.space
    prev = None
    residual = None
    for level in range(1, cfg.grid_size + 1):
        beta = idx.approach(a, level)
        cur = fam.map(beta, x)
        if prev is not None:
            residual = space.distance(prev, cur)
            if residual <= cfg.abs_tol:
                return cur
        prev = cur
    raise NonConvergenceError(
        f"closure extension at alpha={a} did not stabilize within "
        f"{cfg.grid_size} grid levels", residual=residual)


@dataclass(frozen=True)
class ModulusEstimate:
    """Empirical continuity modulus of a -> T_a(x) on [a,b] intersect I.

    delta[i] is the largest sampled scale gap that keeps the image motion
    at or below eps[i]; it is nondecreasing in eps by construction. The
    joint rows record sampled (scale, point) perturbations for the joint
    continuity claim.
    """

    interval: tuple
    eps: tuple
    delta: tuple
    n_scales: int
    joint: tuple

    def as_json(self):
        return {"interval": list(self.interval), "eps": list(self.eps),
                "delta": list(self.delta), "n_scales": self.n_scales,
                "joint": [dict(j) for j in self.joint]}

    def delta_for(self, eps_value: float) -> float:
        best = 0.0
        for e, d in zip(self.eps, self.delta):
            if e <= eps_value:
                best = max(best, d)
        return best


def continuity_modulus(fam: DilationFamily, x, interval, cfg: ToleranceConfig) -> ModulusEstimate:
    """Estimate delta(eps) for the scale-to-point map on [a,b] intersect I."""
    a, b = float(interval[0]), float(interval[1])
    if a <= 0:
        raise PreconditionError("uniform continuity is claimed only on [a,b] with a > 0")
    if b < a:
        raise PreconditionError("interval must satisfy a <= b")
    idx = fam.index
    cands = set(v for v in idx.sample(4 * cfg.grid_size, cfg.seed) if a <= v <= b)
    for v in np.linspace(a, b, 4 * cfg.grid_size):
        if idx.membership(float(v)):
            cands.add(float(v))
    alphas = sorted(cands)
    if not alphas:
        raise DomainError(f"index set does not meet [{a}, {b}]")
    space = fam.space
    pts = [fam.map(al, x) for al in alphas]
    gaps, dists = [], []
    for i in range(len(alphas)):
        for j in range(i + 1, len(alphas)):
            gaps.append(alphas[j] - alphas[i])
            dists.append(space.distance(pts[i], pts[j]))
    gaps = np.asarray(gaps)
    dists = np.asarray(dists)
    order = np.argsort(gaps, kind="stable")
    gaps_sorted = gaps[order]
    running = np.maximum.accumulate(dists[order])
    dmax = float(dists.max()) if len(dists) else 0.0
    if dmax <= 0.0:
        eps_grid = [cfg.abs_tol]
    else:
        eps_grid = list(np.geomspace(max(dmax * 1e-3, 1e-15), dmax, 8))
    deltas = []
    for eps in eps_grid:
        above = np.nonzero(running > eps)[0]
        if len(above) == 0:
            deltas.append(b - a)
        elif above[0] == 0:
            deltas.append(0.0)
        else:
            deltas.append(float(gaps_sorted[above[0] - 1]))
    ys = fam.space.sample(4, cfg.seed)
    joint = []
    for al in alphas[:3]:
        for be in alphas[:3]:
            for y in ys[:2]:
                joint.append({
                    "scale_gap": abs(al - be),
                    "input_dist": space.distance(x, y),
                    "output_dist": space.distance(fam.map(al, x), fam.map(be, y)),
                })
    return ModulusEstimate(interval=(a, b), eps=tuple(float(e) for e in eps_grid),
                           delta=tuple(float(d) for d in deltas),
                           n_scales=len(alphas), joint=tuple(joint))
