"""Metric spaces as oracles: distance, axiom checks, diameter, rescaling.

A Space couples a point universe with a pure distance oracle and a seeded
sampler. Finite spaces are backed by an explicit distance matrix over
integer point ids. Analytic spaces take real coordinate vectors with a
distance formula from a fixed catalog plus a bounded sampling window; the
catalog is fixed so every oracle stays auditable and deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError, SpecError
from .report import CheckRecord, VerificationReport, jsonable
from .seeding import child_rng

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ToleranceConfig:
    """Numeric tolerances and sweep sizes shared by all verifiers.

    abs_tol bounds violations of sampled identities, exact_tol bounds
    identities that are analytically exact, grid_size controls parameter
    grids and refinement depths, sample_pairs sizes random sweeps and
    beta_floor is the smallest scale probed by small-scale limits.
    """

    abs_tol: float = 1e-9
    exact_tol: float = 1e-12
    grid_size: int = 12
    sample_pairs: int = 200
    seed: int = 0
    beta_floor: float = 1e-8

    def __post_init__(self):
        if self.abs_tol <= 0 or self.exact_tol <= 0 or self.beta_floor <= 0:
            raise SpecError("tolerances must be positive")
        if self.grid_size < 2:
            raise SpecError("grid_size must be at least 2")
        if self.sample_pairs < 1:
            raise SpecError("sample_pairs must be positive")

    def as_json(self):
        return {
            "abs_tol": self.abs_tol,
            "exact_tol": self.exact_tol,
            "grid_size": self.grid_size,
            "sample_pairs": self.sample_pairs,
            "beta_floor": self.beta_floor,
        }


@dataclass(frozen=True)
class Window:
    """Bounded sampling region for analytic spaces: a box or a ball."""

    kind: str
    lo: tuple = ()
    hi: tuple = ()
    center: tuple = ()
    radius: float = 0.0

    @staticmethod
    def box(lo, hi) -> "Window":
        lo = tuple(float(v) for v in np.atleast_1d(lo))
        hi = tuple(float(v) for v in np.atleast_1d(hi))
        if len(lo) != len(hi) or any(a > b for a, b in zip(lo, hi)):
            raise SpecError("box window needs lo <= hi componentwise")
        return Window("box", lo=lo, hi=hi)

    @staticmethod
    def ball(center, radius) -> "Window":
        center = tuple(float(v) for v in np.atleast_1d(center))
        if radius <= 0:
            raise SpecError("ball window needs a positive radius")
        return Window("ball", center=center, radius=float(radius))

    @property
    def dim(self) -> int:
        return len(self.lo) if self.kind == "box" else len(self.center)

    def sample(self, rng: np.random.Generator, k: int) -> np.ndarray:
        if self.kind == "box":
            lo = np.asarray(self.lo)
            hi = np.asarray(self.hi)
            return rng.uniform(lo, hi, size=(k, len(lo)))
        center = np.asarray(self.center)
        n = len(center)
        dirs = rng.standard_normal((k, n))
        norms = np.linalg.norm(dirs, axis=1)
        norms[norms == 0.0] = 1.0
        radii = self.radius * rng.random(k) ** (1.0 / n)
        return center + dirs / norms[:, None] * radii[:, None]

    def contains(self, p: np.ndarray, slack: float = 1e-9) -> bool:
        if self.kind == "box":
            lo = np.asarray(self.lo)
            hi = np.asarray(self.hi)
            return bool(np.all(p >= lo - slack) and np.all(p <= hi + slack))
        return bool(np.linalg.norm(p - np.asarray(self.center)) <= self.radius + slack)

    def as_json(self):
        if self.kind == "box":
            return {"kind": "box", "lo": list(self.lo), "hi": list(self.hi)}
        return {"kind": "ball", "center": list(self.center), "radius": self.radius}


# --- Heisenberg group arithmetic (shared by the koranyi catalog entry) ---

def heisenberg_multiply(p, q):
    """Group product on R^3 with central twist (x1*y2 - y1*x2)/2."""
    return np.array([
        p[0] + q[0],
        p[1] + q[1],
        p[2] + q[2] + 0.5 * (p[0] * q[1] - p[1] * q[0]),
    ])


def heisenberg_inverse(p):
    return -np.asarray(p, dtype=float)


def heisenberg_multiply_many(P, Q):
    """Row-wise group product; P and Q broadcast as (k,3) arrays."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    x = P[:, 0] + Q[:, 0]
    y = P[:, 1] + Q[:, 1]
    z = P[:, 2] + Q[:, 2] + 0.5 * (P[:, 0] * Q[:, 1] - P[:, 1] * Q[:, 0])
    return np.stack([x, y, z], axis=1)


def koranyi_gauge(p) -> float:
    """Homogeneous gauge ((x^2+y^2)^2 + 16 z^2)^(1/4)."""
    planar = p[0] * p[0] + p[1] * p[1]
    return float((planar * planar + 16.0 * p[2] * p[2]) ** 0.25)


def _koranyi_gauge_many(P):
    planar = P[:, 0] * P[:, 0] + P[:, 1] * P[:, 1]
    return (planar * planar + 16.0 * P[:, 2] * P[:, 2]) ** 0.25


# --- Analytic distance catalog ---

def _d_euclidean(p, q, params):
    return float(np.sqrt(np.sum((p - q) ** 2)))


def _dm_euclidean(P, Q, params):
    return np.sqrt(np.sum((P - Q) ** 2, axis=1))


def _d_truncated(p, q, params):
    return min(_d_euclidean(p, q, params), params["kappa"])


def _dm_truncated(P, Q, params):
    return np.minimum(_dm_euclidean(P, Q, params), params["kappa"])


def _d_sup(p, q, params):
    return float(np.max(np.abs(p - q)))


def _dm_sup(P, Q, params):
    return np.max(np.abs(P - Q), axis=1)


def _d_circle_arc(p, q, params):
    delta = abs(float(p[0] - q[0])) % TWO_PI
    return min(delta, TWO_PI - delta)


def _dm_circle_arc(P, Q, params):
    delta = np.abs(P[:, 0] - Q[:, 0]) % TWO_PI
    return np.minimum(delta, TWO_PI - delta)


def _d_koranyi(p, q, params):
    return koranyi_gauge(heisenberg_multiply(heisenberg_inverse(p), q))


def _dm_koranyi(P, Q, params):
    return _koranyi_gauge_many(heisenberg_multiply_many(-P, Q))


def _exact_diam_euclidean(window, params):
    if window.kind == "ball":
        return 2.0 * window.radius
    span = np.asarray(window.hi) - np.asarray(window.lo)
    return float(np.sqrt(np.sum(span ** 2)))


def _exact_diam_truncated(window, params):
    return min(params["kappa"], _exact_diam_euclidean(window, params))


def _exact_diam_sup(window, params):
    if window.kind != "box":
        return None
    return float(np.max(np.asarray(window.hi) - np.asarray(window.lo)))


def _exact_diam_circle_arc(window, params):
    span = float(window.hi[0] - window.lo[0]) if window.kind == "box" else TWO_PI
    return min(span, math.pi)


CATALOG = {
    "euclidean": (_d_euclidean, _dm_euclidean, _exact_diam_euclidean),
    "truncated": (_d_truncated, _dm_truncated, _exact_diam_truncated),
    "sup": (_d_sup, _dm_sup, _exact_diam_sup),
    "circle_arc": (_d_circle_arc, _dm_circle_arc, _exact_diam_circle_arc),
    "koranyi": (_d_koranyi, _dm_koranyi, lambda window, params: None),
}


class Space:
    """Point universe plus distance oracle, optional basepoint and group.

    Oracles are pure: repeated calls with identical arguments return
    bit-identical floats, and sampling is fully determined by the seed.
    """

    def __init__(self, space_id, kind, distance_fn, sampler_fn, *, basepoint=None,
                 group=None, size=None, matrix=None, window=None, catalog=None,
                 params=None, dim=None, exact_diameter=None, domain_fn=None,
                 distance_many_fn=None):
        self.id = str(space_id)
        self.kind = kind
        self.basepoint = basepoint
        self.group = group
        self.size = size
        self.matrix = matrix
        self.window = window
        self.catalog = catalog
        self.params = dict(params or {})
        self.dim = dim
        self.exact_diameter = exact_diameter
        self._distance_fn = distance_fn
        self._sampler_fn = sampler_fn
        self._domain_fn = domain_fn
        self._distance_many_fn = distance_many_fn

    # -- construction ------------------------------------------------------

    @classmethod
    def from_matrix(cls, space_id, matrix, basepoint=None) -> "Space":
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise SpecError(f"distance matrix for {space_id!r} must be square")
        if m.shape[0] == 0:
            raise DomainError(f"space {space_id!r} is empty")
        if not np.array_equal(m, m.T):
            raise SpecError(f"distance matrix for {space_id!r} must be symmetric")
        if np.any(np.diag(m) != 0.0):
            raise SpecError(f"distance matrix for {space_id!r} must have a zero diagonal")
        if np.any(m < 0.0):
            raise SpecError(f"distance matrix for {space_id!r} must be nonnegative")
        n = m.shape[0]
        if basepoint is not None:
            basepoint = int(basepoint)
            if not 0 <= basepoint < n:
                raise SpecError(f"basepoint {basepoint} outside matrix of size {n}")

        def dist(p, q):
            return float(m[p, q])

        def sampler(rng, k):
            return [int(i) for i in rng.integers(0, n, size=k)]

        pair = np.unravel_index(int(np.argmax(m)), m.shape)
        space = cls(space_id, "finite", dist, sampler, basepoint=basepoint,
                    size=n, matrix=m, exact_diameter=float(m.max()))
        space._diameter_pair = (int(pair[0]), int(pair[1]))
        return space

    @classmethod
    def analytic(cls, space_id, catalog, dim, window, params=None, basepoint=None,
                 group=None, bounded_domain=False) -> "Space":
        if catalog not in CATALOG:
            raise SpecError(f"unknown distance catalog {catalog!r}; "
                            f"choose one of {sorted(CATALOG)}")
        if window.dim != dim:
            raise SpecError(f"window dimension {window.dim} != space dimension {dim}")
        params = dict(params or {})
        if catalog == "truncated" and "kappa" not in params:
            raise SpecError("truncated catalog needs params['kappa']")
        if catalog == "koranyi" and dim != 3:
            raise SpecError("koranyi catalog is three dimensional")
        fn, fn_many, exact_fn = CATALOG[catalog]
        if basepoint is not None:
            basepoint = np.asarray(basepoint, dtype=float)
            if basepoint.shape != (dim,):
                raise SpecError(f"basepoint must be a {dim}-vector")

        def dist(p, q):
            return fn(p, q, params)

        def dist_many(P, Q):
            return fn_many(P, Q, params)

        def sampler(rng, k):
            pts = window.sample(rng, k)
            return [pts[i] for i in range(k)]

        return cls(space_id, "analytic", dist, sampler, basepoint=basepoint,
                   group=group, window=window, catalog=catalog, params=params,
                   dim=dim, exact_diameter=exact_fn(window, params),
                   domain_fn=(window.contains if bounded_domain else None),
                   distance_many_fn=dist_many)

    @classmethod
    def derived(cls, space_id, distance_fn, sampler_fn, *, basepoint=None,
                group=None, distance_many_fn=None, exact_diameter=None) -> "Space":
        return cls(space_id, "derived", distance_fn, sampler_fn,
                   basepoint=basepoint, group=group,
                   distance_many_fn=distance_many_fn, exact_diameter=exact_diameter)

    # -- oracles -----------------------------------------------------------

    def _check_point(self, p):
        if self.kind == "finite":
            if isinstance(p, bool) or not isinstance(p, (int, np.integer)):
                raise DomainError(f"point {p!r} is not an index into {self.id}")
            i = int(p)
            if not 0 <= i < self.size:
                raise DomainError(f"index {i} outside finite universe of {self.id} "
                                  f"(size {self.size})")
            return i
        if self.kind == "analytic":
            arr = p if isinstance(p, np.ndarray) else np.asarray(p, dtype=float)
            if arr.shape != (self.dim,):
                raise DomainError(f"point of shape {arr.shape} does not live in "
                                  f"{self.id} (dim {self.dim})")
            if self._domain_fn is not None and not self._domain_fn(arr):
                raise DomainError(f"point {jsonable(arr)} outside declared domain "
                                  f"of {self.id}")
            return arr
        return p

    def distance(self, p, q) -> float:
        p = self._check_point(p)
        q = self._check_point(q)
        return float(self._distance_fn(p, q))

    def distance_many(self, P, Q) -> np.ndarray:
        if self._distance_many_fn is not None:
            return np.asarray(self._distance_many_fn(np.asarray(P, dtype=float),
                                                     np.asarray(Q, dtype=float)))
        return np.array([self.distance(p, q) for p, q in zip(P, Q)])

    def sample(self, k: int, seed: int) -> list:
        return list(self._sampler_fn(child_rng(seed, "sample:" + self.id), int(k)))

    def contains(self, p) -> bool:
        try:
            self._check_point(p)
            return True
        except DomainError:
            return False

    def __repr__(self):
        return f"Space({self.id!r}, kind={self.kind!r})"


# --- Operations ---------------------------------------------------------

def distance(space: Space, p, q) -> float:
    """Distance oracle lookup with universe validation."""
    return space.distance(p, q)


def point_residual(space: Space, p, q) -> float:
    """How far two values are from being the same point.

    For coordinate spaces this is the normalized coordinate gap, which is
    the right equality test for point-identity laws: metrics with a Holder
    modulus (the gauge behaves like sqrt near the diagonal) amplify float
    rounding noise far beyond its coordinate size. Opaque points fall back
    to the metric.
    """
    if space.kind == "analytic":
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        scale = 1.0 + max(float(np.max(np.abs(p))), float(np.max(np.abs(q))))
        return float(np.max(np.abs(p - q))) / scale
    return space.distance(p, q)


@dataclass(frozen=True)
class DiameterEstimate:
    """Diameter value with an exactness flag and the worst pair found.

    For analytic spaces without a declared exact diameter the value is a
    sampled lower bound, flagged by exact=False.
    """

    value: float
    exact: bool
    witness: object

    def __float__(self):
        return self.value

    def as_json(self):
        return {"value": self.value, "exact": self.exact, "witness": jsonable(self.witness)}


def diameter(space: Space, cfg: ToleranceConfig | None = None) -> DiameterEstimate:
    cfg = cfg or ToleranceConfig()
    if space.kind == "finite":
        pair = getattr(space, "_diameter_pair", None)
        return DiameterEstimate(float(space.matrix.max()), True, pair)
    n = max(32, min(2 * cfg.sample_pairs, 256))
    pts = space.sample(n, cfg.seed)
    if not pts:
        raise DomainError(f"space {space.id} produced no sample points")
    best, best_pair = 0.0, (pts[0], pts[0])
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = space.distance(pts[i], pts[j])
            if d > best:
                best, best_pair = d, (pts[i], pts[j])
    if space.exact_diameter is not None:
        return DiameterEstimate(float(space.exact_diameter), True, best_pair)
    return DiameterEstimate(best, False, best_pair)


def rescale_to_diameter(space: Space, target: float,
                        cfg: ToleranceConfig | None = None) -> Space:
    """Multiplicatively rescale all distances so the diameter becomes target.

    Pure rescale, never truncation: ratios of distances are preserved and
    the topology is unchanged.
    """
    if target <= 0:
        raise PreconditionError("target diameter must be positive")
    est = diameter(space, cfg)
    current = est.value
    if current <= 0.0:
        raise DomainError(f"space {space.id} has zero diameter; nothing to rescale")
    scale = target / current
    if scale == 1.0:
        return space
    new_id = f"{space.id}@diam={target:g}"
    if space.kind == "finite":
        # divide first so the max entry lands exactly on target
        return Space.from_matrix(new_id, (space.matrix / current) * target,
                                 basepoint=space.basepoint)

    base_dist = space._distance_fn
    base_many = space._distance_many_fn

    def dist(p, q):
        return base_dist(p, q) * scale

    dist_many = None
    if base_many is not None:
        def dist_many(P, Q):
            return base_many(P, Q) * scale

    rescaled = Space(new_id, space.kind, dist, space._sampler_fn,
                     basepoint=space.basepoint, group=space.group,
                     window=space.window, catalog=space.catalog,
                     params=space.params, dim=space.dim,
                     exact_diameter=(target if est.exact else None),
                     domain_fn=space._domain_fn, distance_many_fn=dist_many)
    return rescaled


def check_metric_axioms(space: Space, cfg: ToleranceConfig) -> VerificationReport:
    """Verify nonnegativity, zero self-distance, symmetry and the triangle
    inequality on sampled triples; small finite spaces are enumerated."""
    report = VerificationReport(command=f"check_metric_axioms:{space.id}",
                                seed=cfg.seed, tolerances=cfg.as_json())
    if space.kind == "finite" and space.size ** 3 <= 8000:
        ids = list(range(space.size))
        triples = [(a, b, c) for a in ids for b in ids for c in ids]
    else:
        pts = space.sample(3 * cfg.sample_pairs, cfg.seed)
        if not pts:
            raise DomainError(f"space {space.id} produced no sample points")
        triples = [(pts[3 * i], pts[3 * i + 1], pts[3 * i + 2])
                   for i in range(len(pts) // 3)]
    if not triples:
        raise DomainError(f"space {space.id} is empty")

    worst = {"nonnegativity": (0.0, None), "identity_zero_self": (0.0, None),
             "symmetry": (0.0, None), "triangle_inequality": (0.0, None)}

    def bump(key, v, w):
        if v > worst[key][0]:
            worst[key] = (v, w)

    for (x, y, z) in triples:
        dxy = space.distance(x, y)
        dyz = space.distance(y, z)
        dxz = space.distance(x, z)
        bump("nonnegativity", max(-dxy, -dyz, -dxz), (x, y, z))
        bump("identity_zero_self", abs(space.distance(x, x)), (x,))
        bump("symmetry", abs(dxy - space.distance(y, x)), (x, y))
        bump("triangle_inequality", dxz - dxy - dyz, (x, y, z))

    n = len(triples)
    report.add(CheckRecord.from_violation(
        "nonnegativity", "d(x,y) >= 0 on sampled pairs", n,
        worst["nonnegativity"][0], jsonable(worst["nonnegativity"][1]), cfg.abs_tol))
    report.add(CheckRecord.from_violation(
        "identity_zero_self", "d(x,x) = 0 on sampled points", n,
        worst["identity_zero_self"][0], jsonable(worst["identity_zero_self"][1]), cfg.abs_tol))
    report.add(CheckRecord.from_violation(
        "symmetry", "d(x,y) = d(y,x) on sampled pairs", n,
        worst["symmetry"][0], jsonable(worst["symmetry"][1]), cfg.abs_tol))
    report.add(CheckRecord.from_violation(
        "triangle_inequality", "d(x,z) <= d(x,y) + d(y,z) on sampled triples", n,
        worst["triangle_inequality"][0], jsonable(worst["triangle_inequality"][1]), cfg.abs_tol))
    return report
