"""Built-in catalog of spaces, actions, groups and families.

Positive entries pass their module verifiers with default tolerances;
negative controls are first-class entries documented with the exact checks
they break, so the verifiers' failure paths are themselves exercised.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dilation_family import DilationFamily, IndexSetDescriptor
from .derived_metrics import GroupStructure
from .errors import SpecError
from .metric_core import (Space, Window, heisenberg_inverse, heisenberg_multiply,
                          heisenberg_multiply_many)
from .radial_decomposition import RadialAction


@dataclass(frozen=True)
class GalleryEntry:
    name: str
    kind: str  # space | action | group | family
    doc: str
    builder: Callable
    defaults: dict = field(default_factory=dict)
    negative: bool = False
    fails: tuple = ()

    def as_json(self):
        return {"name": self.name, "kind": self.kind, "doc": self.doc,
                "defaults": dict(self.defaults), "negative": self.negative,
                "fails": list(self.fails)}


# -- space builders ---------------------------------------------------------

def _euclidean_ball(n=2, r=1.0) -> Space:
    n, r = int(n), float(r)
    return Space.analytic(f"euclidean_ball({n},{r:g})", "euclidean", n,
                          Window.ball([0.0] * n, r), basepoint=[0.0] * n)


def _circle_arc() -> Space:
    return Space.analytic("circle_arc", "circle_arc", 1,
                          Window.box([0.0], [2.0 * math.pi]))


def _truncated_line(window=10.0, kappa=1.0) -> Space:
    w, k = float(window), float(kappa)
    return Space.analytic(f"truncated_line({w:g},{k:g})", "truncated", 1,
                          Window.box([-w], [w]), params={"kappa": k},
                          basepoint=[0.0])


def _sup_cube(n=3) -> Space:
    n = int(n)
    return Space.analytic(f"sup_cube({n})", "sup", n,
                          Window.box([0.0] * n, [1.0] * n), basepoint=[0.0] * n,
                          bounded_domain=True)


def heisenberg_group() -> GroupStructure:
    return GroupStructure(op=heisenberg_multiply, inverse=heisenberg_inverse,
                          identity=np.zeros(3), op_many=heisenberg_multiply_many,
                          name="heisenberg")


def _heisenberg(window=1.0) -> Space:
    w = float(window)
    return Space.analytic(f"heisenberg({w:g})", "koranyi", 3,
                          Window.box([-w] * 3, [w] * 3), basepoint=[0.0, 0.0, 0.0],
                          group=heisenberg_group())


def _finite_matrix(file=None, matrix=None) -> Space:
    if matrix is not None:
        return Space.from_matrix("finite_matrix", matrix)
    if file is None:
        raise SpecError("finite_matrix needs a 'file' (CSV, row-major, no header) "
                        "or an inline 'matrix'")
    m = np.loadtxt(file, delimiter=",", ndmin=2)
    return Space.from_matrix(f"finite_matrix({file})", m)


# -- action builders --------------------------------------------------------

def _radial_scale_act(space: Space):
    x0 = space.basepoint

    def act(alpha, p):
        return x0 + float(alpha) * (p - x0)

    return act


def _disk_radial_action(n=2, r=1.0) -> RadialAction:
    space = _euclidean_ball(n, r)
    return RadialAction(space=space, act=_radial_scale_act(space),
                        name=f"disk_radial({int(n)},{float(r):g})",
                        declared_shrinking=True, expanding=True)


def _cube_coordinatewise_action(n=3) -> RadialAction:
    space = _sup_cube(n)
    return RadialAction(space=space, act=_radial_scale_act(space),
                        name=f"cube_coordinatewise({int(n)})",
                        declared_shrinking=True, expanding=True)


def _fixed_ring_action(ring=2.0, window_r=3.0) -> RadialAction:
    space = _euclidean_ball(2, window_r)
    x0 = space.basepoint
    ring = float(ring)

    def act(alpha, p):
        a = float(alpha)
        if a == 0.0:
            return x0
        if float(np.linalg.norm(p - x0)) >= ring:
            return p
        return x0 + a * (p - x0)

    return RadialAction(space=space, act=act,
                        name=f"fixed_ring({ring:g})",
                        declared_shrinking=True, expanding=True)


# -- family map catalog -----------------------------------------------------

def _linear_scale_map(space: Space):
    x0 = space.basepoint
    if x0 is None:
        raise SpecError(f"space {space.id} has no basepoint for linear_scale")

    def m(alpha, p):
        return x0 + float(alpha) * (p - x0)

    return m


def _rotation_scale_map(space: Space):
    x0 = space.basepoint
    if space.dim != 2:
        raise SpecError("rotation_scale is a planar map")

    def m(alpha, p):
        a = float(alpha)
        v = p - x0
        c, s = math.cos(a), math.sin(a)
        return x0 + a * np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])

    return m


def _offset_scale_map(space: Space, v):
    x0 = space.basepoint
    v = np.asarray(v, dtype=float)

    def m(alpha, p):
        a = float(alpha)
        return x0 + a * (p - x0) + (1.0 - a) * v

    return m


def _heisenberg_dilation_map(space: Space):
    def m(alpha, p):
        a = float(alpha)
        return np.array([a * p[0], a * p[1], a * a * p[2]])

    return m


# Index defaults keep positive families inside their windows; powers of two
# make the anisotropic dilation laws exact in float arithmetic.
MAP_CATALOG = {
    "linear_scale": {
        "build": lambda space, params: _linear_scale_map(space),
        "index": IndexSetDescriptor("interval_01"),
        "exact_catalogs": ("euclidean", "sup"),
    },
    "rotation_scale": {
        "build": lambda space, params: _rotation_scale_map(space),
        "index": IndexSetDescriptor("interval_01"),
        "exact_catalogs": (),
    },
    "offset_scale": {
        "build": lambda space, params: _offset_scale_map(
            space, params.get("v", (0.5, 0.0))),
        "index": IndexSetDescriptor("interval_01"),
        "exact_catalogs": (),
    },
    "heisenberg_dilation": {
        "build": lambda space, params: _heisenberg_dilation_map(space),
        "index": IndexSetDescriptor("geometric", q=2.0),
        "exact_catalogs": ("koranyi",),
    },
}


def build_family(space: Space, map_name: str, params: dict | None = None,
                 index: IndexSetDescriptor | None = None) -> DilationFamily:
    """Wire a catalog map to a space, with its safe default index set."""
    if map_name not in MAP_CATALOG:
        raise SpecError(f"unknown family map {map_name!r}; "
                        f"choose one of {sorted(MAP_CATALOG)} or 'cone_canonical'")
    entry = MAP_CATALOG[map_name]
    fam_map = entry["build"](space, dict(params or {}))
    idx = index if index is not None else entry["index"]
    exact = space.catalog in entry["exact_catalogs"]
    return DilationFamily(space=space, index=idx, map=fam_map,
                          name=f"{map_name}@{space.id}", exact=exact)


def _rotation_scale_family() -> DilationFamily:
    return build_family(_euclidean_ball(2, 1.0), "rotation_scale")


def _offset_scale_family(v=(0.5, 0.0)) -> DilationFamily:
    return build_family(_euclidean_ball(2, 1.0), "offset_scale", params={"v": v})


GALLERY = {}


def _register(entry: GalleryEntry):
    GALLERY[entry.name] = entry


_register(GalleryEntry(
    "euclidean_ball", "space",
    "flat n-ball about the origin; linear scaling about 0 is an exact dilation",
    _euclidean_ball, {"n": 2, "r": 1.0}))
_register(GalleryEntry(
    "circle_arc", "space",
    "unit circle with arc-length distance (diameter pi); rescale before coning",
    _circle_arc))
_register(GalleryEntry(
    "truncated_line", "space",
    "interval with d = min(|x-y|, kappa); the small-scale limit metric "
    "recovers |x-y|",
    _truncated_line, {"window": 10.0, "kappa": 1.0}))
_register(GalleryEntry(
    "sup_cube", "space",
    "[0,1]^n with the sup metric; coordinatewise scaling decomposes it over "
    "the face set {max coordinate = 1}, which at finite n is closed",
    _sup_cube, {"n": 3}))
_register(GalleryEntry(
    "heisenberg", "space",
    "R^3 with the gauge ((x^2+y^2)^2 + 16 z^2)^(1/4) as a left-invariant "
    "group distance; anisotropic dilations make it a normed conical group",
    _heisenberg, {"window": 1.0}))
_register(GalleryEntry(
    "finite_matrix", "space",
    "finite space from an explicit distance matrix (CSV file or inline)",
    _finite_matrix, {"file": None, "matrix": None}))
_register(GalleryEntry(
    "disk_radial_action", "action",
    "radial scaling of the disk: polar coordinates are its cone coordinates",
    _disk_radial_action, {"n": 2, "r": 1.0}))
_register(GalleryEntry(
    "cube_coordinatewise_action", "action",
    "coordinatewise scaling of the sup cube toward the origin corner",
    _cube_coordinatewise_action, {"n": 3}))
_register(GalleryEntry(
    "rotation_scale_family", "family",
    "scaling with an alpha-dependent rotation: angles add where scales "
    "multiply, so composition breaks (identity-at-1 breaks with it)",
    _rotation_scale_family, negative=True,
    fails=("composition", "identity_at_one", "limit_equals_identity")))
_register(GalleryEntry(
    "offset_scale_family", "family",
    "scaling followed by a drift toward v != x0: the center is not fixed "
    "(and the zero map lands on v)",
    _offset_scale_family, {"v": (0.5, 0.0)}, negative=True,
    fails=("center_fixed", "zero_map")))
_register(GalleryEntry(
    "fixed_ring_action", "action",
    "radial scaling frozen from radius 2 outward: points there do not move "
    "toward the center, so strict shrinking fails",
    _fixed_ring_action, {"ring": 2.0, "window_r": 3.0}, negative=True,
    fails=("shrinking",)))


def gallery_entries() -> list:
    return [GALLERY[name] for name in sorted(GALLERY)]


def gallery_build(name: str, params: dict | None = None):
    """Construct a catalog entry by name with overridable parameters."""
    if name not in GALLERY:
        raise SpecError(f"unknown gallery entry {name!r}; "
                        f"choose one of {sorted(GALLERY)}")
    entry = GALLERY[name]
    merged = dict(entry.defaults)
    for key, value in (params or {}).items():
        if key not in entry.defaults:
            raise SpecError(f"gallery entry {name!r} has no parameter {key!r} "
                            f"(known: {sorted(entry.defaults) or 'none'})")
        merged[key] = value
    return entry.builder(**merged)
