"""Command-line entry point: parse specs, dispatch, emit JSON reports.

Exit codes: 0 when every check passed, 1 when at least one check failed,
2 for spec or domain errors. Reports are byte-identical across runs with
the same (spec, seed, tolerances).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .cone_builder import ConeSpace, build_cone, canonical_family, unit_sphere_check
from .derived_metrics import verify_conical_group, verify_limsup_metric
from .dilation_family import (DilationFamily, IndexSetDescriptor, check_pure_set,
                              verify_dilation_family, verify_linearity)
from .errors import DilatiaError, SpecError
from .metric_core import (Space, ToleranceConfig, Window, check_metric_axioms,
                          diameter, rescale_to_diameter)
from .radial_decomposition import (RadialAction, cone_coordinates, default_epsilon,
                                   verify_cone_homeomorphism, verify_metric_cone,
                                   verify_partition, verify_radial_action)
from .report import CheckRecord, VerificationReport, jsonable
from .space_gallery import (GALLERY, MAP_CATALOG, build_family, gallery_build,
                            gallery_entries, heisenberg_group)

COMMANDS = ("verify-family", "verify-linear", "build-cone", "decompose",
            "derive-metric", "group-norm", "gallery")


@dataclass
class RunConfig:
    command: str
    space: str | None = None
    family: str | None = None
    action: str | None = None
    group: str | None = None
    epsilon: float | None = None
    pairs: int | None = None
    grid: int | None = None
    seed: int = 0
    tol: float | None = None
    exact_tol: float | None = None
    out: str | None = None
    rescale: bool = False
    allow_unsafe_diameter: bool = False
    gallery_verb: str = "list"
    extra: dict = field(default_factory=dict)

    def tolerance_config(self) -> ToleranceConfig:
        kwargs = {"seed": self.seed}
        if self.tol is not None:
            kwargs["abs_tol"] = self.tol
        if self.exact_tol is not None:
            kwargs["exact_tol"] = self.exact_tol
        if self.pairs is not None:
            kwargs["sample_pairs"] = self.pairs
        if self.grid is not None:
            kwargs["grid_size"] = self.grid
        return ToleranceConfig(**kwargs)


# -- spec parsing -----------------------------------------------------------

def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise SpecError(f"spec file not found: {path}")
    except json.JSONDecodeError as err:
        raise SpecError(f"malformed JSON in {path}: {err}")


def _need(spec: dict, key: str, where: str):
    if key not in spec:
        raise SpecError(f"{where} is missing required key {key!r}")
    return spec[key]


def parse_window_spec(spec: dict) -> Window:
    kind = _need(spec, "kind", "window spec")
    if kind == "box":
        return Window.box(_need(spec, "lo", "box window"),
                          _need(spec, "hi", "box window"))
    if kind == "ball":
        return Window.ball(_need(spec, "center", "ball window"),
                           _need(spec, "radius", "ball window"))
    raise SpecError(f"window spec key 'kind' must be 'box' or 'ball', got {kind!r}")


def parse_space_spec(spec: dict) -> Space:
    space_id = _need(spec, "id", "space spec")
    kind = _need(spec, "kind", "space spec")
    if kind == "finite":
        matrix = _need(spec, "matrix", f"finite space {space_id!r}")
        if isinstance(matrix, str):
            try:
                matrix = np.loadtxt(matrix, delimiter=",", ndmin=2)
            except OSError as err:
                raise SpecError(f"space {space_id!r}: cannot read matrix CSV: {err}")
        return Space.from_matrix(space_id, matrix, basepoint=spec.get("basepoint"))
    if kind != "analytic":
        raise SpecError(f"space spec key 'kind' must be 'finite' or 'analytic', "
                        f"got {kind!r}")
    body = spec.get("analytic", spec)
    group_name = spec.get("group")
    group = None
    if group_name is not None:
        if group_name != "heisenberg":
            raise SpecError(f"space spec key 'group' names unknown group "
                            f"{group_name!r}")
        group = heisenberg_group()
    return Space.analytic(
        space_id,
        _need(body, "catalog", f"analytic space {space_id!r}"),
        int(_need(body, "dim", f"analytic space {space_id!r}")),
        parse_window_spec(_need(body, "window", f"analytic space {space_id!r}")),
        params=body.get("params"),
        basepoint=spec.get("basepoint"),
        group=group,
        bounded_domain=bool(body.get("bounded_domain", False)),
    )


def parse_index_spec(spec: dict) -> IndexSetDescriptor:
    kind = _need(spec, "kind", "index spec")
    params = spec.get("params", {})
    kwargs = {}
    if "q" in spec or "q" in params:
        kwargs["q"] = float(spec.get("q", params.get("q", 0.0)))
    if "members" in spec or "members" in params:
        kwargs["members"] = tuple(spec.get("members", params.get("members", ())))
    return IndexSetDescriptor(kind, **kwargs)


def resolve_space(ref: str, cfg: ToleranceConfig, rescale: bool = False,
                  allow_unsafe: bool = False):
    """Resolve a space reference: gallery:<name>, cone:<ref>, or a JSON path.

    Cone references return the ConeSpace; its induced Space view is used
    wherever a plain space is expected.
    """
    if ref.startswith("cone:"):
        base = resolve_space(ref[len("cone:"):], cfg, rescale=rescale,
                             allow_unsafe=allow_unsafe)
        base = base.space if isinstance(base, ConeSpace) else base
        if rescale:
            base = rescale_to_diameter(base, 2.0, cfg)
        return build_cone(base, cfg, allow_unsafe_diameter=allow_unsafe)
    if ref.startswith("gallery:"):
        obj = gallery_build(ref[len("gallery:"):])
        if not isinstance(obj, Space):
            raise SpecError(f"{ref} is not a space entry")
        space = obj
    else:
        space = parse_space_spec(_load_json(ref))
    if rescale:
        space = rescale_to_diameter(space, 2.0, cfg)
    return space


def resolve_family(ref: str, space, cfg: ToleranceConfig) -> DilationFamily:
    name = ref[len("gallery:"):] if ref.startswith("gallery:") else ref
    if name in GALLERY and GALLERY[name].kind == "family":
        return gallery_build(name)
    if name == "cone_canonical":
        if not isinstance(space, ConeSpace):
            raise SpecError("cone_canonical needs a cone space "
                            "(use --space cone:<base>)")
        return canonical_family(space)
    if name in MAP_CATALOG:
        if space is None:
            raise SpecError(f"family map {name!r} needs --space")
        plain = space.space if isinstance(space, ConeSpace) else space
        return build_family(plain, name)
    spec = _load_json(ref)
    fam_space = space
    if "space" in spec:
        fam_space = resolve_space(spec["space"], cfg)
    if fam_space is None:
        raise SpecError(f"family spec {ref} names no space and no --space given")
    plain = fam_space.space if isinstance(fam_space, ConeSpace) else fam_space
    map_spec = _need(spec, "map", f"family spec {ref}")
    index = parse_index_spec(spec["index"]) if "index" in spec else None
    return build_family(plain, _need(map_spec, "catalog", f"family spec {ref}"),
                        params=map_spec.get("params"), index=index)


def resolve_action(ref: str, space, cfg: ToleranceConfig) -> RadialAction:
    name = ref[len("gallery:"):] if ref.startswith("gallery:") else ref
    if name in GALLERY and GALLERY[name].kind == "action":
        return gallery_build(name)
    if name == "radial_scale":
        if space is None:
            raise SpecError("action 'radial_scale' needs --space")
        plain = space.space if isinstance(space, ConeSpace) else space
        if plain.basepoint is None:
            raise SpecError(f"space {plain.id} has no basepoint for radial_scale")
        x0 = plain.basepoint
        return RadialAction(space=plain,
                            act=lambda a, p: x0 + float(a) * (p - x0),
                            name=f"radial_scale@{plain.id}")
    raise SpecError(f"unknown action {name!r}; use a gallery action or "
                    "'radial_scale'")


# -- command implementations --------------------------------------------------

def _cmd_verify_family(config: RunConfig, cfg: ToleranceConfig) -> VerificationReport:
    if config.family is None:
        raise SpecError("verify-family needs --family")
    space = (resolve_space(config.space, cfg, config.rescale,
                           config.allow_unsafe_diameter)
             if config.space else None)
    fam = resolve_family(config.family, space, cfg)
    report = VerificationReport(command=f"verify-family:{fam.name}", seed=cfg.seed,
                                tolerances=cfg.as_json())
    report.merge(check_pure_set(fam.index, cfg))
    report.merge(verify_dilation_family(fam, cfg))
    return report


def _cmd_verify_linear(config: RunConfig, cfg: ToleranceConfig) -> VerificationReport:
    if config.family is None:
        raise SpecError("verify-linear needs --family")
    space = (resolve_space(config.space, cfg, config.rescale,
                           config.allow_unsafe_diameter)
             if config.space else None)
    fam = resolve_family(config.family, space, cfg)
    report = VerificationReport(command=f"verify-linear:{fam.name}", seed=cfg.seed,
                                tolerances=cfg.as_json())
    report.merge(verify_dilation_family(fam, cfg))
    report.merge(verify_linearity(fam, cfg))
    return report


def _cmd_build_cone(config: RunConfig, cfg: ToleranceConfig) -> VerificationReport:
    if config.space is None:
        raise SpecError("build-cone needs --space")
    ref = config.space
    if not ref.startswith("cone:"):
        ref = "cone:" + ref
    cone = resolve_space(ref, cfg, rescale=config.rescale,
                         allow_unsafe=config.allow_unsafe_diameter)
    report = VerificationReport(command=f"build-cone:{cone.space.id}", seed=cfg.seed,
                                tolerances=cfg.as_json())
    est = cone.base_diameter
    report.add(CheckRecord.from_violation(
        "base_diameter", "the base has diameter at most 2", 1,
        max(est.value - 2.0, 0.0), jsonable(est.witness), cfg.exact_tol,
        info={"value": est.value, "exact": est.exact}))
    report.merge(check_metric_axioms(cone.space, cfg))
    fam = canonical_family(cone)
    report.merge(verify_dilation_family(fam, cfg))
    report.merge(verify_linearity(fam, cfg))
    report.merge(unit_sphere_check(cone, cfg))
    report.info["base"] = cone.base.id
    report.info["space_id"] = cone.space.id
    return report


def _cmd_decompose(config: RunConfig, cfg: ToleranceConfig) -> VerificationReport:
    if config.action is None:
        raise SpecError("decompose needs --action")
    space = (resolve_space(config.space, cfg, config.rescale,
                           config.allow_unsafe_diameter)
             if config.space else None)
    action = resolve_action(config.action, space, cfg)
    eps = config.epsilon if config.epsilon is not None else default_epsilon(action, cfg)
    report = VerificationReport(command=f"decompose:{action.name}", seed=cfg.seed,
                                tolerances=cfg.as_json())
    report.info["epsilon"] = eps
    action_report = verify_radial_action(action, cfg)
    report.merge(action_report)
    if not action_report.passed:
        report.info["skipped"] = "action laws failed; decomposition not attempted"
        return report
    part = verify_partition(action, cfg, epsilon=eps)
    report.merge(part)
    report.merge(verify_cone_homeomorphism(action, eps, cfg))
    report.merge(verify_metric_cone(action, eps, cfg))

    xs = action.space.sample(min(cfg.sample_pairs, 256), cfg.seed)
    gammas, residuals = [], []
    sphere_ref = None
    for x in xs:
        coords = cone_coordinates(action, x, eps, cfg)
        gammas.append(coords.alpha)
        base = coords.base if coords.base is not None else sphere_ref
        sphere_ref = coords.base if coords.base is not None else sphere_ref
        if base is not None:
            residuals.append(action.space.distance(
                action.act(coords.alpha, base), x))
    hist, edges = np.histogram(gammas, bins=10)
    report.info["gamma_histogram"] = {"counts": [int(c) for c in hist],
                                      "edges": [float(e) for e in edges]}
    if residuals:
        report.info["roundtrip_residuals"] = {
            "max": float(np.max(residuals)),
            "mean": float(np.mean(residuals)),
            "count": len(residuals),
        }
    report.info["base_sample"] = [jsonable(c) for c in
                                  boundary_sample_preview(action, eps, cfg)]
    report.info.update({k: part.info[k] for k in part.info
                        if k.startswith("base_")})
    return report


def boundary_sample_preview(action: RadialAction, eps: float,
                            cfg: ToleranceConfig, k: int = 8) -> list:
    from .radial_decomposition import boundary_set
    return boundary_set(action, eps, cfg, count=4 * k)[:k]


def _cmd_derive_metric(config: RunConfig, cfg: ToleranceConfig) -> VerificationReport:
    if config.space is None or config.family is None:
        raise SpecError("derive-metric needs --space and --family")
    space = resolve_space(config.space, cfg, config.rescale,
                          config.allow_unsafe_diameter)
    plain = space.space if isinstance(space, ConeSpace) else space
    fam = resolve_family(config.family, space, cfg)
    report = VerificationReport(command=f"derive-metric:{fam.name}", seed=cfg.seed,
                                tolerances=cfg.as_json())
    report.merge(verify_limsup_metric(plain, fam, cfg))
    return report


def _cmd_group_norm(config: RunConfig, cfg: ToleranceConfig) -> VerificationReport:
    if config.space is None:
        raise SpecError("group-norm needs --space")
    space = resolve_space(config.space, cfg, config.rescale,
                          config.allow_unsafe_diameter)
    plain = space.space if isinstance(space, ConeSpace) else space
    if config.group is not None:
        name = config.group.removeprefix("gallery:")
        if name != "heisenberg":
            raise SpecError(f"unknown group {config.group!r}")
        grp = heisenberg_group()
    elif plain.group is not None:
        grp = plain.group
    else:
        raise SpecError(f"space {plain.id} carries no group; pass --group")
    fam = resolve_family(config.family or "heisenberg_dilation", space, cfg)
    report = VerificationReport(command=f"group-norm:{fam.name}", seed=cfg.seed,
                                tolerances=cfg.as_json())
    report.merge(verify_conical_group(plain, grp, fam, cfg))
    return report


def _cmd_gallery(config: RunConfig) -> str:
    if config.gallery_verb != "list":
        raise SpecError(f"unknown gallery verb {config.gallery_verb!r}; try 'list'")
    lines = []
    for e in gallery_entries():
        tag = " [negative control]" if e.negative else ""
        lines.append(f"{e.name} ({e.kind}){tag}")
        lines.append(f"    {e.doc}")
        if e.defaults:
            lines.append(f"    defaults: {json.dumps(e.defaults, sort_keys=True)}")
        if e.fails:
            lines.append(f"    documented to fail: {', '.join(e.fails)}")
    return "\n".join(lines) + "\n"


def run(config: RunConfig) -> int:
    """Execute one command; write its report; map outcomes to exit codes."""
    try:
        if config.command == "gallery":
            _emit(_cmd_gallery(config), config.out)
            return 0
        cfg = config.tolerance_config()
        handler = {
            "verify-family": _cmd_verify_family,
            "verify-linear": _cmd_verify_linear,
            "build-cone": _cmd_build_cone,
            "decompose": _cmd_decompose,
            "derive-metric": _cmd_derive_metric,
            "group-norm": _cmd_group_norm,
        }.get(config.command)
        if handler is None:
            raise SpecError(f"unknown command {config.command!r}")
        report = handler(config, cfg)
    except DilatiaError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    _emit(report.to_json(), config.out)
    return 0 if report.passed else 1


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dilatia",
        description="Construct cone metrics, dilation families and derived "
                    "metrics, and verify their laws numerically.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None,
                       help="root seed (falls back to DILATIA_SEED, then 0)")
        p.add_argument("--tol", type=float, default=None, help="absolute tolerance")
        p.add_argument("--exact-tol", type=float, default=None,
                       help="tolerance for analytically exact identities")
        p.add_argument("--pairs", type=int, default=None, help="sample sweep size")
        p.add_argument("--grid", type=int, default=None, help="parameter grid size")
        p.add_argument("--out", default=None, help="write the JSON report here")

    def spaced(p, family=False, action=False, group=False, epsilon=False):
        p.add_argument("--space", default=None,
                       help="gallery:<name>, cone:<ref>, or a JSON spec path")
        p.add_argument("--rescale", action="store_true",
                       help="rescale the space to diameter 2 first")
        p.add_argument("--allow-unsafe-diameter", action="store_true",
                       help="test mode: bypass the cone diameter guard")
        if family:
            p.add_argument("--family", default=None,
                           help="gallery entry, catalog map name, or JSON spec path")
        if action:
            p.add_argument("--action", default=None,
                           help="gallery action or 'radial_scale'")
        if group:
            p.add_argument("--group", default=None, help="group name (heisenberg)")
        if epsilon:
            p.add_argument("--epsilon", type=float, default=None,
                           help="sphere radius for the decomposition")

    p = sub.add_parser("verify-family", help="check the dilation family laws")
    spaced(p, family=True)
    common(p)
    p = sub.add_parser("verify-linear", help="check radial additivity of a family")
    spaced(p, family=True)
    common(p)
    p = sub.add_parser("build-cone", help="build a cone and verify its metric")
    spaced(p)
    common(p)
    p = sub.add_parser("decompose", help="radial decomposition under an action")
    spaced(p, action=True, epsilon=True)
    common(p)
    p = sub.add_parser("derive-metric", help="small-scale limit metric checks")
    spaced(p, family=True)
    common(p)
    p = sub.add_parser("group-norm", help="translation sup metric and norm laws")
    spaced(p, family=True, group=True)
    common(p)
    p = sub.add_parser("gallery", help="list built-in spaces, actions and families")
    p.add_argument("verb", nargs="?", default="list")
    p.add_argument("--out", default=None)
    return parser


def _seed_from(ns) -> int:
    if getattr(ns, "seed", None) is not None:
        return ns.seed
    env = os.environ.get("DILATIA_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SpecError(f"DILATIA_SEED must be an integer, got {env!r}")
    return 0


def main(argv=None) -> int:
    ns = _build_parser().parse_args(argv)
    try:
        seed = _seed_from(ns)
    except SpecError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    config = RunConfig(
        command=ns.command,
        space=getattr(ns, "space", None),
        family=getattr(ns, "family", None),
        action=getattr(ns, "action", None),
        group=getattr(ns, "group", None),
        epsilon=getattr(ns, "epsilon", None),
        pairs=getattr(ns, "pairs", None),
        grid=getattr(ns, "grid", None),
        seed=seed,
        tol=getattr(ns, "tol", None),
        exact_tol=getattr(ns, "exact_tol", None),
        out=getattr(ns, "out", None),
        rescale=getattr(ns, "rescale", False),
        allow_unsafe_diameter=getattr(ns, "allow_unsafe_diameter", False),
        gallery_verb=getattr(ns, "verb", "list"),
    )
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
