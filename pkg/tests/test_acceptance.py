"""Acceptance sweep: one test per criterion, each printing a PASS/FAIL line.

Every tolerance here is pinned; sweeps are seeded and sized as stated in
the criterion. Run with `pytest tests/test_acceptance.py -v -s` to see the
per-criterion lines.
"""
import json
import math
import time

import numpy as np
import pytest

from dilatia import (PreconditionError, ToleranceConfig, build_cone,
                     build_family, canonical_family, check_metric_axioms,
                     cone_coordinates, cone_distance, estimate_local_bilipschitz,
                     extend_to_closure, gallery_build, gamma, gamma_grid_oracle,
                     heisenberg_group, limsup_metric, rescale_to_diameter,
                     sup_metric, unit_sphere_check, verify_cone_homeomorphism,
                     verify_dilation_family, IndexSetDescriptor)
from dilatia.cli import main
from dilatia.seeding import child_rng

SEED = 20240911


def _line(num, name, ok, detail=""):
    print(f"[acceptance {num:02d}] {name}: {'PASS' if ok else 'FAIL'} {detail}")
    return ok


def circle_cone(cfg):
    return build_cone(rescale_to_diameter(gallery_build("circle_arc"), 2.0, cfg), cfg)


def test_01_cone_metric_axioms_at_scale():
    cfg = ToleranceConfig(sample_pairs=10_000, exact_tol=1e-12, seed=SEED)
    cone = circle_cone(cfg)
    start = time.perf_counter()
    rep = check_metric_axioms(cone.space, cfg)
    elapsed = time.perf_counter() - start
    violation = rep.record("triangle_inequality").max_violation
    ok = violation <= 1e-12 and elapsed <= 5.0
    assert _line(1, "cone metric axioms on 1e4 triples", ok,
                 f"(max triangle violation {violation:.2e}, {elapsed:.2f}s)")


def test_02_exact_scaling_of_canonical_family():
    cfg = ToleranceConfig(seed=SEED)
    cone = circle_cone(cfg)
    fam = canonical_family(cone)
    pts = cone.space.sample(20_000, SEED)
    rng = child_rng(SEED, "acceptance:scaling")
    worst = 0.0
    for i in range(10_000):
        a = float(rng.random())
        u, v = pts[2 * i], pts[2 * i + 1]
        base = cone_distance(cone, u, v)
        err = abs(cone_distance(cone, fam.map(a, u), fam.map(a, v)) - a * base)
        worst = max(worst, err / (1.0 + a * base))
    ok = worst <= 1e-12
    assert _line(2, "exact scaling over 1e4 samples", ok, f"(worst {worst:.2e})")


def test_03_linearity_of_canonical_family():
    cfg = ToleranceConfig(seed=SEED)
    cone = circle_cone(cfg)
    fam = canonical_family(cone)
    pts = cone.space.sample(10_000, SEED + 1)
    rng = child_rng(SEED, "acceptance:linearity")
    worst = 0.0
    for x in pts:
        a, b, c = sorted(float(t) for t in rng.random(3))
        pa, pb, pc = fam.map(a, x), fam.map(b, x), fam.map(c, x)
        worst = max(worst, abs(cone_distance(cone, pa, pc)
                               - cone_distance(cone, pa, pb)
                               - cone_distance(cone, pb, pc)))
    ok = worst <= 1e-12
    assert _line(3, "radial additivity over 1e4 samples", ok, f"(worst {worst:.2e})")


def test_04_unit_sphere():
    cfg = ToleranceConfig(sample_pairs=1000, seed=SEED)
    rep = unit_sphere_check(circle_cone(cfg), cfg)
    worst = rep.record("unit_sphere_radius_one").max_violation
    ok = rep.passed and worst <= 1e-15
    assert _line(4, "unit sphere over 1e3 base points", ok, f"(worst {worst:.2e})")


def test_05_disk_decomposition():
    cfg = ToleranceConfig(abs_tol=1e-10, seed=SEED)
    act = gallery_build("disk_radial_action")
    xs = act.space.sample(10_000, SEED)
    worst_gamma, worst_round = 0.0, 0.0
    sphere_ref = None
    for x in xs:
        r = float(np.linalg.norm(x))
        g = gamma(act, x, 1.0, cfg)
        worst_gamma = max(worst_gamma, abs(g - r))
        cc = cone_coordinates(act, x, 1.0, cfg)
        base = cc.base if cc.base is not None else sphere_ref
        if base is None:
            continue
        sphere_ref = cc.base if cc.base is not None else sphere_ref
        worst_round = max(worst_round,
                          float(np.linalg.norm(act.act(cc.alpha, base) - x)))
    # grid-oracle agreement is checked on a 32-point subsample: the full
    # 1e4-point sweep would cost 4096 orbit evaluations per point
    cell_ok = True
    for x in xs[:32]:
        if np.linalg.norm(x) < 1e-3:
            continue
        beta = 1.0 / gamma(act, x, 1.0, cfg)
        lo, hi, width = gamma_grid_oracle(act, x, 1.0, cfg, n=4096)
        cell_ok = cell_ok and (lo - width <= beta <= hi + width)
    ok = worst_gamma <= 1e-9 and worst_round <= 1e-9 and cell_ok
    assert _line(5, "disk decomposition over 1e4 points", ok,
                 f"(gamma {worst_gamma:.2e}, roundtrip {worst_round:.2e}, "
                 f"grid cell agreement {cell_ok})")


def test_06_limsup_metric_on_truncated_window():
    cfg = ToleranceConfig(beta_floor=1e-8, seed=SEED)
    space = gallery_build("truncated_line")
    fam = build_family(space, "linear_scale")
    probes = space.sample(16, SEED + 2)
    alpha_start = min(estimate_local_bilipschitz(space, fam, p, cfg).alpha_x
                      for p in probes)
    pts = space.sample(2000, SEED + 3)
    worst = 0.0
    for i in range(1000):
        x, y = pts[2 * i], pts[2 * i + 1]
        d = limsup_metric(space, fam, x, y, cfg, alpha_start=alpha_start)
        worst = max(worst, abs(d - abs(float(x[0] - y[0]))))
    rng = child_rng(SEED, "acceptance:limsup")
    worst_dil = 0.0
    for i in range(100):
        x, y = pts[2 * i], pts[2 * i + 1]
        d = limsup_metric(space, fam, x, y, cfg, alpha_start=alpha_start)
        for g in rng.uniform(0.05, 1.0, 4):
            g = float(g)
            dg = limsup_metric(space, fam, fam.map(g, x), fam.map(g, y), cfg,
                               alpha_start=alpha_start)
            worst_dil = max(worst_dil, abs(dg - g * d))
    ok = worst <= 1e-6 and worst_dil <= 1e-6
    assert _line(6, "small-scale limit metric over 1e3 pairs", ok,
                 f"(|D - |x-y|| {worst:.2e}, dilation residual {worst_dil:.2e})")


def test_07_heisenberg_conical_group():
    cfg = ToleranceConfig(seed=SEED)
    heis = gallery_build("heisenberg")
    grp = heis.group
    fam = build_family(heis, "heisenberg_dilation")
    pts = heis.sample(2000, SEED + 4)
    worst_sup = 0.0
    for i in range(1000):
        x, y = pts[2 * i], pts[2 * i + 1]
        worst_sup = max(worst_sup, abs(sup_metric(heis, grp, x, y, cfg,
                                                  count=10_000)
                                       - heis.distance(x, y)))

    def norm(u):
        return sup_metric(heis, grp, u, grp.identity, cfg, count=10_000)

    rng = child_rng(SEED, "acceptance:heisenberg")
    worst_inv, worst_sub, worst_hom = 0.0, 0.0, 0.0
    for i in range(48):
        x, y = pts[2 * i], pts[2 * i + 1]
        nx, ny = norm(x), norm(y)
        worst_inv = max(worst_inv, abs(norm(grp.inverse(x)) - nx))
        worst_sub = max(worst_sub, norm(grp.op(x, y)) - nx - ny)
        lam = float(rng.uniform(0.1, 3.0))
        worst_hom = max(worst_hom, abs(norm(fam.map(lam, x)) - lam * nx))
    ok = worst_sup <= 1e-12 and worst_inv <= 1e-9 and worst_sub <= 1e-9 \
        and worst_hom <= 1e-9
    assert _line(7, "translation sup metric and norm laws", ok,
                 f"(sup vs gauge {worst_sup:.2e}, inverse {worst_inv:.2e}, "
                 f"subadd {worst_sub:.2e}, homogeneity {worst_hom:.2e})")


def test_08_closure_extension_to_irrational_scale():
    cfg = ToleranceConfig(seed=SEED)
    ball = gallery_build("euclidean_ball")
    fam = build_family(ball, "linear_scale",
                       index=IndexSetDescriptor("rationals_01"))
    target = 1.0 / math.sqrt(2.0)
    worst = 0.0
    for x in ball.sample(100, SEED + 5):
        p = extend_to_closure(fam, target, x, cfg)
        worst = max(worst, float(np.linalg.norm(p - target * x)))
    ok = worst <= 1e-9
    assert _line(8, "closure extension at 1/sqrt(2) over 1e2 points", ok,
                 f"(worst {worst:.2e})")


def test_09_negative_controls(tmp_path):
    cfg = ToleranceConfig(seed=SEED)
    rot = gallery_build("rotation_scale_family")
    rot_rep = verify_dilation_family(rot, cfg)
    rot_ok = (not rot_rep.record("composition").passed
              and rot_rep.record("composition").max_violation >= 0.1)

    off = gallery_build("offset_scale_family")
    off_rep = verify_dilation_family(off, cfg)
    x0 = off.space.basepoint
    v_norm = 0.5  # gallery default v = (0.5, 0)
    witnessed = off.space.distance(off.map(0.5, x0), x0)
    off_ok = (not off_rep.record("center_fixed").passed
              and abs(witnessed - 0.5 * v_norm) <= 1e-12)

    ring = gallery_build("fixed_ring_action")
    try:
        verify_cone_homeomorphism(ring, 2.7, cfg)
        ring_ok = False
    except PreconditionError:
        ring_ok = True

    rc_guard = main(["build-cone", "--space", "gallery:circle_arc",
                     "--pairs", "60", "--out", str(tmp_path / "guard.json")])
    unsafe_out = tmp_path / "unsafe.json"
    rc_unsafe = main(["build-cone", "--space", "gallery:circle_arc",
                      "--allow-unsafe-diameter", "--pairs", "60",
                      "--out", str(unsafe_out)])
    unsafe = json.loads(unsafe_out.read_text())
    tri = next(c for c in unsafe["checks"] if c["name"] == "triangle_inequality")
    cli_ok = rc_guard == 2 and rc_unsafe == 1 and not tri["pass"] \
        and tri["witness"] is not None

    ok = rot_ok and off_ok and ring_ok and cli_ok
    assert _line(9, "negative controls fail as documented", ok,
                 f"(rotation {rot_ok}, offset {off_ok}, fixed ring {ring_ok}, "
                 f"cone guard {cli_ok})")


def test_10_report_determinism(tmp_path):
    commands = [
        ["verify-family", "--space", "gallery:euclidean_ball",
         "--family", "linear_scale", "--pairs", "40"],
        ["verify-family", "--family", "rotation_scale_family", "--pairs", "40"],
        ["verify-linear", "--space", "cone:gallery:circle_arc", "--rescale",
         "--family", "cone_canonical", "--pairs", "40"],
        ["build-cone", "--space", "gallery:circle_arc", "--rescale",
         "--pairs", "40"],
        ["build-cone", "--space", "gallery:circle_arc",
         "--allow-unsafe-diameter", "--pairs", "40"],
        ["decompose", "--action", "disk_radial_action", "--epsilon", "1.0",
         "--pairs", "40"],
        ["derive-metric", "--space", "gallery:truncated_line",
         "--family", "linear_scale", "--pairs", "60"],
        ["group-norm", "--space", "gallery:heisenberg", "--pairs", "40"],
        ["gallery", "list"],
    ]
    ok = True
    for i, args in enumerate(commands):
        seeded = args + (["--seed", str(SEED)] if args[0] != "gallery" else [])
        a = tmp_path / f"{i}a.out"
        b = tmp_path / f"{i}b.out"
        main(seeded + ["--out", str(a)])
        main(seeded + ["--out", str(b)])
        ok = ok and a.read_bytes() == b.read_bytes()
    assert _line(10, "byte-identical reports across reruns", ok,
                 f"({len(commands)} commands)")
