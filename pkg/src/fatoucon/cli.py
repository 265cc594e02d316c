"""Command-line entry point: ``fatoucon <subcommand> --config FILE``.

Exit codes: 0 success, 1 a check failed, 2 configuration error,
3 parameters outside the small-lambda regime.
"""
from __future__ import annotations

import argparse
import cmath
import datetime as _dt
import math
import sys
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from ._jit import set_threads
from .config import ConfigError, RunConfig, load_config, parse_window
from .connectivity import (
    CheckResult,
    ItineraryError,
    critical_itinerary,
    digraph_checks,
    enumerate_attainable,
    verify_measured,
)
from .mapcore import MapParams, rat_eval
from .orbits import NoEscapeRadius, RadiiModel, RegimeViolation, estimate_K, radii_model
from .plane import PlaneAnalysis, PlaneSettings, analyze_plane, auto_global_window
from .raster import Window, rasterize, save_png, tag_roles
from .report import (
    SCHEMA_VERSION,
    check_dict,
    critical_dict,
    dumps,
    itinerary_dict,
    radii_dict,
    record_dict,
    window_dict,
    witness_dict,
)
from .roots import AmbiguousPartition, critical_set
from .search import SearchError, UnrealizableRequest, realize_connectivity

__all__ = [
    "main",
    "build_parser",
    "cmd_render",
    "cmd_roots",
    "cmd_verify",
    "cmd_itinerary",
    "cmd_enumerate",
    "cmd_search",
    "EXIT_OK",
    "EXIT_CHECK",
    "EXIT_CONFIG",
    "EXIT_REGIME",
]

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_REGIME = 0, 1, 2, 3
Log = Callable[[str], None]


def _quiet(msg: str) -> None:
    pass


# ---------------------------------------------------------------------------
# shared pieces

def _header(cfg: RunConfig, command: str) -> dict:
    p = cfg.params()
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config": cfg.as_dict(),
        "params": {"n": p.n, "d": p.d, "a": p.a, "q": list(p.q_coeffs), "lambda": p.lam,
                   "local_degree_inf": p.local_degree_inf},
    }


def _settings(cfg: RunConfig, threads: Optional[int]) -> PlaneSettings:
    return PlaneSettings(
        resolution=cfg.resolution,
        max_iter=cfg.max_iter,
        theta=cfg.theta,
        min_pixels=cfg.min_pixels,
        global_window=cfg.global_window(),
        ring_window=cfg.ring_window_spec(),
        extra_windows=cfg.extra(),
        threads=threads,
    )


def _stem(cfg: RunConfig) -> str:
    if cfg.name:
        return cfg.name
    return Path(cfg.source).stem if cfg.source else "run"


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    return path


def _prepare(cfg: RunConfig, log: Log):
    p = cfg.params()
    log(f"map n={p.n} d={p.d} a={p.a} lambda={p.lam}")
    radii = radii_model(p, K1=cfg.K1)
    log(f"radii K={radii.K_esc:.6g} r_trap={radii.r_trap:.6g} r_inner={radii.r_inner:.6g} "
        f"r_outer={radii.r_outer:.6g}")
    crit = critical_set(p)
    return p, radii, crit


def _analysis(cfg: RunConfig, threads: Optional[int], log: Log):
    p, radii, crit = _prepare(cfg, log)
    pa = analyze_plane(p, radii, crit, _settings(cfg, threads), log)
    return p, radii, crit, pa


def _pngs(pa: PlaneAnalysis, out_dir: Path, stem: str, log: Log) -> list[str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for gname, g in pa.grids.items():
        path = out_dir / f"{stem}_{gname}.png"
        save_png(g, path)
        names.append(path.name)
        log(f"wrote {path}")
    return names


def trap_literal(p: MapParams, radii: RadiiModel, samples: int = 256) -> dict:
    """Circle |z| = sqrt(r_inner r_outer): largest first image relative to
    r_trap and smallest second image relative to K_esc."""
    num, den = p.pair
    worst1, worst2 = 0.0, math.inf
    for k in range(samples):
        z = radii.r_mid * cmath.exp(2j * math.pi * (k + 0.5) / samples)
        w = complex(rat_eval(num, den, z))
        w2 = complex(rat_eval(num, den, w))
        worst1 = max(worst1, abs(w))
        worst2 = min(worst2, abs(w2))
    return {"samples": samples, "max_image": worst1, "r_trap": radii.r_trap,
            "image_inside_trap": worst1 < radii.r_trap, "min_second_image": worst2,
            "K_esc": radii.K_esc, "second_image_beyond_K": worst2 > radii.K_esc}


def pairing_check(p: MapParams, crit) -> CheckResult:
    """Ring roots sit within a quarter of the asymptotic spacing of their
    predicted positions (normalised by |lambda|^{1/(n+d)})."""
    m = p.n + p.d
    b0 = p.q_coeffs[0]
    chk = CheckResult("pairing", True)
    for which, coef in (("critical", p.d * b0 / (p.n * p.a)), ("zeros", b0 / p.a)):
        spacing = 2 * math.sin(math.pi / m) * abs(coef) ** (1.0 / m)
        res = crit.pairing_residual(p.lam, which)
        chk.checked += 1
        if not res < 0.25 * spacing:
            chk.passed = False
        chk.details.append(f"{which}: residual {res:.6g} vs bound {0.25 * spacing:.6g}")
    return chk


def skeleton_checks(pa: PlaneAnalysis) -> list[CheckResult]:
    T, A, D, I = (pa.role(r) for r in ("TRAP_DOOR", "ANNULUS_A", "DISK_D", "A_INF"))
    out = []

    def check(name, ok, detail):
        c = CheckResult(name, bool(ok), 1, [detail])
        out.append(c)

    check("trap_door_simply_connected", T is not None and T.connectivity == 1,
          f"kappa={T.connectivity if T else None}")
    check("annulus_doubly_connected", A is not None and A.connectivity == 2 and A.surrounds_origin,
          f"kappa={A.connectivity if A else None} surrounds={A.surrounds_origin if A else None}")
    ring = pa.grids.get("ring")
    on = []
    if A is not None and A.grid == "ring" and ring is not None:
        on = [ring.label_at(complex(c)) == A.label_id for c in pa.crit.free_ring]
    check("free_ring_on_annulus", bool(on) and all(on), f"{sum(on)}/{len(pa.crit.free_ring)} on A")
    check("disk_simply_connected", D is not None and D.connectivity == 1,
          f"kappa={D.connectivity if D else None}")
    check("disk_maps_to_trap", D is not None and T is not None and D.forward_target == T.id,
          f"target={D.forward_target if D else None}")
    check("annulus_maps_to_trap", A is not None and T is not None and A.forward_target == T.id,
          f"target={A.forward_target if A else None}")
    check("trap_maps_to_basin", T is not None and I is not None and T.forward_target == I.id,
          f"target={T.forward_target if T else None}")
    return out


# ---------------------------------------------------------------------------
# commands; each returns (report dict, exit code)

def cmd_render(cfg: RunConfig, out_dir: Optional[Path] = None, threads: Optional[int] = None,
               log: Log = _quiet):
    out_dir = Path(out_dir or cfg.out_dir)
    stem = _stem(cfg)
    rep = _header(cfg, "render")
    p = cfg.params()
    if p.lam == 0:
        K = estimate_K(p)
        win = cfg.global_window() or auto_global_window(p, K)
        log(f"unperturbed map: K={K:.6g}")
        g = rasterize(p, win, cfg.resolution, K, cfg.max_iter, cfg.theta, threads, name="global")
        crit = critical_set(p)
        recs = tag_roles(g, p, K, crit, min_pixels=200)
        path = out_dir / f"{stem}_global.png"
        out_dir.mkdir(parents=True, exist_ok=True)
        save_png(g, path)
        rep.update({"K_esc": K, "windows": {"global": window_dict(win)},
                    "critical": {"nu_zero": crit.nu_lambda},
                    "n_components": g.n_components,
                    "components": [record_dict(r) for r in recs], "images": [path.name]})
    else:
        p, radii, crit, pa = _analysis(cfg, threads, log)
        rep.update(_plane_report(pa))
        rep["images"] = _pngs(pa, out_dir, stem, log)
    _write(out_dir, f"{stem}_render.json", dumps(rep))
    return rep, EXIT_OK


def _plane_report(pa: PlaneAnalysis) -> dict:
    return {
        "radii": radii_dict(pa.radii),
        "critical": critical_dict(pa.crit, pa.p.lam),
        "windows": {name: window_dict(g.window) for name, g in pa.grids.items()},
        "roles": dict(sorted(pa.roles.items())),
        "u_nu_surrounds": pa.u_nu_surrounds,
        "problems": list(pa.problems),
        "components": [record_dict(r) for r in pa.records],
    }


def cmd_roots(cfg: RunConfig, out_dir: Optional[Path] = None, threads=None, log: Log = _quiet):
    from .mapcore import critical_numerator_poly, zeros_poly
    from .roots import poly_roots

    p = cfg.params()
    rep = _header(cfg, "roots")
    crit = critical_set(p)
    rep["critical_points"] = [complex(z) for z in poly_roots(critical_numerator_poly(p))]
    if p.lam != 0:
        rep["zeros"] = [complex(z) for z in poly_roots(zeros_poly(p))]
    rep["critical"] = critical_dict(crit, p.lam)
    _write(Path(out_dir or cfg.out_dir), f"{_stem(cfg)}_roots.json", dumps(rep))
    return rep, EXIT_OK


def _itinerary(pa: PlaneAnalysis):
    try:
        return critical_itinerary(pa.p, pa.radii, pa.crit, pa), None
    except ItineraryError as ex:
        return None, f"{type(ex).__name__}: {ex}"


def cmd_itinerary(cfg: RunConfig, out_dir: Optional[Path] = None, threads=None, log: Log = _quiet):
    p, radii, crit, pa = _analysis(cfg, threads, log)
    rep = _header(cfg, "itinerary")
    it, err = _itinerary(pa)
    rep["itinerary"] = itinerary_dict(it) if it else None
    rep["itinerary_error"] = err
    _write(Path(out_dir or cfg.out_dir), f"{_stem(cfg)}_itinerary.json", dumps(rep))
    return rep, (EXIT_OK if it else EXIT_CHECK)


def cmd_verify(cfg: RunConfig, out_dir: Optional[Path] = None, threads: Optional[int] = None,
               log: Log = _quiet):
    out_dir = Path(out_dir or cfg.out_dir)
    stem = _stem(cfg)
    p, radii, crit, pa = _analysis(cfg, threads, log)
    rep = _header(cfg, "verify")
    rep.update(_plane_report(pa))
    checks = [pairing_check(p, crit), CheckResult("annulus_mapping", True, 1, ["radii model regime check"])]
    checks += skeleton_checks(pa)
    it, err = _itinerary(pa)
    k = it.k if (it is not None and it.u_nu_surrounds) else None
    checks += digraph_checks(pa, k)
    vr = verify_measured(pa.records, p.n, p.d, k)
    form = CheckResult("form_compliance", vr.passed, len(vr.matched) + len(vr.violations),
                       [f"{uid}: kappa={kap} {ev}" for uid, kap, ev in vr.violations])
    checks.append(form)
    rep["trap_literal"] = trap_literal(p, radii)
    rep["itinerary"] = itinerary_dict(it) if it else None
    rep["itinerary_error"] = err
    rep["k"] = k
    if k:
        rep["witnesses"] = [witness_dict(w) for w in enumerate_attainable(p, k, 2, 2, 2 * k)]
        rep["expected_found"] = [witness_dict(w) for w in vr.expected_found]
        rep["expected_missing"] = [witness_dict(w) for w in vr.expected_missing]
    rep["matched"] = [{"id": uid, "kappa": kap,
                       "witnesses": [{"i": i, "j": j, "l": l, "status": st} for i, j, l, st in ws]}
                      for uid, kap, ws in vr.matched]
    rep["checks"] = [check_dict(c) for c in checks]
    ok = all(c.passed for c in checks)
    rep["passed"] = ok
    for c in checks:
        log(f"check {c.name}: {'pass' if c.passed else 'FAIL'} ({c.checked})")
    rep["images"] = _pngs(pa, out_dir, stem, log)
    _write(out_dir, f"{stem}_verify.json", dumps(rep))
    return rep, (EXIT_OK if ok else EXIT_CHECK)


def cmd_enumerate(cfg: RunConfig, k: Optional[int] = None, i_max: int = 2, j_max: int = 2,
                  l_max: int = 4, out_dir: Optional[Path] = None, threads=None, log: Log = _quiet):
    p = cfg.params()
    rep = _header(cfg, "enumerate")
    if k is None:
        _, _, _, pa = _analysis(cfg, threads, log)
        it, err = _itinerary(pa)
        if it is None or not it.u_nu_surrounds:
            rep["error"] = err or "free critical component does not surround the origin; k undefined"
            _write(Path(out_dir or cfg.out_dir), f"{_stem(cfg)}_enumerate.json", dumps(rep))
            return rep, EXIT_CHECK
        k = it.k
    rep["k"] = k
    rep["witnesses"] = [witness_dict(w) for w in enumerate_attainable(p, k, i_max, j_max, l_max)]
    _write(Path(out_dir or cfg.out_dir), f"{_stem(cfg)}_enumerate.json", dumps(rep))
    return rep, EXIT_OK


def cmd_search(cfg: RunConfig, i: int, j: int, l: int, out_dir: Optional[Path] = None,
               threads: Optional[int] = None, log: Log = _quiet):
    out_dir = Path(out_dir or cfg.out_dir)
    stem = f"{_stem(cfg)}_search_{i}_{j}_{l}"
    p0 = cfg.params().with_lambda(0)
    rep = _header(cfg, "search")
    rep["request"] = {"i": i, "j": j, "l": l}
    try:
        rz = realize_connectivity(
            p0, i, j, l, cfg.search_ray_angle, cfg.search_t_hi, cfg.search_t_lo,
            cfg.search_scan_resolution, min(cfg.resolution, 1024), log=log,
            settings=_settings(cfg, threads))
    except SearchError as ex:
        rep["error"] = f"{type(ex).__name__}: {ex}"
        _write(out_dir, f"{stem}.json", dumps(rep))
        return rep, EXIT_CHECK
    res = rz.result
    rep["lambda_found"] = res.lambda_found
    rep["m"] = res.m
    rep["band_t"] = list(res.band)
    rep["certificate"] = itinerary_dict(res.verification)
    rep["witness"] = witness_dict(rz.witness)
    rep["matches"] = [record_dict(r) for r in rz.matches]
    rep["resolution_insufficient"] = rz.resolution_insufficient
    rep["scan"] = [{"t": s.t, "status": s.status, "k": s.k} for s in res.scan]
    rep.update(_plane_report(res.analysis))
    rep["images"] = _pngs(res.analysis, out_dir, stem, log)
    _write(out_dir, f"{stem}.json", dumps(rep))
    return rep, EXIT_OK


# ---------------------------------------------------------------------------
# argparse

def _shared(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", required=True, help="flat key = value config file")
    sp.add_argument("--out", help="output directory (overrides out_dir)")
    sp.add_argument("--resolution", type=int, help="pixels per side")
    sp.add_argument("--max-iter", type=int, help="raster iteration cap")
    sp.add_argument("--window", help="global window cx,cy,w,h")
    sp.add_argument("--ring-window", help="'auto' or cx,cy,w,h")
    sp.add_argument("--threads", type=int, help="raster threads (clamped to what numba allows)")
    sp.add_argument("-q", "--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fatoucon", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("render", "roots", "verify", "itinerary"):
        _shared(sub.add_parser(name))
    e = sub.add_parser("enumerate")
    _shared(e)
    e.add_argument("--k", type=int, help="capture depth (measured when omitted)")
    e.add_argument("--i-max", type=int, default=2)
    e.add_argument("--j-max", type=int, default=2)
    e.add_argument("--l-max", type=int, default=4)
    s = sub.add_parser("search")
    _shared(s)
    s.add_argument("--i", type=int, required=True)
    s.add_argument("--j", type=int, required=True)
    s.add_argument("--l", type=int, required=True)
    s.add_argument("--t-hi", type=float)
    s.add_argument("--t-lo", type=float)
    s.add_argument("--ray-angle", type=float)
    return ap


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.resolution is not None:
        cfg.resolution = args.resolution
    if args.max_iter is not None:
        cfg.max_iter = args.max_iter
    if args.window is not None:
        parse_window(args.window)
        cfg.window = args.window
    if args.ring_window is not None:
        cfg.ring_window = args.ring_window
        cfg.ring_window_spec()
    if args.out is not None:
        cfg.out_dir = args.out
    for key, attr in (("t_hi", "search_t_hi"), ("t_lo", "search_t_lo"), ("ray_angle", "search_ray_angle")):
        v = getattr(args, key, None)
        if v is not None:
            setattr(cfg, attr, v)
    if cfg.resolution < 64:
        raise ConfigError("resolution must be at least 64")
    return cfg


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    log: Log = _quiet if args.quiet else (lambda msg: print(f"[{args.command}] {msg}", file=sys.stderr))
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except ConfigError as ex:
        print(f"config error: {ex}", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads is not None:
        set_threads(args.threads)
    try:
        if args.command == "render":
            rep, code = cmd_render(cfg, None, args.threads, log)
        elif args.command == "roots":
            rep, code = cmd_roots(cfg, None, args.threads, log)
        elif args.command == "verify":
            rep, code = cmd_verify(cfg, None, args.threads, log)
        elif args.command == "itinerary":
            rep, code = cmd_itinerary(cfg, None, args.threads, log)
        elif args.command == "enumerate":
            rep, code = cmd_enumerate(cfg, args.k, args.i_max, args.j_max, args.l_max, None, args.threads, log)
        else:
            rep, code = cmd_search(cfg, args.i, args.j, args.l, None, args.threads, log)
    except (RegimeViolation, NoEscapeRadius) as ex:
        print(f"regime violation: {ex}", file=sys.stderr)
        return EXIT_REGIME
    except UnrealizableRequest as ex:
        print(f"config error: {ex}", file=sys.stderr)
        return EXIT_CONFIG
    except AmbiguousPartition as ex:
        print(f"regime violation: {ex}", file=sys.stderr)
        return EXIT_REGIME
    log(f"exit {code}")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
