"""Command-line entry point: ``hardy-cut <subcommand>``.

Wires the library modules into pipelines, emits CSV/JSON artifacts with
17-significant-digit reals (doubles round-trip exactly, so reruns with the
same config and seed are byte-identical), and writes a run manifest with
file digests.  The process exit code is 0 exactly when every certificate
of the run passed.
"""

from __future__ import annotations

import argparse
import ast
import configparser
import difflib
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from . import geometry as geometry_mod
from . import heat as heat_mod
from . import spectral as spectral_mod
from . import unbounded as unbounded_mod
from . import weight as weight_mod
from .geometry import ConeGeometry, build_circle_cut, build_rectangle_slit, density_estimate
from .slitmesh import assemble, generate_mesh, read_mesh, validate_mesh, write_mesh


# -- geometry preset strings --------------------------------------------------


def _eval_number(text: str) -> float:
    """Evaluate a small arithmetic expression (digits, + - * /, pi)."""
    node = ast.parse(text, mode="eval").body

    def ev(n):
        if isinstance(n, ast.Constant) and isinstance(n.value, (int, float)):
            return float(n.value)
        if isinstance(n, ast.Name) and n.id == "pi":
            return math.pi
        if isinstance(n, ast.BinOp) and isinstance(n.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
            a, b = ev(n.left), ev(n.right)
            return {ast.Add: a + b, ast.Sub: a - b, ast.Mult: a * b,
                    ast.Div: a / b if b else math.inf}[type(n.op)]
        if isinstance(n, ast.UnaryOp) and isinstance(n.op, (ast.USub, ast.UAdd)):
            v = ev(n.operand)
            return -v if isinstance(n.op, ast.USub) else v
        raise ValueError(f"unsupported expression: {text!r}")

    return ev(node)


def parse_preset(text: str):
    """Parse ``circle(n, lo:hi, ...)``, ``rect_slit(w, h, a, b)`` or
    ``sector_cone(lo:hi, ...)`` into a geometry object."""
    text = text.strip()
    if "(" not in text or not text.endswith(")"):
        raise ValueError(f"malformed geometry preset: {text!r}")
    name, _, rest = text.partition("(")
    args = [a.strip() for a in rest[:-1].split(",") if a.strip()]
    name = name.strip()
    if name == "circle":
        if len(args) < 2:
            raise ValueError("circle needs a vertex count and at least one arc")
        n = int(_eval_number(args[0]))
        arcs = []
        for a in args[1:]:
            lo, _, hi = a.partition(":")
            if not hi:
                raise ValueError(f"arc must look like lo:hi, got {a!r}")
            arcs.append((_eval_number(lo), _eval_number(hi)))
        return build_circle_cut(n, arcs)
    if name == "rect_slit":
        if len(args) != 4:
            raise ValueError("rect_slit needs width, height, slit lo, slit hi")
        w, h, a, b = (_eval_number(x) for x in args)
        return build_rectangle_slit(w, h, (a, b))
    if name == "sector_cone":
        arcs = []
        for a in args:
            lo, _, hi = a.partition(":")
            if not hi:
                raise ValueError(f"sector must look like lo:hi, got {a!r}")
            arcs.append((_eval_number(lo), _eval_number(hi)))
        return ConeGeometry(sector_arcs=tuple(arcs))
    raise ValueError(f"unknown geometry preset: {name!r}")


# -- run configuration ---------------------------------------------------------


@dataclass
class RunConfig:
    """Validated pipeline configuration with documented defaults."""

    geometry: str = "circle(64, 0:pi)"
    modules: str = "all"  # comma list out of: weight, density, mesh, spectral, heat
    seed: int = 0
    out_dir: str = "out"
    workers: int = 1
    # weight
    weight_samples: int = 99
    weight_grading: float = 4.0
    weight_tol: float = 1e-10
    # density
    density_r_min: float = 1e-3
    density_r_star: float = 0.1
    density_centers: int = 48
    density_radii: int = 8
    # mesh
    mesh_size: int = 48
    box_scale: float = 2.0
    mesh_grading: float = 2.0
    # spectral
    eig_tol: float = 1e-9
    bisect_tol: float = 1e-8
    k_eigs: int = 4
    omega_probe_factor: float = 0.999
    # heat
    heat_u0: str = "side_odd"
    heat_tau: float = 2e-3
    heat_steps: int = 400


# (section, key) -> (attribute, converter, validator, message)
_CONFIG_KEYS = {
    ("run", "geometry"): ("geometry", str, None, ""),
    ("run", "modules"): ("modules", str, None, ""),
    ("run", "seed"): ("seed", int, lambda v: v >= 0, "seed must be nonnegative"),
    ("run", "out_dir"): ("out_dir", str, None, ""),
    ("run", "workers"): ("workers", int, lambda v: v >= 1, "workers must be positive"),
    ("weight", "samples"): ("weight_samples", int, lambda v: v >= 2, "samples must be >= 2"),
    ("weight", "grading"): ("weight_grading", float, lambda v: v >= 1, "grading must be >= 1"),
    ("weight", "tol"): ("weight_tol", float, lambda v: 0 < v <= 1e-4, "tol must be positive"),
    ("density", "r_min"): ("density_r_min", float, lambda v: v > 0, "r_min must be positive"),
    ("density", "r_star"): ("density_r_star", float, lambda v: v > 0, "r_star must be positive"),
    ("density", "centers"): ("density_centers", int, lambda v: v >= 2, "centers must be >= 2"),
    ("density", "radii"): ("density_radii", int, lambda v: v >= 2, "radii must be >= 2"),
    ("mesh", "mesh_size"): ("mesh_size", int, lambda v: v >= 8, "mesh_size must be >= 8"),
    ("mesh", "resolution"): ("mesh_size", int, lambda v: v >= 8, "resolution must be >= 8"),
    ("mesh", "box_scale"): ("box_scale", float, lambda v: v > 1, "box_scale must exceed 1"),
    ("mesh", "grading"): ("mesh_grading", float, lambda v: v >= 1, "grading must be >= 1"),
    ("spectral", "eig_tol"): ("eig_tol", float, lambda v: v > 0, "eig_tol must be positive"),
    ("spectral", "bisect_tol"): ("bisect_tol", float, lambda v: v > 0, "bisect_tol must be positive"),
    ("spectral", "k_eigs"): ("k_eigs", int, lambda v: v >= 2, "k_eigs must be >= 2"),
    ("spectral", "omega_probe_factor"): (
        "omega_probe_factor", float, lambda v: v > 0, "omega_probe_factor must be positive"),
    ("heat", "u0"): ("heat_u0", str, lambda v: v in ("constant", "side_odd", "random"),
                     "u0 must be one of constant, side_odd, random"),
    ("heat", "tau"): ("heat_tau", float, lambda v: v > 0, "tau must be positive"),
    ("heat", "steps"): ("heat_steps", int, lambda v: v >= 1, "steps must be >= 1"),
}


class ConfigError(ValueError):
    pass


def parse_config(path) -> RunConfig:
    """Parse a sectioned key-value config file with strict validation.

    Unknown sections or keys are rejected; key typos get a closest-match
    suggestion.  Every field has a default, so an empty file is valid.
    """
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    cfg = RunConfig()
    known_sections = {s for s, _ in _CONFIG_KEYS}
    for section in cp.sections():
        if section not in known_sections:
            hint = difflib.get_close_matches(section, sorted(known_sections), n=1)
            extra = f" (did you mean [{hint[0]}]?)" if hint else ""
            raise ConfigError(f"unknown section [{section}]{extra}")
        for key, raw in cp.items(section):
            spec_key = (section, key)
            if spec_key not in _CONFIG_KEYS:
                candidates = sorted(k for s, k in _CONFIG_KEYS if s == section)
                hint = difflib.get_close_matches(key, candidates, n=1)
                extra = f" (did you mean {hint[0]!r}?)" if hint else ""
                raise ConfigError(f"unknown key {key!r} in [{section}]{extra}")
            attr, conv, check, msg = _CONFIG_KEYS[spec_key]
            try:
                val = conv(raw) if conv is not str else raw.strip()
                if conv is int:
                    val = int(float(raw))  # tolerate 1e2-style integers
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from exc
            if check is not None and not check(val):
                raise ConfigError(f"[{section}] {key}: {msg}")
            setattr(cfg, attr, val)
    if cfg.density_r_min >= cfg.density_r_star:
        raise ConfigError("[density] r_min must stay below r_star")
    return cfg


# -- pipeline --------------------------------------------------------------------


@dataclass
class RunManifest:
    version: str
    config: dict
    stages: list = field(default_factory=list)  # (name, seconds)
    outputs: dict = field(default_factory=dict)  # filename -> sha256
    certificates: dict = field(default_factory=dict)  # name -> bool

    @property
    def passed(self) -> bool:
        return all(self.certificates.values())

    def to_json(self) -> str:
        payload = {
            "version": self.version,
            "config": self.config,
            "stages": [{"name": n, "seconds": s} for n, s in self.stages],
            "outputs": self.outputs,
            "certificates": self.certificates,
            "passed": self.passed,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_pipeline(cfg: RunConfig) -> RunManifest:
    """Execute the configured stages in dependency order.

    Emits ``weight.csv``, ``density.json``, ``mesh.txt``, ``spectral.json``,
    ``heat.csv`` and ``manifest.json`` into the output directory; the
    manifest records per-stage wall clock, output digests and certificate
    outcomes.
    """
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(version=__version__, config=cfg.__dict__.copy())
    wanted = ("weight", "density", "mesh", "spectral", "heat") \
        if cfg.modules.strip() == "all" else tuple(
            s.strip() for s in cfg.modules.split(",") if s.strip())
    unknown = set(wanted) - {"weight", "density", "mesh", "spectral", "heat"}
    if unknown:
        raise ConfigError(f"unknown modules requested: {sorted(unknown)}")

    def stage(name):
        class _T:
            def __enter__(self):
                self.t0 = time.perf_counter()
                return self

            def __exit__(self, *exc):
                manifest.stages.append((name, time.perf_counter() - self.t0))
                return False

        return _T()

    outputs = {}

    with stage("geometry"):
        g = parse_preset(cfg.geometry)
        if isinstance(g, ConeGeometry):
            raise ConfigError("the pipeline needs a planar preset; "
                              "use cone-check for sector cones")

    de = None
    if "density" in wanted:
        with stage("density"):
            de = density_estimate(g, cfg.density_r_min, cfg.density_r_star,
                                  cfg.density_centers, cfg.density_radii)
            payload = {"c_minus": de.c_minus, "c_plus": de.c_plus,
                       "r_star": de.r_star, "sample_count": de.sample_count}
            (out / "density.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
            outputs["density.json"] = out / "density.json"

    wp = None
    if "weight" in wanted:
        with stage("weight"):
            wp = weight_mod.weight_profile(g, cfg.weight_samples,
                                           cfg.weight_grading, cfg.weight_tol)
            (out / "weight.csv").write_text(weight_mod.profile_csv(g, wp))
            outputs["weight.csv"] = out / "weight.csv"
            if de is not None:
                cert = weight_mod.lower_bound_check(g, de, wp)
                manifest.certificates["weight_lower_bound"] = cert.passed

    mesh = forms = None
    if "mesh" in wanted or "spectral" in wanted or "heat" in wanted:
        with stage("mesh"):
            mesh = generate_mesh(g, box_scale=cfg.box_scale, resolution=cfg.mesh_size,
                                 grading_to_boundary=cfg.mesh_grading)
            issues = validate_mesh(mesh)
            manifest.certificates["mesh_valid"] = not issues
            (out / "mesh.txt").write_text(write_mesh(mesh))
            outputs["mesh.txt"] = out / "mesh.txt"
        with stage("assemble"):
            forms = assemble(mesh, quad_tol=cfg.weight_tol)

    report = None
    if "spectral" in wanted:
        with stage("spectral"):
            inf_w = float(wp.values.min()) if wp is not None else None
            report = spectral_mod.spectral_report(
                forms, geometry_label=cfg.geometry, inf_weight=inf_w,
                k=cfg.k_eigs, eig_tol=cfg.eig_tol)
            (out / "spectral.json").write_text(report.to_json())
            outputs["spectral.json"] = out / "spectral.json"
            manifest.certificates["lambda1_zero"] = report.flags["lambda1_zero"]
            manifest.certificates["residuals_ok"] = report.flags["residuals_ok"]
            if wp is not None:
                manifest.certificates["coupling_ordering"] = bool(
                    report.C_num * inf_w <= report.omega_c * (1 + 1e-9))
            probe = cfg.omega_probe_factor * report.omega_c
            lam_probe = spectral_mod.delta_prime_min_eig(forms, probe, tol=cfg.eig_tol)
            tol_probe = 1e-9 * max(1.0, abs(report.omega_c))
            manifest.certificates["delta_prime_nonnegative_at_probe"] = bool(
                lam_probe >= -tol_probe)

    if "heat" in wanted:
        with stage("heat"):
            c_num = report.C_num if report is not None else spectral_mod.hardy_constant(forms)
            u0 = heat_mod.initial_data(forms, cfg.heat_u0, seed=cfg.seed)
            tr = heat_mod.evolve(forms, u0, tau=cfg.heat_tau, c_num=c_num,
                                 max_steps=cfg.heat_steps)
            (out / "heat.csv").write_text(heat_mod.trajectory_csv(tr))
            outputs["heat.csv"] = out / "heat.csv"
            cert = heat_mod.decay_check(tr, c_num)
            manifest.certificates["heat_decay"] = cert.passed
            manifest.certificates["heat_contraction"] = bool(
                np.all(np.diff(tr.norms) <= 1e-11 * max(1.0, tr.norms[0])))

    for name, path in outputs.items():
        manifest.outputs[name] = _digest(path)
    (out / "manifest.json").write_text(manifest.to_json())
    return manifest


# -- subcommands --------------------------------------------------------------------


def _add_geometry_arg(p):
    p.add_argument("--geometry", required=True,
                   help="preset, e.g. 'circle(64, 0:pi)' or 'rect_slit(2,1,-0.5,0.5)'")


def _workers_default(args_value):
    if args_value is not None:
        return args_value
    env = os.environ.get("HARDY_CUT_WORKERS")
    return int(env) if env else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardy-cut",
                                 description="trace Hardy toolkit for cut domains")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weight", help="sample the singular weight along the cut")
    _add_geometry_arg(p)
    p.add_argument("--samples", type=int, default=99)
    p.add_argument("--grading", type=float, default=4.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("density", help="ball-density constants of the complement")
    _add_geometry_arg(p)
    p.add_argument("--r-min", type=float, default=1e-3)
    p.add_argument("--r-star", type=float, default=0.1)
    p.add_argument("--centers", type=int, default=48)
    p.add_argument("--radii", type=int, default=8)

    p = sub.add_parser("mesh", help="generate / inspect / validate slit meshes")
    p.add_argument("action", choices=["gen", "info", "validate"])
    p.add_argument("--geometry", help="preset (gen)")
    p.add_argument("--resolution", type=int, default=48)
    p.add_argument("--box-scale", type=float, default=2.0)
    p.add_argument("--grading", type=float, default=2.0)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--mesh-file", type=Path, help="mesh to read (info/validate)")
    p.add_argument("--geometry-out", type=Path, help="also dump the geometry (gen)")

    p = sub.add_parser("constant", help="variational constants of a preset")
    _add_geometry_arg(p)
    p.add_argument("--resolution", type=int, default=48)
    p.add_argument("--box-scale", type=float, default=2.0)
    p.add_argument("--grading", type=float, default=2.0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("dprime", help="jump-penalized form: minimum eigenvalue / critical coupling")
    _add_geometry_arg(p)
    p.add_argument("--resolution", type=int, default=48)
    p.add_argument("--box-scale", type=float, default=2.0)
    p.add_argument("--grading", type=float, default=2.0)
    p.add_argument("--omega", type=float, default=None,
                   help="evaluate the minimum eigenvalue at this coupling")
    p.add_argument("--bisect", action="store_true",
                   help="cross-check the critical coupling by bisection")
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("heat", help="backward-Euler heat run with decay certificate")
    _add_geometry_arg(p)
    p.add_argument("--resolution", type=int, default=48)
    p.add_argument("--box-scale", type=float, default=2.0)
    p.add_argument("--u0", default="side_odd", choices=["constant", "side_odd", "random"])
    p.add_argument("--tau", type=float, default=2e-3)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--steps", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("study", help="convergence study over resolutions and box scales")
    _add_geometry_arg(p)
    p.add_argument("--resolutions", default="24,48",
                   help="comma list; each entry doubles the previous")
    p.add_argument("--box-scales", default="2,4")
    p.add_argument("--grading", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("kato", help="half-space trace constant")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--classical", action="store_true",
                   help="also print the interior constant")

    p = sub.add_parser("cone-check", help="cone distance bounds and shell scaling")
    p.add_argument("--sector", default="0,1.5707963267948966",
                   help="sector angles lo,hi (radians)")
    p.add_argument("--j-range", default="-3..3")
    p.add_argument("--family", default="sine_bump",
                   choices=["sine_bump", "quartic_bump"])
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("halfspace", help="half-space jump inequality certificate")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--family", default="gaussian", choices=["gaussian", "zero_jump"])
    p.add_argument("--scale", type=float, default=1.0)

    p = sub.add_parser("run", help="full pipeline from a config file")
    p.add_argument("config", type=Path)
    p.add_argument("--out-dir", type=Path, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    return ap


def _forms_for(args):
    g = parse_preset(args.geometry)
    mesh = generate_mesh(g, box_scale=args.box_scale, resolution=args.resolution,
                         grading_to_boundary=getattr(args, "grading", 1.0))
    return g, assemble(mesh)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    cmd = args.command

    if cmd == "weight":
        g = parse_preset(args.geometry)
        wp = weight_mod.weight_profile(g, args.samples, args.grading, args.tol)
        text = weight_mod.profile_csv(g, wp)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0

    if cmd == "density":
        g = parse_preset(args.geometry)
        de = density_estimate(g, args.r_min, args.r_star, args.centers, args.radii)
        print(json.dumps({"c_minus": de.c_minus, "c_plus": de.c_plus,
                          "r_star": de.r_star, "sample_count": de.sample_count},
                         sort_keys=True, indent=2))
        return 0

    if cmd == "mesh":
        if args.action == "gen":
            if not args.geometry:
                raise ValueError("mesh gen needs --geometry")
            g = parse_preset(args.geometry)
            mesh = generate_mesh(g, box_scale=args.box_scale,
                                 resolution=args.resolution,
                                 grading_to_boundary=args.grading)
            text = write_mesh(mesh)
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
            if args.geometry_out and mesh.geom is not None:
                Path(args.geometry_out).write_text(mesh.geom.dump())
            return 0
        if not args.mesh_file:
            raise ValueError(f"mesh {args.action} needs --mesh-file")
        mesh = read_mesh(Path(args.mesh_file).read_text())
        if args.action == "info":
            print(json.dumps({
                "nodes": mesh.n_nodes, "triangles": mesh.n_triangles,
                "slit_pairs": len(mesh.slit_pairs),
                "h_min": mesh.h_min, "h_max": mesh.h_max,
            }, sort_keys=True, indent=2))
            return 0
        issues = validate_mesh(mesh)
        for msg in issues:
            print(msg)
        print(f"{len(issues)} violation(s)")
        return 0 if not issues else 1

    if cmd == "constant":
        g, forms = _forms_for(args)
        report = spectral_mod.spectral_report(forms, geometry_label=args.geometry,
                                              eig_tol=args.tol)
        text = report.to_json()
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0

    if cmd == "dprime":
        g, forms = _forms_for(args)
        w_c = spectral_mod.delta_prime_critical(forms)
        out = {"omega_c": w_c}
        if args.omega is not None:
            out["omega"] = args.omega
            out["lambda_min"] = spectral_mod.delta_prime_min_eig(forms, args.omega)
        if args.bisect:
            w_b = spectral_mod.delta_prime_critical_bisect(forms, tol=args.tol)
            out["omega_c_bisect"] = w_b
            out["agreement"] = abs(w_b - w_c)
        print(json.dumps(out, sort_keys=True, indent=2))
        if args.bisect and abs(out["agreement"]) > 100 * args.tol * max(1.0, w_c):
            return 1
        return 0

    if cmd == "heat":
        g, forms = _forms_for(args)
        c_num = spectral_mod.hardy_constant(forms)
        u0 = heat_mod.initial_data(forms, args.u0, seed=args.seed)
        tr = heat_mod.evolve(forms, u0, tau=args.tau, horizon=args.T,
                             c_num=c_num, max_steps=args.steps)
        cert = heat_mod.decay_check(tr, c_num)
        text = heat_mod.trajectory_csv(tr)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        print(f"decay certificate: {'pass' if cert.passed else 'FAIL'} "
              f"(energy slack {cert.slack_energy:.6g}, norm slack {cert.slack_norm:.6g})",
              file=sys.stderr)
        return 0 if cert.passed else 1

    if cmd == "study":
        g = parse_preset(args.geometry)
        resolutions = [int(t) for t in args.resolutions.split(",")]
        boxes = [float(t) for t in args.box_scales.split(",")]
        table = spectral_mod.convergence_study(
            g, resolutions, boxes, grading=args.grading,
            workers=_workers_default(args.workers))
        text = table.to_csv()
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        for name, ok in table.flags.items():
            print(f"{name}: {'pass' if ok else 'FAIL'}", file=sys.stderr)
        return 0 if all(table.flags.values()) else 1

    if cmd == "kato":
        out = {"d": args.d, "kato": unbounded_mod.kato_constant(args.d)}
        if args.classical:
            out["classical"] = unbounded_mod.classical_hardy_constant(args.d)
        print(json.dumps(out, sort_keys=True, indent=2))
        return 0

    if cmd == "cone-check":
        lo, hi = (float(t) for t in args.sector.split(","))
        cone = ConeGeometry(sector_arcs=((lo, hi),))
        j_lo, j_hi = (int(t) for t in args.j_range.split(".."))
        tf = unbounded_mod.TestFunction(args.family)
        worst = 0.0
        for j in range(j_lo, j_hi + 1):
            chk = unbounded_mod.shell_scaling_check(cone, tf, j)
            worst = max(worst, chk.deviation)
            print(f"shell j={j:+d}: ratio {chk.ratio_j:.12g} deviation {chk.deviation:.3g}")
        viol = unbounded_mod.cone_distance_bound_suite(cone, args.points, args.seed)
        print(f"distance bound violations: {viol}/{args.points}")
        ok = worst <= 1e-12 and viol == 0
        return 0 if ok else 1

    if cmd == "halfspace":
        tf = unbounded_mod.TestFunction(args.family, scale=args.scale)
        cert = unbounded_mod.halfspace_jump_check(args.d, tf)
        print(json.dumps({
            "lhs": cert.lhs, "rhs": cert.rhs, "constant": cert.constant,
            "slack": cert.slack, "rel_slack": cert.rel_slack,
            "passed": cert.passed,
        }, sort_keys=True, indent=2))
        return 0 if cert.passed else 1

    if cmd == "run":
        cfg = parse_config(args.config)
        if args.out_dir is not None:
            cfg.out_dir = str(args.out_dir)
        if args.workers is not None:
            cfg.workers = args.workers
        if args.seed is not None:
            cfg.seed = args.seed
        manifest = run_pipeline(cfg)
        for name, ok in sorted(manifest.certificates.items()):
            print(f"{name}: {'pass' if ok else 'FAIL'}")
        print(f"pipeline: {'pass' if manifest.passed else 'FAIL'} "
              f"({len(manifest.stages)} stages)")
        return 0 if manifest.passed else 1

    raise ValueError(f"unhandled command {cmd!r}")


if __name__ == "__main__":
    sys.exit(main())
