"""Command line front end.

Subcommands: ``geom``, ``static``, ``converge``, ``diagnose``, ``dynamics``.
Exit codes: 0 ok, 2 bad configuration, 3 solver failure, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 2, 3, 4

_TOP_KEYS = {"curve", "mesh", "vorticity", "gamma", "method", "hstar", "lambda", "eval_points",
             "eval_circle", "dynamics", "N_list"}
_MESH_KEYS = {"N", "flavor", "kappa", "amplitude", "seed"}
_DYN_KEYS = {"t_end", "h", "output_every"}
_METHOD_ALIASES = {"vortex": "vortex", "charge": "charge", "charge_lambda": "charge_lambda",
                   "charge-lambda": "charge_lambda", "exact_disk": "exact_disk", "free": "free"}


class ConfigError(Exception):
    pass


# --------------------------------------------------------------------------
# deterministic output


def fmt(x: Any) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return format(float(x) + 0.0, ".17g")  # + 0.0 folds -0 into 0


def _json(obj: Any, indent: int = 0) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if hasattr(obj, "tolist"):
        return _json(obj.tolist(), indent)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isnan(obj):
            return "null"
        if math.isinf(obj):
            return json.dumps("inf" if obj > 0 else "-inf")
        return format(obj + 0.0, ".17g")
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_json(obj[k], indent + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_json(v, indent + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _json(v, indent + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """JSON with sorted keys and floats at 17 significant digits."""
    return _json(obj) + "\n"


def write_json(path: Path, obj: Any) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps(obj))


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(fmt(v) for v in row) + "\n")


# --------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    curve: Any
    mesh: dict
    blobs: list
    gamma: float = 0.0
    method: str = "vortex"
    hstar: Any = None
    lam: Any = None
    eval_points: Any = None
    dynamics: dict = field(default_factory=dict)
    N_list: list = field(default_factory=list)


def _num(d: dict, key: str, default=None, kind=float):
    if key not in d:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key!r} must be a number")
    if kind is int and int(v) != v:
        raise ConfigError(f"{key!r} must be an integer")
    return kind(v)


def _check_keys(d: Any, allowed: set, where: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    return d


def parse_config(raw: Any, seed: int | None = None) -> RunConfig:
    """Validate a decoded JSON config; unknown keys are rejected."""
    import numpy as np

    from .charge_solver import LambdaSpec
    from .fields import Blob, HStarSpec
    from .geometry import CurveSpec

    raw = _check_keys(raw, _TOP_KEYS, "config")
    try:
        curve = CurveSpec.from_dict(raw.get("curve", {"kind": "circle", "radius": 1.0}))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"curve: {e}") from e
    method = _METHOD_ALIASES.get(raw.get("method", "vortex"))
    if method is None:
        raise ConfigError(f"unknown method {raw.get('method')!r}")
    m = dict(_check_keys(raw.get("mesh", {"N": 64}), _MESH_KEYS, "mesh"))
    mesh = {"N": _num(m, "N", 64, int), "kappa": _num(m, "kappa", 2, int),
            "amplitude": _num(m, "amplitude", 0.0), "seed": _num(m, "seed", seed or 0, int)}
    if "flavor" in m:
        if m["flavor"] not in ("vortex", "charge"):
            raise ConfigError("mesh.flavor must be 'vortex' or 'charge'")
        mesh["flavor"] = m["flavor"]
    if mesh["N"] < 2 or mesh["kappa"] < 2 or mesh["amplitude"] < 0:
        raise ConfigError("mesh needs N >= 2, kappa >= 2, amplitude >= 0")
    vort = raw.get("vorticity", [])
    if not isinstance(vort, list):
        raise ConfigError("vorticity must be a list of blobs")
    try:
        blobs = [Blob.from_dict(_check_keys(b, {"center", "strength", "core_radius"}, "blob")) for b in vort]
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"vorticity: {e}") from e
    gamma = _num(raw, "gamma", 0.0)
    hs = raw.get("hstar", {"kind": "disk_harmonic"})
    try:
        _check_keys(hs, {"kind", "x_star"}, "hstar")
        hstar = HStarSpec(hs.get("kind", "disk_harmonic"), tuple(hs.get("x_star", (0.0, 0.0))))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"hstar: {e}") from e
    lam = None
    if "lambda" in raw:
        try:
            lam = LambdaSpec.from_dict(raw["lambda"])
        except (AttributeError, TypeError, ValueError) as e:
            raise ConfigError(f"lambda: {e}") from e
    if "eval_points" in raw and "eval_circle" in raw:
        raise ConfigError("give either eval_points or eval_circle, not both")
    if "eval_points" in raw:
        pts = np.asarray(raw["eval_points"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ConfigError("eval_points must be a list of [x, y] pairs")
    else:
        ec = _check_keys(raw.get("eval_circle", {"radius": 3.0, "count": 360}), {"radius", "count"},
                         "eval_circle")
        r, n = _num(ec, "radius", 3.0), _num(ec, "count", 360, int)
        if r <= 0 or n < 1:
            raise ConfigError("eval_circle needs radius > 0 and count >= 1")
        t = 2.0 * math.pi * np.arange(n) / n
        pts = r * np.stack((np.cos(t), np.sin(t)), axis=-1)
    dyn = dict(_check_keys(raw.get("dynamics", {}), _DYN_KEYS, "dynamics"))
    dynamics = {"t_end": _num(dyn, "t_end", 10.0), "h": _num(dyn, "h", 1e-2),
                "output_every": _num(dyn, "output_every", 1, int)}
    if dynamics["h"] == 0 or dynamics["output_every"] < 1:
        raise ConfigError("dynamics needs h != 0 and output_every >= 1")
    N_list = raw.get("N_list", [])
    if not isinstance(N_list, list) or any(isinstance(v, bool) or not isinstance(v, int) or v < 2 for v in N_list):
        raise ConfigError("N_list must be a list of integers >= 2")
    return RunConfig(curve, mesh, blobs, gamma, method, hstar, lam, pts, dynamics, list(N_list))


def load_config(path: str | None, seed: int | None) -> RunConfig:
    if path is None:
        raise ConfigError("--config is required")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON in {path} at line {e.lineno}, column {e.colno}: {e.msg}") from e
    return parse_config(raw, seed)


# --------------------------------------------------------------------------
# commands


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    if not out.is_dir():
        raise OSError(f"output directory {out} does not exist")
    return out


def _physical(cfg: RunConfig):
    """Build the curve and vorticity and re-check physical preconditions."""
    from .fields import VorticityField
    from .geometry import build_curve

    curve = build_curve(cfg.curve)
    omega = VorticityField(tuple(cfg.blobs))
    omega.check_in_fluid(curve)
    if cfg.method in ("charge", "charge_lambda") and not bool(curve.contains(cfg.hstar.center)):
        raise ConfigError("hstar center must lie inside the obstacle")
    if cfg.eval_points is not None and len(cfg.eval_points) and curve.contains(cfg.eval_points).any():
        raise ConfigError("evaluation points must lie in the fluid")
    return curve, omega


def _mesh(curve, cfg: RunConfig, N: int | None = None, flavor: str | None = None):
    from .studies import mesh_for

    want = flavor or ("vortex" if cfg.method == "vortex" else "charge")
    if flavor is None and cfg.mesh.get("flavor", want) != want:
        raise ConfigError(f"method {cfg.method} needs a {want} mesh")
    method = "vortex" if want == "vortex" else "charge"
    return mesh_for(curve, method, N or cfg.mesh["N"], cfg.mesh["kappa"], cfg.mesh["amplitude"],
                    cfg.mesh["seed"])


def _is_unit_disk(spec) -> bool:
    return spec.kind == "circle" and spec.radius == 1.0 and tuple(spec.center) == (0.0, 0.0)


def cmd_geom(cfg: RunConfig, args) -> dict:
    import numpy as np

    from .geometry import build_curve, winding_number

    out = _out_dir(args)
    curve = build_curve(cfg.curve)
    n = cfg.mesh["N"]
    s = curve.length * np.arange(n) / n
    p, tau, nrm, k = curve.frame(s)
    write_csv(out / "boundary.csv", ["s", "x", "y", "tx", "ty", "nx", "ny", "curvature"],
              np.column_stack((s, p, tau, nrm, k)))
    summary = {"curve": cfg.curve.to_dict(), "length": curve.length, "samples": n,
               "winding_number": winding_number(curve, cfg.curve.center)}
    write_json(out / "geom.json", summary)
    return summary


def _static_solution(cfg, curve, omega, mesh):
    from .studies import solve_static

    if cfg.method not in ("vortex", "charge", "charge_lambda"):
        raise ConfigError(f"method {cfg.method} is not a static method")
    return solve_static(curve, mesh, cfg.method, omega, cfg.gamma, cfg.hstar, cfg.lam)


def cmd_static(cfg: RunConfig, args) -> dict:
    import numpy as np

    from .charge_solver import condition_estimate
    from .fields import circulation, velocity_fullplane
    from .oracle import DiskExactSolution, exact_disk_velocity
    from .studies import total_velocity

    out = _out_dir(args)
    curve, omega = _physical(cfg)
    mesh = _mesh(curve, cfg)
    density, system = _static_solution(cfg, curve, omega, mesh)
    u = total_velocity(density, omega, cfg.eval_points)
    write_csv(out / "density.csv", ["index", "s", "gamma"],
              [(i, mesh.s[i], density.values[i]) for i in range(mesh.N)])
    write_csv(out / "field.csv", ["x", "y", "ux", "uy"], np.column_stack((cfg.eval_points, u)))
    far = 2.0 + max(np.abs(curve.point(mesh.s)).max(),
                    np.abs(omega.centers).max() if omega.blobs else 0.0)

    def full(x):
        return total_velocity(density, omega, x)

    summary = {
        "method": cfg.method, "N": mesh.N, "curve": cfg.curve.to_dict(), "mesh": mesh.to_dict(),
        "gamma": cfg.gamma, "residual": density.info["residual"], "density_mean": float(density.values.mean()),
        "condition_estimate": condition_estimate(system),
        "circulation": {"radius": far, "expected": cfg.gamma + omega.total_mass,
                        "measured": circulation(full, far, 1024)},
    }
    summary.update({k: v for k, v in density.info.items() if k not in ("residual", "mean")})
    summary.update(getattr(system, "info", {}))
    if _is_unit_disk(cfg.curve) and all(b.core_radius == 0 for b in cfg.blobs):
        exact = exact_disk_velocity(DiskExactSolution(omega.centers, omega.strengths, cfg.gamma), cfg.eval_points)
        summary["sup_error_vs_exact"] = float(np.abs(u - exact).max())
    write_json(out / "summary.json", summary)
    return summary


def cmd_converge(cfg: RunConfig, args) -> dict:
    import numpy as np

    from .mesh import loglog_slope
    from .oracle import DiskExactSolution, exact_disk_velocity
    from .studies import mesh_for, solve_static, total_velocity

    N_list = list(args.N_list or cfg.N_list)
    if len(N_list) < 3:
        raise ConfigError("converge needs at least three values of N")
    out = _out_dir(args)
    curve, omega = _physical(cfg)
    pts = cfg.eval_points
    if _is_unit_disk(cfg.curve) and all(b.core_radius == 0 for b in cfg.blobs):
        ref = exact_disk_velocity(DiskExactSolution(omega.centers, omega.strengths, cfg.gamma), pts)
        reference = "exact_disk"
    else:
        Nref = 4 * max(N_list)
        dens, _ = solve_static(curve, mesh_for(curve, cfg.method, Nref), cfg.method, omega, cfg.gamma,
                               cfg.hstar, cfg.lam)
        ref = total_velocity(dens, omega, pts)
        reference = f"uniform N={Nref}"
    rows, errs = [], []
    for N in N_list:
        dens, _ = _static_solution(cfg, curve, omega, _mesh(curve, cfg, N))
        errs.append(float(np.abs(total_velocity(dens, omega, pts) - ref).max()))
        ok = [e for e in errs if e > 0]
        slope = loglog_slope(N_list[:len(errs)], errs) if len(errs) >= 2 and len(ok) == len(errs) else math.nan
        rows.append((N, errs[-1], slope))
    write_csv(out / "converge.csv", ["N", "sup_error", "slope_so_far"], rows)
    summary = {"method": cfg.method, "N": N_list, "sup_error": errs, "order": -rows[-1][2],
               "reference": reference}
    write_json(out / "converge.json", summary)
    return summary


def cmd_diagnose(cfg: RunConfig, args) -> dict:
    import numpy as np

    from .charge_solver import (build_charge_system, condition_estimate, dominance_margin,
                                geometric_radii)
    from .geometry import build_curve
    from .kernels import (assemble, cot_sum_deviation, discrete_pb_residual, l2, mean_residual,
                          spectral_radius_meanzero)
    from .errors import NoConvergence
    from .vortex_solver import build_system

    out = _out_dir(args)
    curve = build_curve(cfg.curve)
    N = cfg.mesh["N"]
    vmesh = _mesh(curve, cfg, N, "vortex")
    cmesh = _mesh(curve, cfg, N, "charge")
    kv = assemble(curve, vmesh)
    kc = assemble(curve, cmesh)
    rng = np.random.default_rng(args.seed if args.seed is not None else cfg.mesh["seed"])
    z = rng.standard_normal(N)
    z /= l2(z)
    pb = discrete_pb_residual(kv, z)
    try:
        spec = spectral_radius_meanzero(kc)
        spec["converged"] = True
    except NoConvergence as exc:
        spec = {"rho0": exc.best, "rho_full": float("nan"), "converged": False}
    charge_sys = build_charge_system(curve, cmesh, None, 0.0, cfg.hstar if curve.contains(cfg.hstar.center) else None)
    vortex_sys = build_system(curve, vmesh, None, 0.0)
    result = {
        "N": N, "curve": cfg.curve.to_dict(), "mesh": dict(cfg.mesh),
        "cot_dev": list(cot_sum_deviation(vmesh)),
        "pb_residual": [pb["bb_aa"], pb["ab_ba"], pb["bb_aa_tilde"], pb["ab_ba_tilde"]],
        "mean_residual": mean_residual(kv, z)["mean"],
        "rho0": spec["rho0"], "rho_full": spec["rho_full"], "rho0_converged": spec["converged"],
        "condition": {"charge": condition_estimate(charge_sys), "vortex": condition_estimate(vortex_sys)},
        "radii": geometric_radii(curve),
    }
    if cfg.mesh.get("flavor", "vortex" if cfg.method == "vortex" else "charge") == "vortex":
        result["dominance"] = None
        result["dominance_note"] = "diagonal dominance is defined for charge systems; use a charge mesh"
    else:
        dm = dominance_margin(charge_sys)
        result["dominance"] = {"min_margin": dm["min_margin"], "dominant": dm["dominant"]}
    write_json(out / "diagnose.json", result)
    return result


def cmd_dynamics(cfg: RunConfig, args) -> dict:
    from .dynamics import make_state, run
    from .geometry import build_curve

    target = Path(args.out or ".")
    if target.suffix == ".csv":
        traj_path, out = target, target.parent if str(target.parent) else Path(".")
    else:
        out = target
        traj_path = out / "traj.csv"
    if not out.is_dir():
        raise OSError(f"output directory {out} does not exist")
    curve = None if cfg.method == "free" else build_curve(cfg.curve)
    pos = [b.center for b in cfg.blobs]
    state = make_state(pos, [b.strength for b in cfg.blobs], [b.core_radius for b in cfg.blobs],
                       method=cfg.method, curve=curve,
                       mesh=None if cfg.method in ("free", "exact_disk") else
                       {k: cfg.mesh[k] for k in ("N", "kappa", "amplitude", "seed")},
                       gamma=cfg.gamma, h=cfg.dynamics["h"], hstar=cfg.hstar, lam=cfg.lam)
    res = run(state, cfg.dynamics["t_end"], cfg.dynamics["h"], cfg.dynamics["output_every"])
    rows = [(t, k, p[k, 0], p[k, 1]) for t, p in zip(res["t"], res["positions"]) for k in range(len(pos))]
    write_csv(traj_path, ["t", "blob_index", "x", "y"], rows)
    steps = max(1, math.ceil(cfg.dynamics["t_end"] / cfg.dynamics["h"] - 1e-9))
    diag = {"method": cfg.method, "steps": steps, "snapshots": len(res["t"]), "h": cfg.dynamics["h"],
            "t_end": cfg.dynamics["t_end"], "history": res["diagnostics"]}
    write_json(out / "diagnostics.json", diag)
    return diag


COMMANDS = {"geom": cmd_geom, "static": cmd_static, "converge": cmd_converge,
            "diagnose": cmd_diagnose, "dynamics": cmd_dynamics}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="run configuration (JSON)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory (must exist)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="BLAS/OpenMP threads")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="default RNG seed")

    p = argparse.ArgumentParser(prog="exovortex", parents=[common],
                                description="Boundary vortex and fluid charge methods for flow past an obstacle.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("geom", parents=[common], help="sample the boundary curve")
    for name, hlp in (("static", "solve for the boundary density and evaluate the flow"),
                      ("converge", "convergence study over N")):
        sp = sub.add_parser(name, parents=[common], help=hlp)
        sp.add_argument("--method", choices=["vortex", "charge", "charge-lambda"])
        sp.add_argument("--hstar", help="disk | point:x,y")
        sp.add_argument("--lambda", dest="lam", help="const:c | sigma:s")
        if name == "converge":
            sp.add_argument("--N", dest="N_list", type=int, nargs="+", help="mesh sizes")
    sub.add_parser("diagnose", parents=[common], help="discrete identities and conditioning")
    sub.add_parser("dynamics", parents=[common], help="time-step vortex blobs")
    return p


def _apply_overrides(cfg: RunConfig, args) -> None:
    from .charge_solver import LambdaSpec
    from .fields import HStarSpec

    if getattr(args, "method", None):
        cfg.method = _METHOD_ALIASES[args.method]
    hs = getattr(args, "hstar", None)
    if hs:
        if hs == "disk":
            cfg.hstar = HStarSpec()
        elif hs.startswith("point:"):
            try:
                x, y = (float(v) for v in hs[6:].split(","))
            except ValueError as e:
                raise ConfigError(f"cannot parse --hstar {hs!r}") from e
            cfg.hstar = HStarSpec("point_vortex_at", (x, y))
        else:
            raise ConfigError(f"cannot parse --hstar {hs!r}")
    if getattr(args, "lam", None):
        try:
            cfg.lam = LambdaSpec.parse(args.lam)
        except ValueError as e:
            raise ConfigError(str(e)) from e
    if cfg.lam is not None and cfg.method == "charge":
        cfg.method = "charge_lambda"
    if cfg.method == "charge_lambda" and cfg.lam is None:
        from .geometry import build_curve

        cfg.lam = LambdaSpec("const", c=math.pi / build_curve(cfg.curve).length)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("config", "out", "threads", "seed"):
        if not hasattr(args, name):
            setattr(args, name, None)
    if args.threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)

    from .errors import ExoVortexError, SolverError

    try:
        cfg = load_config(args.config, args.seed)
        _apply_overrides(cfg, args)
        result = COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ExoVortexError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(dumps(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
