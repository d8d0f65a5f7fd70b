"""Batch command-line front end.

Subcommands: transform, check-invariance, simulate-sde, simulate-spde,
compare, report.  Each run reads defaults + optional TOML config + flag
overrides, writes its outputs (JSON, CSV, PNG) into the --out directory
together with a manifest, and prints a short summary.  Exit codes:
0 success, 1 invariance verdict failed, 2 usage/config error, 3 numeric
failure (blow-up, non-finite quadrature).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import types
from pathlib import Path

import numpy as np

from . import models, plots
from .config import (ConfigError, load_config_file, merge_config, show_config,
                     write_manifest)
from .hermite import TruncationScheme
from .invariance import (all_pass, check_levelset, check_sphere,
                         check_stratonovich, reports_to_json)
from .manifolds import newton_projection_sample, sample_sphere
from .sde import BlowUpError, coupled_increments, euler_maruyama
from .sobolev import project_function, reconstruct
from .spde import (compare_trajectories, galerkin_integrate, SpdeTrajectory,
                   translate_profile, translated_profile_solution)

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    """Bad invocation: unknown names, incompatible inputs."""


def _fmt(x: float) -> str:
    """Full double-precision decimal (shortest round-trip form)."""
    return repr(float(x))


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell if isinstance(cell, str) else _fmt(cell)
                             for cell in row])


def _usage_guard(fn, *args, **kwargs):
    """Registry and compatibility ValueErrors are usage errors here."""
    try:
        return fn(*args, **kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# subcommand handlers: cfg is the merged flat config, out the run directory


def cmd_transform(cfg: dict, out: Path) -> int:
    scheme = TruncationScheme(int(cfg["dimension"]), int(cfg["max_degree"]))
    fn = _usage_guard(models.make_function, cfg["function"])
    vec = project_function(fn, scheme)
    vec.save(out / "coefficients.json")
    plots.plot_coefficients(vec.coefficients, out / "coefficients.png",
                            title=cfg["function"])
    print(f"projected {cfg['function']} onto {scheme.basis_size} basis "
          f"functions (d={scheme.dimension}, K={scheme.max_degree})")
    if scheme.dimension == 1:
        hw = float(cfg["grid_halfwidth"])
        grid = np.linspace(-hw, hw, int(cfg["grid_points"]))[:, None]
        target = np.asarray(fn(grid), dtype=float)
        recon = reconstruct(vec, grid)
        _write_csv(out / "reconstruction.csv", ["x", "function", "reconstruction"],
                   zip(grid[:, 0], target, recon))
        plots.plot_reconstruction(grid[:, 0], target, recon,
                                  out / "reconstruction.png")
        print(f"max reconstruction error on grid: {np.abs(target - recon).max():.3e}")
    return EXIT_OK


def _build_sample(manifold_name: str, manifold, count: int, seed: int):
    if manifold_name == "sphere":
        return sample_sphere(count, manifold.ambient_dim, seed=seed)
    return newton_projection_sample(manifold, count, seed=seed)


def cmd_check_invariance(cfg: dict, out: Path) -> int:
    name = cfg["model"]
    if models.is_spde_model(name):
        raise UsageError(f"{name!r} is an SPDE model; check-invariance takes "
                         "finite-dimensional SDE models")
    model = _usage_guard(models.make_sde_model, name)
    manifold_name = cfg["manifold"] or models.DEFAULT_MANIFOLD.get(name, "")
    if not manifold_name:
        raise UsageError(f"no default manifold for model {name!r}; "
                         "set manifold explicitly")
    manifold = _usage_guard(models.make_manifold, manifold_name)
    if manifold.ambient_dim != model.dimension:
        raise UsageError(f"manifold {manifold_name!r} lives in dimension "
                         f"{manifold.ambient_dim}, model in {model.dimension}")
    tol = float(cfg["tolerance"]) or None
    sample = _build_sample(manifold_name, manifold, int(cfg["points"]),
                           int(cfg["seed"]))
    reports = check_levelset(model, manifold, sample, tol=tol)
    if manifold_name == "sphere":
        reports.extend(check_sphere(model, sample, tol=tol))
    if cfg["stratonovich"]:
        reports.append(check_stratonovich(model, manifold, sample, tol=tol))
    with open(out / "report.json", "w") as fh:
        json.dump(reports_to_json(reports), fh, indent=2)
    plots.plot_residuals(reports, out / "residuals.png")
    for r in reports:
        print(_report_line(r))
    ok = all_pass(reports)
    print(f"overall: {'pass' if ok else 'FAIL'} "
          f"({name} on {manifold_name}, {len(sample.points)} points)")
    return EXIT_OK if ok else EXIT_VERDICT


def _report_line(r) -> str:
    word = "pass" if r.verdict else "FAIL"
    return (f"  [{word}] {r.condition}: max {r.max_abs:.3e} "
            f"mean {r.mean_abs:.3e} (tol {r.tolerance:.1e})")


def _default_x0(model) -> np.ndarray:
    x0 = np.zeros(model.dimension)
    x0[0] = 1.0
    return x0


def cmd_simulate_sde(cfg: dict, out: Path) -> int:
    name = cfg["model"]
    if models.is_spde_model(name):
        raise UsageError(f"{name!r} is an SPDE model; use simulate-spde")
    model = _usage_guard(models.make_sde_model, name)
    x0 = np.asarray(cfg["x0"], dtype=float) if len(cfg["x0"]) \
        else _default_x0(model)
    if x0.size != model.dimension:
        raise UsageError(f"x0 has length {x0.size}, model dimension "
                         f"{model.dimension}")
    T, dt = float(cfg["horizon"]), float(cfg["dt"])
    paths, seed = int(cfg["paths"]), int(cfg["seed"])
    first = None
    finals = []
    for p in range(paths):
        traj = euler_maruyama(model, x0, T, dt, seed=seed, path_index=p)
        finals.append(traj.states[-1])
        if p == 0:
            first = traj
    first.to_csv(out / "trajectory.csv")
    first.save(out / "trajectory.json")
    plots.plot_trajectory(first.times, first.states, out / "trajectory.png",
                          title=name)
    if paths > 1:
        _write_csv(out / "final_states.csv",
                   ["path"] + [f"x_{i + 1}" for i in range(model.dimension)],
                   [(str(p), *xs) for p, xs in enumerate(finals)])
    print(f"simulated {paths} path(s) of {name}: {len(first.times) - 1} steps, "
          f"final |x| of path 0 = {np.linalg.norm(first.states[-1]):.6f}")
    return EXIT_OK


def cmd_simulate_spde(cfg: dict, out: Path) -> int:
    name = cfg["model"]
    if not models.is_spde_model(name):
        raise UsageError(f"{name!r} is not an SPDE model; use simulate-sde")
    m = _usage_guard(models.make_spde_model, name,
                     max_degree=int(cfg["max_degree"]))
    x0 = np.asarray(cfg["x0"], dtype=float)
    if x0.size != m.spatial_dim:
        raise UsageError(f"x0 has length {x0.size}, spatial dimension "
                         f"{m.spatial_dim}")
    T, dt, seed = float(cfg["horizon"]), float(cfg["dt"]), int(cfg["seed"])
    method = cfg["method"]
    if method not in ("galerkin", "profile", "both"):
        raise UsageError(f"method must be galerkin, profile, or both, "
                         f"got {method!r}")
    p_report = m.regularity if cfg["p"] in ("auto", "", None) \
        else float(cfg["p"])
    n_steps = int(round(T / dt))
    W = coupled_increments(seed, n_steps, m.noise_count, dt)
    runs = {}
    if method in ("galerkin", "both"):
        y0 = translate_profile(m, x0)
        runs["galerkin"] = galerkin_integrate(m, y0, T, dt, W, seed=seed)
    if method in ("profile", "both"):
        runs["profile"] = translated_profile_solution(m, x0, T, dt, W, seed=seed)
    for label, traj in runs.items():
        traj.save(out / f"{label}.json")
    some = next(iter(runs.values()))
    labels = list(runs)
    norm_rows = zip(some.times, *(runs[k].norms(p_report) for k in labels))
    _write_csv(out / "norms.csv", ["t"] + [f"norm_{k}" for k in labels],
               norm_rows)
    plots.plot_series(some.times, [runs[k].norms(p_report) for k in labels],
                      out / "norms.png",
                      ylabel=f"scale norm at p={p_report}", labels=labels)
    print(f"integrated {name} ({method}) for {n_steps} steps at K="
          f"{m.scheme.max_degree}")
    if len(runs) == 2:
        dist = compare_trajectories(runs["galerkin"], runs["profile"],
                                    p=p_report)
        _write_csv(out / "distance.csv", ["t", "distance"],
                   zip(some.times, dist))
        plots.plot_series(some.times[1:], dist[1:], out / "distance.png",
                          ylabel="route distance", logy=bool(np.all(dist[1:] > 0)))
        print(f"sup route distance: {dist.max():.6e}")
    return EXIT_OK


def _load_spde_trajectory(path) -> SpdeTrajectory:
    try:
        with open(path) as fh:
            return SpdeTrajectory.from_json(json.load(fh))
    except FileNotFoundError:
        raise UsageError(f"trajectory file not found: {path}") from None
    except (KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"not a trajectory file: {path} ({exc})") from None


def cmd_compare(cfg: dict, out: Path) -> int:
    a = _load_spde_trajectory(cfg["first"])
    b = _load_spde_trajectory(cfg["second"])
    dist = _usage_guard(compare_trajectories, a, b, p=float(cfg["p"]))
    _write_csv(out / "distance.csv", ["t", "distance"], zip(a.times, dist))
    plots.plot_series(a.times, dist, out / "distance.png",
                      ylabel=f"S_p distance, p={cfg['p']}")
    print(f"compared {len(a.times)} states: sup distance {dist.max():.6e}, "
          f"final {dist[-1]:.6e}")
    return EXIT_OK


def cmd_report(cfg: dict, out: Path) -> int:
    run_dir = Path(cfg["run"])
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        raise UsageError(f"no manifest.json under {run_dir}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    lines = [f"run: {run_dir}",
             f"subcommand: {manifest.get('subcommand')}",
             f"versions: {manifest.get('versions')}"]
    report_path = run_dir / "report.json"
    if report_path.exists():
        with open(report_path) as fh:
            entries = json.load(fh)
        fake = [types.SimpleNamespace(**e) for e in entries]
        for r in fake:
            r.verdict = r.verdict == "pass"
            lines.append(_report_line(r))
        lines.append("overall: " + ("pass" if all(r.verdict for r in fake)
                                    else "FAIL"))
        plots.plot_residuals(fake, out / "residuals.png")
    for csv_name, ylabel in (("distance.csv", "distance"),
                             ("norms.csv", "scale norm")):
        path = run_dir / csv_name
        if path.exists():
            times, series, labels = _read_series_csv(path)
            plots.plot_series(times, series, out / csv_name.replace(".csv", ".png"),
                              ylabel=ylabel, labels=labels)
            lines.append(f"{csv_name}: {len(times)} rows re-rendered")
    traj_path = run_dir / "trajectory.json"
    if traj_path.exists():
        with open(traj_path) as fh:
            data = json.load(fh)
        plots.plot_trajectory(np.asarray(data["times"]),
                              np.asarray(data["states"]),
                              out / "trajectory.png")
        lines.append(f"trajectory.json: {len(data['times'])} states re-rendered")
    text = "\n".join(lines)
    with open(out / "report.txt", "w") as fh:
        fh.write(text + "\n")
    print(text)
    return EXIT_OK


def _read_series_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.asarray([[float(c) for c in row] for row in body])
    return data[:, 0], data[:, 1:].T, header[1:]


HANDLERS = {
    "transform": cmd_transform,
    "check-invariance": cmd_check_invariance,
    "simulate-sde": cmd_simulate_sde,
    "simulate-spde": cmd_simulate_spde,
    "compare": cmd_compare,
    "report": cmd_report,
}


# ---------------------------------------------------------------------------
# argument parsing


def _parse_floats(text: str) -> list:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: "
                                         f"{text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML config file")
    common.add_argument("--out", metavar="DIR", help="run directory")
    common.add_argument("--seed", type=int, metavar="N")
    common.add_argument("--show-config", action="store_true",
                        help="print effective defaults and exit")

    parser = argparse.ArgumentParser(
        prog="hermstoch",
        description="Truncated Hermite-Sobolev computation, SDE/SPDE "
                    "simulation, and submanifold invariance checking.")
    parser.add_argument("--show-config", action="store_true",
                        help="print all defaults and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("transform", parents=[common],
                       help="project a named function onto the Hermite basis")
    p.add_argument("--function", metavar="NAME")
    p.add_argument("--max-degree", type=int, metavar="K")
    p.add_argument("--dimension", type=int, metavar="D")

    p = sub.add_parser("check-invariance", parents=[common],
                       help="verify invariance conditions for a built-in model")
    p.add_argument("--model", metavar="NAME")
    p.add_argument("--manifold", metavar="NAME")
    p.add_argument("--points", type=int, metavar="N")
    p.add_argument("--tolerance", type=float, metavar="X")

    p = sub.add_parser("simulate-sde", parents=[common],
                       help="Euler-Maruyama paths of a built-in SDE model")
    p.add_argument("--model", metavar="NAME")
    p.add_argument("--dt", type=float, metavar="X")
    p.add_argument("--paths", type=int, metavar="N")
    p.add_argument("--horizon", type=float, metavar="T")
    p.add_argument("--x0", type=_parse_floats, metavar="X1,X2,...")

    p = sub.add_parser("simulate-spde", parents=[common],
                       help="integrate a built-in SPDE by one or both routes")
    p.add_argument("--model", metavar="NAME")
    p.add_argument("--max-degree", type=int, metavar="K")
    p.add_argument("--dt", type=float, metavar="X")
    p.add_argument("--horizon", type=float, metavar="T")
    p.add_argument("--method", metavar="M",
                   help="galerkin, profile, or both")
    p.add_argument("--x0", type=_parse_floats, metavar="X1,...")
    p.add_argument("--p", type=float, metavar="X", dest="p",
                   help="regularity for norm/distance reporting")

    p = sub.add_parser("compare", parents=[common],
                       help="S_p distance between two stored trajectories")
    p.add_argument("first", nargs="?", help="trajectory JSON")
    p.add_argument("second", nargs="?", help="trajectory JSON")
    p.add_argument("--p", type=float, metavar="X", dest="p")

    p = sub.add_parser("report", parents=[common],
                       help="re-render a run directory without recomputation")
    p.add_argument("run", nargs="?", help="run directory to re-render")

    return parser


_FLAG_KEYS = {
    "transform": ("function", "max_degree", "dimension"),
    "check-invariance": ("model", "manifold", "points", "tolerance"),
    "simulate-sde": ("model", "dt", "paths", "horizon", "x0"),
    "simulate-spde": ("model", "max_degree", "dt", "horizon", "method", "x0",
                      "p"),
    "compare": ("first", "second", "p"),
    "report": ("run",),
}


def _overrides(args: argparse.Namespace) -> dict:
    keys = _FLAG_KEYS[args.command] + ("out", "seed")
    out = {}
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if args.command is None:
        if args.show_config:
            print(show_config())
            return EXIT_OK
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if getattr(args, "show_config", False):
        print(show_config(args.command))
        return EXIT_OK
    try:
        file_cfg = load_config_file(args.config) if args.config else None
        overrides = _overrides(args)
        cfg = merge_config(args.command, file_cfg, overrides)
        _validate_required(args.command, cfg)
        out = Path(cfg["out"])
        if args.command == "report":
            # pure re-rendering: never touch the original run's manifest
            if "out" not in overrides and not (
                    file_cfg and "out" in (file_cfg.get("common") or {})):
                out = Path(cfg["run"]) / "rendered"
            out.mkdir(parents=True, exist_ok=True)
        else:
            out.mkdir(parents=True, exist_ok=True)
            write_manifest(out, args.command, _json_safe(cfg), argv)
        return HANDLERS[args.command](cfg, out)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BlowUpError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def _validate_required(command: str, cfg: dict) -> None:
    if command == "compare" and not (cfg.get("first") and cfg.get("second")):
        raise UsageError("compare needs two trajectory files "
                         "(positional or config keys first/second)")
    if command == "report" and not cfg.get("run"):
        raise UsageError("report needs a run directory")


def _json_safe(cfg: dict) -> dict:
    return {k: (list(v) if isinstance(v, (tuple, np.ndarray)) else v)
            for k, v in cfg.items()}


if __name__ == "__main__":
    sys.exit(main())
