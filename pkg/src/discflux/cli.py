"""Command-line entry points.

Configuration can come from a JSON file (--config) with the same keys as the
solver options; explicit flags win over the file, which wins over defaults.
Run output lands under --out, the DISCFLUX_OUT environment variable, or
./runs, in a directory named by a content hash.

Exit codes: 0 success / condition holds, 1 a verification or crossing check
failed, 2 bad usage or invalid inputs.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from .diagnostics import (
    bounds_report,
    ladder_bounds,
    entropy_residual_connection,
    entropy_residual_pair,
    extract_traces,
)
from .errors import ConstructionError, DiscFluxError
from .fluxes import get_flux, registry_names
from .riemann import classical_riemann
from .runio import read_run, save_transform_csv, write_run
from .solver import SolverConfig, ladder, solve
from .transforms import (
    Connection,
    TransformPair,
    build_connection_transform,
    build_translation_transform,
    check_crossing,
    composed_fluxes,
    identity_transform,
    verify_transform,
)
from .runio import load_transform_csv

_CONFIG_KEYS = set(SolverConfig().to_dict())


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    data = json.loads(Path(path).read_text())
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise click.UsageError(f"unknown config keys: {sorted(unknown)}")
    return data


def _solver_config(config_path: str | None, **flags) -> SolverConfig:
    merged = SolverConfig().to_dict()
    merged.update(_load_config(config_path))
    merged.update({k: v for k, v in flags.items() if v is not None})
    try:
        return SolverConfig(**merged)
    except (TypeError, ValueError) as exc:
        raise click.UsageError(str(exc))


def _parse_connection(text: str | None) -> Connection | None:
    if text is None:
        return None
    parts = text.split(":")
    try:
        if len(parts) == 2:
            return Connection(float(parts[0]), float(parts[1]))
        if len(parts) == 3:
            return Connection(float(parts[0]), float(parts[1]), parts[2])
    except ValueError as exc:
        raise click.UsageError(f"bad connection {text!r}: {exc}")
    raise click.UsageError("connection must be A:B or A:B:flavor")


def _resolve_transform(text: str, flux, conn: Connection | None) -> TransformPair:
    if text == "identity":
        return identity_transform(flux)
    if text == "translation":
        return build_translation_transform(flux)
    if text == "connection":
        if conn is None:
            raise click.UsageError("--transform connection requires --connection A:B")
        return build_connection_transform(flux, conn)
    path = Path(text)
    if path.exists():
        meta_path = path.with_suffix(".json")
        meta = json.loads(meta_path.read_text()) if meta_path.exists() else None
        return load_transform_csv(path, meta)
    raise click.UsageError(
        f"unknown transform {text!r} (use identity, translation, connection, or a CSV path)"
    )


def _initial_profile(text: str, flux, conn: Connection | None):
    if text == "steady":
        if conn is None:
            raise click.UsageError("--u0 steady requires --connection A:B")
        return lambda x: np.where(np.asarray(x) <= 0.0, conn.A, conn.B)
    if text.startswith("riemann:"):
        try:
            _, l, r = text.split(":")
            ul, ur = float(l), float(r)
        except ValueError:
            raise click.UsageError("use --u0 riemann:LEFT:RIGHT")
        return lambda x: np.where(np.asarray(x) <= 0.0, ul, ur)
    if text.startswith("constant:"):
        try:
            val = float(text.split(":", 1)[1])
        except ValueError:
            raise click.UsageError("use --u0 constant:VALUE")
        return lambda x: np.full(np.shape(x), val, dtype=float)
    if text == "bump":
        a, b = flux.a, flux.b
        mid, amp = 0.5 * (a + b), 0.45 * (b - a)
        return lambda x: mid + amp * np.exp(-np.asarray(x, dtype=float) ** 2 / 0.5)
    raise click.UsageError(f"unknown initial profile {text!r}")


def _out_root(out: str | None) -> Path:
    return Path(out or os.environ.get("DISCFLUX_OUT", "runs"))


@click.group()
def main():
    """Tools for conservation laws with a flux that switches at x = 0."""


@main.command("solve")
@click.option("--flux", "flux_name", default="demo-cross", show_default=True,
              help=f"registry name ({', '.join(registry_names())}) or a u,f,g CSV")
@click.option("--transform", "transform_arg", default="identity", show_default=True)
@click.option("--connection", "connection_text", default=None, help="A:B or A:B:flavor")
@click.option("--u0", "u0_arg", default="riemann:0.25:0.75", show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", default=None, help="output root (default $DISCFLUX_OUT or ./runs)")
@click.option("--cells", type=int, default=None)
@click.option("--eps", type=float, default=None)
@click.option("--t-end", "t_end", type=float, default=None)
@click.option("--half-width", "half_width", type=float, default=None)
@click.option("--snapshots", type=int, default=None)
def cli_solve(flux_name, transform_arg, connection_text, u0_arg, config_path, out,
              cells, eps, t_end, half_width, snapshots):
    """Run the viscous scheme and persist snapshots."""
    try:
        flux = get_flux(flux_name)
        conn = _parse_connection(connection_text)
        transform = _resolve_transform(transform_arg, flux, conn)
        u0 = _initial_profile(u0_arg, flux, conn)
        cfg = _solver_config(config_path, cells=cells, eps=eps, t_end=t_end,
                             half_width=half_width, snapshots=snapshots)
        field = solve(flux, u0, transform, cfg)
    except (DiscFluxError, ValueError) as exc:
        raise click.UsageError(str(exc))
    run_dir = write_run(field, cfg, _out_root(out))
    click.echo(f"run written to {run_dir}")
    click.echo(f"steps={field.stats['steps']} dt={field.dt:.3e} eps={field.eps:.3e}")
    traces = extract_traces(field)
    click.echo(f"final traces: left={traces.left[-1]:.6g} right={traces.right[-1]:.6g} "
               f"flux mismatch={traces.final_mismatch:.3e}")


@main.command("check-crossing")
@click.option("--flux", "flux_name", default="demo-cross", show_default=True)
@click.option("--transform", "transform_arg", default="identity", show_default=True)
@click.option("--connection", "connection_text", default=None)
def cli_check_crossing(flux_name, transform_arg, connection_text):
    """Report whether the composed fluxes cross at most once (exit 1 if not)."""
    try:
        flux = get_flux(flux_name)
        conn = _parse_connection(connection_text)
        transform = _resolve_transform(transform_arg, flux, conn)
        report = check_crossing(*composed_fluxes(flux, transform))
    except (DiscFluxError, ValueError) as exc:
        raise click.UsageError(str(exc))
    click.echo(report.to_json())
    sys.exit(0 if report.holds else 1)


@main.command("build-transform")
@click.option("--flux", "flux_name", default="demo-cross", show_default=True)
@click.option("--mode", type=click.Choice(["translation", "connection"]), required=True)
@click.option("--connection", "connection_text", default=None)
@click.option("--out", "out_path", type=click.Path(), required=True,
              help="destination CSV; a .json metadata file is written next to it")
def cli_build_transform(flux_name, mode, connection_text, out_path):
    """Construct a transform pair and write it to disk."""
    try:
        flux = get_flux(flux_name)
        conn = _parse_connection(connection_text)
        if mode == "connection":
            if conn is None:
                raise click.UsageError("--mode connection requires --connection A:B")
            pair = build_connection_transform(flux, conn)
        else:
            pair = build_translation_transform(flux)
    except ConstructionError as exc:
        click.echo(f"construction failed: {exc}", err=True)
        sys.exit(1)
    except (DiscFluxError, ValueError) as exc:
        raise click.UsageError(str(exc))
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_transform_csv(out_path, pair)
    out_path.with_suffix(".json").write_text(json.dumps(pair.meta(), indent=2))
    audit = verify_transform(flux, pair)
    click.echo(f"transform written to {out_path} (kind={pair.kind}, "
               f"shifts={pair.shifts}, c={pair.c}, audit ok={audit.ok})")


@main.command("riemann")
@click.option("--flux", "flux_name", default="demo-cross", show_default=True)
@click.option("--branch", type=click.Choice(["f", "g"]), default="f", show_default=True)
@click.option("--left", type=float, required=True)
@click.option("--right", type=float, required=True)
@click.option("--time", "t_eval", type=float, default=1.0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="optional x,u profile CSV at the given time")
def cli_riemann(flux_name, branch, left, right, t_eval, out_path):
    """Exact two-state solution for one flux branch."""
    try:
        flux = get_flux(flux_name)
        sol = classical_riemann(flux.branch(branch), left, right)
    except (DiscFluxError, ValueError) as exc:
        raise click.UsageError(str(exc))
    if not sol.waves:
        click.echo("constant solution, no waves")
    for w in sol.waves:
        if w.kind == "shock":
            click.echo(f"shock  {w.left:.6g} -> {w.right:.6g} at speed {w.speed_lo:.6g}")
        else:
            click.echo(f"fan    {w.left:.6g} -> {w.right:.6g} over speeds "
                       f"[{w.speed_lo:.6g}, {w.speed_hi:.6g}]")
    if out_path:
        span = max(1.0, max(abs(s) for s in [*sol.speeds, 1.0]) * t_eval * 1.5)
        x = np.linspace(-span, span, 801)
        np.savetxt(out_path, np.column_stack([x, sol.profile(x, t_eval)]),
                   fmt="%.17g", delimiter=",", header="x,u", comments="")
        click.echo(f"profile written to {out_path}")


@main.command("verify")
@click.option("--run", "run_dir", type=click.Path(exists=True), required=True)
@click.option("--tolerance", type=float, default=None)
def cli_verify(run_dir, tolerance):
    """Re-check a stored run: transform audit, ranges, entropy residuals."""
    try:
        field, manifest = read_run(run_dir)
    except (DiscFluxError, ValueError, OSError) as exc:
        raise click.UsageError(str(exc))
    failed = False

    audit = verify_transform(field.flux, field.transform)
    click.echo(f"{'PASS' if audit.ok else 'FAIL'} transform audit")
    failed |= not audit.ok

    rep = bounds_report(field)
    ok = rep.v_ok and rep.u_ok
    click.echo(f"{'PASS' if ok else 'FAIL'} ranges "
               f"(v in [{rep.v_min:.6g}, {rep.v_max:.6g}], u in [{rep.u_min:.6g}, {rep.u_max:.6g}])")
    failed |= not ok

    lo, hi = field.transform.domain
    for xi in np.linspace(lo, hi, 7)[1:-1]:
        er = entropy_residual_pair(field, float(xi), tolerance=tolerance)
        click.echo(f"{'PASS' if er.ok else 'FAIL'} entropy residual at xi={xi:.4g} "
                   f"(worst {er.worst:.3e}, tol {er.tolerance:.3e})")
        failed |= not er.ok

    if field.transform.connection is not None:
        er = entropy_residual_connection(field, field.transform.connection, tolerance=tolerance)
        click.echo(f"{'PASS' if er.ok else 'FAIL'} adapted residual against the connection "
                   f"(worst {er.worst:.3e}, tol {er.tolerance:.3e})")
        failed |= not er.ok

    sys.exit(1 if failed else 0)


@main.command("sweep")
@click.option("--flux", "flux_name", default="demo-cross", show_default=True)
@click.option("--transform", "transform_arg", default="identity", show_default=True)
@click.option("--connection", "connection_text", default=None)
@click.option("--u0", "u0_arg", default="riemann:0.25:0.75", show_default=True)
@click.option("--levels", type=int, default=3, show_default=True)
@click.option("--cells", type=int, default=128, show_default=True, help="coarsest level")
@click.option("--t-end", "t_end", type=float, default=0.5, show_default=True)
def cli_sweep(flux_name, transform_arg, connection_text, u0_arg, levels, cells, t_end):
    """Joint refinement of grid and smoothing width; reports L1 gaps."""
    try:
        flux = get_flux(flux_name)
        conn = _parse_connection(connection_text)
        transform = _resolve_transform(transform_arg, flux, conn)
        u0 = _initial_profile(u0_arg, flux, conn)
        base = SolverConfig(cells=cells, t_end=t_end)
        result = ladder(flux, u0, transform, base, levels=levels)
    except (DiscFluxError, ValueError) as exc:
        raise click.UsageError(str(exc))
    for k, d in enumerate(result.distances):
        click.echo(f"level {k} -> {k + 1}: L1 gap {d:.6e}")
    if len(result.distances) > 1:
        ratios = [result.distances[k] / max(result.distances[k + 1], 1e-300)
                  for k in range(len(result.distances) - 1)]
        click.echo("gap ratios: " + ", ".join(f"{r:.2f}" for r in ratios))
    lb = ladder_bounds(result)
    for name, vals in (("c0", lb.c0), ("c1", lb.c1), ("c2", lb.c2)):
        click.echo(f"{name} per level: " + ", ".join(f"{v:.4e}" for v in vals))
    click.echo(f"bounds stable: {lb.ok}")
    if not result.converging:
        click.echo("warning: gaps are not shrinking at these resolutions", err=True)
    click.echo(f"converging: {result.converging}")


if __name__ == "__main__":
    main()
