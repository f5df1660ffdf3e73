"""Command-line entry point.

Subcommands:

- ``find-orbits --config FILE``: full orbit pipeline; writes report.json
  and orbits.csv into the output directory.
- ``morse-homology --config FILE``: torus Morse complex; writes
  complex.json and flowlines.csv.
- ``selftest``: run the property suite.

Global flags ``--seed``, ``--output-dir`` and ``--threads`` override the
config; the default thread count honors TORUSORBITS_THREADS.  Exit codes:
0 all checks pass (warnings allowed), 1 a bound or the pipeline failed,
2 malformed config, 3 the surface is not Morse / flowlines inconclusive.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys

import click

from .config import ConfigError, load_run_config, load_surface_config
from .estimators import MorseHomology, OrbitFinder
from .hamiltonians import ContractionFailure
from .homology import FlowlineError, NotMorseError
from .selftest import FAULTS, run_selftest

__all__ = ["main"]


def _write_atomic(directory, filename, text):
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, filename)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return path


@click.group()
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--output-dir", type=click.Path(), default=None,
              help="Override the config output directory.")
@click.option("--threads", type=int, default=None, envvar="TORUSORBITS_THREADS",
              help="Worker threads for independent starts (env TORUSORBITS_THREADS).")
@click.pass_context
def main(ctx, seed, output_dir, threads):
    """Periodic-orbit search and Morse-homology checks on tori."""
    ctx.ensure_object(dict)
    ctx.obj.update(seed=seed, output_dir=output_dir, threads=threads or 1)


def _report_json(cfg, finder, warnings):
    orbits = []
    for o in finder.oscillations_:
        orbits.append({
            "torus_rep": [float(v) for v in o.torus_rep],
            "action": o.action,
            "grad_norm": o.grad_norm,
            "ode_residual": o.ode_residual,
            "fixed_point_gap": o.fixed_point_gap,
            "morse_index_g": o.morse_index,
            "cz_index": o.cz_index,
            "nondegenerate": o.nondegenerate,
            "det_gap": o.det_gap,
        })
    verdict = finder.verdict_
    q = verdict.morse_surplus
    report = {
        "config_echo": cfg.echo,
        "n0": finder.context_.inner_order,
        "N": finder.context_.outer_order,
        "K": finder.context_.trap_radius,
        "contraction_q": finder.context_.log.q_max,
        "orbits": orbits,
        "verdict": {
            "count": verdict.count,
            "cup_length_bound": verdict.cup_length_bound,
            "betti_sum_bound": verdict.betti_sum_bound,
            "morse_inequalities": {
                "Q_coeffs": list(q.coefficients) if q is not None else None,
                "pass": verdict.morse_pass,
            },
        },
        "warnings": warnings,
    }
    return json.dumps(report, indent=2) + "\n"


def _orbits_csv(finder):
    buf = io.StringIO()
    writer = csv.writer(buf)
    dim = finder.system_.dim
    writer.writerow(["index"] + [f"torus_rep_{i}" for i in range(dim)]
                    + ["action", "cz_index", "nondegenerate", "det_gap"])
    for i, o in enumerate(finder.oscillations_):
        writer.writerow([i] + [repr(float(v)) for v in o.torus_rep]
                        + [repr(o.action), o.cz_index, o.nondegenerate, repr(o.det_gap)])
    return buf.getvalue()


@main.command("find-orbits")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.pass_context
def find_orbits(ctx, config_path):
    """Search for 1-periodic orbits and adjudicate the count bounds."""
    try:
        cfg = load_run_config(config_path)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    if not cfg.system.torus_periodic:
        click.echo("config error: find-orbits needs a torus-periodic Hamiltonian",
                   err=True)
        sys.exit(2)
    seed = ctx.obj["seed"] if ctx.obj["seed"] is not None else cfg.seed
    out_dir = ctx.obj["output_dir"] or cfg.output_dir

    finder = OrbitFinder(
        inner_order=cfg.n0_override,
        outer_factor=cfg.outer_factor,
        starts=cfg.starts,
        seed=seed,
        newton_tol=cfg.newton_tol,
        fiber_tol=cfg.fiber_tol,
        dedup_tol=cfg.dedup_tol,
        threads=ctx.obj["threads"],
    )
    try:
        finder.fit(cfg.system)
    except ContractionFailure as exc:
        click.echo(f"pipeline error [reduction]: {exc}", err=True)
        sys.exit(1)

    warnings = []
    report = finder.report_
    if report.degenerate_family:
        warnings.append(
            f"degenerate critical family detected ({report.n_degenerate_points} "
            "rank-deficient points flagged, not enumerated); "
            "nondegenerate count bound skipped"
        )
    _write_atomic(out_dir, "report.json", _report_json(cfg, finder, warnings))
    _write_atomic(out_dir, "orbits.csv", _orbits_csv(finder))

    for line in finder.verdict_.lines():
        click.echo(line)
    for w in warnings:
        click.echo(f"warning: {w}", err=True)
    sys.exit(0 if finder.verdict_.all_pass else 1)


def _complex_json(cfg, hom):
    data = {
        "config_echo": cfg.echo,
        "generators": [
            {"position": [float(v) for v in g.position], "index": g.index}
            for g in hom.generators_
        ],
        "boundary_one": hom.boundary_one_.astype(int).tolist(),
        "boundary_two": hom.boundary_two_.astype(int).tolist(),
        "betti": list(hom.betti_),
    }
    return json.dumps(data, indent=2) + "\n"


def _flowlines_csv(hom):
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["saddle_id", "branch", "t", "x", "y"])
    for line in hom.flowlines_:
        for t, (x, y) in zip(line.times, line.points):
            writer.writerow([line.saddle_id, line.branch, repr(float(t)),
                             repr(float(x)), repr(float(y))])
    return buf.getvalue()


@main.command("morse-homology")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.pass_context
def morse_homology(ctx, config_path):
    """Morse complex and Betti numbers of a torus surface function."""
    try:
        cfg = load_surface_config(config_path)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    out_dir = ctx.obj["output_dir"] or cfg.output_dir
    hom = MorseHomology()
    try:
        hom.fit(cfg.surface)
    except NotMorseError as exc:
        click.echo(f"not Morse: {exc}", err=True)
        sys.exit(3)
    except FlowlineError as exc:
        click.echo(f"inconclusive: {exc}", err=True)
        if exc.trajectory is not None:
            ts, ys = exc.trajectory
            dump = "\n".join(
                f"{t:.6f},{y[0]:.8f},{y[1]:.8f}" for t, y in zip(ts, ys))
            _write_atomic(out_dir, "failed_trajectory.csv", "t,x,y\n" + dump + "\n")
            click.echo(f"offending trajectory written to "
                       f"{os.path.join(out_dir, 'failed_trajectory.csv')}", err=True)
        sys.exit(3)

    _write_atomic(out_dir, "complex.json", _complex_json(cfg, hom))
    _write_atomic(out_dir, "flowlines.csv", _flowlines_csv(hom))
    counts = hom.complex_.counts()
    click.echo(f"generators by index: {counts}, betti: {hom.betti_}")
    sys.exit(0)


@main.command("selftest")
@click.option("--inject-fault", type=click.Choice(sorted(FAULTS)), default=None,
              help="Corrupt one operator to prove the suite catches it.")
def selftest(inject_fault):
    """Run the end-to-end property suite."""
    sys.exit(0 if run_selftest(inject_fault=inject_fault) else 1)


if __name__ == "__main__":
    main()
