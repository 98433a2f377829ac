"""Command-line front end.

Subcommands: ``measure``, ``simulate``, ``curve``, ``equilibrium``, ``oracle``.
Exit codes: 0 success, 2 usage or input error, 3 every record failed,
4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from importlib import resources
from typing import Sequence

import numpy as np

from . import equilibrium, estimator, meanfield, oracle, simulator
from .domain import (
    ConvergenceError,
    DomainError,
    RecordFormatError,
    SystemParams,
    Topology,
    Variant,
    read_count_records,
)

EXIT_OK, EXIT_USAGE, EXIT_ALL_FAILED, EXIT_NONCONVERGENCE = 0, 2, 3, 4

VARIANTS = {"exact": Variant.EXACT, "taylor": Variant.TAYLOR, "ideal": Variant.IDEAL}


class UsageError(Exception):
    pass


def bundled_counts_text() -> str:
    return resources.files("agenttemp").joinpath("data/sun2022_counts.csv").read_text("utf-8")


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    return value


def render(rows: list[dict], columns: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{c: _plain(row.get(c)) for c in columns} for row in rows],
                          indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def parse_grid(spec: str, log: bool = False) -> np.ndarray:
    """``start:stop:num`` (inclusive, strictly increasing) or a comma list."""
    try:
        if ":" in spec:
            start, stop, num = spec.split(":")
            start, stop, num = float(start), float(stop), int(num)
            if num < 1 or (num > 1 and stop <= start):
                raise UsageError(f"grid {spec!r} must be increasing with num >= 1")
            return np.geomspace(start, stop, num) if log else np.linspace(start, stop, num)
        values = np.array([float(v) for v in spec.split(",") if v.strip()])
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {spec!r}: {exc}") from exc
    if values.size == 0:
        raise UsageError("empty grid")
    return values


def _float_list(spec: str) -> list[float]:
    try:
        return [float(v) for v in spec.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse list {spec!r}") from exc


def _topology(args) -> Topology:
    return Topology.from_spec(args.topology, n=args.n, side=args.side, dim=args.dim)


def _params(args, n_agents: int, z: int) -> SystemParams:
    return SystemParams(n_agents=n_agents, z=z, mu=args.mu, j=args.J, k=args.k, b=args.B)


# -- subcommands ------------------------------------------------------------

MEASURE_COLUMNS = ["label", "M", "T", "T_std_error", "inverted", "variant"]


def cmd_measure(args) -> tuple[list[dict], list[str], int]:
    if args.bundled:
        text = bundled_counts_text()
    elif args.csv_path:
        with open(args.csv_path, encoding="utf-8") as fh:
            text = fh.read()
    else:
        raise UsageError("measure needs a CSV path or --bundled")
    records = read_count_records(text)
    variant = VARIANTS[args.variant]
    rows, failures = [], 0
    for rec in records:
        row = {"label": rec.label}
        try:
            est = estimator.surplus_from_counts(rec, as_sample=args.as_sample)
            row["M"] = est.m_hat
            reading = estimator.temperature_with_uncertainty(rec.params, est, variant)
            row.update(T=reading.t, T_std_error=reading.t_std_error,
                       inverted=reading.inverted, variant=reading.variant.value)
        except DomainError as exc:
            row["error"] = str(exc)
            failures += 1
        rows.append(row)
    columns = MEASURE_COLUMNS + (["error"] if failures else [])
    code = EXIT_ALL_FAILED if failures == len(records) else EXIT_OK
    return rows, columns, code


def cmd_simulate(args):
    topology = _topology(args)
    z = args.z if args.z is not None else topology.z
    params = _params(args, topology.n_sites, z)
    config = simulator.SimulationConfig(
        params, topology, args.T, seed=args.seed, burn_in_sweeps=args.burn_in,
        sample_interval_sweeps=args.interval, n_samples=args.samples,
        global_flip=not args.no_global_flip)
    if args.sampler == "ideal":
        trace = simulator.ideal_surplus_trace(config)
        mean = float(trace.mean())
        se = float(trace.std(ddof=1) / math.sqrt(trace.size)) if trace.size > 1 else 0.0
    else:
        trace = simulator.mcmc_surplus_trace(config)
        if trace.size >= 100:
            mean, se = simulator.batch_means(trace)
        else:
            mean, se = float(trace.mean()), float("nan")
    print(f"mean M = {mean!r} +/- {se!r} ({args.sampler}, {trace.size} samples)", file=sys.stderr)
    rows = [{"sample_index": i, "M": float(m)} for i, m in enumerate(trace)]
    return rows, ["sample_index", "M"], EXIT_OK


def cmd_curve(args):
    params = SystemParams(n_agents=max(args.z + 1, 2), z=args.z, mu=args.mu, j=0.0,
                          k=args.k, b=args.B)
    grid = parse_grid(args.grid, log=args.log)
    points = meanfield.characteristic_curve(params, _float_list(args.J), grid)
    rows = [{"J": pt.j, "M": pt.m, "T_over_T0": pt.t_over_t0} for pt in points]
    return rows, ["J", "M", "T_over_T0"], EXIT_OK


def cmd_equilibrium(args):
    params = SystemParams(n_agents=max(args.z + 1, 2), z=args.z, mu=args.mu, j=args.J,
                          k=1.0, b=args.B)
    m1_values = parse_grid(args.m1, log=args.log)
    rows, failures = [], 0
    for m1 in m1_values:
        m1 = float(m1)
        row = {"M1": m1}
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", equilibrium.RegimeWarning)
            try:
                row["M2_linear"] = equilibrium.coupled_surplus_linear(params, m1)
                row["dM2_dmu"] = equilibrium.influence_sensitivity(params, m1)
                row["M2_exact"] = equilibrium.coupled_surplus_exact(params, m1)
            except DomainError as exc:
                row["error"] = str(exc)
                failures += 1
        if caught:
            print(f"warning: {caught[0].message}", file=sys.stderr)
        rows.append(row)
    columns = ["M1", "M2_exact", "M2_linear", "dM2_dmu"] + (["error"] if failures else [])
    return rows, columns, EXIT_ALL_FAILED if failures == len(rows) else EXIT_OK


def cmd_oracle(args):
    topology = _topology(args)
    params = _params(args, topology.n_sites, topology.z)
    if params.n_agents > oracle.MAX_EXACT_AGENTS:
        raise oracle.SizeError(f"exact enumeration is capped at N <= {oracle.MAX_EXACT_AGENTS}")
    rows = []
    for t in parse_grid(args.T):
        ens = oracle.enumerate_exact(params, topology, float(t))
        rows.append({"T": float(t), "Z": ens.partition_value, "mean_M": ens.mean_surplus,
                     "mean_U": ens.mean_utility})
    return rows, ["T", "Z", "mean_M", "mean_U"], EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")

    physics = argparse.ArgumentParser(add_help=False)
    physics.add_argument("--mu", type=float, default=1.0)
    physics.add_argument("--k", type=float, default=1.0)
    physics.add_argument("--B", type=float, default=1.0)
    physics.add_argument("--J", type=float, default=0.0)

    topo = argparse.ArgumentParser(add_help=False)
    topo.add_argument("--topology", choices=Topology.KINDS, default="ring")
    topo.add_argument("--n", type=int, help="number of agents")
    topo.add_argument("--side", type=int, help="lattice side length")
    topo.add_argument("--dim", type=int, help="hypercubic dimension")

    parser = argparse.ArgumentParser(prog="agenttemp",
                                     description="Temperature measurement in two-state agent systems")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", parents=[common], help="temperature from count records")
    p.add_argument("csv_path", nargs="?", help="CSV with label,n_plus,n_minus,B,mu,k,J,z")
    p.add_argument("--bundled", action="store_true", help="use the bundled Table 1 counts")
    p.add_argument("--variant", choices=tuple(VARIANTS), default="exact")
    p.add_argument("--as-sample", action="store_true",
                   help="treat counts as a random sample and propagate its standard error")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("simulate", parents=[common, physics, topo], help="sample surplus trajectories")
    p.add_argument("--sampler", choices=("ideal", "mcmc"), default="mcmc")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--z", type=int, help="defaults to the topology's coordination number")
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--interval", type=int, default=10)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--no-global-flip", action="store_true",
                   help="disable the global reversal move of the Markov chain")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("curve", parents=[common], help="characteristic curves T/T0 over M")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--z", type=int, default=12)
    p.add_argument("--J", default="0,1,2,3", help="comma-separated J values")
    p.add_argument("--grid", default="0.01:0.99:99", help="start:stop:num or comma list of M")
    p.add_argument("--log", action="store_true", help="log-spaced grid")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("equilibrium", parents=[common], help="coupled subsystems at equal T")
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--z", type=int, default=12)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--m1", default="0.01", help="value, comma list or start:stop:num")
    p.add_argument("--log", action="store_true", help="log-spaced grid")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("oracle", parents=[common, physics, topo], help="exact enumeration over a T grid")
    p.add_argument("--T", default="1,3,10", help="comma list or start:stop:num")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        rows, columns, code = args.func(args)
    except RecordFormatError as exc:
        print(f"error: malformed input at {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    text = render(rows, columns, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
