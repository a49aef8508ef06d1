"""Command-line entry point: ``shallowxeb <analytic|simulate|classify|spoof|compare>``.

Exit status is 0 on success, 2 when an acceptance check fails and 1 on any
error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import analytics as an
from . import distributions as dist
from . import hog

EXIT_OK, EXIT_ERROR, EXIT_CHECK_FAILED = 0, 1, 2

log = logging.getLogger("shallowxeb")


class CheckFailed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse's usage errors exit with 2, which is reserved for failed checks
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _write_text(text: str, out) -> None:
    if out is None or str(out) == "-":
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _emit_rows(rows: list[dict], fmt: str, out) -> None:
    from .harness.report import format_table

    if fmt == "json":
        _write_text(json.dumps(rows, indent=2) + "\n", out)
    else:
        _write_text(format_table(rows), out)


def _depth_values(args, n: int) -> float:
    if args.a is not None:
        return args.a
    if args.c is not None:
        return float(n) ** (-args.c)
    if getattr(args, "slope", None) is not None:
        return an.depth_from_slope(args.slope)
    raise ValueError("give the depth parameter with --a, --c or --slope")


def _signal(args, a: float) -> float:
    if args.s is not None:
        return args.s
    if args.r is not None:
        return a ** args.r
    return 1.0


# analytic -----------------------------------------------------------------

def _analytic_rows(args) -> list[dict]:
    rows = []
    q = args.quantity
    if q == "slope":
        for slope in args.slope_values:
            rows.append({"slope": slope, "a": an.depth_from_slope(slope)})
        return rows
    for n in args.n:
        a = _depth_values(args, n)
        s = _signal(args, a)
        params = an.DepthNoiseParams(n, a, s)
        base = {"n": n, "a": a, "s": s}
        if q == "logxeb":
            p = an.predict_logxeb(params)
            m = p.required_samples if math.isfinite(p.required_samples) else None
            rows.append(base | {
                "mean": p.mean, "variance": p.variance, "snr": p.snr,
                "required_samples": m, "reliable": p.reliable,
            })
        elif q == "linear":
            lin = an.linear_xeb(params)
            rows.append(base | {
                "log_mean": lin.log_mean, "log_second_moment": lin.log_second_moment,
                "moment_ratio": lin.moment_ratio, "snr": lin.snr,
            })
        elif q == "moment":
            rows.append(base | {"k": args.k, "log_moment": an.log_summed_moment(params, args.k)})
        elif q == "threshold":
            b = dist.probability_gap(n, a)
            rows.append(base | {
                "z_star": b.z_star, "gap": b.gap, "p_clean": b.p_clean, "p_spoof": b.p_spoof,
                "roots": len(b.roots),
            })
        else:
            raise ValueError(f"unknown quantity {q!r}")
    return rows


def cmd_analytic(args) -> int:
    if args.quantity == "ztable":
        if len(args.n) != 1:
            raise ValueError("ztable takes exactly one --n")
        n = args.n[0]
        a = _depth_values(args, n)
        if args.format == "svg":
            from .harness.plotting import plot_score_overlays

            a_list = args.overlay_a or [a]
            plot_score_overlays(n, a_list, args.out or "overlay.svg")
        else:
            dist.write_score_table(args.out or "/dev/stdout", n, a)
        return EXIT_OK
    if args.format == "svg":
        if args.quantity != "threshold":
            raise ValueError("svg output is available for ztable and threshold")
        from .harness.plotting import plot_gap_vs_n

        plot_gap_vs_n(args.n, args.c_values or [args.c if args.c is not None else 0.5], args.out or "gap.svg")
        return EXIT_OK
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", an.UnreliableRegimeWarning)
        rows = _analytic_rows(args)
    _emit_rows(rows, args.format, args.out)
    return EXIT_OK


# simulate / compare -------------------------------------------------------

def _load_config(args):
    from .harness.config import ExperimentConfig, preset

    if args.config and args.preset:
        raise ValueError("give either --config or --preset, not both")
    if args.config:
        cfg = ExperimentConfig.load(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        raise ValueError("an experiment needs --config or --preset")
    return cfg.with_overrides(seed=args.seed, samples=args.samples, output_dir=args.out)


def _formats(args, default):
    return args.format or default


def cmd_simulate(args) -> int:
    from .harness.experiment import run_experiment
    from .harness.report import emit, evaluate_checks

    cfg = _load_config(args)
    result = run_experiment(cfg, jobs=args.jobs, resume=args.resume, out_dir=cfg.output_dir)
    result.checks = evaluate_checks(result)
    for path in emit(result, _formats(args, ["csv", "json"]), cfg.output_dir):
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_compare(args) -> int:
    from .harness.experiment import attach_fits, run_experiment
    from .harness.report import all_passed, emit, evaluate_checks, read_results_csv

    if args.results:
        result = attach_fits(read_results_csv(Path(args.results) / "results.csv"))
        out_dir = args.out or args.results
    else:
        cfg = _load_config(args)
        result = run_experiment(cfg, jobs=args.jobs, resume=args.resume, out_dir=cfg.output_dir)
        out_dir = cfg.output_dir
    result.checks = evaluate_checks(result, tuple(args.slope_range), args.n_sigma)
    emit(result, _formats(args, ["json", "svg"]), out_dir, stem="compare")
    for name, c in result.checks.items():
        print(f"{'PASS' if c['passed'] else 'FAIL'} {name}: {c['value']}")
    if not all_passed(result.checks):
        raise CheckFailed("one or more comparison checks failed")
    return EXIT_OK


# classify -----------------------------------------------------------------

def _boundary(args, n: int):
    if args.z_star is not None:
        if args.p_a is None or args.p_b is None:
            raise ValueError("--z-star needs --p-a and --p-b")
        return args.z_star, args.p_a, args.p_b
    b = dist.probability_gap(n, _depth_values(args, n))
    p_a = b.p_clean if args.p_a is None else args.p_a
    p_b = b.p_spoof if args.p_b is None else args.p_b
    return b.z_star, p_a, p_b


def _live_scores(source: str, n: int, args, rng) -> np.ndarray:
    if source in ("model-clean", "model-spoof"):
        a = _depth_values(args, n)
        params = an.DepthNoiseParams(n, a, 1.0 if source == "model-clean" else 0.0)
        return dist.sample_scores(params, args.m, rng)
    from .samplers import SamplerSpec, sample

    spec = SamplerSpec(source, gamma=args.gamma, block_size=args.block_size)
    return np.array([sample(spec, n, args.depth, args.topology, rng).z for _ in range(args.m)])


def cmd_classify(args) -> int:
    from .harness.seeding import job_generator

    extra = {}
    if args.scores:
        from .harness.experiment import load_samples

        rows = load_samples(args.scores)
        if args.sampler:
            rows = [r for r in rows if r["sampler"] == args.sampler]
        if args.n is not None:
            rows = [r for r in rows if r["n"] == args.n]
        if not rows:
            raise ValueError("no sample rows to classify")
        ns = {r["n"] for r in rows}
        if len(ns) != 1:
            raise ValueError(f"sample stream mixes system sizes {sorted(ns)}; filter with --sampler or --n")
        n = ns.pop()
        scores = np.array([r["z"] for r in rows])
        if args.m is not None:
            scores = scores[: args.m]
    else:
        if args.n is None or args.m is None or not args.live:
            raise ValueError("classify needs --scores FILE, or --live A B with --n and --m")
        n = args.n
        rng = job_generator(args.seed or 0, 0)
        truth = "A" if rng.random() < 0.5 else "B"
        source = args.live[0] if truth == "A" else args.live[1]
        scores = _live_scores(source, n, args, rng)
        extra = {"truth": truth, "source": source}
    z_star, p_a, p_b = _boundary(args, n)
    decision = hog.classify(scores, z_star, p_a, p_b)
    doc = decision.to_dict() | {"z_star": z_star, "p_a": p_a, "p_b": p_b} | extra
    _write_text(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


# spoof --------------------------------------------------------------------

def cmd_spoof(args) -> int:
    from .circuits.circuit import draw_circuit
    from .circuits.statevector import apply_gates, zero_state
    from .circuits.xgamma import SAMPLE_COLUMNS, make_record
    from .harness.seeding import job_generator
    from .samplers import default_depth_boost, partition_qubits, sample_block_product, spoof_circuit

    seed = args.seed or 0
    rng = job_generator(seed, 0)
    circuit_seed, aux_seed = (int(v) for v in rng.integers(0, 2 ** 63, size=2))
    u_circ = draw_circuit(args.n, args.depth, args.topology, np.random.default_rng(circuit_seed), seed=circuit_seed)
    partition = partition_qubits(args.n, args.block_size)
    boost = args.depth_boost or default_depth_boost(args.n, max(partition.sizes), args.depth)
    aux = np.random.default_rng(aux_seed)
    v_circ = spoof_circuit(u_circ, partition, boost, aux)
    out = Path(args.out or "spoof")
    out.mkdir(parents=True, exist_ok=True)
    (out / "circuit.json").write_text(u_circ.to_json() + "\n")
    (out / "spoofed.json").write_text(v_circ.to_json() + "\n")
    psi = apply_gates(zero_state(args.n), u_circ)
    tag = f"spoofer-M{max(partition.sizes)}"
    with open(out / "samples.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SAMPLE_COLUMNS)
        for _ in range(args.samples):
            x = sample_block_product(v_circ, partition, aux.random())
            w.writerow(make_record(tag, args.n, args.depth, 0.0, circuit_seed, aux_seed, x, psi[x]).row())
    log.info("wrote %s", out)
    return EXIT_OK


# parser -------------------------------------------------------------------

def _add_depth_args(p) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--a", type=float, help="depth parameter a")
    g.add_argument("--c", type=float, help="depth exponent c, a = n**-c")
    g.add_argument("--slope", type=float, help="fitted slope; a from inverting the entropy")


def _add_experiment_args(p) -> None:
    p.add_argument("--config", help="YAML/JSON experiment config")
    p.add_argument("--preset", help="named preset, e.g. appendixA-alltoall-d6")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int, help="override samples per grid point")
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--format", action="append", choices=["csv", "json", "svg"])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shallowxeb", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="tabulate closed-form predictions")
    p.add_argument("quantity", choices=["logxeb", "linear", "moment", "threshold", "ztable", "slope"])
    p.add_argument("--n", type=int, nargs="+", default=[])
    _add_depth_args(p)
    sg = p.add_mutually_exclusive_group()
    sg.add_argument("--s", type=float, help="noise signal s")
    sg.add_argument("--r", type=float, help="noise exponent r, s = a**r")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--slope-values", type=float, nargs="+", default=[])
    p.add_argument("--overlay-a", type=float, nargs="+", help="a values for the svg overlay")
    p.add_argument("--c-values", type=float, nargs="+", help="c values for the svg gap plot")
    p.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("simulate", help="run a sampling experiment")
    _add_experiment_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="fit and check an experiment against the analytic trends")
    _add_experiment_args(p)
    p.add_argument("--results", help="directory holding results.csv from a previous run")
    p.add_argument("--slope-range", type=float, nargs=2, default=[0.67, 0.70])
    p.add_argument("--n-sigma", type=float, default=2.0)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("classify", help="heavy-output decision on a score stream")
    p.add_argument("--scores", help="sample CSV to classify")
    p.add_argument("--sampler", help="only use rows with this sampler tag")
    p.add_argument("--live", nargs=2, metavar=("A", "B"),
                   help="sources for coins A and B: clean, noisy, uniform, spoofer, model-clean, model-spoof")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--depth", type=int, default=7)
    p.add_argument("--topology", default="all_to_all")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--block-size", type=int)
    _add_depth_args(p)
    p.add_argument("--z-star", type=float)
    p.add_argument("--p-a", type=float)
    p.add_argument("--p-b", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("spoof", help="emit a block-spoofed circuit and its samples")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--topology", default="all_to_all")
    p.add_argument("--block-size", type=int)
    p.add_argument("--depth-boost", type=int)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spoof)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except CheckFailed as exc:
        print(f"shallowxeb: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except Exception as exc:  # noqa: BLE001 - mapped to the error exit status
        if args.verbose:
            raise
        print(f"shallowxeb: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
