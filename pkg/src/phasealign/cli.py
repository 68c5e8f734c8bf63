"""Command-line front end.

Subcommands: simulate (one K, trial rows), scaling (K grid plus aggregate
table and optional figures), verify (empirical bound checks), ssa
(single-instance strategy optimization, JSON output), plot (aggregate CSV
to a deterministic SVG chart).

Exit codes: 0 success, 1 I/O failure, 2 usage or validation failure,
3 bound violated. Option values resolve in the order defaults < --preset
< --config file < explicit flags. All file outputs are byte-deterministic
for fixed inputs; stdout summaries are informational.
"""

import argparse
import json
import math
import os
import sys

from .bounds import (
    verify_color_bound,
    verify_direction_continuity,
    verify_edge_probability,
    verify_power_reduction,
    verify_tail_bound,
)
from .experiments import (
    COLOR_ORDERS,
    CSVFormatError,
    DEFAULT_K_LIST,
    DEFAULT_THRESHOLD_C,
    DEFAULT_TRIALS,
    ExperimentConfig,
    PAPER_K_LIST,
    PAPER_TRIALS,
    aggregate,
    read_aggregates,
    run_sweep,
    write_aggregates,
    write_bound_results,
    write_rows,
)
from .report import SVG_ENVELOPES, render_figures, write_svg
from .ssa import ASCENT_K_LIMIT, GRID_K_LIMIT, optimize_ssa
from .channel import LN2, sample_channel

CLI_SCHEMES = ("phase-align", "tdma-peak", "tdma-bursty", "tin", "ssa-ascent")
DEFAULT_SCHEMES = ("phase-align", "tdma-peak", "tdma-bursty", "tin")

PRESETS = ("paper",)
PAPER_PRESET = {
    "threshold_c": repr(math.pi),  # round-trips to pi exactly
    "trials": str(PAPER_TRIALS),
    "k_list": ",".join(str(k) for k in PAPER_K_LIST),
}

VERIFY_DEFAULTS = {
    "edge-prob": {"k": 4096, "trials": 100, "threshold_c": 0.5},
    "1": {"k": 2**15, "trials": 10, "threshold_c": math.pi},
    "2": {"k": 10, "trials": 500},
    "3": {"s": 8, "r": 64.0, "trials": 100_000},
    "4": {"s": 8, "trials": 10_000},
}


def _scheme_internal(name: str) -> str:
    return name.replace("-", "_")


def _parse_k_list(text: str):
    try:
        return tuple(int(tok) for tok in text.split(",") if tok != "")
    except ValueError:
        raise ValueError(f"--k-list: cannot parse '{text}' as comma-separated integers") from None


def _parse_scheme_list(text: str):
    names = tuple(tok for tok in text.split(",") if tok != "")
    for n in names:
        if n not in CLI_SCHEMES:
            raise ValueError(f"--schemes: unknown scheme '{n}' (choose from {CLI_SCHEMES})")
    return names


def _read_config_file(path, allowed):
    """key=value lines; keys mirror long flag names without leading dashes."""
    values = {}
    with open(path) as fh:
        for i, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line == "" or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"--config {path} line {i}: expected key=value")
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            dest = key.replace("-", "_")
            if dest not in allowed:
                raise ValueError(
                    f"--config {path} line {i}: unknown key '{key}' "
                    f"(allowed: {', '.join(sorted(k.replace('_', '-') for k in allowed))})")
            values[dest] = val
    return values


def _resolve(args, spec):
    """Layer flag values over config file, preset, then defaults.

    spec maps dest -> (converter, default). Explicit flags win because the
    parser leaves them None when absent.
    """
    preset_values = {}
    if getattr(args, "preset", None) == "paper":
        preset_values = {k: v for k, v in PAPER_PRESET.items() if k in spec}
    config_values = {}
    if getattr(args, "config", None):
        config_values = _read_config_file(args.config, set(spec))
    out = {}
    for dest, (conv, default) in spec.items():
        flag_val = getattr(args, dest, None)
        if flag_val is not None:
            out[dest] = flag_val if not isinstance(flag_val, str) else conv(flag_val)
        elif dest in config_values:
            out[dest] = conv(config_values[dest])
        elif dest in preset_values:
            out[dest] = conv(preset_values[dest])
        else:
            out[dest] = default
    return out


def _threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        return max(1, args.threads)
    env = os.environ.get("PHASEALIGN_THREADS", "")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"PHASEALIGN_THREADS: cannot parse '{env}' as an integer") from None
    return 1


def _rate_str(nats: float, bits: bool) -> str:
    if bits:
        return f"{nats / LN2:.6g} bits"
    return f"{nats:.6g} nats"


def _print_summary(rows, bits):
    by_scheme = {}
    for r in rows:
        if math.isfinite(r.sum_rate_nats):
            by_scheme.setdefault((r.scheme, r.k), []).append(r.sum_rate_nats)
    for (scheme, k), vals in sorted(by_scheme.items()):
        mean = sum(vals) / len(vals)
        print(f"{scheme} K={k}: mean sum rate {_rate_str(mean, bits)} over {len(vals)} trials")
    bad = sum(1 for r in rows if not math.isfinite(r.sum_rate_nats))
    if bad:
        print(f"warning: {bad} rows failed and were recorded as nan", file=sys.stderr)


# ------------------------------------------------------------ subcommands


def _common_sweep_flags(p, k_list: bool):
    if k_list:
        p.add_argument("--k-list", dest="k_list",
                       help=f"comma-separated user counts (default "
                            f"{','.join(str(k) for k in DEFAULT_K_LIST)})")
        p.add_argument("--schemes",
                       help="comma-separated scheme list (default "
                            + ",".join(DEFAULT_SCHEMES) + ")")
    else:
        p.add_argument("--k", type=int, help="user count (required)")
        p.add_argument("--scheme", action="append", choices=CLI_SCHEMES,
                       help="scheme to evaluate; repeatable (default all but ssa-ascent)")
    p.add_argument("--trials", type=int, help=f"trials per K (default {DEFAULT_TRIALS})")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--threshold-c", dest="threshold_c", type=float,
                   help=f"alignment threshold constant c (default {DEFAULT_THRESHOLD_C})")
    p.add_argument("--metric", choices=("sinr", "bpsk"),
                   help="per-user rate metric (default sinr)")
    p.add_argument("--ssa-restarts", dest="ssa_restarts", type=int,
                   help="restarts for the ssa-ascent scheme (default 32)")
    p.add_argument("--color-order", dest="color_order", choices=COLOR_ORDERS,
                   help="greedy coloring order: default (index) or random (seeded)")
    p.add_argument("--preset", choices=PRESETS,
                   help="named preset; 'paper' sets c=pi, K={16384,32768}, trials=10")
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--threads", type=int,
                   help="worker processes (default $PHASEALIGN_THREADS or 1)")
    p.add_argument("--timings", action="store_true",
                   help="write per-row runtimes (breaks byte-identical reruns)")
    p.add_argument("--bits", action="store_true",
                   help="print stdout summaries in bits instead of nats")


def _build_config(vals, schemes, k_list):
    return ExperimentConfig(
        k_list=k_list,
        trials=vals["trials"],
        master_seed=vals["seed"],
        threshold_constant=vals["threshold_c"],
        schemes=tuple(_scheme_internal(s) for s in schemes),
        metric=vals["metric"],
        ssa_restarts=vals["ssa_restarts"],
        color_order=vals["color_order"],
    )


_SIM_SPEC = {
    "trials": (int, DEFAULT_TRIALS),
    "seed": (int, 0),
    "threshold_c": (float, DEFAULT_THRESHOLD_C),
    "metric": (str, "sinr"),
    "ssa_restarts": (int, 32),
    "color_order": (str, "default"),
}


def cmd_simulate(args) -> int:
    spec = dict(_SIM_SPEC)
    spec["k"] = (int, None)
    spec["scheme"] = (str, None)
    vals = _resolve(args, spec)
    if vals["k"] is None:
        print("error: --k is required", file=sys.stderr)
        return 2
    if isinstance(vals["scheme"], str):
        schemes = _parse_scheme_list(vals["scheme"])
    else:
        schemes = tuple(vals["scheme"]) if vals["scheme"] else DEFAULT_SCHEMES
    cfg = _build_config(vals, schemes, (vals["k"],))
    res = run_sweep(cfg, threads=_threads(args))
    write_rows(args.out, res.rows, include_timings=args.timings)
    if cfg.color_order == "random":
        print("note: randomized (seeded) greedy coloring order in effect")
    _print_summary(res.rows, args.bits)
    print(f"wrote {len(res.rows)} rows to {args.out}")
    return 0


def cmd_scaling(args) -> int:
    spec = dict(_SIM_SPEC)
    spec["k_list"] = (_parse_k_list, DEFAULT_K_LIST)
    spec["schemes"] = (str, None)
    vals = _resolve(args, spec)
    k_list = vals["k_list"]
    if isinstance(k_list, str):
        k_list = _parse_k_list(k_list)
    if isinstance(vals["schemes"], str):
        schemes = _parse_scheme_list(vals["schemes"])
    else:
        schemes = DEFAULT_SCHEMES
    cfg = _build_config(vals, schemes, k_list)
    res = run_sweep(cfg, threads=_threads(args))
    write_rows(args.out, res.rows, include_timings=args.timings)
    aggs = aggregate(res.rows)
    if args.aggregate_out:
        write_aggregates(args.aggregate_out, aggs)
    if args.figures_dir:
        for path in render_figures(aggs, args.figures_dir):
            print(f"wrote figure {path}")
    if cfg.color_order == "random":
        print("note: randomized (seeded) greedy coloring order in effect")
    _print_summary(res.rows, args.bits)
    print(f"wrote {len(res.rows)} rows to {args.out}"
          + (f" and {len(aggs)} aggregates to {args.aggregate_out}"
             if args.aggregate_out else ""))
    return 0


def _format_result(r) -> str:
    status = "pass" if r.passed else "FAIL"
    line = (f"{r.bound_name}: k={r.k} s={r.s} trials={r.trials} "
            f"empirical={r.empirical:.6g} analytic={r.analytic:.6g} "
            f"std_error={r.std_error:.3g} -> {status}")
    if not r.applicable:
        line += " [inapplicable]"
    if r.note:
        line += f" [{r.note}]"
    return line


def cmd_verify(args) -> int:
    lemma = args.lemma
    defaults = VERIFY_DEFAULTS[lemma]
    spec = {
        "k": (int, defaults.get("k", 0)),
        "s": (int, defaults.get("s", 0)),
        "r": (float, defaults.get("r", 0.0)),
        "trials": (int, defaults["trials"]),
        "seed": (int, 0),
        "threshold_c": (float, defaults.get("threshold_c", math.pi)),
    }
    vals = _resolve(args, spec)
    results = []
    if lemma == "edge-prob":
        results.append(verify_edge_probability(vals["k"], vals["threshold_c"],
                                               vals["trials"], vals["seed"]))
    elif lemma == "1":
        res = verify_color_bound(vals["k"], vals["trials"], vals["seed"],
                                 vals["threshold_c"])
        if not res.applicable:
            print(f"warning: color bound is vacuous at K={vals['k']}; "
                  f"nothing to check", file=sys.stderr)
        results.append(res)
    elif lemma == "2":
        results.append(verify_power_reduction(vals["trials"], vals["seed"],
                                              k_max=vals["k"]))
    elif lemma == "3":
        results.append(verify_tail_bound(vals["s"], vals["r"], vals["trials"],
                                         vals["seed"]))
    elif lemma == "4":
        results.extend(verify_direction_continuity(vals["s"], vals["trials"],
                                                   vals["seed"]))
    for r in results:
        print(_format_result(r))
    if args.out:
        write_bound_results(args.out, results)
    failing = [r for r in results if not r.passed]
    if failing:
        for r in failing:
            print(f"bound violated: {_format_result(r)}", file=sys.stderr)
        return 3
    return 0


def cmd_ssa(args) -> int:
    spec = {
        "k": (int, None),
        "seed": (int, 0),
        "mode": (str, "ascent"),
        "restarts": (int, 32),
    }
    vals = _resolve(args, spec)
    if vals["k"] is None:
        print("error: --k is required", file=sys.stderr)
        return 2
    mode = vals["mode"]
    if mode not in ("grid", "ascent"):
        print(f"error: --mode must be 'grid' or 'ascent', got '{mode}'", file=sys.stderr)
        return 2
    k = vals["k"]
    cap = GRID_K_LIMIT if mode == "grid" else ASCENT_K_LIMIT
    if k < 1 or k > cap:
        print(f"error: --k {k} outside 1..{cap} for --mode {mode}", file=sys.stderr)
        return 2
    ch = sample_channel(k, vals["seed"])
    sol = optimize_ssa(ch, mode=mode, restarts=vals["restarts"], seed=vals["seed"])
    payload = {
        "k": k,
        "mode": mode,
        "seed": vals["seed"],
        "value_nats": sol.value,
        "subset": [i + 1 for i in sol.subset],  # 1-based user numbering
        "tx_dir": [float(x) for x in sol.point.tx_dir],
        "rx_dir": [float(x) for x in sol.point.rx_dir],
    }
    if mode == "ascent":
        payload["restarts"] = vals["restarts"]
        payload["iterations"] = sol.iterations
        payload["restart_index"] = sol.restart_index
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"value {_rate_str(sol.value, args.bits)}, subset {payload['subset']}; "
              f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_plot(args) -> int:
    aggs = read_aggregates(args.infile)
    write_svg(args.out, aggs, args.envelope)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasealign",
        description="Interference phase-alignment scheduling experiments: "
                    "simulate schemes, verify analytic bounds, optimize "
                    "single-symbol strategies, and plot scaling curves.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="trial rows at a single user count")
    _common_sweep_flags(p_sim, k_list=False)
    p_sim.add_argument("--out", required=True, help="output CSV path (required)")
    p_sim.set_defaults(func=cmd_simulate)

    p_sc = sub.add_parser("scaling", help="sweep a K grid and aggregate")
    _common_sweep_flags(p_sc, k_list=True)
    p_sc.add_argument("--out", required=True, help="trial rows CSV path (required)")
    p_sc.add_argument("--aggregate-out", dest="aggregate_out",
                      help="aggregate CSV path (optional)")
    p_sc.add_argument("--figures-dir", dest="figures_dir",
                      help="directory for PNG figures (optional)")
    p_sc.set_defaults(func=cmd_scaling)

    p_ver = sub.add_parser("verify", help="empirical checks of analytic bounds")
    p_ver.add_argument("--lemma", required=True,
                       choices=("1", "2", "3", "4", "edge-prob"),
                       help="which bound to check: 1 color count, 2 power "
                            "reduction, 3 sum-rate tail, 4 direction "
                            "continuity, edge-prob edge probability")
    p_ver.add_argument("--k", type=int, help="user count (lemmas 1, 2, edge-prob)")
    p_ver.add_argument("--s", type=int, help="active-set size (lemmas 3, 4; default 8)")
    p_ver.add_argument("--r", type=float, help="rate threshold in nats (lemma 3; default 64)")
    p_ver.add_argument("--trials", type=int, help="Monte Carlo trials (per-lemma default)")
    p_ver.add_argument("--seed", type=int, help="master seed (default 0)")
    p_ver.add_argument("--threshold-c", dest="threshold_c", type=float,
                       help="threshold constant (lemma 1 and edge-prob)")
    p_ver.add_argument("--config", help="key=value config file; flags override it")
    p_ver.add_argument("--out", help="BoundCheckResult CSV path (optional)")
    p_ver.set_defaults(func=cmd_verify)

    p_ssa = sub.add_parser("ssa", help="optimize one single-symbol instance")
    p_ssa.add_argument("--k", type=int, help="user count (required)")
    p_ssa.add_argument("--seed", type=int, help="channel and restart seed (default 0)")
    p_ssa.add_argument("--mode", choices=("grid", "ascent"),
                       help="grid (exhaustive, K<=3) or ascent (K<=64; default)")
    p_ssa.add_argument("--restarts", type=int, help="ascent restarts (default 32)")
    p_ssa.add_argument("--config", help="key=value config file; flags override it")
    p_ssa.add_argument("--out", help="JSON output path (default: stdout)")
    p_ssa.add_argument("--bits", action="store_true",
                       help="print the summary value in bits")
    p_ssa.set_defaults(func=cmd_ssa)

    p_plot = sub.add_parser("plot", help="render an aggregate CSV to SVG")
    p_plot.add_argument("--in", dest="infile", required=True,
                        help="aggregate CSV path (required)")
    p_plot.add_argument("--out", required=True, help="SVG output path (required)")
    p_plot.add_argument("--envelope", choices=SVG_ENVELOPES, default="none",
                        help="optional reference curve (default none)")
    p_plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles --help and usage errors
        code = exc.code
        return int(code) if code is not None else 0
    try:
        return args.func(args)
    except CSVFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run():
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
