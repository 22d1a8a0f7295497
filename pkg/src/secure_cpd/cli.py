"""Command-line entry point: ``secure-cpd <command> ...``.

Exit codes: 0 success, 2 usage or parameter error, 3 no confident change
point, 4 depth budget exceeded, 5 input/output error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .compare import SignApproxParams
from .datagen import DISTS, KINDS, gen_series, load_csv, save_csv
from .dp import DPParams, dp_cpd, relative_error
from .errors import ConfidenceError, DataError, SecureCPDError
from .layout import CHANGE_TYPES, BlockLayout, default_block_size
from .oracle import cpd_plain
from .pipeline import CPDConfig, TimeSeries, cpd, normalize

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_CONFIDENCE, EXIT_DEPTH, EXIT_IO = 0, 2, 3, 4, 5
DEFAULT_EPSILONS = "0.5,1,2,5,10,25,50"
KIND_FOR_TYPE = {"mean": "mean_shift", "variance": "variance_shift", "frequency": "ar1_shift"}

log = logging.getLogger("secure_cpd")


def _bounds(text: str):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError("LO must be below HI")
    return lo, hi


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list:
    return [int(v) for v in _floats(text)]


def _seeds(text: str) -> list:
    """``10`` means seeds 0..9; ``3-7`` an inclusive range; ``1,4,9`` a list."""
    if "," in text:
        return _ints(text)
    if "-" in text:
        a, b = text.split("-", 1)
        return list(range(int(a), int(b) + 1))
    return list(range(int(text)))


def _param(text: str):
    key, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    return key, float(val)


def _emit(payload: dict, fmt: str = "json", stream=None):
    stream = stream or sys.stdout
    if fmt == "json":
        json.dump(payload, stream, indent=2, default=_jsonable)
        stream.write("\n")
        return
    res = payload.get("result", {})
    diag = res.get("diagnostics", {})
    row = {
        "tau_block": res.get("tau_block"),
        "tau_index": res.get("tau_index"),
        "confidence_ok": res.get("confidence_ok"),
        "n_b": diag.get("n_b"),
        "m": diag.get("m"),
        "max_depth": diag.get("max_depth"),
        "mults": diag.get("counters", {}).get("mults"),
        "rotations": diag.get("counters", {}).get("rotations"),
    }
    w = csv.DictWriter(stream, fieldnames=list(row))
    w.writeheader()
    w.writerow(row)


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _load(args, warn_bounds: bool = True) -> TimeSeries:
    column = args.column
    if column is not None and not column.lstrip("-").isdigit():
        args.header = True
    else:
        column = int(column or 0)
    ts = load_csv(args.input, column=column, bounds=args.bounds, header=args.header)
    if warn_bounds and args.bounds is None:
        print("warning: no --bounds given; the data's min/max will be used, "
              "which leaks information about the private series", file=sys.stderr)
    return ts


def _envelope(command: str, args, config: dict, result: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "command": command,
        "input": str(getattr(args, "input", "")),
        "seed": args.seed,
        "config": config,
        "result": result,
    }


# -- commands --------------------------------------------------------------

def cmd_generate(args) -> int:
    params = dict(args.param or [])
    ts = gen_series(args.kind, args.n, args.tau, args.dist, params, args.seed)
    header = "value" if args.header else None
    if args.out == "-":
        save_csv(ts, sys.stdout, header)
    else:
        save_csv(ts, args.out, header)
        log.info("wrote %d points to %s", len(ts), args.out)
    return EXIT_OK


def _cpd_config(args) -> CPDConfig:
    return CPDConfig(
        change_type=args.type,
        block_size=args.block_size,
        sign_params=SignApproxParams(args.df, args.dg),
        depth_budget=args.depth_budget,
        noise_stddev=args.noise_stddev,
        seed=args.seed,
    )


def cmd_detect(args) -> int:
    ts = _load(args)
    cfg = _cpd_config(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = cpd(ts, cfg)
    _emit(_envelope("detect", args, cfg.to_dict(), res.to_dict()), args.out)
    return EXIT_OK if res.confidence_ok else EXIT_CONFIDENCE


def cmd_detect_plain(args) -> int:
    ts = _load(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        norm = normalize(ts)
    m = args.block_size or default_block_size(len(ts))
    tau_block, trace = cpd_plain(norm.values, m, args.type)
    layout = BlockLayout.build(len(ts), m, args.type)
    result = {
        "tau_block": tau_block,
        "tau_index": None if tau_block is None else m * tau_block,
        "confidence_ok": tau_block is not None,
        "diagnostics": {"n_b": layout.n_b, "m": m, "m_last": layout.m_last, "cusum": trace},
    }
    config = {"change_type": args.type, "block_size": m}
    _emit(_envelope("detect-plain", args, config, result), args.out)
    return EXIT_OK if tau_block is not None else EXIT_CONFIDENCE


def cmd_detect_dp(args) -> int:
    # the DP path clips to [-M, M] and never looks at the data range
    ts = _load(args, warn_bounds=False)
    dp = DPParams(args.epsilon, args.delta, args.clip)
    res = dp_cpd(ts, args.block_size, args.type, dp, seed=args.seed)
    config = {"change_type": args.type, "block_size": args.block_size,
              "epsilon": args.epsilon, "delta": dp.delta_for(len(ts)), "clip_M": args.clip}
    _emit(_envelope("detect-dp", args, config, res.to_dict()), args.out)
    return EXIT_OK if res.confidence_ok else EXIT_CONFIDENCE


BENCH_FIELDS = ["n", "m", "n_b", "padded_dim", "change_type", "cipher_mults", "plain_mults",
                "rotations", "additions", "max_depth", "tau_index", "seconds"]


def bench_rows(ns, change_type: str, seed: int = 0, params=SignApproxParams()):
    kind = KIND_FOR_TYPE[change_type]
    for n in ns:
        ts = gen_series(kind, n, seed=seed)
        ts = TimeSeries(ts.values, (float(ts.values.min()), float(ts.values.max())), ts.name)
        t0 = time.perf_counter()
        res = cpd(ts, CPDConfig(change_type=change_type, sign_params=params, seed=seed))
        dt = time.perf_counter() - t0
        d = res.diagnostics
        yield {
            "n": n, "m": d["m"], "n_b": d["n_b"], "padded_dim": d["padded_dim"], "change_type": change_type,
            **{k: d["counters"][k] for k in ("cipher_mults", "plain_mults", "rotations", "additions")},
            "max_depth": d["max_depth"], "tau_index": res.tau_index, "seconds": round(dt, 4),
        }


def cmd_bench(args) -> int:
    out = sys.stdout if args.csv == "-" else open(args.csv, "w", newline="")
    try:
        w = csv.DictWriter(out, fieldnames=BENCH_FIELDS)
        w.writeheader()
        for ct in args.type:
            for row in bench_rows(args.n, ct, args.seed, SignApproxParams(args.df, args.dg)):
                w.writerow(row)
                out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


COMPARE_FIELDS = ["seed", "epsilon", "method", "tau", "tau_hat", "rel_error"]


def compare_trial(job: dict) -> list:
    """Encrypted, plaintext and DP estimates for one seeded series."""
    seed, n, change_type = job["seed"], job["n"], job["change_type"]
    ts = gen_series(job["kind"], n, seed=seed)
    tau = n // 2
    m = job["block_size"] or default_block_size(n)
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = cpd(ts, CPDConfig(change_type=change_type, block_size=m, seed=seed))
        norm = normalize(ts)
    rows.append({"seed": seed, "epsilon": "", "method": "encrypted", "tau": tau,
                 "tau_hat": res.tau_index, "rel_error": relative_error(res.tau_index, tau)})
    tb, _ = cpd_plain(norm.values, m, change_type)
    th = None if tb is None else m * tb
    rows.append({"seed": seed, "epsilon": "", "method": "plaintext", "tau": tau,
                 "tau_hat": th, "rel_error": relative_error(th, tau)})
    for eps in job["epsilons"]:
        r = dp_cpd(ts, m, change_type, DPParams(eps, job["delta"], job["clip"]), seed=seed)
        rows.append({"seed": seed, "epsilon": eps, "method": "local_dp", "tau": tau,
                     "tau_hat": r.tau_index, "rel_error": relative_error(r.tau_index, tau)})
    return rows


def summarize_compare(rows) -> list:
    keys = sorted({(r["method"], r["epsilon"]) for r in rows}, key=lambda k: (k[0], float(k[1] or 0)))
    out = []
    for method, eps in keys:
        errs = [r["rel_error"] for r in rows if r["method"] == method and r["epsilon"] == eps]
        out.append({"method": method, "epsilon": eps, "trials": len(errs), "mean_rel_error": float(np.mean(errs))})
    return out


def _plot_svg(summary, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    dp = [s for s in summary if s["method"] == "local_dp"]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot([s["epsilon"] for s in dp], [s["mean_rel_error"] for s in dp], "o-", label="local DP")
    for s in summary:
        if s["method"] != "local_dp":
            ax.axhline(s["mean_rel_error"], ls="--", lw=1, label=s["method"], color="k" if s["method"] == "encrypted" else "gray")
    ax.set_xscale("log")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("mean relative error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def cmd_compare(args) -> int:
    kind = args.kind or KIND_FOR_TYPE[args.type]
    jobs = [
        {"seed": s, "n": args.n, "kind": kind, "change_type": args.type, "block_size": args.block_size,
         "epsilons": args.epsilons, "delta": args.delta, "clip": args.clip}
        for s in args.seeds
    ]
    if args.workers and args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            chunks = list(pool.map(compare_trial, jobs))
    else:
        chunks = [compare_trial(j) for j in jobs]
    rows = sorted((r for c in chunks for r in c), key=lambda r: (r["seed"], float(r["epsilon"] or 0), r["method"]))
    out = sys.stdout if args.csv == "-" else open(args.csv, "w", newline="")
    try:
        w = csv.DictWriter(out, fieldnames=COMPARE_FIELDS)
        w.writeheader()
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    summary = summarize_compare(rows)
    if args.summary:
        with open(args.summary, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["method", "epsilon", "trials", "mean_rel_error"])
            w.writeheader()
            w.writerows(summary)
    if args.svg:
        _plot_svg(summary, args.svg)
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def _input_args(p):
    p.add_argument("input", type=Path, help="CSV file, one value per row")
    p.add_argument("--column", default=None, help="column index or header name (default 0)")
    p.add_argument("--header", action="store_true", help="skip the first row")
    p.add_argument("--bounds", type=_bounds, default=None, metavar="LO,HI",
                   help="public value range; without it the data min/max is used")
    p.add_argument("--type", choices=CHANGE_TYPES, default="mean")
    p.add_argument("--block-size", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="secure-cpd", description="Change-point detection on an emulated SIMD-encrypted series.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic series with one change")
    p.add_argument("--kind", choices=KINDS, default="mean_shift")
    p.add_argument("--n", type=int, default=40000)
    p.add_argument("--tau", type=int, default=None, help="change index (default n//2)")
    p.add_argument("--dist", choices=DISTS, default="gaussian")
    p.add_argument("--param", type=_param, action="append", metavar="KEY=VALUE",
                   help="e.g. mu2=1, sigma2=2, phi1=0.3 (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--header", action="store_true", help="write a 'value' header row")
    p.add_argument("--out", default="-", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("detect", help="encrypted pipeline")
    _input_args(p)
    p.add_argument("--df", type=int, default=2)
    p.add_argument("--dg", type=int, default=4)
    p.add_argument("--depth-budget", type=int, default=65)
    p.add_argument("--noise-stddev", type=float, default=0.0)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("detect-plain", help="plaintext reference detector")
    _input_args(p)
    p.set_defaults(func=cmd_detect_plain)

    p = sub.add_parser("detect-dp", help="local differential privacy baseline")
    _input_args(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, default=None, help="default 1/n^2")
    p.add_argument("--clip", type=float, default=1.0)
    p.set_defaults(func=cmd_detect_dp)

    p = sub.add_parser("bench", help="op counts, depth and timing over series lengths")
    p.add_argument("--n", type=_ints, default=[1000, 10000, 100000])
    p.add_argument("--type", type=lambda s: s.split(","), default=["frequency"],
                   help="comma-separated change types")
    p.add_argument("--df", type=int, default=2)
    p.add_argument("--dg", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default="-")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("compare", help="encrypted vs plaintext vs local DP error table")
    p.add_argument("--type", choices=CHANGE_TYPES, default="frequency")
    p.add_argument("--kind", choices=KINDS, default=None)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--block-size", type=int, default=None)
    p.add_argument("--seeds", type=_seeds, default=list(range(10)))
    p.add_argument("--epsilons", type=_floats, default=_floats(DEFAULT_EPSILONS))
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--clip", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=0)
    p.add_argument("--seed", type=int, default=0, help="unused; trials are keyed by --seeds")
    p.add_argument("--csv", default="-", help="per-trial rows")
    p.add_argument("--summary", default=None, help="per-method mean error CSV")
    p.add_argument("--svg", default=None, help="plot of the summary (needs matplotlib)")
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "bench":
            for t in args.type:
                if t not in CHANGE_TYPES:
                    ap.error(f"unknown change type {t!r}")
        return args.func(args)
    except ConfidenceError as exc:
        return _fail(exc, EXIT_CONFIDENCE)
    except DataError as exc:
        return _fail(exc, EXIT_IO)
    except SecureCPDError as exc:
        return _fail(exc, exc.exit_code)
    except OSError as exc:
        return _fail(exc, EXIT_IO)


def _fail(exc: Exception, code: int) -> int:
    err = {"schema_version": SCHEMA_VERSION, "error": type(exc).__name__, "message": str(exc), "exit_code": code}
    json.dump(err, sys.stdout)
    sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
