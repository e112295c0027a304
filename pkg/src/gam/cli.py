"""
Command-line front end.

    gam gen --scheme gb-hr --n 1024 --out c.json
    gam mi --const c.json --snr-db 20 --method mc --kmc 100000 --seed 7
    gam ser --scheme disc --n 256 --snr-db 0:2:30 --analytic --mc --seed 1
    gam optimize --formulation g2 --n 256 --snr-db 33 --out g2.json
    gam sweep --schemes gb-hr,qam --n 64 --snr-db 0:1:30 --csv sweep.csv
    gam tables --table 1

Exit codes: 0 success, 2 usage or precondition error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from . import __version__
from .constellation import (ConstellationError, constellation_mean, entropy_bits,
                            load_json, papr_db, save_json)
from .metrics import (AwgnChannel, QuadratureError, db_to_linear, mi_monte_carlo,
                      mi_quadrature, ser_disc_analytic, ser_gb_analytic,
                      ser_monte_carlo)
from .optimize import OptimizationProblem, optimize
from .schemes import SCHEMES, generate
from .tables import TABLES, run_table

log = logging.getLogger("gam")

CSV_FIELDS = ["snr_db", "scheme", "n_points", "mi_bits", "mi_stderr", "method",
              "entropy_bits", "papr_db", "ser", "ser_stderr", "seed", "k_mc"]

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


# -- helpers -------------------------------------------------------------------

def parse_snr_list(text: str) -> List[float]:
    """``"12.5"``, ``"0,3,6"`` or ``"start:step:stop"`` (stop inclusive)."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(v) for v in text.split(":")]
            if len(parts) != 3:
                raise ValueError
            start, step, stop = parts
            if not step > 0 or start > stop:
                raise UsageError(f"bad SNR range {text!r}: need step > 0 and start <= stop")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + k * step, 10) for k in range(count)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse SNR specification {text!r}") from None


def _fmt(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, float):
        return repr(float(x))
    return str(x)


def _row(**kw) -> dict:
    return {k: _fmt(kw.get(k)) for k in CSV_FIELDS}


def _row_key(row: dict) -> tuple:
    return (row["scheme"], row["n_points"], f"{float(row['snr_db']):.6f}",
            row["method"], row["seed"])


def _append_rows(path: Optional[str], rows: Iterable[dict], out=None) -> None:
    rows = list(rows)
    if path:
        p = Path(path)
        new = not p.exists() or p.stat().st_size == 0
        with p.open("a", newline="") as fh:
            w = csv.DictWriter(fh, CSV_FIELDS, lineterminator="\n")
            if new:
                w.writeheader()
            w.writerows(rows)
    if out is not None:
        w = csv.DictWriter(out, CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def _read_rows(path: str) -> List[dict]:
    p = Path(path)
    if not p.exists() or p.stat().st_size == 0:
        return []
    with p.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_FIELDS:
            raise UsageError(f"{path}: header does not match the results schema")
        return list(reader)


def _require_seed(args) -> None:
    if getattr(args, "seed", None) is None:
        raise UsageError("--seed is required for Monte-Carlo methods")


def _summary(c) -> str:
    return (f"N={c.n_points} entropy={entropy_bits(c):.6f} bits "
            f"PAPR={papr_db(c):.4f} dB |mean|={abs(constellation_mean(c)):.6g}")


def _mi_row(c, snr_db, method, tol, k_mc, seed, scheme=None):
    ch = AwgnChannel.for_constellation(c, db_to_linear(snr_db))
    if method == "quad":
        est = mi_quadrature(c, ch, tol=tol)
        seed, k_mc = "", ""
    else:
        est = mi_monte_carlo(c, ch, k_mc, seed)
    return _row(snr_db=float(snr_db), scheme=scheme or c.scheme, n_points=c.n_points,
                mi_bits=est.bits, mi_stderr=est.std_err_bits,
                method="quadrature" if method == "quad" else "monte_carlo",
                entropy_bits=entropy_bits(c), papr_db=papr_db(c),
                seed=seed, k_mc=k_mc)


# -- subcommands ---------------------------------------------------------------

def cmd_gen(args) -> int:
    c = generate(args.scheme, args.n, n_low=args.n_low, n_high=args.n_high,
                 entropy_bits=args.entropy_bits, xi=args.xi, power=args.power)
    if args.out:
        save_json(c, args.out)
    print(_summary(c))
    return 0


def cmd_mi(args) -> int:
    c = load_json(args.const)
    if args.method == "mc":
        _require_seed(args)
    rows = [_mi_row(c, s, args.method, args.tol, args.kmc, args.seed)
            for s in parse_snr_list(args.snr_db)]
    for r in rows:
        print(f"snr_db={r['snr_db']} mi_bits={float(r['mi_bits']):.6f} "
              f"stderr={float(r['mi_stderr']):.3g}")
    if args.csv:
        _append_rows(args.csv, rows)
    return 0


def _ser_constellation(args):
    if args.const:
        return load_json(args.const)
    if not args.scheme:
        raise UsageError("give --const or --scheme")
    return generate(args.scheme, args.n, power=1.0)


def cmd_ser(args) -> int:
    if not (args.analytic or args.mc):
        args.analytic = args.mc = True
    if args.mc:
        _require_seed(args)
    c = _ser_constellation(args)
    kind = args.scheme or ""
    rows = []
    for s_db in parse_snr_list(args.snr_db):
        snr = db_to_linear(s_db)
        common = dict(snr_db=float(s_db), scheme=kind or c.scheme, n_points=c.n_points,
                      entropy_bits=entropy_bits(c), papr_db=papr_db(c))
        if args.analytic:
            if kind == "disc":
                ser = ser_disc_analytic(c.n_points, snr)
            elif kind == "gb-hr":
                ser = ser_gb_analytic(c.n_points, snr)
            else:
                raise UsageError("--analytic is available for --scheme disc or gb-hr")
            rows.append(_row(method="analytic", ser=ser, ser_stderr=0.0, **common))
        if args.mc:
            ch = AwgnChannel.for_constellation(c, snr)
            ser, se = ser_monte_carlo(c, ch, args.kmc, args.seed)
            rows.append(_row(method="monte_carlo", ser=ser, ser_stderr=se,
                             seed=args.seed, k_mc=args.kmc, **common))
    _append_rows(args.csv, rows, out=None if args.csv else sys.stdout)
    return 0


def _problem_from_args(args) -> OptimizationProblem:
    cfg = {}
    if args.config:
        cfg.update(json.loads(Path(args.config).read_text()))
    flags = {
        "formulation": args.formulation,
        "n_points": args.n,
        "snr_db": args.snr_db,
        "poly_degree": args.poly_order,
        "tol": args.tol,
        "k_mc": args.kmc,
        "seed": args.seed,
        "n_starts": args.starts,
        "max_iters": args.max_iters,
        "gradient": args.gradient,
    }
    if args.method is not None:
        flags["mi_method"] = "quadrature" if args.method == "quad" else "monte_carlo"
    if args.papr_cap_db is not None:
        flags["papr_cap"] = db_to_linear(args.papr_cap_db)
    if args.decreasing_probs:
        flags["decreasing_probs"] = True
    for k, v in flags.items():
        if v is not None:
            if k == "snr_db":
                cfg.pop("snr", None)
            cfg[k] = v
    snr = cfg.pop("snr", None)
    if "snr_db" not in cfg and snr is None:
        raise UsageError("--snr-db is required")
    if "snr_db" in cfg:
        snr = db_to_linear(float(cfg.pop("snr_db")))
    cfg.setdefault("noise_var", 1.0 / snr)
    cfg["snr"] = snr
    if cfg.get("mi_method") == "monte_carlo" and cfg.get("seed") is None:
        raise UsageError("--seed is required for Monte-Carlo methods")
    for need in ("formulation", "n_points"):
        if need not in cfg:
            raise UsageError(f"--{need.replace('_points', '').replace('_', '-')} is required")
    return OptimizationProblem.from_config(cfg)


def cmd_optimize(args) -> int:
    try:
        problem = _problem_from_args(args)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    res = optimize(problem)
    if args.out:
        save_json(res.constellation, args.out)
    diag = res.diagnostics()
    if args.diag:
        Path(args.diag).write_text(json.dumps(diag, indent=1) + "\n")
    print(f"{problem.formulation} N={problem.n_points} "
          f"snr_db={10 * math.log10(problem.snr):.4f} mi_bits={res.mi_bits:.6f} "
          f"iterations={res.iterations} converged={res.converged}")
    return 0


def _sweep_cells(schemes, ns, snrs):
    for scheme in schemes:
        for n in ns:
            for s in snrs:
                yield scheme, n, s


def cmd_sweep(args) -> int:
    cfg = {}
    if args.config:
        cfg.update(json.loads(Path(args.config).read_text()))
    schemes = args.schemes.split(",") if args.schemes else cfg.get("schemes")
    ns = ([int(v) for v in args.n.split(",")] if args.n else cfg.get("n_points"))
    if args.snr_db:
        snrs = parse_snr_list(args.snr_db)
    elif "snr_db_start" in cfg:
        snrs = parse_snr_list(f"{cfg['snr_db_start']}:{cfg['snr_db_step']}:"
                              f"{cfg['snr_db_stop']}")
    else:
        snrs = None
    if not schemes or not ns or not snrs:
        raise UsageError("sweep needs schemes, n values and an SNR range")
    method = args.method or cfg.get("method", "quad")
    tol = args.tol if args.tol is not None else cfg.get("tol", 1e-4)
    k_mc = args.kmc if args.kmc is not None else cfg.get("k_mc", 100000)
    seed = args.seed if args.seed is not None else cfg.get("seed")
    if method == "mc" and seed is None:
        raise UsageError("--seed is required for Monte-Carlo methods")
    for s in schemes:
        if s not in SCHEMES:
            raise UsageError(f"unknown scheme {s!r}")
    done = {_row_key(r) for r in _read_rows(args.csv)}
    method_name = "quadrature" if method == "quad" else "monte_carlo"
    seed_txt = "" if method == "quad" else str(seed)
    count = 0
    for scheme, n, s_db in _sweep_cells(schemes, ns, snrs):
        key = (scheme, str(n), f"{float(s_db):.6f}", method_name, seed_txt)
        if key in done:
            continue
        c = generate(scheme, n, power=1.0)
        row = _mi_row(c, s_db, method, tol, k_mc, seed, scheme=scheme)
        _append_rows(args.csv, [row])
        count += 1
        log.info("sweep %s N=%d %.2f dB -> %s bits", scheme, n, s_db, row["mi_bits"])
    print(f"{count} new rows written to {args.csv}")
    return 0


def cmd_tables(args) -> int:
    cols = None
    if args.columns:
        cols = tuple(c.strip().upper() for c in args.columns.split(","))
        unknown = set(cols) - set(TABLES[args.table]["columns"])
        if unknown:
            raise UsageError(f"table {args.table} has no column(s) {sorted(unknown)}")
    report = run_table(args.table, n_starts=args.starts, columns=cols)
    print(report.format())
    if args.csv:
        report.to_csv(args.csv)
    return 0


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gam", description="Golden angle modulation toolkit")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a constellation")
    g.add_argument("--scheme", required=True, choices=SCHEMES)
    g.add_argument("--n", type=int)
    g.add_argument("--n-low", type=int)
    g.add_argument("--n-high", type=int)
    g.add_argument("--entropy-bits", type=float)
    g.add_argument("--xi", type=float)
    g.add_argument("--power", type=float, default=1.0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    m = sub.add_parser("mi", help="mutual information of a constellation file")
    m.add_argument("--const", required=True)
    m.add_argument("--snr-db", required=True)
    m.add_argument("--method", choices=("quad", "mc"), default="quad")
    m.add_argument("--tol", type=float, default=1e-4)
    m.add_argument("--kmc", type=int, default=100000)
    m.add_argument("--seed", type=int)
    m.add_argument("--csv")
    m.set_defaults(func=cmd_mi)

    s = sub.add_parser("ser", help="analytic and simulated symbol error rate")
    s.add_argument("--scheme", choices=SCHEMES)
    s.add_argument("--const")
    s.add_argument("--n", type=int)
    s.add_argument("--snr-db", required=True)
    s.add_argument("--analytic", action="store_true")
    s.add_argument("--mc", action="store_true")
    s.add_argument("--kmc", type=int, default=100000)
    s.add_argument("--seed", type=int)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_ser)

    o = sub.add_parser("optimize", help="MI-optimize a constellation")
    o.add_argument("--formulation", type=str.upper,
                   choices=("G1", "G2", "P1", "P2", "GP1"))
    o.add_argument("--config")
    o.add_argument("--n", type=int)
    o.add_argument("--snr-db", type=float)
    o.add_argument("--poly-order", type=int)
    o.add_argument("--papr-cap-db", type=float)
    o.add_argument("--method", choices=("quad", "mc"))
    o.add_argument("--tol", type=float)
    o.add_argument("--kmc", type=int)
    o.add_argument("--seed", type=int)
    o.add_argument("--starts", type=int)
    o.add_argument("--max-iters", type=int)
    o.add_argument("--gradient", choices=("fd", "analytic"))
    o.add_argument("--decreasing-probs", action="store_true")
    o.add_argument("--out")
    o.add_argument("--diag")
    o.set_defaults(func=cmd_optimize)

    w = sub.add_parser("sweep", help="MI over an SNR grid, resumable CSV")
    w.add_argument("--config")
    w.add_argument("--schemes")
    w.add_argument("--n")
    w.add_argument("--snr-db")
    w.add_argument("--method", choices=("quad", "mc"))
    w.add_argument("--tol", type=float)
    w.add_argument("--kmc", type=int)
    w.add_argument("--seed", type=int)
    w.add_argument("--csv", required=True)
    w.set_defaults(func=cmd_sweep)

    t = sub.add_parser("tables", help="reproduce the published MI tables")
    t.add_argument("--table", type=int, choices=sorted(TABLES), required=True)
    t.add_argument("--starts", type=int, default=3)
    t.add_argument("--columns", help="comma-separated subset, e.g. HR or HR,G2")
    t.add_argument("--csv")
    t.set_defaults(func=cmd_tables)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConstellationError, FileNotFoundError) as exc:
        print(f"gam {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"gam {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"gam {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
