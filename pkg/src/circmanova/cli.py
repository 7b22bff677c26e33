"""Command-line front end.

Exit codes: 0 success, 2 data/config error, 3 numerical failure, 4 usage error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

from . import harness, nulldist, randomn, simgen
from .errors import CircManovaError, ConfigurationError, DataError, NumericError
from .statistic import GroupedSample, lrt_statistic

EXIT_OK, EXIT_DATA, EXIT_NUMERIC, EXIT_USAGE = 0, 2, 3, 4

CONFIG_KEYS = (
    "p", "q", "nk", "dist", "nu", "slant", "alpha_list", "sigma",
    "shift", "reps", "seed", "tests", "format", "lrt_methods",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x: float, raw: bool) -> str:
    return repr(float(x)) if raw else f"{x:.6g}"


# --- dataset ---------------------------------------------------------------------


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_dataset(path: str | Path, delimiter: str = ",") -> tuple[list[str], GroupedSample]:
    """Parse a labelled data file: column 1 = group label, remaining columns numeric.

    Groups are ordered by first appearance of their label.  A first row whose
    value cells are all non-numeric is taken as a header.
    """
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh, delimiter=delimiter) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if rows and len(rows[0]) > 1 and not any(_is_number(c) for c in rows[0][1:]):
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no observations")
    width = len(rows[0])
    if width < 2:
        raise DataError(f"{path}: need a label column and at least one variable")
    groups: dict[str, list[list[float]]] = {}
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DataError(f"{path}: ragged row {lineno} ({len(row)} cells, expected {width})")
        try:
            values = [float(c) for c in row[1:]]
        except ValueError:
            raise DataError(f"{path}: non-numeric cell in row {lineno}") from None
        groups.setdefault(row[0].strip(), []).append(values)
    if len(groups) < 2:
        raise DataError(f"{path}: need at least 2 distinct group labels, found {len(groups)}")
    return list(groups), GroupedSample(list(groups.values()))


# --- config -----------------------------------------------------------------------


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def parse_covariance(text: str, p: int):
    kind, _, args = text.partition(":")
    kind = kind.strip().lower()
    vals = _floats(args) if args.strip() else ()
    if kind == "circular":
        return simgen.Circular(vals)
    if kind == "circular-corr":
        if len(vals) != 2:
            raise ConfigurationError("circular-corr needs two values: lowest,highest correlation")
        return simgen.circular_from_correlations(p, *sorted(vals))
    if kind == "compound":
        return simgen.CompoundSymmetric(*vals)
    if kind == "spherical":
        return simgen.Spherical(vals[0] if vals else 1.0)
    if kind == "diagonal":
        return simgen.Diagonal(vals)
    if kind == "toeplitz":
        return simgen.Toeplitz(*vals)
    raise ConfigurationError(f"unknown sigma kind {kind!r}")


def read_config(path: str | Path) -> dict[str, str]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    out = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigurationError(f"{path}:{lineno}: expected key=value")
        if key not in CONFIG_KEYS:
            raise ConfigurationError(f"unknown config key {key!r} (line {lineno})")
        out[key] = value.strip()
    return out


def build_experiment(conf: dict[str, str], seed: int | None) -> tuple[harness.ExperimentConfig, str]:
    """ExperimentConfig (H0 or H1 per ``shift``) and the output format from a parsed config."""
    try:
        for key in ("p", "nk"):
            if key not in conf:
                raise ConfigurationError(f"config is missing required key {key!r}")
        p = int(conf["p"])
        sizes = tuple(int(v) for v in _floats(conf["nk"]))
        if "q" in conf and int(conf["q"]) != len(sizes):
            raise ConfigurationError(f"q={conf['q']} disagrees with nk ({len(sizes)} groups)")
        nu = float(conf["nu"]) if "nu" in conf else None
        family = conf.get("dist", "normal").lower()
        slant = _floats(conf["slant"]) if "slant" in conf else (0.0,)
        slant = slant[0] if len(slant) == 1 else slant
        cov = parse_covariance(conf.get("sigma", "circular-corr:0.108,0.216"), p)
        dist = simgen.DistributionSpec(family, cov, nu=nu, slant=slant)
        shift = None
        if conf.get("shift", "none").lower() not in ("", "none"):
            shift = _floats(conf["shift"])
        if seed is None:
            if "seed" not in conf:
                raise ConfigurationError("a seed is required (--seed or seed= in the config)")
            seed = int(conf["seed"])
        kw = {}
        if "alpha_list" in conf:
            kw["alphas"] = _floats(conf["alpha_list"])
        if "reps" in conf:
            kw["reps"] = int(conf["reps"])
        if "tests" in conf:
            kw["tests"] = tuple(t.strip() for t in conf["tests"].split(",") if t.strip())
        if "lrt_methods" in conf:
            kw["lrt_methods"] = tuple(t.strip() for t in conf["lrt_methods"].split(",") if t.strip())
        cfg = harness.ExperimentConfig(p=p, sizes=sizes, dist=dist, shift=shift, seed=seed, **kw)
    except ValueError as exc:
        if isinstance(exc, CircManovaError):
            raise
        raise ConfigurationError(f"bad config value: {exc}") from exc
    fmt = conf.get("format", "csv")
    if fmt not in ("csv", "text", "aligned-text"):
        raise ConfigurationError(f"unknown format {fmt!r}")
    return cfg, fmt


def parse_count_model(text: str) -> randomn.CountModel:
    kind, _, args = text.partition(":")
    vals = _floats(args)
    kind = kind.strip().lower()
    try:
        if kind == "poisson":
            return randomn.Poisson(*vals)
        if kind == "binomial":
            return randomn.Binomial(int(vals[0]), vals[1])
        if kind in ("negbin", "negative-binomial"):
            return randomn.NegativeBinomial(int(vals[0]), vals[1])
        if kind in ("point", "pointmass"):
            return randomn.PointMass(int(vals[0]))
    except (IndexError, TypeError) as exc:
        raise DataError(f"bad count model {text!r}") from exc
    raise DataError(f"unknown count model {kind!r}")


# --- commands -----------------------------------------------------------------------


def cmd_test(args) -> int:
    labels, sample = read_dataset(args.path, args.delimiter)
    res = lrt_statistic(sample)
    model = nulldist.beta_product_model(sample.n, sample.q, sample.p)
    method = args.method
    if method == "exact":
        method = "exact-egig" if sample.q % 2 else "cf-inversion"
    pval = nulldist.p_value(model, res.w, method)
    raw = args.raw
    print(f"groups: {', '.join(f'{lab} (n={k})' for lab, k in zip(labels, sample.sizes))}")
    print(f"n={sample.n} q={sample.q} p={sample.p}")
    print(f"Lambda: {_fmt(res.lam, raw)}")
    print(f"W: {_fmt(res.w, raw)}")
    print(f"method: {method}")
    print(f"p-value: {_fmt(pval, raw)}")
    verdict = "reject H0" if pval < args.alpha else "retain H0"
    print(f"decision at alpha={args.alpha:g}: {verdict}")
    return EXIT_OK


def cmd_quantile(args) -> int:
    if not 0 < args.alpha < 1:
        raise DataError(f"alpha must lie in (0, 1), got {args.alpha}")
    raw = args.raw
    if args.method == "mixture":
        if not args.count:
            raise DataError("--method mixture needs --count (e.g. poisson:10)")
        tw = randomn.truncated_weights(parse_count_model(args.count), args.q, args.tail_eps)
        z = randomn.mixture_quantile_lambda(tw, args.q, args.p, args.alpha, args.mixture_method)
        used = f"mixture[{args.count}; {args.mixture_method}]"
    else:
        if args.n is None:
            raise DataError(f"--n is required for method {args.method}")
        model = nulldist.beta_product_model(args.n, args.q, args.p)
        method = args.method
        if method == "exact":
            method = "exact-egig" if args.q % 2 else "cf-inversion"
        z = nulldist.quantile_lambda(model, args.alpha, method)
        used = method
    print(f"method: {used}")
    print(f"alpha: {args.alpha:g}")
    print(f"Lambda quantile: {_fmt(z, raw)}")

    w = -math.log(z) if z > 0 else float("inf")
    print(f"W threshold: {_fmt(w, raw)}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    conf = read_config(args.config)
    cfg, fmt = build_experiment(conf, args.seed)
    h0_cfg = harness.ExperimentConfig(
        p=cfg.p, sizes=cfg.sizes, dist=cfg.dist, shift=None, alphas=cfg.alphas,
        reps=cfg.reps, seed=cfg.seed, tests=cfg.tests, lrt_methods=cfg.lrt_methods,
    )
    print(f"scenario: {cfg.descriptor()}")
    h0 = harness.run_h0(h0_cfg, threads=args.threads, progress=args.progress)
    rows = list(h0.rows)
    if cfg.shift is not None:
        rows += harness.run_h1(cfg, h0.null_bank, threads=args.threads, progress=args.progress).rows
    data = harness.emit_table(rows, fmt)
    try:
        Path(args.output).write_bytes(data)
    except OSError as exc:
        raise DataError(f"cannot write {args.output}: {exc.strerror or exc}") from exc
    print(f"wrote {len(rows)} rows to {args.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="circmanova", description="Circular-covariance LRT for high-dimensional MANOVA")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("test", help="run the LRT on a labelled data file")
    t.add_argument("path")
    t.add_argument("--method", default="exact", choices=["exact", "exact-egig", "cf-inversion", "asymptotic"])
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--delimiter", default=",")
    t.add_argument("--raw", action="store_true", help="print full precision")
    t.set_defaults(func=cmd_test)

    q = sub.add_parser("quantile", help="lower alpha-quantile of Lambda under H0")
    q.add_argument("--n", type=int)
    q.add_argument("--q", type=int, required=True)
    q.add_argument("--p", type=int, required=True)
    q.add_argument("--alpha", type=float, default=0.05)
    q.add_argument(
        "--method", default="exact",
        choices=["exact", "exact-egig", "cf-inversion", "asymptotic", "mixture"],
    )
    q.add_argument("--count", help="sample-size law for --method mixture: poisson:L, binomial:N,P, negbin:R,P, point:N")
    q.add_argument("--mixture-method", default="exact", choices=["exact", "asymptotic", "cf-inversion", "exact-egig"])
    q.add_argument("--tail-eps", type=float, default=1e-10)
    q.add_argument("--raw", action="store_true")
    q.set_defaults(func=cmd_quantile)

    s = sub.add_parser("simulate", help="run a Monte Carlo campaign from a key=value config")
    s.add_argument("config")
    s.add_argument("--output", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--progress", action="store_true", help="report progress on stderr")
    s.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
