"""Monte Carlo rejection-rate tables for the LRT and its competitors.

Replication ``i`` of a run draws its data from a seed derived from
``(base seed, i)`` only, so tables do not depend on worker count or order.
H0 and H1 runs of one scenario share that seed bank: the H1 data of
replication ``i`` is the H0 data of replication ``i`` plus the mean shift.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from . import nulldist
from .competitors import COMPETITORS
from .errors import (
    ConfigurationError,
    DataError,
    EmptyRequestError,
    PairingError,
)
from .simgen import (
    Circular,
    CompoundSymmetric,
    Diagonal,
    DistributionSpec,
    FullPD,
    PreparedSampler,
    Spherical,
    Toeplitz,
    apply_shift,
)
from .statistic import GroupedSample, build_u_matrix, lrt_w_from_projected

__all__ = [
    "TEST_ORDER",
    "SOURCE_ORDER",
    "SHIFT_CONVENTION",
    "ExperimentConfig",
    "TableRow",
    "NullBank",
    "RunResult",
    "run_h0",
    "run_h1",
    "empirical_critical_value",
    "emit_table",
    "parse_table",
    "replication_groups",
    "sort_rows",
]

TEST_ORDER = ("lrt", "fujikoshi", "schott", "chen_qin", "zhang")
SOURCE_ORDER = ("exact", "asymp", "simul")
TWO_SAMPLE_ONLY = ("chen_qin", "zhang")
SHIFT_CONVENTION = "blocks-of-variables-on-nonbaseline-groups"
CSV_HEADER = ("scenario", "test", "source", "alpha", "rate", "se", "R", "seed")


@dataclass(frozen=True)
class ExperimentConfig:
    p: int
    sizes: tuple[int, ...]
    dist: DistributionSpec
    shift: tuple[float, ...] | None = None
    alphas: tuple[float, ...] = (0.01, 0.05)
    reps: int = 10_000
    seed: int = 0
    tests: tuple[str, ...] = TEST_ORDER
    lrt_methods: tuple[str, ...] = ("exact", "asymptotic")

    def __post_init__(self):
        if self.reps < 1:
            raise ConfigurationError(f"replication count must be >= 1, got {self.reps}")
        if not self.alphas or any(not 0 < a < 1 for a in self.alphas):
            raise ConfigurationError(f"alphas must lie in (0, 1), got {self.alphas}")
        if len(self.sizes) < 2 or any(int(k) != k or k < 1 for k in self.sizes):
            raise ConfigurationError(f"need >= 2 groups of size >= 1, got {self.sizes}")
        if sum(self.sizes) <= len(self.sizes):
            raise ConfigurationError(f"need n > q, got sizes {self.sizes}")
        unknown = set(self.tests) - set(TEST_ORDER)
        if unknown or not self.tests:
            raise ConfigurationError(f"unknown tests {sorted(unknown)}; choose from {TEST_ORDER}")
        if len(self.sizes) != 2:
            bad = [t for t in self.tests if t in TWO_SAMPLE_ONLY]
            if bad:
                raise ConfigurationError(
                    f"{', '.join(bad)}: two-sample tests only, need q=2, got q={len(self.sizes)}"
                )
        for m in self.lrt_methods:
            if m not in ("exact", "asymptotic", "cf-inversion", "exact-egig"):
                raise ConfigurationError(f"unknown LRT method {m!r}")
        if self.shift is not None and not 1 <= len(self.shift) <= self.p:
            raise ConfigurationError(f"shift has {len(self.shift)} values but p={self.p}")

    @property
    def q(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return int(sum(self.sizes))

    def scenario_key(self) -> str:
        """Everything that defines the null scenario (no shift, no seed)."""
        d = self.dist
        parts = [
            f"p={self.p}",
            f"q={self.q}",
            "nk=" + "-".join(str(k) for k in self.sizes),
            f"dist={d.family}",
        ]
        if d.degrees_of_freedom is not None:
            parts.append(f"nu={d.degrees_of_freedom:g}")
        if d.skewed:
            parts.append("slant=" + _fmt_values(d.slant))
        parts.append("sigma=" + _describe_cov(d.scale))
        return ";".join(parts)

    def descriptor(self) -> str:
        if self.shift is None:
            return self.scenario_key() + ";H0"
        return self.scenario_key() + f";H1;shift={_fmt_values(self.shift)};conv={SHIFT_CONVENTION}"


def _fmt_values(v) -> str:
    vals = np.atleast_1d(np.asarray(v, dtype=float))
    return "/".join(f"{x:+g}" for x in vals)


def _describe_cov(spec) -> str:
    if isinstance(spec, Circular):
        return "circular(" + "/".join(f"{x:g}" for x in spec.sigmas) + ")"
    if isinstance(spec, CompoundSymmetric):
        return f"compound({spec.variance:g}/{spec.rho:g})"
    if isinstance(spec, Spherical):
        return f"spherical({spec.variance:g})"
    if isinstance(spec, Diagonal):
        return "diagonal(" + "/".join(f"{x:g}" for x in spec.variances) + ")"
    if isinstance(spec, Toeplitz):
        return f"toeplitz({spec.variance:g}/{spec.rho:g})"
    if isinstance(spec, FullPD):
        digest = hashlib.sha1(np.ascontiguousarray(spec.matrix, dtype=float).tobytes()).hexdigest()
        return f"fullpd(sha1={digest[:12]})"
    raise DataError(f"unknown covariance spec {spec!r}")


@dataclass(frozen=True)
class TableRow:
    scenario: str
    test: str
    source: str
    alpha: float
    rate: float
    se: float
    reps: int
    seed: int


@dataclass(frozen=True)
class NullBank:
    """Empirical H0 critical values, keyed by (test, alpha), for one scenario."""

    scenario: str
    reps: int
    seed: int
    critical: dict


@dataclass
class RunResult:
    rows: list[TableRow]
    scores: dict = field(default_factory=dict)
    null_bank: NullBank | None = None


# --- replication kernel ---------------------------------------------------------


def replication_groups(cfg: ExperimentConfig, index: int, sampler: PreparedSampler | None = None):
    """Data of replication ``index`` (H0 version; the shift is applied by the caller)."""
    sampler = sampler or PreparedSampler(cfg.dist, cfg.p)
    ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(index,))
    rngs = [np.random.default_rng(c) for c in ss.spawn(cfg.q)]
    return [sampler.draw(r, k) for r, k in zip(rngs, cfg.sizes)]


def _run_chunk(cfg: ExperimentConfig, start: int, stop: int):
    """Scores (statistics) and asymptotic p-values for replications [start, stop)."""
    sampler = PreparedSampler(cfg.dist, cfg.p)
    u = build_u_matrix(cfg.p)
    count = stop - start
    scores = {t: np.empty(count) for t in cfg.tests}
    pvals = {t: np.empty(count) for t in cfg.tests if t != "lrt"}
    for j, i in enumerate(range(start, stop)):
        groups = replication_groups(cfg, i, sampler)
        if cfg.shift is not None:
            groups = apply_shift(groups, cfg.shift)
        if "lrt" in scores:
            proj = [g @ u.T for g in groups]
            allp = np.vstack(proj)
            a_diag = sum(((y - y.mean(axis=0)) ** 2).sum(axis=0) for y in proj)
            c_diag = ((allp - allp.mean(axis=0)) ** 2).sum(axis=0)
            scores["lrt"][j] = lrt_w_from_projected(a_diag, c_diag)
        others = [t for t in cfg.tests if t != "lrt"]
        if others:
            s = GroupedSample(groups)
            for t in others:
                res = COMPETITORS[t](s)
                scores[t][j] = res.statistic
                pvals[t][j] = res.p_value
    return scores, pvals


def _simulate(cfg: ExperimentConfig, threads: int = 1, progress: bool = False):
    threads = max(1, int(threads))
    chunk = max(1, min(2000, math.ceil(cfg.reps / (4 * threads))))
    bounds = [(a, min(a + chunk, cfg.reps)) for a in range(0, cfg.reps, chunk)]
    if threads == 1:
        parts = []
        for k, (a, b) in enumerate(bounds):
            parts.append(_run_chunk(cfg, a, b))
            if progress:
                print(f"[{cfg.descriptor()}] {b}/{cfg.reps}", file=sys.stderr)
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_run_chunk, cfg, a, b) for a, b in bounds]
            parts = []
            for fut, (_, b) in zip(futures, bounds):
                parts.append(fut.result())
                if progress:
                    print(f"[{cfg.descriptor()}] {b}/{cfg.reps}", file=sys.stderr)
    scores = {t: np.concatenate([p[0][t] for p in parts]) for t in cfg.tests}
    pvals = {t: np.concatenate([p[1][t] for p in parts]) for t in cfg.tests if t != "lrt"}
    return scores, pvals


# --- critical values and rows ------------------------------------------------------


def empirical_critical_value(stream: np.ndarray, alpha: float) -> float:
    """Order statistic ceil(alpha R) (1-based) of the stream sorted in decreasing order.

    Rejecting when ``score >= critical`` gives rate ceil(alpha R)/R on the
    stream itself (absent ties).
    """
    stream = np.asarray(stream, dtype=float)
    if stream.size == 0:
        raise EmptyRequestError("empty statistic stream")
    k = max(1, math.ceil(alpha * stream.size - 1e-9))
    return float(np.sort(stream)[::-1][k - 1])


def _lrt_critical(cfg: ExperimentConfig, method: str, alpha: float) -> float:
    model = nulldist.beta_product_model(cfg.n, cfg.q, cfg.p)
    return nulldist.quantile_w(model, 1.0 - alpha, method)


def _row(cfg: ExperimentConfig, test: str, source: str, alpha: float, rejections: int) -> TableRow:
    rate = rejections / cfg.reps
    return TableRow(
        scenario=cfg.descriptor(),
        test=test,
        source=source,
        alpha=float(alpha),
        rate=rate,
        se=math.sqrt(rate * (1.0 - rate) / cfg.reps),
        reps=cfg.reps,
        seed=cfg.seed,
    )


def _theoretical_rows(cfg: ExperimentConfig, scores, pvals) -> list[TableRow]:
    rows = []
    for t in cfg.tests:
        for a in cfg.alphas:
            if t == "lrt":
                for m in cfg.lrt_methods:
                    crit = _lrt_critical(cfg, m, a)
                    src = "asymp" if m == "asymptotic" else "exact"
                    rows.append(_row(cfg, t, src, a, int(np.sum(scores[t] > crit))))
            else:
                rows.append(_row(cfg, t, "asymp", a, int(np.sum(pvals[t] < a))))
    return rows


def run_h0(cfg: ExperimentConfig, threads: int = 1, progress: bool = False) -> RunResult:
    """Null rejection rates under the theoretical critical values, plus the empirical bank."""
    if cfg.shift is not None and any(v != 0 for v in cfg.shift):
        raise ConfigurationError("run_h0 requires a configuration without a mean shift")
    cfg = replace(cfg, shift=None)
    scores, pvals = _simulate(cfg, threads, progress)
    rows = _theoretical_rows(cfg, scores, pvals)
    bank = NullBank(
        scenario=cfg.scenario_key(),
        reps=cfg.reps,
        seed=cfg.seed,
        critical={(t, a): empirical_critical_value(scores[t], a) for t in cfg.tests for a in cfg.alphas},
    )
    return RunResult(sort_rows(rows), scores, bank)


def run_h1(cfg: ExperimentConfig, bank: NullBank, threads: int = 1, progress: bool = False) -> RunResult:
    """Power under theoretical ("exact"/"asymp") and empirical-null ("simul") critical values."""
    if cfg.shift is None:
        raise ConfigurationError("run_h1 requires a shift (use (0, ...) for a null check)")
    if bank.scenario != cfg.scenario_key():
        raise PairingError(
            f"null bank is for scenario {bank.scenario!r}, not {cfg.scenario_key()!r}"
        )
    missing = [(t, a) for t in cfg.tests for a in cfg.alphas if (t, a) not in bank.critical]
    if missing:
        raise PairingError(f"null bank lacks critical values for {missing}")
    scores, pvals = _simulate(cfg, threads, progress)
    rows = _theoretical_rows(cfg, scores, pvals)
    for t in cfg.tests:
        for a in cfg.alphas:
            rows.append(_row(cfg, t, "simul", a, int(np.sum(scores[t] >= bank.critical[(t, a)]))))
    return RunResult(sort_rows(rows), scores, None)


# --- output -------------------------------------------------------------------------


def sort_rows(rows):
    scen_order = {}
    for r in rows:
        scen_order.setdefault(r.scenario, len(scen_order))
    return sorted(
        rows,
        key=lambda r: (
            scen_order[r.scenario],
            TEST_ORDER.index(r.test),
            SOURCE_ORDER.index(r.source),
            r.alpha,
        ),
    )


def emit_table(rows, fmt: str = "csv") -> bytes:
    """Serialize rows as CSV (fixed header) or as an aligned text table."""
    rows = list(rows)
    if not rows:
        raise EmptyRequestError("no rows to emit")
    rows = sort_rows(rows)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow(
                [r.scenario, r.test, r.source, repr(r.alpha), repr(r.rate), repr(r.se), r.reps, r.seed]
            )
        return buf.getvalue().encode()
    if fmt in ("text", "aligned-text"):
        lines = []
        current = None
        for r in rows:
            if r.scenario != current:
                current = r.scenario
                if lines:
                    lines.append("")
                lines.append(f"# {current}  (R={r.reps}, seed={r.seed})")
                lines.append(f"{'test':<10} {'source':<6} {'alpha':>6} {'rate':>7} {'se':>7}")
            lines.append(f"{r.test:<10} {r.source:<6} {r.alpha:>6.3f} {r.rate:>7.3f} {r.se:>7.4f}")
        return ("\n".join(lines) + "\n").encode()
    raise ConfigurationError(f"unknown table format {fmt!r}")


def parse_table(data: bytes) -> list[TableRow]:
    """Inverse of :func:`emit_table` for the CSV format."""
    reader = csv.reader(io.StringIO(data.decode()))
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise DataError(f"unexpected header {header}")
    return [
        TableRow(sc, t, src, float(a), float(rate), float(se), int(reps), int(seed))
        for sc, t, src, a, rate, se, reps, seed in reader
    ]

