"""Benchmark generators and the experiment harness.

Randomness comes from the raw 64-bit output of the PCG64 bit generator
(PCG XSL-RR 128/64), seeded through ``numpy.random.SeedSequence`` with the
base seed, the replicate index and the class parameters. Integers are drawn
by rejection sampling on the raw words and Zipf ranks by inverting a
cumulative table with 53-bit uniforms, so the files depend only on the bit
stream, not on numpy's distribution code.
"""

from __future__ import annotations

import bisect
import csv
import logging
import math
import os
import time
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import Instance, Item, PackingPattern, Solution, is_alternatable
from .errors import AdaptationError, CBPPError, GeneratorError
from .fileio import format_instance, instance_comments, parse_instance

log = logging.getLogger(__name__)

UNIFORM_M = (300, 500)
UNIFORM_L = (500, 750, 1000)
UNIFORM_Q = (2, 7, 15)
UNIFORM_W = (("0.1", "0.8"), ("0.01", "0.25"))
ZIPF_M = (300, 500)
ZIPF_L = (300, 500, 750)
ZIPF_W = ("0.01", "0.25")
ZIPF_ALPHA = 2
REPLICATES = 10
DEFAULT_TIME_LIMIT_MS = 1_800_000

CSV_HEADER = ["instance", "class", "model", "status", "lb", "ub", "gap", "nodes", "time_ms"]
SUMMARY_HEADER = ["class", "model", "instances", "opt", "mean_time_ms", "mean_gap"]

_FAMILY_CODE = {"uniform": 1, "zipf": 2}


class Rng:
    """Platform-independent draws from the PCG64 raw stream."""

    def __init__(self, entropy: Sequence[int]):
        self._bits = np.random.PCG64(np.random.SeedSequence([int(e) for e in entropy]))

    def next_u64(self) -> int:
        return int(self._bits.random_raw())

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in ``[lo, hi]``."""
        span = hi - lo + 1
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            r = self.next_u64()
            if r < limit:
                return lo + r % span

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


@dataclass(frozen=True)
class GeneratorConfig:
    family: str
    M: int
    L: int
    Q: int | None = None
    W: tuple[str, str] = ZIPF_W
    seed: int = 0
    replicate: int = 0

    def __post_init__(self):
        lo, hi = Fraction(self.W[0]), Fraction(self.W[1])
        if not 0 < lo <= hi <= 1:
            raise GeneratorError(f"relative length interval {self.W} must satisfy 0 < lo <= hi <= 1")
        if self.M < 0 or self.L < 1:
            raise GeneratorError("M must be non-negative and L positive")
        if self.family == "uniform" and (self.Q is None or self.Q < 2):
            raise GeneratorError("uniform family needs Q >= 2")

    def length_range(self) -> tuple[int, int]:
        lo = math.ceil(Fraction(self.W[0]) * self.L)
        hi = math.floor(Fraction(self.W[1]) * self.L)
        lo = max(lo, 1)
        if lo > hi:
            raise GeneratorError(f"empty length range [{lo}, {hi}] for W={self.W}, L={self.L}")
        return lo, hi

    def class_tag(self) -> str:
        if self.family == "uniform":
            return f"uniform({self.M},{self.L},{self.Q},[{self.W[0]},{self.W[1]}])"
        return f"zipf({self.M},{self.L})"

    def file_name(self) -> str:
        if self.family == "uniform":
            return f"uniform_M{self.M}_L{self.L}_Q{self.Q}_W{self.W[0]}-{self.W[1]}_r{self.replicate:02d}.txt"
        return f"zipf_M{self.M}_L{self.L}_r{self.replicate:02d}.txt"

    def rng(self) -> Rng:
        w = [Fraction(x) for x in self.W]
        return Rng([self.seed & (2**64 - 1), self.replicate, _FAMILY_CODE.get(self.family, 0), self.M, self.L,
                    self.Q or 0, w[0].numerator, w[0].denominator, w[1].numerator, w[1].denominator])


def _merge(L: int, Q: int, copies: Iterable[tuple[int, int]]) -> Instance:
    demand = Counter(copies)
    keys = sorted(demand, key=lambda lc: (-lc[0], lc[1]))
    return Instance(L, Q, tuple(Item(k, l, demand[(l, c)], c) for k, (l, c) in enumerate(keys, start=1)))


def gen_uniform(cfg: GeneratorConfig) -> Instance:
    """``M`` copies with uniform integer lengths in the W range and uniform colors."""
    if cfg.family != "uniform":
        raise GeneratorError(f"gen_uniform got family {cfg.family!r}")
    lo, hi = cfg.length_range()
    rng = cfg.rng()
    copies = []
    for _ in range(cfg.M):
        length = rng.integer(lo, hi)
        color = rng.integer(1, cfg.Q)
        copies.append((length, color))
    return _merge(cfg.L, cfg.Q, copies)


def zipf_table(support: int, alpha: float = ZIPF_ALPHA) -> list[float]:
    """Cumulative probabilities of ranks 1..support with weight k^-alpha."""
    weights = [1.0 / k ** alpha for k in range(1, support + 1)]
    total = math.fsum(weights)
    acc, cum = 0.0, []
    for w in weights:
        acc += w
        cum.append(acc / total)
    cum[-1] = 1.0
    return cum


def draw_zipf(rng: Rng, cum: list[float]) -> int:
    return bisect.bisect_right(cum, rng.uniform()) + 1


def gen_zipf(cfg: GeneratorConfig) -> Instance:
    """Colors are Zipf ranks (alpha 2, truncated at M); Q is the largest rank drawn."""
    if cfg.family != "zipf":
        raise GeneratorError(f"gen_zipf got family {cfg.family!r}")
    lo, hi = cfg.length_range()
    rng = cfg.rng()
    cum = zipf_table(max(cfg.M, 1))
    copies = []
    for _ in range(cfg.M):
        color = draw_zipf(rng, cum)
        length = rng.integer(lo, hi)
        copies.append((length, color))
    Q = max([c for _, c in copies], default=1)
    return _merge(cfg.L, max(Q, 2), copies)


def generate(cfg: GeneratorConfig) -> Instance:
    if cfg.family == "uniform":
        return gen_uniform(cfg)
    if cfg.family == "zipf":
        return gen_zipf(cfg)
    raise GeneratorError(f"unknown family {cfg.family!r}")


def uniform_grid(seed: int = 0, replicates: int = REPLICATES) -> list[GeneratorConfig]:
    return [GeneratorConfig("uniform", M, L, Q, W, seed, r)
            for M in UNIFORM_M for L in UNIFORM_L for Q in UNIFORM_Q for W in UNIFORM_W
            for r in range(replicates)]


def zipf_grid(seed: int = 0, replicates: int = REPLICATES) -> list[GeneratorConfig]:
    return [GeneratorConfig("zipf", M, L, None, ZIPF_W, seed, r)
            for M in ZIPF_M for L in ZIPF_L for r in range(replicates)]


def instance_text(cfg: GeneratorConfig) -> str:
    inst = generate(cfg)
    return format_instance(inst, [f"class {cfg.class_tag()}",
                                  f"seed {cfg.seed} replicate {cfg.replicate}",
                                  "rng pcg64-raw"])


def write_set(configs: Iterable[GeneratorConfig], out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for cfg in configs:
        p = out / cfg.file_name()
        p.write_text(instance_text(cfg))
        paths.append(p)
    return paths


# -- BPPLIB adaptation -------------------------------------------------------

def _check_bpp(lengths: Sequence[int], capacity: int, bins: Sequence[Sequence[int]]) -> None:
    if capacity < 1:
        raise AdaptationError("capacity must be positive")
    for b, content in enumerate(bins, start=1):
        if not content:
            raise AdaptationError(f"bin {b} is empty")
        if sum(content) > capacity:
            raise AdaptationError(f"bin {b} holds {sum(content)} > capacity {capacity}")
    if Counter(x for b in bins for x in b) != Counter(lengths):
        raise AdaptationError("claimed bins do not cover the instance lengths exactly")


def color_bins(bins: Sequence[Sequence[int]]) -> list[list[tuple[int, int]]]:
    """Sort each bin by non-increasing length; first ceil(k/2) get color 1, the rest color 2."""
    out = []
    for content in bins:
        s = sorted(content, reverse=True)
        half = math.ceil(len(s) / 2)
        out.append([(l, 1 if i < half else 2) for i, l in enumerate(s)])
    return out


def adapt_bpplib(lengths: Sequence[int], capacity: int, bins: Sequence[Sequence[int]]) -> Instance:
    """Two-colored instance from a bin packing instance and a known solution of it."""
    _check_bpp(lengths, capacity, bins)
    return _merge(capacity, 2, (lc for b in color_bins(bins) for lc in b))


def adapted_solution(instance: Instance, bins: Sequence[Sequence[int]]) -> Solution:
    """The donor solution expressed on the adapted instance (alternated per bin)."""
    from .core import ItemMultiset, alternate

    ids = {(it.length, it.color): it.id for it in instance.items}
    out = []
    for b in color_bins(bins):
        ms = ItemMultiset.from_ids(ids[lc] for lc in b)
        out.append(alternate(ms, instance))
    return Solution(tuple(out))


def adapted_bins_alternate(instance: Instance, bins: Sequence[Sequence[int]]) -> list[bool]:
    from .core import ItemMultiset

    ids = {(it.length, it.color): it.id for it in instance.items}
    return [is_alternatable(ItemMultiset.from_ids(ids[lc] for lc in b), instance) for b in color_bins(bins)]


# -- harness -----------------------------------------------------------------

@dataclass
class BenchRow:
    instance: str
    klass: str
    model: str
    status: str
    lb: float | None = None
    ub: float | None = None
    gap: float | None = None
    nodes: int = 0
    time_ms: int = 0

    def csv_fields(self) -> list[str]:
        return [self.instance, self.klass, self.model, self.status, _fmt_num(self.lb), _fmt_num(self.ub),
                "" if self.gap is None else f"{self.gap:.6f}", str(self.nodes), str(self.time_ms)]


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)

    def summary(self) -> list[dict]:
        groups: dict[tuple[str, str], list[BenchRow]] = defaultdict(list)
        for r in self.rows:
            groups[(r.klass, r.model)].append(r)
        out = []
        for (klass, model), rows in sorted(groups.items()):
            gaps = [r.gap for r in rows if r.gap is not None]
            out.append({
                "class": klass, "model": model, "instances": len(rows),
                "opt": sum(r.status == "optimal" for r in rows),
                "mean_time_ms": sum(r.time_ms for r in rows) / len(rows),
                "mean_gap": (sum(gaps) / len(gaps)) if gaps else None,
            })
        return out

    def to_csv(self) -> str:
        return _csv_text(CSV_HEADER, [r.csv_fields() for r in self.rows])

    def summary_csv(self) -> str:
        rows = [[s["class"], s["model"], str(s["instances"]), str(s["opt"]), f"{s['mean_time_ms']:.1f}",
                 "--" if s["mean_gap"] is None else f"{s['mean_gap']:.6f}"] for s in self.summary()]
        return _csv_text(SUMMARY_HEADER, rows)


def _fmt_num(v) -> str:
    if v is None or not math.isfinite(v):
        return ""
    return str(int(v)) if float(v).is_integer() else f"{v:.6f}"


def _csv_text(header, rows) -> str:
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _klass(path: Path, text: str) -> str:
    return instance_comments(text).get("class", path.stem)


def run_one(path: str, model: str, time_limit_ms: int | None, normal: bool = True) -> BenchRow:
    """Solve one (instance, model) pair; failures become error rows."""
    from .pipeline import VerificationFailed, solve_instance

    p = Path(path)
    try:
        text = p.read_text()
        klass = _klass(p, text)
        inst = parse_instance(text)
    except (OSError, UnicodeDecodeError, CBPPError) as exc:
        log.warning("cannot read %s: %s", p, exc)
        return BenchRow(p.stem, p.stem, model, "error")
    t0 = time.perf_counter()
    try:
        out = solve_instance(inst, model, normal, time_limit_ms=time_limit_ms)
    except VerificationFailed as exc:
        log.error("%s/%s: incumbent failed verification: %s", p.stem, model, exc)
        return BenchRow(p.stem, klass, model, "verify-failed", time_ms=int((time.perf_counter() - t0) * 1000))
    except CBPPError as exc:
        log.error("%s/%s: %s", p.stem, model, exc)
        return BenchRow(p.stem, klass, model, "error", time_ms=int((time.perf_counter() - t0) * 1000))
    res = out.result
    ub = res.ub if res.incumbent is not None else None
    lb = res.lb if math.isfinite(res.lb) else None
    gap = res.gap if ub is not None else None
    return BenchRow(p.stem, klass, model, res.status, lb, ub, gap, res.nodes,
                    int((time.perf_counter() - t0) * 1000))


def _job(args):
    return run_one(*args)


def run_bench(instance_dir, models: Sequence[str] = ("ca", "ml"), time_limit_ms: int | None = DEFAULT_TIME_LIMIT_MS,
              workers: int = 1, normal: bool = True, out_dir=None, figures: bool = True) -> BenchReport:
    """Solve every instance file in ``instance_dir`` with each model.

    Writes ``results.csv`` and ``summary.csv`` (and, with ``figures``, PNG
    plots) to ``out_dir`` when given. Rows come out sorted by instance file
    name, then by model order.
    """
    files = sorted(p for p in Path(instance_dir).iterdir() if p.is_file() and not p.name.startswith("."))
    jobs = [(str(p), m, time_limit_ms, normal) for p in files for m in models]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_job, jobs))
    else:
        rows = [_job(j) for j in jobs]
    report = BenchReport(rows)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "results.csv").write_text(report.to_csv())
        (out / "summary.csv").write_text(report.summary_csv())
        if figures and rows:
            from .plotting import plot_report

            plot_report(report, out)
    return report


def default_output_dir() -> Path:
    return Path(os.environ.get("CBPP_OUTPUT_DIR", "."))
