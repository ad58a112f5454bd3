"""Deterministic parallel Monte Carlo for the Kolmogorov distance of W_{n,α}.

Sample ``i`` draws its uniforms from a Philox stream keyed by the seed with
``i`` in the second counter word, so every sample is a pure function of
(seed, i).  Samples are grouped into fixed blocks whose results are merged in
block order, which makes the report independent of the worker count.
"""
from __future__ import annotations

import logging
import math
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _growth_kernel as gk
from .errors import DomainError, ResourceError
from .partitions import Partition
from .reports import BoundReport, FAIL, PASS, judge
from .stein_bounds import KSResult, dkw_margin, ks_empirical, normal_cdf, uniform_bound_rhs

log = logging.getLogger(__name__)

BUFFER_LIMIT = 10**8
BLOCK_DOUBLES = 1 << 22
HIST_RANGE = 12.0
MIN_SAMPLES = 1000


@dataclass(frozen=True)
class McConfig:
    n: int
    alpha: float
    num_samples: int
    seed: int = 0
    workers: int = 1
    delta: float = 1e-3
    bin_width: float = 1e-3
    histogram: bool | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        if self.n < 3:
            raise DomainError(f"Monte Carlo runs need n >= 3, got {self.n}")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.num_samples < MIN_SAMPLES:
            raise DomainError(f"num_samples must be at least {MIN_SAMPLES}, got {self.num_samples}")
        if self.workers < 1:
            raise DomainError(f"workers must be at least 1, got {self.workers}")
        if not 0 < self.delta < 1:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if not self.bin_width > 0:
            raise DomainError("bin_width must be positive")

    @property
    def use_histogram(self) -> bool:
        if self.histogram is None:
            return self.num_samples > BUFFER_LIMIT
        if not self.histogram and self.num_samples > BUFFER_LIMIT:
            raise ResourceError(
                f"{self.num_samples} samples exceed the {BUFFER_LIMIT}-value buffer; "
                "use histogram mode"
            )
        return self.histogram

    @property
    def block_size(self) -> int:
        return max(1, min(4096, BLOCK_DOUBLES // self.n))


def sample_stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for sample ``index``: Philox keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, index, 0, 0]))


def _uniforms(n: int, seed: int, start: int, stop: int) -> np.ndarray:
    u = np.empty((stop - start, n))
    for j, i in enumerate(range(start, stop)):
        sample_stream(seed, i).random(out=u[j])
    return u


def _w_block(n: int, alpha: float, seed: int, start: int, stop: int) -> np.ndarray:
    u = _uniforms(n, seed, start, stop)
    cols = np.empty(stop - start, np.int64)
    rows = np.empty(stop - start, np.int64)
    gk.content_sums(n, alpha, u, cols, rows)
    return (alpha * cols - rows) / math.sqrt(alpha * n * (n - 1) / 2.0)


def simulate_w(n: int, alpha: float, seed: int, start: int, stop: int) -> np.ndarray:
    """W-values of samples ``start .. stop-1``."""
    return _w_block(n, float(alpha), seed, start, stop)


@dataclass
class _HistBlock:
    counts: np.ndarray
    sums: np.ndarray  # Σw, Σw², Σw³, Σw⁴


def _hist_edges(bin_width: float) -> np.ndarray:
    k = int(math.ceil(HIST_RANGE / bin_width))
    return np.arange(-k, k + 1) * bin_width


def _power_sums(w: np.ndarray) -> np.ndarray:
    w2 = w * w
    return np.array([w.sum(), w2.sum(), (w2 * w).sum(), (w2 * w2).sum()])


def _hist_job(args) -> _HistBlock:
    n, alpha, seed, start, stop, bin_width = args
    w = _w_block(n, alpha, seed, start, stop)
    edges = _hist_edges(bin_width)
    # bins: (-inf, e_0), [e_0, e_1), ..., [e_last, inf)
    idx = np.searchsorted(edges, w, side="right")
    counts = np.bincount(idx, minlength=edges.size + 1)
    return _HistBlock(counts, _power_sums(w))


def _buffer_job(args) -> np.ndarray:
    n, alpha, seed, start, stop = args
    return _w_block(n, alpha, seed, start, stop)


def _blocks(cfg: McConfig):
    b = cfg.block_size
    return [(s, min(s + b, cfg.num_samples)) for s in range(0, cfg.num_samples, b)]


def _run_jobs(fn, jobs, workers: int):
    if workers == 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=1))


@dataclass
class McReport:
    config: McConfig
    ks: KSResult
    moments: dict
    bounds: list[BoundReport]
    elapsed: float
    mode: str
    extra: dict = field(default_factory=dict)

    @property
    def samples_per_sec(self) -> float:
        return self.config.num_samples / self.elapsed if self.elapsed > 0 else math.inf

    @property
    def verdict(self) -> str:
        return FAIL if any(b.verdict == FAIL for b in self.bounds) else PASS

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "ks": self.ks.to_dict(),
            "moments": dict(self.moments),
            "config": asdict(self.config),
            "mode": self.mode,
            "bounds": [b.to_dict() for b in self.bounds],
            "verdict": self.verdict,
        }
        if timing:
            out["timing"] = {"elapsed_s": self.elapsed, "samples_per_sec": self.samples_per_sec}
        return out


def _moments_from_sums(sums: np.ndarray, num: int) -> dict:
    m1, m2, m3, m4 = (float(s) / num for s in sums)
    var = m2 - m1 * m1
    c4 = m4 - 4 * m3 * m1 + 6 * m2 * m1 * m1 - 3 * m1**4
    return {
        "mean": m1,
        "var": var,
        "m4": m4,
        "stderr_mean": math.sqrt(max(var, 0.0) / num),
        "stderr_var": math.sqrt(max(c4 - var * var, 0.0) / num),
    }


def _histogram_ks(counts: np.ndarray, edges: np.ndarray, num: int, cfg: McConfig) -> KSResult:
    below = np.cumsum(counts)[:-1] / num  # F_N(e_j−) = #(w < e_j) / N
    phi = normal_cdf(edges)
    dev = np.abs(below - phi)
    j = int(np.argmax(dev))
    bin_error = max(float(counts[1:-1].max()) / num, cfg.bin_width / math.sqrt(2 * math.pi))
    margin = dkw_margin(num, cfg.delta) + bin_error
    return KSResult(float(dev[j]), float(edges[j]), "empirical", margin)


def run_mc(cfg: McConfig) -> McReport:
    """Sample ``cfg.num_samples`` growth paths and compare W with the normal law."""
    t0 = time.perf_counter()
    blocks = _blocks(cfg)
    if cfg.use_histogram:
        jobs = [(cfg.n, cfg.alpha, cfg.seed, s, e, cfg.bin_width) for s, e in blocks]
        parts = _run_jobs(_hist_job, jobs, cfg.workers)
        counts = np.zeros_like(parts[0].counts)
        sums = np.zeros(4)
        for p in parts:
            counts += p.counts
            sums += p.sums
        ks = _histogram_ks(counts, _hist_edges(cfg.bin_width), cfg.num_samples, cfg)
        mode = "histogram"
    else:
        jobs = [(cfg.n, cfg.alpha, cfg.seed, s, e) for s, e in blocks]
        w = np.concatenate(_run_jobs(_buffer_job, jobs, cfg.workers))
        sums = np.zeros(4)
        for s, e in blocks:
            sums += _power_sums(w[s:e])
        w.sort()
        ks = ks_empirical(w, cfg.delta, presorted=True)
        mode = "buffer"
    elapsed = time.perf_counter() - t0
    moments = _moments_from_sums(sums, cfg.num_samples)
    bounds = uniform_bound_rhs(cfg.n, cfg.alpha, lhs=ks.distance - ks.dkw_margin)
    bounds.append(judge("mc_mean", abs(moments["mean"]), 5 * moments["stderr_mean"], slack=0.0))
    bounds.append(judge("mc_var", abs(moments["var"] - 1.0), 5 * moments["stderr_var"], slack=0.0))
    rate = cfg.num_samples / elapsed if elapsed > 0 else math.inf
    log.info("n=%d alpha=%g: %d samples in %.1fs (%.0f paths/s)", cfg.n, cfg.alpha,
             cfg.num_samples, elapsed, rate)
    if cfg.n <= 1000 and rate < 1e4 * cfg.workers:
        log.info("throughput below the 1e4 paths/s floor")
    return McReport(cfg, ks, moments, bounds, elapsed, mode)


def sample_partition_counts(n: int, alpha: float, num_samples: int, seed: int = 0) -> Counter:
    """Frequencies of the final partitions of ``num_samples`` growth paths."""
    counts: Counter = Counter()
    block = max(1, min(4096, BLOCK_DOUBLES // n))
    for start in range(0, num_samples, block):
        stop = min(start + block, num_samples)
        u = _uniforms(n, seed, start, stop)
        shapes = np.empty((stop - start, n), np.int64)
        gk.final_shapes(n, float(alpha), u, shapes)
        rows, freq = np.unique(shapes, axis=0, return_counts=True)
        for row, f in zip(rows, freq):
            counts[Partition(tuple(int(v) for v in row if v))] += int(f)
    return counts
