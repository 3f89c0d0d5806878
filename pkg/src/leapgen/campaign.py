"""Seeded sampling campaigns, benchmarks and chunked parallel execution."""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import __version__
from .leap import (
    get_scheme,
    leap_core_sizes,
    leap_sample,
    leap_walk_heights,
    rejection_leap_sample,
    single_pass_deficits,
    single_pass_sample,
)
from .stats import Histogram, check_statistic, statistic

CHUNK = 4096
MODES = ("leap", "rej", "single-pass")


def make_rng(seed: int, chunk: int = 0) -> np.random.Generator:
    """Philox stream for one chunk; chunk streams are independent spawns of ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


@dataclass
class Campaign:
    cls: str
    n: int
    count: int
    seed: int = 0
    mode: str = "leap"
    stat: str = "core-size"
    r: int = 1
    a: float = 0.5
    threads: int = 1

    def validate(self) -> None:
        if self.count < 1:
            raise ValueError("sample count must be at least 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {', '.join(MODES)}")
        check_statistic(self.cls, self.stat, self.mode)
        get_scheme(self.cls).check_size(self.n)


def _chunk_values(c: Campaign, index: int, m: int) -> np.ndarray:
    spec = get_scheme(c.cls)
    rng = make_rng(c.seed, index)
    r = c.r if c.mode == "rej" else None
    if c.mode == "single-pass":
        if c.stat == "deficit":
            return single_pass_deficits(spec, c.n, m, rng)
        return np.array([single_pass_sample(spec, c.n, rng).core_size for _ in range(m)])
    if c.stat == "core-size":
        return leap_core_sizes(spec, c.n, m, rng, r=r, a=c.a).core_sizes
    if spec.kind == "walk":
        return leap_walk_heights(spec, c.n, m, rng, r=r, a=c.a)[0]
    out = np.empty(m, np.int64)
    for i in range(m):
        if r is None:
            o = leap_sample(spec, c.n, rng)
        else:
            o = rejection_leap_sample(spec, c.n, r, c.a, rng)
        out[i] = statistic(o.object.obj, c.stat)
    return out


def _chunks(count: int):
    return [(i, min(CHUNK, count - i * CHUNK)) for i in range((count + CHUNK - 1) // CHUNK)]


def run_campaign(c: Campaign) -> Histogram:
    """Histogram of the statistic over c.count samples.

    Samples are split into chunks of fixed size, each with its own stream,
    and merged in chunk order, so the result does not depend on ``threads``.
    """
    c.validate()
    t0 = time.perf_counter()
    jobs = _chunks(c.count)
    if c.threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=c.threads) as ex:
            parts = list(ex.map(_chunk_values, [c] * len(jobs), *zip(*jobs)))
    else:
        parts = [_chunk_values(c, i, m) for i, m in jobs]
    h = Histogram.from_values(np.concatenate(parts))
    meta = {"class": c.cls}
    meta.update((k, v) for k, v in asdict(c).items() if k not in ("cls", "threads"))
    if c.mode != "rej":
        meta.pop("r")
        meta.pop("a")
    meta.update(rng="numpy-Philox4x32-10", chunk=CHUNK, version=__version__,
                wall_time=f"{time.perf_counter() - t0:.3f}")
    h.meta = {k: str(v) for k, v in meta.items()}
    return h


@dataclass
class BenchRow:
    n: int
    seconds: float
    trials: float
    draws: float

    def draws_per_trial(self) -> float:
        return self.draws / self.trials


def bench(cls: str, sizes, samples: int, seed: int = 0, r: Optional[int] = None, a: float = 0.5):
    """Mean wall time, trials and B-draws per leap sample for each size."""
    spec = get_scheme(cls)
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    rng = make_rng(seed)
    leap_sample(spec, sizes[0], rng)  # compile and warm the tables
    rows = []
    for n in sizes:
        ts, tr, dr = [], [], []
        for _ in range(samples):
            t0 = time.perf_counter()
            if r is None:
                o = leap_sample(spec, n, rng)
            else:
                o = rejection_leap_sample(spec, n, r, a, rng)
            ts.append(time.perf_counter() - t0)
            tr.append(o.trials)
            dr.append(o.draws)
        rows.append(BenchRow(n, float(np.mean(ts)), float(np.mean(tr)), float(np.mean(dr))))
    return rows


def bench_csv(rows) -> str:
    lines = ["n,mean_seconds,mean_trials,mean_b_draws"]
    lines += [f"{r.n},{r.seconds:.6g},{r.trials:.6g},{r.draws:.6g}" for r in rows]
    return "\n".join(lines) + "\n"
