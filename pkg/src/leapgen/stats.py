"""Statistics of sampled objects and the histogram container."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K
from .objects import LatticeWalk

STATISTICS = ("core-size", "height", "leaves", "cherries", "path-length", "deficit")
WALKS = ("motzkin", "schroder")


def check_statistic(cls: str, stat: str, mode: str = "leap") -> None:
    if stat not in STATISTICS:
        raise ValueError(f"unknown statistic {stat!r}")
    walk = cls.split(":")[0] in WALKS
    if mode == "single-pass":
        if stat not in ("deficit", "core-size"):
            raise ValueError("single-pass campaigns record deficit or core-size")
        return
    if stat == "deficit":
        raise ValueError("deficit is only defined for single-pass campaigns")
    if walk and stat not in ("height", "core-size"):
        raise ValueError(f"{stat} is not defined for walks")
    if stat == "cherries" and cls != "phylo":
        raise ValueError("cherries are only counted for phylogenetic trees")


def statistic(obj, stat: str) -> int:
    """Integer value of a statistic (path-length is floored)."""
    if isinstance(obj, LatticeWalk):
        if stat == "height":
            return obj.height()
        raise ValueError(f"{stat} is not defined for walks")
    h, leaves, cherries, mean_depth = K.tree_stats(obj.parent)
    if stat == "height":
        return int(h)
    if stat == "leaves":
        return int(leaves)
    if stat == "cherries":
        return int(cherries)
    if stat == "path-length":
        return int(np.floor(mean_depth))
    raise ValueError(f"unknown statistic {stat!r}")


@dataclass
class Histogram:
    """Counts per integer bucket plus the metadata needed to rerun the campaign."""
    counts: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_values(cls, values, meta=None) -> "Histogram":
        keys, cnt = np.unique(np.asarray(values, dtype=np.int64), return_counts=True)
        return cls({int(k): int(c) for k, c in zip(keys, cnt)}, dict(meta or {}))

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def merge(self, other: "Histogram") -> "Histogram":
        out = dict(self.counts)
        for k, c in other.counts.items():
            out[k] = out.get(k, 0) + c
        return Histogram(out, dict(self.meta))

    def probabilities(self) -> dict:
        t = self.total
        return {k: c / t for k, c in sorted(self.counts.items())}

    def mean(self) -> float:
        t = self.total
        return sum(k * c for k, c in self.counts.items()) / t if t else float("nan")

    def __eq__(self, other):
        return (isinstance(other, Histogram) and self.counts == other.counts
                and {k: str(v) for k, v in self.meta.items()} == {k: str(v) for k, v in other.meta.items()})


def to_csv(h: Histogram) -> str:
    buf = io.StringIO()
    for k, v in h.meta.items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bucket", "count"])
    for k in sorted(h.counts):
        w.writerow([k, h.counts[k]])
    return buf.getvalue()


def to_json(h: Histogram) -> str:
    data = {"meta": {k: str(v) for k, v in h.meta.items()},
            "buckets": [[k, h.counts[k]] for k in sorted(h.counts)]}
    return json.dumps(data, indent=1) + "\n"


def from_csv(text: str) -> Histogram:
    meta, counts = {}, {}
    rows = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition("=")
            meta[key] = val
        elif line.strip():
            rows.append(line)
    reader = csv.reader(rows)
    header = next(reader, None)
    if header != ["bucket", "count"]:
        raise ValueError("missing bucket,count header")
    for k, c in reader:
        counts[int(k)] = int(c)
    return Histogram(counts, meta)


def from_json(text: str) -> Histogram:
    data = json.loads(text)
    return Histogram({int(k): int(c) for k, c in data["buckets"]}, dict(data["meta"]))


def emit(h: Histogram, fmt: str = "csv", path=None) -> str:
    """Serialise ``h``; write it to ``path`` when given (OSError names the path)."""
    if fmt == "csv":
        text = to_csv(h)
    elif fmt == "json":
        text = to_json(h)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return text


def parse(text: str, fmt: str = "csv") -> Histogram:
    return from_csv(text) if fmt == "csv" else from_json(text)


def chi_square_uniform(counts) -> tuple[float, float]:
    """Pearson statistic and p-value against the uniform law on len(counts) cells."""
    from scipy.stats import chisquare

    res = chisquare(np.asarray(counts, dtype=float))
    return float(res.statistic), float(res.pvalue)
