import numpy as np
import pytest

from leapgen.campaign import make_rng

ALPHA = 1e-3


@pytest.fixture
def rng():
    return make_rng(20240611)


@pytest.fixture
def rng_factory():
    return lambda chunk=0: make_rng(777, chunk)


def zscores(counts, total, probs):
    counts = np.asarray(counts, float)
    probs = np.asarray(probs, float)
    sd = np.sqrt(total * probs * (1 - probs))
    return np.where(sd > 0, (counts - total * probs) / np.where(sd > 0, sd, 1), 0.0)


def empirical_tv(values, law: dict) -> float:
    vals, cnt = np.unique(np.asarray(values), return_counts=True)
    emp = dict(zip(vals.tolist(), (cnt / cnt.sum()).tolist()))
    keys = set(emp) | set(law)
    return 0.5 * sum(abs(emp.get(k, 0.0) - float(law.get(k, 0.0))) for k in keys)
