import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brute import naive_stats, tree_from_parent, walk_height
from leapgen.campaign import CHUNK, Campaign, bench, bench_csv, run_campaign
from leapgen.exact import core_laws_exact
from leapgen.leap import get_scheme, leap_sample
from leapgen.stats import Histogram, check_statistic, emit, from_csv, parse, statistic

TREE_SIZES = {"polya": 60, "phylo": 41, "mobile:3": 41, "mobile:4": 40, "schroder-mobile": 45}


def _strip_wall(text):
    return "\n".join(l for l in text.splitlines() if "wall_time" not in l)


# -- statistic definitions against a naive recomputation ---------------------------------------

@pytest.mark.parametrize("name", list(TREE_SIZES))
def test_tree_statistics_dual_implementation(rng, name):
    spec = get_scheme(name)
    for _ in range(1000):
        t = leap_sample(spec, TREE_SIZES[name], rng).object.obj
        ref = naive_stats(tree_from_parent(t.parent))
        assert statistic(t, "height") == ref["height"]
        assert statistic(t, "leaves") == ref["leaves"]
        assert statistic(t, "path-length") == math.floor(ref["mean_depth"])
        if name == "phylo":
            assert statistic(t, "cherries") == ref["cherries"]


@pytest.mark.parametrize("name", ["motzkin", "schroder"])
def test_walk_height_dual_implementation(rng, name):
    spec = get_scheme(name)
    for _ in range(1000):
        w = leap_sample(spec, 37, rng).object.obj
        assert statistic(w, "height") == walk_height(w.steps)


def test_hand_statistics():
    from leapgen.objects import RootedTree

    # root with a cherry and a leaf: depths 0,1,1,2,2
    t = RootedTree(np.array([-1, 0, 0, 1, 1]), "phylo")
    assert statistic(t, "height") == 2
    assert statistic(t, "leaves") == 3
    assert statistic(t, "cherries") == 1
    assert statistic(t, "path-length") == 1


@pytest.mark.parametrize("cls, stat, mode", [("polya", "cherries", "leap"), ("motzkin", "leaves", "leap"),
                                             ("phylo", "deficit", "leap"), ("phylo", "height", "single-pass"),
                                             ("phylo", "diameter", "leap")])
def test_invalid_statistic(cls, stat, mode):
    with pytest.raises(ValueError):
        check_statistic(cls, stat, mode)


# -- histogram container ---------------------------------------------------------------------------

hist_st = st.builds(Histogram, st.dictionaries(st.integers(-5, 10 ** 6), st.integers(1, 10 ** 9), max_size=30),
                    st.dictionaries(st.sampled_from(["class", "n", "seed", "mode"]),
                                    st.text(st.characters(min_codepoint=48, max_codepoint=122), max_size=8)))


@given(hist_st, st.sampled_from(["csv", "json"]))
@settings(max_examples=80, deadline=None)
def test_round_trip(h, fmt):
    assert parse(emit(h, fmt), fmt) == h
    assert emit(h, fmt) == emit(parse(emit(h, fmt), fmt), fmt)


@given(hist_st, hist_st, hist_st)
@settings(max_examples=40, deadline=None)
def test_merge_is_associative_and_commutative(a, b, c):
    assert a.merge(b).counts == b.merge(a).counts
    assert a.merge(b).merge(c).counts == a.merge(b.merge(c)).counts
    assert a.merge(b).total == a.total + b.total


def test_empty_histogram_is_header_only():
    h = Histogram({}, {"class": "motzkin", "n": "10"})
    assert emit(h, "csv") == "# class=motzkin\n# n=10\nbucket,count\n"
    assert parse(emit(h, "json"), "json") == h


def test_emit_reports_the_path(tmp_path):
    h = Histogram({1: 2})
    bad = tmp_path / "missing" / "h.csv"
    with pytest.raises(OSError, match="missing"):
        emit(h, "csv", bad)
    good = tmp_path / "h.csv"
    emit(h, "csv", good)
    assert from_csv(good.read_text()) == h


def test_parse_rejects_headerless_csv():
    with pytest.raises(ValueError):
        from_csv("1,2\n")


def test_histogram_summary():
    h = Histogram.from_values([3, 1, 3, 3])
    assert h.counts == {1: 1, 3: 3} and h.total == 4
    assert h.mean() == 2.5 and h.probabilities() == {1: 0.25, 3: 0.75}


# -- campaigns -------------------------------------------------------------------------------------------

def test_single_sample_campaign():
    for cls, stat in (("polya", "height"), ("motzkin", "core-size"), ("phylo", "cherries")):
        h = run_campaign(Campaign(cls, 21, 1, stat=stat))
        assert h.total == 1


def test_campaign_core_law_matches_exact():
    h = run_campaign(Campaign("motzkin", 10, 10 ** 6, seed=3))
    _, lp, _ = core_laws_exact(get_scheme("motzkin"), 10)
    emp = h.probabilities()
    assert h.total == 10 ** 6
    assert 0.5 * sum(abs(emp.get(k, 0) - float(p)) for k, p in lp.items()) < 0.005


def test_campaign_metadata_and_determinism():
    c = Campaign("phylo", 41, 2 * CHUNK + 5, seed=9, stat="cherries")
    a, b = run_campaign(c), run_campaign(c)
    assert a.counts == b.counts
    assert _strip_wall(emit(a)) == _strip_wall(emit(b))
    for key in ("class", "n", "count", "seed", "mode", "stat", "rng", "version", "wall_time"):
        assert key in a.meta
    assert "r" not in a.meta
    c.seed = 10
    assert run_campaign(c).counts != a.counts


def test_threads_do_not_change_the_histogram():
    base = dict(cls="motzkin", n=300, count=3 * CHUNK, seed=4, stat="height")
    one = run_campaign(Campaign(threads=1, **base))
    two = run_campaign(Campaign(threads=2, **base))
    assert one.counts == two.counts
    assert _strip_wall(emit(one)) == _strip_wall(emit(two))


def test_rejection_and_single_pass_campaigns():
    h = run_campaign(Campaign("motzkin", 50, 5000, mode="rej", r=2))
    assert h.total == 5000 and h.meta["r"] == "2"
    h = run_campaign(Campaign("phylo", 50, 3000, mode="single-pass", stat="deficit"))
    assert h.total == 3000 and min(h.counts) >= 0


@pytest.mark.parametrize("bad", [dict(count=0), dict(mode="fast"), dict(stat="leaves"), dict(n=0)])
def test_invalid_campaigns(bad):
    kw = dict(cls="motzkin", n=20, count=10)
    kw.update(bad)
    with pytest.raises(ValueError):
        run_campaign(Campaign(**kw))


def test_polya_height_is_seed_stable():
    means = [run_campaign(Campaign("polya", 1000, 2000, seed=s, stat="height")).mean() for s in (1, 2)]
    assert abs(means[0] - means[1]) / means[0] < 0.03


def test_walk_height_campaign_matches_exact_law():
    from leapgen.exact import height_law

    h = run_campaign(Campaign("motzkin", 40, 200_000, seed=5, stat="height"))
    law = height_law(40, "leap").probs
    emp = h.probabilities()
    tv = 0.5 * sum(abs(emp.get(k, 0) - float(law.get(k, 0))) for k in set(emp) | set(law))
    assert tv < 4 * math.sqrt(len(law) / h.total)


# -- bench ---------------------------------------------------------------------------------------------------

def test_bench_trials_and_draws():
    rows = bench("motzkin", [2000, 10 ** 4], 300, seed=1)
    spec = get_scheme("motzkin")
    assert abs(rows[0].trials - spec.mu) < 4 * math.sqrt(6) / math.sqrt(300)
    assert abs(rows[1].draws_per_trial() - 10 ** 4 / spec.mu) / (10 ** 4 / spec.mu) < 0.01
    text = bench_csv(rows)
    assert text.splitlines()[0] == "n,mean_seconds,mean_trials,mean_b_draws"
    assert len(text.splitlines()) == 3


def test_bench_needs_ascending_sizes():
    with pytest.raises(ValueError):
        bench("motzkin", [100, 10], 2)
