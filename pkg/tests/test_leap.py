import math

import mpmath
import numpy as np
import pytest
from scipy.stats import chisquare

from brute import tree_from_parent, unordered
from conftest import ALPHA, empirical_tv, zscores
from leapgen.campaign import make_rng
from leapgen.exact import core_laws_exact, generic_core_law, q_exact, _ratio_laws
from leapgen.leap import (
    CLASSES,
    TrialCapError,
    assemble,
    get_scheme,
    leap_core_sizes,
    leap_sample,
    p_inf,
    reference_core_sizes,
    rejection_leap_sample,
    rejection_weight,
    rejection_weights,
    single_pass_deficits,
    single_pass_sample,
    t_value,
    y_poly,
)
from leapgen.objects import BComponent, LatticeWalk, RootedTree

SIZES = {"motzkin": 57, "schroder": 40, "polya": 60, "phylo": 41, "mobile:3": 41,
         "mobile:4": 40, "schroder-mobile": 45}


def _canon(obj):
    o = obj.obj if hasattr(obj, "obj") else obj
    if isinstance(o, LatticeWalk):
        return o.to_string()
    return unordered(tree_from_parent(o.parent))


# -- basic contract ----------------------------------------------------------------

@pytest.mark.parametrize("name", CLASSES)
def test_exact_size_and_support(rng, name):
    spec = get_scheme(name)
    n = SIZES[name]
    for _ in range(30):
        o = leap_sample(spec, n, rng)
        assert o.object.size == n
        assert o.core_size in spec.support and o.trials >= 1
        assert o.draws >= o.core_size
        if spec.kind == "tree":
            o.object.obj.check()
        else:
            assert o.object.obj.is_valid


@pytest.mark.parametrize("name", CLASSES)
def test_same_seed_same_object(name):
    spec = get_scheme(name)
    a = leap_sample(spec, SIZES[name], make_rng(5)).object.serialize()
    b = leap_sample(spec, SIZES[name], make_rng(5)).object.serialize()
    c = leap_sample(spec, SIZES[name], make_rng(6)).object.serialize()
    assert a == b
    assert a != c or name == "polya"


@pytest.mark.parametrize("name", CLASSES)
def test_kept_decomposition_reassembles(rng, name):
    spec = get_scheme(name)
    for _ in range(20):
        o = leap_sample(spec, SIZES[name], rng, keep=True).object
        assert len(o.components) == o.core_size
        again = assemble(o.tag, o.d_part, o.core, o.components)
        if spec.kind == "walk":
            assert again.obj.to_string() == o.obj.to_string()
        else:
            assert np.array_equal(again.obj.parent, o.obj.parent)
        assert sum(c.size for c in o.components) + (o.d_part or 0) == o.size


def test_motzkin_size_one(rng):
    spec = get_scheme("motzkin")
    assert {leap_sample(spec, 1, rng).object.serialize() for _ in range(50)} == {"E"}


@pytest.mark.parametrize("name, n", [("mobile:3", 40), ("mobile:4", 41), ("motzkin", 0),
                                     ("polya", 0), ("schroder", -1)])
def test_size_outside_support_is_an_error(rng, name, n):
    with pytest.raises(ValueError):
        leap_sample(get_scheme(name), n, rng)


def test_trial_cap(rng):
    spec = get_scheme("motzkin")
    with pytest.raises(TrialCapError):
        for _ in range(50):
            leap_sample(spec, 1000, rng, max_trials=1)
    with pytest.raises(TrialCapError):
        leap_core_sizes(spec, 1000, 50, rng, max_trials=1)


# -- assembly -------------------------------------------------------------------------

def test_assemble_flat_run_only():
    o = assemble("motzkin", 3, LatticeWalk([]), [])
    assert o.obj.to_string() == "EEE" and o.core_size == 0


def test_assemble_hand_example():
    o = assemble("motzkin", 1, LatticeWalk([1, -1]), [BComponent("motzkin", (1, 0), 3)])
    assert o.obj.to_string() == "EUED" and o.size == 4


def test_assemble_polya_identity_components():
    core = RootedTree(np.array([-1, 0]), "polya")
    bare = [BComponent("polya", RootedTree(np.array([-1]), "polya"), 1) for _ in range(2)]
    o = assemble("polya", None, core, bare)
    assert o.obj.parent.tolist() == [-1, 0]


def test_assemble_arity_mismatch():
    with pytest.raises(ValueError):
        assemble("motzkin", 0, LatticeWalk([1, -1]), [])
    core = RootedTree(np.array([-1, 0, 0]), "phylo")
    with pytest.raises(ValueError):
        assemble("phylo", None, core, [BComponent("phylo", RootedTree(np.array([-1]), "phylo"), 1)])


# -- core-size laws against the exact oracle ---------------------------------------------

DRAWS = 10 ** 6


@pytest.mark.parametrize("name", ["motzkin", "schroder"])
def test_walk_core_size_law(rng, name):
    spec = get_scheme(name)
    if spec.exact:
        _, lp, _ = core_laws_exact(spec, 10)
        assert sum(lp.values()) == 1
    else:
        lp = dict(enumerate(_ratio_laws(spec, 10)[1]))
    ks = leap_core_sizes(spec, 10, DRAWS, rng).core_sizes
    tv = empirical_tv(ks, lp)
    assert tv < 0.005
    assert tv < 4 * math.sqrt(len(lp) / DRAWS)


def test_rejection_core_size_law(rng):
    spec = get_scheme("motzkin")
    _, lp, _ = core_laws_exact(spec, 10)
    w = {k: rejection_weight(spec, 10, k, 1, 0.5) for k in lp}
    W = sum(float(lp[k]) * w[k] for k in lp)
    law = {k: float(lp[k]) * w[k] / W for k in lp}
    ks = leap_core_sizes(spec, 10, DRAWS, rng, r=1, a=0.5).core_sizes
    assert empirical_tv(ks, law) < 0.005
    o = rejection_leap_sample(spec, 10, 1, 0.5, rng)
    assert o.object.size == 10


def test_order_zero_rejection_is_plain_leap(rng):
    spec = get_scheme("motzkin")
    assert np.all(rejection_weights(spec, 40, 0, 0.5) == 0.5)
    _, lp, _ = core_laws_exact(spec, 40)
    ks = leap_core_sizes(spec, 40, 200_000, rng, r=0, a=0.5).core_sizes
    keys = sorted(lp)
    obs = np.array([(ks == k).sum() for k in keys])
    assert chisquare(obs, np.array([float(lp[k]) for k in keys]) * len(ks)).pvalue > ALPHA


@pytest.mark.parametrize("name, n", [("polya", 30), ("phylo", 25), ("mobile:3", 25),
                                     ("schroder-mobile", 25)])
def test_tree_core_size_law(rng, name, n):
    spec = get_scheme(name)
    law = generic_core_law(spec, n, dist="leap")
    ks = leap_core_sizes(spec, n, 200_000, rng).core_sizes
    assert set(np.unique(ks)) <= set(law.support())
    assert empirical_tv(ks, law.probs) < 4 * math.sqrt(len(law.probs) / 200_000)


def test_reference_loop_agrees(rng):
    spec = get_scheme("motzkin")
    _, lp, _ = core_laws_exact(spec, 16)
    ref = reference_core_sizes(spec, 16, 20_000, rng)
    keys = sorted(lp)
    obs = np.array([(ref == k).sum() for k in keys])
    assert chisquare(obs, np.array([float(lp[k]) for k in keys]) * len(ref)).pvalue > ALPHA
    law = generic_core_law(get_scheme("phylo"), 15, dist="leap")
    ref = reference_core_sizes(get_scheme("phylo"), 15, 20_000, rng)
    fast = leap_core_sizes(get_scheme("phylo"), 15, 20_000, rng).core_sizes
    for sample in (ref, fast):
        keys = law.support()
        obs = np.array([(sample == k).sum() for k in keys])
        exp = np.array([law[k] for k in keys]) * len(sample)
        big = exp >= 5
        obs, exp = np.append(obs[big], obs[~big].sum()), np.append(exp[big], exp[~big].sum())
        assert chisquare(obs, exp * obs.sum() / exp.sum()).pvalue > ALPHA


def test_periodic_scheme_only_counts_support(rng):
    spec = get_scheme("mobile:3")
    ks = leap_core_sizes(spec, 61, 20_000, rng).core_sizes
    assert np.all(ks % 2 == 1)
    assert all(k in spec.support for k in np.unique(ks))


# -- trial statistics ----------------------------------------------------------------------

def test_success_rate_tends_to_one_over_mu(rng):
    spec = get_scheme("motzkin")
    b = leap_core_sizes(spec, 1000, 100_000, rng)
    q = float(q_exact(spec, 1000))
    assert abs(q - 1 / 3) < 1e-6
    # trials are geometric with success probability q
    z = (b.trials.mean() - 1 / q) / (math.sqrt(1 - q) / q / math.sqrt(len(b.trials)))
    assert abs(z) < 4


def test_draws_per_trial(rng):
    spec = get_scheme("motzkin")
    n = 10 ** 4
    b = leap_core_sizes(spec, n, 2000, rng)
    per_trial = b.draws.sum() / b.trials.sum()
    assert abs(per_trial - n / spec.mu) / (n / spec.mu) < 0.01


def test_rejection_acceptance_rate(rng):
    spec = get_scheme("motzkin")
    b = leap_core_sizes(spec, 1000, 50_000, rng, r=1, a=0.5)
    rate = len(b.trials) / b.trials.sum()
    assert abs(rate - 1 / 6) < 4 * math.sqrt((1 / 6) * (5 / 6) / b.trials.sum()) + 1e-3


def test_failed_work_is_linear(rng):
    spec = get_scheme("motzkin")
    outs = [leap_sample(spec, 1000, rng) for _ in range(300)]
    per_object = np.mean([o.failed_atoms + 1000 for o in outs]) / 1000
    assert per_object <= 2 * spec.mu


# -- single pass -----------------------------------------------------------------------------

def _deficit_law(name, imax):
    """(1/mu) Pr(Z > i) with Z the B-size law, from a large B sample."""
    spec = get_scheme(name)
    b = [float(v) for v in spec.b_law(imax + 2)]
    tail = [1 - math.fsum(b[: i + 1]) for i in range(imax + 1)]
    return [t / spec.mu for t in tail]


@pytest.mark.parametrize("name", ["motzkin", "phylo"])
def test_single_pass_deficit_law(rng, name):
    spec = get_scheme(name)
    d = single_pass_deficits(spec, 500, 100_000 if spec.kind == "walk" else 30_000, rng)
    law = _deficit_law(name, 8)
    obs = np.bincount(d, minlength=9)[:9]
    assert np.all(np.abs(zscores(obs, len(d), law)) < 4)
    if name == "motzkin":
        assert abs(law[0] - 1 / 3) < 1e-12


def test_single_pass_deficit_tail_is_geometric(rng):
    d = single_pass_deficits(get_scheme("motzkin"), 500, 100_000, rng)
    cnt = np.bincount(d, minlength=21)[:21]
    i = np.flatnonzero(cnt > 0)
    slope = np.polyfit(i, np.log(cnt[i]), 1)[0]
    assert slope < -0.5


@pytest.mark.parametrize("name", ["motzkin", "schroder", "phylo", "mobile:3"])
def test_single_pass_objects(rng, name):
    spec = get_scheme(name)
    for _ in range(200):
        o = single_pass_sample(spec, 41, rng)
        assert o.size + o.deficit == 41
        if o.object is not None:
            assert o.object.size == o.size
            assert o.core_size in spec.support
            if o.deficit == 0:
                assert o.object.size == 41


# -- correction polynomials --------------------------------------------------------------------

@pytest.mark.parametrize("name", CLASSES)
def test_first_polynomial_is_odd(name):
    assert p_inf(get_scheme(name), 1, 0.0) == 0


def test_first_polynomial_motzkin():
    spec = get_scheme("motzkin")
    for t in (-1.5, 0.3, 2.0):
        assert abs(p_inf(spec, 1, t) - t * 3 / (2 * math.sqrt(2))) < 1e-14


def test_missing_coefficients_and_bad_order():
    with pytest.raises(ValueError, match="expansion"):
        p_inf(get_scheme("schroder"), 2, 0.1)
    with pytest.raises(ValueError):
        p_inf(get_scheme("motzkin"), 4, 0.1)
    with pytest.raises(ValueError):
        y_poly(get_scheme("motzkin"), 4, 100, 0.1)
    with pytest.raises(ValueError):
        rejection_weights(get_scheme("motzkin"), 100, 1, 1.5)


def test_distortion_expansion_at_large_n():
    spec = get_scheme("motzkin")
    n = 10 ** 4
    pu, pl = _ratio_laws(spec, n)
    ks = np.arange(pu.size)
    t = t_value(spec, n, ks)
    keep = (np.abs(t) <= 2) & (pu > 0)
    d = pl[keep] / pu[keep]
    res = [np.abs(d - np.array([y_poly(spec, r, n, x) for x in t[keep]])).max() for r in (1, 2, 3)]
    assert res[0] < 1e-3
    # each further order shrinks the residual
    assert res[2] < res[1] < res[0]


def test_rejection_weights_float_and_mp_agree():
    spec = get_scheme("motzkin")
    w = rejection_weights(spec, 400, 2, 0.5)
    with mpmath.workdps(40):
        for k in (100, 133, 160):
            assert abs(w[k] - float(rejection_weight(spec, 400, k, 2, mpmath.mpf(0.5), mp=True))) < 1e-13
    assert np.all((w > 0) & (w <= 1))
