import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from netregret import graph as gr
from netregret.analysis import (
    ActivationProfile,
    c_coefficient,
    c_coefficient_bruteforce,
    expected_activation_share,
    q_constant,
    q_graph_bound,
    q_uniform_closed_form,
    q_uniform_limit_zero,
    update_probability,
    verify_constants,
)
from netregret.errors import ValidationError

from conftest import graphs

probs = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=10)


def test_update_probability_on_star():
    prof = ActivationProfile(gr.star(4), (0.5,) * 4)
    assert update_probability(prof, 0) == pytest.approx(0.9375)
    assert update_probability(prof, 2) == pytest.approx(0.75)
    assert update_probability(ActivationProfile(gr.path(3), (0.0, 1.0, 0.2)), 1) == 1.0


@pytest.mark.parametrize(
    "q, v, expected",
    [((0.3,), 0, 1.0), ((0.3, 1.0), 0, 0.5), ((0.3, 0.5), 0, 0.75), ((0.0,) * 5, 2, 1.0), ((1.0,) * 5, 2, 0.2)],
)
def test_c_coefficient_values(q, v, expected):
    assert c_coefficient(q, v) == pytest.approx(expected, abs=1e-15)
    assert c_coefficient_bruteforce(q, v) == pytest.approx(expected, abs=1e-15)


def test_bruteforce_size_limit():
    with pytest.raises(ValidationError):
        c_coefficient_bruteforce([0.5] * 21, 0)


def test_activation_shares():
    assert expected_activation_share((0.0, 0.7), 0) == 0.0
    assert expected_activation_share((1.0, 1.0), 0) == pytest.approx(0.5)
    q, n = 0.3, 6
    for v in range(n):
        assert expected_activation_share((q,) * n, v) == pytest.approx((1 - (1 - q) ** n) / n, abs=1e-14)


def test_share_matches_monte_carlo():
    q = np.array([0.2, 0.5, 0.7, 0.1])
    rng = np.random.default_rng(0)
    X = rng.random((1_000_000, 4)) < q
    tot = X.sum(axis=1)
    ratio = np.where(X[:, 1], 1.0 / np.maximum(tot, 1), 0.0)
    se = ratio.std(ddof=1) / math.sqrt(ratio.size)
    assert abs(ratio.mean() - expected_activation_share(q, 1)) <= 4 * se


@pytest.mark.parametrize("g", [gr.star(5), gr.cycle(6), gr.complete(4), gr.edgeless(3)])
def test_q_is_one_when_everyone_is_active(g):
    assert q_constant(ActivationProfile(g, (1.0,) * g.n)) == pytest.approx(1.0, abs=1e-14)


def test_edgeless_limits():
    g = gr.edgeless(5)
    assert q_uniform_closed_form(g, 1.0) == 1.0
    assert q_uniform_closed_form(g, 1e-9) == pytest.approx(5.0, rel=1e-6)
    assert q_uniform_limit_zero(g) == 5.0
    values = [q_uniform_closed_form(g, q) for q in np.linspace(0.05, 1, 20)]
    assert all(a >= b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("q", [0.01, 0.3, 0.9, 1.0])
def test_complete_graph_closed_form_is_one(q):
    assert q_uniform_closed_form(gr.complete(7), q) == pytest.approx(1.0, abs=1e-14)


def test_closed_form_domain():
    with pytest.raises(ValidationError, match="q_uniform_limit_zero"):
        q_uniform_closed_form(gr.star(4), 0.0)
    with pytest.raises(ValidationError):
        q_uniform_closed_form(gr.star(4), 1.5)


def test_graph_bound_values():
    assert q_graph_bound(1) == pytest.approx(2 / (1 - math.exp(-1)))
    assert q_graph_bound(1) == pytest.approx(3.1639, abs=1e-4)
    assert q_graph_bound(9) == pytest.approx(15.82, abs=5e-3)
    assert q_graph_bound(9) <= 16
    for a in range(1, 50):
        assert q_graph_bound(a) <= 1.6 * (a + 1)


def test_profile_validation():
    with pytest.raises(ValidationError):
        ActivationProfile(gr.star(4), (0.5,) * 3)
    with pytest.raises(ValidationError):
        ActivationProfile(gr.star(4), (0.5, 0.5, 0.5, 1.2))


# properties


@given(probs, st.data())
def test_polynomial_matches_enumeration(q, data):
    v = data.draw(st.integers(0, len(q) - 1))
    assert abs(c_coefficient(q, v) - c_coefficient_bruteforce(q, v)) <= 1e-12


@given(probs)
def test_shares_sum_to_probability_someone_is_active(q):
    total = math.fsum(expected_activation_share(q, v) for v in range(len(q)))
    assert abs(total - (1 - np.prod(1 - np.asarray(q)))) <= 1e-12


@given(probs, st.data())
def test_c_in_unit_interval_and_monotone(q, data):
    v = data.draw(st.integers(0, len(q) - 1))
    c = c_coefficient(q, v)
    assert 0 < c <= 1 + 1e-15
    if len(q) > 1:
        w = data.draw(st.integers(0, len(q) - 1).filter(lambda w: w != v))
        bigger = list(q)
        bigger[w] = min(1.0, q[w] + data.draw(st.floats(0, 1)))
        assert c_coefficient(bigger, v) <= c + 1e-15


@given(graphs(max_n=9), st.data())
def test_q_below_graph_bound(g, data):
    q = data.draw(st.lists(st.floats(1e-3, 1.0), min_size=g.n, max_size=g.n))
    Q = q_constant(ActivationProfile(g, tuple(q)))
    assert Q <= q_graph_bound(gr.independence_number_exact(g)) + 1e-9


@given(graphs(max_n=9), st.floats(0.01, 1.0))
def test_uniform_closed_form_matches_general(g, q):
    assert abs(q_uniform_closed_form(g, q) - q_constant(ActivationProfile(g, (q,) * g.n))) <= 1e-10


@given(graphs(min_n=2, max_n=9), st.data())
def test_support_restriction_matches_induced_subgraph(g, data):
    q = data.draw(st.lists(st.one_of(st.just(0.0), st.floats(0.05, 1.0)), min_size=g.n, max_size=g.n))
    prof = ActivationProfile(g, tuple(q))
    if not prof.support:
        return
    sub, kept = g.induced_subgraph(prof.support)
    restricted = ActivationProfile(sub, tuple(q[v] for v in kept))
    assert q_constant(prof) == pytest.approx(q_constant(restricted), abs=1e-12)


# verification corpus


def test_corpus_passes():
    rep = verify_constants(seed=0)
    assert rep.ok, rep.summary()
    counts = rep.counts()
    assert counts["ratio_bound"][0] == 1000
    assert counts["c_exact"][0] == 500
    assert counts["q_graph_bound"][0] == 1000
    assert counts["uniform_closed"][0] == 100


def test_injected_fault_is_reported():
    rep = verify_constants(seed=0, ratio_samples=20, share_samples=5, q_bound_samples=5, uniform_graphs=3,
                           inject_fault=True)
    assert not rep.ok
    assert "counterexample: ratio_bound" in rep.summary()


def test_corpus_csv_is_deterministic():
    kw = dict(ratio_samples=30, share_samples=10, q_bound_samples=10, uniform_graphs=5)
    a = verify_constants(seed=3, **kw).to_csv()
    assert a == verify_constants(seed=3, **kw).to_csv()
    assert a.splitlines()[0] == "check,sample,value,bound,pass"
