import inspect
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from netregret import graph as gr
from netregret.agents import (
    AgentState,
    CliqueCoverPolicy,
    Oblivious,
    agent_predict,
    agent_update,
    feedback_recipients,
    recipient_matrix,
)
from netregret.errors import UnsupportedConfigurationError, ValidationError
from netregret.geometry import Geometry, LossSpec

from conftest import graphs

E1 = math.exp(-1)
SIMPLEX2 = Geometry.simplex(2)


def test_oblivious_recipients_on_star():
    g = gr.star(6)
    assert feedback_recipients(g, {0}, Oblivious()) == frozenset(range(6))
    assert feedback_recipients(g, {4}, Oblivious()) == frozenset({0, 4})
    assert feedback_recipients(g, set(), Oblivious()) == frozenset()
    assert feedback_recipients(g, {2, 4}, Oblivious()) == frozenset({0, 2, 4})


def test_clique_cover_recipients_on_star():
    g = gr.star(10)
    policy = CliqueCoverPolicy(gr.greedy_clique_cover(g))
    assert feedback_recipients(g, {0}, policy) == frozenset({0, 1})
    assert feedback_recipients(g, {2}, policy) == frozenset({2})
    with pytest.raises(UnsupportedConfigurationError):
        feedback_recipients(g, {2, 3}, policy)


def test_fresh_prediction_is_uniform():
    np.testing.assert_array_equal(agent_predict(AgentState.fresh(2, 1.0), SIMPLEX2), [0.5, 0.5])
    with pytest.raises(ValidationError):
        AgentState.fresh(2, 0.0)


def test_one_step_update():
    s = agent_update(AgentState.fresh(2, 1.0), LossSpec.linear_simplex([0, 1]), SIMPLEX2)
    assert s.local_count == 1
    np.testing.assert_array_equal(s.theta, [0, -1])
    # the next prediction uses update index 2
    z = -1 / math.sqrt(2)
    np.testing.assert_allclose(agent_predict(s, SIMPLEX2), [1 / (1 + math.exp(z)), math.exp(z) / (1 + math.exp(z))])


def test_first_feedback_closed_form():
    s = AgentState(np.array([0.0, -1.0]), 0, 1.0)
    np.testing.assert_allclose(agent_predict(s, SIMPLEX2), [1 / (1 + E1), E1 / (1 + E1)], rtol=1e-14)


def test_quadratic_update_uses_own_prediction():
    geom = Geometry.ball(2)
    t = np.array([0.3, -0.2])
    s = AgentState(np.array([0.5, 0.5]), 3, 1.0)
    x = agent_predict(s, geom)
    s2 = agent_update(s, LossSpec.quadratic_ball(t), geom)
    np.testing.assert_allclose(s2.theta, s.theta - (x - t))


def test_update_is_pure():
    s = AgentState.fresh(2, 1.0)
    agent_update(s, LossSpec.linear_simplex([1, 0]), SIMPLEX2)
    assert s.local_count == 0 and not s.theta.any()


def test_update_has_no_access_to_active_set():
    assert list(inspect.signature(agent_update).parameters) == ["state", "loss", "geom"]


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), max_size=30))
def test_linear_update_accumulates(vectors):
    s = AgentState.fresh(2, 0.8)
    twin = AgentState.fresh(2, 0.8)
    for v in vectors:
        s = agent_update(s, LossSpec.linear_simplex(v), SIMPLEX2)
        twin = agent_update(twin, LossSpec.linear_simplex(v), SIMPLEX2)
    assert s.local_count == len(vectors)
    np.testing.assert_allclose(s.theta, -np.sum(np.asarray(vectors).reshape(-1, 2), axis=0), atol=1e-12)
    assert s.same_as(twin)
    np.testing.assert_array_equal(agent_predict(s, SIMPLEX2), agent_predict(twin, SIMPLEX2))


def _play(g, policy, schedule, losses, geom=SIMPLEX2):
    states = [AgentState.fresh(geom.dim, 1.0) for _ in range(g.n)]
    history = []
    for S, vec in zip(schedule, losses):
        for v in feedback_recipients(g, S, policy):
            states[v] = agent_update(states[v], LossSpec.linear_simplex(vec), geom)
        history.append(list(states))
    return history


rounds = st.integers(1, 40)


@given(st.integers(1, 7), st.data())
def test_complete_graph_agents_stay_identical(n, data):
    g = gr.complete(n)
    T = data.draw(rounds)
    schedule = [{data.draw(st.integers(0, n - 1))} for _ in range(T)]
    losses = [data.draw(st.tuples(st.sampled_from([0.0, 1.0]), st.sampled_from([0.0, 1.0]))) for _ in range(T)]
    for states in _play(g, Oblivious(), schedule, losses):
        assert all(s.same_as(states[0]) for s in states)


@given(graphs(max_n=8), st.data())
def test_clique_blocks_stay_coherent(g, data):
    policy = CliqueCoverPolicy(gr.greedy_clique_cover(g))
    T = data.draw(rounds)
    schedule = [{data.draw(st.integers(0, g.n - 1))} for _ in range(T)]
    losses = [(data.draw(st.floats(0, 1)), data.draw(st.floats(0, 1))) for _ in range(T)]
    for states in _play(g, policy, schedule, losses):
        for b in policy.cover.blocks:
            members = sorted(b)
            assert all(states[w].same_as(states[members[0]]) for w in members)


@given(st.integers(1, 6), st.data())
def test_edgeless_count_equals_activations(n, data):
    g = gr.edgeless(n)
    T = data.draw(rounds)
    schedule = [set(data.draw(st.lists(st.integers(0, n - 1), max_size=n))) for _ in range(T)]
    final = _play(g, Oblivious(), schedule, [(0.0, 1.0)] * T)[-1]
    for v in range(n):
        assert final[v].local_count == sum(v in S for S in schedule)


@given(graphs(max_n=8), st.data())
def test_recipient_matrix_matches_setwise(g, data):
    T = data.draw(st.integers(1, 20))
    active = np.array(data.draw(st.lists(st.lists(st.booleans(), min_size=g.n, max_size=g.n), min_size=T, max_size=T)))
    M = recipient_matrix(g, active, Oblivious())
    for t in range(T):
        expected = feedback_recipients(g, np.flatnonzero(active[t]).tolist(), Oblivious())
        assert set(np.flatnonzero(M[t]).tolist()) == expected
    policy = CliqueCoverPolicy(gr.greedy_clique_cover(g))
    single = np.zeros_like(active)
    for t in range(T):
        if active[t].any():
            single[t, np.flatnonzero(active[t])[0]] = True
    M = recipient_matrix(g, single, policy)
    for t in range(T):
        assert set(np.flatnonzero(M[t]).tolist()) == feedback_recipients(g, np.flatnonzero(single[t]).tolist(), policy)
