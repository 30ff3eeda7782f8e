"""OMD agent instances and feedback routing.

An agent only ever sees the loss functions routed to it. ``agent_update``
deliberately takes no active-set argument: under the oblivious interface an
instance cannot tell paid feedback from free feedback.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import NumericError, UnsupportedConfigurationError, ValidationError
from .geometry import Geometry, LossSpec, loss_gradient, mirror_map
from .graph import CliqueCover, Graph, closed_neighborhood


@dataclass(frozen=True)
class AgentState:
    theta: np.ndarray
    local_count: int
    eta: float

    @classmethod
    def fresh(cls, dim: int, eta: float) -> "AgentState":
        if not eta > 0:
            raise ValidationError(f"learning rate must be positive, got {eta}")
        return cls(np.zeros(dim), 0, float(eta))

    def same_as(self, other: "AgentState") -> bool:
        return self.local_count == other.local_count and np.array_equal(self.theta, other.theta)


@dataclass(frozen=True)
class Oblivious:
    """Update on every received feedback; no knowledge of the graph."""

    name = "oblivious"

    def validate(self, g: Graph) -> None:
        pass

    def describe(self) -> dict:
        return {"kind": "oblivious"}


@dataclass(frozen=True)
class CliqueCoverPolicy:
    """Accept feedback only from the active agent's own block of ``cover``."""

    cover: CliqueCover
    name = "clique_cover"

    def validate(self, g: Graph) -> None:
        self.cover.validate(g)

    def describe(self) -> dict:
        return {"kind": "clique_cover", "blocks": [sorted(b) for b in self.cover.blocks]}


def feedback_recipients(g: Graph, active: Iterable[int], policy) -> frozenset:
    """Agents that receive this round's loss, each listed once."""
    active = frozenset(active)
    if isinstance(policy, CliqueCoverPolicy):
        if len(active) > 1:
            raise UnsupportedConfigurationError(
                f"clique-cover interface needs at most one active agent per round, got {sorted(active)}"
            )
        if not active:
            return frozenset()
        (v,) = active
        return policy.cover.block_of(v)
    out: set = set()
    for v in active:
        out |= closed_neighborhood(g, v)
    return frozenset(out)


def recipient_matrix(g: Graph, active: np.ndarray, policy) -> np.ndarray:
    """Vectorized :func:`feedback_recipients` over a ``(T, n)`` activity matrix."""
    if isinstance(policy, CliqueCoverPolicy):
        counts = active.sum(axis=1)
        if np.any(counts > 1):
            t = int(np.flatnonzero(counts > 1)[0])
            raise UnsupportedConfigurationError(
                f"clique-cover interface needs at most one active agent per round (round {t} has {int(counts[t])})"
            )
        labels = policy.cover.labels(g.n)
        who = active.argmax(axis=1)
        return (labels[None, :] == labels[who][:, None]) & (counts[:, None] > 0)
    closed = g.closed_adjacency.astype(np.int32)
    return (active.astype(np.int32) @ closed) > 0


def agent_predict(state: AgentState, geom: Geometry) -> np.ndarray:
    """Prediction with the regularizer indexed by the next update, ``local_count + 1``."""
    return mirror_map(geom, state.theta, state.eta, state.local_count + 1)


def agent_update(state: AgentState, loss: LossSpec, geom: Geometry) -> AgentState:
    """Subtract the gradient taken at this agent's own current prediction."""
    x = agent_predict(state, geom)
    grad = loss_gradient(loss, x)
    if not np.all(np.isfinite(grad)):
        raise NumericError(f"non-finite gradient {grad} at prediction {x}")
    return AgentState(state.theta - grad, state.local_count + 1, state.eta)
