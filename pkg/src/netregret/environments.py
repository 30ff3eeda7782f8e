"""Environments: joint generators of active sets and loss functions.

Every environment owns a ``numpy.random.Generator`` (PCG64) seeded at
construction and hands out rounds on demand, either one at a time
(:meth:`Environment.next_round`) or as a vectorized block
(:meth:`Environment.sample`). ``with_seed`` returns a fresh instance with the
same parameters, which is how Monte Carlo replicates are built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import graph as gr
from .errors import ValidationError
from .geometry import BALL, LINEAR, QUADRATIC, SIMPLEX, Geometry, LossSpec

RNG_NAME = "numpy.PCG64"


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass
class RoundBlock:
    """``T`` consecutive rounds: ``active[t, v]`` flags v in S_t, ``losses[t]`` is the payload."""

    active: np.ndarray
    losses: np.ndarray
    loss_kind: str

    def __len__(self) -> int:
        return self.active.shape[0]

    def active_set(self, t: int) -> frozenset:
        return frozenset(np.flatnonzero(self.active[t]).tolist())

    def loss(self, t: int, lipschitz: float) -> LossSpec:
        return LossSpec(self.loss_kind, self.losses[t].copy(), lipschitz)


def _check_distribution(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size == 0:
        raise ValidationError("activation distribution must be a nonempty vector")
    if np.any(~np.isfinite(q)) or np.any(q < 0):
        raise ValidationError(f"activation distribution has negative or non-finite entries: {q}")
    if abs(q.sum() - 1.0) > 1e-12:
        raise ValidationError(f"activation distribution sums to {q.sum()!r}, not 1")
    return q


def _check_probabilities(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size == 0:
        raise ValidationError("activation probabilities must be a nonempty vector")
    if np.any(~np.isfinite(q)) or np.any(q < 0) or np.any(q > 1):
        raise ValidationError(f"activation probabilities must lie in [0, 1]: {q}")
    return q


def draw_single(q, rng: np.random.Generator) -> int:
    """One vertex drawn from the distribution ``q``."""
    q = _check_distribution(q)
    return int(rng.choice(q.size, p=q))


def draw_multi(q_vec, rng: np.random.Generator) -> frozenset:
    """Independent Bernoulli(q_v) activation of every vertex; may be empty."""
    q = _check_probabilities(q_vec)
    return frozenset(np.flatnonzero(rng.random(q.size) < q).tolist())


# --- activation models -----------------------------------------------------


@dataclass(frozen=True)
class SingleStochastic:
    """Exactly one vertex per round, i.i.d. from ``q``."""

    q: tuple

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(_check_distribution(self.q).tolist()))

    @classmethod
    def uniform(cls, n: int) -> "SingleStochastic":
        return cls(tuple([1.0 / n] * n))

    @property
    def n_agents(self) -> int:
        return len(self.q)

    single_activation = True

    def sample(self, T: int, rng, start: int = 0) -> np.ndarray:
        q = np.asarray(self.q)
        idx = rng.choice(q.size, size=T, p=q)
        active = np.zeros((T, q.size), dtype=bool)
        active[np.arange(T), idx] = True
        return active

    def describe(self) -> dict:
        return {"kind": "single_stochastic", "q": list(self.q)}


@dataclass(frozen=True)
class MultiStochastic:
    """Every vertex independently active with probability ``q[v]``."""

    q: tuple

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(_check_probabilities(self.q).tolist()))

    @property
    def n_agents(self) -> int:
        return len(self.q)

    single_activation = False

    def sample(self, T: int, rng, start: int = 0) -> np.ndarray:
        return rng.random((T, len(self.q))) < np.asarray(self.q)

    def describe(self) -> dict:
        return {"kind": "multi_stochastic", "q": list(self.q)}


class Schedule:
    """Explicit, replayable sequence of active sets."""

    def __init__(self, n_agents: int, sets: Sequence[Sequence[int]]):
        self.n_agents = n_agents
        self.sets = [frozenset(int(v) for v in s) for s in sets]
        for t, s in enumerate(self.sets):
            bad = [v for v in s if not 0 <= v < n_agents]
            if bad:
                raise ValidationError(f"schedule round {t}: vertices {bad} outside 0..{n_agents - 1}")
        self.single_activation = all(len(s) <= 1 for s in self.sets)

    def sample(self, T: int, rng=None, start: int = 0) -> np.ndarray:
        if start + T > len(self.sets):
            raise ValidationError(f"schedule has {len(self.sets)} rounds; {start + T} requested")
        active = np.zeros((T, self.n_agents), dtype=bool)
        for i, s in enumerate(self.sets[start:start + T]):
            active[i, sorted(s)] = True
        return active

    def describe(self) -> dict:
        return {"kind": "schedule", "rounds": len(self.sets)}


# --- loss generators --------------------------------------------------------


@dataclass(frozen=True)
class BernoulliLosses:
    """I.i.d. loss vectors with independent Bernoulli(means[i]) coordinates."""

    means: tuple

    def __post_init__(self):
        m = np.asarray(self.means, dtype=float)
        if m.ndim != 1 or m.size == 0 or np.any(m < 0) or np.any(m > 1):
            raise ValidationError(f"Bernoulli means must be a nonempty vector in [0, 1]: {self.means}")
        object.__setattr__(self, "means", tuple(m.tolist()))

    @classmethod
    def fair(cls, dim: int) -> "BernoulliLosses":
        return cls(tuple([0.5] * dim))

    @classmethod
    def with_gap(cls, dim: int, gap: float, good: int = 0) -> "BernoulliLosses":
        """Coordinate ``good`` has mean ``1/2 - gap``; the others have mean 1/2."""
        if not 0 <= gap <= 0.5:
            raise ValidationError(f"gap must lie in [0, 1/2], got {gap}")
        m = [0.5] * dim
        m[good] = 0.5 - gap
        return cls(tuple(m))

    kind = LINEAR

    @property
    def dim(self) -> int:
        return len(self.means)

    @property
    def good_action(self):
        m = np.asarray(self.means)
        best = np.flatnonzero(m == m.min())
        return int(best[0]) if best.size == 1 else None

    def sample(self, T: int, rng, start: int = 0) -> np.ndarray:
        return (rng.random((T, self.dim)) < np.asarray(self.means)).astype(float)

    def lipschitz(self, geom: Geometry) -> float:
        return 1.0 if geom.kind == SIMPLEX else math.sqrt(self.dim)

    def describe(self) -> dict:
        return {"kind": "bernoulli", "means": list(self.means)}


class FixedLosses:
    """A fixed sequence of loss payloads, cycled (or replayed once with ``cycle=False``)."""

    def __init__(self, vectors, kind: str = LINEAR, cycle: bool = True):
        v = np.asarray(vectors, dtype=float)
        if v.ndim != 2 or v.shape[0] == 0:
            raise ValidationError("fixed loss sequence must be a nonempty (k, d) array")
        if not np.all(np.isfinite(v)):
            raise ValidationError("fixed loss sequence contains non-finite values")
        if kind not in (LINEAR, QUADRATIC):
            raise ValidationError(f"unknown loss kind {kind!r}")
        self.vectors = v
        self.kind = kind
        self.cycle = cycle

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    good_action = None

    def sample(self, T: int, rng=None, start: int = 0) -> np.ndarray:
        k = self.vectors.shape[0]
        if not self.cycle and start + T > k:
            raise ValidationError(f"loss sequence has {k} rounds; {start + T} requested")
        return self.vectors[(start + np.arange(T)) % k].copy()

    def lipschitz(self, geom: Geometry) -> float:
        if self.kind == QUADRATIC:
            return geom.radius + float(np.max(np.linalg.norm(self.vectors, axis=1)))
        if geom.kind == SIMPLEX:
            return max(float(np.max(np.abs(self.vectors))), 1e-300)
        return max(float(np.max(np.linalg.norm(self.vectors, axis=1))), 1e-300)

    def describe(self) -> dict:
        return {"kind": "fixed", "loss_kind": self.kind, "vectors": self.vectors.tolist(), "cycle": self.cycle}


# --- environments -----------------------------------------------------------


class Environment:
    """Base class. Subclasses set ``n_agents``, ``dim``, ``loss_kind`` and
    ``single_activation`` and implement ``sample``, ``with_seed`` and ``lipschitz``.
    """

    n_agents: int
    dim: int
    loss_kind: str = LINEAR
    single_activation: bool = True
    good_action = None
    activation_kind = "adversarial"
    activation_q = None

    def __init__(self, seed):
        self.seed = seed
        self.rng = make_rng(seed)

    def sample(self, T: int) -> RoundBlock:
        raise NotImplementedError

    def with_seed(self, seed) -> "Environment":
        raise NotImplementedError

    def lipschitz(self, geom: Geometry) -> float:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError

    def next_round(self, geom: Geometry | None = None) -> tuple[frozenset, LossSpec]:
        block = self.sample(1)
        L = self.lipschitz(geom) if geom is not None else float("nan")
        return block.active_set(0), block.loss(0, L)

    def check_geometry(self, geom: Geometry) -> None:
        if geom.dim != self.dim:
            raise ValidationError(f"environment emits {self.dim}-dimensional losses, geometry has d={geom.dim}")
        if self.loss_kind == QUADRATIC and geom.kind != BALL:
            raise ValidationError("quadratic losses are only defined on the ball geometry")


class ComposedEnvironment(Environment):
    """An activation model paired with an independent loss generator."""

    def __init__(self, activation, losses, seed=0):
        super().__init__(seed)
        self.activation = activation
        self.losses = losses
        self.n_agents = activation.n_agents
        self.dim = losses.dim
        self.loss_kind = losses.kind
        self.single_activation = activation.single_activation
        self.good_action = losses.good_action
        if isinstance(activation, (SingleStochastic, MultiStochastic)):
            self.activation_kind = activation.describe()["kind"]
            self.activation_q = activation.q
        self._t = 0
        if activation.n_agents < 1:
            raise ValidationError("environment needs at least one agent")

    def with_seed(self, seed) -> "ComposedEnvironment":
        return ComposedEnvironment(self.activation, self.losses, seed)

    def sample(self, T: int) -> RoundBlock:
        active = self.activation.sample(T, self.rng, self._t)
        losses = self.losses.sample(T, self.rng, self._t)
        self._t += T
        return RoundBlock(active, losses, self.loss_kind)

    def lipschitz(self, geom: Geometry) -> float:
        return self.losses.lipschitz(geom)

    def describe(self) -> dict:
        return {"kind": "composed", "activation": self.activation.describe(), "losses": self.losses.describe()}


class IndependentSetLB(Environment):
    """Activation uniform over a greedy maximal independent set; two-action losses.

    Each loss coordinate is an independent Bernoulli draw. With ``gap = 0`` both
    have mean 1/2. A positive ``gap`` lowers the mean of a good action, drawn
    once per instance, to ``1/2 - gap``; choosing ``gap ~ sqrt(alpha / T)`` gives
    the classical two-action hard instance for every agent of the set.
    """

    dim = 2
    activation_kind = "single_stochastic"

    def __init__(self, graph: gr.Graph, seed=0, gap: float = 0.0):
        super().__init__(seed)
        if not 0 <= gap <= 0.5:
            raise ValidationError(f"gap must lie in [0, 1/2], got {gap}")
        self.graph = graph
        self.gap = float(gap)
        self.independent_set = tuple(sorted(gr.maximal_independent_set(graph)))
        self.n_agents = graph.n
        q = np.zeros(graph.n)
        q[list(self.independent_set)] = 1.0 / len(self.independent_set)
        self.activation_q = tuple(q.tolist())
        self.good_action = int(self.rng.integers(2))
        means = [0.5, 0.5]
        means[self.good_action] = 0.5 - self.gap
        self.means = tuple(means)

    def with_seed(self, seed) -> "IndependentSetLB":
        return IndependentSetLB(self.graph, seed, self.gap)

    def sample(self, T: int) -> RoundBlock:
        A = np.asarray(self.independent_set)
        who = A[self.rng.integers(A.size, size=T)]
        active = np.zeros((T, self.n_agents), dtype=bool)
        active[np.arange(T), who] = True
        losses = (self.rng.random((T, 2)) < np.asarray(self.means)).astype(float)
        return RoundBlock(active, losses, LINEAR)

    def lipschitz(self, geom: Geometry) -> float:
        return 1.0 if geom.kind == SIMPLEX else math.sqrt(2.0)

    def describe(self) -> dict:
        return {"kind": "independent_set_lb", "n": self.graph.n, "edges": sorted(self.graph.edges), "gap": self.gap}


def independent_set_lb_round(env: IndependentSetLB, rng) -> tuple[frozenset, LossSpec]:
    A = env.independent_set
    v = A[int(rng.integers(len(A)))]
    vec = (rng.random(2) < np.asarray(env.means)).astype(float)
    return frozenset([v]), LossSpec.linear_simplex(vec)


class StarAdversary(Environment):
    """Oblivious adversary on a star with center 0 that forces linear regret.

    Per round, with good action ``J`` (fixed per instance) and losses written
    as ``(loss of J, loss of the other action)``:

    ============================  ================================  ==================
    loss                          active agent                      probability
    ============================  ================================  ==================
    (0, 1)                        uniform peripheral                1/2
    (1, 0)                        center                            eps/(N-1)
    (1, 0)                        uniform peripheral                1/2 - eps
    (0, 0)                        uniform peripheral                eps - eps/(N-1)
    ============================  ================================  ==================

    Requires ``N >= 4`` and ``0 < eps <= 1/2``.
    """

    dim = 2

    def __init__(self, n: int, epsilon: float = 0.5, seed=0):
        if n < 4:
            raise ValidationError(f"star adversary needs N >= 4, got {n}")
        if not 0 < epsilon <= 0.5:
            raise ValidationError(f"epsilon must lie in (0, 1/2], got {epsilon}")
        super().__init__(seed)
        self.n_agents = n
        self.epsilon = float(epsilon)
        self.graph = gr.star(n)
        self.good_action = int(self.rng.integers(2))

    def with_seed(self, seed) -> "StarAdversary":
        return StarAdversary(self.n_agents, self.epsilon, seed)

    @property
    def event_probabilities(self) -> tuple[float, float, float, float]:
        """Probabilities of the four events, in table order."""
        eps, n = self.epsilon, self.n_agents
        return 0.5, eps / (n - 1), 0.5 - eps, eps - eps / (n - 1)

    def _thresholds(self) -> np.ndarray:
        return np.cumsum(self.event_probabilities[:3])

    def _orient(self, pairs: np.ndarray) -> np.ndarray:
        # columns arrive as (good, bad); reorder to action indices
        return pairs if self.good_action == 0 else pairs[:, ::-1].copy()

    def sample(self, T: int) -> RoundBlock:
        u = self.rng.random(T)
        peripheral = self.rng.integers(1, self.n_agents, size=T)
        event = np.searchsorted(self._thresholds(), u, side="right")
        who = np.where(event == 1, 0, peripheral)
        pairs = np.zeros((T, 2))
        pairs[event == 0, 1] = 1.0
        pairs[(event == 1) | (event == 2), 0] = 1.0
        active = np.zeros((T, self.n_agents), dtype=bool)
        active[np.arange(T), who] = True
        return RoundBlock(active, self._orient(pairs), LINEAR)

    def lipschitz(self, geom: Geometry) -> float:
        return 1.0

    def describe(self) -> dict:
        return {"kind": "star_adversary", "n": self.n_agents, "epsilon": self.epsilon}


def star_adversary_round(env: StarAdversary, rng) -> tuple[frozenset, LossSpec]:
    u = rng.random()
    event = int(np.searchsorted(env._thresholds(), u, side="right"))
    v = 0 if event == 1 else int(rng.integers(1, env.n_agents))
    pair = np.array([[0.0, 1.0], [1.0, 0.0], [1.0, 0.0], [0.0, 0.0]][event])
    return frozenset([v]), LossSpec.linear_simplex(env._orient(pair[None, :])[0])


# --- schedule files ---------------------------------------------------------


class ReplayEnvironment(ComposedEnvironment):
    """Deterministic replay of an explicit schedule and loss sequence."""

    def __init__(self, schedule: Schedule, losses: FixedLosses, seed=0, source: str | None = None):
        super().__init__(schedule, losses, seed)
        self.source = source

    @property
    def rounds(self) -> int:
        return len(self.activation.sets)

    def with_seed(self, seed) -> "ReplayEnvironment":
        return ReplayEnvironment(self.activation, self.losses, seed, self.source)

    def describe(self) -> dict:
        d = {"kind": "schedule", "rounds": self.rounds}
        if self.source is not None:
            d["path"] = self.source
        return d


def schedule_from_file(path: str | Path) -> ReplayEnvironment:
    """Load a schedule file.

    Format: header ``T N d``; then one line per round,
    ``k v1 ... vk | c1 ... cd``. Lines starting with ``#`` are comments.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"schedule file not found: {path}")
    header = None
    sets: list[list[int]] = []
    vectors: list[list[float]] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        where = f"{path}:{lineno}"
        if header is None:
            try:
                T, N, d = (int(x) for x in line.split())
            except ValueError:
                raise ValidationError(f"{where}: expected header 'T N d', got {raw!r}") from None
            header = (T, N, d)
            continue
        T, N, d = header
        if "|" not in line:
            raise ValidationError(f"{where}: missing '|' separator")
        left, right = line.split("|", 1)
        try:
            ids = [int(x) for x in left.split()]
            coords = [float(x) for x in right.split()]
        except ValueError:
            raise ValidationError(f"{where}: malformed round line {raw!r}") from None
        if not ids or ids[0] != len(ids) - 1:
            raise ValidationError(f"{where}: active-set count does not match the listed vertices")
        members = ids[1:]
        if any(not 0 <= v < N for v in members):
            raise ValidationError(f"{where}: vertex out of range 0..{N - 1}")
        if len(coords) != d:
            raise ValidationError(f"{where}: expected {d} loss coordinates, got {len(coords)}")
        if any(not 0.0 <= c <= 1.0 for c in coords):
            raise ValidationError(f"{where}: loss coordinates must lie in [0, 1]")
        sets.append(members)
        vectors.append(coords)
    if header is None:
        raise ValidationError(f"{path}: missing header 'T N d'")
    T, N, d = header
    if len(sets) != T:
        raise ValidationError(f"{path}: header declares {T} rounds but {len(sets)} follow")
    if T == 0:
        raise ValidationError(f"{path}: schedule has no rounds")
    return ReplayEnvironment(Schedule(N, sets), FixedLosses(vectors, LINEAR, cycle=False), source=str(path))


def write_schedule(path: str | Path, active: np.ndarray, losses: np.ndarray) -> None:
    """Write rounds in the schedule format; floats use ``repr`` so they round-trip exactly."""
    T, N = active.shape
    d = losses.shape[1]
    lines = [f"{T} {N} {d}"]
    for t in range(T):
        members = np.flatnonzero(active[t]).tolist()
        left = " ".join(str(x) for x in [len(members)] + members)
        right = " ".join(repr(float(c)) for c in losses[t])
        lines.append(f"{left} | {right}")
    Path(path).write_text("\n".join(lines) + "\n")
