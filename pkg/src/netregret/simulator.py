"""The cooperative protocol loop, network regret, and Monte Carlo replication.

Each round: the environment reveals ``S_t`` and ``l_t``; every active agent
predicts from its pre-round state; the system pays the average loss of the
active agents (0 when nobody is active); every feedback recipient then
performs exactly one update.

Two engines implement the loop. ``reference`` walks rounds one by one
through :mod:`netregret.agents`. ``vectorized`` is used for linear losses:
an agent's dual vector is minus the running sum of the loss vectors routed to
it, so all its predictions follow from one cumulative sum. Both engines
accumulate the dual vectors in the same order.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from . import graph as gr
from .agents import (
    AgentState,
    CliqueCoverPolicy,
    Oblivious,
    agent_predict,
    agent_update,
    feedback_recipients,
    recipient_matrix,
)
from .environments import RNG_NAME, Environment, RoundBlock
from .errors import NumericError, SimulationError, UnsupportedConfigurationError, ValidationError
from .geometry import (
    BALL,
    LINEAR,
    SIMPLEX,
    Geometry,
    LossSpec,
    linear_values,
    loss_value,
    mirror_map_batch,
    theory_bound,
    tuned_eta,
)

REALIZED = "realized"
GOOD_ACTION = "good_action"


@dataclass(frozen=True)
class RoundRecord:
    t: int
    active_set: tuple
    agent_losses: dict
    system_loss: float
    recipients: tuple
    loss: np.ndarray


@dataclass
class SimulationTrace:
    """Columnar record of one run. ``rounds`` materializes :class:`RoundRecord` objects."""

    config: dict
    graph: gr.Graph
    geometry: Geometry
    policy: object
    eta: float
    lipschitz: float
    seed: object
    loss_kind: str
    active: np.ndarray
    losses: np.ndarray
    recipients: np.ndarray
    act_t: np.ndarray
    act_v: np.ndarray
    act_pred: np.ndarray
    act_loss: np.ndarray
    system_loss: np.ndarray
    good_action: int | None = None
    environment: Environment | None = None

    @property
    def T(self) -> int:
        return self.active.shape[0]

    def __len__(self) -> int:
        return self.T

    @property
    def cumulative_loss(self) -> np.ndarray:
        return np.cumsum(self.system_loss)

    @property
    def total_loss(self) -> float:
        return math.fsum(self.system_loss)

    def record(self, i: int) -> RoundRecord:
        sel = self.act_t == i
        return RoundRecord(
            t=i + 1,
            active_set=tuple(np.flatnonzero(self.active[i]).tolist()),
            agent_losses={int(v): float(x) for v, x in zip(self.act_v[sel], self.act_loss[sel])},
            system_loss=float(self.system_loss[i]),
            recipients=tuple(np.flatnonzero(self.recipients[i]).tolist()),
            loss=self.losses[i],
        )

    @property
    def rounds(self):
        return (self.record(i) for i in range(self.T))

    def predictions(self, v: int) -> np.ndarray:
        """Predictions agent ``v`` made while active, one row per active round."""
        return self.act_pred[self.act_v == v]


def _resolve_eta(eta, geom: Geometry, L: float) -> float:
    if isinstance(eta, str):
        if eta != "tuned":
            raise ValidationError(f"eta must be a positive number or 'tuned', got {eta!r}")
        return tuned_eta(geom.D, geom.sigma, L)
    eta = float(eta)
    if not eta > 0:
        raise ValidationError(f"learning rate must be positive, got {eta}")
    return eta


def _validate(graph: gr.Graph, geom: Geometry, policy, env: Environment) -> None:
    if env.n_agents != graph.n:
        raise ValidationError(f"environment has {env.n_agents} agents, graph has {graph.n} vertices")
    env.check_geometry(geom)
    policy.validate(graph)
    if isinstance(policy, CliqueCoverPolicy) and not env.single_activation:
        raise UnsupportedConfigurationError("clique-cover interface requires a single-activation environment")


def _system_loss(T: int, active: np.ndarray, act_t: np.ndarray, act_loss: np.ndarray) -> np.ndarray:
    sums = np.zeros(T)
    np.add.at(sums, act_t, act_loss)
    counts = active.sum(axis=1)
    nz = counts > 0
    sums[nz] = sums[nz] / counts[nz]
    return sums


def _run_vectorized(geom, eta, block: RoundBlock, recipients: np.ndarray):
    T, n = block.active.shape
    ts, vs, preds, vals = [], [], [], []
    for v in range(n):
        if not block.active[:, v].any():
            continue
        idx = np.flatnonzero(recipients[:, v])
        G = block.losses[idx]
        theta = np.zeros_like(G)
        if idx.size > 1:
            # 0 - S rather than -S: repeated subtraction from +0 never yields -0
            theta[1:] = 0.0 - np.cumsum(G[:-1], axis=0)
        P = mirror_map_batch(geom, theta, eta, np.arange(1, idx.size + 1))
        if not np.all(np.isfinite(P)):
            bad = int(idx[np.flatnonzero(~np.all(np.isfinite(P), axis=1))[0]])
            raise SimulationError(f"non-finite prediction for agent {v}", round_index=bad)
        sel = block.active[idx, v]
        ts.append(idx[sel])
        vs.append(np.full(int(sel.sum()), v))
        preds.append(P[sel])
        vals.append(linear_values(G[sel], P[sel]))
    d = block.losses.shape[1]
    if ts:
        act_t = np.concatenate(ts)
        act_v = np.concatenate(vs)
        act_pred = np.concatenate(preds)
        act_loss = np.concatenate(vals)
        order = np.lexsort((act_v, act_t))
        act_t, act_v, act_pred, act_loss = act_t[order], act_v[order], act_pred[order], act_loss[order]
    else:
        act_t = act_v = np.zeros(0, dtype=np.int64)
        act_pred = np.zeros((0, d))
        act_loss = np.zeros(0)
    return act_t, act_v, act_pred, act_loss


def _run_reference(graph, geom, policy, eta, L, block: RoundBlock, check_coherence: bool):
    T, n = block.active.shape
    states = [AgentState.fresh(geom.dim, eta) for _ in range(n)]
    recipients = np.zeros((T, n), dtype=bool)
    ts, vs, preds, vals = [], [], [], []
    blocks = policy.cover.blocks if isinstance(policy, CliqueCoverPolicy) else ()
    for t in range(T):
        try:
            S = np.flatnonzero(block.active[t]).tolist()
            loss = LossSpec(block.loss_kind, block.losses[t], L)
            for v in S:
                x = agent_predict(states[v], geom)
                ts.append(t)
                vs.append(v)
                preds.append(x)
                vals.append(loss_value(loss, x))
            rec = sorted(feedback_recipients(graph, S, policy))
            recipients[t, rec] = True
            updated = {v: agent_update(states[v], loss, geom) for v in rec}
            for v, st in updated.items():
                states[v] = st
        except (ValidationError, NumericError) as exc:
            raise SimulationError(str(exc), round_index=t) from exc
        if check_coherence:
            for b in blocks:
                members = sorted(b)
                head = states[members[0]]
                for w in members[1:]:
                    if not states[w].same_as(head):
                        raise SimulationError(
                            f"clique coherence violated: agents {members[0]} and {w} diverged", round_index=t
                        )
    d = geom.dim
    act_t = np.asarray(ts, dtype=np.int64)
    act_v = np.asarray(vs, dtype=np.int64)
    act_pred = np.asarray(preds, dtype=float).reshape(-1, d)
    act_loss = np.asarray(vals, dtype=float)
    return recipients, act_t, act_v, act_pred, act_loss


def run_simulation(
    graph: gr.Graph,
    geometry: Geometry,
    policy,
    environment: Environment,
    eta,
    T: int,
    seed,
    engine: str = "auto",
    check_coherence: bool = False,
) -> SimulationTrace:
    """Run ``T`` rounds of the protocol with a fresh copy of ``environment`` seeded by ``seed``.

    ``eta`` is a positive float or ``"tuned"``. ``engine`` is ``auto``,
    ``reference`` or ``vectorized``; ``auto`` picks the vectorized engine for
    linear losses. ``check_coherence`` (reference engine only) asserts after
    every round that agents sharing a clique-cover block hold identical state.
    """
    if T < 0:
        raise ValidationError(f"horizon must be nonnegative, got {T}")
    _validate(graph, geometry, policy, environment)
    env = environment.with_seed(seed)
    L = env.lipschitz(geometry)
    eta_value = _resolve_eta(eta, geometry, L)
    if engine not in ("auto", "reference", "vectorized"):
        raise ValidationError(f"unknown engine {engine!r}")
    if engine == "vectorized" and env.loss_kind != LINEAR:
        raise UnsupportedConfigurationError("vectorized engine handles linear losses only")
    if engine == "auto":
        engine = "vectorized" if env.loss_kind == LINEAR and not check_coherence else "reference"
    if check_coherence and engine != "reference":
        raise UnsupportedConfigurationError("coherence checks run on the reference engine")

    block = env.sample(T) if T > 0 else RoundBlock(
        np.zeros((0, graph.n), dtype=bool), np.zeros((0, geometry.dim)), env.loss_kind
    )
    if engine == "vectorized":
        recipients = recipient_matrix(graph, block.active, policy)
        act_t, act_v, act_pred, act_loss = _run_vectorized(geometry, eta_value, block, recipients)
    else:
        recipients, act_t, act_v, act_pred, act_loss = _run_reference(
            graph, geometry, policy, eta_value, L, block, check_coherence
        )
    config = {
        "graph": {"n": graph.n, "m": graph.m},
        "geometry": {"kind": geometry.kind, "dim": geometry.dim, "radius": geometry.radius},
        "policy": policy.describe(),
        "environment": env.describe(),
        "eta": eta_value,
        "seed": seed if isinstance(seed, int) else repr(seed),
        "rng": RNG_NAME,
        "engine": engine,
    }
    return SimulationTrace(
        config=config,
        graph=graph,
        geometry=geometry,
        policy=policy,
        eta=eta_value,
        lipschitz=L,
        seed=seed,
        loss_kind=env.loss_kind,
        active=block.active,
        losses=block.losses,
        recipients=recipients,
        act_t=act_t,
        act_v=act_v,
        act_pred=act_pred,
        act_loss=act_loss,
        system_loss=_system_loss(T, block.active, act_t, act_loss),
        good_action=env.good_action,
        environment=env,
    )


def _project_ball(x: np.ndarray, radius: float) -> np.ndarray:
    nrm = float(np.linalg.norm(x))
    return x if nrm <= radius else x * (radius / nrm)


def comparator_loss(losses: np.ndarray, geometry: Geometry, loss_kind: str = LINEAR) -> float:
    """Best fixed decision in hindsight, over every round including empty ones."""
    losses = np.asarray(losses, dtype=float)
    if losses.shape[0] == 0:
        return 0.0
    if loss_kind == LINEAR:
        total = np.array([math.fsum(col) for col in losses.T])
        if geometry.kind == SIMPLEX:
            return float(total.min())
        return -geometry.radius * float(np.linalg.norm(total))
    # sum of |x - t_i|^2 / 2 is T/2 |x - mean|^2 + const: the minimizer is the projected mean
    mean = np.array([math.fsum(col) for col in losses.T]) / losses.shape[0]
    x = _project_ball(mean, geometry.radius)
    return 0.5 * math.fsum(np.sum((losses - x) ** 2, axis=1))


def graph_constants(graph: gr.Graph, policy, environment: Environment, exact_limit: int = gr.EXACT_ALPHA_LIMIT) -> dict:
    """Independence number, greedy clique-cover size and (when defined) the Q constant."""
    alpha = gr.independence_number_exact(graph) if graph.n <= exact_limit else None
    if isinstance(policy, CliqueCoverPolicy):
        cover_size = len(policy.cover)
    else:
        cover_size = len(gr.greedy_clique_cover(graph))
    Q = None
    if environment.activation_kind == "multi_stochastic":
        Q = analysis.q_constant(analysis.ActivationProfile(graph, environment.activation_q))
    return {"alpha": alpha, "cover_size": cover_size, "Q": Q}


def applicable_multiplier(graph: gr.Graph, policy, environment: Environment, constants: dict):
    """Which multiplier the theory attaches to this configuration, or ``(None, None)``."""
    if graph.n == 1:
        return "single", 1.0
    if isinstance(policy, CliqueCoverPolicy):
        return "cover_size", float(constants["cover_size"])
    kind = environment.activation_kind
    if kind == "single_stochastic" and constants["alpha"] is not None:
        return "alpha", float(constants["alpha"])
    if kind == "multi_stochastic" and constants["Q"] is not None and constants["Q"] > 0:
        return "Q", float(constants["Q"])
    return None, None


@dataclass
class RegretReport:
    T: int
    regret: float
    total_loss: float
    comparator_loss: float
    comparator: str
    eta: float
    D: float
    sigma: float
    L: float
    multiplier_kind: str | None
    multiplier: float | None
    theory_bound: float | None
    bounds: dict = field(default_factory=dict)


def _bounds(geom, L, eta, T, constants) -> dict:
    out = {}
    for key in ("alpha", "cover_size", "Q"):
        m = constants.get(key)
        out[key] = theory_bound(geom.D, geom.sigma, L, eta, m, T) if m and T > 0 else None
    return out


def network_regret(trace: SimulationTrace, geometry: Geometry | None = None, comparator: str = REALIZED,
                   constants: dict | None = None) -> RegretReport:
    """Total system loss minus the comparator's loss, with theory bounds attached.

    ``comparator`` is ``realized`` (best fixed decision in hindsight) or
    ``good_action`` (the environment's designated good action, for lower-bound
    environments on the simplex).
    """
    geom = geometry or trace.geometry
    if comparator == REALIZED:
        comp = comparator_loss(trace.losses, geom, trace.loss_kind)
    elif comparator == GOOD_ACTION:
        if trace.good_action is None or geom.kind != SIMPLEX or trace.loss_kind != LINEAR:
            raise ValidationError("good-action comparator needs a linear simplex environment with a good action")
        comp = math.fsum(trace.losses[:, trace.good_action])
    else:
        raise ValidationError(f"unknown comparator {comparator!r}")
    if constants is None:
        constants = graph_constants(trace.graph, trace.policy, trace.environment)
    kind, mult = applicable_multiplier(trace.graph, trace.policy, trace.environment, constants)
    T = trace.T
    bound = theory_bound(geom.D, geom.sigma, trace.lipschitz, trace.eta, mult, T) if mult and T > 0 else (
        0.0 if mult and T == 0 else None
    )
    total = trace.total_loss
    return RegretReport(
        T=T,
        regret=total - comp,
        total_loss=total,
        comparator_loss=comp,
        comparator=comparator,
        eta=trace.eta,
        D=geom.D,
        sigma=geom.sigma,
        L=trace.lipschitz,
        multiplier_kind=kind,
        multiplier=mult,
        theory_bound=bound,
        bounds=_bounds(geom, trace.lipschitz, trace.eta, T, constants),
    )


# --- Monte Carlo ------------------------------------------------------------


@dataclass
class Experiment:
    """Everything a run needs except the horizon and the seed."""

    graph: gr.Graph
    geometry: Geometry
    policy: object
    environment: Environment
    eta: object = "tuned"
    comparator: str = REALIZED


def replicate_seed(master_seed: int, replicate: int) -> int:
    """Seed of replicate ``r``: first 64-bit word of ``SeedSequence(master_seed, spawn_key=(r,))``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(replicate),))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class MonteCarloReport:
    T: int
    replicates: int
    master_seed: int
    regrets: tuple
    mean: float
    se: float
    min: float
    max: float
    eta: float
    multiplier_kind: str | None
    multiplier: float | None
    theory_bound: float | None
    bounds: dict
    constants: dict
    comparator: str
    note: str = (
        "regret uses the per-replicate realized comparator; its mean upper-bounds "
        "sup_x E[R_T(x)]"
    )

    @property
    def within_bound(self) -> bool | None:
        if self.theory_bound is None:
            return None
        return self.mean <= self.theory_bound + 3.0 * self.se


def summarize(values) -> tuple[float, float]:
    """Mean and standard error with exactly rounded sums (order independent)."""
    vals = [float(v) for v in values]
    n = len(vals)
    mean = math.fsum(vals) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
    return mean, math.sqrt(var / n)


def monte_carlo(experiment: Experiment, T: int, replicates: int, master_seed: int,
                engine: str = "auto") -> MonteCarloReport:
    """Independent replicates with seeds :func:`replicate_seed` ``(master_seed, r)``."""
    if replicates < 1:
        raise ValidationError(f"replicates must be >= 1, got {replicates}")
    ex = experiment
    constants = graph_constants(ex.graph, ex.policy, ex.environment)
    regrets = []
    report = None
    for r in range(replicates):
        try:
            trace = run_simulation(ex.graph, ex.geometry, ex.policy, ex.environment, ex.eta, T,
                                   replicate_seed(master_seed, r), engine=engine)
            report = network_regret(trace, ex.geometry, ex.comparator, constants)
        except SimulationError as exc:
            raise SimulationError(exc.message, round_index=exc.round_index, replicate=r) from exc
        except (ValidationError, NumericError) as exc:
            raise SimulationError(str(exc), replicate=r) from exc
        regrets.append(report.regret)
    mean, se = summarize(regrets)
    return MonteCarloReport(
        T=T,
        replicates=replicates,
        master_seed=master_seed,
        regrets=tuple(regrets),
        mean=mean,
        se=se,
        min=min(regrets),
        max=max(regrets),
        eta=report.eta,
        multiplier_kind=report.multiplier_kind,
        multiplier=report.multiplier,
        theory_bound=report.theory_bound,
        bounds=report.bounds,
        constants=constants,
        comparator=ex.comparator,
    )


# --- CSV output ---------------------------------------------------------------

TRACE_COLUMNS = ["t", "active_set", "system_loss", "cumulative_loss", "num_recipients"]
REPORT_COLUMNS = [
    "config_hash", "T", "N", "alpha", "cover_size", "Q", "eta", "regret_mean", "regret_se",
    "theory_bound", "seed", "multiplier", "bound_alpha", "bound_cover",
]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def trace_csv(trace: SimulationTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    cum = trace.cumulative_loss
    nrec = trace.recipients.sum(axis=1)
    for i in range(trace.T):
        members = ";".join(str(v) for v in np.flatnonzero(trace.active[i]))
        w.writerow([i + 1, members, repr(float(trace.system_loss[i])), repr(float(cum[i])), int(nrec[i])])
    return buf.getvalue()


def write_trace_csv(trace: SimulationTrace, path: str | Path) -> None:
    Path(path).write_text(trace_csv(trace))


def report_row(report: MonteCarloReport, config_hash: str, n: int) -> dict:
    c = report.constants
    return {
        "config_hash": config_hash,
        "T": report.T,
        "N": n,
        "alpha": c.get("alpha"),
        "cover_size": c.get("cover_size"),
        "Q": c.get("Q"),
        "eta": report.eta,
        "regret_mean": report.mean,
        "regret_se": report.se,
        "theory_bound": report.theory_bound,
        "seed": report.master_seed,
        "multiplier": report.multiplier_kind,
        "bound_alpha": report.bounds.get("alpha"),
        "bound_cover": report.bounds.get("cover_size"),
    }


def report_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row.get(k)) for k in REPORT_COLUMNS])
    return buf.getvalue()
