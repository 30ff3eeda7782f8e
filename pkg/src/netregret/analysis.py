"""Activation-probability constants for independent multi-agent activations.

With every agent ``v`` active independently with probability ``q_v``:

* ``Q_v = 1 - prod_{w in N_v} (1 - q_w)`` is the chance that ``v`` is updated,
* ``c_v = E[1 / (1 + #other active agents)]``,
* ``Q = sum_{v : q_v > 0} q_v c_v / Q_v`` is the effective number of
  independent learners that multiplies sqrt(T) in the regret bound.

This module computes them exactly, provides enumeration oracles, and runs the
randomized verification corpus behind ``netregret verify``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import graph as gr
from .errors import ValidationError

ONE_MINUS_INV_E = 1.0 - math.exp(-1.0)


@dataclass(frozen=True)
class ActivationProfile:
    graph: gr.Graph
    q_vec: tuple

    def __post_init__(self):
        q = np.asarray(self.q_vec, dtype=float)
        if q.shape != (self.graph.n,):
            raise ValidationError(f"q_vec has length {q.size}, graph has {self.graph.n} vertices")
        if np.any(~np.isfinite(q)) or np.any(q < 0) or np.any(q > 1):
            raise ValidationError("activation probabilities must lie in [0, 1]")
        object.__setattr__(self, "q_vec", tuple(q.tolist()))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(v for v, q in enumerate(self.q_vec) if q > 0)


def update_probability(profile: ActivationProfile, v: int) -> float:
    """Probability that some member of the closed neighborhood of ``v`` is active."""
    miss = 1.0
    for w in sorted(gr.closed_neighborhood(profile.graph, v)):
        miss *= 1.0 - profile.q_vec[w]
    return 1.0 - miss


def _product_coefficients(q_others: np.ndarray) -> np.ndarray:
    """Coefficients (lowest degree first) of prod_w (q_w x + 1 - q_w)."""
    coef = np.ones(1)
    for q in q_others:
        nxt = np.zeros(coef.size + 1)
        nxt[:-1] += coef * (1.0 - q)
        nxt[1:] += coef * q
        coef = nxt
    return coef


def c_coefficient(q_vec, v: int) -> float:
    """E[1 / (1 + sum_{w != v} X_w)] as the integral over [0, 1] of a product polynomial.

    The coefficient of ``x^k`` is the probability that exactly ``k`` other
    agents are active, so integrating term by term gives the expectation.
    """
    q = np.asarray(q_vec, dtype=float)
    others = np.delete(q, v)
    coef = _product_coefficients(others)
    return math.fsum(coef / np.arange(1, coef.size + 1))


def c_coefficient_bruteforce(q_vec, v: int) -> float:
    """Enumeration over all subsets of the other agents (N <= 20)."""
    q = np.asarray(q_vec, dtype=float)
    if q.size > 20:
        raise ValidationError(f"brute-force enumeration refused for N={q.size} > 20")
    others = np.delete(q, v)
    m = others.size
    masks = np.arange(1 << m, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(m)) & 1).astype(bool)
    probs = np.prod(np.where(bits, others, 1.0 - others), axis=1)
    sizes = bits.sum(axis=1)
    return math.fsum(probs / (1.0 + sizes))


def expected_activation_share(q_vec, v: int) -> float:
    """E[X_v / sum_w X_w] with the ratio taken as 0 when X_v = 0; equals q_v c_v."""
    q = np.asarray(q_vec, dtype=float)
    if q[v] == 0:
        return 0.0
    return float(q[v]) * c_coefficient(q, v)


def q_constant(profile: ActivationProfile) -> float:
    """Sum over the support of q_v c_v / Q_v."""
    terms = []
    for v in profile.support:
        Qv = update_probability(profile, v)
        if not Qv > 0:
            raise ValidationError(f"update probability is zero at vertex {v}")
        terms.append(profile.q_vec[v] * c_coefficient(profile.q_vec, v) / Qv)
    return math.fsum(terms)


def q_uniform_closed_form(g: gr.Graph, q: float) -> float:
    """Q for q_v = q everywhere: (1/N) sum_v (1 - (1-q)^N) / (1 - (1-q)^{|N_v|})."""
    if not 0 < q <= 1:
        raise ValidationError(
            f"uniform q must lie in (0, 1], got {q}; the q -> 0+ limit is q_uniform_limit_zero(graph)"
        )
    n = g.n
    top = -math.expm1(n * math.log1p(-q)) if q < 1 else 1.0
    terms = []
    for v in range(n):
        k = g.degree(v) + 1
        bottom = -math.expm1(k * math.log1p(-q)) if q < 1 else 1.0
        terms.append(top / bottom)
    return math.fsum(terms) / n


def q_uniform_limit_zero(g: gr.Graph) -> float:
    """Limit of the uniform-q constant as q -> 0+, sum_v 1/|N_v|."""
    return gr.inverse_neighborhood_sum(g)


def q_graph_bound(alpha: float) -> float:
    """(alpha + 1) / (1 - e^-1), the graph-only upper bound on Q."""
    if alpha < 1:
        raise ValidationError(f"independence number must be >= 1, got {alpha}")
    return (alpha + 1.0) / ONE_MINUS_INV_E


# --- verification corpus ----------------------------------------------------


@dataclass
class CheckRow:
    check: str
    sample: int
    value: float
    bound: float
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    rows: list = field(default_factory=list)
    informational: tuple = ("tighter_q_sum1",)

    def add(self, check, sample, value, bound, passed, detail=""):
        self.rows.append(CheckRow(check, sample, float(value), float(bound), bool(passed), detail))

    @property
    def failures(self) -> list:
        return [r for r in self.rows if not r.passed and r.check not in self.informational]

    @property
    def ok(self) -> bool:
        return not self.failures

    def counts(self) -> dict:
        out: dict = {}
        for r in self.rows:
            total, bad = out.get(r.check, (0, 0))
            out[r.check] = (total + 1, bad + (not r.passed))
        return out

    def summary(self) -> str:
        lines = []
        for check, (total, bad) in self.counts().items():
            tag = " (informational)" if check in self.informational else ""
            status = "PASS" if bad == 0 else ("NOTE" if tag else "FAIL")
            lines.append(f"{status}  {check:<22} {total - bad}/{total} passed{tag}")
        for r in self.failures[:5]:
            lines.append(f"  counterexample: {r.check} sample {r.sample}: value={r.value!r} bound={r.bound!r} {r.detail}")
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "sample", "value", "bound", "pass"])
        for r in self.rows:
            w.writerow([r.check, r.sample, repr(r.value), repr(r.bound), int(r.passed)])
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


def _random_graph(rng, n_max: int, n_min: int = 1) -> gr.Graph:
    n = int(rng.integers(n_min, n_max + 1))
    p = float(rng.random())
    return gr.gnp(n, p, seed=int(rng.integers(2**31)))


def _fixed_corpus() -> list:
    out = []
    for n in (1, 2, 5, 8):
        out += [gr.complete(n), gr.edgeless(n)]
    out += [gr.star(4), gr.star(10), gr.cycle(5), gr.cycle(8), gr.path(7), gr.disjoint_cliques(3, 3)]
    return out


def verify_constants(
    seed: int = 0,
    ratio_samples: int = 1000,
    share_samples: int = 500,
    q_bound_samples: int = 1000,
    uniform_graphs: int = 100,
    inject_fault: bool = False,
) -> VerificationReport:
    """Randomized verification of the combinatorial facts the bounds rely on.

    Checks, each producing one CSV row per sample:

    ``ratio_bound``       sum q_v / (closed-neighborhood mass) <= alpha, n <= 7
    ``c_exact``           polynomial c_v vs. subset enumeration, N <= 12
    ``share_sum``         sum_v q_v c_v == P(some agent active), N <= 12
    ``q_graph_bound``     Q <= (alpha + 1) / (1 - 1/e), n <= 12
    ``uniform_closed``    closed form vs. general Q on q in {0.05, ..., 1}
    ``uniform_monotone``  closed form non-increasing in q
    ``uniform_range``     1 <= Q(q) <= sum 1/|N_v| <= alpha
    ``uniform_limits``    Q(1) = 1 and Q(q) -> sum 1/|N_v| as q -> 0+
    ``tighter_q_sum1``    Q <= max(3, alpha) when sum q = 1 (informational)

    ``inject_fault`` reverses the ``ratio_bound`` comparison, for harness self-tests.
    """
    rng = np.random.default_rng(seed)
    rep = VerificationReport()

    for i in range(ratio_samples):
        g = _random_graph(rng, 7)
        q = rng.dirichlet(np.ones(g.n))
        alpha = gr.independence_number_bruteforce(g)
        mass = g.closed_adjacency.astype(float) @ q
        value = math.fsum(q / mass)
        holds = value <= alpha + 1e-9
        rep.add("ratio_bound", i, value, alpha, (not holds) if inject_fault else holds, f"n={g.n} m={g.m}")

    for i in range(share_samples):
        n = int(rng.integers(1, 13))
        q = rng.uniform(0.0, 1.0, size=n)
        q = np.where(q == 0, 0.5, q)
        v = int(rng.integers(n))
        exact = c_coefficient(q, v)
        brute = c_coefficient_bruteforce(q, v)
        err = abs(exact - brute)
        rep.add("c_exact", i, err, 1e-10, err <= 1e-10, f"N={n} v={v}")
        shares = math.fsum(expected_activation_share(q, w) for w in range(n))
        target = -math.expm1(math.fsum(np.log1p(-q))) if np.all(q < 1) else 1.0
        rep.add("share_sum", i, abs(shares - target), 1e-10, abs(shares - target) <= 1e-10, f"N={n}")

    for i in range(q_bound_samples):
        g = _random_graph(rng, 12)
        # log-uniform probabilities reach the small-q regime where the bound is tight
        q = np.exp(rng.uniform(math.log(1e-3), 0.0, size=g.n))
        alpha = gr.independence_number_exact(g)
        Q = q_constant(ActivationProfile(g, tuple(q)))
        bound = q_graph_bound(alpha)
        rep.add("q_graph_bound", i, Q, bound, Q <= bound + 1e-9, f"n={g.n} alpha={alpha}")
        if i < 200:
            qs = rng.dirichlet(np.ones(g.n))
            qs = np.clip(qs, 0.0, 1.0)
            Qs = q_constant(ActivationProfile(g, tuple(qs)))
            rep.add("tighter_q_sum1", i, Qs, max(3, alpha), Qs <= max(3, alpha) + 1e-9, f"n={g.n}")

    grid = [round(0.05 * k, 2) for k in range(1, 21)]
    graphs = _fixed_corpus()
    while len(graphs) < uniform_graphs:
        graphs.append(_random_graph(rng, 12))
    for i, g in enumerate(graphs[:uniform_graphs]):
        closed = [q_uniform_closed_form(g, q) for q in grid]
        general = [q_constant(ActivationProfile(g, tuple([q] * g.n))) for q in grid]
        err = max(abs(a - b) for a, b in zip(closed, general))
        rep.add("uniform_closed", i, err, 1e-10, err <= 1e-10, f"n={g.n}")
        rise = max(b - a for a, b in zip(closed, closed[1:])) if len(closed) > 1 else 0.0
        rep.add("uniform_monotone", i, rise, 1e-12, rise <= 1e-12, f"n={g.n}")
        limit = q_uniform_limit_zero(g)
        alpha = gr.independence_number_exact(g)
        lo, hi = min(closed), max(closed)
        ok = lo >= 1 - 1e-9 and hi <= limit + 1e-9 and limit <= alpha + 1e-9
        rep.add("uniform_range", i, hi, limit, ok, f"min={lo!r} alpha={alpha}")
        at_one = abs(q_uniform_closed_form(g, 1.0) - 1.0)
        near_zero = abs(q_uniform_closed_form(g, 1e-9) - limit)
        ok = at_one <= 1e-12 and near_zero <= 1e-6 * max(1.0, limit)
        rep.add("uniform_limits", i, max(at_one, near_zero), 1e-6, ok, f"limit={limit!r}")

    return rep
