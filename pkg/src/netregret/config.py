"""Experiment configuration files (JSON) and their translation into runs.

Schema, with every unknown key rejected::

    {
      "graph":       {"kind": "star", "n": 10}            # or cycle/path/complete/edgeless
                     {"kind": "cliques", "count": 4, "size": 4}
                     {"kind": "gnp", "n": 12, "p": 0.3, "seed": 1}
                     {"path": "edges.txt"}
      "geometry":    {"kind": "simplex", "dim": 2} | {"kind": "ball", "dim": 2, "radius": 1.0}
      "environment": {"kind": "single_stochastic", "q": "uniform" | [...], "losses": LOSSES}
                     {"kind": "multi_stochastic", "q": 0.3 | [...], "losses": LOSSES}
                     {"kind": "independent_set_lb", "gap": 0.0}
                     {"kind": "independent_set_lb", "gap_scale": 2.0}  # gap = 2 sqrt(|A| / T)
                     {"kind": "star_adversary", "epsilon": 0.5}
                     {"kind": "schedule", "path": "rounds.txt"}
      "policy":      {"kind": "oblivious"} | {"kind": "clique_cover"}
      "eta": "tuned" | positive number,
      "T": int, "replicates": int, "seed": int,
      "comparator": "realized" | "good_action",
      "out_dir": "results"
    }

    LOSSES = {"kind": "bernoulli", "p": 0.5}            # same mean on every coordinate
             {"kind": "bernoulli", "means": [...]}
             {"kind": "bernoulli", "gap": 0.01}         # coordinate 0 has mean 1/2 - gap
             {"kind": "bernoulli", "gap_scale": 2.0}    # gap = gap_scale * sqrt(alpha / T)
             {"kind": "fixed", "vectors": [[...]], "loss_kind": "linear" | "quadratic"}

``gap_scale`` ties the gap to the graph's independence number and the horizon,
which is the scaling of the classical two-action hard instance.

Relative paths are resolved against the directory holding the config file.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema

from . import graph as gr
from .agents import CliqueCoverPolicy, Oblivious
from .environments import (
    BernoulliLosses,
    ComposedEnvironment,
    FixedLosses,
    IndependentSetLB,
    MultiStochastic,
    SingleStochastic,
    StarAdversary,
    schedule_from_file,
)
from .errors import ValidationError
from .geometry import Geometry
from .simulator import Experiment

_NUM = {"type": "number"}
_POS_INT = {"type": "integer", "minimum": 1}

GRAPH_SCHEMAS = {
    "star": {"n": _POS_INT},
    "cycle": {"n": _POS_INT},
    "path": {"n": _POS_INT},
    "complete": {"n": _POS_INT},
    "edgeless": {"n": _POS_INT},
    "cliques": {"count": _POS_INT, "size": _POS_INT},
    "gnp": {"n": _POS_INT, "p": _NUM, "seed": {"type": "integer"}},
}

GRAPH_REQUIRED = {"cliques": ["count", "size"], "gnp": ["n", "p"]}

LOSS_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["bernoulli", "fixed"]},
        "p": {"type": "number", "minimum": 0, "maximum": 1},
        "means": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}, "minItems": 1},
        "gap": {"type": "number", "minimum": 0, "maximum": 0.5},
        "gap_scale": {"type": "number", "minimum": 0},
        "vectors": {"type": "array", "minItems": 1, "items": {"type": "array", "items": _NUM, "minItems": 1}},
        "loss_kind": {"enum": ["linear", "quadratic"]},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

_Q = {"oneOf": [{"const": "uniform"}, {"type": "number", "minimum": 0, "maximum": 1},
                {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}, "minItems": 1}]}

ENV_SCHEMAS = {
    "single_stochastic": {"q": _Q, "losses": LOSS_SCHEMA},
    "multi_stochastic": {"q": _Q, "losses": LOSS_SCHEMA},
    "independent_set_lb": {"gap": {"type": "number", "minimum": 0, "maximum": 0.5},
                           "gap_scale": {"type": "number", "minimum": 0}},
    "star_adversary": {"epsilon": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5}},
    "schedule": {"path": {"type": "string"}},
}

ENV_REQUIRED = {
    "single_stochastic": ["losses"],
    "multi_stochastic": ["q", "losses"],
    "schedule": ["path"],
}

TOP_SCHEMA = {
    "type": "object",
    "properties": {
        "graph": {"type": "object"},
        "geometry": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["simplex", "ball"]},
                "dim": _POS_INT,
                "radius": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["kind", "dim"],
            "additionalProperties": False,
        },
        "environment": {"type": "object"},
        "policy": {
            "type": "object",
            "properties": {"kind": {"enum": ["oblivious", "clique_cover"]}},
            "required": ["kind"],
            "additionalProperties": False,
        },
        "eta": {"oneOf": [{"const": "tuned"}, {"type": "number", "exclusiveMinimum": 0}]},
        "T": {"type": "integer", "minimum": 0},
        "replicates": _POS_INT,
        "seed": {"type": "integer", "minimum": 0},
        "comparator": {"enum": ["realized", "good_action"]},
        "out_dir": {"type": "string"},
    },
    "required": ["graph", "geometry", "environment", "policy", "T"],
    "additionalProperties": False,
}


def _object_schema(props: dict, required=()) -> dict:
    return {
        "type": "object",
        "properties": {"kind": {"type": "string"}, **props},
        "required": ["kind", *required],
        "additionalProperties": False,
    }


def _check(instance, schema, where: str) -> None:
    try:
        jsonschema.validate(instance, schema)
    except jsonschema.ValidationError as exc:
        loc = ".".join([where, *(str(p) for p in exc.absolute_path)])
        raise ValidationError(f"{loc}: {exc.message}") from None


def validate_config_dict(data: dict) -> None:
    _check(data, TOP_SCHEMA, "config")
    g = data["graph"]
    if "path" in g:
        _check(g, {"type": "object", "properties": {"path": {"type": "string"}},
                   "additionalProperties": False}, "graph")
    else:
        kind = g.get("kind")
        if kind not in GRAPH_SCHEMAS:
            raise ValidationError(f"graph.kind: unknown graph kind {kind!r}; expected one of {sorted(GRAPH_SCHEMAS)} or a 'path'")
        _check(g, _object_schema(GRAPH_SCHEMAS[kind], GRAPH_REQUIRED.get(kind, ["n"])), "graph")
        if kind == "gnp" and not 0 <= g.get("p", -1) <= 1:
            raise ValidationError("graph.p: must lie in [0, 1]")
    e = data["environment"]
    kind = e.get("kind")
    if kind not in ENV_SCHEMAS:
        raise ValidationError(f"environment.kind: unknown environment kind {kind!r}; expected one of {sorted(ENV_SCHEMAS)}")
    _check(e, _object_schema(ENV_SCHEMAS[kind], ENV_REQUIRED.get(kind, ())), "environment")
    if kind == "multi_stochastic" and e["q"] == "uniform":
        raise ValidationError("environment.q: multi_stochastic needs a probability or a per-vertex list")
    if kind == "independent_set_lb" and "gap" in e and "gap_scale" in e:
        raise ValidationError("environment: give either gap or gap_scale, not both")
    losses = e.get("losses")
    if losses is not None:
        given = [k for k in ("p", "means", "gap", "gap_scale") if k in losses]
        if losses["kind"] == "bernoulli" and len(given) > 1:
            raise ValidationError(f"environment.losses: conflicting keys {given}")
        if losses["kind"] == "fixed" and "vectors" not in losses:
            raise ValidationError("environment.losses.vectors: required for fixed losses")


@dataclass
class ExperimentConfig:
    graph: dict
    geometry: dict
    environment: dict
    policy: dict
    T: int
    eta: object = "tuned"
    replicates: int = 1
    seed: int = 0
    comparator: str = "realized"
    out_dir: str = "results"
    base_dir: Path = field(default=Path("."), compare=False, repr=False)

    @classmethod
    def from_dict(cls, data: dict, base_dir: str | Path = ".") -> "ExperimentConfig":
        validate_config_dict(data)
        return cls(**copy.deepcopy(data), base_dir=Path(base_dir))

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return d

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ValidationError(f"{path}: top level must be an object")
        return cls.from_dict(data, path.parent)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    def resolve(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else self.base_dir / path

    def config_hash(self) -> str:
        """Digest of everything that determines results apart from the master seed."""
        d = self.to_dict()
        d.pop("seed")
        d.pop("out_dir")
        h = hashlib.sha256(json.dumps(d, sort_keys=True, separators=(",", ":")).encode())
        for section in ("graph", "environment"):
            if "path" in d[section]:
                h.update(self.resolve(d[section]["path"]).read_bytes())
        return h.hexdigest()[:16]


def build_graph_from_spec(spec: dict, resolve=Path) -> gr.Graph:
    if "path" in spec:
        return gr.read_edge_list(resolve(spec["path"]))
    params = {k: v for k, v in spec.items() if k != "kind"}
    seed = params.pop("seed", 0)
    return gr.generate(spec["kind"], seed=seed, **params)


def parse_graph_spec(text: str) -> dict:
    """``"star:n=10"`` or ``"cliques:count=4,size=4"`` or a file path."""
    if ":" not in text:
        if Path(text).suffix or Path(text).exists():
            return {"path": text}
        return {"kind": text}
    kind, _, rest = text.partition(":")
    spec: dict = {"kind": kind}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValidationError(f"graph spec {text!r}: expected key=value, got {item!r}")
        try:
            spec[key] = int(val)
        except ValueError:
            try:
                spec[key] = float(val)
            except ValueError:
                raise ValidationError(f"graph spec {text!r}: {key} must be numeric") from None
    return spec


def _losses(spec: dict, dim: int, graph: gr.Graph, T: int):
    if spec["kind"] == "fixed":
        return FixedLosses(spec["vectors"], spec.get("loss_kind", "linear"))
    if "means" in spec:
        if len(spec["means"]) != dim:
            raise ValidationError(f"environment.losses.means: expected {dim} entries, got {len(spec['means'])}")
        return BernoulliLosses(tuple(spec["means"]))
    if "gap" in spec:
        return BernoulliLosses.with_gap(dim, spec["gap"])
    if "gap_scale" in spec:
        return BernoulliLosses.with_gap(dim, scaled_gap(spec["gap_scale"], gr.independence_number_exact(graph), T))
    return BernoulliLosses(tuple([spec.get("p", 0.5)] * dim))


def scaled_gap(scale: float, alpha: int, T: int) -> float:
    """``scale * sqrt(alpha / T)``, capped at 1/2."""
    return min(0.5, scale * math.sqrt(alpha / T)) if T > 0 else 0.0


def _q_vector(q, n: int, single: bool) -> tuple:
    if q == "uniform":
        return tuple([1.0 / n] * n)
    if isinstance(q, (int, float)):
        return tuple([float(q)] * n)
    if len(q) != n:
        raise ValidationError(f"environment.q: expected {n} entries, got {len(q)}")
    return tuple(float(x) for x in q)


def build_experiment(cfg: ExperimentConfig) -> Experiment:
    """Turn a validated config into an :class:`Experiment` (seed applied later)."""
    g = build_graph_from_spec(cfg.graph, cfg.resolve)
    geo = cfg.geometry
    geom = Geometry.simplex(geo["dim"]) if geo["kind"] == "simplex" else Geometry.ball(geo["dim"], geo.get("radius", 1.0))
    e = cfg.environment
    kind = e["kind"]
    if kind in ("single_stochastic", "multi_stochastic"):
        q = _q_vector(e.get("q", "uniform"), g.n, kind == "single_stochastic")
        act = SingleStochastic(q) if kind == "single_stochastic" else MultiStochastic(q)
        env = ComposedEnvironment(act, _losses(e["losses"], geom.dim, g, cfg.T), seed=cfg.seed)
    elif kind == "independent_set_lb":
        gap = e.get("gap", 0.0)
        if "gap_scale" in e:
            gap = scaled_gap(e["gap_scale"], len(gr.maximal_independent_set(g)), cfg.T)
        env = IndependentSetLB(g, seed=cfg.seed, gap=gap)
    elif kind == "star_adversary":
        env = StarAdversary(g.n, e.get("epsilon", 0.5), seed=cfg.seed)
    else:
        env = schedule_from_file(cfg.resolve(e["path"]))
    if cfg.policy["kind"] == "clique_cover":
        policy = CliqueCoverPolicy(gr.greedy_clique_cover(g))
    else:
        policy = Oblivious()
    return Experiment(g, geom, policy, env, cfg.eta, cfg.comparator)
