"""Decision sets, regularizers and losses for lazy online mirror descent.

Two geometries are supported:

* ``simplex`` -- the probability simplex in R^d with the shifted negative
  entropy ``g(p) = ln d + sum_i p_i ln p_i`` (range ``[0, ln d]``, 1-strongly
  convex w.r.t. the L1 norm, dual norm L-infinity).
* ``ball`` -- the closed Euclidean ball of radius R with ``g(x) = |x|^2 / 2``
  (range ``[0, R^2/2]``, 1-strongly convex w.r.t. L2).

The time-varying regularizer is ``(sqrt(t) / eta) g`` where ``t`` is the
instance's own update index, so the mirror map only ever sees
``eta * theta / sqrt(t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ValidationError

SIMPLEX = "simplex"
BALL = "ball"

LINEAR = "linear"
QUADRATIC = "quadratic"


@dataclass(frozen=True)
class Geometry:
    kind: str
    dim: int
    radius: float = 1.0

    def __post_init__(self):
        if self.kind not in (SIMPLEX, BALL):
            raise ValidationError(f"unknown geometry kind {self.kind!r}")
        if self.dim < 1:
            raise ValidationError(f"dimension must be >= 1, got {self.dim}")
        if self.kind == SIMPLEX and self.dim < 2:
            raise ValidationError("simplex needs d >= 2 (d = 1 is a single point with D = 0)")
        if self.kind == BALL and not self.radius > 0:
            raise ValidationError(f"ball radius must be positive, got {self.radius}")

    @classmethod
    def simplex(cls, d: int) -> "Geometry":
        return cls(SIMPLEX, d)

    @classmethod
    def ball(cls, d: int, radius: float = 1.0) -> "Geometry":
        return cls(BALL, d, float(radius))

    @property
    def D(self) -> float:
        """Range of the regularizer (sup minus inf over the decision set)."""
        if self.kind == SIMPLEX:
            return math.log(self.dim)
        return self.radius ** 2 / 2.0

    @property
    def sigma(self) -> float:
        return 1.0

    @property
    def dual_norm(self) -> str:
        return "linf" if self.kind == SIMPLEX else "l2"

    def norm_dual(self, g: np.ndarray) -> float:
        g = np.asarray(g, dtype=float)
        return float(np.max(np.abs(g))) if self.kind == SIMPLEX else float(np.linalg.norm(g))

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            return False
        if self.kind == SIMPLEX:
            return bool(np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol)
        return bool(np.linalg.norm(x) <= self.radius + tol)

    def uniform_point(self) -> np.ndarray:
        if self.kind == SIMPLEX:
            return np.full(self.dim, 1.0 / self.dim)
        return np.zeros(self.dim)


def mirror_map_batch(geom: Geometry, theta: np.ndarray, eta: float, counts: np.ndarray) -> np.ndarray:
    """Row-wise mirror map for a ``(k, d)`` stack of dual vectors and ``k`` update indices."""
    theta = np.asarray(theta, dtype=float)
    counts = np.asarray(counts, dtype=float)
    z = (eta * theta) / np.sqrt(counts)[:, None]
    if geom.kind == SIMPLEX:
        z = z - z.max(axis=1, keepdims=True)
        w = np.exp(z)
        return w / w.sum(axis=1, keepdims=True)
    norms = np.linalg.norm(z, axis=1)
    scale = np.where(norms > geom.radius, geom.radius / np.where(norms > 0, norms, 1.0), 1.0)
    return z * scale[:, None]


def mirror_map(geom: Geometry, theta, eta: float, local_count: int) -> np.ndarray:
    """Prediction ``grad g_t^*(theta)`` for an instance at update index ``local_count``.

    Simplex: exponential weights ``p_i ~ exp(eta * theta_i / sqrt(local_count))``.
    Ball: ``eta * theta / sqrt(local_count)`` radially projected onto the ball.
    """
    if not eta > 0:
        raise ValidationError(f"learning rate must be positive, got {eta}")
    if local_count < 1:
        raise ValidationError(f"local_count must be >= 1, got {local_count}")
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (geom.dim,):
        raise ValidationError(f"theta has shape {theta.shape}, expected ({geom.dim},)")
    if not np.all(np.isfinite(theta)):
        raise NumericError(f"non-finite dual vector {theta}")
    return mirror_map_batch(geom, theta[None, :], eta, np.array([local_count]))[0]


@dataclass(frozen=True)
class LossSpec:
    """One round's loss function.

    ``kind`` is ``linear`` (``vector`` is the gradient / loss vector) or
    ``quadratic`` (``vector`` is the target, loss ``|x - target|^2 / 2``).
    ``lipschitz`` bounds the dual norm of the gradient over the decision set.
    """

    kind: str
    vector: np.ndarray
    lipschitz: float

    def __post_init__(self):
        if self.kind not in (LINEAR, QUADRATIC):
            raise ValidationError(f"unknown loss kind {self.kind!r}")
        object.__setattr__(self, "vector", np.asarray(self.vector, dtype=float))

    @classmethod
    def linear_simplex(cls, vector) -> "LossSpec":
        v = np.asarray(vector, dtype=float)
        if np.any(v < 0) or np.any(v > 1):
            raise ValidationError(f"simplex loss entries must lie in [0, 1], got {v}")
        return cls(LINEAR, v, 1.0)

    @classmethod
    def linear_ball(cls, gradient, lipschitz: float | None = None) -> "LossSpec":
        g = np.asarray(gradient, dtype=float)
        norm = float(np.linalg.norm(g))
        if lipschitz is None:
            lipschitz = norm
        if norm > lipschitz + 1e-12:
            raise ValidationError(f"gradient norm {norm} exceeds declared bound {lipschitz}")
        return cls(LINEAR, g, float(lipschitz))

    @classmethod
    def quadratic_ball(cls, target, radius: float = 1.0) -> "LossSpec":
        t = np.asarray(target, dtype=float)
        # |x - t| <= R + |t| on the ball
        return cls(QUADRATIC, t, float(radius + np.linalg.norm(t)))


def _check_dim(loss: LossSpec, x: np.ndarray) -> None:
    if x.shape != loss.vector.shape:
        raise ValidationError(f"point has shape {x.shape}, loss expects {loss.vector.shape}")


def loss_value(loss: LossSpec, x) -> float:
    x = np.asarray(x, dtype=float)
    _check_dim(loss, x)
    if loss.kind == LINEAR:
        return float(linear_values(loss.vector[None, :], x[None, :])[0])
    diff = x - loss.vector
    return 0.5 * float(np.dot(diff, diff))


def linear_values(vectors: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Row-wise inner products. Both simulation engines go through here so they round identically."""
    return np.add.reduce(vectors * points, axis=1)


def loss_gradient(loss: LossSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    _check_dim(loss, x)
    if loss.kind == LINEAR:
        return loss.vector.copy()
    return x - loss.vector


def tuned_eta(D: float, sigma: float, L: float) -> float:
    """Learning rate sqrt(2 sigma D) / L that balances the two bound terms."""
    if not (D > 0 and sigma > 0 and L > 0):
        raise ValidationError(f"tuned_eta needs positive D, sigma, L; got {D}, {sigma}, {L}")
    return math.sqrt(2.0 * sigma * D) / L


def theory_bound(D: float, sigma: float, L: float, eta: float, multiplier: float, T: int) -> float:
    """(D/eta + eta L^2 / (2 sigma)) * sqrt(multiplier * T).

    ``multiplier`` is 1 for one instance, the independence number, the
    clique-cover size, or the multi-activation constant Q.
    """
    if not (D > 0 and sigma > 0 and L > 0 and eta > 0 and multiplier > 0):
        raise ValidationError(
            f"theory_bound needs positive D, sigma, L, eta, multiplier; got {D}, {sigma}, {L}, {eta}, {multiplier}"
        )
    if T < 0:
        raise ValidationError(f"horizon must be nonnegative, got {T}")
    return (D / eta + eta * L * L / (2.0 * sigma)) * math.sqrt(multiplier * T)
