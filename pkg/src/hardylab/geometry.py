"""Concrete domains and boundary quadrature.

Three domains are supported: the unit disc (n=1), the unit ball of C^2,
and the bidisc.  The boundary carries the normalized rotation-invariant
probability measure; a QuadratureRule is a finite node/weight realization
of it.  All integration, L^p norms and inner products in the package go
through the helpers here.

Conventions: an interior point is a complex vector of length n (a bare
complex number is accepted for the disc); quadrature nodes are stored as
an (M, n) complex array.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .errors import DomainError, ParameterError, ShapeError

DISC = "disc"
BALL2 = "ball2"
BIDISC = "bidisc"
_KINDS = (DISC, BALL2, BIDISC)

WEIGHT_TOL = 1e-14
BOUNDARY_TOL = 1e-14


@dataclass(frozen=True)
class Domain:
    """One of the three concrete domains; ``kind`` fixes the dimension."""

    kind: str

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown domain kind {self.kind!r}, expected one of {_KINDS}")

    @property
    def n(self) -> int:
        return 1 if self.kind == DISC else 2

    def point(self, x) -> np.ndarray:
        """Coerce ``x`` to an interior point, validating strict interiority."""
        pt = np.atleast_1d(np.asarray(x, dtype=complex))
        if pt.shape != (self.n,):
            raise DomainError(f"{self.kind} points have {self.n} coordinate(s), got shape {pt.shape}")
        if not self.is_interior(pt):
            raise DomainError(f"point {pt} is not interior to the {self.kind}")
        return pt

    def is_interior(self, pt: np.ndarray) -> bool:
        if self.kind == BIDISC:
            return bool(np.max(np.abs(pt)) < 1.0)
        return bool(np.linalg.norm(pt) < 1.0)


def domain(kind: str) -> Domain:
    return Domain(kind)


def _circle_nodes(m: int) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(m) / m
    return np.exp(1j * theta)


def _gauss01(g: int):
    """Gauss-Legendre nodes/weights transplanted to [0, 1]; weights sum to 1."""
    x, w = np.polynomial.legendre.leggauss(g)
    return (x + 1.0) / 2.0, w / 2.0


@dataclass
class QuadratureRule:
    """Boundary nodes and positive weights realizing the probability measure."""

    domain: Domain
    nodes: np.ndarray      # (M, n) complex, on the boundary
    weights: np.ndarray    # (M,) positive, summing to 1
    resolution: int

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=complex)
        self.weights = np.ascontiguousarray(self.weights, dtype=float)
        if self.nodes.ndim != 2 or self.nodes.shape[1] != self.domain.n:
            raise ShapeError(f"nodes must have shape (M, {self.domain.n})")
        if self.weights.shape != (self.nodes.shape[0],):
            raise ShapeError("weights must match nodes in length")
        if np.any(self.weights <= 0.0):
            raise ParameterError("all quadrature weights must be positive")
        if abs(self.weights.sum() - 1.0) > WEIGHT_TOL:
            raise ParameterError("quadrature weights must sum to 1")
        if self._boundary_defect() > BOUNDARY_TOL:
            raise ParameterError("quadrature nodes must lie on the boundary")

    def _boundary_defect(self) -> float:
        if self.domain.kind == BALL2:
            return float(np.max(np.abs(np.linalg.norm(self.nodes, axis=1) - 1.0)))
        return float(np.max(np.abs(np.abs(self.nodes) - 1.0)))

    def __len__(self) -> int:
        return self.nodes.shape[0]

    def to_json(self) -> dict:
        return {
            "domain": self.domain.kind,
            "resolution": self.resolution,
            "nodes_re": self.nodes.real.tolist(),
            "nodes_im": self.nodes.imag.tolist(),
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "QuadratureRule":
        nodes = np.asarray(data["nodes_re"], dtype=float) + 1j * np.asarray(data["nodes_im"], dtype=float)
        return cls(Domain(data["domain"]), nodes, np.asarray(data["weights"], dtype=float),
                   int(data["resolution"]))


def build_quadrature(dom: Domain, resolution: int, angular: int | None = None) -> QuadratureRule:
    """Standard boundary rule at the given resolution.

    disc: ``resolution`` equispaced circle nodes, uniform weights.
    bidisc: tensor product of two such circles.
    ball2: the exact decomposition z = (sqrt(t) e^{i th1}, sqrt(1-t) e^{i th2})
    with Gauss-Legendre (``resolution`` points) in t and trapezoid rules in
    each angle; ``angular`` overrides the angular node count (default
    ``2 * resolution``), useful when high angular degree is needed at a
    modest Gauss degree.
    """
    if resolution < 4:
        raise ParameterError("resolution must be at least 4")
    if angular is not None and dom.kind != BALL2:
        raise ParameterError("the angular override applies to the ball rule only")
    if dom.kind == DISC:
        nodes = _circle_nodes(resolution).reshape(-1, 1)
        weights = np.full(resolution, 1.0 / resolution)
    elif dom.kind == BIDISC:
        c = _circle_nodes(resolution)
        z1, z2 = np.meshgrid(c, c, indexing="ij")
        nodes = np.column_stack([z1.ravel(), z2.ravel()])
        weights = np.full(resolution * resolution, 1.0 / resolution**2)
    else:
        m = 2 * resolution if angular is None else int(angular)
        if m < 4:
            raise ParameterError("angular resolution must be at least 4")
        t, wt = _gauss01(resolution)
        c = _circle_nodes(m)
        tt, c1, c2 = np.meshgrid(t, c, c, indexing="ij")
        nodes = np.column_stack([(np.sqrt(tt) * c1).ravel(), (np.sqrt(1.0 - tt) * c2).ravel()])
        weights = np.broadcast_to((wt / m**2)[:, None, None], (resolution, m, m)).ravel().copy()
    weights = weights / weights.sum()
    return QuadratureRule(dom, nodes, weights, resolution)


def ball_zonal_rule(gauss: int, angular: int) -> QuadratureRule:
    """Reduced ball rule with nodes (sqrt(t) e^{i th}, sqrt(1-t)).

    All nodes lie on the sphere and the weights realize a probability
    measure, but the rule integrates correctly only integrands invariant
    under rotation of the second coordinate (e.g. |k_a| powers after the
    point has been rotated onto (r, 0)).
    """
    if gauss < 2 or angular < 4:
        raise ParameterError("zonal rule needs gauss >= 2 and angular >= 4")
    t, wt = _gauss01(gauss)
    c = _circle_nodes(angular)
    z1 = (np.sqrt(t)[:, None] * c[None, :]).ravel()
    z2 = np.repeat(np.sqrt(1.0 - t), angular)
    weights = np.repeat(wt / angular, angular)
    weights = weights / weights.sum()
    return QuadratureRule(Domain(BALL2), np.column_stack([z1, z2]), weights, angular)


@dataclass
class BoundarySamples:
    """Values of a boundary function at the nodes of a rule."""

    values: np.ndarray
    rule: QuadratureRule

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=complex)
        if self.values.shape != (len(self.rule),):
            raise ShapeError("one sample value per quadrature node is required")


def sample_function(fn: Callable[[np.ndarray], np.ndarray], rule: QuadratureRule) -> BoundarySamples:
    """Sample a vectorized function fn((M, n) nodes) -> (M,) on the rule."""
    return BoundarySamples(np.asarray(fn(rule.nodes), dtype=complex), rule)


def _same_rule(a: QuadratureRule, b: QuadratureRule) -> bool:
    return a is b or (
        a.domain.kind == b.domain.kind and len(a) == len(b) and a.resolution == b.resolution
    )


def integrate(f: BoundarySamples) -> complex:
    """Integral of the sampled function against the rule's measure."""
    return complex(np.sum(f.rule.weights * f.values))


def lp_norm(f: BoundarySamples, p: float) -> float:
    """(integral |f|^p)^(1/p); for p = inf, the max over nodes.

    The p = inf value is a certified lower bound of the essential sup
    (max of finitely many samples), not the sup itself.
    """
    if p != np.inf and p < 1:
        raise ParameterError("lp_norm requires p >= 1 or p = inf")
    absv = np.abs(f.values)
    if p == np.inf:
        return float(np.max(absv))
    return float(np.sum(f.rule.weights * absv**p) ** (1.0 / p))


def inner_product(f: BoundarySamples, g: BoundarySamples) -> complex:
    """<f, g> = integral of f * conj(g); conjugate-symmetric."""
    if not _same_rule(f.rule, g.rule):
        raise ShapeError("inner_product requires samples on the same rule")
    return complex(np.sum(f.rule.weights * f.values * np.conj(g.values)))


def seq_norm(x: Iterable[complex], p: float) -> float:
    """l^p norm of a finite coefficient vector (p >= 1 or inf)."""
    v = np.abs(np.asarray(list(x) if not isinstance(x, np.ndarray) else x, dtype=complex))
    if p == np.inf:
        return float(v.max()) if v.size else 0.0
    if p < 1:
        raise ParameterError("seq_norm requires p >= 1 or p = inf")
    return float(np.sum(v**p) ** (1.0 / p))


@dataclass
class Convergence:
    """Outcome of doubling a resolution until a scalar stabilizes."""

    value: float
    residual: float
    resolution: int
    converged: bool
    history: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "residual": self.residual,
            "resolution": self.resolution,
            "converged": self.converged,
        }


def converge_scalar(evaluate: Callable[[int], float], start: int, rtol: float = 1e-10,
                    max_resolution: int = 1 << 14) -> Convergence:
    """Double the resolution until two successive values agree to rtol.

    Returns the last value together with the achieved relative residual
    and the resolution it was computed at; ``converged`` is False when the
    cap is reached first.
    """
    if start < 4:
        raise ParameterError("starting resolution must be at least 4")
    res = start
    prev = float(evaluate(res))
    history = [(res, prev)]
    residual = np.inf
    while 2 * res <= max_resolution:
        res *= 2
        cur = float(evaluate(res))
        history.append((res, cur))
        residual = abs(cur - prev) / max(abs(cur), np.finfo(float).tiny)
        if residual <= rtol:
            return Convergence(cur, residual, res, True, history)
        prev = cur
    return Convergence(prev, residual, res, False, history)
