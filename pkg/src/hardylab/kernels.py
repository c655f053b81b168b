"""Reproducing kernels, their L^p norms, and kernel-norm inequalities.

The kernel attached to an interior point a is 1/(1 - conj(a) z) on the
disc, (1 - <z, a>)^(-2) on the ball of C^2, and the coordinate product of
disc kernels on the bidisc.  Everything downstream (Carleson constants,
dual systems, extension operators) consumes kernels through this module.

Norm computation has two routes:

* ``kernel_norm(a, p, rule)`` samples the kernel on an explicit rule --
  the basic, fully general path;
* ``NormCache`` exploits rotation invariance (norms depend only on |a|,
  or on the coordinate moduli for the bidisc) to evaluate the same
  integrals on reduced rules, doubling the resolution until successive
  values agree to a relative tolerance.  Every cached entry carries the
  achieved residual and resolution so reports can quote them.

p = inf norms are the maximum of |k_a| over an evaluation set that
includes the boundary point a/|a| where the sup is attained; they are
certified lower bounds of the essential sup and all downstream
assertions treat them as such.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DependencyError,
    DomainError,
    InvariantViolation,
    ParameterError,
)
from .geometry import (
    BALL2,
    BIDISC,
    DISC,
    BoundarySamples,
    Domain,
    QuadratureRule,
    lp_norm,
    inner_product,
)

INF = np.inf


# ---------------------------------------------------------------------------
# exponent arithmetic


def conjugate_exponent(p: float) -> float:
    """p' with 1/p + 1/p' = 1; 1' = inf and inf' = 1."""
    if p == INF:
        return 1.0
    if p < 1:
        raise ParameterError("exponents must satisfy p >= 1")
    if p == 1:
        return INF
    return p / (p - 1.0)


def exponent_from_split(s: float, p: float) -> float:
    """q solving 1/s = 1/p + 1/q (q = s when p = inf)."""
    if s < 1 or (p != INF and s >= p):
        raise ParameterError("need 1 <= s < p")
    if p == INF:
        return float(s)
    return 1.0 / (1.0 / s - 1.0 / p)


def interpolation_theta(p: float, q: float) -> float:
    """theta solving 1/p = (1 - theta) + theta/q."""
    if p < 1 or q < 1:
        raise ParameterError("exponents must be >= 1")
    denom = 1.0 - (0.0 if q == INF else 1.0 / q)
    if denom == 0.0:
        raise ParameterError("q = 1 leaves theta undetermined")
    return (1.0 - 1.0 / p) / denom


# ---------------------------------------------------------------------------
# kernel evaluation


def _point_key(a: np.ndarray) -> tuple:
    return tuple(complex(v) for v in np.atleast_1d(a))


def kernel_values(a, zs: np.ndarray, dom: Domain) -> np.ndarray:
    """k_a at an (M, n) array of points (interior or boundary)."""
    a = dom.point(a)
    zs = np.asarray(zs, dtype=complex)
    if zs.ndim == 1:
        zs = zs.reshape(-1, dom.n)
    if dom.kind == DISC:
        denom = 1.0 - np.conj(a[0]) * zs[:, 0]
        _check_branch(denom)
        return 1.0 / denom
    if dom.kind == BALL2:
        denom = 1.0 - zs @ np.conj(a)
        _check_branch(denom)
        return denom**-2
    denom1 = 1.0 - np.conj(a[0]) * zs[:, 0]
    denom2 = 1.0 - np.conj(a[1]) * zs[:, 1]
    _check_branch(denom1)
    _check_branch(denom2)
    return 1.0 / (denom1 * denom2)


def _check_branch(denom: np.ndarray) -> None:
    # 1 - <z, a> stays in the right half plane for |a| < 1, |z| <= 1;
    # anything else means a point escaped the closed domain.
    if np.min(denom.real) <= 0.0:
        raise DomainError("kernel evaluation left the principal branch; point outside the closed domain?")


def kernel_eval(a, z, dom: Domain) -> complex:
    """k_a(z) at a single point z."""
    return complex(kernel_values(a, np.atleast_2d(np.atleast_1d(np.asarray(z, dtype=complex))), dom)[0])


def kernel_samples(a, rule: QuadratureRule) -> BoundarySamples:
    return BoundarySamples(kernel_values(a, rule.nodes, rule.domain), rule)


def kernel_diag(a, dom: Domain) -> float:
    """k_a(a), always real and >= 1."""
    return float(kernel_eval(a, dom.point(a), dom).real)


# ---------------------------------------------------------------------------
# norm tables


@dataclass
class NormTable:
    """Cached kernel norms at one point over a set of exponents."""

    point: tuple
    domain: Domain
    entries: dict
    residual: float
    resolution: int

    def norm(self, p: float) -> float:
        key = float(p)
        if key not in self.entries:
            raise DependencyError(f"no cached norm for exponent {p}")
        return self.entries[key]

    def omega(self, q: float) -> float:
        """Stein-Weiss style weight ||k_a||_{2q}^{-2q}."""
        return self.norm(2.0 * q) ** (-2.0 * q)

    def check_monotone(self, tol: float = 1e-10) -> None:
        ps = sorted(self.entries, key=lambda p: (p == INF, p))
        vals = [self.entries[p] for p in ps]
        for lo, hi in zip(vals, vals[1:]):
            if lo > hi * (1.0 + tol):
                raise InvariantViolation(
                    f"norm monotonicity violated at point {self.point}: {lo} > {hi}")

    def to_json(self) -> dict:
        return {
            "point_re": [v.real for v in self.point],
            "point_im": [v.imag for v in self.point],
            "norms": {("inf" if p == INF else repr(p)): v for p, v in self.entries.items()},
            "residual": self.residual,
            "resolution": self.resolution,
        }


def kernel_norm(a, p: float, rule: QuadratureRule, table: NormTable | None = None) -> float:
    """||k_a||_p from samples on an explicit rule; optionally cached."""
    if p != INF and p < 1:
        raise ParameterError("kernel_norm requires p >= 1 or p = inf")
    value = lp_norm(kernel_samples(a, rule), p)
    if table is not None:
        table.entries[float(p)] = value
    return value


class RuleNorms:
    """Norm source backed by one fixed rule; same interface as NormCache."""

    def __init__(self, rule: QuadratureRule):
        self.rule = rule
        self.domain = rule.domain
        self._cache: dict = {}

    def norm(self, a, p: float) -> float:
        key = (_point_key(np.atleast_1d(np.asarray(a, dtype=complex))), float(p))
        if key not in self._cache:
            self._cache[key] = kernel_norm(a, p, self.rule)
        return self._cache[key]

    def table(self, a, ps: Iterable[float]) -> NormTable:
        entries = {float(p): self.norm(a, p) for p in ps}
        return NormTable(_point_key(np.asarray(a, dtype=complex)), self.domain, entries,
                         0.0, self.rule.resolution)

    def report(self) -> dict:
        return {"source": "fixed-rule", "resolution": self.rule.resolution}


def _disc_radial_power_mean(r: float, ps: Sequence[float], m: int) -> dict:
    theta = 2.0 * np.pi * np.arange(m) / m
    mod = np.abs(1.0 - r * np.exp(1j * theta))
    return {p: float(np.mean(mod ** (-p)) ** (1.0 / p)) for p in ps}


def _ball_radial_power_mean(r: float, ps: Sequence[float], m: int) -> dict:
    g = max(16, m // 16)
    x, w = np.polynomial.legendre.leggauss(g)
    t, wt = (x + 1.0) / 2.0, w / 2.0
    theta = 2.0 * np.pi * np.arange(m) / m
    mod = np.abs(1.0 - r * np.sqrt(t)[:, None] * np.exp(1j * theta)[None, :])
    out = {}
    for p in ps:
        vals = np.mean(mod ** (-2.0 * p), axis=1)
        out[p] = float(np.dot(wt, vals) ** (1.0 / p))
    return out


class NormCache:
    """Adaptive kernel-norm engine keyed by (point, exponent).

    Rotation invariance reduces every norm integral to one radius (disc,
    ball) or a pair of radii (bidisc), so the refinement loop runs on
    small one- or two-dimensional rules regardless of how fine it has to
    go.  ``table`` evaluates all requested exponents of one point on a
    shared node set, which keeps discrete Hoelder-type inequalities exact.
    """

    def __init__(self, dom: Domain, rtol: float = 1e-10, start_resolution: int = 64,
                 max_resolution: int = 1 << 14):
        self.domain = dom
        self.rtol = rtol
        self.start_resolution = start_resolution
        self.max_resolution = max_resolution
        self._cache: dict = {}
        self.worst_residual = 0.0
        self.max_used_resolution = 0

    # -- radial profiles -----------------------------------------------

    def _finite_profile(self, a: np.ndarray, ps: Sequence[float], m: int) -> dict:
        if self.domain.kind == DISC:
            return _disc_radial_power_mean(abs(a[0]), ps, m)
        if self.domain.kind == BALL2:
            return _ball_radial_power_mean(float(np.linalg.norm(a)), ps, m)
        first = _disc_radial_power_mean(abs(a[0]), ps, m)
        second = _disc_radial_power_mean(abs(a[1]), ps, m)
        return {p: first[p] * second[p] for p in ps}

    def _sup_norm(self, a: np.ndarray) -> float:
        # max of |k_a| over the closed boundary, attained in the direction
        # of a; evaluated there directly, so exact despite being quoted as
        # a lower bound.
        if self.domain.kind == DISC:
            return 1.0 / (1.0 - abs(a[0]))
        if self.domain.kind == BALL2:
            return (1.0 - float(np.linalg.norm(a))) ** -2
        return 1.0 / ((1.0 - abs(a[0])) * (1.0 - abs(a[1])))

    # -- public interface ------------------------------------------------

    def table(self, a, ps: Iterable[float]) -> NormTable:
        a = self.domain.point(a)
        wanted = sorted({float(p) for p in ps})
        for p in wanted:
            if p != INF and p < 1:
                raise ParameterError("kernel norms need p >= 1 or p = inf")
        finite = [p for p in wanted if p != INF]
        entries: dict = {}
        residual = 0.0
        m = self.start_resolution
        if finite:
            prev = self._finite_profile(a, finite, m)
            residual = INF
            while 2 * m <= self.max_resolution:
                m *= 2
                cur = self._finite_profile(a, finite, m)
                residual = max(abs(cur[p] - prev[p]) / cur[p] for p in finite)
                if residual <= self.rtol:
                    break
                prev = cur
            else:
                cur = prev
            entries.update(cur)
        if INF in wanted:
            entries[INF] = float(self._sup_norm(a))
        key = _point_key(a)
        for p, v in entries.items():
            self._cache.setdefault((key, p), (v, residual, m))
        self.worst_residual = max(self.worst_residual, 0.0 if residual == INF else residual)
        self.max_used_resolution = max(self.max_used_resolution, m)
        return NormTable(key, self.domain, entries, residual, m)

    def norm(self, a, p: float) -> float:
        a = self.domain.point(a)
        key = (_point_key(a), float(p))
        if key not in self._cache:
            self.table(a, [p])
        return self._cache[key][0]

    def entry(self, a, p: float) -> tuple:
        """(value, residual, resolution) for a cached or fresh norm."""
        a = self.domain.point(a)
        key = (_point_key(a), float(p))
        if key not in self._cache:
            self.table(a, [p])
        return self._cache[key]

    def report(self) -> dict:
        return {
            "source": "adaptive",
            "rtol": self.rtol,
            "max_resolution_cap": self.max_resolution,
            "max_resolution_used": self.max_used_resolution,
            "worst_residual": self.worst_residual,
        }


# ---------------------------------------------------------------------------
# reproducing property, Poisson kernel, projection


def reproducing_check(f, a, rule: QuadratureRule) -> float:
    """|<f, k_a> - f(a)| for a vectorized evaluator f((M, n)) -> (M,)."""
    dom = rule.domain
    a = dom.point(a)
    samples = BoundarySamples(np.asarray(f(rule.nodes), dtype=complex), rule)
    paired = inner_product(samples, kernel_samples(a, rule))
    value = complex(np.asarray(f(a.reshape(1, -1)), dtype=complex)[0])
    return abs(paired - value)


def poisson_kernel(a, rule: QuadratureRule) -> BoundarySamples:
    """P_a = |k_a|^2 / ||k_a||_2^2, normalized on the rule itself."""
    k = kernel_samples(a, rule)
    dens = np.abs(k.values) ** 2
    mass = float(np.sum(rule.weights * dens))
    return BoundarySamples(dens / mass, rule)


def analytic_projection_eval(f: BoundarySamples, a) -> complex:
    """Value at a of the analytic projection of f: <f, k_a>."""
    return inner_product(f, kernel_samples(a, f.rule))


# ---------------------------------------------------------------------------
# structural-hypothesis constants


@dataclass
class SHConstants:
    """Grid extrema of one of the two kernel-norm hypotheses."""

    domain: Domain
    hypothesis: str                 # "sh_q" or "sh_ps"
    exponents: dict
    extremum: float                  # alpha-hat (min) or beta-hat (max)
    ratios: list                     # [(point key, ratio)]
    flagged: list                    # points excluded for non-convergence
    worst_residual: float
    grid_note: str = ""

    def to_json(self) -> dict:
        return {
            "hypothesis": self.hypothesis,
            "domain": self.domain.kind,
            "exponents": {k: ("inf" if v == INF else v) for k, v in self.exponents.items()},
            "extremum": self.extremum,
            "ratios": [
                {"point_re": [c.real for c in pt], "point_im": [c.imag for c in pt], "ratio": r}
                for pt, r in self.ratios
            ],
            "flagged": [[c.real for c in pt] + [c.imag for c in pt] for pt in self.flagged],
            "worst_residual": self.worst_residual,
            "grid_note": self.grid_note,
        }

    def csv_rows(self) -> list:
        rows = []
        for pt, r in self.ratios:
            coords = []
            for c in pt:
                coords.extend([c.real, c.imag])
            rows.append(coords + [r, self.hypothesis])
        return rows


_FLAG_RESIDUAL = 1e-8


def sh_q_scan(dom: Domain, q: float, grid, norms, grid_note: str = "") -> SHConstants:
    """min over the grid of ||k_a||_2^2 / (||k_a||_q ||k_a||_{q'}).

    Discrete Hoelder guarantees each ratio <= 1 when the three norms share
    a node set, which ``norms.table`` arranges; a ratio beyond 1 + 1e-10
    is treated as a broken invariant rather than a data point.
    """
    if not (1.0 < q < INF):
        raise ParameterError("sh_q_scan needs 1 < q < inf")
    qc = conjugate_exponent(q)
    ratios, flagged = [], []
    worst = 0.0
    for a in grid:
        t = norms.table(a, [2.0, q, qc])
        if t.residual > _FLAG_RESIDUAL:
            flagged.append(t.point)
            continue
        worst = max(worst, t.residual)
        ratio = t.norm(2.0) ** 2 / (t.norm(q) * t.norm(qc))
        if ratio > 1.0 + 1e-10:
            raise InvariantViolation(f"Hoelder side of the q-hypothesis failed at {t.point}: {ratio}")
        ratios.append((t.point, ratio))
    if not ratios:
        raise ParameterError("no grid point survived the convergence filter")
    alpha = min(r for _, r in ratios)
    return SHConstants(dom, "sh_q", {"q": q}, alpha, ratios, flagged, worst, grid_note)


def sh_ps_scan(dom: Domain, p: float, s: float, grid, norms, grid_note: str = "") -> SHConstants:
    """max over the grid of ||k_a||_{s'} / (||k_a||_{p'} ||k_a||_{q'})."""
    q = exponent_from_split(s, p)
    sc, pc, qc = conjugate_exponent(s), conjugate_exponent(p), conjugate_exponent(q)
    ratios, flagged = [], []
    worst = 0.0
    for a in grid:
        t = norms.table(a, [sc, pc, qc])
        if t.residual > _FLAG_RESIDUAL:
            flagged.append(t.point)
            continue
        worst = max(worst, t.residual)
        ratios.append((t.point, t.norm(sc) / (t.norm(pc) * t.norm(qc))))
    if not ratios:
        raise ParameterError("no grid point survived the convergence filter")
    beta = max(r for _, r in ratios)
    return SHConstants(dom, "sh_ps", {"p": p, "s": s, "q": q}, beta, ratios, flagged, worst, grid_note)


def holder_interp_check(a, p: float, q: float, norms) -> tuple:
    """(lhs, rhs) of ||k_a||_{2p} <= ||k_a||_2^{1-theta} ||k_a||_{2q}^theta."""
    theta = interpolation_theta(p, q)
    if not (0.0 < theta <= 1.0):
        raise ParameterError(f"interpolation parameter theta = {theta} outside (0, 1]")
    t = norms.table(a, [2.0, 2.0 * p, 2.0 * q])
    lhs = t.norm(2.0 * p)
    rhs = t.norm(2.0) ** (1.0 - theta) * t.norm(2.0 * q) ** theta
    if lhs > rhs * (1.0 + 1e-10):
        raise InvariantViolation(f"interpolation inequality failed at {t.point}: {lhs} > {rhs}")
    return lhs, rhs


def stein_weiss_weight_check(a, p: float, q: float, norms) -> tuple:
    """(omega'_p(a), omega_p(a)) with the guaranteed omega'_p <= omega_p.

    Raising the interpolation inequality to the power -2p flips it, so the
    interpolated weight omega'_p = ||k||_2^{-2p(1-theta)} ||k||_{2q}^{-2p theta}
    sits below omega_p = ||k||_{2p}^{-2p}.
    """
    if not (1.0 < p < q):
        raise ParameterError("stein_weiss_weight_check needs 1 < p < q")
    theta = interpolation_theta(p, q)
    t = norms.table(a, [2.0, 2.0 * p, 2.0 * q])
    omega_interp = t.norm(2.0) ** (-2.0 * p * (1.0 - theta)) * t.norm(2.0 * q) ** (-2.0 * p * theta)
    omega_direct = t.norm(2.0 * p) ** (-2.0 * p)
    if omega_interp > omega_direct * (1.0 + 1e-10):
        raise InvariantViolation(
            f"weight comparison failed at {t.point}: {omega_interp} > {omega_direct}")
    return omega_interp, omega_direct


# ---------------------------------------------------------------------------
# finite symbolic kernel combinations


@dataclass(frozen=True)
class KernelFactor:
    """(k_base)^power, optionally divided by ||k_base||_q^power."""

    base: tuple
    power: int = 1
    normalized_at: float | None = None

    def __post_init__(self):
        if self.power < 1:
            raise ParameterError("kernel factor powers must be positive integers")

    def values(self, zs: np.ndarray, dom: Domain, norms=None) -> np.ndarray:
        v = kernel_values(np.asarray(self.base, dtype=complex), zs, dom) ** self.power
        if self.normalized_at is not None:
            if norms is None:
                raise DependencyError("normalized kernel factor needs a norm source")
            v = v / norms.norm(np.asarray(self.base, dtype=complex), self.normalized_at) ** self.power
        return v


def _blaschke_factor_values(c: complex, zs: np.ndarray) -> np.ndarray:
    if c == 0:
        return -zs
    return (abs(c) / c) * (c - zs) / (1.0 - np.conj(c) * zs)


@dataclass(frozen=True)
class BlaschkeFactor:
    """Finite Blaschke product on the disc with the given zeros."""

    zeros: tuple

    def values(self, zs: np.ndarray, dom: Domain, norms=None) -> np.ndarray:
        if dom.kind != DISC:
            raise DomainError("Blaschke factors live on the disc")
        zs = np.asarray(zs, dtype=complex)
        z = zs[:, 0] if zs.ndim == 2 else np.atleast_1d(zs)
        out = np.ones_like(z)
        for c in self.zeros:
            out = out * _blaschke_factor_values(complex(c), z)
        return out


class HoloExpr:
    """Finite linear combination of products of kernel/Blaschke factors.

    Terms are (coefficient, factor tuple); evaluation is linear in the
    coefficients, and sums/products of expressions expand termwise.
    """

    def __init__(self, dom: Domain, terms):
        self.domain = dom
        self.terms = tuple((complex(c), tuple(fs)) for c, fs in terms)

    @classmethod
    def constant(cls, dom: Domain, c) -> "HoloExpr":
        return cls(dom, [(complex(c), ())])

    @classmethod
    def kernel(cls, dom: Domain, a, power: int = 1, normalized_at: float | None = None,
               coeff: complex = 1.0) -> "HoloExpr":
        factor = KernelFactor(_point_key(dom.point(a)), power, normalized_at)
        return cls(dom, [(complex(coeff), (factor,))])

    def __add__(self, other: "HoloExpr") -> "HoloExpr":
        if not isinstance(other, HoloExpr):
            return NotImplemented
        return HoloExpr(self.domain, self.terms + other.terms)

    def __neg__(self) -> "HoloExpr":
        return HoloExpr(self.domain, [(-c, fs) for c, fs in self.terms])

    def __sub__(self, other: "HoloExpr") -> "HoloExpr":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, HoloExpr):
            return HoloExpr(self.domain, [(c1 * c2, fs1 + fs2)
                                          for c1, fs1 in self.terms
                                          for c2, fs2 in other.terms])
        return HoloExpr(self.domain, [(complex(other) * c, fs) for c, fs in self.terms])

    __rmul__ = __mul__

    def eval_many(self, zs: np.ndarray, norms=None) -> np.ndarray:
        zs = np.asarray(zs, dtype=complex)
        if zs.ndim == 1:
            zs = zs.reshape(-1, self.domain.n)
        out = np.zeros(zs.shape[0], dtype=complex)
        cache: dict = {}
        for coeff, factors in self.terms:
            term = np.full(zs.shape[0], coeff, dtype=complex)
            for f in factors:
                if f not in cache:
                    cache[f] = f.values(zs, self.domain, norms)
                term = term * cache[f]
            out += term
        return out

    def eval(self, z, norms=None) -> complex:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return complex(self.eval_many(z.reshape(1, -1), norms)[0])

    def sample(self, rule: QuadratureRule, norms=None) -> BoundarySamples:
        return BoundarySamples(self.eval_many(rule.nodes, norms), rule)
