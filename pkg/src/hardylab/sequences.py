"""Finite point sequences: separation geometry, Carleson constants, duals.

A PointSequence is an ordered list of distinct interior points.  The
module measures how far the sequence is from being interpolating in three
ways: Gleason separation, the classical window constant on the disc, and
operator-norm Carleson constants of the kernel synthesis map; and it
constructs dual systems (collocation in the kernel span, or closed-form
Blaschke products on the disc) normalized so that rho_a(b) is
delta_ab * ||k_b||_{p'} for finite p and delta_ab for p = inf.

Operator norms away from q = 2 are nonconvex; the estimates here are
certified lower bounds from a duality-map power iteration with seeded
restarts, and every report carries the maximizing certificate.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    IllConditionedError,
    InvariantViolation,
    NumericError,
    ParameterError,
    UnsupportedDomainError,
)
from .geometry import BALL2, DISC, Domain, QuadratureRule, lp_norm, seq_norm
from .kernels import (
    INF,
    BlaschkeFactor,
    HoloExpr,
    KernelFactor,
    conjugate_exponent,
    kernel_samples,
    kernel_values,
    _point_key,
)


@dataclass(frozen=True)
class PointSequence:
    """Ordered distinct interior points of one domain."""

    domain: Domain
    points: tuple

    def __post_init__(self):
        if len(self.points) < 1:
            raise ParameterError("a point sequence needs at least one point")
        seen = set()
        for pt in self.points:
            self.domain.point(np.asarray(pt, dtype=complex))
            if pt in seen:
                raise ParameterError(f"repeated point {pt} in sequence")
            seen.add(pt)

    @classmethod
    def create(cls, dom: Domain, pts) -> "PointSequence":
        keys = tuple(_point_key(dom.point(p)) for p in pts)
        return cls(dom, keys)

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, i: int) -> np.ndarray:
        return np.asarray(self.points[i], dtype=complex)

    def arrays(self) -> np.ndarray:
        return np.asarray(self.points, dtype=complex).reshape(len(self), self.domain.n)

    def to_json(self) -> dict:
        arr = self.arrays()
        return {
            "domain": self.domain.kind,
            "points_re": arr.real.tolist(),
            "points_im": arr.imag.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "PointSequence":
        pts = np.asarray(data["points_re"], dtype=float) + 1j * np.asarray(data["points_im"], dtype=float)
        return cls.create(Domain(data["domain"]), list(np.atleast_2d(pts)))

    @classmethod
    def from_csv(cls, dom: Domain, path) -> "PointSequence":
        pts = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row:
                    continue
                try:
                    vals = [float(x) for x in row]
                except ValueError:
                    continue  # header line
                if len(vals) != 2 * dom.n:
                    raise ParameterError(
                        f"{dom.kind} CSV rows need {2 * dom.n} columns (re/im per coordinate)")
                pts.append([complex(vals[2 * j], vals[2 * j + 1]) for j in range(dom.n)])
        if not pts:
            raise ParameterError(f"no points parsed from {path}")
        return cls.create(dom, pts)


# ---------------------------------------------------------------------------
# Gleason geometry


def gleason_distance(a, b, dom: Domain) -> float:
    """Pseudo-hyperbolic distance between two interior points."""
    a = dom.point(a)
    b = dom.point(b)
    if dom.kind == DISC:
        return abs((a[0] - b[0]) / (1.0 - np.conj(a[0]) * b[0]))
    if dom.kind == BALL2:
        pairing = 1.0 - np.vdot(a, b)  # 1 - <b, a>
        one_minus = (1.0 - np.linalg.norm(a) ** 2) * (1.0 - np.linalg.norm(b) ** 2) / abs(pairing) ** 2
        return float(np.sqrt(max(0.0, 1.0 - one_minus)))
    return max(abs((a[j] - b[j]) / (1.0 - np.conj(a[j]) * b[j])) for j in range(2))


def gleason_product_delta(seq: PointSequence) -> float:
    """min over a of prod_{b != a} gleason_distance(a, b); 1 for a singleton."""
    n = len(seq)
    if n == 1:
        return 1.0
    best = np.inf
    for i in range(n):
        prod = 1.0
        for j in range(n):
            if j != i:
                prod *= gleason_distance(seq[i], seq[j], seq.domain)
        best = min(best, prod)
    return float(best)


def carleson_window_constant(seq: PointSequence) -> float:
    """Classical window constant sup_Q (sum_{a in Q} (1 - |a|^2)) / side(Q).

    Windows are centered at each point's argument, with dyadic side
    lengths down past the smallest boundary distance in the sequence; the
    returned value is the maximum over this searched family.
    """
    if seq.domain.kind != DISC:
        raise UnsupportedDomainError("window constants are defined for disc sequences")
    pts = seq.arrays()[:, 0]
    radii = np.abs(pts)
    args = np.angle(pts)
    depth = int(np.ceil(np.log2(1.0 / max(np.min(1.0 - radii), 1e-12)))) + 1
    sides = [2.0**-k for k in range(depth + 1)]
    best = 0.0
    for theta0 in args:
        ang = np.abs(np.mod(args - theta0 + np.pi, 2.0 * np.pi) - np.pi)
        for ell in sides:
            inside = (radii >= 1.0 - ell) & (ang <= ell)
            if np.any(inside):
                best = max(best, float(np.sum(1.0 - radii[inside] ** 2) / ell))
    return best


# ---------------------------------------------------------------------------
# Carleson constants


@dataclass
class CarlesonReport:
    """Estimate of a synthesis-operator norm with its certificate."""

    q: float
    d_q: float | None = None
    weak_d_q: float | None = None
    method: str = ""
    certificate: np.ndarray | None = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "q": self.q,
            "method": self.method,
            "details": self.details,
        }
        if self.d_q is not None:
            out["d_q"] = self.d_q
        if self.weak_d_q is not None:
            out["weak_d_q"] = self.weak_d_q
        if self.certificate is not None:
            out["certificate_re"] = np.real(self.certificate).tolist()
            out["certificate_im"] = np.imag(self.certificate).tolist()
        return out


def normalized_kernel_matrix(seq: PointSequence, q: float, rule: QuadratureRule) -> np.ndarray:
    """Columns k_{q,a} sampled on the rule, normalized on the rule itself."""
    cols = []
    for i in range(len(seq)):
        vals = kernel_samples(seq[i], rule).values
        norm = float(np.sum(rule.weights * np.abs(vals) ** q) ** (1.0 / q))
        cols.append(vals / norm)
    return np.column_stack(cols)


def _weighted_lq(vals: np.ndarray, w: np.ndarray, q: float) -> float:
    return float(np.sum(w * np.abs(vals) ** q) ** (1.0 / q))


def _duality_map(x: np.ndarray, r: float) -> np.ndarray:
    mag = np.abs(x)
    out = np.zeros_like(x)
    nz = mag > 0
    out[nz] = mag[nz] ** (r - 1.0) * (x[nz] / mag[nz])
    return out


def _power_iteration_lq(A: np.ndarray, w: np.ndarray, q: float, starts, max_iter: int,
                        rtol: float = 1e-13):
    """Best ratio ||A mu||_{L^q} / ||mu||_{l^q} over duality-map iterations."""
    qc = conjugate_exponent(q)
    best_ratio, best_mu, used_iters = -np.inf, None, 0
    for start in starts:
        mu = np.asarray(start, dtype=complex)
        mu = mu / seq_norm(mu, q)
        ratio = _weighted_lq(A @ mu, w, q)
        for it in range(max_iter):
            grad = A.conj().T @ (w * _duality_map(A @ mu, q))
            if not np.any(grad):
                break
            cand = _duality_map(grad, qc)
            cand = cand / seq_norm(cand, q)
            cand_ratio = _weighted_lq(A @ cand, w, q)
            progressed = cand_ratio > ratio * (1.0 + rtol)
            if cand_ratio > ratio:
                mu, ratio = cand, cand_ratio
            used_iters = max(used_iters, it + 1)
            if not progressed:
                break
        if ratio > best_ratio:
            best_ratio, best_mu = ratio, mu
    return best_ratio, best_mu, used_iters


def _default_starts(n: int, restarts: int, seed: int, positive: bool = False):
    starts = [np.ones(n)]
    starts.extend(np.eye(n)[i] for i in range(n))
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        if positive:
            starts.append(np.abs(rng.standard_normal(n)) + 1e-3)
        else:
            starts.append(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return starts


def carleson_constant(seq: PointSequence, q: float, rule: QuadratureRule, *,
                      method: str = "auto", restarts: int = 32, seed: int = 0,
                      max_iter: int = 5000) -> CarlesonReport:
    """Least D with ||sum mu_a k_{q,a}||_q <= D ||mu||_q, at desk scale.

    q = 2 is solved exactly (up to the eigensolve) through the Gram matrix
    of the normalized kernels; q = 1 is attained at a coordinate vector;
    other q use the power iteration and give certified lower bounds.
    """
    if q == INF or q < 1:
        raise ParameterError("carleson_constant needs 1 <= q < inf")
    A = normalized_kernel_matrix(seq, q, rule)
    w = rule.weights
    n = len(seq)
    if q == 1:
        masses = np.sum(w[:, None] * np.abs(A), axis=0)
        i = int(np.argmax(masses))
        return CarlesonReport(q=q, d_q=float(masses[i]), method="coordinate-extreme",
                              certificate=np.eye(n)[i].astype(complex),
                              details={"resolution": rule.resolution})
    if q == 2 and method in ("auto", "gram-spectral"):
        gram = A.conj().T @ (w[:, None] * A)
        try:
            evals, evecs = np.linalg.eigh(gram)
        except np.linalg.LinAlgError as exc:  # pragma: no cover
            raise NumericError(f"Gram eigensolve failed: {exc}") from exc
        top = int(np.argmax(evals))
        return CarlesonReport(q=q, d_q=float(np.sqrt(max(evals[top], 0.0))),
                              method="gram-spectral", certificate=evecs[:, top],
                              details={"resolution": rule.resolution})
    ratio, mu, iters = _power_iteration_lq(A, w, q, _default_starts(n, restarts, seed),
                                           max_iter)
    return CarlesonReport(q=q, d_q=ratio, method="power-iteration",
                          certificate=mu,
                          details={"restarts": restarts, "seed": seed,
                                   "iterations": iters, "resolution": rule.resolution})


def weak_carleson_constant(seq: PointSequence, q: float, rule: QuadratureRule, *,
                           restarts: int = 32, seed: int = 0,
                           max_iter: int = 5000) -> CarlesonReport:
    """Least D with ||sum |mu_a|^2 |k_{q,a}|^2||_{q/2} <= D ||mu||_q^2.

    Only |mu_a|^2 enters, so the search runs over nonnegative t on the
    l^{q/2} sphere.  q = 2 is exact: positivity makes the L^1 norm of the
    sum additive, so the best constant is the largest column mass (1 by
    normalization).
    """
    if q < 2:
        raise ParameterError("weak Carleson constants need q >= 2")
    A = normalized_kernel_matrix(seq, q, rule)
    B = np.abs(A) ** 2
    w = rule.weights
    r = q / 2.0
    n = len(seq)
    if q == 2:
        masses = B.T @ w
        i = int(np.argmax(masses))
        if masses[i] > 1.0 + 1e-10:
            raise InvariantViolation(f"weak 2-Carleson mass exceeded 1: {masses[i]}")
        return CarlesonReport(q=q, weak_d_q=float(masses[i]), method="column-mass",
                              certificate=np.eye(n)[i].astype(complex),
                              details={"resolution": rule.resolution})
    ratio, t, iters = _power_iteration_lq(B, w, r, _default_starts(n, restarts, seed, positive=True),
                                          max_iter)
    return CarlesonReport(q=q, weak_d_q=ratio, method="power-iteration",
                          certificate=np.sqrt(np.abs(t)).astype(complex),
                          details={"restarts": restarts, "seed": seed,
                                   "iterations": iters, "resolution": rule.resolution})


def weak_ratio_at(seq: PointSequence, q: float, mu, rule: QuadratureRule) -> float:
    """||sum |mu_a|^2 |k_{q,a}|^2||_{q/2} / ||mu||_q^2 for one coefficient vector."""
    if q < 2:
        raise ParameterError("weak Carleson ratios need q >= 2")
    A = normalized_kernel_matrix(seq, q, rule)
    mu = np.asarray(mu, dtype=complex)
    dens = (np.abs(A) ** 2) @ (np.abs(mu) ** 2)
    r = q / 2.0
    return float(np.sum(rule.weights * dens**r) ** (1.0 / r) / seq_norm(mu, q) ** 2)


# ---------------------------------------------------------------------------
# dual systems


@dataclass
class DualSystem:
    """System {rho_a} with rho_a(b) = delta_ab * scale_b.

    ``scales`` is ||k_b||_{p'} for finite target exponents and 1 for the
    p = inf convention.  Matrix-based systems store rho_a = sum_c X[a, c] k_c;
    Blaschke systems are closed form and exact on the disc.
    """

    sequence: PointSequence
    p: float
    method: str
    scales: np.ndarray
    coefficients: np.ndarray | None = None

    @property
    def blaschke(self) -> bool:
        return self.coefficients is None

    def rho_expr(self, i: int) -> HoloExpr:
        dom = self.sequence.domain
        if not self.blaschke:
            terms = [(self.coefficients[i, c], (KernelFactor(self.sequence.points[c]),))
                     for c in range(len(self.sequence))]
            return HoloExpr(dom, terms)
        zeros = tuple(self.sequence.points[j][0] for j in range(len(self.sequence)) if j != i)
        factor = BlaschkeFactor(zeros)
        at_a = factor.values(self.sequence[i].reshape(1, -1), dom)[0] if zeros else 1.0
        return HoloExpr(dom, [(self.scales[i] / at_a, (factor,))])

    def rho_values(self, i: int, zs: np.ndarray, norms=None) -> np.ndarray:
        return self.rho_expr(i).eval_many(zs, norms)

    def delta_residual(self) -> float:
        """max_{a,b} |rho_a(b) - delta_ab scale_b| / scale_b."""
        pts = self.sequence.arrays()
        worst = 0.0
        for i in range(len(self.sequence)):
            vals = self.rho_values(i, pts)
            target = np.zeros(len(self.sequence), dtype=complex)
            target[i] = self.scales[i]
            worst = max(worst, float(np.max(np.abs(vals - target) / self.scales)))
        return worst

    def to_json(self) -> dict:
        out = {
            "method": self.method,
            "p": "inf" if self.p == INF else self.p,
            "scales": self.scales.tolist(),
            "sequence": self.sequence.to_json(),
        }
        if self.coefficients is not None:
            out["coefficients_re"] = self.coefficients.real.tolist()
            out["coefficients_im"] = self.coefficients.imag.tolist()
        return out


_COND_LIMIT = 1e12


def _collocation_matrix(seq: PointSequence) -> np.ndarray:
    pts = seq.arrays()
    n = len(seq)
    K = np.empty((n, n), dtype=complex)
    for c in range(n):
        K[:, c] = kernel_values(seq[c], pts, seq.domain)
    return K


def _solve_dual(seq: PointSequence, scales: np.ndarray, tikhonov: bool) -> np.ndarray:
    K = _collocation_matrix(seq)
    cond = np.linalg.cond(K)
    if cond > _COND_LIMIT:
        if not tikhonov:
            raise IllConditionedError(
                f"collocation matrix condition {cond:.3e} beyond {_COND_LIMIT:.0e}; "
                "points too close -- consider tikhonov=True")
        eps = 1e-12 * float(np.trace(K).real)
        K = K + eps * np.eye(len(seq))
        warnings.warn(f"Tikhonov regularization applied (eps = {eps:.3e}); "
                      "re-check the delta residual", stacklevel=2)
    try:
        X = np.linalg.solve(K, np.diag(scales.astype(complex))).T
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"dual system solve failed: {exc}") from exc
    return X


def dual_system_gram(seq: PointSequence, norms, *, tikhonov: bool = False) -> DualSystem:
    """Minimal-norm dual system in span{k_c} for exponent 2."""
    scales = np.array([norms.norm(seq[i], 2.0) for i in range(len(seq))])
    X = _solve_dual(seq, scales, tikhonov)
    return DualSystem(seq, 2.0, "gram2", scales, X)


def dual_system_collocation(seq: PointSequence, p: float, norms, *,
                            tikhonov: bool = False) -> DualSystem:
    """Same collocation solve with right-hand side ||k_a||_{p'}."""
    pc = conjugate_exponent(p)
    scales = np.array([norms.norm(seq[i], pc) for i in range(len(seq))])
    X = _solve_dual(seq, scales, tikhonov)
    return DualSystem(seq, float(p), "collocation", scales, X)


def dual_system_blaschke(seq: PointSequence, p: float, norms=None) -> DualSystem:
    """Closed-form Blaschke dual on the disc.

    rho_a = scale_a * B_a / B_a(a) with B_a the Blaschke product over the
    other points; scale_a is ||k_a||_{p'} for finite p and 1 for p = inf,
    where the interpolation targets carry no kernel-norm factor.
    """
    if seq.domain.kind != DISC:
        raise UnsupportedDomainError("Blaschke duals require the disc")
    if p == INF:
        scales = np.ones(len(seq))
    else:
        if norms is None:
            raise ParameterError("finite-p Blaschke duals need a norm source")
        pc = conjugate_exponent(p)
        scales = np.array([norms.norm(seq[i], pc) for i in range(len(seq))])
    return DualSystem(seq, float(p) if p != INF else INF, "blaschke", scales, None)


def dual_bound(seq: PointSequence, p: float, dual: DualSystem, rule: QuadratureRule,
               norms=None) -> float:
    """sup_a ||rho_a||_p by quadrature (max over nodes when p = inf)."""
    best = 0.0
    for i in range(len(seq)):
        best = max(best, lp_norm(dual.rho_expr(i).sample(rule, norms), p))
    return best
