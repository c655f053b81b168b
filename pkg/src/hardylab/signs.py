"""Bernoulli sign machinery: exact and Monte Carlo expectations.

Expectations over independent +-1 signs are computed either by exact
enumeration of all 2^N patterns (N <= 20) or by seeded Monte Carlo.
Pattern order is fixed (sign j of pattern i is read off bit j of i) and
reductions happen in a fixed order, so every figure is reproducible.

Khintchine-type comparability constants are never hard-coded anywhere in
the package: ratios are measured per instance and reported.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ParameterError
from .geometry import QuadratureRule, seq_norm
from .sequences import PointSequence, normalized_kernel_matrix

EXACT_CAP = 20


@dataclass(frozen=True)
class SignPattern:
    """One assignment of +-1 signs."""

    signs: tuple

    def __post_init__(self):
        if any(s not in (-1, 1) for s in self.signs):
            raise ParameterError("sign patterns contain only +1 and -1")

    def array(self) -> np.ndarray:
        return np.asarray(self.signs, dtype=float)


@dataclass
class ExpectationEstimate:
    """Expectation value with its provenance (exact or sampled)."""

    value: float
    method: str
    stderr: float = 0.0
    samples: int | None = None
    seed: int | None = None

    def to_json(self) -> dict:
        out = {"value": self.value, "method": self.method, "stderr": self.stderr}
        if self.samples is not None:
            out["samples"] = self.samples
            out["seed"] = self.seed
        return out


def sign_matrix_chunks(n: int, chunk: int = 1 << 14):
    """Yield (C, n) blocks of all 2^n sign patterns in index order."""
    if n > EXACT_CAP:
        raise CapacityError(f"exact enumeration capped at {EXACT_CAP} signs, got {n}")
    total = 1 << n
    shifts = np.arange(n, dtype=np.uint64)
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(lo + chunk, total), dtype=np.uint64)
        bits = (idx[:, None] >> shifts[None, :]) & 1
        yield bits.astype(float) * 2.0 - 1.0


def sampled_sign_matrix(n: int, samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.integers(0, 2, size=(samples, n)).astype(float) * 2.0 - 1.0


def _require_mc_args(samples, seed):
    if samples is None or samples < 1:
        raise ParameterError("Monte Carlo needs samples >= 1")
    if seed is None:
        raise ParameterError("Monte Carlo needs an explicit seed")


def expect(fn, n: int, method: str = "exact", samples: int | None = None,
           seed: int | None = None) -> ExpectationEstimate:
    """E[fn(eps)] for fn mapping a +-1 vector to a real number."""
    if n < 1:
        raise ParameterError("need at least one sign")
    if method == "exact":
        total = 0.0
        for block in sign_matrix_chunks(n):
            total += float(np.sum([fn(row) for row in block]))
        return ExpectationEstimate(total / (1 << n), "exact")
    if method == "monte-carlo":
        _require_mc_args(samples, seed)
        vals = np.array([fn(row) for row in sampled_sign_matrix(n, samples, seed)], dtype=float)
        stderr = float(np.std(vals, ddof=1) / np.sqrt(samples)) if samples > 1 else np.inf
        return ExpectationEstimate(float(np.mean(vals)), "monte-carlo", stderr, samples, seed)
    raise ParameterError(f"unknown expectation method {method!r}")


def khintchine_ratio(x, q: float, method: str = "exact", samples: int | None = None,
                     seed: int | None = None) -> float:
    """E|sum_a eps_a x_a|^q / (sum |x_a|^2)^{q/2}; equals 1 at q = 2."""
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1 or x.size == 0 or not np.any(x):
        raise ParameterError("khintchine_ratio needs a nonzero vector")
    if q < 1:
        raise ParameterError("khintchine_ratio needs q >= 1")
    denom = float(np.sum(np.abs(x) ** 2) ** (q / 2.0))
    n = x.size
    if method == "exact":
        total = 0.0
        for block in sign_matrix_chunks(n):
            total += float(np.sum(np.abs(block @ x) ** q))
        return total / (1 << n) / denom
    _require_mc_args(samples, seed)
    vals = np.abs(sampled_sign_matrix(n, samples, seed) @ x) ** q
    return float(np.mean(vals)) / denom


def khintchine_ratio_estimate(x, q: float, samples: int, seed: int | None) -> tuple:
    """Monte Carlo Khintchine ratio with its standard error."""
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1 or x.size == 0 or not np.any(x):
        raise ParameterError("khintchine_ratio_estimate needs a nonzero vector")
    if q < 1:
        raise ParameterError("khintchine_ratio_estimate needs q >= 1")
    _require_mc_args(samples, seed)
    denom = float(np.sum(np.abs(x) ** 2) ** (q / 2.0))
    vals = np.abs(sampled_sign_matrix(x.size, samples, seed) @ x) ** q / denom
    stderr = float(np.std(vals, ddof=1) / np.sqrt(samples)) if samples > 1 else np.inf
    return float(np.mean(vals)), stderr


def weak_from_carleson_check(seq: PointSequence, q: float, mu, rule: QuadratureRule,
                             d_q: float, method: str = "exact",
                             samples: int | None = None, seed: int | None = None) -> dict:
    """Verify the sign-averaging route from the synthesis bound to the
    squared-modulus bound for one coefficient vector.

    Computes, with k_{q,a} normalized on the rule,

      left   = || sum |mu_a|^2 |k_{q,a}|^2 ||_{q/2}^{q/2}
      middle = E || sum mu_a eps_a k_{q,a} ||_q^q
      right  = D^q ||mu||_q^q

    The per-pattern synthesis ratio never exceeds the true constant, so
    the right inequality is asserted against max(d_q, best ratio seen
    here); the report records whether the supplied d_q already dominated.
    The left/middle comparison carries the Khintchine constant, so only
    finiteness and positivity are asserted for it.
    """
    if q < 2:
        raise ParameterError("the sign-averaging chain needs q >= 2")
    mu = np.asarray(mu, dtype=complex)
    if mu.shape != (len(seq),):
        raise ParameterError("one coefficient per sequence point is required")
    A = normalized_kernel_matrix(seq, q, rule)
    w = rule.weights
    n = len(seq)
    mu_norm_q = seq_norm(mu, q)

    dens = (np.abs(A) ** 2) @ (np.abs(mu) ** 2)
    left = float(np.sum(w * dens ** (q / 2.0)))

    def pattern_norms(blocks):
        total, count, best, sq = 0.0, 0, 0.0, 0.0
        for block in blocks:
            f_vals = (block * mu[None, :]) @ A.T          # (C, M)
            norms_q = np.sum(w[None, :] * np.abs(f_vals) ** q, axis=1)
            total += float(np.sum(norms_q))
            sq += float(np.sum(norms_q**2))
            count += block.shape[0]
            best = max(best, float(np.max(norms_q)))
        return total / count, best, sq, count

    if method == "exact":
        middle, best_q, _, _ = pattern_norms(sign_matrix_chunks(n))
        stderr = 0.0
    else:
        _require_mc_args(samples, seed)
        middle, best_q, sq, count = pattern_norms([sampled_sign_matrix(n, samples, seed)])
        var = max(sq / count - middle**2, 0.0) * count / max(count - 1, 1)
        stderr = float(np.sqrt(var / count))

    d_local = best_q ** (1.0 / q) / mu_norm_q
    d_eff = max(d_q, d_local)
    right = d_eff**q * mu_norm_q**q
    slack = 1e-8 * right + 4.0 * stderr
    right_ok = middle <= right + slack
    left_factor = left / middle if middle > 0 else np.inf
    if not (np.isfinite(left_factor) and left_factor > 0):
        raise ParameterError("degenerate instance: the averaged synthesis norm vanished")
    return {
        "q": q,
        "left": left,
        "middle": middle,
        "right": right,
        "left_factor": left_factor,
        "right_factor": middle / right,
        "right_ok": bool(right_ok),
        "d_q_given": d_q,
        "d_q_local": d_local,
        "d_q_given_sufficient": bool(middle <= d_q**q * mu_norm_q**q * (1.0 + 1e-8) + 4.0 * stderr),
        "method": method,
        "stderr": stderr,
    }
