"""Certified evaluation of the deterministic maps and their limit functions.

The scalar map ``f(r) = r + v1*r/(1+r)`` drives the total population density
of the dominant types; its multitype counterpart ``F`` acts componentwise as
``F_i(x) = x_i + v_i*x_i/(1+x)`` with ``x`` the total. This module evaluates

* iterates and closed-form inverses of ``f`` and ``F``,
* the scaling limit ``H(r) = lim_n f^(n)(r / b1**n)``,
* the per-type correction factors ``G_i(r)`` (infinite products over scaled
  ``H`` values), and
* the pivot-time limit vectors assembled from ``H`` and ``G_i``,

each with an explicit truncation-error certificate where the quantity is a
limit. All functions are pure and safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    BadProbability,
    BadTolerance,
    DimensionMismatch,
    NegativeInput,
    OverflowRisk,
    SolverFailure,
)
from .params import ModelParams

# Reject forward iterates whose projected magnitude b1**n * r would pass this.
OVERFLOW_LIMIT = 1e300

# Fixed internal tolerance for limit evaluations feeding residual reports.
_RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class LimitEval:
    """Value of a limit function with a certified truncation bound.

    ``truncation_bound`` is an upper bound on the distance between ``value``
    and the true limit, ignoring double-precision rounding in the finite
    evaluation itself.
    """

    value: float
    truncation_bound: float
    terms_used: int


@dataclass(frozen=True)
class PsiRoot:
    """Root of the inverse map's scalar equation.

    ``tau`` equals the total of the preimage vector: the inverse of ``F`` at
    ``y`` has components ``(1+tau)/(b_i+tau) * y_i``.
    """

    tau: float
    residual: float


def _check_v1(v1: float) -> float:
    if not (0.0 < v1 <= 1.0):
        raise BadProbability(f"v1={v1!r} must lie in (0, 1]")
    return float(v1)


def _f_once(r: float, v1: float) -> float:
    return r + v1 * r / (1.0 + r)


def f_apply(r: float, n: int, v1: float) -> float:
    """n-th iterate of the scalar map at r; negative n iterates the inverse.

    Raises OverflowRisk when the projected magnitude b1**n * r would exceed
    the representable range.
    """
    v1 = _check_v1(v1)
    r = float(r)
    if r < 0.0:
        raise NegativeInput(f"r={r} must be >= 0")
    if n > 0:
        b1 = 1.0 + v1
        if r > 0.0 and math.log10(r) + n * math.log10(b1) > 300.0:
            raise OverflowRisk(f"f^({n})({r}) projected beyond {OVERFLOW_LIMIT:g}")
        for _ in range(n):
            r = _f_once(r, v1)
        return r
    for _ in range(-n):
        r = f_inverse(r, v1)
    return r


def f_inverse(y: float, v1: float) -> float:
    """Unique r >= 0 with f(r) = y, from r**2 + (b1-y)*r - y = 0.

    Both summands of the numerator are nonnegative for b1 <= 2, so the
    quadratic formula in this arrangement is cancellation-free.
    """
    v1 = _check_v1(v1)
    y = float(y)
    if y < 0.0:
        raise NegativeInput(f"y={y} must be >= 0")
    b1 = 1.0 + v1
    return 0.5 * ((y - b1) + math.sqrt((b1 - y) * (b1 - y) + 4.0 * y))


def _as_state(x: Sequence[float], d: int, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape != (d,):
        raise DimensionMismatch(f"{name} must have length {d}, got shape {arr.shape}")
    if np.any(arr < 0.0):
        raise NegativeInput(f"{name} must be componentwise nonnegative")
    return arr


def F_apply(x: Sequence[float], params: ModelParams) -> np.ndarray:
    """One multitype step: component i becomes x_i * (1 + v_i/(1+x))."""
    arr = _as_state(x, params.d)
    total = float(arr.sum())
    return arr * (1.0 + params.v_array / (1.0 + total))


def _psi(t: float, y: np.ndarray, b: np.ndarray) -> float:
    return t - float(np.sum((1.0 + t) / (b + t) * y))


def _psi_prime(t: float, y: np.ndarray, b: np.ndarray) -> float:
    return 1.0 - float(np.sum((b - 1.0) * y / (b + t) ** 2))


def solve_psi_root(y: Sequence[float], params: ModelParams) -> PsiRoot:
    """Root of psi(t) = t - sum_i (1+t)/(b_i+t) * y_i on (0, total(y)).

    psi is strictly convex with psi(0) < 0 and psi(total) >= 0, so a
    safeguarded Newton iteration started at the right bracket end converges;
    steps leaving the bracket fall back to bisection.
    """
    arr = _as_state(y, params.d, "y")
    b = params.b_array
    total = float(arr.sum())
    if total == 0.0:
        return PsiRoot(tau=0.0, residual=0.0)
    target = 1e-13 * (1.0 + total)
    lo, hi = 0.0, total
    t = total
    val = _psi(t, arr, b)
    for _ in range(200):
        if abs(val) <= target:
            return PsiRoot(tau=t, residual=val)
        if val > 0.0:
            hi = t
        else:
            lo = t
        slope = _psi_prime(t, arr, b)
        step_ok = False
        if slope > 0.0:
            t_new = t - val / slope
            if lo < t_new < hi:
                step_ok = True
        if not step_ok:
            t_new = 0.5 * (lo + hi)
        if t_new == t or hi - lo <= 4.0 * math.ulp(hi):
            # Bracket exhausted at double precision; accept if close enough.
            if abs(val) <= 100.0 * target:
                return PsiRoot(tau=t, residual=val)
            break
        t = t_new
        val = _psi(t, arr, b)
    raise SolverFailure(
        f"inverse-map root solve did not reach |psi| <= {target:g} (last {val:g})"
    )


def F_inverse(y: Sequence[float], params: ModelParams) -> np.ndarray:
    """Preimage of y under the multitype map; zero components stay exact
    zeros, so the dominant-only subspace is backward invariant bit-for-bit."""
    arr = _as_state(y, params.d, "y")
    if not arr.any():
        return np.zeros(params.d)
    tau = solve_psi_root(arr, params).tau
    return (1.0 + tau) / (params.b_array + tau) * arr


def F_iterate(x: Sequence[float], n: int, params: ModelParams) -> np.ndarray:
    """n-fold composition of the multitype map (inverse map for n < 0)."""
    arr = _as_state(x, params.d)
    if n > 0:
        total = float(arr.sum())
        b1 = params.b[0]
        if total > 0.0 and math.log10(total) + n * math.log10(b1) > 300.0:
            raise OverflowRisk(
                f"F^({n}) projected beyond {OVERFLOW_LIMIT:g} from total {total:g}"
            )
        for _ in range(n):
            arr = F_apply(arr, params)
        return arr
    for _ in range(-n):
        arr = F_inverse(arr, params)
    return arr


def F_iterate_dominant(x: Sequence[float], n: int, params: ModelParams) -> np.ndarray:
    """Closed-form iterate for states with all non-dominant components zero.

    On that subspace the multitype iterate collapses to the scalar one:
    F^(n)(x) = (f^(n)(total)/total) * x. Intended as an independent
    cross-check of :func:`F_iterate`, not a replacement.
    """
    arr = _as_state(x, params.d)
    if np.any(arr[params.d0:] != 0.0):
        raise NegativeInput(
            "closed-form iterate requires zero non-dominant components"
        )
    total = float(arr.sum())
    if total == 0.0:
        return np.zeros(params.d)
    return (f_apply(total, n, params.v[0]) / total) * arr


def H_eval(r: float, v1: float, tol: float) -> LimitEval:
    """Scaling limit H(r) = lim_k f^(k)(r / b1**k) with a certified tail.

    The iterate differences telescope into a geometric series, giving the
    explicit bound |H(r) - f^(k)(r/b1**k)| <= r**2 * v1 * b1**(-k-1)/(b1-1);
    k is the smallest index pushing that bound below tol. The finite iterate
    itself already satisfies r - r**2 <= value <= r.
    """
    v1 = _check_v1(v1)
    r = float(r)
    if r < 0.0:
        raise NegativeInput(f"r={r} must be >= 0")
    if not (tol > 0.0):
        raise BadTolerance(f"tol={tol!r} must be > 0")
    if r == 0.0:
        return LimitEval(value=0.0, truncation_bound=0.0, terms_used=0)
    if r > 1e150:
        raise OverflowRisk(f"r={r:g} too large for a finite tail bound")
    b1 = 1.0 + v1

    def tail(k: int) -> float:
        return r * r * v1 * b1 ** (-k - 1) / (b1 - 1.0)

    lead = r * r * v1 / (b1 - 1.0)
    k = 0 if lead <= tol * b1 else max(0, math.ceil(math.log(lead / tol) / math.log(b1)) - 1)
    while tail(k) > tol:
        k += 1
    value = r / b1**k
    for _ in range(k):
        value = _f_once(value, v1)
    return LimitEval(value=value, truncation_bound=tail(k), terms_used=k)


def G_eval(r: float, params: ModelParams, tol: float) -> list[LimitEval]:
    """Per-type correction factors G_i(r), each in (0, 1].

    G_i is the infinite product over m >= 1 of
    (1 + H(r/b1**m)/b_i) / (1 + H(r/b1**m)). Since H(s) <= s, the dropped
    factors beyond M contribute at most r*b1**(-M)/(b1-1) to |log G_i|; M is
    chosen to push that below tol/2 and each inner H evaluation gets a
    tol/(4M) budget, so the combined certificate stays below tol.
    """
    r = float(r)
    if r < 0.0:
        raise NegativeInput(f"r={r} must be >= 0")
    if not (tol > 0.0):
        raise BadTolerance(f"tol={tol!r} must be > 0")
    d = params.d
    if r == 0.0:
        return [LimitEval(value=1.0, truncation_bound=0.0, terms_used=0)] * d
    v1 = params.v[0]
    b1 = params.b[0]

    def log_tail(M: int) -> float:
        return r * b1 ** (-M) / (b1 - 1.0)

    M = max(1, math.ceil(math.log(max(2.0 * r / ((b1 - 1.0) * tol), 1.0)) / math.log(b1)))
    while log_tail(M) > tol / 2.0:
        M += 1
    inner_tol = tol / (4.0 * M)

    for _ in range(4):
        h_vals = [H_eval(r / b1**m, v1, inner_tol) for m in range(1, M + 1)]
        tail_bound = log_tail(M)
        log_err = tail_bound + 2.0 * sum(h.truncation_bound for h in h_vals)
        out = []
        ok = True
        for i in range(d):
            bi = params.b[i]
            g = 1.0
            for h in h_vals:
                g *= (1.0 + h.value / bi) / (1.0 + h.value)
            bound = g * math.expm1(log_err)
            ok = ok and bound <= tol
            out.append(LimitEval(value=g, truncation_bound=bound, terms_used=M))
        if ok:
            return out
        M += 2
        inner_tol /= 2.0
    raise SolverFailure(f"G certificate did not reach tol={tol:g} at r={r:g}")


@dataclass(frozen=True)
class TheoremLimits:
    """Limit vectors at the pivot time assembled from one sample of the
    martingale limits."""

    thm1: np.ndarray
    thm2_total: float
    thm2_vector: np.ndarray


def theorem_limits(
    W: Sequence[float], n: int, params: ModelParams, tol: float = 1e-8
) -> TheoremLimits:
    """Limits paired with a sampled martingale-limit vector W.

    thm1_i = W_i * G_i(W_0); thm2_total = f^(n)(H(W_0)); thm2_vector spreads
    thm2_total over the dominant types in proportion W_i/W_0 and is zero
    elsewhere. W_0 is the sum of the first d0 components. W_0 = 0 yields
    exact zeros for the density limits instead of 0/0.
    """
    arr = _as_state(W, params.d, "W")
    d0 = params.d0
    w0 = float(arr[:d0].sum())
    g = G_eval(w0, params, tol)
    thm1 = arr * np.array([gi.value for gi in g])
    thm2_vector = np.zeros(params.d)
    if w0 == 0.0:
        return TheoremLimits(thm1=thm1, thm2_total=0.0, thm2_vector=thm2_vector)
    h = H_eval(w0, params.v[0], tol)
    total = f_apply(h.value, n, params.v[0])
    thm2_vector[:d0] = arr[:d0] / w0 * total
    return TheoremLimits(thm1=thm1, thm2_total=total, thm2_vector=thm2_vector)


def scaling_limit_residuals(
    x: Sequence[float], n_list: Sequence[int], params: ModelParams
) -> list[dict]:
    """Distance of finite scaled iterates from their limits, per step count.

    For each n the report holds (a) the l1 distance between F^(n)(x/b1**n)
    and the dominant-block limit (H(x_0)/x_0)*(x_1..x_{d0},0,..,0), and (b)
    for each non-dominant type i the gap between the rescaled component
    F_i^(n)(x/b1**n) * (b1/b_i)**n and its limit x_i * G_i(x_0). The scaling
    weight applied to non-dominant components is b1**(-n), an admissible
    choice for the componentwise limit.
    """
    arr = _as_state(x, params.d)
    d0 = params.d0
    b1 = params.b[0]
    x0 = float(arr[:d0].sum())
    h0 = H_eval(x0, params.v[0], _RESIDUAL_TOL).value
    ratio = h0 / x0 if x0 > 0.0 else 0.0
    target_a = np.zeros(params.d)
    target_a[:d0] = arr[:d0] * ratio
    g = G_eval(x0, params, _RESIDUAL_TOL)
    rows = []
    for n in n_list:
        if n < 0:
            raise NegativeInput(f"step counts must be >= 0, got {n}")
        fn = F_iterate(arr / b1**n, n, params)
        row = {"n": int(n), "residual_dominant": float(np.abs(fn - target_a).sum())}
        for i in range(d0, params.d):
            rescaled = fn[i] * (b1 / params.b[i]) ** n
            row[f"residual_type_{i + 1}"] = abs(rescaled - arr[i] * g[i].value)
        rows.append(row)
    return rows
