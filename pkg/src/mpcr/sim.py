"""Exact simulation of the multitype PCR chain and its branching majorant.

Each molecule of type i replicates with probability ``v_i*K/(K+z)`` given the
current total ``z``; the majorant uses the saturation-free probability
``v_i``. Both are advanced with exact binomial draws instead of per-molecule
Bernoulli trials, and the shared-uniform coupling of the two processes is
realized by a multinomial split of the shared individuals, which reproduces
the joint one-step law exactly.

Randomness comes from counter-based Philox streams keyed by
``(root_seed, stream_id)``: replicates on distinct streams are independent
and results do not depend on scheduling order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import BadProbability, CouplingViolation, NegativeInput, OverflowRisk
from .params import MAX_POPULATION, ModelParams, PopulationState, _pow_int


class SimMode(str, Enum):
    MPCR_ONLY = "mpcr_only"
    COUPLED = "coupled"
    GW_ONLY = "gw_only"


@dataclass
class RngStream:
    """Reproducible random stream keyed by (root_seed, stream_id).

    Equal keys give bit-identical draw sequences; distinct stream ids give
    statistically independent streams (counter-based generator).
    """

    root_seed: int
    stream_id: int = 0
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        key = np.array([self.root_seed, self.stream_id], dtype=np.uint64)
        self.generator = np.random.Generator(np.random.Philox(key=key))


@dataclass
class Trajectory:
    """Time-indexed states of one simulated run, with scaling metadata."""

    params: ModelParams
    mode: SimMode
    states: list[PopulationState]

    @property
    def n_steps(self) -> int:
        return len(self.states) - 1

    def z_at(self, n: int) -> np.ndarray:
        return self.states[n].z

    def y_at(self, n: int) -> np.ndarray:
        y = self.states[n].y
        if y is None:
            raise CouplingViolation("trajectory carries no coupled majorant")
        return y


def sample_binomial(n: int, p: float, rng: RngStream) -> int:
    """One exact Binomial(n, p) draw.

    Delegates to the generator's binomial sampler: exact inversion for small
    n*p and an O(1) rejection algorithm for large n*p, never a normal
    approximation.
    """
    if not (0.0 <= p <= 1.0):
        raise BadProbability(f"p={p!r} must lie in [0, 1]")
    if n < 0:
        raise NegativeInput(f"n={n} must be >= 0")
    return int(rng.generator.binomial(n, p))


def mpcr_step(
    state: PopulationState, params: ModelParams, rng: RngStream
) -> PopulationState:
    """Advance the chain one cycle: type i gains Binomial(z_i, v_i*K/(K+z))."""
    z = state.z
    total = float(z.sum())
    p = params.v_array * params.K / (params.K + total)
    gains = rng.generator.binomial(z, p)
    return PopulationState(n=state.n + 1, z=z + gains)


def _split_shared(
    z: np.ndarray, p: np.ndarray, q: np.ndarray, rng: RngStream
) -> tuple[np.ndarray, np.ndarray]:
    """Multinomial(z; p, q-p, 1-q) via conditional binomials.

    Returns (A, B): A individuals succeed in both processes, B only in the
    saturation-free one. Sampling A ~ Bin(z, p) then B ~ Bin(z-A, (q-p)/(1-p))
    realizes the exact joint cell probabilities; p = 1 forces A = z, B = 0.
    """
    a = rng.generator.binomial(z, p)
    if p.max() < 1.0:
        cond = (q - p) / (1.0 - p)
    else:
        cond = np.where(p < 1.0, (q - p) / np.where(p < 1.0, 1.0 - p, 1.0), 0.0)
    b = rng.generator.binomial(z - a, cond)
    return a, b


def coupled_step(
    state: PopulationState, params: ModelParams, rng: RngStream
) -> PopulationState:
    """Advance chain and majorant jointly under the shared-uniform coupling.

    With p = v_i*K/(K+z) <= q = v_i, the z_i shared individuals split
    multinomially into (both succeed, only majorant succeeds, neither), and
    the y_i - z_i extra individuals of the majorant succeed with probability
    q. Marginally the chain and the majorant each follow their own one-step
    law, and dominance z' <= y' holds pathwise.
    """
    if state.y is None:
        raise CouplingViolation("coupled_step requires a state with a majorant")
    z, y = state.z, state.y
    if np.any(z > y):
        raise CouplingViolation("input state violates dominance")
    total = float(z.sum())
    q = params.v_array
    p = q * params.K / (params.K + total)
    a, b = _split_shared(z, p, q, rng)
    c = rng.generator.binomial(y - z, q)
    return PopulationState(n=state.n + 1, z=z + a, y=y + a + b + c)


def _gw_step(
    state: PopulationState, params: ModelParams, rng: RngStream
) -> PopulationState:
    """Saturation-free step: type i gains Binomial(z_i, v_i)."""
    gains = rng.generator.binomial(state.z, params.v_array)
    return PopulationState(n=state.n + 1, z=state.z + gains)


_STEP_FNS = {
    SimMode.MPCR_ONLY: mpcr_step,
    SimMode.COUPLED: coupled_step,
    SimMode.GW_ONLY: _gw_step,
}


def simulate(
    params: ModelParams,
    n_steps: int,
    mode: SimMode | str = SimMode.MPCR_ONLY,
    rng: Optional[RngStream] = None,
) -> Trajectory:
    """Run one trajectory of n_steps cycles from z0.

    In coupled mode both processes start from z0 and the majorant is carried
    in each state's ``y``. In gw_only mode the single stored vector is the
    branching population itself. Deterministic given (params.seed, stream).
    """
    mode = SimMode(mode)
    if n_steps < 0:
        raise NegativeInput(f"n_steps={n_steps} must be >= 0")
    params._check_growth_budget(n_steps)
    if rng is None:
        rng = RngStream(params.seed, 0)
    z0 = params.z0_array
    first = PopulationState(n=0, z=z0, y=z0.copy() if mode is SimMode.COUPLED else None)
    states = [first]
    step = _STEP_FNS[mode]
    for _ in range(n_steps):
        states.append(step(states[-1], params, rng))
    return Trajectory(params=params, mode=mode, states=states)


def sample_W(
    params: ModelParams, horizon: int, rng: Optional[RngStream] = None
) -> np.ndarray:
    """One sample of the martingale limits: W_hat_i = Y_i(horizon)/b_i**horizon.

    Simulates the d independent saturation-free processes from z0 for
    ``horizon`` generations. E W_hat_i = z0_i exactly at every horizon.
    """
    if horizon < 1:
        raise NegativeInput(f"horizon={horizon} must be >= 1")
    for i, z in enumerate(params.z0):
        if z * _pow_int(params.b[i], horizon) >= MAX_POPULATION:
            raise OverflowRisk(
                f"type {i + 1}: projected population exceeds 2**62 at horizon {horizon}"
            )
    traj = simulate(params, horizon, SimMode.GW_ONLY, rng)
    scale = params.b_array ** float(horizon)
    return traj.z_at(horizon) / scale


def sample_W_batch(
    params: ModelParams, horizon: int, replicates: int, rng: Optional[RngStream] = None
) -> np.ndarray:
    """Matrix of martingale-limit samples, shape (replicates, d).

    Vectorizes the saturation-free recursion across replicates on a single
    stream; intended for bulk moment checks where per-replicate streams are
    not needed.
    """
    if horizon < 1:
        raise NegativeInput(f"horizon={horizon} must be >= 1")
    if replicates < 1:
        raise NegativeInput(f"replicates={replicates} must be >= 1")
    if rng is None:
        rng = RngStream(params.seed, 0)
    y = np.broadcast_to(params.z0_array, (replicates, params.d)).copy()
    v = params.v_array[None, :]
    for _ in range(horizon):
        y = y + rng.generator.binomial(y, v)
    return y / params.b_array ** float(horizon)
