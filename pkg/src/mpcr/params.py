"""Model parameters and population states for multitype PCR branching chains.

A model is specified by a vector of per-type replication probabilities ``v``
(sorted descending, with the maximal value occupying a leading block), initial
integer copy numbers ``z0``, and the pivot exponent ``kappa``. The saturation
constant is always ``K = b1**kappa`` with ``b1 = 1 + v[0]``, so the pivot time
``log_{b1} K`` is an integer by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BadProbability,
    ConfigError,
    CouplingViolation,
    DimensionMismatch,
    EmptyPopulation,
    NegativeInput,
    OrderingViolation,
)

# Populations are validated to stay below 2**62 so that int64 arithmetic in
# the samplers can never overflow mid-run.
MAX_POPULATION = 2**62


def _pow_int(base: float, n: int) -> float:
    """base**n by repeated multiplication, bit-for-bit reproducible."""
    acc = 1.0
    for _ in range(n):
        acc *= base
    return acc


@dataclass(frozen=True)
class ModelParams:
    """Validated parameter set shared by all modules.

    Attributes:
        kappa: pivot exponent; the saturation constant is K = b1**kappa.
        v: per-type replication probabilities, descending per the model's
            ordering assumption.
        z0: initial copy numbers, one per type, summing to at least 1.
        seed: root seed for reproducible randomness.
        K: derived saturation constant (1 + v[0])**kappa.
        b: derived per-type offspring means, b_i = 1 + v_i.
        d0: number of leading types tied at the maximal probability.

    Instances are immutable after construction and safe to share across
    concurrent workers.
    """

    kappa: int
    v: tuple[float, ...]
    z0: tuple[int, ...]
    seed: int = 0
    K: float = field(init=False)
    b: tuple[float, ...] = field(init=False)
    d0: int = field(init=False)

    def __post_init__(self) -> None:
        v = tuple(float(x) for x in self.v)
        z0 = tuple(int(x) for x in self.z0)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "z0", z0)
        if len(v) == 0:
            raise DimensionMismatch("at least one type is required")
        if len(z0) != len(v):
            raise DimensionMismatch(
                f"v has {len(v)} types but z0 has {len(z0)}"
            )
        for i, vi in enumerate(v):
            if not (0.0 < vi <= 1.0) or vi != vi:
                raise BadProbability(f"v[{i}]={vi!r} must lie in (0, 1]")
        for i in range(len(v) - 1):
            if v[i] < v[i + 1]:
                raise OrderingViolation(
                    f"v must be non-increasing; v[{i}]={v[i]} < v[{i+1}]={v[i+1]}"
                )
        for i, z in enumerate(z0):
            if z < 0:
                raise NegativeInput(f"z0[{i}]={z} must be nonnegative")
        if sum(z0) < 1:
            raise EmptyPopulation("initial copy numbers sum to zero")
        if int(self.kappa) != self.kappa or self.kappa < 0:
            raise ConfigError(f"kappa={self.kappa!r} must be a nonnegative integer")
        object.__setattr__(self, "kappa", int(self.kappa))
        if not (0 <= int(self.seed) < 2**64):
            raise ConfigError("seed must fit in 64 unsigned bits")
        object.__setattr__(self, "seed", int(self.seed))

        b = tuple(1.0 + vi for vi in v)
        # d0 = run length of the exact leading value; approximate ties are
        # deliberately not honored (they would silently change the theory).
        d0 = 1
        while d0 < len(v) and v[d0] == v[0]:
            d0 += 1
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d0", d0)
        object.__setattr__(self, "K", _pow_int(b[0], self.kappa))
        self._check_growth_budget(self.kappa)

    @property
    def d(self) -> int:
        """Number of types."""
        return len(self.v)

    @property
    def z0_array(self) -> np.ndarray:
        return np.asarray(self.z0, dtype=np.int64)

    @property
    def v_array(self) -> np.ndarray:
        return np.asarray(self.v, dtype=np.float64)

    @property
    def b_array(self) -> np.ndarray:
        return np.asarray(self.b, dtype=np.float64)

    def _check_growth_budget(self, horizon: int) -> None:
        """Reject horizons whose projected population b1**n * sum(z0) could
        leave the safe integer range."""
        from .errors import OverflowRisk

        total = sum(self.z0)
        if total * _pow_int(self.b[0], horizon) >= MAX_POPULATION:
            raise OverflowRisk(
                f"projected population {total} * b1**{horizon} exceeds 2**62"
            )


def validate(raw: dict) -> ModelParams:
    """Build a :class:`ModelParams` from a raw mapping.

    Required keys: ``v`` (sequence of probabilities), ``z0`` (sequence of
    nonnegative integers), ``kappa`` (positive integer). Optional: ``seed``.
    This public entry point additionally enforces kappa >= 1, the standing
    assumption of the pivot-time limit theorems; law-level tests may build
    ModelParams directly with kappa = 0 (K = 1).
    """
    missing = [k for k in ("v", "z0", "kappa") if k not in raw]
    if missing:
        raise ConfigError(f"missing required parameter(s): {', '.join(missing)}")
    kappa = raw["kappa"]
    if int(kappa) != kappa or int(kappa) < 1:
        raise ConfigError(f"kappa={kappa!r} must be an integer >= 1")
    return ModelParams(
        kappa=int(kappa),
        v=tuple(raw["v"]),
        z0=tuple(raw["z0"]),
        seed=int(raw.get("seed", 0)),
    )


@dataclass
class PopulationState:
    """Copy-number vector at one step, optionally with the coupled majorant.

    ``z`` holds the chain's counts; ``y``, when present, holds the coupled
    pure-branching majorant and must dominate ``z`` componentwise.
    """

    n: int
    z: np.ndarray
    y: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.z = np.asarray(self.z, dtype=np.int64)
        if self.n < 0:
            raise NegativeInput(f"step index n={self.n} must be >= 0")
        if np.any(self.z < 0):
            raise NegativeInput("copy numbers must be nonnegative")
        if self.y is not None:
            self.y = np.asarray(self.y, dtype=np.int64)
            if self.y.shape != self.z.shape:
                raise DimensionMismatch("y and z must have equal length")
            if np.any(self.z > self.y):
                raise CouplingViolation(
                    "majorant must dominate the chain componentwise"
                )

    @property
    def total(self) -> int:
        return int(self.z.sum())
