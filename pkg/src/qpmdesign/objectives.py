"""Scalar fitness functions over domain patterns.

Fitness is always maximized.  Single-process objectives return |d_eff| at
one pump wavelength.  The multi-wavelength objective targets a common level
G0 across all pumps while penalizing spread,

    f = sum_i |G0 - G_i| + beta * (G_max - G_min),

and is negated here so that larger fitness is still better; the sign flip
never leaks past this module.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .physics import make_evaluator

VARIANTS = ("single_shg", "single_thg", "multi_shg", "multi_thg")


@dataclass(frozen=True)
class ObjectiveSpec:
    """Which process(es) to optimize and how to score them.

    g0 should comfortably exceed any attainable G_i so that |G0 - G_i|
    stays G0 - G_i; the default 2.0 is twice the theoretical maximum of a
    normalized |d_eff|.  beta weights the peak-equalization term.
    """

    variant: str
    pump_wavelengths_nm: tuple[float, ...]
    g0: float = 2.0
    beta: float = 1.0
    normalization: str = "normalized"  # "normalized" or "raw"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        pumps = tuple(float(w) for w in self.pump_wavelengths_nm)
        object.__setattr__(self, "pump_wavelengths_nm", pumps)
        if not pumps:
            raise ValueError("pump_wavelengths_nm must be non-empty")
        if self.is_multi:
            if len(pumps) < 2:
                raise ValueError("multi variants need at least 2 pump wavelengths")
            if not self.g0 > 0:
                raise ValueError("g0 must be > 0 for multi variants")
        elif len(pumps) != 1:
            raise ValueError("single variants take exactly 1 pump wavelength")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.normalization not in ("normalized", "raw"):
            raise ValueError("normalization must be 'normalized' or 'raw'")

    @property
    def is_multi(self) -> bool:
        return self.variant.startswith("multi")

    @property
    def process(self) -> str:
        return "shg" if self.variant.endswith("shg") else "thg"


def multi_objective(gains: Sequence[float], g0: float, beta: float) -> float:
    """The raw (minimized) multi-wavelength objective value."""
    g = np.asarray(gains, dtype=np.float64)
    return float(np.sum(np.abs(g0 - g)) + beta * (np.max(g) - np.min(g)))


class PatternObjective:
    """Callable fitness of sign vectors for a fixed geometry and spec.

    Precomputes one evaluator per pump wavelength, so repeated calls (the
    optimizer's inner loop) cost a single O(N) kernel pass per wavelength.
    evaluate_block handles a (rows, N) int8 matrix; __call__ is the
    single-row special case of the same code path.
    """

    def __init__(self, spec: ObjectiveSpec, provider, thickness_um: float, count: int):
        self.spec = spec
        self.thickness_um = float(thickness_um)
        self.count = int(count)
        pairs = [provider.mismatches_at(wl) for wl in spec.pump_wavelengths_nm]
        self._evaluators = [
            make_evaluator(spec.process, thickness_um, count, pair) for pair in pairs
        ]
        if spec.normalization == "normalized":
            self._scale = self._evaluators[0].normalization
        else:
            self._scale = 1.0

    @property
    def dimension(self) -> int:
        return self.count

    def gains(self, signs: np.ndarray) -> np.ndarray:
        """Per-wavelength |d_eff|, scaled per the spec's normalization."""
        return np.array(
            [abs(ev.deff(signs)) / self._scale for ev in self._evaluators]
        )

    def normalized_gains(self, signs: np.ndarray) -> np.ndarray:
        """Per-wavelength |d_eff| / (L or L^2/2), independent of the spec."""
        return np.array(
            [abs(ev.deff(signs)) / ev.normalization for ev in self._evaluators]
        )

    def evaluate_block(self, signs2d: np.ndarray) -> np.ndarray:
        gains = np.column_stack(
            [ev.deff_abs_block(signs2d) for ev in self._evaluators]
        )
        if self._scale != 1.0:
            gains /= self._scale
        if not self.spec.is_multi:
            return gains[:, 0].copy()
        f = np.sum(np.abs(self.spec.g0 - gains), axis=1)
        f += self.spec.beta * (np.max(gains, axis=1) - np.min(gains, axis=1))
        return -f

    def __call__(self, signs: np.ndarray) -> float:
        return float(self.evaluate_block(signs[np.newaxis, :])[0])


def make_objective(spec: ObjectiveSpec, provider, thickness_um: float,
                   count: int) -> PatternObjective:
    return PatternObjective(spec, provider, thickness_um, count)


def fitness_single(pattern, spec: ObjectiveSpec, provider) -> float:
    """|d_eff| of the specified single process at the single pump wavelength."""
    if spec.is_multi:
        raise ValueError(f"fitness_single requires a single_* variant, got {spec.variant!r}")
    obj = PatternObjective(spec, provider, pattern.thickness_um, pattern.count)
    return obj(pattern.signs)


def fitness_multi(pattern, spec: ObjectiveSpec, provider) -> float:
    """Negated multi-wavelength objective; larger is better."""
    if not spec.is_multi:
        raise ValueError(f"fitness_multi requires a multi_* variant, got {spec.variant!r}")
    obj = PatternObjective(spec, provider, pattern.thickness_um, pattern.count)
    return obj(pattern.signs)
