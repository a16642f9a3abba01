"""Phase mismatches and effective nonlinear coefficients of poled crystals.

A crystal is modelled as N equal-thickness ferroelectric domains, each with
polarization orientation +1 (up) or -1 (down).  For second-harmonic
generation with mismatch dk1 the figure of merit is

    D1 = integral_0^L d(z) exp(-i dk1 z) dz                      [um]

and for cascaded third-harmonic generation (SHG followed by SFG, mismatches
dk1 and dk2) it is

    D2 = integral_0^L d(z) exp(-i dk2 z)
             * ( integral_0^z d(x) exp(-i dk1 x) dx ) dz         [um^2]

where d(z) is the piecewise-constant orientation profile.  Both integrals
are evaluated in closed form per domain, O(N) total, with series-limit
branches so that dk -> 0 is exact rather than 0/0.  Domain boundaries are
always computed as j * thickness from the integer domain index; nothing is
accumulated in floating point, so there is no drift even for N ~ 1e5.

Lengths are micrometers internally; wavelengths cross the API in nm and are
converted exactly once.
"""

import cmath
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from . import _kernels

TWO_PI = 2.0 * np.pi

# Moment-integral series are used below this |i*dk*t|; the direct closed
# form loses at most ~1e-10 of relative accuracy right at the crossover.
_SERIES_CUTOFF = 0.25
_PHI_CUTOFF = 1e-6


# ---------------------------------------------------------------------------
# domain pattern
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DomainPattern:
    """Uniform-thickness sequence of +1/-1 domain orientations.

    thickness_um: thickness of every domain, > 0.
    signs: orientation per domain, each exactly +1 or -1 (stored int8,
        read-only).  Boundary j sits at exactly j * thickness_um.
    """

    thickness_um: float
    signs: np.ndarray

    def __post_init__(self):
        if not (self.thickness_um > 0):
            raise ValueError(f"domain thickness must be > 0, got {self.thickness_um}")
        signs = np.asarray(self.signs)
        if signs.ndim != 1 or signs.size < 1:
            raise ValueError("signs must be a non-empty 1-d sequence")
        as_i8 = signs.astype(np.int8)
        if not np.array_equal(as_i8, signs) or not np.all(np.abs(as_i8) == 1):
            raise ValueError("every domain sign must be exactly +1 or -1")
        as_i8.setflags(write=False)
        object.__setattr__(self, "signs", as_i8)

    @property
    def count(self) -> int:
        return int(self.signs.size)

    @property
    def length_um(self) -> float:
        return self.count * self.thickness_um

    def flipped(self) -> "DomainPattern":
        return DomainPattern(self.thickness_um, -self.signs)


class PhaseMismatchPair(NamedTuple):
    """SHG and SFG phase mismatches in rad/um; zero is legal."""

    dk1: float
    dk2: float


# ---------------------------------------------------------------------------
# dispersion
# ---------------------------------------------------------------------------

# Extraordinary index of congruent LiNbO3 with temperature dependence,
# coefficients from D. H. Jundt, Opt. Lett. 22, 1553 (1997):
#   n^2 = a1 + b1 f + (a2 + b2 f)/(L^2 - (a3 + b3 f)^2)
#       + (a4 + b4 f)/(L^2 - a5^2) - a6 L^2,
# with L the wavelength in um and f = (T - 24.5)(T + 570.82), T in Celsius.
SELLMEIER_SETS: dict[str, dict[str, float]] = {
    "linbo3_e": {
        "a1": 5.35583,
        "a2": 0.100473,
        "a3": 0.20692,
        "a4": 100.0,
        "a5": 11.34927,
        "a6": 1.5334e-2,
        "b1": 4.629e-7,
        "b2": 3.862e-8,
        "b3": -0.89e-8,
        "b4": 2.657e-5,
    },
}

_COEFF_NAMES = ("a1", "a2", "a3", "a4", "a5", "a6", "b1", "b2", "b3", "b4")


@dataclass(frozen=True)
class DispersionModel:
    """Sellmeier-form refractive index model with temperature.

    coefficients: named coefficients of the form above; absent names are 0.
    Evaluation outside wavelength_range_um raises, never extrapolates.
    """

    coefficients: Mapping[str, float]
    temperature_c: float = 25.0
    wavelength_range_um: tuple[float, float] = (0.4, 5.0)

    def __post_init__(self):
        unknown = set(self.coefficients) - set(_COEFF_NAMES)
        if unknown:
            raise ValueError(f"unknown Sellmeier coefficient names: {sorted(unknown)}")
        lo, hi = self.wavelength_range_um
        if not (0 < lo < hi):
            raise ValueError(f"invalid wavelength range [{lo}, {hi}] um")

    def coefficient(self, name: str) -> float:
        return float(self.coefficients.get(name, 0.0))

    def mismatches_at(self, pump_nm: float) -> PhaseMismatchPair:
        return phase_mismatches(self, pump_nm)


def default_dispersion(temperature_c: float = 25.0) -> DispersionModel:
    """Congruent LiNbO3 extraordinary-index model at the given temperature."""
    return DispersionModel(SELLMEIER_SETS["linbo3_e"], temperature_c)


def refractive_index(model: DispersionModel, wavelength_um: float) -> float:
    """n(lambda, T) from the configured Sellmeier form.  Pure, deterministic.

    Raises ValueError naming the violated bound when the wavelength lies
    outside the model's validity range, and when the coefficients produce a
    non-physical index (n <= 1).
    """
    lo, hi = model.wavelength_range_um
    if wavelength_um < lo:
        raise ValueError(
            f"wavelength {wavelength_um} um is below the model's valid minimum {lo} um"
        )
    if wavelength_um > hi:
        raise ValueError(
            f"wavelength {wavelength_um} um is above the model's valid maximum {hi} um"
        )
    c = model.coefficient
    t = model.temperature_c
    f = (t - 24.5) * (t + 570.82)
    lam2 = wavelength_um * wavelength_um
    n2 = c("a1") + c("b1") * f - c("a6") * lam2
    denom1 = lam2 - (c("a3") + c("b3") * f) ** 2
    num1 = c("a2") + c("b2") * f
    if num1 != 0.0:
        n2 += num1 / denom1
    denom2 = lam2 - c("a5") ** 2
    num2 = c("a4") + c("b4") * f
    if num2 != 0.0:
        n2 += num2 / denom2
    if not n2 > 1.0:
        raise ValueError(
            f"Sellmeier model yields n^2 = {n2} <= 1 at {wavelength_um} um; "
            "refractive index must exceed 1 inside the valid range"
        )
    return float(np.sqrt(n2))


def phase_mismatches(model: DispersionModel, pump_wavelength_nm: float) -> PhaseMismatchPair:
    """SHG/SFG mismatches for a pump wavelength given in nm.

    With k(L) = 2 pi n(L) / L in rad/um:
        dk1 = k(L/2) - 2 k(L)        (SHG)
        dk2 = k(L/3) - k(L/2) - k(L) (SFG)
    """
    lam = pump_wavelength_nm * 1e-3
    k1 = TWO_PI * refractive_index(model, lam) / lam
    k2 = TWO_PI * refractive_index(model, lam / 2.0) / (lam / 2.0)
    k3 = TWO_PI * refractive_index(model, lam / 3.0) / (lam / 3.0)
    dk1 = k2 - 2.0 * k1
    dk2 = k3 - k2 - k1
    return PhaseMismatchPair(dk1, dk2)


@dataclass(frozen=True)
class MismatchTable:
    """User-supplied mismatch pairs keyed by pump wavelength in nm.

    Stands in for a dispersion model so the optimizer can be exercised with
    arbitrary mismatches and no material data.
    """

    entries: Mapping[float, PhaseMismatchPair]

    def mismatches_at(self, pump_nm: float) -> PhaseMismatchPair:
        try:
            return self.entries[pump_nm]
        except KeyError:
            known = ", ".join(f"{w:g}" for w in sorted(self.entries))
            raise ValueError(
                f"no mismatch override for pump {pump_nm:g} nm (have: {known})"
            ) from None


# ---------------------------------------------------------------------------
# per-domain moment integrals
# ---------------------------------------------------------------------------

def _m0(x: complex) -> complex:
    """integral_0^1 exp(-x v) dv = (1 - exp(-x)) / x, series near 0."""
    if abs(x) < _SERIES_CUTOFF:
        total = 0.0 + 0.0j
        term = 1.0 + 0.0j
        m = 0
        while abs(term) > 1e-20:
            total += term / (m + 1)
            m += 1
            term *= -x / m
        return total
    return (1.0 - cmath.exp(-x)) / x


def _mn(n: int, x: complex) -> complex:
    """integral_0^1 v^n exp(-x v) dv via series or upward recurrence."""
    if n == 0:
        return _m0(x)
    if abs(x) < 2.0 * _SERIES_CUTOFF:
        total = 0.0 + 0.0j
        term = 1.0 + 0.0j
        m = 0
        while abs(term) / (n + m + 1) > 1e-20:
            total += term / (n + m + 1)
            m += 1
            term *= -x / m
        return total
    ex = cmath.exp(-x)
    val = _m0(x)
    for p in range(1, n + 1):
        val = (p * val - ex) / x
    return val


def _phi(x1: complex, x2: complex) -> complex:
    """(m0(x2) - m0(x1 + x2)) / x1, the within-domain cascade factor.

    Taylor expansion in x1 for small |x1| avoids the cancellation in the
    direct difference; at x1 = 0 this is exactly m1(x2).
    """
    if abs(x1) < _PHI_CUTOFF:
        return (
            _mn(1, x2)
            - x1 * _mn(2, x2) / 2.0
            + (x1 * x1) * _mn(3, x2) / 6.0
        )
    return (_m0(x2) - _m0(x1 + x2)) / x1


# ---------------------------------------------------------------------------
# evaluators
# ---------------------------------------------------------------------------

class ShgEvaluator:
    """Closed-form D1 for fixed (thickness, count, dk1), reusable over patterns.

    Per domain j the integral of exp(-i dk z) is exp(-i dk z_j) * w with
    w = t * m0(i dk t), so D1 = w * sum_j s_j exp(-i dk j t).  The phase
    array and w are precomputed once.
    """

    def __init__(self, thickness_um: float, count: int, dk1: float):
        t = float(thickness_um)
        self.thickness_um = t
        self.count = int(count)
        self.dk1 = float(dk1)
        z = np.arange(self.count, dtype=np.float64) * t
        self._e1 = np.exp(-1j * self.dk1 * z)
        self._w1 = t * _m0(1j * self.dk1 * t)
        self.normalization = self.count * t  # |D1| <= L

    def deff(self, signs: np.ndarray) -> complex:
        return complex(_kernels.shg_sum(signs, self._e1) * self._w1)

    def deff_block(self, signs2d: np.ndarray) -> np.ndarray:
        out = np.empty(signs2d.shape[0], dtype=np.complex128)
        _kernels.shg_block(signs2d, self._e1, out)
        out *= self._w1
        return out

    def deff_abs_block(self, signs2d: np.ndarray) -> np.ndarray:
        """|D1| per row; scalar per-row arithmetic, independent of chunking."""
        out = np.empty(signs2d.shape[0], dtype=np.float64)
        _kernels.shg_abs_block(signs2d, self._e1, self._w1, out)
        return out


class ThgEvaluator:
    """Closed-form D2 for fixed (thickness, count, dk1, dk2).

    Writing a_j = exp(-i dk1 z_j), b_j = exp(-i dk2 z_j), the per-domain
    contribution splits into a cross-domain cascade term

        s_j * (sum_{m<j} s_m a_m) * b_j * w1 * w2

    and a within-domain term s_j^2 a_j b_j t^2 phi = a_j b_j t^2 phi, which
    is independent of the pattern because s_j^2 = 1.  The pattern-dependent
    part is a single O(N) pass; the pattern-independent part is folded into
    one constant at construction.
    """

    def __init__(self, thickness_um: float, count: int, mismatch: PhaseMismatchPair):
        t = float(thickness_um)
        self.thickness_um = t
        self.count = int(count)
        self.mismatch = PhaseMismatchPair(float(mismatch[0]), float(mismatch[1]))
        dk1, dk2 = self.mismatch
        z = np.arange(self.count, dtype=np.float64) * t
        self._e1 = np.exp(-1j * dk1 * z)
        self._b = np.exp(-1j * dk2 * z)
        x1 = 1j * dk1 * t
        x2 = 1j * dk2 * t
        self._w12 = (t * _m0(x1)) * (t * _m0(x2))
        self._hconst = t * t * _phi(x1, x2) * complex(np.sum(self._e1 * self._b))
        length = self.count * t
        self.normalization = 0.5 * length * length  # |D2| <= L^2/2

    def deff(self, signs: np.ndarray) -> complex:
        acc = _kernels.thg_sum(signs, self._e1, self._b)
        return complex(acc * self._w12 + self._hconst)

    def deff_block(self, signs2d: np.ndarray) -> np.ndarray:
        out = np.empty(signs2d.shape[0], dtype=np.complex128)
        _kernels.thg_block(signs2d, self._e1, self._b, out)
        out *= self._w12
        out += self._hconst
        return out

    def deff_abs_block(self, signs2d: np.ndarray) -> np.ndarray:
        """|D2| per row; scalar per-row arithmetic, independent of chunking."""
        out = np.empty(signs2d.shape[0], dtype=np.float64)
        _kernels.thg_abs_block(signs2d, self._e1, self._b, self._w12, self._hconst, out)
        return out


def make_evaluator(process: str, thickness_um: float, count: int,
                   mismatch: PhaseMismatchPair):
    if process == "shg":
        return ShgEvaluator(thickness_um, count, mismatch[0])
    if process == "thg":
        return ThgEvaluator(thickness_um, count, mismatch)
    raise ValueError(f"process must be 'shg' or 'thg', got {process!r}")


def deff_shg(pattern: DomainPattern, dk1: float) -> complex:
    """Effective SHG coefficient D1 of a pattern, in um (complex)."""
    return ShgEvaluator(pattern.thickness_um, pattern.count, dk1).deff(pattern.signs)


def deff_thg(pattern: DomainPattern, mismatch: PhaseMismatchPair) -> complex:
    """Effective cascaded-THG coefficient D2 of a pattern, in um^2 (complex)."""
    return ThgEvaluator(pattern.thickness_um, pattern.count, mismatch).deff(pattern.signs)


def sweep_spectrum(pattern: DomainPattern, provider, wavelengths_nm: Sequence[float],
                   process: str) -> list[tuple[float, float, float]]:
    """|d_eff| of one pattern across pump wavelengths, in input order.

    provider is anything with mismatches_at(pump_nm) -> PhaseMismatchPair
    (a DispersionModel or a MismatchTable).  Returns one (wavelength_nm,
    |d_eff|, |d_eff| normalized by L for shg or L^2/2 for thg) tuple per
    requested wavelength.
    """
    if process not in ("shg", "thg"):
        raise ValueError(f"process must be 'shg' or 'thg', got {process!r}")
    rows = []
    for wl in wavelengths_nm:
        pair = provider.mismatches_at(wl)
        ev = make_evaluator(process, pattern.thickness_um, pattern.count, pair)
        mag = abs(ev.deff(pattern.signs))
        rows.append((float(wl), mag, mag / ev.normalization))
    return rows
