"""Shared test helpers: brute-force quadrature oracles and pattern builders.

The quadrature oracles integrate the defining integrals numerically with
composite Simpson rules on a fine per-domain grid.  They share no code with
the closed-form evaluators they are used to check.
"""

import numpy as np
from scipy.integrate import cumulative_simpson, simpson


def random_signs(rng, n):
    return np.where(rng.random(n) < 0.5, -1, 1).astype(np.int8)


def shg_quadrature(signs, thickness, dk1, substeps=10_000):
    """Numerical integral of d(z) exp(-i dk1 z) over the crystal."""
    n = len(signs)
    dx = thickness / substeps
    z = np.arange(n)[:, None] * thickness + np.arange(substeps + 1)[None, :] * dx
    f = signs[:, None] * np.exp(-1j * dk1 * z)
    return complex(np.sum(simpson(f, dx=dx, axis=1)))


def _cumulative_simpson_complex(y, dx):
    # scipy's cumulative_simpson silently drops imaginary parts
    return (cumulative_simpson(y.real, dx=dx, axis=1, initial=0)
            + 1j * cumulative_simpson(y.imag, dx=dx, axis=1, initial=0))


def thg_quadrature(signs, thickness, dk1, dk2, substeps=10_000):
    """Numerical double integral of the cascaded process."""
    n = len(signs)
    dx = thickness / substeps
    z = np.arange(n)[:, None] * thickness + np.arange(substeps + 1)[None, :] * dx
    f1 = signs[:, None] * np.exp(-1j * dk1 * z)
    per_domain = simpson(f1, dx=dx, axis=1)
    prefix = np.concatenate(([0.0 + 0.0j], np.cumsum(per_domain)[:-1]))
    inner = _cumulative_simpson_complex(f1, dx) + prefix[:, None]
    outer = signs[:, None] * np.exp(-1j * dk2 * z) * inner
    return complex(np.sum(simpson(outer, dx=dx, axis=1)))


class ScriptedStream:
    """Stand-in for rng.CounterStream that replays queued uniforms."""

    def __init__(self, values):
        self._values = list(values)

    def uniforms(self, n):
        out = np.array([self._values.pop(0) for _ in range(n)], dtype=np.float64)
        return out

    def uniform(self):
        return float(self.uniforms(1)[0])

    def randint(self, bound):
        return min(int(self.uniform() * bound), bound - 1)
