"""Hot inner-loop kernels with a numba backend and a pure-numpy fallback.

The numba path is used when numba imports cleanly, unless the environment
variable ``QPMDESIGN_NO_NUMBA`` is set to anything other than "" or "0".
All jitted kernels are compiled without fastmath so floating-point results
are reproducible, and with ``nogil=True`` so batch evaluation scales across
threads.

Both backends are kept importable (``shg_sum_numpy`` etc.) so they can be
benchmarked against each other; the dispatched names (``shg_sum`` etc.) are
what the rest of the package uses.  Within one backend a block kernel applied
row by row is bit-identical to the corresponding scalar kernel.
"""

import os

import numpy as np

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_TO_UNIT = 2.0 ** -53

NUMBA_DISABLED = os.environ.get("QPMDESIGN_NO_NUMBA", "") not in ("", "0")

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled via QPMDESIGN_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def backend() -> str:
    """Name of the active kernel backend: "numba" or "numpy"."""
    return "numba" if HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------
# Each kernel works on one 1-d row in isolation, so batch results cannot
# depend on how a population was chunked.  Accumulation order differs from
# the numba loops (pairwise vs sequential), which costs ~1e-15 of relative
# agreement between backends.

def shg_sum_numpy(signs, e1):
    """Sum of sign-weighted domain phases, sum_j s_j * e1[j]."""
    return complex(np.sum(signs * e1))


def thg_sum_numpy(signs, e1, b):
    """Cascaded sum: sum_j s_j * (sum_{m<j} s_m e1[m]) * b[j]."""
    g = signs * e1
    prefix = np.empty_like(g)
    prefix[0] = 0.0
    np.cumsum(g[:-1], out=prefix[1:])
    return complex(np.sum(signs * prefix * b))


def shg_block_numpy(signs2d, e1, out):
    for r in range(signs2d.shape[0]):
        out[r] = shg_sum_numpy(signs2d[r], e1)


def thg_block_numpy(signs2d, e1, b, out):
    for r in range(signs2d.shape[0]):
        out[r] = thg_sum_numpy(signs2d[r], e1, b)


# Magnitude blocks apply the scale/offset per row with scalar arithmetic so
# results cannot depend on batch shape (numpy's vectorized complex loops may
# round differently than its scalar tails).

def shg_abs_block_numpy(signs2d, e1, w1, out):
    for r in range(signs2d.shape[0]):
        out[r] = abs(w1 * shg_sum_numpy(signs2d[r], e1))


def thg_abs_block_numpy(signs2d, e1, b, w12, hconst, out):
    for r in range(signs2d.shape[0]):
        out[r] = abs(w12 * thg_sum_numpy(signs2d[r], e1, b) + hconst)


def uniform_fill_numpy(key, start, n):
    """n uniforms in [0, 1) from a splitmix64 counter stream.

    Value i of the stream is derived from counter start+i alone, so any
    span of the stream can be regenerated independently of draw history.
    """
    idx = np.arange(1, n + 1, dtype=np.uint64) + np.uint64(start)
    z = np.uint64(key) + idx * _GOLD
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)) * _TO_UNIT


# ---------------------------------------------------------------------------
# numba implementations (same arithmetic, GIL released)
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _shg_sum_nb(signs, e1):
        acc = 0.0 + 0.0j
        for j in range(signs.shape[0]):
            acc += signs[j] * e1[j]
        return acc

    @njit(cache=True, nogil=True)
    def _thg_sum_nb(signs, e1, b):
        acc = 0.0 + 0.0j
        prefix = 0.0 + 0.0j
        for j in range(signs.shape[0]):
            s = signs[j]
            acc += s * prefix * b[j]
            prefix += s * e1[j]
        return acc

    @njit(cache=True, nogil=True)
    def _shg_block_nb(signs2d, e1, out):
        for r in range(signs2d.shape[0]):
            out[r] = _shg_sum_nb(signs2d[r], e1)

    @njit(cache=True, nogil=True)
    def _thg_block_nb(signs2d, e1, b, out):
        for r in range(signs2d.shape[0]):
            out[r] = _thg_sum_nb(signs2d[r], e1, b)

    @njit(cache=True, nogil=True)
    def _shg_abs_block_nb(signs2d, e1, w1, out):
        for r in range(signs2d.shape[0]):
            out[r] = abs(w1 * _shg_sum_nb(signs2d[r], e1))

    @njit(cache=True, nogil=True)
    def _thg_abs_block_nb(signs2d, e1, b, w12, hconst, out):
        for r in range(signs2d.shape[0]):
            out[r] = abs(w12 * _thg_sum_nb(signs2d[r], e1, b) + hconst)

    @njit(cache=True, nogil=True)
    def _uniform_fill_nb(key, start, out):
        for i in range(out.shape[0]):
            z = key + (start + np.uint64(i) + np.uint64(1)) * _GOLD
            z = (z ^ (z >> np.uint64(30))) * _MIX1
            z = (z ^ (z >> np.uint64(27))) * _MIX2
            z = z ^ (z >> np.uint64(31))
            out[i] = (z >> np.uint64(11)) * _TO_UNIT

    def shg_sum_numba(signs, e1):
        return _shg_sum_nb(signs, e1)

    def thg_sum_numba(signs, e1, b):
        return _thg_sum_nb(signs, e1, b)

    def shg_block_numba(signs2d, e1, out):
        _shg_block_nb(signs2d, e1, out)

    def thg_block_numba(signs2d, e1, b, out):
        _thg_block_nb(signs2d, e1, b, out)

    def shg_abs_block_numba(signs2d, e1, w1, out):
        _shg_abs_block_nb(signs2d, e1, w1, out)

    def thg_abs_block_numba(signs2d, e1, b, w12, hconst, out):
        _thg_abs_block_nb(signs2d, e1, b, w12, hconst, out)

    def uniform_fill_numba(key, start, n):
        out = np.empty(n, dtype=np.float64)
        _uniform_fill_nb(np.uint64(key), np.uint64(start), out)
        return out

    shg_sum = shg_sum_numba
    thg_sum = thg_sum_numba
    shg_block = shg_block_numba
    thg_block = thg_block_numba
    shg_abs_block = shg_abs_block_numba
    thg_abs_block = thg_abs_block_numba
    uniform_fill = uniform_fill_numba
else:
    shg_sum = shg_sum_numpy
    thg_sum = thg_sum_numpy
    shg_block = shg_block_numpy
    thg_block = thg_block_numpy
    shg_abs_block = shg_abs_block_numpy
    thg_abs_block = thg_abs_block_numpy
    uniform_fill = uniform_fill_numpy
