"""Rotation coefficients on fixed-total-photon Fock blocks.

A linear recombination of two bosonic modes, ``c = cos(t) a + sin(t) b`` and
``d = -sin(t) a + cos(t) b``, acts on the (N+1)-dimensional block of total
photon number N as a real orthogonal matrix.  ``d_coeff(N, m, n, t)`` is the
matrix element connecting ``|m, N-m>`` in the original modes to ``|n, N-n>``
in the rotated ones; ``dbar`` is the angle-independent amplitude of one term
of its expansion in ``cos^j sin^k`` monomials.

Factorial ratios are accumulated with exact integer arithmetic before the
single square root, so the coefficients are correct to rounding even when
the individual factorials are astronomically large.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .states import SUPPORT_CAP

_FACT = [math.factorial(k) for k in range(2 * SUPPORT_CAP + 4)]


def _check_block_indices(total: int, m: int, n: int) -> None:
    if total < 0:
        raise ValueError(f"block size must be non-negative, got {total}")
    if not (0 <= m <= total and 0 <= n <= total):
        raise ValueError(f"indices (m={m}, n={n}) outside block [0, {total}]")


def dbar(total: int, m: int, n: int, q: int) -> float:
    """Amplitude of the q-th monomial of ``d_coeff``; exact up to rounding."""
    _check_block_indices(total, m, n)
    if not (max(0, m + n - total) <= q <= min(m, n)):
        raise ValueError(
            f"q={q} outside admissible range [{max(0, m + n - total)}, {min(m, n)}]"
        )
    num = _FACT[m] * _FACT[n] * _FACT[total - m] * _FACT[total - n]
    den = _FACT[q] * _FACT[m - q] * _FACT[n - q] * _FACT[total - m - n + q]
    value = math.sqrt(float(Fraction(num, den * den)))
    return -value if (m - q) % 2 else value


def d_coeff(total: int, m: int, n: int, theta):
    """Rotation matrix element; ``theta`` may be a scalar or an ndarray."""
    _check_block_indices(total, m, n)
    c, s = np.cos(theta), np.sin(theta)
    out = 0.0
    for q in range(max(0, m + n - total), min(m, n) + 1):
        out = out + dbar(total, m, n, q) * c ** (total - m - n + 2 * q) * s ** (m + n - 2 * q)
    return out


@lru_cache(maxsize=512)
def _d_matrix_cached(total: int, theta: float) -> np.ndarray:
    mat = np.empty((total + 1, total + 1))
    for m in range(total + 1):
        for n in range(total + 1):
            mat[m, n] = d_coeff(total, m, n, theta)
    mat.flags.writeable = False
    return mat

_cache_lock = threading.Lock()


def d_matrix(total: int, theta: float) -> np.ndarray:
    """Full (N+1)x(N+1) block-rotation matrix, rows m, columns n.

    Memoized on the exact (total, theta) key; the returned array is
    read-only so cached values stay consistent across threads.
    """
    if total < 0:
        raise ValueError(f"block size must be non-negative, got {total}")
    with _cache_lock:
        return _d_matrix_cached(total, float(theta))


def d_matrix_table(total: int, thetas: np.ndarray) -> np.ndarray:
    """Rotation matrices sampled on an angle grid, shape (N+1, N+1, len(thetas))."""
    thetas = np.asarray(thetas, dtype=float)
    out = np.empty((total + 1, total + 1, thetas.size))
    for m in range(total + 1):
        for n in range(total + 1):
            out[m, n] = d_coeff(total, m, n, thetas)
    return out
