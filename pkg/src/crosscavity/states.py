"""Two-mode field states, atomic internal states and coupling parameters.

Field states are sparse maps from photon-number pairs ``(m, n)`` to complex
amplitudes: ``m`` counts photons in the x-axis cavity mode, ``n`` in the
y-axis mode.  Only finite-support states are representable; the total photon
number is capped (default 32) because every downstream quantity is a finite
sum over fixed-total-photon blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, Mapping, Tuple

SUPPORT_CAP = 32
PRUNE_THRESHOLD = 1e-15
_NORM_TOL = 1e-12


class InvalidStateError(ValueError):
    """Raised for states that violate a structural invariant."""


class TwoModeState:
    """Immutable sparse two-mode Fock superposition.

    Parameters
    ----------
    amplitudes : mapping ``(m, n) -> complex``
        Photon-number amplitudes.  Entries with modulus below ``prune``
        are dropped; an all-zero map is allowed here (it only becomes an
        error when normalization is requested).
    cap : int
        Largest admissible total photon number ``m + n``.
    prune : float
        Modulus below which an amplitude is treated as absent.
    """

    __slots__ = ("amplitudes", "max_total", "tags")

    def __init__(
        self,
        amplitudes: Mapping[Tuple[int, int], complex],
        cap: int = SUPPORT_CAP,
        prune: float = PRUNE_THRESHOLD,
        tags: Mapping[str, float] | None = None,
    ):
        cleaned: Dict[Tuple[int, int], complex] = {}
        for key, value in amplitudes.items():
            try:
                m, n = key
            except (TypeError, ValueError):
                raise InvalidStateError(f"amplitude key {key!r} is not an (m, n) pair")
            if not (isinstance(m, int) and isinstance(n, int)) or m < 0 or n < 0:
                raise InvalidStateError(f"photon indices must be non-negative integers, got {key!r}")
            c = complex(value)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise InvalidStateError(f"amplitude for {key!r} is not finite")
            if abs(c) < prune:
                continue
            if m + n > cap:
                raise InvalidStateError(f"total photon number {m + n} exceeds support cap {cap}")
            cleaned[(m, n)] = c
        ordered = dict(sorted(cleaned.items()))
        object.__setattr__(self, "amplitudes", MappingProxyType(ordered))
        object.__setattr__(self, "max_total", max((m + n for m, n in ordered), default=0))
        object.__setattr__(self, "tags", MappingProxyType(dict(tags or {})))

    def __setattr__(self, name, value):
        raise AttributeError("TwoModeState is immutable")

    def norm_squared(self) -> float:
        return math.fsum(abs(c) ** 2 for c in self.amplitudes.values())

    def blocks(self) -> Dict[int, Dict[int, complex]]:
        """Group amplitudes by total photon number: ``{N: {m: C_{m, N-m}}}``."""
        out: Dict[int, Dict[int, complex]] = {}
        for (m, n), c in self.amplitudes.items():
            out.setdefault(m + n, {})[m] = c
        return {total: dict(sorted(block.items())) for total, block in sorted(out.items())}

    def __eq__(self, other):
        if not isinstance(other, TwoModeState):
            return NotImplemented
        return dict(self.amplitudes) == dict(other.amplitudes)

    def __hash__(self):
        return hash(tuple(self.amplitudes.items()))

    def __repr__(self):
        terms = ", ".join(f"({m},{n}): {c:.6g}" for (m, n), c in self.amplitudes.items())
        return f"TwoModeState({{{terms}}})"


@dataclass(frozen=True)
class AtomState:
    """Internal two-level superposition ``c_g|g> + c_e|e>`` (unit norm)."""

    c_g: complex
    c_e: complex

    def __post_init__(self):
        object.__setattr__(self, "c_g", complex(self.c_g))
        object.__setattr__(self, "c_e", complex(self.c_e))
        norm2 = abs(self.c_g) ** 2 + abs(self.c_e) ** 2
        if abs(norm2 - 1.0) > _NORM_TOL:
            raise InvalidStateError(
                f"|c_g|^2 + |c_e|^2 = {norm2!r} is not 1; use AtomState.normalized()"
            )

    @classmethod
    def excited(cls) -> "AtomState":
        return cls(0.0, 1.0)

    @classmethod
    def ground(cls) -> "AtomState":
        return cls(1.0, 0.0)

    @classmethod
    def normalized(cls, c_g: complex, c_e: complex) -> "AtomState":
        norm = math.hypot(abs(complex(c_g)), abs(complex(c_e)))
        if norm == 0.0:
            raise InvalidStateError("atomic state has zero norm")
        return cls(complex(c_g) / norm, complex(c_e) / norm)


@dataclass(frozen=True)
class CouplingParams:
    """Dimensionless interaction strength ``lam`` (= g*tau) and slit width ``k_delta_r``."""

    lam: float
    k_delta_r: float

    def __post_init__(self):
        for name in ("lam", "k_delta_r"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")


def normalize(state: TwoModeState) -> TwoModeState:
    """Rescale to unit norm; relative and global phases are untouched.

    Already-normalized states (norm within 1e-14 of one) are returned
    unchanged so that normalization is exactly idempotent.
    """
    norm2 = state.norm_squared()
    if norm2 == 0.0:
        raise InvalidStateError("cannot normalize a state with no nonzero amplitude")
    if abs(norm2 - 1.0) < 1e-14:
        return state
    factor = 1.0 / math.sqrt(norm2)
    return TwoModeState(
        {key: c * factor for key, c in state.amplitudes.items()}, tags=state.tags
    )


def one_photon_state(alpha: float) -> TwoModeState:
    """``sin(alpha)|0,1> + cos(alpha)|1,0>`` - the one-photon family."""
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    return normalize(TwoModeState({(0, 1): math.sin(alpha), (1, 0): math.cos(alpha)}))


def two_photon_state(alpha: float) -> TwoModeState:
    """``cos(alpha)|2,0> + sin(alpha)|0,2>`` - the two-photon family."""
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    return normalize(TwoModeState({(2, 0): math.cos(alpha), (0, 2): math.sin(alpha)}))


def noon_state(n_nu: int) -> TwoModeState:
    """``(|n,0> + |0,n>)/sqrt(2)``."""
    if not isinstance(n_nu, int) or n_nu < 1:
        raise ValueError(f"NOON photon number must be a positive integer, got {n_nu!r}")
    amp = 1.0 / math.sqrt(2.0)
    return TwoModeState({(n_nu, 0): amp, (0, n_nu): amp})


def family_state(j: int, q: int) -> TwoModeState:
    """``(|j, j+4q-2> + |j+4q-2, j>)/sqrt(2)``, the maximally entangled family.

    The total photon number is ``2(j + 2q - 1)`` (always even) and the ring
    ``j + 2q`` of the deflection pattern carries no population; that index is
    recorded under ``tags["missing_ring"]``.
    """
    if not isinstance(j, int) or j < 0:
        raise ValueError(f"j must be a non-negative integer, got {j!r}")
    if not isinstance(q, int) or q < 1:
        raise ValueError(f"q must be a positive integer, got {q!r}")
    partner = j + 4 * q - 2
    amp = 1.0 / math.sqrt(2.0)
    return TwoModeState(
        {(j, partner): amp, (partner, j): amp},
        tags={"missing_ring": j + 2 * q},
    )


def mode_swap(state: TwoModeState) -> TwoModeState:
    """Exchange the two cavity modes: ``C'_{m,n} = C_{n,m}``."""
    return TwoModeState(
        {(n, m): c for (m, n), c in state.amplitudes.items()}, tags=state.tags
    )
