import math

import numpy as np
import pytest

from crosscavity import (
    AtomState,
    CouplingParams,
    InvalidStateError,
    TwoModeState,
    family_state,
    mode_swap,
    noon_state,
    normalize,
    one_photon_state,
    two_photon_state,
)

SQ2 = 1.0 / math.sqrt(2.0)


def test_normalize_single_component():
    s = normalize(TwoModeState({(1, 0): 2.0}))
    assert s.amplitudes[(1, 0)] == pytest.approx(1.0)


def test_normalize_symmetric_pair():
    s = normalize(TwoModeState({(0, 1): 1.0, (1, 0): 1.0}))
    assert s.amplitudes[(0, 1)] == pytest.approx(SQ2)
    assert s.amplitudes[(1, 0)] == pytest.approx(SQ2)


def test_normalize_three_four_five():
    s = normalize(TwoModeState({(0, 2): 3.0, (2, 0): 4.0}))
    assert s.amplitudes[(0, 2)] == pytest.approx(0.6)
    assert s.amplitudes[(2, 0)] == pytest.approx(0.8)


def test_normalize_preserves_phases():
    s = normalize(TwoModeState({(0, 1): 2j, (3, 0): -2.0}))
    assert s.amplitudes[(0, 1)] == pytest.approx(1j * SQ2)
    assert s.amplitudes[(3, 0)] == pytest.approx(-SQ2)


def test_normalize_rejects_zero_state():
    with pytest.raises(InvalidStateError):
        normalize(TwoModeState({(1, 1): 0.0}))


def test_normalize_idempotent_exactly():
    for raw in (
        {(0, 2): 3.0, (2, 0): 4.0},
        {(0, 1): 0.3 + 0.4j, (5, 2): -1.1},
        {(1, 0): 1.0},
    ):
        once = normalize(TwoModeState(raw))
        twice = normalize(once)
        assert dict(once.amplitudes) == dict(twice.amplitudes)


def test_builders_are_normalized():
    for state in (
        one_photon_state(0.3),
        two_photon_state(1.2),
        noon_state(4),
        family_state(2, 2),
    ):
        assert state.norm_squared() == pytest.approx(1.0, abs=1e-12)


def test_one_photon_endpoints():
    assert dict(one_photon_state(0.0).amplitudes) == {(1, 0): pytest.approx(1.0)}
    s = one_photon_state(math.pi / 4)
    assert s.amplitudes[(0, 1)] == pytest.approx(SQ2)
    assert s.amplitudes[(1, 0)] == pytest.approx(SQ2)
    assert dict(one_photon_state(math.pi / 2).amplitudes) == {(0, 1): pytest.approx(1.0)}


def test_two_photon_endpoints():
    assert dict(two_photon_state(0.0).amplitudes) == {(2, 0): pytest.approx(1.0)}
    mid = two_photon_state(math.pi / 4)
    assert mid.amplitudes[(2, 0)] == pytest.approx(SQ2)
    assert mid.amplitudes[(0, 2)] == pytest.approx(SQ2)
    assert dict(two_photon_state(math.pi / 2).amplitudes) == {(0, 2): pytest.approx(1.0)}


def test_noon_state():
    s = noon_state(2)
    assert s.amplitudes[(2, 0)] == pytest.approx(SQ2)
    assert s.amplitudes[(0, 2)] == pytest.approx(SQ2)
    assert s.max_total == 2
    s6 = noon_state(6)
    assert s6.amplitudes[(6, 0)] == pytest.approx(SQ2)
    assert s6.max_total == 6


def test_noon_rejects_vacuum():
    with pytest.raises(ValueError):
        noon_state(0)


def test_noon_one_equals_balanced_one_photon():
    a = noon_state(1)
    b = one_photon_state(math.pi / 4)
    for key in ((0, 1), (1, 0)):
        assert a.amplitudes[key] == pytest.approx(b.amplitudes[key], abs=1e-15)


@pytest.mark.parametrize(
    "j,q,kets,n_total,missing",
    [
        (0, 1, ((0, 2), (2, 0)), 2, 2),
        (1, 1, ((1, 3), (3, 1)), 4, 3),
        (2, 1, ((2, 4), (4, 2)), 6, 4),
    ],
)
def test_family_state_table(j, q, kets, n_total, missing):
    s = family_state(j, q)
    assert set(s.amplitudes) == set(kets)
    assert s.max_total == n_total
    assert s.tags["missing_ring"] == missing
    for key in kets:
        assert s.amplitudes[key] == pytest.approx(SQ2)


def test_family_reduces_to_noon_at_j0():
    for q in (1, 2, 3):
        assert family_state(0, q) == noon_state(4 * q - 2)


def test_mode_swap_basics():
    assert dict(mode_swap(TwoModeState({(1, 0): 1.0})).amplitudes) == {(0, 1): pytest.approx(1.0)}
    for n in (1, 2, 5):
        assert mode_swap(noon_state(n)) == noon_state(n)
    a = mode_swap(one_photon_state(0.3))
    b = one_photon_state(math.pi / 2 - 0.3)
    for key in ((0, 1), (1, 0)):
        assert a.amplitudes[key] == pytest.approx(b.amplitudes[key], abs=1e-15)


def test_mode_swap_involution():
    rng = np.random.default_rng(3)
    amps = {
        (int(rng.integers(0, 5)), int(rng.integers(0, 5))): complex(rng.normal(), rng.normal())
        for _ in range(6)
    }
    s = normalize(TwoModeState(amps))
    assert mode_swap(mode_swap(s)) == s


def test_support_cap_enforced():
    with pytest.raises(InvalidStateError):
        TwoModeState({(20, 20): 1.0})
    TwoModeState({(20, 20): 1.0}, cap=40)  # explicit cap widens the limit


def test_pruning_drops_tiny_amplitudes():
    s = TwoModeState({(0, 1): 1.0, (4, 4): 1e-16})
    assert (4, 4) not in s.amplitudes


def test_state_immutable():
    s = noon_state(2)
    with pytest.raises(AttributeError):
        s.max_total = 5
    with pytest.raises(TypeError):
        s.amplitudes[(0, 0)] = 1.0


def test_atom_state_validation():
    AtomState.excited()
    AtomState.ground()
    with pytest.raises(InvalidStateError):
        AtomState(1.0, 1.0)
    a = AtomState.normalized(1.0, 1.0)
    assert abs(a.c_g) ** 2 + abs(a.c_e) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_coupling_params_validation():
    CouplingParams(20.0, 0.1)
    with pytest.raises(ValueError):
        CouplingParams(-1.0, 0.1)
    with pytest.raises(ValueError):
        CouplingParams(20.0, 0.0)
    with pytest.raises(ValueError):
        CouplingParams(math.inf, 0.1)


def test_blocks_grouping():
    s = normalize(TwoModeState({(0, 1): 1.0, (1, 0): 1.0, (2, 1): 1.0}))
    blocks = s.blocks()
    assert set(blocks) == {1, 3}
    assert set(blocks[1]) == {0, 1}
    assert set(blocks[3]) == {2}
