import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from dense_oracle import DenseModel, engine_to_dense
from kerrmzi.errors import NegativeEigenvalueError
from kerrmzi.fockspace import (
    ModeA,
    ModeB,
    ModeSelector,
    SectorDensity,
    SectorState,
    apply_beamsplitter,
    apply_cross_kerr,
    apply_phase_shift,
    apply_self_kerr,
    beamsplitter_sector_matrix,
    mode_number_moments,
)
from kerrmzi.inputs import InputSpec, build_input


def random_state(seed, n_max, mixed=False):
    rng = np.random.default_rng(seed)
    if not mixed:
        secs = [rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1) for n in range(n_max + 1)]
        norm = math.sqrt(sum(np.vdot(v, v).real for v in secs))
        return SectorState(tuple(v / norm for v in secs))
    facs = [rng.normal(size=(n + 1, 2)) + 1j * rng.normal(size=(n + 1, 2)) for n in range(n_max + 1)]
    tr = sum(np.sum(np.abs(f) ** 2) for f in facs)
    return SectorDensity(tuple(f / math.sqrt(tr) for f in facs))


def assert_same_state(s1, s2, atol=1e-12):
    if isinstance(s1, SectorState):
        for a, b in zip(s1.sectors, s2.sectors):
            np.testing.assert_allclose(a, b, atol=atol)
    else:
        for a, b in zip(s1.blocks, s2.blocks):
            np.testing.assert_allclose(a, b, atol=atol)


# beamsplitter ---------------------------------------------------------------

@pytest.mark.parametrize("n", range(0, 40))
def test_beamsplitter_unitary(n):
    u = beamsplitter_sector_matrix(n)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(n + 1), atol=1e-12)


def test_beamsplitter_small_sectors():
    np.testing.assert_allclose(beamsplitter_sector_matrix(0), [[1.0]])
    np.testing.assert_allclose(np.abs(beamsplitter_sector_matrix(1)), np.full((2, 2), 1 / math.sqrt(2)), atol=1e-14)


def test_single_photon_split():
    out = apply_beamsplitter(SectorState.basis(1, 0))
    # index k = photons in mode a: |1,0> is k=1, |0,1> is k=0
    np.testing.assert_allclose(out.sectors[1], [1j / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-14)


def test_vacuum_invariant():
    out = apply_beamsplitter(SectorState.basis(0, 0))
    np.testing.assert_allclose(out.sectors[0], [1.0])


@pytest.mark.parametrize("n", [1, 2, 5, 9])
def test_beamsplitter_matches_matrix_exponential(n):
    # generator restricted to sector n, built independently from ladder algebra
    gen = np.zeros((n + 1, n + 1))
    for k in range(n):
        gen[k + 1, k] = gen[k, k + 1] = math.sqrt((k + 1) * (n - k))
    np.testing.assert_allclose(beamsplitter_sector_matrix(n), expm(0.25j * math.pi * gen), atol=1e-12)


def test_beamsplitter_pi_phase_inverse():
    # mode matrices: BS diag(-1, 1) BS = diag(-1, 1), i.e. (-1)^n_a
    state = random_state(3, 6)
    out = apply_beamsplitter(apply_phase_shift(apply_beamsplitter(state), math.pi, ModeA))
    assert_same_state(out, apply_phase_shift(state, math.pi, ModeA))
    for n in range(6):
        single = SectorState.basis(n, 0)
        back = apply_beamsplitter(apply_phase_shift(apply_beamsplitter(single), math.pi, ModeA))
        assert abs(abs(np.vdot(single.sectors[n], back.sectors[n])) - 1.0) < 1e-12


def test_beamsplitter_readonly():
    with pytest.raises(ValueError):
        beamsplitter_sector_matrix(3)[0, 0] = 0


# diagonal elements ----------------------------------------------------------

def test_phase_shift_number_state():
    phi = 0.37
    out = apply_phase_shift(SectorState.basis(4, 0), phi, ModeA)
    assert out.sectors[4][4] == pytest.approx(np.exp(4j * phi))
    out_b = apply_phase_shift(SectorState.basis(1, 3), phi, ModeB)
    assert out_b.sectors[4][1] == pytest.approx(np.exp(3j * phi))


@pytest.mark.parametrize("phi", [0.0, 2 * math.pi])
def test_phase_shift_identity(phi):
    state = random_state(1, 5)
    assert_same_state(apply_phase_shift(state, phi), state)


def test_self_kerr_examples():
    chi = 0.71
    assert apply_self_kerr(SectorState.basis(2, 0), chi).sectors[2][2] == pytest.approx(np.exp(2j * chi))
    assert apply_self_kerr(SectorState.basis(1, 0), chi).sectors[1][1] == pytest.approx(1.0)
    assert apply_self_kerr(SectorState.basis(0, 4), chi).sectors[4][0] == pytest.approx(1.0)


def test_cross_kerr_examples():
    chi = 0.43
    assert apply_cross_kerr(SectorState.basis(1, 1), chi).sectors[2][1] == pytest.approx(np.exp(1j * chi))
    assert apply_cross_kerr(SectorState.basis(3, 0), chi).sectors[3][3] == pytest.approx(1.0)
    assert apply_cross_kerr(SectorState.basis(2, 2), chi).sectors[4][2] == pytest.approx(np.exp(4j * chi))


# moments --------------------------------------------------------------------

def test_moments_number_state():
    assert mode_number_moments(SectorState.basis(3, 0), ModeA) == pytest.approx((3.0, 9.0))


def test_moments_split_photon():
    assert mode_number_moments(apply_beamsplitter(SectorState.basis(1, 0)), ModeA) == pytest.approx((0.5, 0.5))


def test_moments_thermal_input():
    nbar = 2.5
    m1, m2 = mode_number_moments(build_input(InputSpec.thermal(nbar, 1e-13)), ModeA)
    assert m1 == pytest.approx(nbar, abs=1e-9)
    assert m2 == pytest.approx(2 * nbar ** 2 + nbar, abs=1e-8)


def test_mode_selector_parse():
    assert ModeSelector.parse("A") is ModeA
    assert ModeSelector.parse(ModeB) is ModeB
    with pytest.raises(ValueError):
        ModeSelector.parse("c")


# densities ------------------------------------------------------------------

def test_from_blocks_rejects_negative():
    with pytest.raises(NegativeEigenvalueError):
        SectorDensity.from_blocks([np.array([[1.0]]), np.diag([0.5, -1e-6])])


def test_from_blocks_symmetrises_small_asymmetry():
    b = np.array([[0.5, 1e-13j], [0.0, 0.5]])
    d = SectorDensity.from_blocks([np.array([[0.0]]), b])
    np.testing.assert_allclose(d.block(1), d.block(1).conj().T, atol=1e-15)


def test_sector_length_enforced():
    with pytest.raises(ValueError):
        SectorState((np.ones(1), np.ones(3)))


# properties -----------------------------------------------------------------

ops = st.sampled_from(["bs", "ps_a", "ps_b", "sk", "ck"])


def apply_op(state, op, angle):
    if op == "bs":
        return apply_beamsplitter(state)
    if op == "ps_a":
        return apply_phase_shift(state, angle, ModeA)
    if op == "ps_b":
        return apply_phase_shift(state, angle, ModeB)
    if op == "sk":
        return apply_self_kerr(state, angle)
    return apply_cross_kerr(state, angle)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), n_max=st.integers(0, 8), op=ops,
       angle=st.floats(-10, 10, allow_nan=False), mixed=st.booleans())
def test_norm_and_sector_preservation(seed, n_max, op, angle, mixed):
    state = random_state(seed, n_max, mixed)
    out = apply_op(state, op, angle)
    w_in, w_out = state.sector_weights(), out.sector_weights()
    np.testing.assert_allclose(w_out, w_in, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), n_max=st.integers(0, 8),
       op=st.sampled_from(["ps_a", "ps_b", "sk", "ck"]), angle=st.floats(-10, 10, allow_nan=False))
def test_diagonal_inverses(seed, n_max, op, angle):
    state = random_state(seed, n_max)
    assert_same_state(apply_op(apply_op(state, op, angle), op, -angle), state)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), n_max=st.integers(0, 6), mixed=st.booleans(),
       chi=st.floats(-4, 4, allow_nan=False), phi=st.floats(-4, 4, allow_nan=False))
def test_agrees_with_dense_oracle(seed, n_max, mixed, chi, phi):
    model = DenseModel(n_max)
    state = random_state(seed, n_max, mixed)
    rho = engine_to_dense(model, state)
    out = apply_cross_kerr(apply_self_kerr(apply_phase_shift(apply_beamsplitter(state), phi), chi), chi / 3)
    u = model.kerr("CK", chi / 3) @ model.kerr("SK", chi) @ model.phase(phi) @ model.bs
    np.testing.assert_allclose(engine_to_dense(model, out), u @ rho @ u.conj().T, atol=1e-10)
