"""Postselected singlet/triplet dynamics: projector algebra and the search."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinnet.dynamics import (
    SINGLET,
    TRIPLET,
    MeasurementSequence,
    apply_postselected,
    approximate_unitary_search,
    default_ancilla_state,
    pair_projector,
    sequence_channel,
)
from spinnet.errors import (
    BadIndices,
    BudgetExceeded,
    MalformedArguments,
    OutOfRange,
    ZeroProbability,
)
from spinnet.hilbert import StateVector
from spinnet.radical import Radical

UP = np.array([1, 0], dtype=np.complex128)
DOWN = np.array([0, 1], dtype=np.complex128)
PLUS = np.array([1, 1], dtype=np.complex128) / math.sqrt(2)
SINGLET_VEC = np.array([0, 1, -1, 0], dtype=np.complex128) / math.sqrt(2)
X_GATE = np.array([[0, 1], [1, 0]], dtype=np.complex128)

# Established by the exhaustive runs below and frozen; see the search tests.
X_PLUS_UP_FIDELITY = 0.535236766545937


def qubit_state(*amps: np.ndarray) -> StateVector:
    vec = np.array([1.0 + 0j])
    for a in amps:
        vec = np.kron(vec, a)
    return StateVector((1,) * len(amps), vec)


# -- projector algebra --------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 4])
def test_pair_projector_algebra_is_exact(n):
    eye = np.full((1 << n, 1 << n), Radical(0), dtype=object)
    for d in range(1 << n):
        eye[d, d] = Radical(1)
    for i, j in itertools.combinations(range(n), 2):
        sing = pair_projector(n, i, j, SINGLET).rep.matrix
        trip = pair_projector(n, i, j, TRIPLET).rep.matrix
        assert ((sing @ sing) == sing).all()
        assert ((trip @ trip) == trip).all()
        assert ((sing @ trip) == Radical(0)).all()
        assert ((sing + trip) == eye).all()
        assert sum(sing[d, d] for d in range(1 << n)) == Radical(1 << (n - 2))
        assert sum(trip[d, d] for d in range(1 << n)) == Radical(3 << (n - 2))


def test_pair_projector_embeds_by_kron_on_adjacent_pairs():
    four = pair_projector(2, 0, 1, SINGLET).rep.to_complex()
    low = pair_projector(3, 1, 2, SINGLET).rep.to_complex()
    high = pair_projector(3, 0, 1, SINGLET).rep.to_complex()
    assert np.allclose(low, np.kron(np.eye(2), four), atol=1e-12)
    assert np.allclose(high, np.kron(four, np.eye(2)), atol=1e-12)


def test_pair_projector_rejects_bad_indices():
    with pytest.raises(BadIndices):
        pair_projector(2, 1, 1, SINGLET)
    with pytest.raises(BadIndices):
        pair_projector(3, 2, 1, TRIPLET)
    with pytest.raises(BadIndices):
        pair_projector(2, 0, 2, SINGLET)
    with pytest.raises(BadIndices):
        pair_projector(2, -1, 0, SINGLET)


def test_measurement_sequence_rejects_mixed_registers():
    two = pair_projector(2, 0, 1, SINGLET)
    three = pair_projector(3, 0, 1, SINGLET)
    with pytest.raises(BadIndices):
        MeasurementSequence((two, three))
    with pytest.raises(BadIndices):
        MeasurementSequence((two,), ancilla_count=2)
    assert MeasurementSequence((three,), ancilla_count=2).steps == (three,)


# -- postselection ------------------------------------------------------------


def test_postselect_singlet_fixes_singlet():
    state = StateVector((1, 1), SINGLET_VEC)
    out, prob = apply_postselected(state, pair_projector(2, 0, 1, SINGLET))
    assert prob == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(out.amplitudes, SINGLET_VEC, atol=1e-12)


def test_postselect_singlet_on_aligned_pair_is_impossible():
    with pytest.raises(ZeroProbability):
        apply_postselected(qubit_state(UP, UP), pair_projector(2, 0, 1, SINGLET))


def test_postselect_singlet_on_up_down_has_prob_half():
    out, prob = apply_postselected(
        qubit_state(UP, DOWN), pair_projector(2, 0, 1, SINGLET)
    )
    assert prob == pytest.approx(0.5, abs=1e-12)
    assert out.norm == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(out.amplitudes, SINGLET_VEC, atol=1e-12)


def test_postselect_triplet_keeps_aligned_pair():
    out, prob = apply_postselected(
        qubit_state(UP, UP), pair_projector(2, 0, 1, TRIPLET)
    )
    assert prob == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(out.amplitudes, qubit_state(UP, UP).amplitudes, atol=1e-12)


def test_postselect_rejects_register_mismatch():
    with pytest.raises(MalformedArguments):
        apply_postselected(qubit_state(UP, UP, UP), pair_projector(2, 0, 1, SINGLET))


@given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=8, max_size=8))
def test_channel_probabilities_are_complete(raw):
    vec = np.array(raw[:4]) + 1j * np.array(raw[4:])
    norm = np.linalg.norm(vec)
    if norm < 1e-3:
        return
    vec = vec / norm
    probs = []
    for channel in (SINGLET, TRIPLET):
        projected = pair_projector(2, 0, 1, channel).rep.to_complex() @ vec
        probs.append(float(np.vdot(projected, projected).real))
    assert sum(probs) == pytest.approx(1.0, abs=1e-12)
    assert all(-1e-12 <= p <= 1 + 1e-12 for p in probs)


# -- sequence composition -----------------------------------------------------


def test_empty_sequence_needs_dims_and_gives_identity():
    seq = MeasurementSequence(())
    with pytest.raises(MalformedArguments):
        sequence_channel(seq)
    rep = sequence_channel(seq, in_dims=(2, 2))
    assert np.allclose(rep.to_complex(), np.eye(4), atol=1e-12)
    with pytest.raises(MalformedArguments):
        sequence_channel(MeasurementSequence((pair_projector(2, 0, 1, SINGLET),)),
                         in_dims=(2, 2, 2))


def test_single_step_sequence_is_that_projector():
    proj = pair_projector(3, 0, 2, TRIPLET)
    rep = sequence_channel(MeasurementSequence((proj,)))
    assert (rep.matrix == proj.rep.matrix).all()


@pytest.mark.parametrize(
    "ops",
    [
        [(0, 1, SINGLET), (1, 2, TRIPLET)],
        [(0, 1, TRIPLET), (0, 2, TRIPLET), (1, 2, SINGLET)],
        [(0, 2, SINGLET), (0, 1, SINGLET), (0, 2, SINGLET)],
    ],
)
def test_sequence_channel_matches_postselection_fold(ops):
    steps = tuple(pair_projector(3, i, j, ch) for i, j, ch in ops)
    mat = sequence_channel(MeasurementSequence(steps)).to_complex()
    assert np.linalg.svd(mat, compute_uv=False)[0] <= 1 + 1e-12
    for col in range(8):
        basis = np.zeros(8, dtype=np.complex128)
        basis[col] = 1.0
        state, scale = StateVector((1, 1, 1), basis), 1.0
        dead = False
        try:
            for step in steps:
                state, prob = apply_postselected(state, step)
                scale *= math.sqrt(prob)
        except ZeroProbability:
            dead = True
        if dead:
            assert np.linalg.norm(mat[:, col]) < 1e-10
        else:
            assert np.allclose(mat[:, col], scale * state.amplitudes, atol=1e-10)


# -- the search ---------------------------------------------------------------


def test_default_ancilla_state_is_singlet_product():
    assert np.allclose(default_ancilla_state(0).amplitudes, [1.0])
    assert np.allclose(default_ancilla_state(2).amplitudes, SINGLET_VEC, atol=1e-15)
    three = default_ancilla_state(3)
    assert three.labels == (1, 1, 1)
    assert np.allclose(three.amplitudes, np.kron(SINGLET_VEC, UP), atol=1e-15)
    assert three.norm == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("ancillas", [0, 1, 2])
def test_search_identity_needs_no_steps(ancillas):
    report = approximate_unitary_search(np.eye(2), ancillas, max_len=2)
    assert report.fidelity == pytest.approx(1.0, abs=1e-12)
    assert report.best_sequence.steps == ()
    assert report.success_prob == pytest.approx(1.0, abs=1e-12)


def test_search_with_zero_length_reports_identity_fidelity():
    t_gate = np.diag([1, np.exp(1j * math.pi / 4)])
    report = approximate_unitary_search(t_gate, 0, max_len=0)
    assert report.best_sequence.steps == ()
    assert report.fidelity == pytest.approx(math.cos(math.pi / 8), abs=1e-12)
    assert report.best_by_length == (report.fidelity,)


def test_search_x_with_invariant_ancillas_is_stuck_at_zero():
    # Both singlet/triplet projectors commute with global rotations and
    # conserve total spin-z, so with a rotationally invariant ancilla the
    # induced single-qubit map is proportional to the identity and the X
    # fidelity |tr(X A)| / (2 sigma_max) is exactly 0 at every length.
    report = approximate_unitary_search(X_GATE, 2, max_len=4)
    assert report.fidelity == 0.0
    assert report.best_by_length == (0.0,) * 5
    assert report.best_sequence.steps == ()


def test_search_x_with_symmetry_breaking_ancilla_frozen_value():
    anc = StateVector((1, 1), np.kron(PLUS, UP))
    report = approximate_unitary_search(X_GATE, 2, max_len=4, ancilla_state=anc)
    assert report.fidelity == pytest.approx(X_PLUS_UP_FIDELITY, abs=1e-12)
    assert report.success_prob == pytest.approx(0.140625, abs=1e-12)
    shape = tuple((p.pair, p.channel) for p in report.best_sequence.steps)
    assert shape == (((0, 2), TRIPLET), ((0, 1), SINGLET), ((1, 2), TRIPLET))
    assert report.best_by_length == pytest.approx(
        (0.0, 0.5, 0.5, X_PLUS_UP_FIDELITY, X_PLUS_UP_FIDELITY), abs=1e-12
    )
    assert all(
        a <= b + 1e-15
        for a, b in zip(report.best_by_length, report.best_by_length[1:])
    )


def test_search_fidelity_monotone_in_ancilla_count():
    plus_states = {
        0: None,
        1: StateVector((1,), PLUS),
        2: StateVector((1, 1), np.kron(PLUS, PLUS)),
    }
    fids = [
        approximate_unitary_search(
            X_GATE, a, max_len=2, ancilla_state=state
        ).fidelity
        for a, state in plus_states.items()
    ]
    assert fids[0] == pytest.approx(0.0, abs=1e-12)
    assert fids[1] == pytest.approx(0.5, abs=1e-12)
    assert fids[2] == pytest.approx(0.5, abs=1e-12)
    assert fids[0] <= fids[1] + 1e-12 <= fids[2] + 2e-12


def test_search_beam_agrees_with_exhaustive_when_wide():
    anc = StateVector((1, 1), np.kron(PLUS, UP))
    full = approximate_unitary_search(X_GATE, 2, max_len=3, ancilla_state=anc)
    wide = approximate_unitary_search(
        X_GATE, 2, max_len=3, ancilla_state=anc, beam_width=200
    )
    narrow = approximate_unitary_search(
        X_GATE, 2, max_len=3, ancilla_state=anc, beam_width=1
    )
    assert wide.fidelity == pytest.approx(full.fidelity, abs=1e-12)
    assert narrow.fidelity <= full.fidelity + 1e-12


def test_search_budget_is_enforced():
    with pytest.raises(BudgetExceeded):
        approximate_unitary_search(X_GATE, 2, max_len=2, node_budget=5)


def test_search_rejects_malformed_targets():
    with pytest.raises(MalformedArguments):
        approximate_unitary_search(np.ones((2, 3)), 0, 1)
    with pytest.raises(MalformedArguments):
        approximate_unitary_search(np.eye(3), 0, 1)
    with pytest.raises(MalformedArguments):
        approximate_unitary_search(np.eye(1), 0, 1)
    with pytest.raises(MalformedArguments):
        approximate_unitary_search(np.array([[1, 1], [0, 1]]), 0, 1)
    with pytest.raises(MalformedArguments):
        approximate_unitary_search(
            X_GATE, 2, 1, ancilla_state=StateVector((1,), UP)
        )


def test_search_rejects_out_of_range_sizes():
    with pytest.raises(OutOfRange):
        approximate_unitary_search(X_GATE, -1, 1)
    with pytest.raises(OutOfRange):
        approximate_unitary_search(X_GATE, 0, -1)
    with pytest.raises(OutOfRange):
        approximate_unitary_search(X_GATE, 6, 1)
