"""Postselected singlet/triplet measurement dynamics on qubit registers.

A measurement of a qubit pair's total spin has two channels: the one
dimensional singlet and the three dimensional triplet.  Postselecting a
channel applies the corresponding projector and renormalizes, which is
not unitary on its own; this module composes such projectors and searches
over short postselection sequences for ones whose induced action on a
system register (with ancillas prepared and read back in a reference
state) approximates a chosen unitary.

Projector entries are exact (Radical scalars); states and the search run
in complex double precision with identities checked to 1e-12.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    BadIndices,
    BudgetExceeded,
    MalformedArguments,
    OutOfRange,
    ZeroProbability,
)
from .hilbert import LinearMapRep, StateVector
from .radical import Radical

_PROB_FLOOR = 1e-18  # squared norms below this count as impossible


class PairChannel(enum.Enum):
    SINGLET = "singlet"
    TRIPLET = "triplet"


SINGLET = PairChannel.SINGLET
TRIPLET = PairChannel.TRIPLET


@dataclass(frozen=True)
class PairProjector:
    """Total-spin projector on one qubit pair, identity elsewhere.

    pair indexes two qubits (0 = most significant tensor factor); rep is
    the exact matrix on the whole register.
    """

    pair: tuple[int, int]
    channel: PairChannel
    rep: LinearMapRep

    @property
    def n_qubits(self) -> int:
        return len(self.rep.in_labels)


@dataclass(frozen=True)
class MeasurementSequence:
    """An ordered list of pair projectors on one register."""

    steps: tuple[PairProjector, ...]
    ancilla_count: int = 0

    def __post_init__(self):
        sizes = {p.n_qubits for p in self.steps}
        if len(sizes) > 1:
            raise BadIndices(f"projectors act on registers of different sizes: {sizes}")
        if self.steps and self.ancilla_count >= next(iter(sizes)):
            raise BadIndices("ancilla count must leave at least one system qubit")


def _singlet_outer() -> np.ndarray:
    """Exact |singlet><singlet| on two qubits (basis 00, 01, 10, 11)."""
    r = Radical.sqrt(Fraction(1, 2))
    vec = [Radical(0), r, -r, Radical(0)]
    arr = np.full((4, 4), Radical(0), dtype=object)
    for r_i in range(4):
        for c_i in range(4):
            arr[r_i, c_i] = vec[r_i] * vec[c_i]
    return arr


def pair_projector(n_qubits: int, i: int, j: int, channel: PairChannel) -> PairProjector:
    """Projector onto the singlet (rank 1) or triplet (rank 3) of qubits i, j."""
    if not 0 <= i < j < n_qubits:
        raise BadIndices(f"need 0 <= i < j < n_qubits, got i={i}, j={j}, n={n_qubits}")
    four = _singlet_outer()
    if channel is TRIPLET:
        eye4 = np.full((4, 4), Radical(0), dtype=object)
        for d in range(4):
            eye4[d, d] = Radical(1)
        four = eye4 - four
    dim = 1 << n_qubits
    full = np.full((dim, dim), Radical(0), dtype=object)
    shift_i, shift_j = n_qubits - 1 - i, n_qubits - 1 - j
    for x in range(dim):
        bi, bj = (x >> shift_i) & 1, (x >> shift_j) & 1
        base = x & ~(1 << shift_i) & ~(1 << shift_j)
        for bi2, bj2 in itertools.product((0, 1), repeat=2):
            y = base | (bi2 << shift_i) | (bj2 << shift_j)
            full[x, y] = four[2 * bi + bj, 2 * bi2 + bj2]
    labels = (1,) * n_qubits
    return PairProjector((i, j), channel, LinearMapRep(labels, labels, full))


def apply_postselected(state: StateVector, p: PairProjector) -> tuple[StateVector, float]:
    """Project a normalized state and renormalize; returns the success probability."""
    if state.labels != p.rep.in_labels:
        raise MalformedArguments(f"state labels {state.labels} != {p.rep.in_labels}")
    projected = p.rep.to_complex() @ state.amplitudes
    prob = float(np.vdot(projected, projected).real)
    if prob <= _PROB_FLOOR:
        raise ZeroProbability(
            f"{p.channel.value} outcome on pair {p.pair} has probability 0"
        )
    return StateVector(state.labels, projected / math.sqrt(prob)), prob


def sequence_channel(
    seq: MeasurementSequence,
    in_dims: Sequence[int] | None = None,
    out_dims: Sequence[int] | None = None,
) -> LinearMapRep:
    """The single linear map a projector sequence composes to (exact entries).

    Later steps multiply on the left.  The result is a contraction
    (operator norm at most 1) but generally not a projector.  in_dims and
    out_dims, when given, must restate the register's qubit dimensions;
    they exist so callers can assert the space they believe they act on.
    """
    if not seq.steps:
        if in_dims is None and out_dims is None:
            raise MalformedArguments(
                "an empty sequence needs in_dims/out_dims to fix the register size"
            )
        dims = tuple(in_dims if in_dims is not None else out_dims)
        n = len(dims)
    else:
        n = seq.steps[0].n_qubits
        dims = (2,) * n
    for given, name in ((in_dims, "in_dims"), (out_dims, "out_dims")):
        if given is not None and tuple(given) != dims:
            raise MalformedArguments(f"{name} {tuple(given)} does not match register {dims}")
    size = 1 << n
    acc = np.full((size, size), Radical(0), dtype=object)
    for d in range(size):
        acc[d, d] = Radical(1)
    for step in seq.steps:
        acc = step.rep.matrix @ acc
    labels = (1,) * n
    return LinearMapRep(labels, labels, acc)


# -- unitary approximation search -------------------------------------------


@dataclass(frozen=True)
class SearchReport:
    """Best postselection sequence found for a target unitary."""

    best_sequence: MeasurementSequence
    fidelity: float
    success_prob: float
    best_by_length: tuple[float, ...]


def default_ancilla_state(ancillas: int) -> StateVector:
    """Product of singlets on ancilla pairs (last qubit up when odd)."""
    vec = np.array([1.0 + 0j])
    singlet = np.array([0, 1, -1, 0], dtype=np.complex128) / math.sqrt(2)
    for _ in range(ancillas // 2):
        vec = np.kron(vec, singlet)
    if ancillas % 2:
        vec = np.kron(vec, np.array([1, 0], dtype=np.complex128))
    return StateVector((1,) * ancillas, vec)


def _map_fidelity(target: np.ndarray, induced: np.ndarray) -> float:
    """Scale-invariant overlap: |tr(U^H A)| / (dim * sigma_max(A)).

    Postselected maps are meaningful up to positive scale, so the induced
    map is compared after normalizing by its largest singular value; the
    result is 1 exactly when A is proportional to the target.
    """
    top = float(np.linalg.svd(induced, compute_uv=False)[0])
    if top < 1e-300:
        return 0.0
    return float(abs(np.trace(target.conj().T @ induced))) / (target.shape[0] * top)


def approximate_unitary_search(
    target: np.ndarray,
    ancillas: int,
    max_len: int,
    ancilla_state: StateVector | None = None,
    *,
    beam_width: int | None = None,
    node_budget: int = 200_000,
) -> SearchReport:
    """Search projector sequences whose induced system map approximates a unitary.

    The system register holds the target's qubits; ancillas are appended,
    prepared in ancilla_state (default: singlet pairs) and read back in the
    same state, so a sequence M induces A = (I (x) <anc|) M (I (x) |anc>)
    on the system.  Breadth-first over sequences up to max_len (consecutive
    repeats of a projector are skipped as no-ops); when beam_width is set
    only the best beam_width prefixes per length are extended.  Fidelity is
    _map_fidelity; success_prob is the mean squared norm of M applied to
    basis system states with the prepared ancilla.
    """
    target = np.asarray(target, dtype=np.complex128)
    if target.ndim != 2 or target.shape[0] != target.shape[1]:
        raise MalformedArguments(f"target must be square, got shape {target.shape}")
    k = (target.shape[0] - 1).bit_length()
    if target.shape[0] != 1 << k or k < 1:
        raise MalformedArguments(f"target dimension {target.shape[0]} is not 2^k, k >= 1")
    if np.max(np.abs(target.conj().T @ target - np.eye(1 << k))) > 1e-9:
        raise MalformedArguments("target is not unitary")
    if ancillas < 0 or max_len < 0:
        raise OutOfRange("ancillas and max_len must be nonnegative")
    n = k + ancillas
    if n > 6:
        raise OutOfRange(f"{n} qubits exceeds the desk-scale bound of 6")

    if ancilla_state is None:
        ancilla_state = default_ancilla_state(ancillas)
    if ancilla_state.labels != (1,) * ancillas:
        raise MalformedArguments(f"ancilla state must be {ancillas} qubits")
    anc = ancilla_state.amplitudes / (ancilla_state.norm or 1.0)
    embed = np.kron(np.eye(1 << k), anc[:, None])  # (2^n, 2^k)

    ops = [
        (i, j, ch)
        for i, j in itertools.combinations(range(n), 2)
        for ch in (SINGLET, TRIPLET)
    ]
    mats = {op: pair_projector(n, op[0], op[1], op[2]).rep.to_complex() for op in ops}

    def induced(m: np.ndarray) -> np.ndarray:
        return embed.conj().T @ m @ embed

    def success(m: np.ndarray) -> float:
        lifted = m @ embed
        return float(np.sum(np.abs(lifted) ** 2)) / (1 << k)

    identity = np.eye(1 << n, dtype=np.complex128)
    best_fid = _map_fidelity(target, induced(identity))
    best_seq: tuple = ()
    best_mat = identity
    best_by_length = [best_fid]
    frontier: list[tuple[float, tuple, np.ndarray]] = [(best_fid, (), identity)]
    nodes = 1
    for _level in range(max_len):
        grown: list[tuple[float, tuple, np.ndarray]] = []
        for _fid, seq, mat in frontier:
            for op in ops:
                if seq and seq[-1] == op:
                    continue  # projectors are idempotent
                nodes += 1
                if nodes > node_budget:
                    raise BudgetExceeded(
                        f"search exceeded the node budget of {node_budget}"
                    )
                new_mat = mats[op] @ mat
                new_seq = seq + (op,)
                fid = _map_fidelity(target, induced(new_mat))
                if fid > best_fid + 1e-15:
                    best_fid, best_seq, best_mat = fid, new_seq, new_mat
                grown.append((fid, new_seq, new_mat))
        if beam_width is not None:
            grown.sort(
                key=lambda item: (-item[0], [(i, j, ch.value) for i, j, ch in item[1]])
            )
            grown = grown[:beam_width]
        frontier = grown
        best_by_length.append(best_fid)
        if not frontier:
            break

    steps = tuple(pair_projector(n, i, j, ch) for i, j, ch in best_seq)
    return SearchReport(
        MeasurementSequence(steps, ancilla_count=ancillas),
        best_fid,
        success(best_mat),
        tuple(best_by_length),
    )
