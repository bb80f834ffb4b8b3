"""Angular-momentum oracle: exact couplings, recouplings and Born-rule joins.

This module never rewrites a network.  It reads a network as a tensor
contraction of Clebsch-Gordan intertwiners over irreducible SU(2)
representations and computes outcome probabilities by the Born rule, so
it provides a check of the combinatorial evaluator from first principles.
Scalars are ``Radical`` values (signed square roots of rationals), kept
exact end to end; floating point appears only in convenience converters.

Conventions: Condon-Shortley phases throughout; a label-n end carries the
spin-n/2 representation with basis index k = 0..n meaning m = n/2 - k
(descending m); each edge carries one copy of the invariant bilinear
pairing K[k, n-k] = (-1)^k between its two ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    InvalidNetwork,
    InvalidPartition,
    MalformedArguments,
    NotAFreeEnd,
    NullState,
)
from .evaluator import EvalCache, default_cache
from .experiments import OutcomeDistribution
from .model import End, SpinNetwork, admissible_couplings, validate_network
from .radical import Radical


def _half_integer(x) -> Fraction:
    try:
        q = Fraction(x)
    except (TypeError, ValueError) as exc:
        raise MalformedArguments(f"{x!r} is not a number") from exc
    if q.denominator not in (1, 2):
        raise MalformedArguments(f"{x} is not integral or half-integral")
    return q


def _triangle_factor(a: Fraction, b: Fraction, c: Fraction) -> Fraction | None:
    """Racah's Delta^2: (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!, None if no triangle."""
    if (a + b + c).denominator != 1:
        return None
    sides = (a + b - c, a - b + c, -a + b + c)
    if any(s < 0 for s in sides):
        return None
    num = math.prod(math.factorial(int(s)) for s in sides)
    return Fraction(num, math.factorial(int(a + b + c) + 1))


def clebsch_gordan(j1, m1, j2, m2, j, m, cache: EvalCache | None = None) -> Radical:
    """Exact <j1 m1; j2 m2 | j m> in the Condon-Shortley convention.

    Zero whenever a selection rule fails (m != m1 + m2, triangle, or a
    nonexistent magnetic state); MalformedArguments for inputs that are
    not half-integral or have negative total spin.
    """
    j1, m1, j2, m2, j, m = (_half_integer(x) for x in (j1, m1, j2, m2, j, m))
    if j1 < 0 or j2 < 0 or j < 0:
        raise MalformedArguments("total spin cannot be negative")
    cache = cache or default_cache()
    key = ("cg", j1, m1, j2, m2, j, m)
    return cache.get_or(key, lambda: _cg(j1, m1, j2, m2, j, m))


def _cg(j1, m1, j2, m2, j, m) -> Radical:
    zero = Radical(0)
    if m1 + m2 != m:
        return zero
    for jj, mm in ((j1, m1), (j2, m2), (j, m)):
        if abs(mm) > jj or (jj - mm).denominator != 1:
            return zero
    delta = _triangle_factor(j1, j2, j)
    if delta is None:
        return zero
    prefactor = (
        (2 * j + 1)
        * delta
        * math.factorial(int(j + m))
        * math.factorial(int(j - m))
        * math.factorial(int(j1 - m1))
        * math.factorial(int(j1 + m1))
        * math.factorial(int(j2 - m2))
        * math.factorial(int(j2 + m2))
    )
    t_min = int(max(Fraction(0), j2 - j - m1, j1 + m2 - j))
    t_max = int(min(j1 + j2 - j, j1 - m1, j2 + m2))
    total = Fraction(0)
    for t in range(t_min, t_max + 1):
        den = (
            math.factorial(t)
            * math.factorial(int(j1 + j2 - j) - t)
            * math.factorial(int(j1 - m1) - t)
            * math.factorial(int(j2 + m2) - t)
            * math.factorial(int(j - j2 + m1) + t)
            * math.factorial(int(j - j1 - m2) + t)
        )
        total += Fraction(-1 if t % 2 else 1, den)
    return Radical.sqrt(prefactor) * total


def wigner_3j(j1, j2, j3, m1, m2, m3, cache: EvalCache | None = None) -> Radical:
    """Exact Wigner 3j symbol (j1 j2 j3; m1 m2 m3)."""
    j1, j2, j3, m1, m2, m3 = (_half_integer(x) for x in (j1, j2, j3, m1, m2, m3))
    if m1 + m2 + m3 != 0:
        return Radical(0)
    cg = clebsch_gordan(j1, m1, j2, m2, j3, -m3, cache)
    if cg.is_zero():
        return cg
    phase = int(j1 - j2 - m3)  # integral whenever the coefficient is nonzero
    return (Radical(-1 if phase % 2 else 1) * cg) / Radical.sqrt(2 * j3 + 1)


def wigner_6j(j1, j2, j3, j4, j5, j6, cache: EvalCache | None = None) -> Radical:
    """Exact Wigner 6j symbol {j1 j2 j3; j4 j5 j6} by the Racah sum.

    Zero when any of the four triads (j1 j2 j3), (j1 j5 j6), (j4 j2 j6),
    (j4 j5 j3) violates the triangle or integrality condition.
    """
    js = tuple(_half_integer(x) for x in (j1, j2, j3, j4, j5, j6))
    if any(j < 0 for j in js):
        raise MalformedArguments("total spin cannot be negative")
    cache = cache or default_cache()
    key = ("6j",) + js
    return cache.get_or(key, lambda: _six_j(*js))


def _six_j(j1, j2, j3, j4, j5, j6) -> Radical:
    triads = ((j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3))
    deltas = []
    for triad in triads:
        delta = _triangle_factor(*triad)
        if delta is None:
            return Radical(0)
        deltas.append(delta)
    a = [int(sum(t)) for t in triads]
    b = [int(j1 + j2 + j4 + j5), int(j2 + j3 + j5 + j6), int(j3 + j1 + j6 + j4)]
    total = Fraction(0)
    for t in range(max(a), min(b) + 1):
        den = math.prod(math.factorial(t - ai) for ai in a)
        den *= math.prod(math.factorial(bk - t) for bk in b)
        total += Fraction(math.factorial(t + 1), den) * (-1 if t % 2 else 1)
    return Radical.sqrt(math.prod(deltas)) * total


# -- network contraction ---------------------------------------------------


def _metric(n: int, cache: EvalCache) -> np.ndarray:
    """The invariant pairing on a label-n edge: K[k, n-k] = (-1)^k."""

    def build() -> np.ndarray:
        arr = np.full((n + 1, n + 1), Radical(0), dtype=object)
        for k in range(n + 1):
            arr[k, n - k] = Radical(-1 if k % 2 else 1)
        return arr

    return cache.get_or(("pairing", n), build)


def _vertex_tensor(a: int, b: int, c: int, cache: EvalCache) -> np.ndarray:
    """Wigner 3j tensor of a vertex, indexed by the three ends' k-indices."""

    def build() -> np.ndarray:
        ja, jb, jc = Fraction(a, 2), Fraction(b, 2), Fraction(c, 2)
        arr = np.full((a + 1, b + 1, c + 1), Radical(0), dtype=object)
        for ka in range(a + 1):
            for kb in range(b + 1):
                m_c = -(ja - ka) - (jb - kb)
                kc = jc - m_c
                if kc.denominator != 1 or not 0 <= kc <= c:
                    continue
                arr[ka, kb, int(kc)] = wigner_3j(ja, jb, jc, ja - ka, jb - kb, m_c, cache)
        return arr

    return cache.get_or(("vertex-3j", a, b, c), build)


def _contract_network(
    net: SpinNetwork, cache: EvalCache
) -> tuple[np.ndarray, list[End]]:
    """Contract all vertex tensors through the edge pairings.

    Returns the state tensor and the free ends labelling its axes.  Each
    attached end is an axis shared by exactly one vertex tensor and its
    edge's pairing; free ends survive as axes of the result.
    """
    tensors: list[tuple[np.ndarray, list[End]]] = []
    for v in net.vertices:
        labels = tuple(net.label(end) for end in v.ends)
        tensors.append((_vertex_tensor(*labels, cache), list(v.ends)))
    for e in net.edges:
        tensors.append((_metric(e.label, cache), [End(e.id, 0), End(e.id, 1)]))

    if not tensors:
        return np.array(Radical(1), dtype=object), []
    acc, keys = tensors[0]
    pending = tensors[1:]
    while pending:
        pick = next(
            (i for i, (_arr, ks) in enumerate(pending) if any(k in keys for k in ks)),
            0,
        )
        arr, ks = pending.pop(pick)
        shared = [k for k in ks if k in keys]
        if shared:
            acc = np.tensordot(
                acc, arr, ([keys.index(k) for k in shared], [ks.index(k) for k in shared])
            )
            keys = [k for k in keys if k not in shared] + [k for k in ks if k not in shared]
        else:
            acc = np.multiply.outer(acc, arr)
            keys = keys + ks
    assert set(keys) == set(net.free_ends), "contraction lost track of free ends"
    return acc, keys


# -- Hilbert-space views ----------------------------------------------------


@dataclass(frozen=True)
class StateVector:
    """A vector in the tensor product of the labelled irreps."""

    labels: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        dim = math.prod(n + 1 for n in self.labels)
        if self.amplitudes.shape != (dim,):
            raise MalformedArguments(
                f"amplitude shape {self.amplitudes.shape} does not match dimension {dim}"
            )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class LinearMapRep:
    """A linear map between tensor products of irreps, with exact entries.

    matrix[row, col] is indexed row-major by the out ends and column-major
    by the in ends, in the orders given at construction; entries are
    Radical scalars.
    """

    in_labels: tuple[int, ...]
    out_labels: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        shape = (
            math.prod(n + 1 for n in self.out_labels),
            math.prod(n + 1 for n in self.in_labels),
        )
        if self.matrix.shape != shape:
            raise MalformedArguments(f"matrix shape {self.matrix.shape}, expected {shape}")

    def to_complex(self) -> np.ndarray:
        return np.vectorize(float, otypes=[np.complex128])(self.matrix)

    def apply(self, state: StateVector) -> StateVector:
        if state.labels != self.in_labels:
            raise MalformedArguments(f"state labels {state.labels} != {self.in_labels}")
        return StateVector(self.out_labels, self.to_complex() @ state.amplitudes)


def network_to_linear_map(
    net: SpinNetwork,
    in_ends: Sequence[End],
    out_ends: Sequence[End],
    cache: EvalCache | None = None,
) -> LinearMapRep:
    """The intertwiner a network defines from its in ends to its out ends.

    The two sequences must partition the free ends.  Input axes are
    closed with the inverse pairing, so composing maps agrees with gluing
    networks; in particular a bare edge gives the identity map.
    """
    problems = validate_network(net)
    if problems:
        raise InvalidNetwork(problems)
    ins, outs = list(in_ends), list(out_ends)
    combined = outs + ins
    if len(set(combined)) != len(combined) or set(combined) != set(net.free_ends):
        raise InvalidPartition(
            "in_ends and out_ends must be disjoint and cover every free end"
        )
    cache = cache or default_cache()
    acc, keys = _contract_network(net, cache)
    if combined:
        acc = np.transpose(acc, [keys.index(end) for end in combined])
    for in_end in ins:
        # axes sit as outs + pending ins; folding the pairing into the
        # first pending axis reappends it last, preserving the in order
        acc = np.tensordot(acc, _metric(net.label(in_end), cache), ([len(outs)], [0]))
    out_dim = math.prod(net.label(end) + 1 for end in outs)
    in_dim = math.prod(net.label(end) + 1 for end in ins)
    matrix = acc.reshape(out_dim, in_dim)
    return LinearMapRep(
        tuple(net.label(end) for end in ins),
        tuple(net.label(end) for end in outs),
        matrix,
    )


def intertwiner_residual(rep: LinearMapRep) -> float:
    """How far a map is from commuting with global rotations (0 = exact).

    Checks the total J_z and the two ladder operators: the residual is the
    largest entry of J_out @ M - M @ J_in over the three generators.
    """

    def generators(labels: tuple[int, ...]) -> list[np.ndarray]:
        dim = math.prod(n + 1 for n in labels)
        gens = [np.zeros((dim, dim), dtype=np.complex128) for _ in range(3)]
        for pos, n in enumerate(labels):
            j = n / 2.0
            jz = np.diag([j - k for k in range(n + 1)])
            jp = np.zeros((n + 1, n + 1))
            for k in range(1, n + 1):
                m = j - k
                jp[k - 1, k] = math.sqrt(j * (j + 1) - m * (m + 1))
            left = math.prod(nn + 1 for nn in labels[:pos])
            right = math.prod(nn + 1 for nn in labels[pos + 1 :])
            for i, op in enumerate((jz, jp, jp.conj().T)):
                gens[i] += np.kron(np.kron(np.eye(left), op), np.eye(right))
        return gens

    m = rep.to_complex()
    residual = 0.0
    for g_in, g_out in zip(generators(rep.in_labels), generators(rep.out_labels)):
        residual = max(residual, float(np.max(np.abs(g_out @ m - m @ g_in))))
    return residual


# -- Born-rule join ---------------------------------------------------------


def _cg_tensor(a: int, b: int, c: int, cache: EvalCache) -> np.ndarray:
    """CG coefficients <a/2 m_a; b/2 m_b | c/2 M> indexed [k_a, k_b, k_M]."""

    def build() -> np.ndarray:
        ja, jb, jc = Fraction(a, 2), Fraction(b, 2), Fraction(c, 2)
        arr = np.full((a + 1, b + 1, c + 1), Radical(0), dtype=object)
        for ka in range(a + 1):
            for kb in range(b + 1):
                km = jc - (ja - ka) - (jb - kb)
                if km.denominator != 1 or not 0 <= km <= c:
                    continue
                arr[ka, kb, int(km)] = clebsch_gordan(
                    ja, ja - ka, jb, jb - kb, jc, (ja - ka) + (jb - kb), cache
                )
        return arr

    return cache.get_or(("cg-tensor", a, b, c), build)


def born_join_distribution(
    net: SpinNetwork, end_a: End, end_b: End, cache: EvalCache | None = None
) -> OutcomeDistribution:
    """Born-rule distribution over the total spin of two free ends.

    The network state is projected onto each total-spin-c/2 subspace of
    the two ends while every other free end is summed over its magnetic
    states with uniform weight (an isotropic boundary).  The weights come
    out rational and normalize exactly.
    """
    problems = validate_network(net)
    if problems:
        raise InvalidNetwork(problems)
    if end_a == end_b:
        raise NotAFreeEnd("cannot join an end with itself")
    for end in (end_a, end_b):
        if not net.is_free(end):
            raise NotAFreeEnd(f"end {end.edge}:{end.side} is not a free end")
    cache = cache or default_cache()
    a, b = net.label(end_a), net.label(end_b)

    acc, keys = _contract_network(net, cache)
    rest = [end for end in keys if end not in (end_a, end_b)]
    psi = np.transpose(acc, [keys.index(end) for end in [end_a, end_b] + rest])
    psi = psi.reshape(a + 1, b + 1, -1)

    weights: dict[int, Fraction] = {}
    for c in admissible_couplings(a, b):
        cg = _cg_tensor(a, b, c, cache)
        amp = np.tensordot(cg, psi, ([0, 1], [0, 1]))  # [k_M, rest]
        total = Radical(0)
        for value in amp.reshape(-1):
            total = total + value * value
        weights[c] = total.as_fraction()

    nonzero = {c: w for c, w in weights.items() if w}
    if not nonzero:
        raise NullState("the network state vanishes; no outcome has weight")
    grand = sum(nonzero.values())
    entries = {c: w / grand for c, w in sorted(nonzero.items())}
    return OutcomeDistribution(a, b, entries)
