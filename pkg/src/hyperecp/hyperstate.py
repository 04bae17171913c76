"""Sparse state algebra for four-photon, three-DOF systems.

Photons A..D each carry three binary degrees of freedom: polarization
{H, V}, spatial path {m1, m2} (rendered per photon as a1/a2 .. d1/d2) and
frequency {w1, w2}. A basis ket assigns one value per (photon, DOF) and
packs into a 12-bit integer; pure states are sparse complex-amplitude maps
over those integers, mixed states are classically weighted ensembles of
pure branches. All states are immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import DegenerateStateError, NormalizationError, ShapeError

NORM_ATOL = 1e-12
PRUNE_EPS = 1e-14
STATE_ATOL = 1e-12
ENTROPY_EIG_FLOOR = 1e-12


class Photon(IntEnum):
    A = 0
    B = 1
    C = 2
    D = 3


class Dof(IntEnum):
    POL = 0
    SPATIAL = 1
    FREQ = 2


ALL_PHOTONS = frozenset(Photon)
N_SLOTS = 12
DIM = 1 << N_SLOTS

_POL_LABELS = ("H", "V")
_SPATIAL_LABELS = ("m1", "m2")
_FREQ_LABELS = ("w1", "w2")
_SPATIAL_SCOPED = "abcd"


def bit_position(photon: Photon, dof: Dof) -> int:
    return int(photon) * 3 + int(dof)


def parse_value(dof: Dof, value: int | str, photon: Photon | None = None) -> int:
    """Normalize a DOF value given as 0/1 or as a label (H, m2, a1, w1, ...)."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        if value in (0, 1):
            return int(value)
        raise ValueError(f"binary DOF value out of range: {value}")
    text = str(value)
    if dof == Dof.POL:
        labels = _POL_LABELS
    elif dof == Dof.FREQ:
        labels = _FREQ_LABELS
    else:
        if len(text) == 2 and text[0] in _SPATIAL_SCOPED and text[1] in "12":
            if photon is not None and text[0] != _SPATIAL_SCOPED[photon]:
                raise ValueError(f"spatial label {text!r} does not belong to photon {photon.name}")
            return int(text[1]) - 1
        labels = _SPATIAL_LABELS
    try:
        return labels.index(text)
    except ValueError:
        raise ValueError(f"unknown {dof.name.lower()} value {value!r}") from None


def value_label(dof: Dof, value: int, photon: Photon | None = None) -> str:
    if dof == Dof.POL:
        return _POL_LABELS[value]
    if dof == Dof.FREQ:
        return _FREQ_LABELS[value]
    if photon is None:
        return _SPATIAL_LABELS[value]
    return f"{_SPATIAL_SCOPED[photon]}{value + 1}"


def ket_value(index: int, photon: Photon, dof: Dof) -> int:
    return (index >> bit_position(photon, dof)) & 1


def ket_with(index: int, photon: Photon, dof: Dof, value: int) -> int:
    b = bit_position(photon, dof)
    return (index & ~(1 << b)) | (value << b)


def photon_mask(photons: Iterable[Photon]) -> int:
    mask = 0
    for p in photons:
        mask |= 0b111 << (int(p) * 3)
    return mask


_MASK_CACHE: dict[frozenset, int] = {}


def _cached_mask(photons: frozenset) -> int:
    mask = _MASK_CACHE.get(photons)
    if mask is None:
        mask = _MASK_CACHE[photons] = photon_mask(photons)
    return mask


def ket_label(index: int, photons: Iterable[Photon] = Photon) -> str:
    parts = []
    for p in sorted(photons):
        pol = ket_value(index, p, Dof.POL)
        spa = ket_value(index, p, Dof.SPATIAL)
        frq = ket_value(index, p, Dof.FREQ)
        parts.append(
            value_label(Dof.POL, pol)
            + value_label(Dof.SPATIAL, spa, p)
            + value_label(Dof.FREQ, frq)
        )
    return " ".join(parts)


@dataclass(frozen=True, order=True)
class BasisKet:
    """One assignment of (pol, spatial, freq) values to each carried photon.

    The 12-bit ``index`` is the canonical ordering key: bit 3*photon+dof
    holds the binary value of that subsystem.
    """

    index: int

    def __post_init__(self) -> None:
        if not 0 <= self.index < DIM:
            raise ValueError(f"ket index out of range: {self.index}")

    @classmethod
    def of(cls, **assignments: Sequence[int | str]) -> "BasisKet":
        """Build a ket from per-photon (pol, spatial, freq) triples.

        Example: ``BasisKet.of(A=("H", "a1", "w1"), B=("V", "b2", "w2"))``.
        Photons not mentioned contribute zero bits.
        """
        index = 0
        for name, triple in assignments.items():
            photon = Photon[name]
            if len(triple) != 3:
                raise ValueError(f"photon {name} needs a (pol, spatial, freq) triple")
            for dof, value in zip(Dof, triple):
                index = ket_with(index, photon, dof, parse_value(dof, value, photon))
        return cls(index)

    def value(self, photon: Photon, dof: Dof) -> int:
        return ket_value(self.index, photon, dof)

    def with_value(self, photon: Photon, dof: Dof, value: int | str) -> "BasisKet":
        return BasisKet(ket_with(self.index, photon, dof, parse_value(dof, value, photon)))

    def label(self, photons: Iterable[Photon] = Photon) -> str:
        return ket_label(self.index, photons)


def _norm_sq(amplitudes: Mapping[int, complex]) -> float:
    return math.fsum(a.real * a.real + a.imag * a.imag for a in amplitudes.values())


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized sparse amplitude map over basis kets.

    ``photons`` declares which photon slots are carried; all other slots
    must hold zero bits in every populated ket. Amplitudes with modulus
    below 1e-14 are never stored.
    """

    amplitudes: Mapping[int, complex]
    photons: frozenset[Photon] = field(default=ALL_PHOTONS)

    def __post_init__(self) -> None:
        if not self.amplitudes:
            raise DegenerateStateError("state has no amplitude")
        combined = 0
        total = 0.0
        for k, a in self.amplitudes.items():
            combined |= k
            total += a.real * a.real + a.imag * a.imag
        if combined & ~_cached_mask(self.photons):
            raise ShapeError("ket populates photons outside the declared photon set")
        if abs(total - 1.0) > 1e-9:
            raise NormalizationError("pure state is not normalized")

    def amplitude(self, ket: BasisKet | int) -> complex:
        index = ket.index if isinstance(ket, BasisKet) else ket
        return self.amplitudes.get(index, 0j)

    def terms(self) -> Iterator[tuple[BasisKet, complex]]:
        for k in sorted(self.amplitudes):
            yield BasisKet(k), self.amplitudes[k]

    def kets(self) -> tuple[int, ...]:
        return tuple(sorted(self.amplitudes))

    def norm_sq(self) -> float:
        return _norm_sq(self.amplitudes)

    def with_global_phase(self, phase: float) -> "PureState":
        factor = complex(math.cos(phase), math.sin(phase))
        return PureState({k: a * factor for k, a in self.amplitudes.items()}, self.photons)

    def canonical_phase(self) -> "PureState":
        """Fix the global phase: the dominant amplitude is made real-positive.

        Ties on modulus (within a relative 1e-9) break toward the lowest
        ket index, so the result is deterministic.
        """
        peak = max(abs(a) for a in self.amplitudes.values())
        ref_key = min(k for k, a in self.amplitudes.items() if abs(a) >= peak * (1.0 - 1e-9))
        ref = self.amplitudes[ref_key]
        factor = abs(ref) / ref
        return PureState({k: a * factor for k, a in self.amplitudes.items()}, self.photons)

    def allclose(self, other: "PureState", atol: float = STATE_ATOL) -> bool:
        if self.photons != other.photons:
            return False
        keys = set(self.amplitudes) | set(other.amplitudes)
        return all(
            abs(self.amplitudes.get(k, 0j) - other.amplitudes.get(k, 0j)) <= atol for k in keys
        )

    def debug_str(self) -> str:
        """Stable text form: one ``(re,im) |ket>`` line per term, ket-index order."""
        lines = []
        for k in sorted(self.amplitudes):
            a = self.amplitudes[k]
            lines.append(f"({a.real:.15g},{a.imag:.15g}) |{ket_label(k, self.photons)}>")
        return "\n".join(lines)

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        names = "".join(p.name for p in sorted(self.photons))
        return f"PureState({names}, {len(self.amplitudes)} terms)"


def _normalized(raw: Mapping[int, complex], photons: frozenset[Photon]) -> PureState:
    pruned = {k: a for k, a in raw.items() if abs(a) >= PRUNE_EPS}
    if not pruned:
        raise DegenerateStateError("amplitudes cancel to the zero vector")
    norm = math.sqrt(_norm_sq(pruned))
    return PureState({k: a / norm for k, a in pruned.items()}, photons)


def superpose(
    terms: Iterable[tuple[complex, BasisKet | int]],
    photons: Iterable[Photon] = Photon,
) -> PureState:
    """Build the normalized superposition of weighted kets.

    Coefficients on repeated kets add; relative phases are preserved. An
    input whose coefficients cancel raises :class:`DegenerateStateError`.
    """
    acc: dict[int, complex] = {}
    empty = True
    for coeff, ket in terms:
        empty = False
        index = ket.index if isinstance(ket, BasisKet) else int(ket)
        acc[index] = acc.get(index, 0j) + complex(coeff)
    if empty:
        raise DegenerateStateError("no terms given")
    return _normalized(acc, frozenset(photons))


def tensor(left: PureState, right: PureState) -> PureState:
    """Tensor product of states on disjoint photon sets."""
    if left.photons & right.photons:
        raise ShapeError("tensor factors share photons")
    amps = {
        kl | kr: al * ar
        for kl, al in left.amplitudes.items()
        for kr, ar in right.amplitudes.items()
    }
    return _normalized(amps, left.photons | right.photons)


def fidelity(s: PureState, t: PureState) -> float:
    """Squared overlap |<t|s>|^2; both states must carry the same photons."""
    if s.photons != t.photons:
        raise ShapeError("fidelity requires identical photon sets")
    overlap = sum(t.amplitudes[k].conjugate() * a for k, a in s.amplitudes.items() if k in t.amplitudes)
    return abs(overlap) ** 2


Subsystem = tuple[Photon, Dof]


def _check_subsystems(state: PureState, subs: Iterable[Subsystem]) -> tuple[Subsystem, ...]:
    ordered = tuple(sorted(set((Photon(p), Dof(d)) for p, d in subs)))
    if not ordered:
        raise ShapeError("subsystem selection is empty")
    for p, _ in ordered:
        if p not in state.photons:
            raise ShapeError(f"photon {p.name} is not carried by the state")
    return ordered


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated Hermitian, unit-trace, positive-semidefinite matrix."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError("density matrix must be square")
        if abs(np.trace(m) - 1.0) > 1e-10:
            raise NormalizationError("density matrix trace differs from one")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise NormalizationError("density matrix is not Hermitian")
        if np.min(np.linalg.eigvalsh(m)) < -1e-10:
            raise NormalizationError("density matrix has a negative eigenvalue")

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def entropy_bits(self) -> float:
        eigs = self.eigenvalues()
        return float(-sum(v * math.log2(v) for v in eigs if v > ENTROPY_EIG_FLOOR))


def reduced_density(state: PureState, keep: Iterable[Subsystem]) -> DensityMatrix:
    """Partial trace down to the kept subsystems.

    Subsystems are ordered photon-major (A..D), DOF-minor (pol, spatial,
    freq); the first kept subsystem is the most significant bit of the
    reduced index.
    """
    kept = _check_subsystems(state, keep)
    kept_bits = [bit_position(p, d) for p, d in kept]
    rest_bits = [
        bit_position(p, d)
        for p in sorted(state.photons)
        for d in Dof
        if (p, d) not in kept
    ]
    n = len(kept_bits)
    dim = 1 << n
    columns: dict[int, np.ndarray] = {}
    for k, a in state.amplitudes.items():
        kept_idx = 0
        for b in kept_bits:
            kept_idx = (kept_idx << 1) | ((k >> b) & 1)
        rest_idx = 0
        for b in rest_bits:
            rest_idx = (rest_idx << 1) | ((k >> b) & 1)
        col = columns.get(rest_idx)
        if col is None:
            col = np.zeros(dim, dtype=complex)
            columns[rest_idx] = col
        col[kept_idx] += a
    rho = np.zeros((dim, dim), dtype=complex)
    for col in columns.values():
        rho += np.outer(col, col.conj())
    return DensityMatrix(rho)


def entanglement_entropy(state: PureState, bipartition: Iterable[Subsystem]) -> float:
    """Von Neumann entropy (bits) of one side of a bipartition."""
    kept = _check_subsystems(state, bipartition)
    total = {(p, d) for p in state.photons for d in Dof}
    if set(kept) == total:
        raise ShapeError("bipartition must be a proper subset of the carried subsystems")
    return reduced_density(state, kept).entropy_bits()


@dataclass(frozen=True)
class Branch:
    """One classically weighted pure component with its outcome history."""

    weight: float
    state: PureState
    record: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.weight > 0:
            raise NormalizationError("branch weight must be positive")


@dataclass(frozen=True)
class Ensemble:
    """Classical mixture of pure branches; weights sum to one."""

    branches: tuple[Branch, ...]

    def __post_init__(self) -> None:
        total = math.fsum(b.weight for b in self.branches)
        if abs(total - 1.0) > NORM_ATOL:
            raise NormalizationError(f"ensemble weights sum to {total!r}, expected 1")

    def __iter__(self) -> Iterator[Branch]:
        return iter(self.branches)

    def __len__(self) -> int:
        return len(self.branches)


def mix(weighted: Iterable[tuple[float, PureState]]) -> Ensemble:
    """Form an ensemble from (probability, state) pairs summing to one."""
    branches = []
    for prob, state in weighted:
        if prob <= 0:
            raise NormalizationError("mixture probabilities must be positive")
        branches.append(Branch(float(prob), state))
    if not branches:
        raise NormalizationError("mixture is empty")
    return Ensemble(tuple(branches))


def merge_branches(branches: Iterable[Branch], atol: float = STATE_ATOL) -> tuple[Branch, ...]:
    """Coalesce branches with identical records and identical states.

    Weights add; the first-seen branch provides the representative state.
    """
    merged: list[Branch] = []
    for br in branches:
        for i, seen in enumerate(merged):
            if seen.record == br.record and seen.state.allclose(br.state, atol):
                merged[i] = Branch(seen.weight + br.weight, seen.state, seen.record)
                break
        else:
            merged.append(br)
    return tuple(merged)


def extract_photons(state: PureState, keep: Iterable[Photon]) -> PureState:
    """Factor out the pure state of ``keep`` when it is unentangled with the rest.

    Raises :class:`ShapeError` when the kept photons are entangled with the
    remainder (factorization residual above 1e-9). The result has its
    global phase canonicalized.
    """
    kept = frozenset(Photon(p) for p in keep)
    if not kept <= state.photons:
        raise ShapeError("kept photons are not all carried by the state")
    if kept == state.photons:
        return state
    keep_mask = photon_mask(kept)
    columns: dict[int, dict[int, complex]] = {}
    for k, a in state.amplitudes.items():
        columns.setdefault(k & ~keep_mask, {})[k & keep_mask] = a
    ref_key = max(columns, key=lambda r: _norm_sq(columns[r]))
    ref = columns[ref_key]
    ref_norm = math.sqrt(_norm_sq(ref))
    v = {k: a / ref_norm for k, a in ref.items()}
    for col in columns.values():
        coeff = sum(v[k].conjugate() * col.get(k, 0j) for k in v)
        residual = math.fsum(
            abs(col.get(k, 0j) - coeff * v.get(k, 0j)) ** 2 for k in set(col) | set(v)
        )
        if math.sqrt(residual) > 1e-9:
            raise ShapeError("requested photons are entangled with the rest of the state")
    return _normalized(v, kept).canonical_phase()
