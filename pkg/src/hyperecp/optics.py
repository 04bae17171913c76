"""Optical element primitives.

Single-DOF unitaries, DOF relabelings (including the guarded constant
frequency-doubling map), the measure-discard-prepare channels used by
path-merging gadgets, cross-Kerr probe tagging and homodyne outcome
classification. Coherent probes are integer theta-multiple counters per
basis ket; a homodyne readout partitions kets by the absolute difference
of the two beams' counts and can never resolve its sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import (
    AliasingError,
    CoherenceLossError,
    NormalizationError,
    ProtocolOrderError,
    ShapeError,
)
from .hyperstate import (
    Branch,
    Dof,
    Ensemble,
    Photon,
    PureState,
    Subsystem,
    _normalized,
    bit_position,
    ket_with,
    merge_branches,
    parse_value,
)

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

UNITARIES: dict[str, tuple[tuple[complex, complex], tuple[complex, complex]]] = {
    "identity": ((1, 0), (0, 1)),
    "flip": ((0, 1), (1, 0)),
    "hadamard": ((_INV_SQRT2, _INV_SQRT2), (_INV_SQRT2, -_INV_SQRT2)),
    "phase_z": ((1, 0), (0, -1)),
}

# Constant relabel used by frequency multipliers: both inputs land on w2.
FREQUENCY_DOUBLE: dict[int, int] = {0: 1, 1: 1}


def apply_dof_unitary(state: PureState, photon: Photon, dof: Dof, unitary: str) -> PureState:
    """Apply a named 2x2 unitary to one photon's chosen DOF."""
    try:
        u = UNITARIES[unitary]
    except KeyError:
        raise ValueError(f"unknown unitary {unitary!r}") from None
    if photon not in state.photons:
        raise ShapeError(f"photon {Photon(photon).name} is not carried by the state")
    b = bit_position(photon, dof)
    acc: dict[int, complex] = {}
    for k, a in state.amplitudes.items():
        v = (k >> b) & 1
        base = k & ~(1 << b)
        for out in (0, 1):
            coeff = u[out][v]
            if coeff:
                nk = base | (out << b)
                acc[nk] = acc.get(nk, 0j) + coeff * a
    return _normalized(acc, state.photons)


def apply_pol_unitary(state: PureState, photon: Photon, unitary: str) -> PureState:
    """Polarization-qubit unitary (half-wave plate settings, phase plates)."""
    return apply_dof_unitary(state, photon, Dof.POL, unitary)


def _normalize_mapping(dof: Dof, mapping: Mapping[int | str, int | str]) -> dict[int, int]:
    out = {}
    for src, dst in mapping.items():
        out[parse_value(dof, src)] = parse_value(dof, dst)
    if set(out) != {0, 1}:
        raise ValueError("relabel mapping must cover both DOF values")
    return out


def relabel_dof(
    state: PureState,
    photon: Photon,
    dof: Dof,
    mapping: Mapping[int | str, int | str],
) -> PureState:
    """Relabel one photon's DOF values.

    A permutation is a unitary relabel. A constant mapping (the frequency
    multiplier) merges source labels; it is only legal when no two
    populated kets collide after the relabel, i.e. when the DOF is already
    classical per ket, otherwise :class:`CoherenceLossError` is raised.
    """
    if photon not in state.photons:
        raise ShapeError(f"photon {Photon(photon).name} is not carried by the state")
    m = _normalize_mapping(dof, mapping)
    if m == {0: 0, 1: 1}:
        return state
    b = bit_position(photon, dof)
    acc: dict[int, complex] = {}
    for k, a in state.amplitudes.items():
        nk = ket_with(k, photon, dof, m[(k >> b) & 1])
        if nk in acc:
            raise CoherenceLossError(
                "constant relabel would merge two populated kets; "
                f"{Photon(photon).name}.{Dof(dof).name.lower()} must be classical first"
            )
        acc[nk] = a
    return PureState(acc, state.photons)


def _single_branch(state: PureState) -> Ensemble:
    return Ensemble((Branch(1.0, state),))


def overwrite_dof_from(
    state: PureState,
    target: Subsystem,
    control: Subsystem,
    rule: Mapping[int | str, int | str],
) -> Ensemble:
    """Re-key the target DOF off the control, erasing its prior value.

    When the per-ket rewrite is injective on the populated kets the
    optical train extends to a unitary relabel and is applied coherently.
    Otherwise the channel measures the target DOF, discards the outcome
    and prepares the value dictated by the control value of each ket;
    branches whose discarded outcomes yield the same state are merged.
    Either way the map is trace-preserving, forgets the target's prior
    value, and applying it twice is idempotent.
    """
    if tuple(target) == tuple(control):
        raise AliasingError("overwrite target and control must be distinct subsystems")
    t_photon, t_dof = Photon(target[0]), Dof(target[1])
    c_photon, c_dof = Photon(control[0]), Dof(control[1])
    for p in (t_photon, c_photon):
        if p not in state.photons:
            raise ShapeError(f"photon {p.name} is not carried by the state")
    m = _normalize_mapping(t_dof, rule)
    tb = bit_position(t_photon, t_dof)
    cb = bit_position(c_photon, c_dof)

    rewritten: dict[int, complex] = {}
    injective = True
    for k, a in state.amplitudes.items():
        nk = ket_with(k, t_photon, t_dof, m[(k >> cb) & 1])
        if nk in rewritten:
            injective = False
            break
        rewritten[nk] = a
    if injective:
        return _single_branch(PureState(rewritten, state.photons))

    groups: dict[int, dict[int, complex]] = {0: {}, 1: {}}
    for k, a in state.amplitudes.items():
        measured = (k >> tb) & 1
        nk = ket_with(k, t_photon, t_dof, m[(k >> cb) & 1])
        groups[measured][nk] = a
    return _measured_groups_to_ensemble(groups.values(), state.photons)


def prepare_dof(
    state: PureState,
    target: Subsystem,
    amplitudes: tuple[complex, complex],
) -> Ensemble:
    """Measure-discard-prepare with an unconditional prepared qubit state."""
    t_photon, t_dof = Photon(target[0]), Dof(target[1])
    if t_photon not in state.photons:
        raise ShapeError(f"photon {t_photon.name} is not carried by the state")
    c0, c1 = complex(amplitudes[0]), complex(amplitudes[1])
    norm = math.sqrt(abs(c0) ** 2 + abs(c1) ** 2)
    if norm < 1e-15:
        raise NormalizationError("prepared state must be nonzero")
    c0, c1 = c0 / norm, c1 / norm
    tb = bit_position(t_photon, t_dof)
    groups: dict[int, dict[int, complex]] = {0: {}, 1: {}}
    for k, a in state.amplitudes.items():
        measured = (k >> tb) & 1
        acc = groups[measured]
        base = k & ~(1 << tb)
        if c0:
            acc[base] = acc.get(base, 0j) + a * c0
        if c1:
            acc[base | (1 << tb)] = acc.get(base | (1 << tb), 0j) + a * c1
    return _measured_groups_to_ensemble(groups.values(), state.photons)


def _measured_groups_to_ensemble(
    groups: Iterable[dict[int, complex]], photons: frozenset[Photon]
) -> Ensemble:
    branches = []
    for amps in groups:
        if not amps:
            continue
        weight = math.fsum(a.real * a.real + a.imag * a.imag for a in amps.values())
        if weight < 1e-28:
            continue
        scale = 1.0 / math.sqrt(weight)
        state = _normalized({k: a * scale for k, a in amps.items()}, photons)
        branches.append(Branch(weight, state.canonical_phase()))
    return Ensemble(merge_branches(branches))


def measure_diagonal(state: PureState, subsystem: Subsystem) -> list[tuple[int, float, PureState]]:
    """Projective measurement of one DOF in its diagonal (+/-) basis.

    Returns ``(sign, probability, post_state)`` triples; the measured DOF
    is left in the corresponding balanced superposition. Outcomes with
    zero probability are dropped.
    """
    photon, dof = Photon(subsystem[0]), Dof(subsystem[1])
    if photon not in state.photons:
        raise ShapeError(f"photon {photon.name} is not carried by the state")
    b = bit_position(photon, dof)
    out = []
    for sign in (1, -1):
        acc: dict[int, complex] = {}
        for k, a in state.amplitudes.items():
            v = (k >> b) & 1
            coeff = a * (_INV_SQRT2 if v == 0 else sign * _INV_SQRT2)
            base = k & ~(1 << b)
            acc[base] = acc.get(base, 0j) + coeff * _INV_SQRT2
            hi = base | (1 << b)
            acc[hi] = acc.get(hi, 0j) + coeff * sign * _INV_SQRT2
        prob = math.fsum(a.real * a.real + a.imag * a.imag for a in acc.values())
        if prob < 1e-28:
            continue
        scale = 1.0 / math.sqrt(prob)
        out.append((sign, prob, _normalized({k: a * scale for k, a in acc.items()}, state.photons)))
    return out


@dataclass(frozen=True)
class ProbeBeam:
    """A named coherent probe; its per-ket theta counts live on the tagged state."""

    id: str


@dataclass(frozen=True)
class KerrRule:
    """Cross-phase coupling: kets matching (photon, dof, value) add theta units."""

    probe: str
    photon: Photon
    dof: Dof
    value: int
    units: int

    def __post_init__(self) -> None:
        if self.units < 0:
            raise ValueError("theta multiples must be nonnegative")
        if self.value not in (0, 1):
            raise ValueError("rule value must be binary")

    def matches(self, ket: int) -> bool:
        return (ket >> bit_position(self.photon, self.dof)) & 1 == self.value


@dataclass(frozen=True)
class HomodyneOutcome:
    """Unsigned phase-shift class |up - down|; the sign is never exposed."""

    magnitude: int

    def __post_init__(self) -> None:
        if self.magnitude < 0:
            raise ValueError("outcome class is an absolute value")


@dataclass(frozen=True)
class CouplingTable:
    """A QND coupling layout: rules feeding an up/down probe pair."""

    probe_up: str
    probe_down: str
    rules: tuple[KerrRule, ...]
    success_class: int = 0

    def __post_init__(self) -> None:
        for rule in self.rules:
            if rule.probe not in (self.probe_up, self.probe_down):
                raise ValueError(f"rule probe {rule.probe!r} is not part of this table")

    def shift_difference(self, ket: int) -> int:
        diff = 0
        for rule in self.rules:
            if rule.matches(ket):
                diff += rule.units if rule.probe == self.probe_up else -rule.units
        return diff

    def classify(self, ket: int) -> int:
        return abs(self.shift_difference(ket))


@dataclass(frozen=True)
class TaggedState:
    """A pure state carrying per-probe integer theta counts on its kets."""

    state: PureState
    tags: Mapping[str, Mapping[int, int]]

    def count(self, probe: str, ket: int) -> int:
        return self.tags.get(probe, {}).get(ket, 0)


def _probe_id(probe: ProbeBeam | str) -> str:
    return probe.id if isinstance(probe, ProbeBeam) else str(probe)


def kerr_tag(
    target: PureState | TaggedState,
    probe: ProbeBeam | str,
    rule: KerrRule,
) -> TaggedState:
    """Accumulate the rule's theta units on every matching ket.

    Amplitudes are untouched; tagging only annotates the state. Sequential
    rules on the same probe add.
    """
    pid = _probe_id(probe)
    if rule.probe != pid:
        raise ValueError(f"rule targets probe {rule.probe!r}, not {pid!r}")
    if isinstance(target, PureState):
        target = TaggedState(target, {})
    tags = {p: dict(counts) for p, counts in target.tags.items()}
    counts = tags.setdefault(pid, {})
    if rule.units:
        for k in target.state.amplitudes:
            if rule.matches(k):
                counts[k] = counts.get(k, 0) + rule.units
    return TaggedState(target.state, tags)


def tag_table(state: PureState | TaggedState, table: CouplingTable) -> TaggedState:
    """Apply every rule of a coupling table, registering both probes."""
    tagged = state if isinstance(state, TaggedState) else TaggedState(state, {})
    tags = {p: dict(counts) for p, counts in tagged.tags.items()}
    tags.setdefault(table.probe_up, {})
    tags.setdefault(table.probe_down, {})
    tagged = TaggedState(tagged.state, tags)
    for rule in table.rules:
        tagged = kerr_tag(tagged, rule.probe, rule)
    return tagged


@dataclass(frozen=True)
class HomodyneBranch:
    outcome: HomodyneOutcome
    probability: float
    state: PureState
    remaining: TaggedState


def homodyne_classify(
    tagged: TaggedState,
    probe_up: ProbeBeam | str,
    probe_down: ProbeBeam | str,
) -> list[HomodyneBranch]:
    """X-homodyne readout of a probe pair.

    Partitions the kets by |count_up - count_down|, yielding one branch per
    class with its projection probability and renormalized state. The two
    probes' tags are consumed; any other probes survive on ``remaining``.
    """
    up, down = _probe_id(probe_up), _probe_id(probe_down)
    for pid in (up, down):
        if pid not in tagged.tags:
            raise ProtocolOrderError(f"probe {pid!r} was never tagged on this state")
    classes: dict[int, dict[int, complex]] = {}
    for k, a in tagged.state.amplitudes.items():
        cls = abs(tagged.count(up, k) - tagged.count(down, k))
        classes.setdefault(cls, {})[k] = a
    others = {p: counts for p, counts in tagged.tags.items() if p not in (up, down)}
    branches = []
    for cls in sorted(classes):
        amps = classes[cls]
        prob = math.fsum(a.real * a.real + a.imag * a.imag for a in amps.values())
        scale = 1.0 / math.sqrt(prob)
        state = _normalized({k: a * scale for k, a in amps.items()}, tagged.state.photons)
        rest = {
            p: {k: c for k, c in counts.items() if k in amps} for p, counts in others.items()
        }
        branches.append(HomodyneBranch(HomodyneOutcome(cls), prob, state, TaggedState(state, rest)))
    return branches


def coupling_to_dict(table: CouplingTable) -> dict:
    return {
        "probe_up": table.probe_up,
        "probe_down": table.probe_down,
        "success_class": table.success_class,
        "rules": [
            {
                "probe": r.probe,
                "photon": r.photon.name,
                "dof": r.dof.name.lower(),
                "value": r.value,
                "units": r.units,
            }
            for r in table.rules
        ],
    }


def coupling_from_dict(data: Mapping) -> CouplingTable:
    rules = tuple(
        KerrRule(
            probe=str(r["probe"]),
            photon=Photon[str(r["photon"]).upper()],
            dof=Dof[str(r["dof"]).upper()],
            value=parse_value(Dof[str(r["dof"]).upper()], r["value"]),
            units=int(r["units"]),
        )
        for r in data["rules"]
    )
    return CouplingTable(
        probe_up=str(data["probe_up"]),
        probe_down=str(data["probe_down"]),
        rules=rules,
        success_class=int(data.get("success_class", 0)),
    )
