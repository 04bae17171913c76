"""Figure-level composite operations.

Each gadget chains optical primitives into one step of a protocol: the
spatial/frequency parity check (qnd1), the two DOF-transfer transforms,
the pair eraser, the diagonalizer/correlator, and the two-sided
polarization/spatial parity check (qnd2). Feed-forward corrections that
the owning party must apply are prescribed on the outcome, never applied
silently; internal resets that are deterministic given the recorded
outcome are folded in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import PreconditionError, ShapeError
from .hyperstate import (
    ALL_PHOTONS,
    Branch,
    Dof,
    Ensemble,
    Photon,
    PureState,
    Subsystem,
    _normalized,
    bit_position,
    ket_value,
    merge_branches,
)
from .optics import (
    FREQUENCY_DOUBLE,
    CouplingTable,
    KerrRule,
    apply_dof_unitary,
    homodyne_classify,
    relabel_dof,
    overwrite_dof_from,
    prepare_dof,
    tag_table,
)

Correction = tuple[Photon, Dof, str]

_SAME = {0: 0, 1: 1}
_OPPOSITE = {0: 1, 1: 0}


@dataclass(frozen=True)
class GadgetOutcome:
    """One labeled measurement outcome of a gadget.

    ``corrections`` lists local unitaries prescribed by feed-forward but
    not yet applied. ``class_breakdown`` optionally records the homodyne
    classes aggregated into this outcome.
    """

    label: str
    probability: float
    state: PureState | None
    corrections: tuple[Correction, ...] = ()
    class_breakdown: tuple[tuple[int, float], ...] = ()


def apply_corrections(state: PureState, corrections: Iterable[Correction]) -> PureState:
    for photon, dof, unitary in corrections:
        state = apply_dof_unitary(state, photon, dof, unitary)
    return state


def gadget_trace(outcomes: Iterable[GadgetOutcome]) -> str:
    """One line per outcome: label, probability (15 digits), corrections."""
    lines = []
    for out in outcomes:
        ops = ",".join(f"{p.name}.{d.name.lower()}.{u}" for p, d, u in out.corrections)
        lines.append(f"{out.label} p={out.probability:.15g} corrections=[{ops}]")
    return "\n".join(lines)


def map_branches(ensemble: Ensemble, channel: Callable[[PureState], Ensemble]) -> Ensemble:
    """Apply a pure-state channel across every branch, merging duplicates."""
    children = []
    for parent in ensemble:
        for child in channel(parent.state):
            children.append(
                Branch(parent.weight * child.weight, child.state, parent.record + child.record)
            )
    return Ensemble(merge_branches(children))


def _one(state: PureState) -> Ensemble:
    return Ensemble((Branch(1.0, state),))


def _require_photons(state: PureState, photons: Iterable[Photon]) -> None:
    missing = frozenset(photons) - state.photons
    if missing:
        names = ",".join(p.name for p in sorted(missing))
        raise ShapeError(f"state does not carry photon(s) {names}")


# ---------------------------------------------------------------------------
# Parity check on Alice's photons: spatial and frequency anti-correlation.
# ---------------------------------------------------------------------------

def default_qnd1_coupling() -> CouplingTable:
    """Default coupling layout for the spatial/frequency parity check.

    Spatial couplings carry two theta units per photon, frequency couplings
    one, so the two DOFs cannot cancel each other: the zero class is
    exactly the kets where both the spatial paths and the frequencies of
    the two measured photons differ. Alternative layouts are data and can
    be loaded from config.
    """
    up, down = "qnd1.up", "qnd1.down"
    rules = (
        KerrRule(up, Photon.A, Dof.SPATIAL, 0, 2),
        KerrRule(down, Photon.A, Dof.SPATIAL, 1, 2),
        KerrRule(up, Photon.C, Dof.SPATIAL, 0, 2),
        KerrRule(down, Photon.C, Dof.SPATIAL, 1, 2),
        KerrRule(up, Photon.A, Dof.FREQ, 0, 1),
        KerrRule(down, Photon.A, Dof.FREQ, 1, 1),
        KerrRule(up, Photon.C, Dof.FREQ, 0, 1),
        KerrRule(down, Photon.C, Dof.FREQ, 1, 1),
    )
    return CouplingTable(up, down, rules, success_class=0)


def qnd1_success_predicate(ket: int) -> bool:
    """Declarative contract: both spatial paths and frequencies differ on A, C."""
    return (
        ket_value(ket, Photon.A, Dof.SPATIAL) != ket_value(ket, Photon.C, Dof.SPATIAL)
        and ket_value(ket, Photon.A, Dof.FREQ) != ket_value(ket, Photon.C, Dof.FREQ)
    )


def qnd1(state: PureState, coupling: CouplingTable | None = None) -> dict[str, GadgetOutcome]:
    """Nondemolition parity check on photons A and C.

    The equal-shift homodyne class is the success outcome; everything else
    is aggregated into a single failure outcome whose state is the
    complement projection and whose per-class probabilities are kept in
    ``class_breakdown``.
    """
    _require_photons(state, (Photon.A, Photon.C))
    table = coupling if coupling is not None else default_qnd1_coupling()
    tagged = tag_table(state, table)
    branches = homodyne_classify(tagged, table.probe_up, table.probe_down)

    success_state: PureState | None = None
    p_success = 0.0
    breakdown = []
    fail_kets: set[int] = set()
    for br in branches:
        if br.outcome.magnitude == table.success_class:
            success_state = br.state
            p_success = br.probability
        else:
            breakdown.append((br.outcome.magnitude, br.probability))
            fail_kets.update(br.state.amplitudes)
    p_fail = math.fsum(p for _, p in breakdown)
    fail_state = None
    if fail_kets:
        scale = 1.0 / math.sqrt(p_fail)
        fail_state = _normalized(
            {k: state.amplitudes[k] * scale for k in fail_kets}, state.photons
        )
    return {
        "success": GadgetOutcome("success", p_success, success_state),
        "fail": GadgetOutcome("fail", p_fail, fail_state, class_breakdown=tuple(breakdown)),
    }


# ---------------------------------------------------------------------------
# DOF-transfer transforms: rewrite one DOF from the frequency record,
# then erase frequency with multipliers.
# ---------------------------------------------------------------------------

def _transfer_from_frequency(state: PureState, target_dof: Dof) -> PureState:
    """Overwrite ``target_dof`` of every photon from its own frequency.

    Photons A and D follow the direct rule (w1 -> first label), photons B
    and C the opposite one, then frequency multipliers push every path to
    w2. Collapses to a single pure state for any input whose frequencies
    are pairwise anti-correlated per ket.
    """
    _require_photons(state, ALL_PHOTONS)
    ens = _one(state)
    for photon, rule in (
        (Photon.A, _SAME),
        (Photon.B, _OPPOSITE),
        (Photon.C, _OPPOSITE),
        (Photon.D, _SAME),
    ):
        ens = map_branches(
            ens,
            lambda s, p=photon, r=rule: overwrite_dof_from(s, (p, target_dof), (p, Dof.FREQ), r),
        )
    for photon in Photon:
        ens = map_branches(
            ens, lambda s, p=photon: _one(relabel_dof(s, p, Dof.FREQ, FREQUENCY_DOUBLE))
        )
    if len(ens) != 1:
        raise PreconditionError("transfer did not collapse to a single pure state")
    return ens.branches[0].state


def pol_freq_transform(state: PureState) -> PureState:
    """Rewrite all four polarizations from the frequency record, erase frequency."""
    return _transfer_from_frequency(state, Dof.POL)


def spatial_freq_transform(state: PureState) -> PureState:
    """Rewrite all four spatial paths from the frequency record, erase frequency."""
    return _transfer_from_frequency(state, Dof.SPATIAL)


# ---------------------------------------------------------------------------
# Pair eraser: diagonal-basis readout of one pair plus feed-forward.
# ---------------------------------------------------------------------------

def _sign_char(sign: int) -> str:
    return "+" if sign > 0 else "-"


def _measure_and_reset(state: PureState, sub: Subsystem) -> list[tuple[int, float, PureState]]:
    """Diagonal-basis readout of one subsystem, then rotate it back to value 0.

    Fused form of measure_diagonal + hadamard + conditional flip: the
    composite outcome operator sends |v> to (1 or sign)/sqrt(2) |0>.
    """
    b = bit_position(sub[0], sub[1])
    inv = 1.0 / math.sqrt(2.0)
    out = []
    for sign in (1, -1):
        acc: dict[int, complex] = {}
        for k, a in state.amplitudes.items():
            base = k & ~(1 << b)
            coeff = a * inv if (k >> b) & 1 == 0 else a * (sign * inv)
            acc[base] = acc.get(base, 0j) + coeff
        prob = math.fsum(x.real * x.real + x.imag * x.imag for x in acc.values())
        if prob < 1e-28:
            continue
        scale = 1.0 / math.sqrt(prob)
        post = _normalized({k: a * scale for k, a in acc.items()}, state.photons)
        out.append((sign, prob, post))
    return out


def _pair_is_reset(state: PureState, pair: Sequence[Photon]) -> bool:
    return all(
        ket_value(k, p, d) == 0
        for k in state.amplitudes
        for p in pair
        for d in (Dof.POL, Dof.SPATIAL)
    )


def _pair_config_constant(state: PureState, pair: Sequence[Photon]) -> bool:
    configs = {
        tuple(ket_value(k, p, d) for p in pair for d in (Dof.POL, Dof.SPATIAL))
        for k in state.amplitudes
    }
    return len(configs) == 1


def _check_erasable(state: PureState, pair: Sequence[Photon]) -> None:
    kept = sorted(state.photons - set(pair))
    for k in state.amplitudes:
        pols = {ket_value(k, p, Dof.POL) for p in state.photons}
        if len(pols) != 1:
            raise PreconditionError("polarizations are not aligned across all four photons")
        if len({ket_value(k, p, Dof.SPATIAL) for p in kept}) != 1:
            raise PreconditionError("kept pair's spatial paths are not aligned per ket")
        if len({ket_value(k, p, Dof.SPATIAL) for p in pair}) != 1:
            raise PreconditionError("measured pair's spatial paths are not aligned per ket")
    # The polarization and spatial sectors must factor for the uniform
    # outcome statistics to hold; verify rank one of the joint table.
    table: dict[tuple[int, ...], dict[tuple[int, ...], complex]] = {}
    for k, a in state.amplitudes.items():
        pol_cfg = tuple(ket_value(k, p, Dof.POL) for p in sorted(state.photons))
        spa_cfg = tuple(ket_value(k, p, Dof.SPATIAL) for p in sorted(state.photons))
        table.setdefault(pol_cfg, {})[spa_cfg] = a
    rows = list(table.values())
    ref = rows[0]
    ref_norm = math.sqrt(math.fsum(abs(a) ** 2 for a in ref.values()))
    for row in rows[1:]:
        coeff = sum(ref[c].conjugate() * row.get(c, 0j) for c in ref) / ref_norm**2
        resid = math.fsum(
            abs(row.get(c, 0j) - coeff * ref.get(c, 0j)) ** 2 for c in set(row) | set(ref)
        )
        if math.sqrt(resid) > 1e-9:
            raise PreconditionError("polarization and spatial sectors do not factor")


def erase_pair(state: PureState, pair: Sequence[Photon] = (Photon.C, Photon.D)) -> list[GadgetOutcome]:
    """Disentangle one pair from the rest by diagonal-basis readout.

    Polarization and spatial path of both pair photons are measured in
    their balanced bases and re-prepared to (H, first path). Sign products
    prescribe phase corrections on the kept pair's first photon; outcome
    probabilities are uniform for a well-formed input.
    """
    pair = tuple(Photon(p) for p in pair)
    _require_photons(state, ALL_PHOTONS)
    if len(pair) != 2 or pair[0] == pair[1]:
        raise ShapeError("erase_pair needs two distinct photons")
    correction_target = min(state.photons - set(pair))

    if _pair_config_constant(state, pair):
        reset = state
        if not _pair_is_reset(state, pair):
            for p in pair:
                for d in (Dof.POL, Dof.SPATIAL):
                    reset = relabel_dof(reset, p, d, {0: 0, 1: 0})
        return [GadgetOutcome("product", 1.0, reset.canonical_phase())]

    _check_erasable(state, pair)
    subs = (
        (pair[0], Dof.POL),
        (pair[1], Dof.POL),
        (pair[0], Dof.SPATIAL),
        (pair[1], Dof.SPATIAL),
    )
    leaves: list[tuple[tuple[int, ...], float, PureState]] = [((), 1.0, state)]
    for sub in subs:
        nxt = []
        for signs, prob, st in leaves:
            for sign, p, post in _measure_and_reset(st, sub):
                nxt.append((signs + (sign,), prob * p, post))
        leaves = nxt

    outcomes = []
    for signs, prob, st in leaves:
        corrections: list[Correction] = []
        if signs[0] * signs[1] < 0:
            corrections.append((correction_target, Dof.POL, "phase_z"))
        if signs[2] * signs[3] < 0:
            corrections.append((correction_target, Dof.SPATIAL, "phase_z"))
        label = (
            f"pol{_sign_char(signs[0])}{_sign_char(signs[1])}"
            f"|spat{_sign_char(signs[2])}{_sign_char(signs[3])}"
        )
        outcomes.append(GadgetOutcome(label, prob, st, tuple(corrections)))
    return outcomes


# ---------------------------------------------------------------------------
# Diagonalizer / correlator: put the kept pair's polarization into |+>,
# and copy the measured pair's spatial path onto its polarization.
# ---------------------------------------------------------------------------

_PLUS = (1.0, 1.0)


def diagonalize_and_correlate(state: PureState) -> PureState:
    """Replace A,B polarization by |+> and key C,D polarization off their paths."""
    _require_photons(state, ALL_PHOTONS)
    ens = _one(state)
    for photon in (Photon.A, Photon.B):
        ens = map_branches(ens, lambda s, p=photon: prepare_dof(s, (p, Dof.POL), _PLUS))
    for photon in (Photon.C, Photon.D):
        ens = map_branches(
            ens,
            lambda s, p=photon: overwrite_dof_from(s, (p, Dof.POL), (p, Dof.SPATIAL), _SAME),
        )
    if len(ens) != 1:
        raise PreconditionError("diagonalization did not collapse to a single pure state")
    return ens.branches[0].state


# ---------------------------------------------------------------------------
# Two-sided parity check with feed-forward bit flip.
# ---------------------------------------------------------------------------

def default_qnd2_couplings() -> tuple[CouplingTable, CouplingTable]:
    """Coupling layouts for the two-sided polarization/spatial parity check.

    On each side the upper beam collects a shift when the local pair photon
    is H or the partner pair photon sits on its second path; the lower beam
    collects the complementary cases.
    """
    def side(name: str, pol_photon: Photon, path_photon: Photon) -> CouplingTable:
        up, down = f"qnd2.{name}.up", f"qnd2.{name}.down"
        rules = (
            KerrRule(up, pol_photon, Dof.POL, 0, 1),
            KerrRule(up, path_photon, Dof.SPATIAL, 1, 1),
            KerrRule(down, pol_photon, Dof.POL, 1, 1),
            KerrRule(down, path_photon, Dof.SPATIAL, 0, 1),
        )
        return CouplingTable(up, down, rules, success_class=0)

    return side("alice", Photon.A, Photon.C), side("bob", Photon.B, Photon.D)


def _check_qnd2_input(state: PureState) -> None:
    for k in state.amplitudes:
        if ket_value(k, Photon.C, Dof.POL) != ket_value(k, Photon.C, Dof.SPATIAL):
            raise PreconditionError("photon C polarization is not keyed to its path")
        if ket_value(k, Photon.D, Dof.POL) != ket_value(k, Photon.D, Dof.SPATIAL):
            raise PreconditionError("photon D polarization is not keyed to its path")
        if ket_value(k, Photon.A, Dof.SPATIAL) != ket_value(k, Photon.B, Dof.SPATIAL):
            raise PreconditionError("kept pair's spatial paths are not aligned per ket")


def qnd2(
    state: PureState,
    couplings: tuple[CouplingTable, CouplingTable] | None = None,
) -> list[GadgetOutcome]:
    """Two-sided parity check followed by the measured pair's reset.

    Returns the four (class_alice, class_bob) outcomes. The reset of
    photons C and D to (H, first path) happens inside the gadget with its
    sign feed-forward already applied; the bit flip owed when the two
    classes differ is prescribed on the outcome, not applied.
    """
    _require_photons(state, ALL_PHOTONS)
    _check_qnd2_input(state)
    alice, bob = couplings if couplings is not None else default_qnd2_couplings()
    tagged = tag_table(tag_table(state, alice), bob)

    outcomes = []
    for a_branch in homodyne_classify(tagged, alice.probe_up, alice.probe_down):
        for b_branch in homodyne_classify(a_branch.remaining, bob.probe_up, bob.probe_down):
            prob = a_branch.probability * b_branch.probability
            reset = _reset_measured_pair(b_branch.state)
            corrections: tuple[Correction, ...] = ()
            if a_branch.outcome.magnitude != b_branch.outcome.magnitude:
                corrections = ((Photon.A, Dof.POL, "flip"),)
            label = f"{a_branch.outcome.magnitude},{b_branch.outcome.magnitude}"
            outcomes.append(GadgetOutcome(label, prob, reset, corrections))
    outcomes.sort(key=lambda o: o.label)
    return outcomes


def _reset_measured_pair(state: PureState) -> PureState:
    """Readout-and-rotate C and D back to (H, first path).

    Every diagonal-basis sign lands on the kept pair's polarization phase,
    so each minus outcome is immediately compensated there; the surviving
    branches are identical and merge to one.
    """
    branches = [Branch(1.0, state)]
    for sub in (
        (Photon.C, Dof.POL),
        (Photon.D, Dof.POL),
        (Photon.C, Dof.SPATIAL),
        (Photon.D, Dof.SPATIAL),
    ):
        nxt = []
        for br in branches:
            for sign, prob, post in _measure_and_reset(br.state, sub):
                if sign < 0:
                    post = apply_dof_unitary(post, Photon.A, Dof.POL, "phase_z")
                nxt.append(Branch(br.weight * prob, post))
        branches = nxt
    # The compensated branches agree up to a leftover global sign, which is
    # not physical; align phases so they coalesce.
    merged = merge_branches(
        [Branch(br.weight, br.state.canonical_phase()) for br in branches]
    )
    if len(merged) != 1:
        raise PreconditionError("pair reset did not collapse to a single pure state")
    return merged[0].state.canonical_phase()
