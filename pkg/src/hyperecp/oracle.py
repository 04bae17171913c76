"""Independent dense verifier for the sparse pipeline.

Every channel and measurement is recomposed here as Kraus-style ket maps
acting on density matrices held over the populated-ket subspace, straight
from the gadgets' declarative contracts and never by calling the pipeline.
Comparisons report per-outcome probability deltas and trace distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import CompletenessError, ShapeError
from .gadgets import qnd1
from .hyperstate import (
    Branch,
    Dof,
    Ensemble,
    Photon,
    PureState,
    bit_position,
    ket_value,
    photon_mask,
)
from .protocols import (
    CasePair,
    SchemeParams,
    build_initial_scheme1,
    build_initial_scheme2,
    random_params,
    scheme1_cases,
    scheme1_run,
    scheme2_cases,
    scheme2_run,
)

TP_ATOL = 1e-10
PROB_FLOOR = 1e-15

KetMap = Callable[[int], list[tuple[complex, int]]]


@dataclass(frozen=True, eq=False)
class DenseState:
    """Density matrix restricted to the populated-ket subspace."""

    basis: tuple[int, ...]
    rho: np.ndarray
    photons: frozenset[Photon]

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)


def densify(source: Ensemble | PureState) -> DenseState:
    """Weighted sum of pure projectors over the union of populated kets."""
    if isinstance(source, PureState):
        source = Ensemble((Branch(1.0, source),))
    photon_sets = {b.state.photons for b in source.branches}
    if len(photon_sets) != 1:
        raise ShapeError("ensemble branches carry different photon sets")
    photons = photon_sets.pop()
    basis = tuple(sorted({k for b in source.branches for k in b.state.amplitudes}))
    pos = {k: i for i, k in enumerate(basis)}
    rho = np.zeros((len(basis), len(basis)), dtype=complex)
    for branch in source.branches:
        vec = np.zeros(len(basis), dtype=complex)
        for k, a in branch.state.amplitudes.items():
            vec[pos[k]] = a
        rho += branch.weight * np.outer(vec, vec.conj())
    return DenseState(basis, rho, photons)


@dataclass(frozen=True)
class DenseChannel:
    """Labeled Kraus-style ket maps; selective channels resolve outcomes."""

    ops: tuple[tuple[str, KetMap], ...]
    selective: bool = False


def _build_matrices(
    basis_in: Sequence[int], maps: Sequence[KetMap]
) -> tuple[tuple[int, ...], list[np.ndarray]]:
    images: list[list[list[tuple[complex, int]]]] = []
    out_kets: set[int] = set()
    for m in maps:
        cols = []
        for k in basis_in:
            img = m(k)
            cols.append(img)
            out_kets.update(j for _, j in img)
        images.append(cols)
    basis_out = tuple(sorted(out_kets))
    pos = {k: i for i, k in enumerate(basis_out)}
    mats = []
    for cols in images:
        mat = np.zeros((len(basis_out), len(basis_in)), dtype=complex)
        for col, img in enumerate(cols):
            for amp, j in img:
                mat[pos[j], col] += amp
        mats.append(mat)
    return basis_out, mats


def _check_complete(mats: Iterable[np.ndarray], dim: int) -> None:
    total = np.zeros((dim, dim), dtype=complex)
    for mat in mats:
        total += mat.conj().T @ mat
    if np.max(np.abs(total - np.eye(dim))) > TP_ATOL:
        raise CompletenessError("channel operators do not resolve the identity")


def apply_dense(
    state: DenseState, channel: DenseChannel
) -> DenseState | list[tuple[str, float, DenseState]]:
    """Apply a dense channel; selective channels return outcome partitions."""
    basis_out, mats = _build_matrices(state.basis, [m for _, m in channel.ops])
    _check_complete(mats, len(state.basis))
    if not channel.selective:
        rho = np.zeros((len(basis_out), len(basis_out)), dtype=complex)
        for mat in mats:
            rho += mat @ state.rho @ mat.conj().T
        return DenseState(basis_out, rho, state.photons)
    outcomes = []
    for (label, _), mat in zip(channel.ops, mats):
        rho = mat @ state.rho @ mat.conj().T
        prob = float(np.trace(rho).real)
        if prob < PROB_FLOOR:
            continue
        outcomes.append((label, prob, DenseState(basis_out, rho / prob, state.photons)))
    return outcomes


def _chain(state: DenseState, channels: Iterable[DenseChannel]) -> DenseState:
    for ch in channels:
        result = apply_dense(state, ch)
        if isinstance(result, list):
            raise ShapeError("selective channel inside a trace-preserving chain")
        state = result
    return state


# ---------------------------------------------------------------------------
# Ket-map constructors.
# ---------------------------------------------------------------------------

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

_DENSE_UNITARIES: dict[str, tuple[tuple[complex, complex], tuple[complex, complex]]] = {
    "identity": ((1, 0), (0, 1)),
    "flip": ((0, 1), (1, 0)),
    "hadamard": ((_INV_SQRT2, _INV_SQRT2), (_INV_SQRT2, -_INV_SQRT2)),
    "phase_z": ((1, 0), (0, -1)),
}


def unitary_map(photon: Photon, dof: Dof, name: str) -> KetMap:
    u = _DENSE_UNITARIES[name]
    b = bit_position(photon, dof)

    def fn(k: int) -> list[tuple[complex, int]]:
        v = (k >> b) & 1
        base = k & ~(1 << b)
        return [(u[out][v], base | (out << b)) for out in (0, 1) if u[out][v]]

    return fn


def unitary_channel(photon: Photon, dof: Dof, name: str) -> DenseChannel:
    return DenseChannel(((name, unitary_map(photon, dof, name)),))


def overwrite_channel(
    target: tuple[Photon, Dof], control: tuple[Photon, Dof], rule: Mapping[int, int]
) -> DenseChannel:
    tb = bit_position(*target)
    cb = bit_position(*control)

    def op(measured: int) -> KetMap:
        def fn(k: int) -> list[tuple[complex, int]]:
            if (k >> tb) & 1 != measured:
                return []
            value = rule[(k >> cb) & 1]
            return [(1.0 + 0j, (k & ~(1 << tb)) | (value << tb))]

        return fn

    return DenseChannel((("m0", op(0)), ("m1", op(1))))


def prepare_channel(target: tuple[Photon, Dof], amplitudes: tuple[complex, complex]) -> DenseChannel:
    tb = bit_position(*target)
    norm = math.sqrt(abs(amplitudes[0]) ** 2 + abs(amplitudes[1]) ** 2)
    c0, c1 = amplitudes[0] / norm, amplitudes[1] / norm

    def op(measured: int) -> KetMap:
        def fn(k: int) -> list[tuple[complex, int]]:
            if (k >> tb) & 1 != measured:
                return []
            base = k & ~(1 << tb)
            return [(c0, base), (c1, base | (1 << tb))]

        return fn

    return DenseChannel((("m0", op(0)), ("m1", op(1))))


def relabel_channel(photon: Photon, dof: Dof, mapping: Mapping[int, int]) -> DenseChannel:
    b = bit_position(photon, dof)

    def fn(k: int) -> list[tuple[complex, int]]:
        value = mapping[(k >> b) & 1]
        return [(1.0 + 0j, (k & ~(1 << b)) | (value << b))]

    return DenseChannel((("relabel", fn),))


def projector_channel(labeled: Sequence[tuple[str, Callable[[int], bool]]]) -> DenseChannel:
    def op(pred: Callable[[int], bool]) -> KetMap:
        def fn(k: int) -> list[tuple[complex, int]]:
            return [(1.0 + 0j, k)] if pred(k) else []

        return fn

    return DenseChannel(tuple((label, op(pred)) for label, pred in labeled), selective=True)


# ---------------------------------------------------------------------------
# Gadget recompositions from their contracts.
# ---------------------------------------------------------------------------

def qnd1_channel() -> DenseChannel:
    """Projector pair: both spatial paths and frequencies differ on A, C."""

    def success(k: int) -> bool:
        return (
            ket_value(k, Photon.A, Dof.SPATIAL) != ket_value(k, Photon.C, Dof.SPATIAL)
            and ket_value(k, Photon.A, Dof.FREQ) != ket_value(k, Photon.C, Dof.FREQ)
        )

    return projector_channel((("success", success), ("fail", lambda k: not success(k))))


_SAME = {0: 0, 1: 1}
_OPP = {0: 1, 1: 0}
_FM = {0: 1, 1: 1}


def _transfer_channels(target_dof: Dof) -> list[DenseChannel]:
    chans = [
        overwrite_channel((Photon.A, target_dof), (Photon.A, Dof.FREQ), _SAME),
        overwrite_channel((Photon.B, target_dof), (Photon.B, Dof.FREQ), _OPP),
        overwrite_channel((Photon.C, target_dof), (Photon.C, Dof.FREQ), _OPP),
        overwrite_channel((Photon.D, target_dof), (Photon.D, Dof.FREQ), _SAME),
    ]
    chans.extend(relabel_channel(p, Dof.FREQ, _FM) for p in Photon)
    return chans


def pol_freq_dense(state: DenseState) -> DenseState:
    return _chain(state, _transfer_channels(Dof.POL))


def spatial_freq_dense(state: DenseState) -> DenseState:
    return _chain(state, _transfer_channels(Dof.SPATIAL))


def diagonalize_dense(state: DenseState) -> DenseState:
    chans = [
        prepare_channel((Photon.A, Dof.POL), (1.0, 1.0)),
        prepare_channel((Photon.B, Dof.POL), (1.0, 1.0)),
        overwrite_channel((Photon.C, Dof.POL), (Photon.C, Dof.SPATIAL), _SAME),
        overwrite_channel((Photon.D, Dof.POL), (Photon.D, Dof.SPATIAL), _SAME),
    ]
    return _chain(state, chans)


_ERASE_SUBS = (
    (Photon.C, Dof.POL),
    (Photon.D, Dof.POL),
    (Photon.C, Dof.SPATIAL),
    (Photon.D, Dof.SPATIAL),
)


def _sign_char(sign: int) -> str:
    return "+" if sign > 0 else "-"


def _diag_reset_map(signs: Sequence[int], corrected: bool) -> KetMap:
    """Composite map: diagonal readout of the four C/D subsystems with the
    given signs, re-preparation to value 0, and (optionally) the sign
    feed-forward phase on the kept pair's polarization."""
    bits = [bit_position(p, d) for p, d in _ERASE_SUBS]
    a_pol = bit_position(Photon.A, Dof.POL)
    sign_product = 1
    for s in signs:
        sign_product *= s

    def fn(k: int) -> list[tuple[complex, int]]:
        coeff = complex(1.0)
        out = k
        for b, s in zip(bits, signs):
            v = (k >> b) & 1
            coeff *= _INV_SQRT2 if v == 0 else s * _INV_SQRT2
            out &= ~(1 << b)
        if corrected and sign_product < 0 and (out >> a_pol) & 1:
            coeff = -coeff
        return [(coeff, out)]

    return fn


def _sign_patterns() -> list[tuple[int, int, int, int]]:
    return [
        (s1, s2, s3, s4)
        for s1 in (1, -1)
        for s2 in (1, -1)
        for s3 in (1, -1)
        for s4 in (1, -1)
    ]


def erase_channel() -> DenseChannel:
    """Selective 16-outcome diagonal readout of the helper pair."""
    ops = []
    for signs in _sign_patterns():
        label = (
            f"pol{_sign_char(signs[0])}{_sign_char(signs[1])}"
            f"|spat{_sign_char(signs[2])}{_sign_char(signs[3])}"
        )
        ops.append((label, _diag_reset_map(signs, corrected=False)))
    return DenseChannel(tuple(ops), selective=True)


def erase_corrections(label: str) -> list[tuple[Photon, Dof, str]]:
    """Feed-forward owed for one eraser outcome label."""
    signs = [1 if c == "+" else -1 for c in label if c in "+-"]
    fixes = []
    if signs[0] * signs[1] < 0:
        fixes.append((Photon.A, Dof.POL, "phase_z"))
    if signs[2] * signs[3] < 0:
        fixes.append((Photon.A, Dof.SPATIAL, "phase_z"))
    return fixes


def qnd2_channel() -> DenseChannel:
    """Four (class_alice, class_bob) projectors from the coupling contract:
    each side's upper beam shifts on local-H or partner-second-path, the
    lower beam on the complementary cases."""

    def side_class(k: int, pol_photon: Photon, path_photon: Photon) -> int:
        up = (1 if ket_value(k, pol_photon, Dof.POL) == 0 else 0) + (
            1 if ket_value(k, path_photon, Dof.SPATIAL) == 1 else 0
        )
        return abs(2 * up - 2)

    def pred(ca: int, cb: int) -> Callable[[int], bool]:
        return lambda k: (
            side_class(k, Photon.A, Photon.C) == ca
            and side_class(k, Photon.B, Photon.D) == cb
        )

    labeled = [(f"{ca},{cb}", pred(ca, cb)) for ca in (0, 2) for cb in (0, 2)]
    return projector_channel(labeled)


def qnd2_reset_channel() -> DenseChannel:
    """Trace-preserving reset of the helper pair with signs compensated."""
    ops = tuple(
        (f"reset{i}", _diag_reset_map(signs, corrected=True))
        for i, signs in enumerate(_sign_patterns())
    )
    return DenseChannel(ops)


# ---------------------------------------------------------------------------
# Partial trace and comparison utilities.
# ---------------------------------------------------------------------------

def reduce_to_photons(state: DenseState, keep: Iterable[Photon]) -> DenseState:
    kept = frozenset(Photon(p) for p in keep)
    mask = photon_mask(kept)
    ab_basis = tuple(sorted({k & mask for k in state.basis}))
    pos = {k: i for i, k in enumerate(ab_basis)}
    rho = np.zeros((len(ab_basis), len(ab_basis)), dtype=complex)
    for i, ki in enumerate(state.basis):
        for j, kj in enumerate(state.basis):
            if (ki & ~mask) == (kj & ~mask):
                rho[pos[ki & mask], pos[kj & mask]] += state.rho[i, j]
    return DenseState(ab_basis, rho, kept)


def _embed(basis: Sequence[int], rho: np.ndarray, union: Sequence[int]) -> np.ndarray:
    pos = {k: i for i, k in enumerate(union)}
    out = np.zeros((len(union), len(union)), dtype=complex)
    idx = [pos[k] for k in basis]
    out[np.ix_(idx, idx)] = rho
    return out


def trace_distance(a: DenseState, b: DenseState) -> float:
    union = tuple(sorted(set(a.basis) | set(b.basis)))
    diff = _embed(a.basis, a.rho, union) - _embed(b.basis, b.rho, union)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def dense_from_pure(state: PureState) -> DenseState:
    return densify(state)


PipelineOutcome = tuple[str, float, PureState | None]
DenseOutcome = tuple[str, float, DenseState | None]


@dataclass(frozen=True)
class CompareRow:
    name: str
    label: str
    probability_delta: float
    trace_distance: float
    ok: bool


@dataclass(frozen=True)
class CompareReport:
    rows: tuple[CompareRow, ...]
    structural_errors: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.structural_errors and all(r.ok for r in self.rows)

    def max_probability_delta(self) -> float:
        return max((r.probability_delta for r in self.rows), default=0.0)

    def max_trace_distance(self) -> float:
        return max((r.trace_distance for r in self.rows), default=0.0)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "structural_errors": list(self.structural_errors),
            "rows": [
                {
                    "name": r.name,
                    "label": r.label,
                    "probability_delta": r.probability_delta,
                    "trace_distance": r.trace_distance,
                    "ok": r.ok,
                }
                for r in self.rows
            ],
        }


def compare(
    pipeline: Sequence[PipelineOutcome],
    dense: Sequence[DenseOutcome],
    tol: float = 1e-9,
    name: str = "",
) -> CompareReport:
    """Match outcomes by label; report probability deltas and trace distances."""
    pmap = {label: (p, s) for label, p, s in pipeline}
    dmap = {label: (p, s) for label, p, s in dense}
    structural = []
    p_only = set(pmap) - set(dmap)
    d_only = set(dmap) - set(pmap)
    for label in sorted(p_only):
        if pmap[label][0] > tol:
            structural.append(f"{name}: outcome {label!r} missing from dense route")
    for label in sorted(d_only):
        if dmap[label][0] > tol:
            structural.append(f"{name}: outcome {label!r} missing from pipeline route")
    rows = []
    for label in sorted(set(pmap) & set(dmap)):
        p_prob, p_state = pmap[label]
        d_prob, d_state = dmap[label]
        delta = abs(p_prob - d_prob)
        if p_state is None or d_state is None:
            dist = 0.0 if (p_prob <= tol and d_prob <= tol) else math.inf
        else:
            dist = trace_distance(densify(p_state), d_state)
        rows.append(CompareRow(name, label, delta, dist, delta <= tol and dist <= tol))
    return CompareReport(tuple(rows), tuple(structural))


# ---------------------------------------------------------------------------
# Full-scheme dense compositions.
# ---------------------------------------------------------------------------

def oracle_scheme1(params: SchemeParams, case: CasePair) -> dict:
    """Dense route through scheme 1 for one case."""
    initial = densify(build_initial_scheme1(params, case))
    parity = apply_dense(initial, qnd1_channel())
    assert isinstance(parity, list)
    outcome_map = {label: (prob, st) for label, prob, st in parity}
    p_success, success_state = outcome_map.get("success", (0.0, None))
    p_fail, fail_state = outcome_map.get("fail", (0.0, None))

    branches: list[DenseOutcome] = []
    if success_state is not None:
        transferred = pol_freq_dense(success_state)
        for label, prob, st in apply_dense(transferred, erase_channel()):
            corrected = st
            for photon, dof, unitary in erase_corrections(label):
                chan_result = apply_dense(corrected, unitary_channel(photon, dof, unitary))
                assert isinstance(chan_result, DenseState)
                corrected = chan_result
            branches.append(
                (f"erase={label}", p_success * prob, reduce_to_photons(corrected, (Photon.A, Photon.B)))
            )
    return {
        "success_probability": p_success,
        "qnd1": [("success", p_success, success_state), ("fail", p_fail, fail_state)],
        "branches": branches,
    }


def oracle_scheme2(params: SchemeParams, case: CasePair) -> dict:
    """Dense route through scheme 2 for one case."""
    initial = densify(build_initial_scheme2(params, case))
    transferred = spatial_freq_dense(initial)
    correlated = diagonalize_dense(transferred)
    parity = apply_dense(correlated, qnd2_channel())
    assert isinstance(parity, list)
    reset = qnd2_reset_channel()
    branches: list[DenseOutcome] = []
    post_reset: list[DenseOutcome] = []
    for label, prob, st in parity:
        after = apply_dense(st, reset)
        assert isinstance(after, DenseState)
        post_reset.append((f"qnd2={label}", prob, after))
        ca, cb = label.split(",")
        corrected = after
        if ca != cb:
            flip = apply_dense(after, unitary_channel(Photon.A, Dof.POL, "flip"))
            assert isinstance(flip, DenseState)
            corrected = flip
        branches.append(
            (f"qnd2={label}", prob, reduce_to_photons(corrected, (Photon.A, Photon.B)))
        )
    return {
        "correlated": correlated,
        "post_reset": post_reset,
        "branches": branches,
    }


# ---------------------------------------------------------------------------
# Whole-artifact verification.
# ---------------------------------------------------------------------------

def _case_checks_scheme1(params: SchemeParams, case: CasePair, tol: float) -> list[CompareReport]:
    dense = oracle_scheme1(params, case)
    outcome = scheme1_run(params, case)

    check = []
    parity = qnd1(build_initial_scheme1(params, case))
    pipeline_parity = [
        ("success", parity["success"].probability, parity["success"].state),
        ("fail", parity["fail"].probability, parity["fail"].state),
    ]
    check.append(compare(pipeline_parity, dense["qnd1"], tol, name=f"s1/{case.label()}/qnd1"))

    pipeline_branches = [
        (br.labels[-1], br.probability, br.ab_state) for br in outcome.branches
    ]
    check.append(
        compare(pipeline_branches, dense["branches"], tol, name=f"s1/{case.label()}/branches")
    )
    return check


def _case_checks_scheme2(params: SchemeParams, case: CasePair, tol: float) -> list[CompareReport]:
    dense = oracle_scheme2(params, case)
    outcome = scheme2_run(params, case)
    pipeline_branches = [
        (br.labels[0], br.probability, br.ab_state) for br in outcome.branches
    ]
    return [compare(pipeline_branches, dense["branches"], tol, name=f"s2/{case.label()}/branches")]


def verify_all(
    seed: int = 20260809,
    tol: float = 1e-9,
    schemes: Sequence[int] = (1, 2),
    scheme2_cases_limit: int | None = None,
) -> dict:
    """Compare pipeline and dense routes over every enumerated case.

    Returns a JSON-ready report with one entry per comparison.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    checks: list[dict] = []

    def record(report: CompareReport) -> None:
        checks.append(
            {
                "name": report.rows[0].name if report.rows else "empty",
                "passed": report.passed,
                "max_probability_delta": report.max_probability_delta(),
                "max_trace_distance": report.max_trace_distance(),
                "structural_errors": list(report.structural_errors),
            }
        )

    if 1 in schemes:
        params = random_params(rng, scheme=1)
        for case in scheme1_cases():
            for report in _case_checks_scheme1(params, case, tol):
                record(report)
    if 2 in schemes:
        params = random_params(rng, scheme=2)
        cases = scheme2_cases()
        if scheme2_cases_limit is not None:
            cases = cases[:scheme2_cases_limit]
        for case in cases:
            for report in _case_checks_scheme2(params, case, tol):
                record(report)

    return {
        "tolerance": tol,
        "seed": seed,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }
