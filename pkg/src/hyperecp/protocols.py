"""End-to-end protocol drivers.

Scheme 1 concentrates polarization and spatial entanglement by spending
partial frequency entanglement: a spatial/frequency parity check selects
the anti-correlated sector, the frequency record is copied onto
polarization, and the helper pair is erased. Scheme 2 spends maximal
frequency entanglement to purify both polarization and spatial mode
deterministically via a two-sided parity check with feed-forward.

Both schemes run over the full catalogue of channel-error cases: four
polarization forms per pair (and four spatial forms per pair for
scheme 2), mixed with classical weights.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ConfigError, NormalizationError
from .gadgets import (
    Correction,
    apply_corrections,
    diagonalize_and_correlate,
    erase_pair,
    pol_freq_transform,
    qnd1,
    qnd2,
    spatial_freq_transform,
)
from .hyperstate import (
    Dof,
    Photon,
    PureState,
    extract_photons,
    fidelity,
    ket_with,
    superpose,
)
from .optics import CouplingTable

INV_SQRT2 = 1.0 / math.sqrt(2.0)

_PAIR_CONSTRAINTS = (
    ("alpha", "beta"),
    ("gamma", "delta"),
    ("epsilon", "eta"),
)


@dataclass(frozen=True)
class SchemeParams:
    """Channel amplitudes and mixture weights.

    The three amplitude pairs each satisfy |x|^2 + |y|^2 = 1. The second
    pair may carry its own polarization (and, for scheme 2, spatial)
    amplitudes via the ``*_cd`` overrides; unset overrides default to the
    shared values.
    """

    alpha: complex = INV_SQRT2
    beta: complex = INV_SQRT2
    gamma: complex = INV_SQRT2
    delta: complex = INV_SQRT2
    epsilon: complex = INV_SQRT2
    eta: complex = INV_SQRT2
    pol_weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    spatial_weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    alpha_cd: complex | None = None
    beta_cd: complex | None = None
    gamma_cd: complex | None = None
    delta_cd: complex | None = None

    def __post_init__(self) -> None:
        for x_name, y_name in _PAIR_CONSTRAINTS:
            x, y = getattr(self, x_name), getattr(self, y_name)
            total = abs(x) ** 2 + abs(y) ** 2
            if abs(total - 1.0) > 1e-12:
                raise NormalizationError(
                    f"|{x_name}|^2+|{y_name}|^2 = {total!r}, expected 1"
                )
        cd = (self.alpha_cd, self.beta_cd)
        if (cd[0] is None) != (cd[1] is None):
            raise NormalizationError("alpha_cd and beta_cd must be overridden together")
        if cd[0] is not None:
            total = abs(cd[0]) ** 2 + abs(cd[1]) ** 2
            if abs(total - 1.0) > 1e-12:
                raise NormalizationError(f"|alpha_cd|^2+|beta_cd|^2 = {total!r}, expected 1")
        sd = (self.gamma_cd, self.delta_cd)
        if (sd[0] is None) != (sd[1] is None):
            raise NormalizationError("gamma_cd and delta_cd must be overridden together")
        if sd[0] is not None:
            total = abs(sd[0]) ** 2 + abs(sd[1]) ** 2
            if abs(total - 1.0) > 1e-12:
                raise NormalizationError(f"|gamma_cd|^2+|delta_cd|^2 = {total!r}, expected 1")
        for name, weights in (("pol_weights", self.pol_weights), ("spatial_weights", self.spatial_weights)):
            if len(weights) != 4 or any(w < 0 for w in weights):
                raise NormalizationError(f"{name} must be four nonnegative probabilities")
            if abs(math.fsum(weights) - 1.0) > 1e-12:
                raise NormalizationError(f"{name} must sum to 1")

    @property
    def pol_cd(self) -> tuple[complex, complex]:
        if self.alpha_cd is None:
            return self.alpha, self.beta
        return self.alpha_cd, self.beta_cd

    @property
    def spatial_cd(self) -> tuple[complex, complex]:
        if self.gamma_cd is None:
            return self.gamma, self.delta
        return self.gamma_cd, self.delta_cd

    @classmethod
    def maximal(cls) -> "SchemeParams":
        return cls()


@dataclass(frozen=True)
class CasePair:
    """Channel-error case indices for the two pairs.

    Polarization indices select among the four Bell-like forms (two bit
    arrangements times two signs); spatial indices do the same for paths
    and are carried only by scheme-2 cases.
    """

    pol_ab: int
    pol_cd: int
    spatial_ab: int | None = None
    spatial_cd: int | None = None

    def __post_init__(self) -> None:
        for name in ("pol_ab", "pol_cd", "spatial_ab", "spatial_cd"):
            v = getattr(self, name)
            if v is not None and v not in (1, 2, 3, 4):
                raise ValueError(f"{name} must be in 1..4, got {v}")
        if (self.spatial_ab is None) != (self.spatial_cd is None):
            raise ValueError("spatial case indices must be given for both pairs or neither")

    @property
    def has_spatial(self) -> bool:
        return self.spatial_ab is not None

    def label(self) -> str:
        if self.has_spatial:
            return f"p{self.pol_ab}s{self.spatial_ab}-p{self.pol_cd}s{self.spatial_cd}"
        return f"p{self.pol_ab}-p{self.pol_cd}"


def scheme1_cases() -> list[CasePair]:
    return [CasePair(i, j) for i in range(1, 5) for j in range(1, 5)]


def scheme2_cases() -> list[CasePair]:
    return [
        CasePair(i, j, k, l)
        for i in range(1, 5)
        for k in range(1, 5)
        for j in range(1, 5)
        for l in range(1, 5)
    ]


def _case_terms(index: int, x: complex, y: complex) -> list[tuple[complex, tuple[int, int]]]:
    """Two-qubit Bell-like form ``index``: values and sign on the y term."""
    if index == 1:
        return [(x, (0, 0)), (y, (1, 1))]
    if index == 2:
        return [(x, (0, 1)), (y, (1, 0))]
    if index == 3:
        return [(x, (0, 0)), (-y, (1, 1))]
    if index == 4:
        return [(x, (0, 1)), (-y, (1, 0))]
    raise ValueError(f"case index must be in 1..4, got {index}")


Factor = list[tuple[complex, tuple[tuple[Photon, Dof, int], ...]]]


def _pair_factor(
    dof: Dof,
    first: Photon,
    second: Photon,
    terms: Iterable[tuple[complex, tuple[int, int]]],
) -> Factor:
    return [
        (amp, ((first, dof, v1), (second, dof, v2)))
        for amp, (v1, v2) in terms
    ]


def _product_state(factors: Sequence[Factor]) -> PureState:
    partial: dict[int, complex] = {0: 1.0 + 0j}
    for factor in factors:
        nxt: dict[int, complex] = {}
        for ket, amp in partial.items():
            for famp, assignments in factor:
                nk = ket
                for photon, dof, value in assignments:
                    nk = ket_with(nk, photon, dof, value)
                nxt[nk] = nxt.get(nk, 0j) + amp * famp
        partial = nxt
    return superpose(list((a, k) for k, a in partial.items()))


def build_initial_scheme1(params: SchemeParams, case: CasePair) -> PureState:
    """Four-photon input for scheme 1.

    Each pair carries its polarization error case, the shared partially
    entangled spatial form and the shared anti-correlated frequency form.
    """
    if case.has_spatial:
        raise ValueError("scheme-1 cases carry no spatial index")
    a2, b2 = params.pol_cd
    freq = [(params.epsilon, (0, 1)), (params.eta, (1, 0))]
    spatial = [(params.gamma, (0, 0)), (params.delta, (1, 1))]
    factors = [
        _pair_factor(Dof.POL, Photon.A, Photon.B, _case_terms(case.pol_ab, params.alpha, params.beta)),
        _pair_factor(Dof.SPATIAL, Photon.A, Photon.B, spatial),
        _pair_factor(Dof.FREQ, Photon.A, Photon.B, freq),
        _pair_factor(Dof.POL, Photon.C, Photon.D, _case_terms(case.pol_cd, a2, b2)),
        _pair_factor(Dof.SPATIAL, Photon.C, Photon.D, spatial),
        _pair_factor(Dof.FREQ, Photon.C, Photon.D, freq),
    ]
    return _product_state(factors)


def build_initial_scheme2(params: SchemeParams, case: CasePair) -> PureState:
    """Four-photon input for scheme 2: per-pair polarization and spatial
    error cases plus maximal anti-correlated frequency entanglement."""
    if not case.has_spatial:
        raise ValueError("scheme-2 cases need spatial indices for both pairs")
    a2, b2 = params.pol_cd
    g2, d2 = params.spatial_cd
    freq = [(INV_SQRT2, (0, 1)), (INV_SQRT2, (1, 0))]
    factors = [
        _pair_factor(Dof.POL, Photon.A, Photon.B, _case_terms(case.pol_ab, params.alpha, params.beta)),
        _pair_factor(Dof.SPATIAL, Photon.A, Photon.B, _case_terms(case.spatial_ab, params.gamma, params.delta)),
        _pair_factor(Dof.FREQ, Photon.A, Photon.B, freq),
        _pair_factor(Dof.POL, Photon.C, Photon.D, _case_terms(case.pol_cd, a2, b2)),
        _pair_factor(Dof.SPATIAL, Photon.C, Photon.D, _case_terms(case.spatial_cd, g2, d2)),
        _pair_factor(Dof.FREQ, Photon.C, Photon.D, freq),
    ]
    return _product_state(factors)


@lru_cache(maxsize=1)
def target_ab() -> PureState:
    """Maximally hyperentangled target for the kept pair.

    Bell in polarization, Bell in spatial mode, both photons at the upper
    frequency the multipliers produce.
    """
    terms = []
    for pol in (0, 1):
        for spa in (0, 1):
            ket = 0
            for photon in (Photon.A, Photon.B):
                ket = ket_with(ket, photon, Dof.POL, pol)
                ket = ket_with(ket, photon, Dof.SPATIAL, spa)
                ket = ket_with(ket, photon, Dof.FREQ, 1)
            terms.append((0.5 + 0j, ket))
    return superpose(terms, photons=(Photon.A, Photon.B))


def success_law(params: SchemeParams) -> float:
    """Analytic scheme-1 success probability, 4|gamma delta epsilon eta|^2."""
    return 4.0 * abs(params.gamma * params.delta * params.epsilon * params.eta) ** 2


@dataclass(frozen=True)
class ProtocolBranch:
    """One successful outcome path with its corrected states."""

    labels: tuple[str, ...]
    probability: float
    ab_state: PureState
    full_state: PureState
    fidelity: float
    corrections: tuple[Correction, ...]


@dataclass(frozen=True)
class FailureBranch:
    label: str
    probability: float
    state: PureState | None


@dataclass(frozen=True)
class ProtocolOutcome:
    """Aggregate result of one protocol run (or a mixture of runs)."""

    scheme: int
    success_probability: float
    branches: tuple[ProtocolBranch, ...]
    failures: tuple[FailureBranch, ...] = ()
    case: CasePair | None = None

    def mean_fidelity(self) -> float:
        total = math.fsum(b.probability for b in self.branches)
        if total == 0.0:
            return 0.0
        return math.fsum(b.probability * b.fidelity for b in self.branches) / total

    def min_fidelity(self) -> float:
        if not self.branches:
            return 0.0
        return min(b.fidelity for b in self.branches)

    def corrections_count(self) -> int:
        return sum(len(b.corrections) for b in self.branches)


def scheme1_run(
    params: SchemeParams,
    case: CasePair,
    coupling: CouplingTable | None = None,
) -> ProtocolOutcome:
    """Run scheme 1 on one error case.

    Parity check on A and C; on success the frequency record is copied
    onto polarization, the helper pair is erased, and the prescribed phase
    corrections are applied. The failure branch is reported with its
    post-measurement state rather than dropped.
    """
    if params.gamma_cd is not None:
        raise ConfigError("scheme 1 assumes both pairs share spatial and frequency amplitudes")
    initial = build_initial_scheme1(params, case)
    check = qnd1(initial, coupling)
    success, fail = check["success"], check["fail"]

    branches: list[ProtocolBranch] = []
    if success.state is not None:
        transferred = pol_freq_transform(success.state)
        target = target_ab()
        for out in erase_pair(transferred):
            full = apply_corrections(out.state, out.corrections)
            ab = extract_photons(full, (Photon.A, Photon.B))
            branches.append(
                ProtocolBranch(
                    labels=("qnd1=success", f"erase={out.label}"),
                    probability=success.probability * out.probability,
                    ab_state=ab,
                    full_state=full,
                    fidelity=fidelity(ab, target),
                    corrections=out.corrections,
                )
            )
    failures = ()
    if fail.probability > 0.0:
        failures = (FailureBranch("qnd1=fail", fail.probability, fail.state),)
    return ProtocolOutcome(
        scheme=1,
        success_probability=success.probability,
        branches=tuple(branches),
        failures=failures,
        case=case,
    )


def scheme2_run(
    params: SchemeParams,
    case: CasePair,
    couplings: tuple[CouplingTable, CouplingTable] | None = None,
) -> ProtocolOutcome:
    """Run scheme 2 on one error case; all four parity outcomes are kept."""
    initial = build_initial_scheme2(params, case)
    transferred = spatial_freq_transform(initial)
    correlated = diagonalize_and_correlate(transferred)
    target = target_ab()
    branches = []
    for out in qnd2(correlated, couplings):
        full = apply_corrections(out.state, out.corrections)
        ab = extract_photons(full, (Photon.A, Photon.B))
        branches.append(
            ProtocolBranch(
                labels=(f"qnd2={out.label}",),
                probability=out.probability,
                ab_state=ab,
                full_state=full,
                fidelity=fidelity(ab, target),
                corrections=out.corrections,
            )
        )
    total = math.fsum(b.probability for b in branches)
    return ProtocolOutcome(
        scheme=2,
        success_probability=total,
        branches=tuple(branches),
        case=case,
    )


def scheme1_enumerate(
    params: SchemeParams, coupling: CouplingTable | None = None
) -> list[tuple[CasePair, ProtocolOutcome]]:
    """All 16 polarization case pairs."""
    return [(case, scheme1_run(params, case, coupling)) for case in scheme1_cases()]


def scheme2_enumerate(
    params: SchemeParams,
    couplings: tuple[CouplingTable, CouplingTable] | None = None,
) -> list[tuple[CasePair, ProtocolOutcome]]:
    """All 256 polarization/spatial case combinations."""
    return [(case, scheme2_run(params, case, couplings)) for case in scheme2_cases()]


def mixture_cases(params: SchemeParams, scheme: int) -> Iterator[tuple[CasePair, float]]:
    """Nonzero-weight cases of the classical mixture for one scheme."""
    f = params.pol_weights
    if scheme == 1:
        for i in range(4):
            for j in range(4):
                w = f[i] * f[j]
                if w > 0.0:
                    yield CasePair(i + 1, j + 1), w
    elif scheme == 2:
        g = params.spatial_weights
        for i in range(4):
            for k in range(4):
                for j in range(4):
                    for l in range(4):
                        w = f[i] * g[k] * f[j] * g[l]
                        if w > 0.0:
                            yield CasePair(i + 1, j + 1, k + 1, l + 1), w
    else:
        raise ValueError(f"scheme must be 1 or 2, got {scheme}")


def run_mixed(
    params: SchemeParams,
    scheme: int,
    coupling: CouplingTable | None = None,
    couplings2: tuple[CouplingTable, CouplingTable] | None = None,
) -> ProtocolOutcome:
    """Run a scheme over the full weighted case mixture and aggregate.

    Branch probabilities are scaled by the case weights; the success
    probability is the weighted mean over cases.
    """
    branches: list[ProtocolBranch] = []
    failures: list[FailureBranch] = []
    p_success = 0.0
    for case, weight in mixture_cases(params, scheme):
        if scheme == 1:
            outcome = scheme1_run(params, case, coupling)
        else:
            outcome = scheme2_run(params, case, couplings2)
        p_success += weight * outcome.success_probability
        prefix = f"case={case.label()}"
        for br in outcome.branches:
            branches.append(replace(br, labels=(prefix,) + br.labels, probability=weight * br.probability))
        for fl in outcome.failures:
            failures.append(FailureBranch(f"{prefix}|{fl.label}", weight * fl.probability, fl.state))
    return ProtocolOutcome(
        scheme=scheme,
        success_probability=p_success,
        branches=tuple(branches),
        failures=tuple(failures),
    )


def phase_shifted(params: SchemeParams, phase: float) -> SchemeParams:
    """Multiply the shared polarization pair by a global phase (for tests)."""
    factor = cmath.exp(1j * phase)
    return replace(params, alpha=params.alpha * factor, beta=params.beta * factor)


def _random_pair(rng: np.random.Generator, complex_phases: bool) -> tuple[complex, complex]:
    u = rng.uniform(0.02, 0.98)
    x, y = math.sqrt(u), math.sqrt(1.0 - u)
    if complex_phases:
        x *= cmath.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
        y *= cmath.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
    return complex(x), complex(y)


def random_params(
    rng: np.random.Generator,
    scheme: int = 1,
    complex_phases: bool = True,
    distinct_pairs: bool = True,
) -> SchemeParams:
    """Draw a nondegenerate parameter set from a seeded generator.

    Scheme-2 draws give the second pair its own polarization and spatial
    amplitudes when ``distinct_pairs`` is set; scheme-1 draws share the
    spatial and frequency amplitudes between pairs as that protocol
    requires.
    """
    alpha, beta = _random_pair(rng, complex_phases)
    gamma, delta = _random_pair(rng, complex_phases)
    kwargs: dict = {"alpha": alpha, "beta": beta, "gamma": gamma, "delta": delta}
    if scheme == 1:
        epsilon, eta = _random_pair(rng, complex_phases)
        kwargs.update(epsilon=epsilon, eta=eta)
        if distinct_pairs:
            a2, b2 = _random_pair(rng, complex_phases)
            kwargs.update(alpha_cd=a2, beta_cd=b2)
    else:
        if distinct_pairs:
            a2, b2 = _random_pair(rng, complex_phases)
            g2, d2 = _random_pair(rng, complex_phases)
            kwargs.update(alpha_cd=a2, beta_cd=b2, gamma_cd=g2, delta_cd=d2)
    return SchemeParams(**kwargs)
