import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperecp.errors import (
    AliasingError,
    CoherenceLossError,
    ProtocolOrderError,
    ShapeError,
)
from hyperecp.hyperstate import Dof, Photon, PureState, fidelity, ket_with, superpose
from hyperecp.optics import (
    FREQUENCY_DOUBLE,
    CouplingTable,
    KerrRule,
    ProbeBeam,
    apply_pol_unitary,
    homodyne_classify,
    kerr_tag,
    measure_diagonal,
    overwrite_dof_from,
    prepare_dof,
    relabel_dof,
    tag_table,
)

A, B = Photon.A, Photon.B
AB = (A, B)


def ket(pol_a=0, pol_b=0, spa_a=0, spa_b=0, frq_a=0, frq_b=0) -> int:
    k = 0
    for photon, pol, spa, frq in ((A, pol_a, spa_a, frq_a), (B, pol_b, spa_b, frq_b)):
        k = ket_with(k, photon, Dof.POL, pol)
        k = ket_with(k, photon, Dof.SPATIAL, spa)
        k = ket_with(k, photon, Dof.FREQ, frq)
    return k


def single(index: int) -> PureState:
    return superpose([(1, index)], AB)


class TestUnitaries:
    def test_flip_swaps_polarization(self):
        out = apply_pol_unitary(single(ket(0, 0)), A, "flip")
        assert out.amplitude(ket(1, 0)) == pytest.approx(1.0)

    def test_hadamard_makes_balanced_superposition(self):
        out = apply_pol_unitary(single(ket(0, 0)), A, "hadamard")
        inv = 1 / math.sqrt(2)
        assert out.amplitude(ket(0, 0)) == pytest.approx(inv)
        assert out.amplitude(ket(1, 0)) == pytest.approx(inv)

    def test_flip_is_involutive(self):
        s = superpose([(0.6, ket(0, 1)), (0.8j, ket(1, 0))], AB)
        back = apply_pol_unitary(apply_pol_unitary(s, A, "flip"), A, "flip")
        assert back.allclose(s)

    def test_unknown_unitary(self):
        with pytest.raises(ValueError):
            apply_pol_unitary(single(ket()), A, "swap")

    def test_absent_photon(self):
        with pytest.raises(ShapeError):
            apply_pol_unitary(single(ket()), Photon.C, "flip")

    def test_phase_z_signs_v_component(self):
        s = superpose([(1, ket(0, 0)), (1, ket(1, 1))], AB)
        out = apply_pol_unitary(s, A, "phase_z")
        assert out.amplitude(ket(1, 1)) == pytest.approx(-1 / math.sqrt(2))


class TestRelabel:
    def test_frequency_multiplier_on_classical_input(self):
        s = superpose([(0.6, ket(frq_a=0)), (0.8, ket(pol_a=1, frq_a=0))], AB)
        out = relabel_dof(s, A, Dof.FREQ, FREQUENCY_DOUBLE)
        assert out.amplitude(ket(frq_a=1)) == pytest.approx(0.6, abs=1e-14)
        assert out.amplitude(ket(pol_a=1, frq_a=1)) == pytest.approx(0.8, abs=1e-14)

    def test_swap_twice_is_identity(self):
        s = superpose([(0.6, ket(frq_a=0)), (0.8, ket(frq_a=1))], AB)
        swap = {0: 1, 1: 0}
        assert relabel_dof(relabel_dof(s, A, Dof.FREQ, swap), A, Dof.FREQ, swap).allclose(s)

    def test_multiplier_on_superposed_frequency_loses_coherence(self):
        s = superpose([(0.6, ket(frq_a=0)), (0.8, ket(frq_a=1))], AB)
        with pytest.raises(CoherenceLossError):
            relabel_dof(s, A, Dof.FREQ, FREQUENCY_DOUBLE)

    def test_label_mapping_accepted(self):
        s = single(ket(frq_a=0))
        out = relabel_dof(s, A, Dof.FREQ, {"w1": "w2", "w2": "w2"})
        assert out.amplitude(ket(frq_a=1)) == pytest.approx(1.0)


class TestOverwrite:
    def test_rekeys_target_to_control(self):
        # A polarization overwritten from A frequency on (|w1>+|w2>)/sqrt(2):
        # prior polarization is erased, new one tracks the frequency.
        s = superpose([(1, ket(pol_a=1, frq_a=0)), (1, ket(pol_a=1, frq_a=1))], AB)
        ens = overwrite_dof_from(s, (A, Dof.POL), (A, Dof.FREQ), {0: 0, 1: 1})
        assert len(ens) == 1
        out = ens.branches[0].state
        inv = 1 / math.sqrt(2)
        assert out.amplitude(ket(pol_a=0, frq_a=0)) == pytest.approx(inv)
        assert out.amplitude(ket(pol_a=1, frq_a=1)) == pytest.approx(inv)

    def test_fixed_point_single_branch(self):
        s = superpose([(1, ket(pol_a=0, frq_a=0)), (1, ket(pol_a=1, frq_a=1))], AB)
        ens = overwrite_dof_from(s, (A, Dof.POL), (A, Dof.FREQ), {0: 0, 1: 1})
        assert len(ens) == 1
        assert ens.branches[0].weight == pytest.approx(1.0)
        assert ens.branches[0].state.allclose(s)

    def test_aliasing_rejected(self):
        with pytest.raises(AliasingError):
            overwrite_dof_from(single(ket()), (A, Dof.POL), (A, Dof.POL), {0: 0, 1: 1})

    def test_trace_preserving(self):
        s = superpose([(0.48, ket(0, 0)), (0.36, ket(1, 0, frq_a=1)), (0.8, ket(1, 1))], AB)
        ens = overwrite_dof_from(s, (A, Dof.POL), (B, Dof.POL), {0: 1, 1: 0})
        assert math.fsum(b.weight for b in ens) == pytest.approx(1.0, abs=1e-12)

    def test_idempotent_on_output(self):
        s = superpose([(0.6, ket(1, 0, frq_a=0)), (0.8, ket(0, 1, frq_a=1))], AB)
        rule = {0: 0, 1: 1}
        once = overwrite_dof_from(s, (A, Dof.POL), (A, Dof.FREQ), rule)
        for branch in once:
            again = overwrite_dof_from(branch.state, (A, Dof.POL), (A, Dof.FREQ), rule)
            assert len(again) == 1
            assert again.branches[0].state.allclose(branch.state)


class TestPrepare:
    def test_prepares_balanced_superposition(self):
        s = superpose([(0.6, ket(pol_a=0, pol_b=0)), (0.8, ket(pol_a=1, pol_b=0))], AB)
        ens = prepare_dof(s, (A, Dof.POL), (1.0, 1.0))
        assert len(ens) == 1
        out = ens.branches[0].state
        inv = 1 / math.sqrt(2)
        assert out.amplitude(ket(0, 0)) == pytest.approx(inv)
        assert out.amplitude(ket(1, 0)) == pytest.approx(inv)


class TestMeasureDiagonal:
    def test_balanced_outcomes_on_computational_input(self):
        outcomes = measure_diagonal(single(ket(pol_a=0)), (A, Dof.POL))
        assert [sign for sign, _, _ in outcomes] == [1, -1]
        for _, prob, post in outcomes:
            assert prob == pytest.approx(0.5)
            assert abs(post.amplitude(ket(pol_a=0))) == pytest.approx(1 / math.sqrt(2))

    def test_plus_state_gives_single_outcome(self):
        plus = superpose([(1, ket(pol_a=0)), (1, ket(pol_a=1))], AB)
        outcomes = measure_diagonal(plus, (A, Dof.POL))
        assert len(outcomes) == 1
        sign, prob, post = outcomes[0]
        assert sign == 1 and prob == pytest.approx(1.0)
        assert fidelity(post, plus) == pytest.approx(1.0)


def up_rule(photon, dof, value, units, probe="up"):
    return KerrRule(probe, photon, dof, value, units)


class TestKerrTagging:
    def test_counts_accumulate_on_matching_kets(self):
        s = superpose([(1, ket(spa_a=0)), (1, ket(spa_a=1))], AB)
        tagged = kerr_tag(s, ProbeBeam("up"), up_rule(A, Dof.SPATIAL, 0, 1))
        assert tagged.count("up", ket(spa_a=0)) == 1
        assert tagged.count("up", ket(spa_a=1)) == 0

    def test_zero_units_is_noop(self):
        s = single(ket())
        tagged = kerr_tag(s, "up", up_rule(A, Dof.POL, 0, 0))
        assert tagged.count("up", ket()) == 0
        assert "up" in tagged.tags

    def test_sequential_rules_add(self):
        s = single(ket())
        tagged = kerr_tag(s, "up", up_rule(A, Dof.POL, 0, 1))
        tagged = kerr_tag(tagged, "up", up_rule(A, Dof.SPATIAL, 0, 2))
        assert tagged.count("up", ket()) == 3

    def test_amplitudes_untouched(self):
        s = superpose([(0.6, ket()), (0.8, ket(pol_a=1))], AB)
        tagged = kerr_tag(s, "up", up_rule(A, Dof.POL, 1, 5))
        assert tagged.state is s

    def test_probe_mismatch_rejected(self):
        with pytest.raises(ValueError):
            kerr_tag(single(ket()), "down", up_rule(A, Dof.POL, 0, 1))


def alice_side_table() -> CouplingTable:
    """One side of the two-sided parity check: A polarization vs B path."""
    rules = (
        KerrRule("up", A, Dof.POL, 0, 1),
        KerrRule("up", B, Dof.SPATIAL, 1, 1),
        KerrRule("down", A, Dof.POL, 1, 1),
        KerrRule("down", B, Dof.SPATIAL, 0, 1),
    )
    return CouplingTable("up", "down", rules)


class TestHomodyne:
    def test_single_class_passthrough(self):
        s = superpose([(0.6, ket()), (0.8, ket(frq_b=1))], AB)
        table = CouplingTable("up", "down", (KerrRule("up", A, Dof.POL, 0, 1),))
        branches = homodyne_classify(tag_table(s, table), "up", "down")
        assert len(branches) == 1
        assert branches[0].probability == pytest.approx(1.0)
        assert branches[0].state.allclose(s)

    def test_parity_subcheck_classes_half_half(self):
        # |+>_A polarization against a polarization/path-correlated partner:
        # enumerate the four kets; matched parity lands in class 0, the
        # crossed kets in class 2, each with probability 1/2.
        s = superpose(
            [
                (1, ket(pol_a=0, pol_b=0, spa_b=0)),
                (1, ket(pol_a=0, pol_b=1, spa_b=1)),
                (1, ket(pol_a=1, pol_b=0, spa_b=0)),
                (1, ket(pol_a=1, pol_b=1, spa_b=1)),
            ],
            AB,
        )
        branches = homodyne_classify(tag_table(s, alice_side_table()), "up", "down")
        assert [b.outcome.magnitude for b in branches] == [0, 2]
        assert [b.probability for b in branches] == [pytest.approx(0.5), pytest.approx(0.5)]

    def test_probabilities_sum_to_one_and_projections_orthogonal(self):
        s = superpose(
            [(0.5, ket()), (0.5, ket(pol_a=1)), (0.5, ket(spa_b=1)), (0.5, ket(pol_a=1, spa_b=1))],
            AB,
        )
        branches = homodyne_classify(tag_table(s, alice_side_table()), "up", "down")
        assert math.fsum(b.probability for b in branches) == pytest.approx(1.0, abs=1e-12)
        for i, bi in enumerate(branches):
            for bj in branches[i + 1 :]:
                overlap = sum(
                    bj.state.amplitudes.get(k, 0j).conjugate() * a
                    for k, a in bi.state.amplitudes.items()
                )
                assert abs(overlap) < 1e-12

    def test_untagged_probe_is_protocol_order_error(self):
        s = single(ket())
        tagged = kerr_tag(s, "up", up_rule(A, Dof.POL, 0, 1))
        with pytest.raises(ProtocolOrderError):
            homodyne_classify(tagged, "up", "down")

    def test_sign_inversion_invariance(self):
        # swapping the two beams negates every difference; classes must not move
        s = superpose(
            [(0.5, ket()), (0.5, ket(pol_a=1)), (0.5, ket(spa_b=1)), (0.5, ket(pol_a=1, spa_b=1))],
            AB,
        )
        tagged = tag_table(s, alice_side_table())
        fwd = homodyne_classify(tagged, "up", "down")
        rev = homodyne_classify(tagged, "down", "up")
        assert [b.outcome.magnitude for b in fwd] == [b.outcome.magnitude for b in rev]
        for x, y in zip(fwd, rev):
            assert x.probability == pytest.approx(y.probability, abs=1e-12)
            assert x.state.allclose(y.state)


unitary_names = st.sampled_from(["identity", "flip", "hadamard", "phase_z"])
amplitude_st = st.complex_numbers(min_magnitude=0.1, max_magnitude=1.0, allow_nan=False, allow_infinity=False)


@st.composite
def small_states(draw):
    pool = [ket(p, q, s, t, f, g)
            for p in (0, 1) for q in (0, 1) for s in (0, 1)
            for t in (0, 1) for f in (0, 1) for g in (0, 1)]
    n = draw(st.integers(min_value=1, max_value=5))
    kets = draw(st.permutations(pool))[:n]
    amps = [draw(amplitude_st) for _ in range(n)]
    return superpose(list(zip(amps, kets)), AB)


@given(small_states(), unitary_names)
@settings(max_examples=50, deadline=None)
def test_property_unitary_preserves_norm(state, name):
    out = apply_pol_unitary(state, A, name)
    assert abs(out.norm_sq() - 1.0) < 1e-12


@given(small_states(), unitary_names)
@settings(max_examples=50, deadline=None)
def test_property_unitary_commutes_with_disjoint_relabel(state, name):
    swap = {0: 1, 1: 0}
    one = relabel_dof(apply_pol_unitary(state, A, name), B, Dof.FREQ, swap)
    other = apply_pol_unitary(relabel_dof(state, B, Dof.FREQ, swap), A, name)
    assert one.allclose(other)


@given(small_states())
@settings(max_examples=50, deadline=None)
def test_property_overwrite_trace_preserving(state):
    ens = overwrite_dof_from(state, (A, Dof.POL), (B, Dof.FREQ), {0: 0, 1: 1})
    assert abs(math.fsum(b.weight for b in ens) - 1.0) < 1e-12
