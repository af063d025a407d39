import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import COEFFICIENT_PAIRS
from qwswap.entanglement import (
    BellState,
    concurrence,
    dominant_pure_state,
    fidelity,
    mixed_concurrence,
    pure_density,
)
from qwswap.photon_stats import Detector, Regime
from qwswap.protocol import (
    SwapConfig,
    Verdict,
    apply_hwp_jitter,
    build_protocol_circuit,
    check_coefficients,
    classify,
    decompose_initial,
    detection_outcomes,
    four_photon_state,
    heralded_outcome,
    mean_jitter_fidelity,
    reconstruct,
    run_protocol,
    success_probability,
)
from qwswap.sampling import sample_shots

R = 1 / math.sqrt(2)
D1, D2, D3, D4 = Detector
unit_a = st.floats(0.0, 1.0)


# --- setup -------------------------------------------------------------------


def test_check_coefficients():
    check_coefficients(0.8, 0.6)
    with pytest.raises(ValueError, match="unnormalized"):
        check_coefficients(0.8, 0.8)
    with pytest.raises(ValueError):
        check_coefficients(float("nan"), 0.6)


def test_config_derives_b_and_validates():
    assert SwapConfig(0.6).b == pytest.approx(0.8)
    with pytest.raises(ValueError):
        SwapConfig(1.5)
    with pytest.raises(ValueError):
        SwapConfig(0.8, 0.6, detector_efficiency=1.2)
    with pytest.raises(ValueError):
        SwapConfig(0.8, 0.6, shots=-1)
    with pytest.raises(ValueError):
        SwapConfig(0.8, 0.6, hwp_angle_jitter_sigma=-0.1)


def test_decomposition_coefficients():
    br = decompose_initial(0.8, 0.6)
    c = math.sqrt((0.8**4 + 0.6**4) / 2)
    assert [b.coefficient for b in br] == pytest.approx([c, c, 0.48, 0.48])
    assert [b.remote_bell for b in br] == [
        BellState.PSI_PLUS,
        BellState.PSI_MINUS,
        BellState.PHI_PLUS,
        BellState.PHI_MINUS,
    ]


def dense_product(a, b):
    """Four-photon state built qubit by qubit, order 1234."""
    v = np.zeros(16, dtype=complex)
    amp = {0: a, 1: b}
    for q1 in (0, 1):
        for q3 in (0, 1):
            # pairs 12 and 34 share polarization
            v[8 * q1 + 4 * q1 + 2 * q3 + q3] = amp[q1] * amp[q3]
    return v


@settings(deadline=None)
@given(unit_a)
def test_branches_reassemble_the_input(a):
    b = math.sqrt(1 - a * a)
    assert np.max(np.abs(reconstruct(decompose_initial(a, b)) - dense_product(a, b))) < 1e-12
    assert np.max(np.abs(four_photon_state(a, b) - dense_product(a, b))) < 1e-15


@given(unit_a)
def test_branch_weights_sum_to_one(a):
    b = math.sqrt(1 - a * a)
    assert sum(br.coefficient**2 for br in decompose_initial(a, b)) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("a,b,p", [(R, R, 0.5), (0.8, 0.6, 0.4608), (1.0, 0.0, 0.0)])
def test_success_probability_values(a, b, p):
    assert success_probability(a, b) == pytest.approx(p, abs=1e-15)


def test_circuit_layout():
    c = build_protocol_circuit()
    assert len(c) == 3
    assert c[0].exchange.position == -1 and c[1].exchange is None
    assert c[0].coin_line2.name == "I" and c[0].coin_line3.name == "NOT"
    assert c[1].coin_line2.name == c[1].coin_line3.name == "NOT"
    assert c[2].coin_line2.name == c[2].coin_line3.name == "HAD"


# --- entanglement ------------------------------------------------------------


@pytest.mark.parametrize("bell", list(BellState))
def test_bell_states_are_maximally_entangled(bell):
    assert concurrence(bell.vector) == pytest.approx(1)


def test_concurrence_examples():
    assert concurrence([1, 0, 0, 0]) == 0
    assert concurrence([0.8, 0, 0, 0.6]) == pytest.approx(0.96)
    with pytest.raises(ValueError, match="not normalized"):
        concurrence([1, 1, 0, 0])


@given(st.lists(st.floats(-1, 1), min_size=8, max_size=8))
def test_wootters_reduces_to_pure_formula(xs):
    v = np.array(xs[:4]) + 1j * np.array(xs[4:])
    n = np.linalg.norm(v)
    if n < 1e-3:
        return
    v = v / n
    assert mixed_concurrence(pure_density(v)) == pytest.approx(concurrence(v), abs=1e-6)


def test_mixture_of_bell_states_is_separable():
    rho = 0.5 * pure_density(BellState.PHI_PLUS.vector) + 0.5 * pure_density(BellState.PHI_MINUS.vector)
    assert mixed_concurrence(rho) == pytest.approx(0, abs=1e-12)
    assert fidelity(rho, BellState.PHI_PLUS.vector) == pytest.approx(0.5)
    _, weight = dominant_pure_state(rho)
    assert weight == pytest.approx(0.5)


# --- verdicts ----------------------------------------------------------------


def test_classify_table():
    assert classify({D1, D3}) is Verdict.PSI3
    assert classify({D2, D4}) is Verdict.PSI3
    assert classify({D1, D4}) is Verdict.PSI4
    assert classify({D2, D3}) is Verdict.PSI4
    for clicks in ({D1}, {D1, D2}, {D3, D4}, set()):
        assert classify(clicks) is Verdict.INCONCLUSIVE


def test_detection_outcomes_with_losses():
    out = dict(detection_outcomes((D1, D3), 0.9))
    assert out[frozenset({D1, D3})] == pytest.approx(0.81)
    assert out[frozenset({D1})] == pytest.approx(0.09)
    assert out[frozenset()] == pytest.approx(0.01)
    assert sum(out.values()) == pytest.approx(1)


def test_bunched_photons_click_once():
    out = dict(detection_outcomes((D2, D2), 1.0))
    assert out == {frozenset({D2}): 1.0}


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.0, 1.0))
def test_verdicts_are_sound_synchronized(a, eta):
    b = math.sqrt(1 - a * a)
    for res in run_protocol(SwapConfig(a, b, detector_efficiency=eta)):
        k = res.branch.index
        if k in (1, 2):
            assert res.verdicts[Verdict.PSI3] < 1e-12 and res.verdicts[Verdict.PSI4] < 1e-12
        wrong = Verdict.PSI4 if k == 3 else Verdict.PSI3
        if k in (3, 4):
            assert res.verdicts[wrong] < 1e-12


@pytest.mark.xfail(strict=True, reason="distinguishable photons lose the herald parity")
def test_verdicts_are_sound_asynchronous():
    for res in run_protocol(SwapConfig(0.8, 0.6, regime=Regime.ASYNCHRONOUS)):
        if res.branch.index == 3:
            assert res.verdicts[Verdict.PSI4] < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99))
def test_verdicts_are_complete_with_ideal_detectors(a):
    b = math.sqrt(1 - a * a)
    for res in run_protocol(SwapConfig(a, b)):
        if res.branch.index in (3, 4):
            assert res.verdicts[Verdict.INCONCLUSIVE] < 1e-12


@pytest.mark.parametrize("a,b", COEFFICIENT_PAIRS)
@pytest.mark.parametrize("verdict,bell", [(Verdict.PSI3, BellState.PHI_PLUS), (Verdict.PSI4, BellState.PHI_MINUS)])
def test_heralded_pair_is_the_promised_bell_state(a, b, verdict, bell):
    out = heralded_outcome(run_protocol(SwapConfig(a, b)), verdict)
    assert out.probability == pytest.approx(a * a * b * b, abs=1e-12)
    assert out.bell_fidelity == pytest.approx(1, abs=1e-12)
    assert out.concurrence == pytest.approx(1, abs=1e-9)
    v, weight = dominant_pure_state(out.remote_density)
    assert weight == pytest.approx(1, abs=1e-12)
    assert abs(abs(np.vdot(v, bell.vector)) - 1) < 1e-12


def test_inconclusive_remote_state_is_weakly_entangled():
    a, b = 0.8, 0.6
    out = heralded_outcome(run_protocol(SwapConfig(a, b)), Verdict.INCONCLUSIVE)
    assert out.probability == pytest.approx(1 - 2 * a * a * b * b)


def test_asynchronous_herald_carries_no_entanglement():
    out = heralded_outcome(run_protocol(SwapConfig(R, R, regime=Regime.ASYNCHRONOUS)), Verdict.PSI3)
    assert out.bell_fidelity == pytest.approx(0.5, abs=1e-12)
    assert out.concurrence == pytest.approx(0, abs=1e-9)


def test_herald_rate_scales_with_efficiency_squared():
    out = heralded_outcome(run_protocol(SwapConfig(0.8, 0.6)), Verdict.PSI3, efficiency=0.9)
    assert out.probability == pytest.approx(0.81 * 0.2304)
    assert out.bell_fidelity == pytest.approx(1, abs=1e-12)


# --- jitter ------------------------------------------------------------------


def test_zero_jitter_is_identity():
    c = build_protocol_circuit()
    assert apply_hwp_jitter(c, 0.0, np.random.default_rng(0)) is c


@given(st.floats(0, 0.5), st.integers(0, 2**32 - 1))
def test_jittered_coins_stay_unitary(sigma, seed):
    for step in apply_hwp_jitter(build_protocol_circuit(), sigma, np.random.default_rng(seed)):
        for coin in (step.coin_line2, step.coin_line3):
            m = coin.matrix
            assert np.allclose(m.conj().T @ m, np.eye(2), atol=1e-12)


def test_identity_coin_is_never_jittered():
    c = apply_hwp_jitter(build_protocol_circuit(), 0.1, np.random.default_rng(1))
    assert c[0].coin_line2.name == "I"


def test_small_jitter_degrades_fidelity_slightly():
    f = mean_jitter_fidelity(R, R, 0.01, trials=20)
    assert 0.99 < f < 1


def test_jittered_protocol_may_leak_out_of_detector_plane():
    res = run_protocol(SwapConfig(R, R, hwp_angle_jitter_sigma=0.05, rng_seed=3))
    total = sum(sum(r.placements.values()) for r in res) / 4
    assert total == pytest.approx(1, abs=1e-12)


# --- sampling ----------------------------------------------------------------


@pytest.mark.parametrize("eta", [1.0, 0.93])
def test_sampled_success_rate_within_three_sigma(eta):
    a = b = R
    rep = sample_shots(SwapConfig(a, b, shots=50_000, rng_seed=11, detector_efficiency=eta))
    expected = 2 * a * a * b * b * eta**2
    assert rep.expected_success == pytest.approx(expected, abs=1e-12)
    assert abs(rep.success_rate - expected) < 3 * rep.sigma
    assert rep.misclassified == 0
    assert rep.accuracy == 1


def test_blind_detectors_never_herald():
    rep = sample_shots(SwapConfig(0.8, 0.6, shots=1000, detector_efficiency=0.0))
    assert rep.conclusive == 0
    assert rep.counts == {(k, "none"): n for (k, _), n in rep.counts.items()}


def test_zero_shots_rejected():
    with pytest.raises(ValueError):
        sample_shots(SwapConfig(0.8, 0.6, shots=0))


def test_sampling_is_deterministic():
    cfg = SwapConfig(0.8, 0.6, shots=5000, rng_seed=42, detector_efficiency=0.9)
    assert sample_shots(cfg).counts == sample_shots(cfg).counts


def test_sampled_click_frequencies_match_distribution():
    a, b = 0.8, 0.6
    n = 40_000
    rep = sample_shots(SwapConfig(a, b, shots=n, rng_seed=5))
    for res in run_protocol(SwapConfig(a, b)):
        w = res.branch.coefficient**2
        for clicks, p in res.clicks.items():
            name = "+".join(d.name for d in sorted(clicks))
            q = w * p
            got = rep.counts.get((res.branch.index, name), 0) / n
            assert abs(got - q) < 4 * math.sqrt(q * (1 - q) / n)
