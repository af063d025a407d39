"""Entanglement swapping of two a|HH> + b|VV> pairs by a three-step walk.

Clare holds photons 2 and 3.  Rewriting the product of the two pairs in the
Bell basis of the remote photons 1 and 4 splits it into four branches; the
walk circuit on Clare's side sends branch 3 and branch 4 to distinct
cross-line coincidences and branches 1 and 2 to single-line outcomes.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .entanglement import BellState, fidelity, mixed_concurrence
from .hilbert import (
    Kind,
    Line,
    PhotonKet,
    Polarization,
    SparseState,
    SymmetrizedKet,
)
from .photon_stats import (
    ClickPattern,
    Detector,
    Placement,
    Regime,
    clicks_of,
    detector_distribution,
    evolve_regime,
    placement_distribution,
)
from .walk import (
    Circuit,
    Coin,
    ExchangeRule,
    PhaseRetarder,
    Step,
    run_step,
)

NORM_TOL = 1e-12

H, V = Polarization.H, Polarization.V
L2, L3 = Line.LINE2, Line.LINE3


def check_coefficients(a: float, b: float) -> None:
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("a and b must be finite reals")
    if abs(a * a + b * b - 1) >= NORM_TOL:
        raise ValueError(f"unnormalized coefficients: a^2 + b^2 = {a * a + b * b!r}")


@dataclass(frozen=True)
class SwapConfig:
    a: float
    b: Optional[float] = None
    regime: Regime = Regime.SYNCHRONIZED
    rng_seed: int = 0
    shots: int = 0
    detector_efficiency: float = 1.0
    hwp_angle_jitter_sigma: float = 0.0

    def __post_init__(self) -> None:
        if self.b is None:
            if not 0 <= self.a <= 1:
                raise ValueError("a must lie in [0, 1] when b is derived")
            object.__setattr__(self, "b", math.sqrt(max(0.0, 1 - self.a * self.a)))
        check_coefficients(self.a, self.b)
        if not 0 <= self.detector_efficiency <= 1:
            raise ValueError("detector_efficiency must lie in [0, 1]")
        if self.shots < 0:
            raise ValueError("shots must be >= 0")
        if self.hwp_angle_jitter_sigma < 0:
            raise ValueError("jitter sigma must be >= 0")


def clare_input(branch: int, a: float, b: float) -> SparseState:
    """Walker-coin state of photons 2, 3 at the origin for one branch."""
    o2, o3 = (lambda p: PhotonKet.at(p, L2, 0)), (lambda p: PhotonKet.at(p, L3, 0))
    if branch in (1, 2):
        n = math.sqrt(a**4 + b**4)
        sign = 1 if branch == 1 else -1
        terms = {(o2(H), o3(H)): a * a / n, (o2(V), o3(V)): sign * b * b / n}
    elif branch in (3, 4):
        r = 1 / math.sqrt(2)
        sign = 1 if branch == 3 else -1
        terms = {(o2(H), o3(V)): r, (o2(V), o3(H)): sign * r}
    else:
        raise ValueError(f"branch must be 1..4, got {branch}")
    return SparseState.ordered(terms)


REMOTE_BELL = {
    1: BellState.PSI_PLUS,
    2: BellState.PSI_MINUS,
    3: BellState.PHI_PLUS,
    4: BellState.PHI_MINUS,
}


@dataclass(frozen=True)
class Branch:
    index: int
    remote_bell: BellState
    clare_state: SparseState
    coefficient: float


def decompose_initial(a: float, b: float) -> tuple[Branch, ...]:
    check_coefficients(a, b)
    c_psi = math.sqrt((a**4 + b**4) / 2)
    coeffs = {1: c_psi, 2: c_psi, 3: a * b, 4: a * b}
    return tuple(
        Branch(k, REMOTE_BELL[k], clare_input(k, a, b), coeffs[k]) for k in (1, 2, 3, 4)
    )


def four_photon_state(a: float, b: float) -> np.ndarray:
    """``(a|HH> + b|VV>)_12 (x) (a|HH> + b|VV>)_34`` as a 16-vector, order 1234."""
    pair = np.array([a, 0, 0, b], dtype=complex)
    return np.kron(pair, pair)


def _clare_polarization(state: SparseState) -> np.ndarray:
    v = np.zeros(4, dtype=complex)
    for (k2, k3), amp in state:
        v[2 * int(k2.pol) + int(k3.pol)] += amp
    return v


def reconstruct(branches: Sequence[Branch]) -> np.ndarray:
    """Reassemble the four-photon state from its branches (order 1234)."""
    total = np.zeros((2, 2, 2, 2), dtype=complex)  # indices 1, 4, 2, 3
    for br in branches:
        term = np.kron(br.remote_bell.vector, _clare_polarization(br.clare_state))
        total += br.coefficient * term.reshape(2, 2, 2, 2)
    return total.transpose(0, 2, 3, 1).reshape(16)


def build_protocol_circuit() -> Circuit:
    """Identity/NOT then exchange at -1; NOT/NOT; Hadamard/Hadamard."""
    return Circuit(
        (
            Step(Coin.identity(), Coin.not_gate(), exchange=ExchangeRule(-1)),
            Step(
                Coin.not_gate(),
                Coin.not_gate(),
                retarders=(PhaseRetarder(L2, -1, 0.0), PhaseRetarder(L3, -1, 0.0)),
            ),
            Step(Coin.hadamard(), Coin.hadamard()),
        )
    )


class Verdict(Enum):
    PSI3 = "psi3"
    PSI4 = "psi4"
    INCONCLUSIVE = "inconclusive"


_PSI3_PATTERNS = {frozenset({Detector.D1, Detector.D3}), frozenset({Detector.D2, Detector.D4})}
_PSI4_PATTERNS = {frozenset({Detector.D1, Detector.D4}), frozenset({Detector.D2, Detector.D3})}

HERALDED_BELL = {Verdict.PSI3: BellState.PHI_PLUS, Verdict.PSI4: BellState.PHI_MINUS}


def classify(clicks: ClickPattern) -> Verdict:
    clicks = frozenset(clicks)
    if clicks in _PSI3_PATTERNS:
        return Verdict.PSI3
    if clicks in _PSI4_PATTERNS:
        return Verdict.PSI4
    return Verdict.INCONCLUSIVE


def detection_outcomes(
    placement: Placement, efficiency: float
) -> list[tuple[ClickPattern, float]]:
    """Click patterns left after each photon is independently detected."""
    out: dict[ClickPattern, float] = defaultdict(float)
    for seen in product((True, False), repeat=len(placement)):
        w = 1.0
        hit = []
        for det, s in zip(placement, seen):
            if det is None:
                if s:
                    w = 0.0
                continue
            w *= efficiency if s else 1 - efficiency
            if s:
                hit.append(det)
        if w > 0:
            out[clicks_of(hit)] += w
    return list(out.items())


@dataclass
class BranchResult:
    branch: Branch
    history: list[SparseState]  # state after each step; last one is ``final``
    placements: dict[Placement, float]
    clicks: dict[ClickPattern, float]
    verdicts: dict[Verdict, float]

    @property
    def final(self) -> SparseState:
        return self.history[-1]


def run_branch(
    initial: SparseState,
    circuit: Circuit,
    regime: Regime,
    merge_after: Optional[int] = None,
) -> list[SparseState]:
    """Evolve one branch, switching to the regime's picture before the last
    ``len(circuit) - merge_after`` steps (default: before the last step)."""
    if merge_after is None:
        merge_after = len(circuit) - 1
    bound = circuit.lattice_bound
    state = initial
    history = []
    for step in circuit.steps[:merge_after]:
        state = run_step(state, step, bound)
        history.append(state)
    for step in circuit.steps[merge_after:]:
        state = evolve_regime(state, [step], regime, bound)
        history.append(state)
    return history


def _verdict_distribution(placements: dict[Placement, float], efficiency: float):
    out = {v: 0.0 for v in Verdict}
    for placement, p in placements.items():
        for clicks, w in detection_outcomes(placement, efficiency):
            out[classify(clicks)] += p * w
    return out


def jitter_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[0])


def sampling_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[1])


def effective_circuit(config: SwapConfig, circuit: Optional[Circuit] = None) -> Circuit:
    circuit = circuit if circuit is not None else build_protocol_circuit()
    if config.hwp_angle_jitter_sigma > 0:
        circuit = apply_hwp_jitter(
            circuit, config.hwp_angle_jitter_sigma, jitter_rng(config.rng_seed)
        )
    return circuit


def run_protocol(
    config: SwapConfig,
    circuit: Optional[Circuit] = None,
    strict: Optional[bool] = None,
) -> list[BranchResult]:
    """Evolve all four branches and tabulate their detector statistics.

    ``strict`` makes a photon outside the detector plane an error; it defaults
    to on for the ideal circuit and off once angle jitter is applied.
    """
    circuit = effective_circuit(config, circuit)
    if strict is None:
        strict = config.hwp_angle_jitter_sigma == 0
    results = []
    for br in decompose_initial(config.a, config.b):
        history = run_branch(br.clare_state, circuit, config.regime)
        placements = placement_distribution(history[-1], strict=strict)
        results.append(
            BranchResult(
                branch=br,
                history=history,
                placements=placements,
                clicks=detector_distribution(history[-1], strict=strict),
                verdicts=_verdict_distribution(placements, config.detector_efficiency),
            )
        )
    return results


def success_probability(a: float, b: float) -> float:
    check_coefficients(a, b)
    return 2 * a * a * b * b


@dataclass
class SwapOutcome:
    verdict: Verdict
    probability: float
    remote_density: np.ndarray = field(repr=False)
    concurrence: float
    bell_fidelity: float


def heralded_outcome(
    results: Sequence[BranchResult], verdict: Verdict, efficiency: float = 1.0
) -> SwapOutcome:
    """State of photons 1 and 4 given Clare's verdict.

    Each final basis term of photons 2, 3 is an orthogonal measurement
    record; terms giving the same verdict are summed incoherently.
    """
    keys: dict = {}
    for res in results:
        for key in res.final.terms:
            keys[key] = None
    rho = np.zeros((4, 4), dtype=complex)
    for key in keys:
        v = np.zeros(4, dtype=complex)
        for res in results:
            amp = res.final.amplitude(key)
            if amp:
                v += res.branch.coefficient * amp * res.branch.remote_bell.vector
        if not v.any():
            continue
        placement = _key_placement(key)
        weight = sum(
            w for clicks, w in detection_outcomes(placement, efficiency)
            if classify(clicks) is verdict
        )
        if weight:
            rho += weight * np.outer(v, v.conj())
    prob = float(np.trace(rho).real)
    if prob <= 0:
        return SwapOutcome(verdict, 0.0, rho, 0.0, 0.0)
    rho = rho / prob
    if verdict in HERALDED_BELL:
        fid = fidelity(rho, HERALDED_BELL[verdict].vector)
    else:
        fid = max(fidelity(rho, b.vector) for b in BellState)
    return SwapOutcome(verdict, prob, rho, mixed_concurrence(rho), fid)


def _key_placement(key) -> Placement:
    labels = key.labels() if isinstance(key, SymmetrizedKet) else key
    dets = {d.value: d for d in Detector}
    return tuple(dets.get(k.mode) for k in labels)


def apply_hwp_jitter(circuit: Circuit, sigma: float, rng: np.random.Generator) -> Circuit:
    """Perturb every wave-plate angle by an independent N(0, sigma) error.

    Coins without a wave plate (identity) are left alone.  Draws are made in
    step order, line 2 before line 3, as ``sigma * z`` with standard normal
    ``z`` so equal seeds give proportional errors for different ``sigma``.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return circuit

    def perturb(coin: Coin) -> Coin:
        if coin.hwp_angle is None:
            return coin
        return Coin.hwp(coin.hwp_angle + sigma * rng.standard_normal())

    return Circuit(
        tuple(
            replace(s, coin_line2=perturb(s.coin_line2), coin_line3=perturb(s.coin_line3))
            for s in circuit
        )
    )


def mean_jitter_fidelity(
    a: float,
    b: float,
    sigma: float,
    trials: int = 200,
    seed: int = 0,
    verdict: Verdict = Verdict.PSI3,
    regime: Regime = Regime.SYNCHRONIZED,
) -> float:
    """Average heralded Bell fidelity over ``trials`` jittered circuits."""
    base = build_protocol_circuit()
    config = SwapConfig(a, b, regime=regime)
    total = 0.0
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        circuit = apply_hwp_jitter(base, sigma, rng)
        results = run_protocol(config, circuit, strict=False)
        total += heralded_outcome(results, verdict).bell_fidelity
    return total / trials
