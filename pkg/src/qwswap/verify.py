"""Self-checks run by ``qwswap verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

from . import reference
from .dsl import builtin_protocol_source, parse
from .hilbert import PhotonKet, SparseState, max_amplitude_error
from .photon_stats import Detector, Regime, cross_line_probability, symmetrize
from .protocol import (
    SwapConfig,
    Verdict,
    build_protocol_circuit,
    decompose_initial,
    heralded_outcome,
    run_branch,
    run_protocol,
    success_probability,
)
from .walk import Circuit, Coin, position_distribution, run_single_walker, run_step

GOLDEN_TOL = 1e-10
EXACT_TOL = 1e-12

COEFFICIENT_PAIRS = (
    (1 / math.sqrt(2), 1 / math.sqrt(2)),
    (0.8, 0.6),
    (0.6, 0.8),
    (0.95, math.sqrt(1 - 0.95**2)),
    (0.3, math.sqrt(0.91)),
)

D1, D2, D3, D4 = Detector.D1, Detector.D2, Detector.D3, Detector.D4
EXPECTED_CLICKS = {
    1: {frozenset({d}) for d in Detector},
    2: {frozenset({d}) for d in Detector},
    3: {frozenset({D1, D3}), frozenset({D2, D4})},
    4: {frozenset({D1, D4}), frozenset({D2, D3})},
}


@dataclass
class Check:
    name: str
    passed: bool
    error: float = 0.0
    detail: str = ""


def _golden_stage(circuit: Circuit, branch: int, stage: str) -> float:
    worst = 0.0
    for a, b in COEFFICIENT_PAIRS:
        br = decompose_initial(a, b)[branch - 1]
        if stage == "step1-unexchanged":
            got = run_step(br.clare_state, replace(circuit[0], exchange=None), circuit.lattice_bound)
            want = reference.after_first_step(branch, a, b, exchanged=False)
        elif stage == "step1":
            got = run_branch(br.clare_state, circuit, Regime.SYNCHRONIZED)[0]
            want = reference.after_first_step(branch, a, b)
        elif stage == "step2":
            got = symmetrize(run_branch(br.clare_state, circuit, Regime.SYNCHRONIZED)[1])
            want = reference.after_second_step(branch, a, b)
        elif stage == "final-sync":
            got = run_branch(br.clare_state, circuit, Regime.SYNCHRONIZED)[-1]
            want = reference.final_synchronized(branch, a, b)
        else:
            got = run_branch(br.clare_state, circuit, Regime.ASYNCHRONOUS)[-1]
            want = reference.final_asynchronous(branch, a, b)
        worst = max(worst, max_amplitude_error(got, want, up_to_phase=True))
    return worst


STAGE_TITLES = {
    "step1-unexchanged": "after step 1 coins and shift",
    "step1": "after step 1 path exchange",
    "step2": "after step 2, bunched picture",
    "final-sync": "final state, synchronized photons",
    "final-async": "final state, distinguishable photons",
}


def _guard(name: str, fn: Callable[[], Check]) -> Check:
    try:
        return fn()
    except Exception as exc:  # a broken circuit must fail the check, not crash
        return Check(name, False, math.inf, f"{type(exc).__name__}: {exc}")


def run_checks(circuit: Optional[Circuit] = None) -> list[Check]:
    circuit = circuit if circuit is not None else build_protocol_circuit()
    checks: list[Check] = []

    for stage, title in STAGE_TITLES.items():
        branches = (1, 2) if stage == "final-async" else (1, 2, 3, 4)
        for k in branches:
            name = f"branch {k}: {title}"

            def golden(k=k, stage=stage, name=name) -> Check:
                err = _golden_stage(circuit, k, stage)
                return Check(name, err < GOLDEN_TOL, err)

            checks.append(_guard(name, golden))

    for k in (1, 2, 3, 4):
        name = f"branch {k}: click patterns match the coincidence table"

        def table(k=k, name=name) -> Check:
            worst = 0.0
            for a, b in COEFFICIENT_PAIRS:
                res = run_protocol(SwapConfig(a, b), circuit)[k - 1]
                support = {p for p, v in res.clicks.items() if v > EXACT_TOL}
                if support != EXPECTED_CLICKS[k]:
                    return Check(name, False, math.inf, f"support {sorted(map(sorted_names, support))}")
                if k in (3, 4):
                    worst = max(worst, max(abs(v - 0.5) for v in res.clicks.values()))
                worst = max(worst, abs(sum(res.clicks.values()) - 1))
            return Check(name, worst < EXACT_TOL, worst)

        checks.append(_guard(name, table))

    def herald_equivalence() -> Check:
        worst = 0.0
        for a, b in COEFFICIENT_PAIRS:
            sync = run_protocol(SwapConfig(a, b, regime=Regime.SYNCHRONIZED), circuit)
            asyn = run_protocol(SwapConfig(a, b, regime=Regime.ASYNCHRONOUS), circuit)
            for s, d in zip(sync, asyn):
                worst = max(worst, abs(cross_line_probability(s.final) - cross_line_probability(d.final)))
        return Check("regimes agree on same-line versus cross-line outcomes", worst < EXACT_TOL, worst)

    checks.append(_guard("regimes agree on same-line versus cross-line outcomes", herald_equivalence))

    def success() -> Check:
        worst = 0.0
        for i in range(100):
            a = i / 99
            b = math.sqrt(max(0.0, 1 - a * a))
            br = decompose_initial(a, b)
            worst = max(worst, abs(success_probability(a, b) - br[2].coefficient**2 - br[3].coefficient**2))
        return Check("success probability 2a^2b^2 equals the coincidence-branch weight", worst < EXACT_TOL, worst)

    checks.append(_guard("success probability", success))

    def concentration() -> Check:
        worst = 0.0
        for a, b in COEFFICIENT_PAIRS:
            results = run_protocol(SwapConfig(a, b), circuit)
            for verdict in (Verdict.PSI3, Verdict.PSI4):
                out = heralded_outcome(results, verdict)
                worst = max(worst, abs(1 - out.bell_fidelity), abs(1 - out.concurrence))
        return Check("heralded remote pair is maximally entangled", worst < EXACT_TOL, worst)

    checks.append(_guard("heralded remote pair", concentration))

    def hadamard_walk() -> Check:
        start = SparseState.single({PhotonKet.at("H", 2, 0): 1.0})
        dist = position_distribution(run_single_walker(start, Coin.hadamard(), 3))
        want = {-3: 1 / 8, -1: 1 / 8, 1: 5 / 8, 3: 1 / 8}
        err = max(abs(dist.get(x, 0.0) - want.get(x, 0.0)) for x in set(dist) | set(want))
        return Check("three-step Hadamard walk position distribution", err < EXACT_TOL, err)

    checks.append(_guard("hadamard walk", hadamard_walk))

    def builtin() -> Check:
        parsed, _ = parse(builtin_protocol_source())
        ok = parsed.close_to(build_protocol_circuit(), EXACT_TOL)
        return Check("built-in circuit file matches the programmatic circuit", ok)

    checks.append(_guard("builtin circuit", builtin))
    return checks


def sorted_names(pattern) -> str:
    return "+".join(sorted(d.name for d in pattern))

