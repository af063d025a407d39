"""Shot-by-shot sampling of the swap with lossy click detectors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .photon_stats import clicks_of, pattern_name
from .protocol import (
    SwapConfig,
    Verdict,
    classify,
    effective_circuit,
    run_protocol,
    sampling_rng,
)
from .walk import Circuit


@dataclass
class ShotReport:
    shots: int
    efficiency: float
    counts: dict[tuple[int, str], int] = field(default_factory=dict)
    verdict_counts: dict[tuple[int, Verdict], int] = field(default_factory=dict)
    conclusive: int = 0
    correct: int = 0
    misclassified: int = 0
    expected_success: float = 0.0

    @property
    def success_rate(self) -> float:
        return self.conclusive / self.shots

    @property
    def accuracy(self) -> float:
        """Fraction of conclusive verdicts naming the true branch."""
        return self.correct / self.conclusive if self.conclusive else float("nan")

    @property
    def sigma(self) -> float:
        p = self.expected_success
        return float(np.sqrt(p * (1 - p) / self.shots))


def sample_shots(config: SwapConfig, circuit: Optional[Circuit] = None) -> ShotReport:
    """Draw ``config.shots`` independent runs of the protocol.

    Per shot: pick a branch with its squared coefficient, pick where the two
    photons land from that branch's final state, then keep each photon's
    click with probability ``detector_efficiency``.  With angle jitter the
    same misaligned bench is used for every shot.
    """
    if config.shots < 1:
        raise ValueError("shots must be >= 1")
    eta = config.detector_efficiency
    circuit = effective_circuit(config, circuit)
    jittered = config.hwp_angle_jitter_sigma > 0
    results = run_protocol(
        SwapConfig(config.a, config.b, regime=config.regime, detector_efficiency=eta),
        circuit,
        strict=not jittered,
    )
    rng = sampling_rng(config.rng_seed)

    weights = np.array([r.branch.coefficient**2 for r in results])
    branch_idx = rng.choice(len(results), size=config.shots, p=weights / weights.sum())

    report = ShotReport(config.shots, eta)
    report.expected_success = sum(
        w * (r.verdicts[Verdict.PSI3] + r.verdicts[Verdict.PSI4])
        for w, r in zip(weights, results)
    )
    counts: dict[tuple[int, str], int] = {}
    verdicts: dict[tuple[int, Verdict], int] = {}
    for i, res in enumerate(results):
        n = int(np.sum(branch_idx == i))
        if n == 0:
            continue
        placements = list(res.placements)
        probs = np.array([res.placements[p] for p in placements])
        which = rng.choice(len(placements), size=n, p=probs / probs.sum())
        seen = rng.random((n, 2)) < eta
        code = which * 4 + seen[:, 0] * 2 + seen[:, 1]
        tally = np.bincount(code, minlength=4 * len(placements))
        k = res.branch.index
        for c in np.nonzero(tally)[0]:
            placement = placements[c // 4]
            mask = ((c >> 1) & 1, c & 1)
            clicks = clicks_of(d for d, m in zip(placement, mask) if m)
            m = int(tally[c])
            key = (k, pattern_name(clicks))
            counts[key] = counts.get(key, 0) + m
            verdict = classify(clicks)
            verdicts[(k, verdict)] = verdicts.get((k, verdict), 0) + m
            if verdict is Verdict.INCONCLUSIVE:
                continue
            report.conclusive += m
            truth = {3: Verdict.PSI3, 4: Verdict.PSI4}.get(k)
            if verdict is truth:
                report.correct += m
            else:
                report.misclassified += m
    report.counts = dict(sorted(counts.items()))
    report.verdict_counts = dict(sorted(verdicts.items(), key=lambda kv: (kv[0][0], kv[0][1].value)))
    return report
