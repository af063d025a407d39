"""Synchronized (bosonic) and asynchronous (distinguishable) photon pictures.

Synchronized photons are identical bosons: once their wave packets overlap
the slot labels carry no information, and the state lives in the symmetric
(Fock) representation.  Asynchronous photons keep their labels, since a
different arrival time tells them apart.
"""

from __future__ import annotations

from collections import defaultdict
from enum import Enum
from typing import Iterable, Optional

from .hilbert import (
    SQRT2,
    Kind,
    Line,
    Mode,
    PhotonKet,
    SparseState,
    SymmetrizedKet,
)
from .walk import Step, run_step


class Regime(Enum):
    SYNCHRONIZED = "sync"
    ASYNCHRONOUS = "async"


class Detector(Enum):
    D1 = Mode(Line.LINE2, +1)
    D2 = Mode(Line.LINE2, -1)
    D3 = Mode(Line.LINE3, +1)
    D4 = Mode(Line.LINE3, -1)

    @property
    def line(self) -> Line:
        return self.value.line

    def __str__(self) -> str:
        return self.name

    def __lt__(self, other: Detector) -> bool:
        return self.name < other.name


_DETECTOR_AT = {d.value: d for d in Detector}

ClickPattern = frozenset  # frozenset[Detector]
Placement = tuple  # (Detector | None, Detector | None), sorted, None last


def to_fock(state: SparseState) -> SparseState:
    """Symmetric first-quantized wavefunction -> Fock amplitudes.

    For ``x != y`` the Fock amplitude is ``(c_xy + c_yx)/sqrt2``; a doubly
    occupied label keeps ``c_xx``.  This is an isometry on exchange-symmetric
    inputs and a projection otherwise.
    """
    _expect(state, Kind.ORDERED)
    acc: dict[SymmetrizedKet, complex] = defaultdict(complex)
    for (x, y), a in state:
        key = SymmetrizedKet.of(x, y)
        acc[key] += a if key.bunched else a / SQRT2
    return SparseState.symmetric(acc, tolerance=state.tolerance)


def from_fock(state: SparseState) -> SparseState:
    """Inverse of :func:`to_fock`: the symmetric first-quantized wavefunction."""
    _expect(state, Kind.SYMMETRIC)
    acc: dict[tuple[PhotonKet, PhotonKet], complex] = defaultdict(complex)
    for key, a in state:
        if key.bunched:
            acc[(key.first, key.first)] += a
        else:
            acc[(key.first, key.second)] += a / SQRT2
            acc[(key.second, key.first)] += a / SQRT2
    return SparseState.ordered(acc, tolerance=state.tolerance)


def exchange_slots(state: SparseState) -> SparseState:
    _expect(state, Kind.ORDERED)
    return SparseState.ordered({(y, x): a for (x, y), a in state}, tolerance=state.tolerance)


def symmetrize(state: SparseState) -> SparseState:
    """Erase the photon labels of a distinguishable two-photon state.

    Each ordered term ``c |x>_2 |y>_3`` becomes ``c a+_x a+_y |0>``, so the
    Fock amplitude is ``c_xy + c_yx`` for ``x != y`` and ``sqrt2 c_xx`` for a
    bunched label.  Norm is preserved whenever the state is orthogonal to its
    slot-swapped image, which holds for any state evolved from photons that
    started on different lines.
    """
    _expect(state, Kind.ORDERED)
    acc: dict[SymmetrizedKet, complex] = defaultdict(complex)
    for (x, y), a in state:
        key = SymmetrizedKet.of(x, y)
        acc[key] += a * SQRT2 if key.bunched else a
    return SparseState.symmetric(acc, tolerance=state.tolerance)


def evolve_regime(
    state: SparseState,
    steps: Iterable[Step],
    regime: Regime,
    bound: Optional[int] = None,
) -> SparseState:
    """Run the remaining ``steps`` in the given photon-statistics regime."""
    if regime is Regime.SYNCHRONIZED:
        if state.kind is Kind.ORDERED:
            state = symmetrize(state)
        elif state.kind is not Kind.SYMMETRIC:
            raise ValueError("regime/representation mismatch")
    elif state.kind is not Kind.ORDERED:
        raise ValueError("regime/representation mismatch")
    for step in steps:
        state = run_step(state, step, bound)
    return state


def _expect(state: SparseState, kind: Kind) -> None:
    if state.kind is not kind:
        raise ValueError(f"expected a {kind.value} state, got {state.kind.value}")


def _detector(k: PhotonKet, strict: bool) -> Optional[Detector]:
    d = _DETECTOR_AT.get(k.mode)
    if d is None and strict:
        raise ValueError(f"photon outside detector plane at {k.mode}")
    return d


def _placement(a: Optional[Detector], b: Optional[Detector]) -> Placement:
    return tuple(sorted((a, b), key=lambda d: (d is None, d.name if d else "")))


def placement_distribution(final: SparseState, strict: bool = True) -> dict[Placement, float]:
    """Probability of each (unordered) pair of detectors hit by the photons.

    ``None`` marks a photon that missed the detector plane (only possible
    with ``strict=False``).
    """
    if final.kind is Kind.SINGLE:
        raise ValueError("placement_distribution expects a two-photon state")
    out: dict[Placement, float] = defaultdict(float)
    for key, a in final:
        x, y = key.labels() if isinstance(key, SymmetrizedKet) else key
        out[_placement(_detector(x, strict), _detector(y, strict))] += abs(a) ** 2
    return dict(sorted(out.items(), key=lambda kv: _placement_order(kv[0])))


def _placement_order(p: Placement):
    return tuple(d.name if d else "~" for d in p)


def clicks_of(placement: Iterable[Optional[Detector]]) -> ClickPattern:
    """Non-number-resolving detectors: a doubly hit detector clicks once."""
    return frozenset(d for d in placement if d is not None)


def detector_distribution(final: SparseState, strict: bool = True) -> dict[ClickPattern, float]:
    """Click-pattern probabilities for ideal detectors, polarization ignored."""
    out: dict[ClickPattern, float] = defaultdict(float)
    for placement, p in placement_distribution(final, strict).items():
        out[clicks_of(placement)] += p
    return dict(sorted(out.items(), key=lambda kv: pattern_name(kv[0])))


def pattern_name(pattern: ClickPattern) -> str:
    return "+".join(d.name for d in sorted(pattern)) or "none"


def cross_line_probability(final: SparseState, strict: bool = True) -> float:
    """Probability that one photon is found on each line."""
    total = 0.0
    for placement, p in placement_distribution(final, strict).items():
        if None not in placement and placement[0].line is not placement[1].line:
            total += p
    return total
