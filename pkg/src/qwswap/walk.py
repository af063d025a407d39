"""Coins, conditional shifts, path exchange and step application."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .hilbert import (
    Kind,
    Line,
    Mode,
    PhotonKet,
    Polarization,
    SparseState,
    apply_local,
)

UNITARITY_TOL = 1e-12

# H moves one site up, V one site down.
SHIFT = {Polarization.H: +1, Polarization.V: -1}


class LatticeBoundError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Coin:
    """2x2 unitary on the {H, V} polarization basis.

    ``hwp_angle`` (radians) records the wave-plate orientation that realises
    the coin, when there is one; angle jitter perturbs it.
    """

    matrix: np.ndarray
    name: str = "U"
    hwp_angle: Optional[float] = None

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"coin matrix must be 2x2, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("coin matrix has non-finite entries")
        if np.max(np.abs(m.conj().T @ m - np.eye(2))) > UNITARITY_TOL:
            raise ValueError(f"coin {self.name!r} is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> Coin:
        return cls(np.eye(2), name="I")

    @classmethod
    def hwp(cls, theta: float, name: str | None = None) -> Coin:
        """Half-wave plate with fast axis at ``theta`` radians."""
        c, s = math.cos(2 * theta), math.sin(2 * theta)
        label = name or f"HWP({math.degrees(theta):.12g})"
        return cls(np.array([[c, s], [s, -c]]), name=label, hwp_angle=theta)

    @classmethod
    def not_gate(cls) -> Coin:
        return cls(np.array([[0, 1], [1, 0]]), name="NOT", hwp_angle=math.pi / 4)

    @classmethod
    def hadamard(cls) -> Coin:
        r = 1 / math.sqrt(2)
        return cls(np.array([[r, r], [r, -r]]), name="HAD", hwp_angle=math.pi / 8)

    def column(self, pol: Polarization) -> Iterable[tuple[Polarization, complex]]:
        for out in Polarization:
            amp = self.matrix[int(out), int(pol)]
            if amp != 0:
                yield out, complex(amp)

    def close_to(self, other: Coin, atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.matrix - other.matrix)) <= atol)

    def __repr__(self) -> str:
        return f"Coin({self.name})"


@dataclass(frozen=True)
class ExchangeRule:
    """Swap the Line2 and Line3 modes at one lattice site."""

    position: int = -1


@dataclass(frozen=True)
class PhaseRetarder:
    line: Line
    position: int
    phase: float = 0.0


@dataclass(frozen=True)
class Step:
    """One walk step: retarders, then coins, then shift, then exchange."""

    coin_line2: Coin = field(default_factory=Coin.identity)
    coin_line3: Coin = field(default_factory=Coin.identity)
    retarders: tuple[PhaseRetarder, ...] = ()
    do_shift: bool = True
    exchange: Optional[ExchangeRule] = None

    def coin_for(self, line: Line) -> Coin:
        return self.coin_line2 if line is Line.LINE2 else self.coin_line3

    def close_to(self, other: Step, atol: float = 1e-12) -> bool:
        if self.do_shift != other.do_shift or self.exchange != other.exchange:
            return False
        if len(self.retarders) != len(other.retarders):
            return False
        for r1, r2 in zip(self.retarders, other.retarders):
            if (r1.line, r1.position) != (r2.line, r2.position):
                return False
            if abs(cmath.exp(1j * r1.phase) - cmath.exp(1j * r2.phase)) > atol:
                return False
        return self.coin_line2.close_to(other.coin_line2, atol) and self.coin_line3.close_to(
            other.coin_line3, atol
        )


@dataclass(frozen=True)
class Circuit:
    steps: tuple[Step, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, i: int) -> Step:
        return self.steps[i]

    @property
    def lattice_bound(self) -> int:
        return 2 * len(self.steps)

    def close_to(self, other: Circuit, atol: float = 1e-12) -> bool:
        return len(self) == len(other) and all(
            s.close_to(o, atol) for s, o in zip(self.steps, other.steps)
        )


def apply_coin(state: SparseState, line: Line, coin: Coin) -> SparseState:
    """Rotate the polarization of every photon currently on ``line``."""

    def op(k: PhotonKet):
        if k.line is not line:
            return [(k, 1.0)]
        return [(PhotonKet(p, k.mode), u) for p, u in coin.column(k.pol)]

    return apply_local(state, op)


def apply_shift(state: SparseState, bound: Optional[int] = None) -> SparseState:
    def op(k: PhotonKet):
        pos = k.position + SHIFT[k.pol]
        if bound is not None and abs(pos) > bound:
            raise LatticeBoundError(f"lattice bound exceeded: |{pos}| > {bound}")
        return [(PhotonKet(k.pol, Mode(k.line, pos)), 1.0)]

    return apply_local(state, op)


def apply_exchange(state: SparseState, rule: ExchangeRule) -> SparseState:
    def op(k: PhotonKet):
        if k.position != rule.position:
            return [(k, 1.0)]
        return [(PhotonKet(k.pol, Mode(k.line.other, k.position)), 1.0)]

    return apply_local(state, op)


def apply_retarder(state: SparseState, retarder: PhaseRetarder) -> SparseState:
    if retarder.phase == 0:
        return state
    factor = cmath.exp(1j * retarder.phase)
    target = Mode(retarder.line, retarder.position)

    def op(k: PhotonKet):
        return [(k, factor if k.mode == target else 1.0)]

    return apply_local(state, op)


def run_step(state: SparseState, step: Step, bound: Optional[int] = None) -> SparseState:
    if state.kind is Kind.SINGLE:
        raise ValueError("run_step expects a two-photon state")
    for r in step.retarders:
        state = apply_retarder(state, r)
    state = apply_coin(state, Line.LINE2, step.coin_line2)
    state = apply_coin(state, Line.LINE3, step.coin_line3)
    if step.do_shift:
        state = apply_shift(state, bound)
    if step.exchange is not None:
        state = apply_exchange(state, step.exchange)
    return state


def run_circuit(
    state: SparseState, circuit: Circuit | Iterable[Step], bound: Optional[int] = None
) -> list[SparseState]:
    """Run every step; return the state after each one (input not included)."""
    if not isinstance(circuit, Circuit):
        circuit = Circuit(tuple(circuit))
    if bound is None:
        bound = circuit.lattice_bound
    history = []
    for step in circuit:
        state = run_step(state, step, bound)
        history.append(state)
    return history


def run_single_walker(initial: SparseState, coin: Coin, t: int) -> SparseState:
    """``(S (C x I))^t`` applied to a one-photon state, ignoring lines."""
    if initial.kind is not Kind.SINGLE:
        raise ValueError("run_single_walker expects a one-photon state")
    if t < 0:
        raise ValueError("number of steps must be non-negative")
    state = initial
    for _ in range(t):
        state = apply_local(
            state, lambda k: [(PhotonKet(p, k.mode), u) for p, u in coin.column(k.pol)]
        )
        state = apply_shift(state, bound=2 * t)
    return state


def position_distribution(state: SparseState) -> dict[int, float]:
    """Marginal position probabilities of a one-photon state."""
    if state.kind is not Kind.SINGLE:
        raise ValueError("position_distribution expects a one-photon state")
    out: dict[int, float] = {}
    for k, a in state:
        out[k.position] = out.get(k.position, 0.0) + abs(a) ** 2
    return dict(sorted(out.items()))
