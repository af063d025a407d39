"""Closed-form protocol states, written out term by term.

These are transcribed by hand and share no code with the walk engine, so
they serve as golden values for it.  Ordered states put photon 2 in the
first slot.  States where the photons have become identical bosons are
given directly as Fock amplitudes: ``{x, y}`` with ``x != y`` means
``a+_x a+_y |0>`` and ``{x, x}`` means the normalized doubly occupied state.
"""

from __future__ import annotations

import math

from .hilbert import Line, PhotonKet, SparseState, SymmetrizedKet

L2, L3 = Line.LINE2, Line.LINE3
R = 1 / math.sqrt(2)


def _k(pol: str, line: Line, pos: int) -> PhotonKet:
    return PhotonKet.at(pol, line, pos)


def _sign(branch: int) -> int:
    if branch not in (1, 2, 3, 4):
        raise ValueError(f"branch must be 1..4, got {branch}")
    return 1 if branch in (1, 3) else -1


def after_first_step(branch: int, a: float, b: float, exchanged: bool = True) -> SparseState:
    """After coins and shift of step one, with or without the path exchange."""
    s = _sign(branch)
    n = math.sqrt(a**4 + b**4)
    # a photon that ends at -1 switches line when the paths are exchanged
    m2 = L3 if exchanged else L2
    m3 = L2 if exchanged else L3
    if branch in (1, 2):
        return SparseState.ordered(
            {
                (_k("H", L2, 1), _k("V", m3, -1)): a * a / n,
                (_k("V", m2, -1), _k("H", L3, 1)): s * b * b / n,
            }
        )
    return SparseState.ordered(
        {
            (_k("H", L2, 1), _k("H", L3, 1)): R,
            (_k("V", m2, -1), _k("V", m3, -1)): s * R,
        }
    )


def after_second_step(branch: int, a: float, b: float) -> SparseState:
    """Bunched picture after step two (Fock amplitudes)."""
    s = _sign(branch)
    f = SymmetrizedKet.of
    if branch in (1, 2):
        n = math.sqrt(a**4 + b**4)
        return SparseState.symmetric(
            {
                f(_k("H", L2, 0), _k("V", L2, 0)): a * a / n,
                f(_k("H", L3, 0), _k("V", L3, 0)): s * b * b / n,
            }
        )
    return SparseState.symmetric(
        {
            f(_k("V", L2, 0), _k("V", L3, 0)): R,
            f(_k("H", L2, 0), _k("H", L3, 0)): s * R,
        }
    )


def final_synchronized(branch: int, a: float, b: float) -> SparseState:
    """Output of the full circuit for identical, synchronized photons."""
    s = _sign(branch)
    f = SymmetrizedKet.of
    if branch in (1, 2):
        n = math.sqrt(a**4 + b**4)
        c = R / n
        return SparseState.symmetric(
            {
                f(_k("H", L2, 1), _k("H", L2, 1)): c * a * a,
                f(_k("H", L3, 1), _k("H", L3, 1)): c * s * b * b,
                f(_k("V", L2, -1), _k("V", L2, -1)): -c * a * a,
                f(_k("V", L3, -1), _k("V", L3, -1)): -c * s * b * b,
            }
        )
    if branch == 3:
        return SparseState.symmetric(
            {
                f(_k("H", L2, 1), _k("H", L3, 1)): R,
                f(_k("V", L2, -1), _k("V", L3, -1)): R,
            }
        )
    return SparseState.symmetric(
        {
            f(_k("H", L2, 1), _k("V", L3, -1)): -R,
            f(_k("V", L2, -1), _k("H", L3, 1)): -R,
        }
    )


def final_asynchronous(branch: int, a: float, b: float) -> SparseState:
    """Output for distinguishable photons, branches 1 and 2 only."""
    s = _sign(branch)
    if branch not in (1, 2):
        raise ValueError("only the same-line branches 1 and 2 have a closed form here")
    n = math.sqrt(a**4 + b**4)
    c = 1 / (2 * n)
    h2, v2 = _k("H", L2, 1), _k("V", L2, -1)
    h3, v3 = _k("H", L3, 1), _k("V", L3, -1)
    A, B = c * a * a, c * s * b * b
    return SparseState.ordered(
        {
            (h2, h2): A,
            (h2, v2): A,
            (v2, h2): -A,
            (v2, v2): -A,
            (h3, h3): B,
            (h3, v3): -B,
            (v3, h3): B,
            (v3, v3): -B,
        }
    )
