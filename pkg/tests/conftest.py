import math

import numpy as np
import pytest

from qwswap.hilbert import Line, PhotonKet, Polarization, SparseState, SymmetrizedKet

SITES = range(-6, 7)
# dense single-photon basis for the brute-force oracle
BASIS = [PhotonKet.at(p, line, x) for line in Line for x in SITES for p in Polarization]
INDEX = {k: i for i, k in enumerate(BASIS)}
DIM = len(BASIS)

COEFFICIENT_PAIRS = [
    (1 / math.sqrt(2), 1 / math.sqrt(2)),
    (0.8, 0.6),
    (0.6, 0.8),
    (0.95, math.sqrt(1 - 0.95**2)),
    (0.3, math.sqrt(0.91)),
]


def dense_step(step) -> np.ndarray:
    """Single-photon matrix of one walk step, built entry by entry."""
    m = np.zeros((DIM, DIM), dtype=complex)
    for k in BASIS:
        phase = 1.0
        for r in step.retarders:
            if k.line is r.line and k.position == r.position:
                phase *= np.exp(1j * r.phase)
        coin = step.coin_line2 if k.line is Line.LINE2 else step.coin_line3
        for p_out in Polarization:
            amp = phase * coin.matrix[int(p_out), int(k.pol)]
            pos = k.position + ((1 if p_out is Polarization.H else -1) if step.do_shift else 0)
            line = k.line
            if step.exchange is not None and pos == step.exchange.position:
                line = line.other
            out = PhotonKet.at(p_out, line, pos)
            if out in INDEX:  # edge of the window; test states never reach it
                m[INDEX[out], INDEX[k]] += amp
    return m


def to_dense(state: SparseState) -> np.ndarray:
    if state.kind.value == "single":
        v = np.zeros(DIM, dtype=complex)
        for k, a in state:
            v[INDEX[k]] += a
        return v
    v = np.zeros((DIM, DIM), dtype=complex)
    for key, a in state:
        if isinstance(key, SymmetrizedKet):
            x, y = key.first, key.second
            if key.bunched:
                v[INDEX[x], INDEX[x]] += a
            else:
                v[INDEX[x], INDEX[y]] += a / math.sqrt(2)
                v[INDEX[y], INDEX[x]] += a / math.sqrt(2)
        else:
            v[INDEX[key[0]], INDEX[key[1]]] += a
    return v


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_ordered_state(rng, n_terms=6, span=2, normalized=True) -> SparseState:
    terms = {}
    for _ in range(n_terms):
        k2 = PhotonKet.at(int(rng.integers(2)), 2 + int(rng.integers(2)), int(rng.integers(-span, span + 1)))
        k3 = PhotonKet.at(int(rng.integers(2)), 2 + int(rng.integers(2)), int(rng.integers(-span, span + 1)))
        terms[(k2, k3)] = complex(rng.normal(), rng.normal())
    s = SparseState.ordered(terms)
    return s.scale(1 / s.norm()) if normalized else s
