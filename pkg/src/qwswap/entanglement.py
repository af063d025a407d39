"""Two-qubit polarization states of the remote photons 1 and 4.

Vectors are in the basis (HH, HV, VH, VV).
"""

from __future__ import annotations

from enum import Enum

import numpy as np

_R = 1 / np.sqrt(2)


class BellState(Enum):
    PSI_PLUS = "psi+"  # (HH + VV)/sqrt2
    PSI_MINUS = "psi-"  # (HH - VV)/sqrt2
    PHI_PLUS = "phi+"  # (HV + VH)/sqrt2
    PHI_MINUS = "phi-"  # (HV - VH)/sqrt2

    @property
    def vector(self) -> np.ndarray:
        return _BELL[self].copy()


# Naming follows the swapping literature used here: psi pairs equal
# polarizations, phi pairs opposite ones.
_BELL = {
    BellState.PSI_PLUS: np.array([_R, 0, 0, _R], dtype=complex),
    BellState.PSI_MINUS: np.array([_R, 0, 0, -_R], dtype=complex),
    BellState.PHI_PLUS: np.array([0, _R, _R, 0], dtype=complex),
    BellState.PHI_MINUS: np.array([0, _R, -_R, 0], dtype=complex),
}

_SIGMA_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def concurrence(state, atol: float = 1e-9) -> float:
    """``2|alpha delta - beta gamma|`` for a normalized pure two-qubit state."""
    v = np.asarray(state, dtype=complex).reshape(-1)
    if v.shape != (4,):
        raise ValueError("expected a two-qubit state vector of length 4")
    if abs(np.vdot(v, v).real - 1) > atol:
        raise ValueError("state is not normalized")
    alpha, beta, gamma, delta = v
    return float(2 * abs(alpha * delta - beta * gamma))


def mixed_concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    rho = np.asarray(rho, dtype=complex)
    rho = rho / np.trace(rho).real
    rho_tilde = _SIGMA_YY @ rho.conj() @ _SIGMA_YY
    eig = np.linalg.eigvals(rho @ rho_tilde)
    lam = np.sort(np.sqrt(np.clip(eig.real, 0, None)))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def fidelity(rho, target) -> float:
    """``<target| rho |target>`` for a normalized pure target."""
    rho = np.asarray(rho, dtype=complex)
    t = np.asarray(target, dtype=complex)
    return float(np.real(np.vdot(t, rho @ t)) / np.trace(rho).real)


def pure_density(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def dominant_pure_state(rho) -> tuple[np.ndarray, float]:
    """Leading eigenvector and its weight; weight 1 means ``rho`` is pure."""
    rho = np.asarray(rho, dtype=complex)
    rho = rho / np.trace(rho).real
    w, vecs = np.linalg.eigh(rho)
    v = vecs[:, -1]
    # fix the global phase so the largest component is real positive
    j = int(np.argmax(np.abs(v)))
    v = v * np.exp(-1j * np.angle(v[j]))
    return v, float(w[-1])
