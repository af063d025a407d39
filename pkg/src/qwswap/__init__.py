"""Entanglement swapping of unknown non-maximally entangled photon pairs
with a three-step two-photon quantum-walk circuit."""

from .hilbert import (
    Kind,
    Line,
    Mode,
    PhotonKet,
    Polarization,
    SparseState,
    SymmetrizedKet,
    inner_product,
    normalize,
    states_equal,
)
from .photon_stats import Detector, Regime, detector_distribution, symmetrize
from .protocol import (
    SwapConfig,
    Verdict,
    build_protocol_circuit,
    decompose_initial,
    heralded_outcome,
    run_protocol,
    success_probability,
)
from .walk import Circuit, Coin, ExchangeRule, PhaseRetarder, Step

__version__ = "0.1.0"
