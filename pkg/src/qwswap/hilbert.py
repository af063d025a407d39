"""Sparse state vectors for one or two photons on the two-line lattice.

A photon is labelled by its polarization (the walker's coin) and its mode,
i.e. which line it is on and the lattice site along that line.  Two-photon
states come in two flavours:

* ``ORDERED``: keys are ``(photon_2, photon_3)`` pairs.  The slot carries the
  photon's identity, so the photons are distinguishable.
* ``SYMMETRIC``: keys are :class:`SymmetrizedKet` multisets and amplitudes
  are coefficients on normalized occupation-number (Fock) states.  This is
  the bosonic picture of two indistinguishable photons.

States are immutable; every operation returns a new state.
"""

from __future__ import annotations

import cmath
import math
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import total_ordering
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Union

DEFAULT_TOLERANCE = 1e-12
SQRT2 = math.sqrt(2.0)


class Polarization(IntEnum):
    H = 0
    V = 1

    def __str__(self) -> str:
        return self.name


class Line(IntEnum):
    LINE2 = 2
    LINE3 = 3

    @property
    def other(self) -> Line:
        return Line.LINE3 if self is Line.LINE2 else Line.LINE2

    def __str__(self) -> str:
        return f"line{self.value}"


@dataclass(frozen=True, order=True)
class Mode:
    line: Line
    position: int

    def __str__(self) -> str:
        return f"{self.position:+d}_{self.line.value}"


@total_ordering
@dataclass(frozen=True)
class PhotonKet:
    """Single-photon basis label ``|pol, position_line>``.

    Canonical order is (line, position, pol).
    """

    pol: Polarization
    mode: Mode

    @classmethod
    def at(cls, pol: Polarization | str, line: Line | int, position: int) -> PhotonKet:
        if isinstance(pol, str):
            pol = Polarization[pol]
        return cls(Polarization(pol), Mode(Line(line), int(position)))

    @property
    def line(self) -> Line:
        return self.mode.line

    @property
    def position(self) -> int:
        return self.mode.position

    def sort_key(self) -> tuple[int, int, int]:
        return (int(self.mode.line), self.mode.position, int(self.pol))

    def __lt__(self, other: PhotonKet) -> bool:
        if not isinstance(other, PhotonKet):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return f"{self.pol},{self.mode}"


@total_ordering
@dataclass(frozen=True)
class SymmetrizedKet:
    """Unordered pair of photon labels; ``first <= second`` always."""

    first: PhotonKet
    second: PhotonKet

    def __post_init__(self) -> None:
        if self.second < self.first:
            raise ValueError("SymmetrizedKet labels must be sorted; use SymmetrizedKet.of")

    @classmethod
    def of(cls, x: PhotonKet, y: PhotonKet) -> SymmetrizedKet:
        return cls(x, y) if not y < x else cls(y, x)

    @property
    def bunched(self) -> bool:
        return self.first == self.second

    def labels(self) -> tuple[PhotonKet, PhotonKet]:
        return (self.first, self.second)

    def __lt__(self, other: SymmetrizedKet) -> bool:
        if not isinstance(other, SymmetrizedKet):
            return NotImplemented
        return (self.first, self.second) < (other.first, other.second)

    def __str__(self) -> str:
        return f"{{{self.first}; {self.second}}}"


class Kind(Enum):
    SINGLE = "single"
    ORDERED = "ordered"
    SYMMETRIC = "symmetric"

    @property
    def arity(self) -> int:
        return 1 if self is Kind.SINGLE else 2


Key = Union[PhotonKet, tuple[PhotonKet, PhotonKet], SymmetrizedKet]


def _check_key(key: Key, kind: Kind) -> None:
    if kind is Kind.SINGLE:
        ok = isinstance(key, PhotonKet)
    elif kind is Kind.ORDERED:
        ok = (
            isinstance(key, tuple)
            and len(key) == 2
            and all(isinstance(k, PhotonKet) for k in key)
        )
    else:
        ok = isinstance(key, SymmetrizedKet)
    if not ok:
        raise TypeError(f"key {key!r} is not a valid {kind.value} basis label")


@dataclass(frozen=True)
class SparseState:
    """Immutable map from basis labels to complex amplitudes.

    Amplitudes with modulus below ``tolerance`` are dropped on construction.
    """

    terms: Mapping[Key, complex]
    kind: Kind
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self) -> None:
        clean: dict[Key, complex] = {}
        for key, amp in self.terms.items():
            _check_key(key, self.kind)
            amp = complex(amp)
            if not (math.isfinite(amp.real) and math.isfinite(amp.imag)):
                raise ValueError(f"non-finite amplitude for {key}")
            if abs(amp) >= self.tolerance:
                clean[key] = amp
        ordered = dict(sorted(clean.items(), key=lambda kv: _key_order(kv[0])))
        object.__setattr__(self, "terms", MappingProxyType(ordered))

    @classmethod
    def single(cls, terms: Mapping[PhotonKet, complex], **kw) -> SparseState:
        return cls(dict(terms), Kind.SINGLE, **kw)

    @classmethod
    def ordered(cls, terms: Mapping[tuple[PhotonKet, PhotonKet], complex], **kw) -> SparseState:
        return cls(dict(terms), Kind.ORDERED, **kw)

    @classmethod
    def symmetric(cls, terms: Mapping[SymmetrizedKet, complex], **kw) -> SparseState:
        return cls(dict(terms), Kind.SYMMETRIC, **kw)

    @classmethod
    def basis(cls, key: Key) -> SparseState:
        if isinstance(key, PhotonKet):
            return cls.single({key: 1.0})
        if isinstance(key, SymmetrizedKet):
            return cls.symmetric({key: 1.0})
        return cls.ordered({key: 1.0})

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def amplitude(self, key: Key) -> complex:
        return self.terms.get(key, 0j)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    def scale(self, factor: complex) -> SparseState:
        return self._with({k: factor * a for k, a in self.terms.items()})

    def __add__(self, other: SparseState) -> SparseState:
        _require_same_kind(self, other)
        acc: dict[Key, complex] = defaultdict(complex, self.terms)
        for k, a in other.terms.items():
            acc[k] += a
        return self._with(acc)

    def __sub__(self, other: SparseState) -> SparseState:
        return self + other.scale(-1)

    def __mul__(self, factor: complex) -> SparseState:
        return self.scale(factor)

    __rmul__ = __mul__

    def _with(self, terms: Mapping[Key, complex]) -> SparseState:
        return SparseState(dict(terms), self.kind, self.tolerance)

    def photons(self) -> Iterable[PhotonKet]:
        """Every photon label appearing in any stored term."""
        for key in self.terms:
            yield from _labels(key)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({_fmt(a)})|{_fmt_key(k)}>" for k, a in self.terms.items())


def _labels(key: Key) -> tuple[PhotonKet, ...]:
    if isinstance(key, PhotonKet):
        return (key,)
    if isinstance(key, SymmetrizedKet):
        return key.labels()
    return key


def _key_order(key: Key):
    return tuple(k.sort_key() for k in _labels(key))


def _fmt(a: complex) -> str:
    if abs(a.imag) < 1e-15:
        return f"{a.real:+.12g}"
    return f"{a.real:+.12g}{a.imag:+.12g}j"


def _fmt_key(key: Key) -> str:
    if isinstance(key, PhotonKet):
        return str(key)
    if isinstance(key, SymmetrizedKet):
        return str(key)
    return f"{key[0]}>_2|{key[1]}"


def _require_same_kind(s1: SparseState, s2: SparseState) -> None:
    if s1.kind.arity != s2.kind.arity:
        raise ValueError("basis arity mismatch")
    if s1.kind is not s2.kind:
        raise ValueError(
            f"basis representation mismatch ({s1.kind.value} vs {s2.kind.value})"
        )


def inner_product(s1: SparseState, s2: SparseState) -> complex:
    """``<s1|s2>``, conjugate-linear in ``s1``."""
    _require_same_kind(s1, s2)
    small, large = (s1, s2) if len(s1) <= len(s2) else (s2, s1)
    total = 0j
    for key in small.terms:
        if key in large.terms:
            total += s1.terms[key].conjugate() * s2.terms[key]
    return total


def norm(s: SparseState) -> float:
    return s.norm()


def normalize(s: SparseState) -> SparseState:
    n = s.norm()
    if n <= s.tolerance:
        raise ValueError("cannot normalize null state")
    return s.scale(1.0 / n)


def max_amplitude_error(s1: SparseState, s2: SparseState, up_to_phase: bool = False) -> float:
    """Largest ``|s1[k] - e^{i phi} s2[k]|`` over the union of supports.

    With ``up_to_phase`` the phase ``phi`` is the one maximising the overlap,
    ``arg <s2|s1>``; otherwise ``phi = 0``.
    """
    _require_same_kind(s1, s2)
    phase = 1.0 + 0j
    if up_to_phase:
        overlap = inner_product(s2, s1)
        if abs(overlap) > 0:
            phase = overlap / abs(overlap)
    keys = set(s1.terms) | set(s2.terms)
    return max(
        (abs(s1.amplitude(k) - phase * s2.amplitude(k)) for k in keys),
        default=0.0,
    )


def states_equal(
    s1: SparseState, s2: SparseState, atol: float = 1e-12, up_to_phase: bool = False
) -> bool:
    return max_amplitude_error(s1, s2, up_to_phase=up_to_phase) < atol


def tensor(photon2: SparseState, photon3: SparseState) -> SparseState:
    """Ordered two-photon product ``|photon2>_2 |photon3>_3``."""
    if photon2.kind is not Kind.SINGLE or photon3.kind is not Kind.SINGLE:
        raise ValueError("basis arity mismatch")
    return SparseState.ordered(
        {(k2, k3): a2 * a3 for k2, a2 in photon2 for k3, a3 in photon3}
    )


def global_phase(angle: float) -> complex:
    return cmath.exp(1j * angle)


# A single-photon linear map: label -> iterable of (label, amplitude).
LocalMap = Callable[[PhotonKet], Iterable[tuple[PhotonKet, complex]]]


def apply_local(state: SparseState, op: LocalMap) -> SparseState:
    """Apply the same one-photon linear map to every photon in ``state``.

    For ``SYMMETRIC`` states the map acts on creation operators:
    ``a+_x -> sum_x' u(x'|x) a+_x'``, which is exactly ``U (x) U`` restricted
    to the bosonic subspace.
    """
    acc: dict[Key, complex] = defaultdict(complex)
    if state.kind is Kind.SINGLE:
        for k, a in state:
            for k2, u in op(k):
                acc[k2] += a * u
    elif state.kind is Kind.ORDERED:
        for (k2, k3), a in state:
            img3 = list(op(k3))
            for m2, u2 in op(k2):
                for m3, u3 in img3:
                    acc[(m2, m3)] += a * u2 * u3
    else:
        for key, a in state:
            # a+_x a+_y |0> for x != y is normalized; (a+_x)^2 |0> has norm sqrt2.
            weight = a / SQRT2 if key.bunched else a
            img_y = list(op(key.second))
            for mx, ux in op(key.first):
                for my, uy in img_y:
                    out = SymmetrizedKet.of(mx, my)
                    c = weight * ux * uy
                    acc[out] += c * SQRT2 if out.bunched else c
    return state._with(acc)
