"""Signed Pauli strings in symplectic form, plus Pauli-basis decomposition.

A string on ``n`` qubits is stored as two bitmasks and a phase exponent::

    P = i**phase * sigma(x_0, z_0) (x) ... (x) sigma(x_{n-1}, z_{n-1})

with ``sigma(0,0)=I``, ``sigma(1,0)=X``, ``sigma(0,1)=Z``, ``sigma(1,1)=Y``.
Bit ``q`` of each mask refers to qubit ``q``. Qubit 0 is the most significant
tensor factor in every dense matrix and state vector of this package.

Because ``Y`` is stored directly (rather than as ``iXZ``), a string is
Hermitian exactly when ``phase`` is even.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce

import numpy as np

MAX_DENSE_QUBITS = 12
MAX_DECOMPOSE_SUPPORT = 6
HERMITIAN_TOL = 1e-10
DROP_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)

LETTER_MATRIX = {"I": I2, "X": X2, "Y": Y2, "Z": Z2}
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}
_PHASE_TEXT = {0: "", 1: "i", 2: "-", 3: "-i"}


class PauliError(ValueError):
    """Raised for malformed Pauli strings or incompatible operands."""


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise PauliError(f"negative qubit count {self.n}")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise PauliError(f"bitmask out of range for n={self.n}")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(n)

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse ``"-XIZY"``-style text. Accepted prefixes: ``+ - i -i +i``."""
        text = label.strip()
        phase = 0
        for prefix, p in (("-i", 3), ("+i", 1), ("i", 1), ("-", 2), ("+", 0)):
            if text.startswith(prefix):
                phase = p
                text = text[len(prefix):]
                break
        if not text:
            raise PauliError(f"no Pauli letters in {label!r}")
        x = z = 0
        for q, ch in enumerate(text):
            if ch not in _LETTER_BITS:
                raise PauliError(f"bad Pauli letter {ch!r} in {label!r}")
            xb, zb = _LETTER_BITS[ch]
            x |= xb << q
            z |= zb << q
        return cls(len(text), x, z, phase)

    @classmethod
    def from_letters(cls, n: int, letters: dict[int, str], phase: int = 0) -> PauliString:
        """Build a string with the given letter on each listed qubit, identity elsewhere."""
        x = z = 0
        for q, ch in letters.items():
            if not 0 <= q < n:
                raise PauliError(f"qubit {q} out of range for n={n}")
            xb, zb = _LETTER_BITS[ch]
            x |= xb << q
            z |= zb << q
        return cls(n, x, z, phase)

    def letter(self, q: int) -> str:
        return _BITS_LETTER[((self.x >> q) & 1, (self.z >> q) & 1)]

    @property
    def letters(self) -> str:
        return "".join(self.letter(q) for q in range(self.n))

    @property
    def support(self) -> tuple[int, ...]:
        mask = self.x | self.z
        return tuple(q for q in range(self.n) if (mask >> q) & 1)

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def sign(self) -> int:
        """The real prefactor +1/-1 of a Hermitian string."""
        if not self.is_hermitian:
            raise PauliError(f"{self} is not Hermitian")
        return 1 if self.phase == 0 else -1

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def unsigned(self) -> PauliString:
        return PauliString(self.n, self.x, self.z, 0)

    def __mul__(self, other: PauliString) -> PauliString:
        return multiply(self, other)

    def __neg__(self) -> PauliString:
        return PauliString(self.n, self.x, self.z, self.phase + 2)

    def __str__(self) -> str:
        return _PHASE_TEXT[self.phase] + self.letters

    def to_dense(self) -> np.ndarray:
        return to_dense(self)


def _check_same_size(p: PauliString, q: PauliString) -> None:
    if p.n != q.n:
        raise PauliError(f"size mismatch: {p.n} vs {q.n} qubits")


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Symbolic product ``p @ q`` with exact phase."""
    _check_same_size(p, q)
    x3 = p.x ^ q.x
    z3 = p.z ^ q.z
    # sigma(x,z) = i^(x.z) X^x Z^z and Z^z1 X^x2 = (-1)^(z1.x2) X^x2 Z^z1
    exponent = (
        p.phase
        + q.phase
        + _popcount(p.x & p.z)
        + _popcount(q.x & q.z)
        - _popcount(x3 & z3)
        + 2 * _popcount(p.z & q.x)
    )
    return PauliString(p.n, x3, z3, exponent)


def product(strings, n: int | None = None) -> PauliString:
    strings = list(strings)
    if not strings:
        if n is None:
            raise PauliError("empty product needs an explicit qubit count")
        return PauliString.identity(n)
    return reduce(multiply, strings)


def commutes(p: PauliString, q: PauliString) -> bool:
    _check_same_size(p, q)
    return (_popcount(p.x & q.z) + _popcount(p.z & q.x)) % 2 == 0


def to_dense(p: PauliString) -> np.ndarray:
    if p.n > MAX_DENSE_QUBITS:
        raise PauliError(f"dense form capped at {MAX_DENSE_QUBITS} qubits, got {p.n}")
    mats = [LETTER_MATRIX[p.letter(q)] for q in range(p.n)]
    out = reduce(np.kron, mats, np.ones((1, 1), dtype=complex))
    return (1j**p.phase) * out


def _dense_masks(p: PauliString) -> tuple[int, int]:
    """Masks in basis-index convention (qubit q is bit n-1-q of the index)."""
    xm = zm = 0
    for q in range(p.n):
        if (p.x >> q) & 1:
            xm |= 1 << (p.n - 1 - q)
        if (p.z >> q) & 1:
            zm |= 1 << (p.n - 1 - q)
    return xm, zm


def action(p: PauliString) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(target, coeff)`` with ``P|b> = coeff[b] |target[b]>``."""
    if p.n > MAX_DENSE_QUBITS:
        raise PauliError(f"dense action capped at {MAX_DENSE_QUBITS} qubits, got {p.n}")
    xm, zm = _dense_masks(p)
    idx = np.arange(1 << p.n, dtype=np.int64)
    signs = 1 - 2 * (np.bitwise_count(idx & zm).astype(np.int64) & 1)
    coeff = (1j ** ((p.phase + _popcount(p.x & p.z)) % 4)) * signs
    return idx ^ xm, coeff.astype(complex)


def apply(p: PauliString, vec: np.ndarray) -> np.ndarray:
    target, coeff = action(p)
    out = np.empty_like(vec, dtype=complex)
    out[target] = coeff * vec
    return out


@dataclass(frozen=True)
class WeightedPauliTerm:
    string: PauliString
    coeff: float

    def __post_init__(self) -> None:
        if self.string.phase != 0:
            raise PauliError("weighted terms carry sign in coeff; string phase must be +1")
        if not np.isfinite(self.coeff):
            raise PauliError(f"non-finite coefficient {self.coeff}")
        object.__setattr__(self, "coeff", float(self.coeff))


def embed(local: PauliString, support, n: int) -> PauliString:
    """Place a ``len(support)``-qubit string onto ``support`` inside ``n`` qubits."""
    support = list(support)
    if local.n != len(support):
        raise PauliError("support length does not match local string size")
    if len(set(support)) != len(support):
        raise PauliError(f"repeated qubit in support {support}")
    letters = {s: local.letter(i) for i, s in enumerate(support)}
    return PauliString.from_letters(n, letters, local.phase)


def all_strings(k: int):
    for letters in itertools.product("IXYZ", repeat=k):
        yield PauliString.from_label("".join(letters))


def decompose(h, support, n: int) -> list[WeightedPauliTerm]:
    """Pauli coefficients ``Tr(S h) / 2^k`` of a Hermitian ``h`` acting on ``support``."""
    h = np.asarray(h, dtype=complex)
    support = list(support)
    k = len(support)
    if k > MAX_DECOMPOSE_SUPPORT:
        raise PauliError(f"support of size {k} exceeds cap {MAX_DECOMPOSE_SUPPORT}")
    if h.shape != (1 << k, 1 << k):
        raise PauliError(f"matrix shape {h.shape} does not match support size {k}")
    if any(not 0 <= s < n for s in support):
        raise PauliError(f"support {support} out of range for n={n}")
    if np.max(np.abs(h - h.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise PauliError("operator is not Hermitian")
    terms = []
    for s in all_strings(k):
        target, coeff = action(s)
        # Tr(S h) = sum_b <b|S h|b> = sum_c coeff[c] h[c, b] with S|c> -> |target[c]> = |b>
        c = np.sum(coeff * h[np.arange(1 << k), target]).real / (1 << k)
        if abs(c) >= DROP_TOL:
            terms.append(WeightedPauliTerm(embed(s, support, n), c))
    return terms


def reconstruct(terms, n: int) -> np.ndarray:
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for t in terms:
        out += t.coeff * to_dense(t.string)
    return out
