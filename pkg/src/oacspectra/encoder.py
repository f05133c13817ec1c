"""Tailless overlapped arithmetic code encoder and coset partition.

A rate-r code maps a binary word x^n = (x_1, ..., x_n) into [0, 1) by
recursively shrinking the unit interval with overlapping symbol
sub-intervals of relative width 2^-r.  The lower end of the final interval,
scaled by 2^(nr), is

    ell(x^n) = (2^r - 1) * sum_i x_i * 2^((n-i)*r),

and the emitted bitstream index is m(x^n) = ceil(ell(x^n)).  Words sharing
an index form the coset C_m = {x : ell(x) in (m-1, m]}; for r < 1 the map
is many-to-one and the cosets are unequal.

Words are stored as machine integers equal to the bit string read as a
binary number, so flipping bit k (LSB = 0) changes ell by exactly
(2^r - 1) * 2^(k*r).  The shift-function machinery in `shifts` indexes that
same bit as position j = k + 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .errors import LengthMismatch, NonIntegralRate, TooLarge

# Relative tolerance for snapping ell to an integer before the ceiling.
# ell(1^n) = 2^(nr) - 1 and many interior words are exactly integral;
# float drift must not push them across the half-open boundary (m-1, m].
INT_GUARD = 1e-9

# Hard cap for full 2^n enumerations (partition, histograms, pair counts).
ENUM_MAX_N = 24

RateLike = Union[float, "object"]  # plain rate or an AlgebraicRate


def _rate_value(r: RateLike) -> float:
    if hasattr(r, "r_float"):
        return float(r.r_float)
    return float(r)


@dataclass(frozen=True)
class CodeParams:
    """Block length n and overlapping factor r of a tailless code.

    ``r`` may be a plain float in (0, 1] or an :class:`~oacspectra.algebraic.
    AlgebraicRate` giving x = 2^r as the root of an integer polynomial.
    """

    n: int
    r: RateLike

    def __post_init__(self) -> None:
        if not (1 <= self.n <= 64):
            raise ValueError(f"block length n={self.n} outside [1, 64]")
        rv = _rate_value(self.r)
        if not (0.0 < rv <= 1.0):
            raise ValueError(f"rate r={rv} outside (0, 1]")

    @property
    def r_value(self) -> float:
        return _rate_value(self.r)

    @property
    def nr(self) -> float:
        return self.n * self.r_value

    @property
    def nr_integral(self) -> bool:
        return abs(self.nr - round(self.nr)) < INT_GUARD

    @property
    def num_cosets(self) -> int:
        """2^(nr); only defined when n*r is an integer."""
        if not self.nr_integral:
            raise NonIntegralRate(f"n*r = {self.nr} is not an integer")
        return 1 << round(self.nr)

    def require_integral(self) -> None:
        if not self.nr_integral:
            raise NonIntegralRate(f"n*r = {self.nr} is not an integer")


@dataclass(frozen=True)
class BitBlock:
    """A length-n binary word; bits[0] is x_1, the first encoded symbol."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.bits) < 1:
            raise ValueError("empty bit block")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("bit block symbols must be 0 or 1")

    @classmethod
    def from_string(cls, s: str) -> "BitBlock":
        return cls(tuple(int(c) for c in s))

    @classmethod
    def from_word(cls, word: int, n: int) -> "BitBlock":
        if word < 0 or word >> n:
            raise ValueError(f"word {word} does not fit in {n} bits")
        return cls(tuple((word >> (n - 1 - i)) & 1 for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def word(self) -> int:
        """The bit string read as a binary number (x_1 is the MSB)."""
        w = 0
        for b in self.bits:
            w = (w << 1) | b
        return w

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)

    def __xor__(self, other: "BitBlock") -> "BitBlock":
        if other.n != self.n:
            raise LengthMismatch(f"{self.n}-bit block xor {other.n}-bit block")
        return BitBlock(tuple(a ^ b for a, b in zip(self.bits, other.bits)))

    def complement(self) -> "BitBlock":
        return BitBlock(tuple(1 - b for b in self.bits))


@dataclass(frozen=True)
class EncodingResult:
    """Final interval data for one word: l, ell = 2^(nr) * l, and m = ceil(ell)."""

    l: float
    ell: float
    m: int


@dataclass(frozen=True)
class ProjectionTrace:
    """The bitstream index projected back onto every encoding interval."""

    u: np.ndarray  # U_0 .. U_n, each in [0, 1)


@dataclass(frozen=True)
class CosetPartition:
    """All 2^n words grouped by bitstream index m.

    Cosets are sorted integer arrays of machine words; see the module
    docstring for the bit/word convention.
    """

    params: CodeParams
    cosets: dict[int, np.ndarray]

    @property
    def sizes(self) -> dict[int, int]:
        return {m: int(len(c)) for m, c in self.cosets.items()}

    @property
    def total(self) -> int:
        return sum(len(c) for c in self.cosets.values())

    def pair_work(self) -> int:
        """sum_m |C_m|^2, the cost driver of pairwise distance counting."""
        return sum(int(len(c)) ** 2 for c in self.cosets.values())

    def words_of(self, m: int) -> np.ndarray:
        return self.cosets[m]


def snap_ceil(ell: float) -> int:
    """ceil with the integer guard; exact boundaries stay in their coset."""
    r = round(ell)
    if abs(ell - r) <= INT_GUARD * max(1.0, abs(ell)):
        return int(r)
    return int(math.ceil(ell))


def coset_indices(ell: np.ndarray) -> np.ndarray:
    """Vectorized m = ceil(ell) with the same integer guard as `snap_ceil`."""
    near = np.rint(ell)
    guard = INT_GUARD * np.maximum(1.0, np.abs(ell))
    return np.where(np.abs(ell - near) <= guard, near, np.ceil(ell)).astype(np.int64)


def encode(x: BitBlock, p: CodeParams) -> EncodingResult:
    """Encode one word; requires n*r integral so that m is a valid index."""
    if x.n != p.n:
        raise LengthMismatch(f"{x.n}-bit word, n={p.n} code")
    p.require_integral()
    s = 2.0 ** p.r_value
    # Horner over descending exponents: h = sum_i x_i * s^(n-i).
    h = 0.0
    for b in x.bits:
        h = h * s + b
    ell = (s - 1.0) * h
    m = snap_ceil(ell)
    return EncodingResult(l=ell * 2.0 ** (-p.nr), ell=ell, m=m)


def ell_all_words(p: CodeParams, *, max_n: int = ENUM_MAX_N) -> np.ndarray:
    """ell(x) for every word x in [0 : 2^n), indexed by machine word."""
    p.require_integral()
    if p.n > max_n:
        raise TooLarge(f"2^{p.n} words exceed the enumeration cap 2^{max_n}")
    w = np.arange(1 << p.n, dtype=np.uint32)
    scale = 2.0 ** p.r_value - 1.0
    out = np.zeros(w.shape, dtype=np.float64)
    for k in range(p.n - 1, -1, -1):  # descending exponents, as in encode()
        out += ((w >> np.uint32(k)) & np.uint32(1)) * (scale * 2.0 ** (k * p.r_value))
    return out


def partition_cosets(p: CodeParams, *, max_n: int = ENUM_MAX_N) -> CosetPartition:
    """Enumerate all 2^n words and group them by coset index."""
    ell = ell_all_words(p, max_n=max_n)
    m = coset_indices(ell)
    num = p.num_cosets
    order = np.argsort(m, kind="stable").astype(np.uint32)
    bounds = np.searchsorted(m[order], np.arange(num + 1))
    cosets = {
        mi: order[bounds[mi]:bounds[mi + 1]].copy() for mi in range(num)
    }
    return CosetPartition(params=p, cosets=cosets)


def projection_trace(x: BitBlock, p: CodeParams) -> ProjectionTrace:
    """Project m(x) back through the encoding intervals.

    U_0 = 2^(-nr) * m(x) and U_{i+1} = 2^r * (U_i - x_{i+1} * (1 - 2^-r));
    the final projection satisfies U_n = m - ell up to float drift.
    """
    enc = encode(x, p)
    s = 2.0 ** p.r_value
    c = 1.0 - 2.0 ** (-p.r_value)
    u = np.empty(p.n + 1, dtype=np.float64)
    u[0] = enc.m * 2.0 ** (-p.nr)
    for i, b in enumerate(x.bits):
        u[i + 1] = s * (u[i] - b * c)
    return ProjectionTrace(u=u)
