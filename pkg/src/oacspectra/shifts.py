"""Shift function geometry: coexisting intervals, active sets, and censuses.

Flipping the bits of x at positions j^d = {j_1 < ... < j_d} (position j is
machine bit j-1) moves ell by the shift function

    tau(j^d, b^d) = (1 - 2^-r) * sum_d' (1 - 2 b_d') * 2^(r * j_d'),

where b^d are the current bit values at those positions.  The flipped word
lands in the same coset exactly when ell(x) falls inside the coexisting
interval of its unit interval, whose length is max(0, 1 - |tau|).  Counting
quantized shifts over all (j^d, b^d) yields the empirical distribution of
the normalized shift W = tau * 2^-nr, which ties Hamming distance counts to
the coset cardinality spectrum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from .encoder import INT_GUARD, BitBlock, CodeParams, encode
from .errors import (
    IdentityViolation,
    IndexOutOfRange,
    LengthMismatch,
    TooLarge,
    UnsupportedProfile,
)

# Admits the full n=20 census: sum_d C(n,d) 2^d = 3^20 ~ 3.5e9 shift values.
DEFAULT_ENUM_BUDGET = 4.2e9

# Work one block of at most this many floats at a time (32 MiB).
_BLOCK_FLOATS = 1 << 22

# Above this many sign patterns, per-set doubling beats the sign matmul.
_MATMUL_MAX_D = 16

_ACTIVE_SET_MAX_D = 26


@dataclass(frozen=True)
class IndexSet:
    """Strictly increasing flip positions j_1 < ... < j_d, each in [1, n]."""

    positions: tuple[int, ...]

    def __post_init__(self) -> None:
        pos = self.positions
        if any(p < 1 for p in pos) or any(a >= b for a, b in zip(pos, pos[1:])):
            raise ValueError(f"positions must be strictly increasing and >= 1: {pos}")

    @classmethod
    def of(cls, *positions: int) -> "IndexSet":
        return cls(tuple(positions))

    @classmethod
    def full(cls, n: int) -> "IndexSet":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def gap(cls, n: int, k: int) -> "IndexSet":
        """All of [1, n] except position n - k + 1 (gap k slots from the top)."""
        if not (1 <= k <= n):
            raise ValueError(f"gap index k={k} outside [1, {n}]")
        skip = n - k + 1
        return cls(tuple(j for j in range(1, n + 1) if j != skip))

    @property
    def d(self) -> int:
        return len(self.positions)

    def mask(self) -> int:
        """Machine-word XOR mask flipping exactly these positions."""
        m = 0
        for j in self.positions:
            m |= 1 << (j - 1)
        return m

    def __str__(self) -> str:
        return ",".join(str(j) for j in self.positions)


@dataclass(frozen=True)
class CoexInterval:
    """The half-open slice of (m-1, m] on which a flip keeps the coset."""

    m: int
    lo: float
    hi: float
    empty: bool

    @property
    def length(self) -> float:
        return 0.0 if self.empty else self.hi - self.lo

    def contains(self, ell: float) -> bool:
        if self.empty:
            return False
        g = INT_GUARD * max(1.0, abs(ell))
        if abs(ell - self.hi) <= g:  # closed upper endpoint
            return True
        if abs(ell - self.lo) <= g:  # open lower endpoint
            return False
        return self.lo < ell <= self.hi


def _weights(p: CodeParams) -> np.ndarray:
    """(1 - 2^-r) * 2^(r*j) for j = 1..n (index j-1)."""
    rv = p.r_value
    j = np.arange(1, p.n + 1, dtype=np.float64)
    return (1.0 - 2.0 ** (-rv)) * 2.0 ** (rv * j)


def tau(j: IndexSet, b: Sequence[int] | BitBlock, p: CodeParams) -> float:
    """Shift caused by flipping positions j when their current bits are b."""
    bits = b.bits if isinstance(b, BitBlock) else tuple(b)
    if len(bits) != j.d:
        raise LengthMismatch(f"{len(bits)} bits for a {j.d}-position set")
    if j.positions and j.positions[-1] > p.n:
        raise IndexOutOfRange(f"position {j.positions[-1]} > n = {p.n}")
    rv = p.r_value
    c = 1.0 - 2.0 ** (-rv)
    return c * sum((1 - 2 * bi) * 2.0 ** (rv * ji) for ji, bi in zip(j.positions, bits))


def _signed_sums(weights: np.ndarray) -> np.ndarray:
    """All 2^d values sum_t s_t w_t; bit t of the index set means s_t = -1."""
    t = np.zeros(1, dtype=np.float64)
    for w in weights:
        t = np.concatenate([t + w, t - w])
    return t


def tau_values_for_j(
    j: IndexSet, p: CodeParams, *, base_d: int = 20
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (start_index, values) chunks of tau(j, b) over all b in B^d.

    Index bit t corresponds to b_{t+1}; chunking keeps memory flat for
    large d by enumerating sign choices of the trailing positions.
    """
    w = _weights(p)[np.array(j.positions, dtype=np.int64) - 1]
    d = j.d
    if d == 0:
        yield 0, np.zeros(1, dtype=np.float64)
        return
    db = min(d, base_d)
    base = _signed_sums(w[:db])
    tail = w[db:]
    for t_idx in range(1 << (d - db)):
        off = 0.0
        for t in range(d - db):
            off += -tail[t] if (t_idx >> t) & 1 else tail[t]
        yield t_idx << db, base + off


def _sign_matrix_t(d: int) -> np.ndarray:
    """(d, 2^d) matrix of (1 - 2 b) signs, column index encoding b."""
    b = np.arange(1 << d, dtype=np.uint32)[None, :]
    bits = (b >> np.arange(d, dtype=np.uint32)[:, None]) & 1
    return 1.0 - 2.0 * bits.astype(np.float64)


def enumeration_work(n: int, d: int, scope: Optional[IndexSet]) -> float:
    return float(1 << d) if scope is not None else float(math.comb(n, d) * (1 << d))


def iter_tau_blocks(
    p: CodeParams,
    d: int,
    *,
    scope: Optional[IndexSet] = None,
    budget: float = DEFAULT_ENUM_BUDGET,
) -> Iterator[np.ndarray]:
    """Yield blocks of shift values over (j^d, b^d).

    ``scope=None`` runs over every j^d in J_{n,d} (batched as sign-matrix
    products); an explicit IndexSet restricts to that single set.
    """
    if not (0 <= d <= p.n):
        raise ValueError(f"distance d={d} outside [0, {p.n}]")
    if enumeration_work(p.n, d, scope) > budget:
        raise TooLarge(
            f"2^{d} * C({p.n},{d}) shift evaluations exceed budget {budget:.3g}"
        )
    if scope is not None:
        if scope.d != d:
            raise LengthMismatch(f"scope has {scope.d} positions, d={d}")
        for _, vals in tau_values_for_j(scope, p):
            yield vals
        return
    if d == 0:
        yield np.zeros(1, dtype=np.float64)
        return
    wpos = _weights(p)
    combos = itertools.combinations(range(1, p.n + 1), d)
    if d <= _MATMUL_MAX_D:
        sgn_t = _sign_matrix_t(d)
        rows = max(1, _BLOCK_FLOATS >> d)
        while True:
            chunk = list(itertools.islice(combos, rows))
            if not chunk:
                return
            w = wpos[np.asarray(chunk, dtype=np.int64) - 1]
            yield w @ sgn_t
    else:
        for combo in combos:
            for _, vals in tau_values_for_j(IndexSet(combo), p):
                yield vals


def quantize_shift(tau_vals: np.ndarray) -> np.ndarray:
    """t = sgn(tau) * ceil(|tau|) with the integer guard on exact boundaries."""
    a = np.abs(tau_vals)
    near = np.rint(a)
    snapped = np.where(np.abs(a - near) <= INT_GUARD * np.maximum(1.0, a), near, np.ceil(a))
    return (np.sign(tau_vals) * snapped).astype(np.int64)


@dataclass(frozen=True)
class ShiftHistogram:
    """Counts of the quantized shift t in (-2^nr : 2^nr) for one d.

    ``counts[i]`` holds c(i - tmax); ``n_sets`` is C(n,d) for a full census
    and 1 for a single index set.
    """

    counts: np.ndarray
    tmax: int
    d: int
    params: CodeParams
    scope: str
    n_sets: int

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def count(self, x: int) -> int:
        if abs(x) > self.tmax:
            return 0
        return int(self.counts[x + self.tmax])

    def w_points(self) -> np.ndarray:
        return np.arange(-self.tmax, self.tmax + 1) * 2.0 ** (-self.params.nr)

    def density(self) -> np.ndarray:
        """f_W estimate at the points w = x * 2^-nr."""
        norm = 2.0 ** self.params.nr / (self.n_sets * 2.0 ** self.d)
        return self.counts * norm

    def rebin(self, nbins: int = 64) -> tuple[np.ndarray, np.ndarray]:
        """Aggregate onto nbins equal cells over (-1, 1); returns (centers, density)."""
        x = np.arange(-self.tmax, self.tmax + 1)
        w = x * 2.0 ** (-self.params.nr)
        cell = np.clip(((w + 1.0) * 0.5 * nbins).astype(np.int64), 0, nbins - 1)
        mass = np.bincount(cell, weights=self.counts, minlength=nbins)
        centers = -1.0 + (np.arange(nbins) + 0.5) * (2.0 / nbins)
        dens = mass / self.total * (nbins / 2.0)
        return centers, dens


def shift_census(
    d: int,
    p: CodeParams,
    scope: Optional[IndexSet] = None,
    *,
    budget: float = DEFAULT_ENUM_BUDGET,
) -> ShiftHistogram:
    """Count quantized shifts over all b^d of one j^d, or over all of J_{n,d}."""
    tmax = max(1, int(math.ceil(2.0 ** p.nr - 1.0 - 1e-12)))
    counts = np.zeros(2 * tmax + 1, dtype=np.int64)
    for block in iter_tau_blocks(p, d, scope=scope, budget=budget):
        t = quantize_shift(block).ravel()
        counts += np.bincount(t + tmax, minlength=2 * tmax + 1)
    return ShiftHistogram(
        counts=counts,
        tmax=tmax,
        d=d,
        params=p,
        scope="all" if scope is None else f"j={scope}",
        n_sets=1 if scope is not None else math.comb(p.n, d),
    )


def coexisting_interval(m: int, j: IndexSet, b: Sequence[int], p: CodeParams) -> CoexInterval:
    """The m-th coexisting interval for the flip (j, b); empty when |tau| >= 1."""
    hi_m = 2.0 ** p.nr
    if not (1 <= m < hi_m):
        raise IndexOutOfRange(f"m={m} outside [1, 2^nr)")
    t = tau(j, b, p)
    a = abs(t)
    if abs(a - 1.0) <= INT_GUARD:
        a = 1.0  # exact boundary: empty interval
    if a >= 1.0:
        return CoexInterval(m=m, lo=float(m - 1), hi=float(m - 1), empty=True)
    if t >= 0.0:
        return CoexInterval(m=m, lo=float(m - 1), hi=float(m) - t, empty=False)
    return CoexInterval(m=m, lo=float(m - 1) - t, hi=float(m), empty=False)


def coexists(x: BitBlock, y: BitBlock, p: CodeParams) -> bool:
    """Do x and y share a coset?  Checked two ways, which must agree.

    The direct route compares m(x) and m(y); the geometric route tests
    ell(x) against the coexisting interval of the flip turning x into y.
    """
    if x.n != y.n or x.n != p.n:
        raise LengthMismatch("coexists() needs two n-bit words")
    if x == y:
        raise ValueError("coexists() is defined for distinct words")
    ex = encode(x, p)
    ey = encode(y, p)
    by_index = ex.m == ey.m

    z = x.word ^ y.word
    positions = tuple(k + 1 for k in range(p.n) if (z >> k) & 1)
    j = IndexSet(positions)
    b = tuple((x.word >> (ji - 1)) & 1 for ji in positions)
    if ex.m == 0:
        by_interval = False  # C_0 = {0^n} admits no partner
    else:
        by_interval = coexisting_interval(ex.m, j, b, p).contains(ex.ell)
    if by_index != by_interval:
        raise IdentityViolation(
            f"coset test ({by_index}) and interval test ({by_interval}) disagree "
            f"for x={x} y={y}"
        )
    return by_index


def active_set_size(j: IndexSet, p: CodeParams) -> int:
    """|{b^d : |tau(j, b)| < 1}| with strict inequality at the boundary.

    With an algebraic rate, shifts within the float guard of |tau| = 1 are
    re-decided exactly in Q[x]/(alpha); with a plain float rate they are
    treated as boundary values and excluded.
    """
    if j.d > _ACTIVE_SET_MAX_D:
        raise TooLarge(f"2^{j.d} sign patterns exceed the active-set cap")
    if j.positions and j.positions[-1] > p.n:
        raise IndexOutOfRange(f"position {j.positions[-1]} > n = {p.n}")
    count = 0
    exact = getattr(p.r, "sign_at_root", None)
    for start, vals in tau_values_for_j(j, p):
        a = np.abs(vals)
        count += int((a < 1.0 - INT_GUARD).sum())
        if exact is not None:
            near = np.nonzero(np.abs(a - 1.0) <= INT_GUARD)[0]
            for idx in near:
                if _tau_abs_lt_one_exact(j, int(start + idx), p.r):
                    count += 1
    return count


def _tau_abs_lt_one_exact(j: IndexSet, b_index: int, rate) -> bool:
    """Exact |tau| < 1 test for the b encoded by ``b_index`` (bit t = b_{t+1}).

    tau = (1 - 1/x) * sum s x^j = (x - 1) * sum s x^(j-1), a polynomial in
    x = 2^r; compare against 1 by exact sign tests at the isolated root.
    """
    from . import algebraic  # deferred: algebraic has no numpy dependence on us

    coeffs: dict[int, int] = {}
    for t, ji in enumerate(j.positions):
        s = -1 if (b_index >> t) & 1 else 1
        coeffs[ji - 1] = coeffs.get(ji - 1, 0) + s
    deg = max(coeffs) if coeffs else 0
    base = [coeffs.get(k, 0) for k in range(deg + 1)]
    tau_poly = algebraic.poly_mul(algebraic.poly_from_ints([-1, 1]), algebraic.poly_from_ints(base))
    sgn = rate.sign_at_root(tau_poly)
    if sgn == 0:
        return True  # tau exactly zero
    abs_tau = tau_poly if sgn > 0 else algebraic.poly_neg(tau_poly)
    return rate.sign_at_root(algebraic.poly_sub(abs_tau, algebraic.poly_from_ints([1]))) < 0


def theoretical_w_pdf(
    p: CodeParams,
    f: "Callable[[np.ndarray], np.ndarray]",
    *,
    profile: str = "full",
    k: Optional[int] = None,
    d: Optional[int] = None,
    bins: int = 1024,
) -> tuple[np.ndarray, np.ndarray]:
    """Asymptotic density of the normalized shift W on (-1, 1).

    profile "full" is d = n: w -> f((1-w)/2) / 2.  profile "gap" is
    d = n-1 with the missing position k slots below the top: a 2^(k-1)-term
    mixture of rescaled copies of f shifted by the prefix lower ends
    l(x^(k-1)).  profile "generic" (d close to n) reuses the full-profile
    shape, rescaled to unit mass.
    """
    w = -1.0 + (np.arange(bins) + 0.5) * (2.0 / bins)
    feval = f if callable(f) else f.__call__
    rv = p.r_value
    if profile == "full":
        return w, np.asarray(feval((1.0 - w) / 2.0)) / 2.0
    if profile == "gap":
        if k is None or not (1 <= k <= p.n):
            raise UnsupportedProfile(f"gap profile needs 1 <= k <= n, got {k}")
        if k > 24:
            raise TooLarge(f"gap profile mixes 2^{k - 1} terms")
        s = 2.0 ** rv
        c = 1.0 - (s - 1.0) * 2.0 ** (-k * rv)
        scale = 2.0 ** (k * rv)
        prefac = 2.0 ** (-k * (1.0 - rv))
        # Lower ends of the 2^(k-1) prefix intervals.
        lvals = np.zeros(1, dtype=np.float64)
        for i in range(1, k):
            lvals = np.concatenate([lvals, lvals + (s - 1.0) * 2.0 ** (-i * rv)])
        out = np.zeros(bins, dtype=np.float64)
        for i0 in range(0, len(lvals), 512):
            lv = lvals[i0:i0 + 512]
            args = ((c - w)[:, None] / 2.0 - lv[None, :]) * scale
            out += np.asarray(feval(args.ravel())).reshape(args.shape).sum(axis=1)
        return w, prefac * out
    if profile == "generic":
        if d is None or (p.n - d) > max(1, p.n // 4):
            raise UnsupportedProfile(f"generic profile needs d close to n, got d={d}")
        g = np.asarray(feval((1.0 - w) / 2.0))
        return w, g / (g.sum() * (2.0 / bins))
    raise UnsupportedProfile(f"unknown profile {profile!r}")
