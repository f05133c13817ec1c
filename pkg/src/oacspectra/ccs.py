"""Coset cardinality spectrum (CCS) of a tailless overlapped arithmetic code.

The level-i CCS f_i is the density of the bitstream projection U_i on
[0, 1); coset sizes follow it: |C_m| ~ f(m * 2^-nr) * 2^(n(1-r)).  The
asymptotic CCS is the fixed point of

    f(u) = 2^(r-1) * ( f(u * 2^r) + f((u - (1 - 2^-r)) * 2^r) ),

with f supported on [0, 1).  This module solves that fixed point on a
uniform grid, runs the finite-n backward recursion, and builds the
brute-force histogram over all 2^n words as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .encoder import CodeParams, coset_indices, ell_all_words
from .errors import IndexOutOfRange, NoConvergence

DEFAULT_BINS = 4096
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITERS = 10_000

SQRT2 = math.sqrt(2.0)


@dataclass
class SpectrumGrid:
    """Density samples at u_k = k/B on [0, 1); normalized to unit mass.

    Evaluation between nodes is linear; beyond the last node the final
    slope is continued (clipped at zero) so that a uniform density stays
    uniform and a density vanishing at u -> 1 keeps vanishing.
    """

    bins: np.ndarray
    level: Optional[int] = None

    @property
    def B(self) -> int:
        return len(self.bins)

    @property
    def bin_width(self) -> float:
        return 1.0 / self.B

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.B) / self.B

    def mass(self) -> float:
        return float(self.bins.sum()) / self.B

    def normalized(self, level: Optional[int] = None) -> "SpectrumGrid":
        return SpectrumGrid(self.bins / self.mass(), level=level)

    def __call__(self, u) -> np.ndarray | float:
        scalar = np.isscalar(u)
        out = _eval_density(self.bins, np.atleast_1d(np.asarray(u, dtype=np.float64)))
        return float(out[0]) if scalar else out


def _eval_density(vals: np.ndarray, args: np.ndarray) -> np.ndarray:
    """Evaluate a node grid at arbitrary points; zero outside [0, 1)."""
    B = len(vals)
    nodes = np.arange(B) / B
    out = np.zeros(args.shape, dtype=np.float64)
    inside = (args >= 0.0) & (args < 1.0)
    a = args[inside]
    res = np.interp(a, nodes, vals)
    # np.interp clamps beyond the last node; continue the final slope there.
    tail = a > nodes[-1]
    if tail.any() and B >= 2:
        slope = (vals[-1] - vals[-2]) * B
        res[tail] = np.maximum(vals[-1] + (a[tail] - nodes[-1]) * slope, 0.0)
    out[inside] = res
    return out


def _recursion_step(vals: np.ndarray, r: float) -> np.ndarray:
    """One application of the two-branch backward recursion on the grid."""
    B = len(vals)
    u = np.arange(B) / B
    s = 2.0 ** r
    shift = 1.0 - 2.0 ** (-r)
    return 2.0 ** (r - 1.0) * (
        _eval_density(vals, u * s) + _eval_density(vals, (u - shift) * s)
    )


def solve_asymptotic_ccs(
    r, B: int = DEFAULT_BINS, tol: float = DEFAULT_TOL, *, max_iters: int = DEFAULT_MAX_ITERS
) -> SpectrumGrid:
    """Iterate the recursion from a uniform start to its normalized fixed point.

    Stops when one more (renormalized) sweep changes the grid by at most
    ``tol`` in L-infinity; raises :class:`NoConvergence` after ``max_iters``.
    """
    rv = float(getattr(r, "r_float", r))
    if not (0.0 < rv <= 1.0):
        raise ValueError(f"rate r={rv} outside (0, 1]")
    if B < 64:
        raise ValueError("need at least 64 bins")
    if tol <= 0.0:
        raise ValueError("tolerance must be positive")
    f = np.ones(B, dtype=np.float64)
    for _ in range(max_iters):
        g = _recursion_step(f, rv)
        g /= g.mean()
        resid = float(np.abs(g - f).max())
        f = g
        if resid <= tol:
            return SpectrumGrid(f)
    raise NoConvergence(f"residual {resid:.3e} > tol {tol:.3e} after {max_iters} sweeps")


def fixed_point_residual(f: SpectrumGrid, r) -> float:
    """L-infinity change after one more renormalized sweep."""
    rv = float(getattr(r, "r_float", r))
    g = _recursion_step(f.bins, rv)
    g /= g.mean()
    return float(np.abs(g - f.bins).max())


def backward_ccs(p: CodeParams, B: int = DEFAULT_BINS) -> list[SpectrumGrid]:
    """Finite-n spectra, level n (uniform) down to level 0.

    Each level applies one recursion step to the next-higher level and is
    renormalized; the raw step preserves mass up to interpolation error.
    """
    p.require_integral()
    if B < 64:
        raise ValueError("need at least 64 bins")
    rv = p.r_value
    levels = [SpectrumGrid(np.ones(B, dtype=np.float64), level=p.n)]
    for i in range(p.n - 1, -1, -1):
        nxt = _recursion_step(levels[-1].bins, rv)
        levels.append(SpectrumGrid(nxt, level=i).normalized(level=i))
    return levels


def empirical_ccs(p: CodeParams, B: int = DEFAULT_BINS) -> SpectrumGrid:
    """Histogram of l(x) = 2^(-nr) ell(x) over all 2^n words, as a density."""
    ell = ell_all_words(p)
    l = ell * 2.0 ** (-p.nr)
    idx = np.minimum((l * B).astype(np.int64), B - 1)
    counts = np.bincount(idx, minlength=B)
    return SpectrumGrid(counts.astype(np.float64) * B / counts.sum())


def final_ccs_histogram(p: CodeParams, B: int = 64) -> SpectrumGrid:
    """Density of the final projection U_n = m - ell over all 2^n words.

    Under the usual equidistribution premises this approaches the uniform
    density; `tests` assert the L1 gap empirically rather than the premise.
    """
    ell = ell_all_words(p)
    u = coset_indices(ell) - ell
    idx = np.clip((u * B).astype(np.int64), 0, B - 1)
    counts = np.bincount(idx, minlength=B)
    return SpectrumGrid(counts.astype(np.float64) * B / counts.sum())


def ccs_square_integral(f: SpectrumGrid) -> float:
    """Riemann approximation of the integral of f^2 over [0, 1).

    For any unit-mass grid the value is >= 1, with equality exactly for the
    uniform grid (quadratic-mean inequality survives discretization).
    """
    return float((f.bins ** 2).mean())


def coset_size_estimate(m: int, p: CodeParams, f: SpectrumGrid) -> float:
    """Predicted |C_m| = f(m * 2^-nr) * 2^(n(1-r)); asymptotic in n."""
    num = p.num_cosets
    if not (0 <= m < num):
        raise IndexOutOfRange(f"m={m} outside [0, {num})")
    return float(f(m / num)) * 2.0 ** (p.n - p.nr)


def half_rate_closed_form(u) -> np.ndarray | float:
    """The r = 1/2 asymptotic CCS: a trapezoid with plateau 1/(2 - sqrt(2))."""
    scalar = np.isscalar(u)
    uu = np.atleast_1d(np.asarray(u, dtype=np.float64))
    lo = SQRT2 - 1.0
    hi = 2.0 - SQRT2
    ramp = 3.0 * SQRT2 - 4.0
    out = np.zeros(uu.shape, dtype=np.float64)
    sel = (uu >= 0.0) & (uu < lo)
    out[sel] = uu[sel] / ramp
    sel = (uu >= lo) & (uu < hi)
    out[sel] = 1.0 / (2.0 - SQRT2)
    sel = (uu >= hi) & (uu < 1.0)
    out[sel] = (1.0 - uu[sel]) / ramp
    return float(out[0]) if scalar else out


def half_rate_square_integral() -> float:
    """Closed-form integral of f^2 for r = 1/2: 1/(3(sqrt(2)-1)) + 1/2."""
    return 1.0 / (3.0 * (SQRT2 - 1.0)) + 0.5
