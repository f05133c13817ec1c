"""Closed forms and exact algebra for the low-distance spectrum limits.

psi(1) and psi(2) have elementary closed forms with finite cutoffs J_1,
J_{2,1}, J_{2,2}.  psi(3) converges exactly when no integer pair (i, j)
solves 2^(ir) (2^(jr) - 1) = 1; deciding that, and evaluating the divergent
linear law, needs exact arithmetic in Q[x]/(alpha) where alpha is the
minimal polynomial of x = 2^r.

The d = 3 sum regroups into trinomial "species" x^k + s1 x^i + s0 whose
scaled generations (x-1) x^(j-1) |species| feed psi(3).  A species is
extinct when |value| >= 1/(x-1) (no contribution), immortal when the value
is exactly zero (one unit per generation, a divergent n - k term), and
mortal otherwise, contributing J - |value| (x^J - 1) over its lifespan J.
All classifications are exact sign decisions at the isolated root; the
mortal/extinct boundary is frequently attained exactly, so floats cannot
decide it.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import (
    IdentityViolation,
    LifespanOverflow,
    NoConvergence,
    NoRootIsolation,
)

Poly = tuple[Fraction, ...]  # ascending coefficients; () is the zero polynomial

_SIGN_BISECT_CAP = 300
_LIFESPAN_CAP = 10_000
_GENUS_K_CAP = 500

GENERA = ((1, 1), (1, -1), (-1, 1), (-1, -1))


# ---------------------------------------------------------------------------
# Polynomial arithmetic over Q


def poly_trim(c: Sequence[Fraction]) -> Poly:
    n = len(c)
    while n and c[n - 1] == 0:
        n -= 1
    return tuple(c[:n])


def poly_from_ints(c: Sequence[int]) -> Poly:
    return poly_trim([Fraction(x) for x in c])


def poly_const(v) -> Poly:
    return poly_trim([Fraction(v)])


def poly_add(a: Poly, b: Poly) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] += x
    return poly_trim(out)


def poly_neg(a: Poly) -> Poly:
    return tuple(-x for x in a)


def poly_sub(a: Poly, b: Poly) -> Poly:
    return poly_add(a, poly_neg(b))


def poly_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for k, y in enumerate(b):
                out[i + k] += x * y
    return poly_trim(out)


def poly_scale(a: Poly, s) -> Poly:
    return poly_trim([x * Fraction(s) for x in a])


def poly_divmod(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    lead = b[-1]
    db = len(b) - 1
    for i in range(len(rem) - 1, db - 1, -1):
        if rem[i] == 0:
            continue
        c = rem[i] / lead
        q[i - db] = c
        for k in range(db + 1):
            rem[i - db + k] -= c * b[k]
    return poly_trim(q), poly_trim(rem)


def poly_mod(a: Poly, b: Poly) -> Poly:
    return poly_divmod(a, b)[1]


def poly_eval(a: Poly, x):
    out = Fraction(0) if isinstance(x, Fraction) else 0.0
    for c in reversed(a):
        out = out * x + (c if isinstance(x, Fraction) else float(c))
    return out


def poly_deriv(a: Poly) -> Poly:
    return poly_trim([a[i] * i for i in range(1, len(a))])


def poly_gcd(a: Poly, b: Poly) -> Poly:
    while b:
        a, b = b, poly_mod(a, b)
    if a:
        a = poly_scale(a, Fraction(1) / a[-1])
    return a


def poly_x_power(k: int) -> Poly:
    return tuple([Fraction(0)] * k + [Fraction(1)])


_TERM_RE = re.compile(r"([+-]?)\s*(\d+)?\s*(x(?:\s*\^\s*(\d+))?)?")


def parse_poly(text: str) -> tuple[int, ...]:
    """Parse an integer polynomial like ``x^3 - x - 1`` into coefficients."""
    s = text.strip().replace("**", "^")
    if not s:
        raise ValueError("empty polynomial")
    coeffs: dict[int, int] = {}
    pos = 0
    matched = False
    while pos < len(s):
        m = _TERM_RE.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse polynomial near {s[pos:]!r}")
        sign, num, xpart, exp = m.groups()
        if num is None and xpart is None:
            raise ValueError(f"cannot parse polynomial near {s[pos:]!r}")
        c = int(num) if num is not None else 1
        if sign == "-":
            c = -c
        k = 0
        if xpart is not None:
            k = int(exp) if exp is not None else 1
        coeffs[k] = coeffs.get(k, 0) + c
        matched = True
        pos = m.end()
        while pos < len(s) and s[pos].isspace():
            pos += 1
    if not matched:
        raise ValueError(f"cannot parse polynomial {text!r}")
    deg = max(coeffs)
    return tuple(coeffs.get(k, 0) for k in range(deg + 1))


def poly_to_str(a: Poly, var: str = "x") -> str:
    if not a:
        return "0"
    parts: list[str] = []
    for k in range(len(a) - 1, -1, -1):
        c = a[k]
        if c == 0:
            continue
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            coef = "" if mag == 1 else f"{mag}"
            body = f"{coef}{var}" if k == 1 else f"{coef}{var}^{k}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if c > 0 else f"- {body}")
    return " ".join(parts)


def _sturm_chain(a: Poly) -> list[Poly]:
    chain = [a, poly_deriv(a)]
    while chain[-1]:
        rem = poly_mod(chain[-2], chain[-1])
        if not rem:
            break
        chain.append(poly_neg(rem))
    return chain


def _sign_variations(chain: list[Poly], x: Fraction) -> int:
    signs = []
    for ply in chain:
        v = poly_eval(ply, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(a: Poly, lo: Fraction, hi: Fraction) -> int:
    """Distinct real roots of a in (lo, hi], via a Sturm chain."""
    chain = _sturm_chain(a)
    return _sign_variations(chain, lo) - _sign_variations(chain, hi)


def _interval_eval(a: Poly, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    """Enclosure of a([lo, hi]) by interval Horner."""
    vlo = vhi = Fraction(0)
    for c in reversed(a):
        cands = (vlo * lo, vlo * hi, vhi * lo, vhi * hi)
        vlo, vhi = min(cands) + c, max(cands) + c
    return vlo, vhi


# ---------------------------------------------------------------------------
# Algebraic rates


class AlgebraicRate:
    """A rate r given via the minimal polynomial alpha of x = 2^r.

    alpha must be monic with integer coefficients, degree >= 2, squarefree,
    and have exactly one simple real root in the open interval (1, 2);
    that root is bracketed by rationals and refined on demand, so every
    sign question about a polynomial value at the root is decided exactly.
    """

    def __init__(self, alpha: Sequence[int]):
        alpha = tuple(int(c) for c in alpha)
        if len(alpha) < 3:
            raise NoRootIsolation("alpha must have degree >= 2")
        if alpha[-1] != 1:
            raise NoRootIsolation("alpha must be monic")
        self.alpha: tuple[int, ...] = alpha
        self._alpha_fr: Poly = poly_from_ints(alpha)
        g = poly_gcd(self._alpha_fr, poly_deriv(self._alpha_fr))
        if len(g) > 1:
            raise NoRootIsolation("alpha has repeated roots")
        one, two = Fraction(1), Fraction(2)
        if poly_eval(self._alpha_fr, one) == 0 or poly_eval(self._alpha_fr, two) == 0:
            raise NoRootIsolation("root must lie strictly inside (1, 2)")
        if count_roots(self._alpha_fr, one, two) != 1:
            raise NoRootIsolation("alpha must isolate exactly one root in (1, 2)")
        self._lo, self._hi = one, two
        self.refine_to(Fraction(1, 1 << 20))

    @classmethod
    def parse(cls, text: str) -> "AlgebraicRate":
        return cls(parse_poly(text))

    def __repr__(self) -> str:
        return f"AlgebraicRate({poly_to_str(self._alpha_fr)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, AlgebraicRate) and self.alpha == other.alpha

    def __hash__(self) -> int:
        return hash(self.alpha)

    @property
    def bracket(self) -> tuple[Fraction, Fraction]:
        return self._lo, self._hi

    def _bisect(self) -> None:
        mid = (self._lo + self._hi) / 2
        v = poly_eval(self._alpha_fr, mid)
        if v == 0:
            raise NoRootIsolation("alpha has a rational root; it is not minimal")
        if (v > 0) == (poly_eval(self._alpha_fr, self._hi) > 0):
            self._hi = mid
        else:
            self._lo = mid

    def refine_to(self, width: Fraction) -> None:
        while self._hi - self._lo > width:
            self._bisect()

    @property
    def root_float(self) -> float:
        self.refine_to(Fraction(1, 1 << 60))
        return float((self._lo + self._hi) / 2)

    @property
    def r_float(self) -> float:
        return math.log2(self.root_float)

    def reduce(self, a: Poly) -> Poly:
        return poly_mod(a, self._alpha_fr)

    def sign_at_root(self, a: Poly) -> int:
        """Exact sign of a(root): 0 iff a is a multiple of alpha."""
        q = self.reduce(a)
        if not q:
            return 0
        for _ in range(_SIGN_BISECT_CAP):
            vlo, vhi = _interval_eval(q, self._lo, self._hi)
            if vlo > 0:
                return 1
            if vhi < 0:
                return -1
            self._bisect()
        raise NoRootIsolation(
            "sign undecidable after refinement; alpha is probably not minimal"
        )

    def eval_at_root(self, a: Poly) -> float:
        self.refine_to(Fraction(1, 1 << 60))
        return float(poly_eval(self.reduce(a), (self._lo + self._hi) / 2))


# ---------------------------------------------------------------------------
# psi(1) and psi(2) closed forms


def _rate_float(r) -> float:
    return float(getattr(r, "r_float", r))


def psi1_closed(r) -> tuple[float, int]:
    """Limit of psi(1; n) and its cutoff J_1.

    Only flips at positions i <= J_1 = -floor(log2(2^r - 1) / r) keep
    |tau| < 1; the limit is sum_i (1 - (1 - 2^-r) 2^(ir)).
    """
    rv = _rate_float(r)
    x = 2.0 ** rv
    j1 = -math.floor(math.log2(x - 1.0) / rv) if x > 1.0 else 0
    j1 = max(0, j1)
    c = 1.0 - 1.0 / x
    value = sum(1.0 - c * 2.0 ** (i * rv) for i in range(1, j1 + 1))
    return value, j1


@dataclass(frozen=True)
class Psi2Closed:
    """psi(2) limit with its cutoffs and per-i inner bounds."""

    value: float
    psi_00: float
    psi_10: float
    j21: int
    j22: int
    kappa1: tuple[int, ...]
    kappa2: tuple[int, ...]


def psi2_closed(r) -> Psi2Closed:
    """Limit of psi(2; n) = (psi(2|00) + psi(2|10)) / 2.

    Double sums over the lower flip position i and the position gap k,
    cut off at J_{2,1}/J_{2,2} and kappa_1(i)/kappa_2(i); J_{2,1} is
    floored at zero (a negative cutoff just empties the sum).
    """
    rv = _rate_float(r)
    x = 2.0 ** rv
    c = 1.0 - 1.0 / x
    log_c = math.log2(x - 1.0)  # log2(2^r - 1) = log2(1 - 2^-r) + r

    j21 = max(0, -math.floor(math.log2(x * x - 1.0) / rv))
    j22 = max(0, -math.floor(2.0 * log_c / rv))

    def kappa1(i: int) -> int:
        arg = 2.0 ** (-i * rv) - 1.0 + 1.0 / x
        if arg <= 0.0:
            return 0
        return max(0, math.ceil((math.log2(arg) - log_c) / rv))

    def kappa2(i: int) -> int:
        arg = 2.0 ** (-i * rv) + 1.0 - 1.0 / x
        return max(0, math.ceil((math.log2(arg) - log_c) / rv))

    k1 = tuple(kappa1(i) for i in range(1, j21 + 1))
    k2 = tuple(kappa2(i) for i in range(1, j22 + 1))
    psi_00 = sum(
        max(0.0, 1.0 - c * 2.0 ** (i * rv) * (2.0 ** (k * rv) + 1.0))
        for i in range(1, j21 + 1)
        for k in range(1, k1[i - 1] + 1)
    )
    psi_10 = sum(
        max(0.0, 1.0 - c * 2.0 ** (i * rv) * (2.0 ** (k * rv) - 1.0))
        for i in range(1, j22 + 1)
        for k in range(1, k2[i - 1] + 1)
    )
    return Psi2Closed(
        value=(psi_00 + psi_10) / 2.0,
        psi_00=psi_00,
        psi_10=psi_10,
        j21=j21,
        j22=j22,
        kappa1=k1,
        kappa2=k2,
    )


# ---------------------------------------------------------------------------
# psi(3): zero pairs, species, analytic values


@dataclass(frozen=True)
class ZeroPairSet:
    """All (i, j) with 2^(ir) (2^(jr) - 1) = 1, searched up to i + j <= bound.

    Empty means psi(3) converges.  ``certified`` is True when the test ran
    in exact arithmetic (algebraic rate); a float-rate search is only a
    "no pair within precision" statement.
    """

    pairs: tuple[tuple[int, int], ...]
    search_bound: int
    certified: bool

    def __bool__(self) -> bool:
        return bool(self.pairs)


def _zero_pair_search_bound_float(rv: float, cap: int = 10_000) -> int:
    c = 1.0 - 2.0 ** (-rv)
    for k in range(1, cap + 1):
        if c * (2.0 ** (k * rv) * c - 1.0) >= 1.0:
            return k
    raise NoConvergence("no extinction bound found; rate too small?")


def find_zero_pairs(rate, *, eps: float = 1e-12) -> ZeroPairSet:
    """Search k = i + j <= K for solutions of 2^(ir) (2^(jr) - 1) = 1.

    K is the least k making even the slowest-growing candidate extinct:
    (1 - 2^-r)(2^(kr)(1 - 2^-r) - 1) >= 1.  Beyond it no trinomial
    x^(i+j) - x^i - 1 can vanish, so the search is exhaustive.
    """
    if isinstance(rate, AlgebraicRate):
        xm1 = poly_from_ints([-1, 1])
        k = 1
        while True:
            # (x-1)(x^k - x^(k-1) - 1) - x >= 0 at the root ends the search.
            body = poly_sub(poly_sub(poly_x_power(k), poly_x_power(k - 1)), poly_const(1))
            gate = poly_sub(poly_mul(xm1, body), poly_from_ints([0, 1]))
            if rate.sign_at_root(gate) >= 0:
                break
            k += 1
            if k > _GENUS_K_CAP:
                raise NoConvergence("zero-pair search bound exceeded the cap")
        bound = k
        pairs = []
        for total in range(2, bound + 1):
            for i in range(1, total):
                j = total - i
                probe = poly_sub(
                    poly_sub(poly_x_power(i + j), poly_x_power(i)), poly_const(1)
                )
                if rate.sign_at_root(probe) == 0:
                    pairs.append((i, j))
        return ZeroPairSet(pairs=tuple(pairs), search_bound=bound, certified=True)
    rv = _rate_float(rate)
    bound = _zero_pair_search_bound_float(rv)
    pairs = []
    for total in range(2, bound + 1):
        for i in range(1, total):
            j = total - i
            if abs(2.0 ** (i * rv) * (2.0 ** (j * rv) - 1.0) - 1.0) < eps:
                pairs.append((i, j))
    return ZeroPairSet(pairs=tuple(pairs), search_bound=bound, certified=False)


def reduce_mod_alpha(poly: Sequence, alpha: Sequence) -> Poly:
    """Canonical remainder of poly modulo a monic alpha of degree >= 2."""
    a = poly_trim([Fraction(c) for c in alpha])
    if len(a) < 3 or a[-1] != 1:
        raise ValueError("alpha must be monic of degree >= 2")
    return poly_mod(poly_trim([Fraction(c) for c in poly]), a)


@dataclass(frozen=True)
class Species:
    """A trinomial x^k + s1 x^i + s0 classified at an algebraic rate.

    ``cls`` is "extinct", "mortal", or "immortal"; mortal species carry a
    lifespan J >= 1 and their total contribution J - |value| (x^J - 1),
    reduced mod alpha.  Immortal species have lifespan None (unbounded).
    """

    k: int
    i: int
    s1: int
    s0: int
    reduced: Poly
    sign: int
    cls: str
    lifespan: Optional[int]
    contribution: Optional[Poly]

    @property
    def name(self) -> str:
        raw: list[Fraction] = [Fraction(0)] * (self.k + 1)
        raw[self.k] += 1
        raw[self.i] += self.s1
        raw[0] += self.s0
        return poly_to_str(poly_trim(raw))


def classify_species(k: int, i: int, s1: int, s0: int, rate: AlgebraicRate) -> Species:
    """Reduce a trinomial mod alpha and decide extinct/mortal/immortal.

    The lifespan is the largest j with x^(j-1) |value| < 1/(x-1); the
    boundary is attained exactly for these rates, hence exact comparisons.
    """
    if not (k > i >= 1):
        raise ValueError(f"species needs k > i >= 1, got k={k} i={i}")
    if s1 not in (-1, 1) or s0 not in (-1, 1):
        raise ValueError("signs must be +1 or -1")
    raw = poly_add(
        poly_add(poly_x_power(k), poly_scale(poly_x_power(i), s1)), poly_const(s0)
    )
    v = rate.reduce(raw)
    sgn = rate.sign_at_root(v)
    if sgn == 0:
        return Species(k, i, s1, s0, v, 0, "immortal", None, None)
    absv = v if sgn > 0 else poly_neg(v)
    xm1 = poly_from_ints([-1, 1])
    one = poly_const(1)

    def below_threshold(w: Poly) -> bool:
        # (x - 1) w < 1 at the root, i.e. w < 1/(x-1)
        return rate.sign_at_root(poly_sub(poly_mul(xm1, w), one)) < 0

    if not below_threshold(absv):
        return Species(k, i, s1, s0, v, sgn, "extinct", 0, None)
    lifespan = 0
    g = absv  # x^(j-1) |value| at generation j = lifespan + 1
    while below_threshold(g):
        lifespan += 1
        if lifespan > _LIFESPAN_CAP:
            raise LifespanOverflow(f"species x^{k}{s1:+d}x^{i}{s0:+d} outlived the cap")
        g = rate.reduce(poly_mul(g, poly_from_ints([0, 1])))
    # contribution = J - |v| (x^J - 1) = J - g + |v|, with g = |v| x^J
    contribution = rate.reduce(poly_add(poly_sub(poly_const(lifespan), g), absv))
    return Species(k, i, s1, s0, v, sgn, "mortal", lifespan, contribution)


def genus_k_bound(s1: int, s0: int, rate: AlgebraicRate) -> int:
    """Largest k whose least-magnitude species may still be alive.

    The minimum over i of |x^k + s1 x^i + s0| is at i = 1 for s1 = +1 and
    i = k - 1 for s1 = -1, and grows with k, so alive species occupy a
    prefix of k values.
    """
    xm1 = poly_from_ints([-1, 1])
    kb = 0
    for k in range(2, _GENUS_K_CAP + 1):
        i_star = 1 if s1 > 0 else k - 1
        minval = poly_add(
            poly_add(poly_x_power(k), poly_scale(poly_x_power(i_star), s1)),
            poly_const(s0),
        )
        if rate.sign_at_root(poly_sub(poly_mul(xm1, minval), poly_const(1))) >= 0:
            return kb
        kb = k
    raise NoConvergence("genus scan exceeded the k cap")


def scan_genus(s1: int, s0: int, rate: AlgebraicRate) -> list[Species]:
    """Classify every species of the genus within its alive-k prefix."""
    kb = genus_k_bound(s1, s0, rate)
    return [
        classify_species(k, i, s1, s0, rate)
        for k in range(2, kb + 1)
        for i in range(1, k)
    ]


def species_audit(rate: AlgebraicRate) -> list[tuple[tuple[int, int], Species]]:
    """All four genus scans, as ((s1, s0), species) rows for export."""
    return [((s1, s0), sp) for s1, s0 in GENERA for sp in scan_genus(s1, s0, rate)]


@dataclass(frozen=True)
class Psi3Analytic:
    """psi(3; n) from the species decomposition.

    ``stable`` marks n at or beyond the horizon where every mortal species
    has fully expired, so the value follows c0 + (n - i - j)/4 terms
    exactly; below it the value is the truncated species sum (still exact,
    but not yet on the linear law).
    """

    n: int
    value: float
    stable: bool
    horizon: int
    zero_pairs: tuple[tuple[int, int], ...]


def psi3_analytic(rate: AlgebraicRate, n: int) -> Psi3Analytic:
    """Evaluate psi(3; n) exactly from genus scans plus divergent terms.

    Mortal species at (k, i) contribute sum_{j=1}^{min(J, n-k)} of their
    generation terms; immortal species contribute (n - k); extinct species
    nothing.  Dividing by 4 averages the four flip-pattern classes.
    """
    if n < 3:
        raise ValueError("psi(3; n) needs n >= 3")
    zero_pairs = find_zero_pairs(rate)
    immortal_seen: set[tuple[int, int]] = set()
    total = 0.0
    horizon = 2
    x = rate.root_float
    xm1 = poly_from_ints([-1, 1])
    for s1, s0 in GENERA:
        for sp in scan_genus(s1, s0, rate):
            if sp.cls == "extinct" or sp.k > n - 1:
                if sp.cls == "mortal":
                    horizon = max(horizon, sp.k + sp.lifespan)
                if sp.cls == "immortal":
                    immortal_seen.add((sp.i, sp.k - sp.i))
                    horizon = max(horizon, sp.k)
                continue
            if sp.cls == "immortal":
                immortal_seen.add((sp.i, sp.k - sp.i))
                horizon = max(horizon, sp.k)
                total += n - sp.k
                continue
            horizon = max(horizon, sp.k + sp.lifespan)
            jmax = min(sp.lifespan, n - sp.k)
            if jmax == sp.lifespan:
                total += rate.eval_at_root(sp.contribution)
            else:
                absv = sp.reduced if sp.sign > 0 else poly_neg(sp.reduced)
                scale = rate.eval_at_root(rate.reduce(poly_mul(xm1, absv)))
                total += sum(1.0 - scale * x ** (j - 1) for j in range(1, jmax + 1))
    if set(zero_pairs.pairs) != immortal_seen:
        raise IdentityViolation(
            f"zero pairs {zero_pairs.pairs} and immortal species {immortal_seen} disagree"
        )
    return Psi3Analytic(
        n=n,
        value=total / 4.0,
        stable=n >= horizon,
        horizon=horizon,
        zero_pairs=zero_pairs.pairs,
    )
