"""Function algebra on the basis coth^(j)(x + m*pi*nu*i).

One-variable elements (`CothFun`) model functions of a single spectral
parameter written in lambda = log(zeta); two-variable elements (`BiFun`)
additionally carry difference-variable factors coth^(j)(lambda - lambda' +
k*pi*nu*i) and opaque antidifference symbols for the principal-value
integral whose forward difference is the elementary twisted kernel psi.

All reductions are exact.  Products of basis functions close on the basis:

* same shift       -- through the polynomial ring Z[coth] via
                      coth' = 1 - coth^2 (triangular basis change),
* different shifts -- by matching principal parts; the only data needed
                      are the single pure pole coth^(j)(x) ~ (-1)^j j! x^(-j-1)
                      and exact constants coth^(t)(m*pi*nu*i), which are
                      rational in q.

Twist prefactors zeta**(n_a*alpha + n_k*kappa + n_k'*kappa' + n_1) are
tracked as integer exponent records; shifting zeta -> q*zeta turns them
into exact multipliers q**(...) inside the coefficient field.
"""

from __future__ import annotations

import math
from fractions import Fraction

from . import ring
from .errors import GradingError, TwistError
from .ring import ONE, ZERO, RingElem

TWIST0 = (0, 0, 0, 0)


def twist_add(t1, t2):
    return tuple(a + b for a, b in zip(t1, t2))


def twist_neg(t):
    return tuple(-a for a in t)


def twist_scale(t, s):
    return tuple(a * s for a in t)


# ---------------------------------------------------------------------------
# coth derivative polynomials and exact reduction tables
# ---------------------------------------------------------------------------

_COTH_POLY_CACHE = [(Fraction(0), Fraction(1))]  # P_0 = c


def coth_poly(j: int):
    """Coefficients of coth^(j) as a polynomial in c = coth (exact)."""
    while len(_COTH_POLY_CACHE) <= j:
        p = _COTH_POLY_CACHE[-1]
        # d/dx P(c) = P'(c) * (1 - c^2)
        dp = tuple(p[i] * i for i in range(1, len(p)))
        new = [Fraction(0)] * (len(dp) + 2)
        for i, coeff in enumerate(dp):
            new[i] += coeff
            new[i + 2] -= coeff
        while new and new[-1] == 0:
            new.pop()
        _COTH_POLY_CACHE.append(tuple(new))
    return _COTH_POLY_CACHE[j]


def pow_to_deriv(coeffs):
    """Rewrite a polynomial in c = coth as const + sum_j a_j coth^(j).

    The basis {1, P_0, P_1, ...} is triangular in degree with leading
    coefficients (-1)^j j!, so the change of basis is an exact back
    substitution over Q.
    """
    work = list(coeffs)
    out = {}
    while len(work) > 1:
        deg = len(work) - 1
        j = deg - 1
        pj = coth_poly(j)
        lead = pj[-1]
        a = Fraction(work[-1]) / lead
        if a:
            out[j] = out.get(j, Fraction(0)) + a
        for i, c in enumerate(pj):
            work[i] -= a * c
        while len(work) > 1 and work[-1] == 0:
            work.pop()
    const = Fraction(work[0]) if work else Fraction(0)
    return const, out


def poly_mul(p1, p2):
    out = [Fraction(0)] * (len(p1) + len(p2) - 1)
    for i, a in enumerate(p1):
        if a:
            for j, b in enumerate(p2):
                if b:
                    out[i + j] += a * b
    return tuple(out)


class TermAccumulator:
    """Deferred keyed sums: collect coefficients per key and combine each
    bucket once, grouping by denominator (much cheaper than folding)."""

    __slots__ = ("data",)

    def __init__(self):
        self.data: dict = {}

    def bump(self, key, value):
        self.data.setdefault(key, []).append(value)

    def finalize(self) -> dict:
        out = {}
        for key, vals in self.data.items():
            total = vals[0] if len(vals) == 1 else ring.sum_elems(vals)
            if not total.is_zero():
                out[key] = total
        return out


_SAME_CACHE: dict = {}


def reduce_same(j1: int, j2: int):
    """coth^(j1)(x)*coth^(j2)(x) -> (const, {r: coeff}) as RingElems."""
    key = (j1, j2) if j1 <= j2 else (j2, j1)
    hit = _SAME_CACHE.get(key)
    if hit is None:
        const, coeffs = pow_to_deriv(poly_mul(coth_poly(key[0]), coth_poly(key[1])))
        hit = (
            RingElem.from_fraction(const),
            {r: RingElem.from_fraction(c) for r, c in coeffs.items() if c},
        )
        _SAME_CACHE[key] = hit
    return hit


_CONST_CACHE: dict = {}


def coth_shift_constant(t: int, d: int) -> RingElem:
    """coth^(t)(d*pi*nu*i) as an exact rational function of q (d != 0)."""
    key = (t, d)
    hit = _CONST_CACHE.get(key)
    if hit is None:
        if d == 0:
            raise ZeroDivisionError("coth constant at zero shift")
        c0 = (ring.qpow(d) + ring.qpow(-d)) / (ring.qpow(d) - ring.qpow(-d))
        val = ZERO
        cpow = ONE
        for coeff in coth_poly(t):
            if coeff:
                val = val + RingElem.from_fraction(coeff) * cpow
            cpow = cpow * c0
        hit = val.canonicalize()
        _CONST_CACHE[key] = hit
    return hit


_CROSS_CACHE: dict = {}


def reduce_cross(j1: int, j2: int, d: int):
    """coth^(j1)(x)*coth^(j2)(x + d*pi*nu*i) for d != 0.

    Returns (const, {r: coeff at shift of x}, {s: coeff at shift of x+d}).
    Principal-part matching at the two pole lattices.
    """
    key = (j1, j2, d)
    hit = _CROSS_CACHE.get(key)
    if hit is None:
        alphas = {}
        for t in range(j1 + 1):
            coeff = RingElem.from_fraction(
                Fraction((-1) ** t * math.comb(j1, t))
            ) * coth_shift_constant(j2 + t, d)
            if not coeff.is_zero():
                alphas[j1 - t] = coeff
        betas = {}
        sgn = (-1) ** (j1 + 1)
        for t in range(j2 + 1):
            coeff = RingElem.from_fraction(
                Fraction(sgn * math.comb(j2, t))
            ) * coth_shift_constant(j1 + t, d)
            if not coeff.is_zero():
                betas[j2 - t] = coeff
        const = ONE if (j1 == 0 and j2 == 0) else ZERO
        hit = (const, alphas, betas)
        _CROSS_CACHE[key] = hit
    return hit


def bernoulli_numbers(n: int):
    """B_0..B_n as exact Fractions (Akiyama-Tanigawa, B_1 = -1/2)."""
    A = [Fraction(0)] * (n + 1)
    out = []
    for m in range(n + 1):
        A[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            A[j - 1] = j * (A[j - 1] - A[j])
        out.append(A[0])
    if n >= 1:
        out[1] = -out[1]  # second -> first convention
    return out


def coth_taylor(depth: int = 32):
    """Taylor coefficients of coth(x) - 1/x around 0, up to x**depth."""
    B = bernoulli_numbers(depth + 2)
    coeffs = [Fraction(0)] * (depth + 1)
    for n in range(1, depth // 2 + 2):
        k = 2 * n - 1
        if k > depth:
            break
        coeffs[k] = Fraction(4**n) * B[2 * n] / math.factorial(2 * n)
    return coeffs


# ---------------------------------------------------------------------------
# one-variable functions
# ---------------------------------------------------------------------------


class CothFun:
    """Finite combination const + sum coth^(j)(lambda + m*pi*nu*i) with an
    overall power prefactor, all coefficients exact rational functions."""

    __slots__ = ("twist", "ipi", "const", "terms")

    def __init__(self, const=ZERO, terms=None, twist=TWIST0, ipi=0):
        self.const = const
        self.terms = terms or {}
        self.twist = twist
        self.ipi = ipi

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def constant(cls, value: RingElem, twist=TWIST0, ipi=0):
        return cls(const=value, twist=twist, ipi=ipi)

    @classmethod
    def basis(cls, j: int, m: int = 0, coeff: RingElem = ONE, twist=TWIST0, ipi=0):
        return cls(terms={(j, m): coeff}, twist=twist, ipi=ipi)

    def is_zero(self) -> bool:
        if not self.const.is_zero():
            return False
        return all(c.is_zero() for c in self.terms.values())

    def prune(self) -> "CothFun":
        terms = {k: c for k, c in self.terms.items() if not c.is_zero()}
        return CothFun(self.const, terms, self.twist, self.ipi)

    def _compatible(self, other: "CothFun"):
        if self.is_zero() or other.is_zero():
            return True
        return self.twist == other.twist and self.ipi == other.ipi

    def __add__(self, other: "CothFun") -> "CothFun":
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if not self._compatible(other):
            raise TwistError("cannot add functions with different prefactors")
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, ZERO) + c
        return CothFun(self.const + other.const, terms, self.twist, self.ipi).prune()

    def __neg__(self):
        return self.scale(-ONE)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor: RingElem) -> "CothFun":
        if factor.is_zero():
            return CothFun(twist=self.twist, ipi=self.ipi)
        return CothFun(
            self.const * factor,
            {k: c * factor for k, c in self.terms.items()},
            self.twist,
            self.ipi,
        )

    def with_ipi(self, ipi: int) -> "CothFun":
        return CothFun(self.const, dict(self.terms), self.twist, ipi)

    def uniformize(self) -> "CothFun":
        """Re-express every coefficient over one shared denominator."""
        coeffs = [self.const] + list(self.terms.values())
        target = ring.common_den(c for c in coeffs if not c.is_zero())
        return CothFun(
            self.const.scaled_to_den(target),
            {k: c.scaled_to_den(target) for k, c in self.terms.items()},
            self.twist,
            self.ipi,
        )

    def map_coeffs(self, fn, twist_map=None) -> "CothFun":
        twist = twist_map(self.twist) if twist_map else self.twist
        return CothFun(
            fn(self.const),
            {k: fn(c) for k, c in self.terms.items()},
            twist,
            self.ipi,
        ).prune()

    def mul(self, other: "CothFun") -> "CothFun":
        """Exact product, reduced back to the basis."""
        twist = twist_add(self.twist, other.twist)
        ipi = self.ipi + other.ipi
        acc = TermAccumulator()
        consts = []
        if not self.const.is_zero() and not other.const.is_zero():
            consts.append(self.const * other.const)
        if not other.const.is_zero():
            for k, c in self.terms.items():
                acc.bump(k, c * other.const)
        if not self.const.is_zero():
            for k, c in other.terms.items():
                acc.bump(k, c * self.const)
        for (j1, m1), c1 in self.terms.items():
            for (j2, m2), c2 in other.terms.items():
                c = c1 * c2
                if c.is_zero():
                    continue
                if m1 == m2:
                    const, coeffs = reduce_same(j1, j2)
                    if not const.is_zero():
                        consts.append(const * c)
                    for r, rc in coeffs.items():
                        acc.bump((r, m1), rc * c)
                else:
                    const, alphas, betas = reduce_cross(j1, j2, m2 - m1)
                    if not const.is_zero():
                        consts.append(const * c)
                    for r, rc in alphas.items():
                        acc.bump((r, m1), rc * c)
                    for s, sc in betas.items():
                        acc.bump((s, m2), sc * c)
        return CothFun(ring.sum_elems(consts), acc.finalize(), twist, ipi)

    def diff(self) -> "CothFun":
        if self.twist != TWIST0:
            raise TwistError("derivative of a twisted function is outside the algebra")
        return CothFun(
            ZERO,
            {(j + 1, m): c for (j, m), c in self.terms.items()},
            TWIST0,
            self.ipi,
        )

    def shift(self, m: int) -> "CothFun":
        """lambda -> lambda + m*pi*nu*i (zeta -> q**m zeta)."""
        if m == 0:
            return self
        mult = ring.twist_factor(self.twist) ** m
        return CothFun(
            self.const * mult,
            {(j, mm + m): c * mult for (j, mm), c in self.terms.items()},
            self.twist,
            self.ipi,
        )

    def asym(self, direction: int = +1) -> RingElem:
        """Constant limit for Re(lambda) -> +-infinity of the coth part."""
        total = self.const
        sgn = ONE if direction > 0 else -ONE
        for (j, _m), c in self.terms.items():
            if j == 0:
                total = total + sgn * c
        return total

    def singular_part(self, m: int) -> "CothFun":
        return CothFun(
            ZERO,
            {k: c for k, c in self.terms.items() if k[1] == m},
            self.twist,
            self.ipi,
        ).prune()

    def m_component(self, m: int) -> dict:
        return {j: c for (j, mm), c in self.terms.items() if mm == m and not c.is_zero()}

    def delta(self) -> "CothFun":
        """Forward-backward difference f(q*zeta) - f(q**-1 zeta)."""
        return self.shift(1) - self.shift(-1)

    def __eq__(self, other):
        if not isinstance(other, CothFun):
            return NotImplemented
        diff = self - other if self._compatible(other) else None
        if diff is None:
            return False
        return diff.is_zero()

    __hash__ = None

    def text(self) -> str:
        parts = []
        if self.ipi:
            parts.append(f"IPI^{self.ipi}")
        if self.twist != TWIST0:
            parts.append(f"twist{self.twist}")
        if not self.const.is_zero():
            parts.append(f"[{self.const.text()}]")
        for (j, m), c in sorted(self.terms.items()):
            parts.append(f"[{c.text()}]*coth({j};{m})")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"CothFun({self.text()})"


# spec-facing wrappers ---------------------------------------------------------


def coth_product(f: CothFun, g: CothFun) -> CothFun:
    return f.mul(g)


def coth_diff(f: CothFun) -> CothFun:
    return f.diff()


def coth_shift(f: CothFun, m: int) -> CothFun:
    return f.shift(m)


def coth_asym(f: CothFun, direction: int) -> RingElem:
    return f.asym(direction)


def coth_singular(f: CothFun, m: int) -> CothFun:
    return f.singular_part(m)


def apply_delta(f, variable: str = "left"):
    """Difference operator Delta in the requested variable (twist aware)."""
    if isinstance(f, CothFun):
        return f.delta()
    return f.delta(variable)


# ---------------------------------------------------------------------------
# graded exp/log over CothFun series
# ---------------------------------------------------------------------------


def coth_exp_log(series, mode: str, order: int = None):
    """Truncated exp/log of a beta-graded series with CothFun grades.

    exp: the beta^0 grade must vanish (a constant offset belongs in the
    normalization, not the exponent); log: the beta^0 grade must be 1.
    """
    from .series import BetaSeries

    order = series.order if order is None else order
    f = series.truncate(order)
    if mode == "exp":
        if not f.grade(0).is_zero():
            raise GradingError("exp needs a vanishing beta^0 grade")
        out = [CothFun.constant(ONE)] + [CothFun.zero() for _ in range(order)]
        for k in range(1, order + 1):
            acc = CothFun.zero()
            for i in range(1, k + 1):
                gi = f.grade(i)
                if gi.is_zero():
                    continue
                term = gi.scale(ring.rational(i)).mul(out[k - i])
                acc = acc + term
            out[k] = acc.scale(ring.rational(1, k))
        return BetaSeries(out, order)
    if mode == "log":
        g0 = f.grade(0)
        if not (g0 - CothFun.constant(ONE, twist=g0.twist, ipi=g0.ipi)).is_zero() or (
            g0.twist != TWIST0
        ):
            raise GradingError("log needs beta^0 grade equal to 1")
        # L' = f'/f  =>  k*L_k = k*f_k - sum_{i<k} i*L_i*f_{k-i}
        out = [CothFun.zero() for _ in range(order + 1)]
        for k in range(1, order + 1):
            acc = f.grade(k).scale(ring.rational(k))
            for i in range(1, k):
                if out[i].is_zero() or f.grade(k - i).is_zero():
                    continue
                acc = acc - out[i].scale(ring.rational(i)).mul(f.grade(k - i))
            out[k] = acc.scale(ring.rational(1, k))
        return BetaSeries(out, order)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# two-variable functions
# ---------------------------------------------------------------------------

# Term key: (lt, rt, L, R, D)
#   lt, rt : twist exponent records on zeta and zeta'
#   L      : None or (j, m)      -- coth^(j)(lambda  + m*pi*nu*i)
#   R      : None or (j, m)      -- coth^(j)(lambda' + m*pi*nu*i)
#   D      : None
#          | ('c', k, j)         -- coth^(j)(lambda - lambda' + k*pi*nu*i)
#          | ('i', p, eps)       -- antidifference symbol at shift p in {0,1},
#                                   built over psi(. , eps*alpha)
# The shift sits in slot 1 for both D kinds, so variable shifts act uniformly.

KEY_CONST = (TWIST0, TWIST0, None, None, None)


def psi_diff_term(k: int, eps: int, coeff: RingElem = ONE):
    """psi(q**k * zeta/zeta', eps*alpha) as BiFun term data."""
    lt = (eps, 0, 0, 0)
    rt = (-eps, 0, 0, 0)
    c = coeff * ring.apow(eps * k) * ring.rational(1, 2)
    return ((lt, rt, None, None, ("c", k, 0)), c)


class BiFun:
    """Two-variable element: tensor, one-sided, difference and
    antidifference terms with per-term twists; a global 1/(2*pi*i) power."""

    __slots__ = ("ipi", "terms")

    def __init__(self, terms=None, ipi=0):
        self.terms = terms or {}
        self.ipi = ipi

    @classmethod
    def zero(cls, ipi=0):
        return cls({}, ipi)

    @classmethod
    def constant(cls, value: RingElem, ipi=0):
        return cls({KEY_CONST: value}, ipi)

    @classmethod
    def inv_psi_symbol(cls, eps: int = 1, ipi=0):
        return cls({(TWIST0, TWIST0, None, None, ("i", 0, eps)): ONE}, ipi)

    @classmethod
    def from_terms(cls, pairs, ipi=0):
        out = cls({}, ipi)
        for key, coeff in pairs:
            out._bump(key, coeff)
        return out.normalize()

    def _bump(self, key, coeff):
        if key in self.terms:
            self.terms[key] = self.terms[key] + coeff
        else:
            self.terms[key] = coeff

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.terms.values())

    def normalize(self) -> "BiFun":
        """Reduce antidifference shifts into {0,1} and drop zero terms."""
        out = BiFun({}, self.ipi)
        stack = list(self.terms.items())
        while stack:
            (lt, rt, L, R, D), coeff = stack.pop()
            if coeff.is_zero():
                continue
            if D is not None and D[0] == "i" and D[1] not in (0, 1):
                _, p, eps = D
                if p >= 2:
                    dkey, dcoeff = psi_diff_term(p - 1, eps, coeff)
                    stack.append((
                        (twist_add(lt, dkey[0]), twist_add(rt, dkey[1]), L, R, dkey[4]),
                        dcoeff,
                    ))
                    stack.append(((lt, rt, L, R, ("i", p - 2, eps)), coeff))
                else:
                    dkey, dcoeff = psi_diff_term(p + 1, eps, coeff)
                    stack.append((
                        (twist_add(lt, dkey[0]), twist_add(rt, dkey[1]), L, R, dkey[4]),
                        -dcoeff,
                    ))
                    stack.append(((lt, rt, L, R, ("i", p + 2, eps)), coeff))
                continue
            out._bump((lt, rt, L, R, D), coeff)
        out.terms = {k: c for k, c in out.terms.items() if not c.is_zero()}
        return out

    def __add__(self, other: "BiFun") -> "BiFun":
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.ipi != other.ipi:
            raise TwistError("cannot add functions with different 2*pi*i powers")
        out = BiFun(dict(self.terms), self.ipi)
        for k, c in other.terms.items():
            out._bump(k, c)
        out.terms = {k: c for k, c in out.terms.items() if not c.is_zero()}
        return out

    def __neg__(self):
        return self.scale(-ONE)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor: RingElem) -> "BiFun":
        if factor.is_zero():
            return BiFun.zero(self.ipi)
        return BiFun({k: c * factor for k, c in self.terms.items()}, self.ipi)

    def with_ipi(self, ipi: int) -> "BiFun":
        return BiFun(dict(self.terms), ipi)

    def uniformize(self) -> "BiFun":
        """Re-express every coefficient over one shared denominator."""
        target = ring.common_den(c for c in self.terms.values() if not c.is_zero())
        return BiFun(
            {k: c.scaled_to_den(target) for k, c in self.terms.items()}, self.ipi
        )

    def map_coeffs(self, fn, twist_map=None, eps_map=None) -> "BiFun":
        out = BiFun({}, self.ipi)
        for (lt, rt, L, R, D), c in self.terms.items():
            nlt = twist_map(lt) if twist_map else lt
            nrt = twist_map(rt) if twist_map else rt
            nD = D
            if D is not None and D[0] == "i" and eps_map:
                nD = ("i", D[1], eps_map(D[2]))
            out._bump((nlt, nrt, L, R, nD), fn(c))
        return out.normalize()

    # -- products with one-variable functions -------------------------------

    def mul_onevar(self, g: CothFun, side: str) -> "BiFun":
        """Multiply by a one-variable function living on `side`."""
        acc = TermAccumulator()
        gt = g.twist
        for (lt, rt, L, R, D), c in self.terms.items():
            nlt, nrt = (twist_add(lt, gt), rt) if side == "left" else (lt, twist_add(rt, gt))
            slot = L if side == "left" else R
            if not g.const.is_zero():
                acc.bump((nlt, nrt, L, R, D), c * g.const)
            for (j2, m2), c2 in g.terms.items():
                cc = c * c2
                if cc.is_zero():
                    continue
                if slot is None:
                    nk = (j2, m2)
                    key = (nlt, nrt, nk, R, D) if side == "left" else (nlt, nrt, L, nk, D)
                    acc.bump(key, cc)
                    continue
                j1, m1 = slot
                if m1 == m2:
                    const, coeffs = reduce_same(j1, j2)
                    pieces = [(None, const)] if not const.is_zero() else []
                    pieces += [((r, m1), rc) for r, rc in coeffs.items()]
                else:
                    const, alphas, betas = reduce_cross(j1, j2, m2 - m1)
                    pieces = [(None, const)] if not const.is_zero() else []
                    pieces += [((r, m1), rc) for r, rc in alphas.items()]
                    pieces += [((s, m2), sc) for s, sc in betas.items()]
                for nk, rc in pieces:
                    key = (nlt, nrt, nk, R, D) if side == "left" else (nlt, nrt, L, nk, D)
                    acc.bump(key, cc * rc)
        return BiFun(acc.finalize(), self.ipi + g.ipi).normalize()

    # -- shifts ---------------------------------------------------------------

    def dshift(self, variable: str, s: int) -> "BiFun":
        """d^s in one variable: zeta -> q**s zeta (or zeta' -> q**s zeta')."""
        out = BiFun({}, self.ipi)
        left = variable == "left"
        for (lt, rt, L, R, D), c in self.terms.items():
            mult = ring.twist_factor(lt if left else rt) ** s
            nL, nR, nD = L, R, D
            if left:
                if L is not None:
                    nL = (L[0], L[1] + s)
                if D is not None:
                    nD = (D[0], D[1] + s, D[2])
            else:
                if R is not None:
                    nR = (R[0], R[1] + s)
                if D is not None:
                    nD = (D[0], D[1] - s, D[2])
            out._bump((lt, rt, nL, nR, nD), c * mult)
        return out.normalize()

    def delta(self, variable: str) -> "BiFun":
        return self.dshift(variable, +1) - self.dshift(variable, -1)

    # -- structure ------------------------------------------------------------

    def swap(self) -> "BiFun":
        """Exchange the two spectral parameters."""
        out = BiFun({}, self.ipi)
        for (lt, rt, L, R, D), c in self.terms.items():
            nD = D
            nc = c
            if D is not None:
                if D[0] == "c":
                    _, k, j = D
                    nD = ("c", -k, j)
                    if j % 2 == 0:
                        nc = -nc
                else:
                    _, p, eps = D
                    nD = ("i", -p, -eps)
            out._bump((rt, lt, R, L, nD), nc)
        return out.normalize()

    def asym(self, side: str, multiplier_twist) -> "CothFun":
        """Limit of zeta**multiplier_twist * F as the `side` variable's
        log goes to +infinity; returns a function of the other variable.

        Every term must become twist free in the vanishing variable,
        otherwise the limit does not exist in the algebra.
        """
        left = side == "left"
        res_terms: dict = {}
        res_const = ZERO
        res_twist = None
        for (lt, rt, L, R, D), c in self.terms.items():
            own, other = (lt, rt) if left else (rt, lt)
            keep, gone = (R, L) if left else (L, R)
            coeff = c
            if D is not None and D[0] == "i":
                _, p, eps = D
                e_own = eps if left else -eps
                own = twist_add(own, (e_own, 0, 0, 0))
                other = twist_add(other, (-e_own, 0, 0, 0))
                half = ring.rational(1, 2) / ring.qa_minus_qainv()
                cst = half if eps > 0 else -half
                if not left:
                    cst = -cst  # x -> 0 limit flips the sign
                coeff = coeff * ring.apow(eps * p) * cst
                D = None
            if twist_add(own, multiplier_twist) != TWIST0:
                raise TwistError("term keeps a twist in the vanishing variable")
            if gone is not None:
                if gone[0] != 0:
                    continue  # a derivative dies at infinity
                # coth(+inf) = +1 in the vanishing variable
            if D is not None:
                _, k, j = D
                if j != 0:
                    continue
                coeff = coeff * (ONE if left else -ONE)
            if coeff.is_zero():
                continue
            if res_twist is None:
                res_twist = other
            elif res_twist != other:
                raise TwistError("inhomogeneous twist in the surviving variable")
            if keep is None:
                res_const = res_const + coeff
            else:
                res_terms[keep] = res_terms.get(keep, ZERO) + coeff
        return CothFun(res_const, res_terms, res_twist or TWIST0, self.ipi).prune()

    def inv_free(self) -> bool:
        return all(D is None or D[0] != "i" for (_, _, _, _, D) in self.terms)

    def __eq__(self, other):
        if not isinstance(other, BiFun):
            return NotImplemented
        if self.ipi != other.ipi and not (self.is_zero() and other.is_zero()):
            return False
        return (self - other.with_ipi(self.ipi)).is_zero()

    __hash__ = None

    def text(self) -> str:
        parts = []
        if self.ipi:
            parts.append(f"IPI^{self.ipi}")
        for key in sorted(self.terms, key=_key_sort):
            c = self.terms[key]
            lt, rt, L, R, D = key
            bits = []
            if lt != TWIST0:
                bits.append(f"zl{lt}")
            if rt != TWIST0:
                bits.append(f"zr{rt}")
            if L:
                bits.append(f"cothL({L[0]};{L[1]})")
            if R:
                bits.append(f"cothR({R[0]};{R[1]})")
            if D:
                bits.append(
                    f"cothD({D[2]};{D[1]})" if D[0] == "c" else f"InvPsi({D[1]};{D[2]:+d})"
                )
            body = "*".join(bits) if bits else "1"
            parts.append(f"[{c.text()}]*{body}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"BiFun({self.text()})"


def _key_sort(key):
    lt, rt, L, R, D = key
    return (
        lt,
        rt,
        L is not None,
        L or (0, 0),
        R is not None,
        R or (0, 0),
        D is not None,
        () if D is None else (D[0], D[1], D[2] if len(D) > 2 else 0),
    )
