"""Expansion coefficients of the one- and two-variable master functions.

Pipeline:  auxiliary solutions -> difference of logarithms -> exponent
coefficients b (and the per-twist split a) -> one-variable ratio function
and its normalization -> twisted one-variable coefficients c' (and the
alpha-negated family) by a triangular recursion -> two-variable tensor
coefficients by a second triangular recursion.  Every solve is exact; the
dual linear system and the boundary relations are kept as checkers.
"""

from __future__ import annotations

import math

from . import ring
from .cothfun import BiFun, CothFun, coth_exp_log
from .errors import CheckFailure, SolvabilityError
from .nlie import AuxSolution, compute_rho, log_aux_difference, measure_weight, solve_auxiliary
from .ring import ONE, ZERO, RingElem
from .series import BetaSeries
from .tables import CoeffTable


def binom(a: int, b: int) -> int:
    """Binomial coefficient with the convention binom(a, b) = 0 for a < b."""
    if b < 0 or a < b:
        return 0
    return math.comb(a, b)


# ---------------------------------------------------------------------------
# gamma constants
# ---------------------------------------------------------------------------

_GAMMA_CACHE: dict = {}


def gamma_value(j: int, which: str = "alpha") -> RingElem:
    """(q**x + (-1)^j q**-x) * coth^(j)(pi*nu*i) for x = alpha or kappa'-kappa."""
    key = (j, which)
    hit = _GAMMA_CACHE.get(key)
    if hit is None:
        from .cothfun import coth_shift_constant

        if which == "alpha":
            xp, xm = ring.apow(1), ring.apow(-1)
        elif which == "w":
            xp = ring.kppow(1) / ring.kpow(1)
            xm = ring.kpow(1) / ring.kppow(1)
        elif which == "-alpha":
            xp, xm = ring.apow(-1), ring.apow(1)
        else:
            raise ValueError(f"unknown exponent choice {which!r}")
        sgn = ONE if j % 2 == 0 else -ONE
        hit = ((xp + sgn * xm) * coth_shift_constant(j, 1)).canonicalize()
        _GAMMA_CACHE[key] = hit
    return hit


def gamma_triple(j: int, jp: int, l: int, which: str = "alpha") -> RingElem:
    """[(-1)^j binom(jp, l) - (-1)^jp binom(j, l)] * gamma_{j+jp-l}."""
    coeff = (-1) ** j * binom(jp, l) - (-1) ** jp * binom(j, l)
    if coeff == 0:
        return ZERO
    return ring.integer(coeff) * gamma_value(j + jp - l, which)


def gamma_tilde(jp: int, jpp: int, l: int, which: str = "alpha") -> RingElem:
    """[binom(jp, l) - (-1)^l binom(jpp, l)] * gamma_{jp+jpp-l}."""
    coeff = binom(jp, l) - (-1) ** l * binom(jpp, l)
    if coeff == 0:
        return ZERO
    return ring.integer(coeff) * gamma_value(jp + jpp - l, which)


def gamma_identity_residual(j: int, jp: int, jpp: int, l: int) -> RingElem:
    """Residual of the binomial contraction identity between the triple
    gammas; exactly zero for every index tuple.

    The second term carries (-1)**jp: that exponent is forced by deriving
    the identity from the two linear systems' compatibility, and only with
    it does the identity hold on the whole index lattice.
    """
    lhs = (
        ring.integer((-1) ** jpp * binom(jp + l, l)) * gamma_triple(jp, jpp + j, j)
        - ring.integer((-1) ** jp * binom(jpp + j, j)) * gamma_triple(jpp, jp + l, l)
    )
    rhs = ring.integer((-1) ** l * binom(j + l, l)) * gamma_tilde(jpp + j, jp + l, j + l)
    return lhs - rhs


# ---------------------------------------------------------------------------
# one-variable stage
# ---------------------------------------------------------------------------


def solve_b_table(aux_k: AuxSolution, aux_kp: AuxSolution, order: int) -> dict:
    """Exponent coefficients of the one-variable ratio function.

    The shift equation T(l + i*pi*nu) - T(l - i*pi*nu) = dlog reads off the
    +1-shift component; the -1 component must then match, and any other
    shift is a solvability failure.
    """
    diff = log_aux_difference(aux_k, aux_kp)
    b: dict = {}
    for k in range(1, order + 1):
        g = diff.grade(k)
        for (j, m), c in g.terms.items():
            if m not in (-1, 1) and not c.is_zero():
                raise SolvabilityError(f"unexpected shift {m} at grade {k}")
        plus = g.m_component(1)
        minus = g.m_component(-1)
        for j, c in plus.items():
            if j >= k:
                raise SolvabilityError(f"triangularity violated at grade {k}, j={j}")
            b[(k, j)] = c
        for j, c in minus.items():
            if not (c + b.get((k, j), ZERO)).is_zero():
                raise SolvabilityError(
                    f"shift -1 component does not mirror +1 at grade {k}, j={j}"
                )
    return b


def a_table_from_b(b: dict, order: int) -> CoeffTable:
    """Split the exponent coefficients into per-twist parts.

    The split is fixed by decay: each per-twist coefficient vanishes as
    q**(2*kappa) grows, which pins the twist-independent constants; the
    reconstruction b = a(kappa') - a(kappa) is verified entry by entry.
    """
    table = CoeffTable("a", order)
    for (k, j), val in b.items():
        a_val = -val.limit_qkp_to_infinity()
        rebuilt = a_val.relabel_kappa_to_kappap() - a_val
        if not (rebuilt - val).is_zero():
            raise SolvabilityError(
                f"exponent coefficient at k={k}, j={j} does not split per twist"
            )
        table.set((k, j), a_val.canonicalize())
    return table


def tilde_phi_series(b: dict, order: int) -> BetaSeries:
    exponent = [CothFun.zero() for _ in range(order + 1)]
    for (k, j), val in b.items():
        exponent[k] = exponent[k] + CothFun.basis(j, 0, val)
    out = coth_exp_log(BetaSeries(exponent, order), "exp", order)
    return out.map(lambda g: g.map_coeffs(lambda c: c.canonicalize()))


def phi0_series(tilde_phi: BetaSeries) -> BetaSeries:
    """Normalization: mean of the two constant asymptotics, grade by grade."""
    half = ring.rational(1, 2)
    return BetaSeries(
        [(g.asym(+1) + g.asym(-1)) * half for g in tilde_phi.grades],
        tilde_phi.order,
    )


def c_table_from_phi(phi: BetaSeries, order: int) -> CoeffTable:
    table = CoeffTable("c", order)
    for k in range(1, order + 1):
        g = phi.grade(k)
        if not g.const.is_zero():
            raise CheckFailure("normalized ratio function keeps a constant part")
        for (j, m), coeff in g.terms.items():
            if m != 0:
                raise CheckFailure("normalized ratio function leaves the 0-shift lattice")
            table.set((k, j), coeff)
    return table


# ---------------------------------------------------------------------------
# twisted recursions
# ---------------------------------------------------------------------------


def cprime_table(c: CoeffTable, order: int, negate_alpha: bool = False) -> CoeffTable:
    """Solve the singular-part matching recursion for the twisted family.

    The double inner sum is contracted once per completed order: the
    partial convolutions of the solved coefficients against the gamma
    constants are cached and reused across the target indices.
    """
    kind = "cbarp" if negate_alpha else "cp"
    which = "-alpha" if negate_alpha else "alpha"
    tw_alpha = -ring.qa_minus_qainv() if negate_alpha else ring.qa_minus_qainv()
    div = ring.qw_minus_qwinv()
    out = CoeffTable(kind, order)
    u1_cache: dict = {}
    u2_cache: dict = {}

    def u1(kpp, n):
        # sum over the solved family against the alpha-gamma ladder
        key = (kpp, n)
        if key not in u1_cache:
            vals = []
            for jpp in range(kpp):
                pv = out.get(kpp, jpp)
                if pv.is_zero():
                    continue
                g = gamma_value(n + jpp, which)
                term = pv * g
                vals.append(term if jpp % 2 == 0 else -term)
            u1_cache[key] = ring.sum_elems(vals)
        return u1_cache[key]

    def u2(kpp, j, d):
        # sum with binomial weights against the twist-difference ladder
        key = (kpp, j, d)
        if key not in u2_cache:
            vals = []
            for jpp in range(j, kpp):
                pv = out.get(kpp, jpp)
                if pv.is_zero():
                    continue
                b = binom(jpp, j)
                if not b:
                    continue
                vals.append(ring.integer(b) * pv * gamma_value(d + jpp, "w"))
            u2_cache[key] = ring.sum_elems(vals)
        return u2_cache[key]

    for k in range(1, order + 1):
        for j in range(k):
            terms = [tw_alpha * c.get(k, j)]
            for kp in range(1, k):
                for jp in range(kp):
                    cval = c.get(kp, jp)
                    if cval.is_zero():
                        continue
                    kpp = k - kp
                    b1 = binom(jp, j)
                    if b1:
                        v1 = u1(kpp, jp - j)
                        if not v1.is_zero():
                            terms.append(-(ring.integer(b1) * cval * v1))
                    v2 = u2(kpp, j, jp - j)
                    if not v2.is_zero():
                        t = cval * v2
                        terms.append(t if jp % 2 == 0 else -t)
            out.set((k, j), (ring.sum_elems(terms) / div).canonicalize())
    return out


def c2_table(cp: CoeffTable, order: int, negate_alpha: bool = False) -> CoeffTable:
    """Solve the two-variable recursion ascending in the expansion order."""
    which = "-alpha" if negate_alpha else "alpha"
    tw_alpha = -ring.qa_minus_qainv() if negate_alpha else ring.qa_minus_qainv()
    out = CoeffTable("c2", order)
    s_cache: dict = {}

    def contraction(kpp, jp, l):
        key = (kpp, jp, l)
        if key not in s_cache:
            vals = []
            for jpp in range(kpp):
                pv = cp.get(kpp, jpp)
                if pv.is_zero():
                    continue
                g = gamma_triple(jp, jpp, l, which)
                if g.is_zero():
                    continue
                vals.append(pv * g)
            s_cache[key] = ring.sum_elems(vals)
        return s_cache[key]

    for k in range(1, order + 1):
        for j in range(k):
            for l in range(k - j):
                terms = [ring.integer(binom(j + l, l)) * cp.get(k, j + l)]
                for kp in range(j + 1, k):
                    for jp in range(kp - j):
                        c2val = out.get(kp, j, jp)
                        if c2val.is_zero():
                            continue
                        s = contraction(k - kp, jp, l)
                        if not s.is_zero():
                            terms.append(-(c2val * s))
                out.set((k, j, l), (ring.sum_elems(terms) / tw_alpha).canonicalize())
    return out


def dual_system_residuals(c2: CoeffTable, cbarp: CoeffTable, order: int,
                          negate_alpha: bool = False) -> dict:
    """Residuals of the mirrored linear system, solved nowhere but checked
    everywhere; a nonzero entry means an upstream inconsistency."""
    which = "-alpha" if negate_alpha else "alpha"
    tw_alpha = -ring.qa_minus_qainv() if negate_alpha else ring.qa_minus_qainv()
    res = {}
    v_cache: dict = {}

    def contraction(kp, jp, j):
        key = (kp, jp, j)
        if key not in v_cache:
            vals = []
            for jpp in range(kp):
                bval = cbarp.get(kp, jpp)
                if bval.is_zero():
                    continue
                g = gamma_triple(jp, jpp, j, which)
                if g.is_zero():
                    continue
                term = bval * g
                vals.append(term if jpp % 2 == 0 else -term)
            v_cache[key] = ring.sum_elems(vals)
        return v_cache[key]

    for k in range(1, order + 1):
        for j in range(k):
            for l in range(k - j):
                terms = [
                    ring.integer((-1) ** (j + l)) * tw_alpha * c2.get(k, j, l),
                    ring.integer((-1) ** (j + l) * binom(j + l, l))
                    * cbarp.get(k, j + l),
                ]
                for kp in range(1, k):
                    for jp in range(k - kp - l):
                        c2val = c2.get(k - kp, jp, l)
                        if c2val.is_zero():
                            continue
                        v = contraction(kp, jp, j)
                        if v.is_zero():
                            continue
                        term = v * c2val
                        terms.append(-term if (jp + l) % 2 == 0 else term)
                res[(k, j, l)] = ring.sum_elems(terms)
    return res


def compatibility_residuals(cp: CoeffTable, cbarp: CoeffTable, order: int) -> dict:
    """Residuals of the quadratic compatibility condition tying the twisted
    family to its alpha-negated mirror."""
    tw = ring.qa_minus_qainv()
    res = {}
    w_cache: dict = {}

    def contraction(kpp, jp, j):
        key = (kpp, jp, j)
        if key not in w_cache:
            vals = []
            for jpp in range(kpp):
                bval = cbarp.get(kpp, jpp)
                if bval.is_zero():
                    continue
                coeff = (-1) ** j * binom(jp, j) - binom(jpp, j)
                if coeff == 0:
                    continue
                vals.append(ring.integer(coeff) * bval * gamma_value(jp + jpp - j, "alpha"))
            w_cache[key] = ring.sum_elems(vals)
        return w_cache[key]

    for k in range(1, order + 1):
        for j in range(k):
            terms = [tw * (cp.get(k, j) + cbarp.get(k, j))]
            for kp in range(1, k):
                for jp in range(kp):
                    cval = cp.get(kp, jp)
                    if cval.is_zero():
                        continue
                    w = contraction(k - kp, jp, j)
                    if w.is_zero():
                        continue
                    term = cval * w
                    terms.append(term if jp % 2 == 0 else -term)
            res[(k, j)] = ring.sum_elems(terms)
    return res


def boundary_residuals(c2: CoeffTable, cp: CoeffTable, cbarp: CoeffTable,
                       order: int, negate_alpha: bool = False) -> dict:
    """Outer-row relations: first row against the mirrored family, first
    column against the twisted family."""
    tw_alpha = -ring.qa_minus_qainv() if negate_alpha else ring.qa_minus_qainv()
    res = {}
    for k in range(1, order + 1):
        for j in range(k):
            res[("row", k, j)] = c2.get(k, j, 0) + cbarp.get(k, j) / tw_alpha
            res[("col", k, j)] = c2.get(k, 0, j) - cp.get(k, j) / tw_alpha
    return res


# ---------------------------------------------------------------------------
# assembly into concrete function objects
# ---------------------------------------------------------------------------


def assemble_phi_one(c: CoeffTable, order: int) -> BetaSeries:
    """Normalized one-variable ratio function, twist zeta**(kappa-kappa')."""
    tw = (0, 1, -1, 0)
    grades = [CothFun.constant(ONE, twist=tw)]
    for k in range(1, order + 1):
        g = CothFun(twist=tw)
        terms = {}
        for (kk, j), val in c.entries.items():
            if kk == k and not val.is_zero():
                terms[(j, 0)] = val
        g.terms = terms
        grades.append(g)
    return BetaSeries(grades, order)


def assemble_phi_one_alpha(cp: CoeffTable, order: int, eps: int = 1) -> BetaSeries:
    """Twisted one-variable master function, twist zeta**(-eps*alpha)."""
    tw = (-eps, 0, 0, 0)
    grades = [CothFun.constant(ONE, twist=tw)]
    for k in range(1, order + 1):
        terms = {}
        for (kk, j), val in cp.entries.items():
            if kk == k and not val.is_zero():
                terms[(j, 0)] = val
        grades.append(CothFun(terms=terms, twist=tw))
    return BetaSeries(grades, order)


def assemble_phi_two(c2: CoeffTable, order: int, eps: int = 1) -> BetaSeries:
    """Two-variable master function: half-weighted twisted tensor part plus
    the antidifference symbol at grade zero."""
    lt = (eps, 0, 0, 0)
    rt = (-eps, 0, 0, 0)
    half = ring.rational(1, 2)
    grades = [BiFun.inv_psi_symbol(eps)]
    for k in range(1, order + 1):
        f = BiFun()
        for (kk, j, l), val in c2.entries.items():
            if kk == k and not val.is_zero():
                f._bump((lt, rt, (j, 0), (l, 0), None), val * half)
        grades.append(f.normalize())
    return BetaSeries(grades, order)


# ---------------------------------------------------------------------------
# pipeline orchestration
# ---------------------------------------------------------------------------


class Pipeline:
    """Lazily computed chain from the auxiliary solutions to every table
    and assembled function object at a fixed truncation order."""

    def __init__(self, order: int):
        self.order = order
        self._cache: dict = {}

    def _get(self, name, builder):
        if name not in self._cache:
            self._cache[name] = builder()
        return self._cache[name]

    @property
    def aux_k(self) -> AuxSolution:
        return self._get("aux_k", lambda: solve_auxiliary("kappa", self.order))

    @property
    def aux_kp(self) -> AuxSolution:
        return self._get("aux_kp", lambda: solve_auxiliary("kappa_prime", self.order))

    @property
    def b(self) -> dict:
        return self._get("b", lambda: solve_b_table(self.aux_k, self.aux_kp, self.order))

    @property
    def a_table(self) -> CoeffTable:
        return self._get("a", lambda: a_table_from_b(self.b, self.order))

    @property
    def tilde_phi(self) -> BetaSeries:
        return self._get("tilde_phi", lambda: tilde_phi_series(self.b, self.order))

    @property
    def phi0(self) -> BetaSeries:
        return self._get("phi0", lambda: phi0_series(self.tilde_phi))

    @property
    def phi(self) -> BetaSeries:
        def build():
            inv = self.phi0.inverse(lambda g0: g0.inverse())
            out = self.tilde_phi.mul(
                BetaSeries([CothFun.constant(g) for g in inv.grades], self.order)
            )
            return out.map(lambda g: g.map_coeffs(lambda c: c.canonicalize()))

        return self._get("phi", build)

    @property
    def c_table(self) -> CoeffTable:
        return self._get("c", lambda: c_table_from_phi(self.phi, self.order))

    @property
    def cp_table(self) -> CoeffTable:
        return self._get("cp", lambda: cprime_table(self.c_table, self.order, False))

    @property
    def cbarp_table(self) -> CoeffTable:
        return self._get("cbarp", lambda: cprime_table(self.c_table, self.order, True))

    @property
    def c2_table(self) -> CoeffTable:
        return self._get("c2", lambda: c2_table(self.cp_table, self.order, False))

    @property
    def c2_neg_table(self) -> CoeffTable:
        """Two-variable table of the alpha-negated pipeline (the mirrored
        one-variable families swap roles)."""
        return self._get("c2n", lambda: c2_table(self.cbarp_table, self.order, True))

    @property
    def rho(self) -> BetaSeries:
        return self._get(
            "rho", lambda: compute_rho(self.aux_k, self.aux_kp, self.tilde_phi)
        )

    @property
    def weight(self) -> BetaSeries:
        return self._get("weight", lambda: measure_weight(self.aux_k, self.rho))

    def table(self, kind: str) -> CoeffTable:
        return {
            "a": lambda: self.a_table,
            "c": lambda: self.c_table,
            "cp": lambda: self.cp_table,
            "cbarp": lambda: self.cbarp_table,
            "c2": lambda: self.c2_table,
        }[kind]()

    # assembled objects ------------------------------------------------------

    @property
    def phi_one(self) -> BetaSeries:
        return self._get("phi_one", lambda: assemble_phi_one(self.c_table, self.order))

    def phi_one_alpha(self, eps: int = 1) -> BetaSeries:
        key = ("phi_one_alpha", eps)
        table = self.cp_table if eps > 0 else self.cbarp_table
        return self._get(key, lambda: assemble_phi_one_alpha(table, self.order, eps))

    def phi_two(self, eps: int = 1) -> BetaSeries:
        key = ("phi_two", eps)
        table = self.c2_table if eps > 0 else self.c2_neg_table
        return self._get(key, lambda: assemble_phi_two(table, self.order, eps))


# spec-facing wrappers ---------------------------------------------------------


def phi_one(aux_k: AuxSolution, aux_kp: AuxSolution, order: int):
    """One-variable stage: returns (c table, a table)."""
    b = solve_b_table(aux_k, aux_kp, order)
    tilde = tilde_phi_series(b, order)
    phi0 = phi0_series(tilde)
    inv = phi0.inverse(lambda g0: g0.inverse())
    phi = tilde.mul(BetaSeries([CothFun.constant(g) for g in inv.grades], order))
    return c_table_from_phi(phi, order), a_table_from_b(b, order)


def phi_alpha(c: CoeffTable, alpha_sign: int, order: int) -> CoeffTable:
    return cprime_table(c, order, negate_alpha=alpha_sign < 0)


def phi_master(cp: CoeffTable, cbarp: CoeffTable, order: int) -> CoeffTable:
    """Two-variable stage with the dual system and boundary rows asserted."""
    out = c2_table(cp, order, False)
    for idx, r in dual_system_residuals(out, cbarp, order).items():
        if not r.is_zero():
            raise CheckFailure(f"dual system residual nonzero at {idx}")
    for idx, r in boundary_residuals(out, cp, cbarp, order).items():
        if not r.is_zero():
            raise CheckFailure(f"boundary relation fails at {idx}")
    return out
