"""Physical functions built from the master objects by difference operators.

Everything here is a graded series of exact function objects.  The
operators are

    Delta f = f(q.) - f(1/q .)
    delta^- f = f(q.) - rho * f
    H = occ_bar * d+  +  occ * d-  -  rho

acting in either spectral variable; occ = 1/(1+a), occ_bar = 1 - occ and
rho are the graded series from the auxiliary stage.  Factors of 1/(2*pi*i)
ride along as an integer power on each function object.
"""

from __future__ import annotations

from . import ring
from .cothfun import BiFun, CothFun, psi_diff_term, twist_add
from .errors import GradingError
from .master import Pipeline
from .ring import ONE
from .series import BetaSeries


def _bzero():
    return BiFun.zero()


def bi_constant_series(bifun: BiFun, order: int) -> BetaSeries:
    return BetaSeries.from_grade(0, bifun, order, _bzero)


def embed_onevar(F: BetaSeries, side: str) -> BetaSeries:
    """Lift a one-variable series into the two-variable algebra."""
    grades = []
    for g in F.grades:
        tw = g.twist
        f = BiFun(ipi=g.ipi)
        lt, rt = (tw, (0, 0, 0, 0)) if side == "left" else ((0, 0, 0, 0), tw)
        if not g.const.is_zero():
            f._bump((lt, rt, None, None, None), g.const)
        for (j, m), c in g.terms.items():
            slot = (j, m)
            key = (lt, rt, slot, None, None) if side == "left" else (lt, rt, None, slot, None)
            f._bump(key, c)
        grades.append(f)
    return BetaSeries(grades, F.order)


def to_onevar(F: BetaSeries, side: str) -> BetaSeries:
    """Project a two-variable series that only involves one variable."""
    grades = []
    for g in F.grades:
        out = CothFun(ipi=g.ipi)
        twist = None
        for (lt, rt, L, R, D), c in g.terms.items():
            if D is not None:
                raise GradingError("difference terms survive in a one-variable cast")
            own, other = (lt, rt) if side == "left" else (rt, lt)
            slot, dead = (L, R) if side == "left" else (R, L)
            if dead is not None or other != (0, 0, 0, 0):
                raise GradingError("two-variable content survives in a one-variable cast")
            if twist is None:
                twist = own
            elif twist != own:
                raise GradingError("inhomogeneous twist in a one-variable cast")
            if slot is None:
                out.const = out.const + c
            else:
                out.terms[slot] = out.terms.get(slot, ring.ZERO) + c
        out.twist = twist or (0, 0, 0, 0)
        grades.append(out.prune())
    return BetaSeries(grades, F.order)


def mul_onevar_series(F: BetaSeries, g: BetaSeries, side: str) -> BetaSeries:
    """Cauchy product of a two-variable series with a one-variable series
    living on `side`."""
    F._check(g)
    grades = []
    for n in range(F.order + 1):
        acc = BiFun.zero()
        for i in range(n + 1):
            a, b = F.grades[i], g.grades[n - i]
            if a.is_zero() or b.is_zero():
                continue
            acc = acc + a.mul_onevar(b, side)
        grades.append(acc)
    return BetaSeries(grades, F.order)


def delta_series(F: BetaSeries, variable: str) -> BetaSeries:
    return F.map(lambda g: g.delta(variable))


def dplus_series(F: BetaSeries, variable: str, s: int = 1) -> BetaSeries:
    return F.map(lambda g: g.dshift(variable, s))


def delta_minus(F: BetaSeries, pipe: Pipeline, variable: str) -> BetaSeries:
    """f(q.) - rho*f in the requested variable."""
    return dplus_series(F, variable, +1) - mul_onevar_series(F, pipe.rho, variable)


def apply_H(F: BetaSeries, pipe: Pipeline, variable: str) -> BetaSeries:
    """occ_bar*f(q.) + occ*f(q^-1 .) - rho*f in the requested variable."""
    if F.order != pipe.order:
        raise GradingError("series order does not match the pipeline order")
    up = dplus_series(F, variable, +1)
    dn = dplus_series(F, variable, -1)
    return (
        mul_onevar_series(up, pipe.aux_k.occ_bar, variable)
        + mul_onevar_series(dn, pipe.aux_k.occ, variable)
        - mul_onevar_series(F, pipe.rho, variable)
    )


def bump_ipi(F: BetaSeries, n: int) -> BetaSeries:
    return F.map(lambda g: g.with_ipi(g.ipi + n))


def canonical_series(F: BetaSeries) -> BetaSeries:
    return F.map(lambda g: g.map_coeffs(lambda c: c.canonicalize()))


# ---------------------------------------------------------------------------
# kernels and sources
# ---------------------------------------------------------------------------


def psi_bifun(eps: int = 1, shift: int = 0, coeff=ONE) -> BiFun:
    """psi(q**shift * x, eps*alpha) with x the ratio of the two slots."""
    key, c = psi_diff_term(shift, eps, coeff)
    return BiFun({key: c})


def kernel_K(eps: int = 1) -> BiFun:
    """Twisted difference kernel: (1/2 pi i) * Delta_1 psi(x, eps*alpha)."""
    return psi_bifun(eps).delta("left").with_ipi(1)


def kernels(pipe: Pipeline, which: str, eps: int = 1):
    """Kernel and source builders; series where the eigenvalue ratio enters."""
    K = pipe.order
    if which == "psi":
        return psi_bifun(eps)
    if which == "K":
        return kernel_K(eps)
    if which == "f_left":
        base = bi_constant_series(psi_bifun(eps), K)
        return canonical_series(bump_ipi(delta_minus(base, pipe, "left"), 1))
    if which == "f_right":
        base = bi_constant_series(psi_bifun(eps), K)
        return canonical_series(delta_minus(base, pipe, "right"))
    if which == "omega0":
        base = bi_constant_series(BiFun.inv_psi_symbol(eps), K)
        return canonical_series(
            delta_minus(delta_minus(base, pipe, "right"), pipe, "left")
        )
    raise ValueError(f"unknown kernel {which!r}")


# ---------------------------------------------------------------------------
# derived functions
# ---------------------------------------------------------------------------


def derive(pipe: Pipeline, which: str, eps: int = 1):
    """sigma, R, G, Gbar, omega, Psi at the pipeline's truncation order."""
    key = ("derived", which, eps)

    def build():
        if which == "sigma":
            return pipe.phi_one_alpha(eps).map(lambda g: g.delta())
        phi2 = pipe.phi_two(eps)
        if which == "R":
            out = bump_ipi(
                delta_series(delta_series(phi2, "left"), "right"), 1
            ).scale(-ONE)
        elif which == "G":
            out = delta_series(apply_H(phi2, pipe, "right"), "left")
        elif which == "Gbar":
            out = bump_ipi(
                apply_H(delta_series(phi2, "right"), pipe, "left"), 1
            ).scale(-ONE)
        elif which == "omega":
            out = apply_H(apply_H(phi2, pipe, "right"), pipe, "left").scale(
                ring.integer(4)
            )
        elif which == "Psi":
            quarter = derive(pipe, "omega", eps).scale(ring.rational(1, 4))
            out = quarter - kernels(pipe, "omega0", eps)
        else:
            raise ValueError(f"unknown derived function {which!r}")
        return canonical_series(out)

    return pipe._get(key, build)
