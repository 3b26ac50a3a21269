"""Order-by-order high-temperature solution of the auxiliary-function
nonlinear integral equation, plus the closed-form contour convolution
against the undressed kernel.

Calibration.  Two global conventions are fixed once against the printed
low-order coefficient table of the exponential factorization (see
``masterfun.master``):

* ``ORIENTATION`` -- the direction of the contour around the essential
  singularity; it multiplies every residue sum.
* the driving term carries the full bare-energy weight
  ``-(q - 1/q) * (coth(l) - coth(l + pi*nu*i))`` per power of beta; this
  normalization together with ORIENTATION = -1 is the unique choice that
  reproduces the whole reference table, and it is asserted in the tests.
"""

from __future__ import annotations

from . import ring
from .cothfun import CothFun, coth_exp_log
from .errors import SolvabilityError, TwistError
from .ring import ONE, RingElem
from .series import BetaSeries

#: Global contour orientation for every residue computation.
ORIENTATION = -1


def convolve_K(f: CothFun, alpha_eps: int = 0) -> CothFun:
    """Closed-form loop integral of ``K_eps(zeta/xi) f(xi)`` over the small
    contour around the essential singularity.

    Only unshifted basis terms of ``f`` have a pole inside; each residue
    replaces coth^(j)(mu) by the kernel's j-th derivative, so the output is
    supported on shifts +-1.  Constants and shifted terms map to zero.
    ``alpha_eps`` selects the kernel twist; ``f`` must carry the matching
    power prefactor so that the integrand is twist free.
    """
    need = (alpha_eps, 0, 0, 0)
    if not f.is_zero() and f.twist != need:
        raise TwistError("integrand keeps a net twist inside the contour")
    qa_p = ring.apow(alpha_eps)
    qa_m = ring.apow(-alpha_eps)
    out = CothFun(twist=need, ipi=f.ipi)
    terms: dict = {}
    for (j, m), c in f.terms.items():
        if m != 0 or c.is_zero():
            continue
        plus = c * qa_p if alpha_eps else c
        minus = c * qa_m if alpha_eps else c
        if ORIENTATION < 0:
            plus, minus = -plus, -minus
        terms[(j, 1)] = terms.get((j, 1), ring.ZERO) + plus
        terms[(j, -1)] = terms.get((j, -1), ring.ZERO) - minus
    out.terms = terms
    return out.prune()


def bare_energy() -> CothFun:
    """coth(l) - coth(l + pi*nu*i)."""
    return CothFun(terms={(0, 0): ONE, (0, 1): -ONE})


def drive_term() -> CothFun:
    """Grade-1 driving term of the logarithmic auxiliary function."""
    return bare_energy().scale(-ring.q_minus_qinv())


class AuxSolution:
    """High-temperature solution data for one twist parameter."""

    def __init__(self, kappa_tag: str, order: int):
        if kappa_tag not in ("kappa", "kappa_prime"):
            raise ValueError("kappa_tag must be 'kappa' or 'kappa_prime'")
        self.kappa_tag = kappa_tag
        self.order = order
        self.a0 = ring.kpow(-2) if kappa_tag == "kappa" else ring.kppow(-2)
        self.v = ring.v_kappa() if kappa_tag == "kappa" else ring.v_kappa_prime()
        self.log_aux: BetaSeries = None  # log(a) - log(a0), CothFun grades
        self.one_plus_a: BetaSeries = None
        self.occ: BetaSeries = None  # 1/(1 + a)
        self.occ_bar: BetaSeries = None  # 1/(1 + 1/a)
        self.log_one_plus_a: BetaSeries = None  # up to an irrelevant constant


def _zero():
    return CothFun.zero()


def _canonical_series(F: BetaSeries) -> BetaSeries:
    return F.map(lambda g: g.map_coeffs(lambda c: c.canonicalize()))


def solve_auxiliary(kappa_tag: str, order: int) -> AuxSolution:
    """Solve the nonlinear integral equation grade by grade.

    The iteration is strictly triangular: grade k of the convolution input
    splits into products of grades < k plus the linear term whose unshifted
    part is already fixed by the drive, so each grade is explicit.
    """
    sol = AuxSolution(kappa_tag, order)
    K = order
    drive = drive_term()
    a0, v = sol.a0, sol.v
    ratio0 = a0 / (ONE + a0)  # = 1/v
    inv_k = [ONE] + [ring.rational(1, k) for k in range(1, K + 1)]
    grades = [CothFun.zero() for _ in range(K + 1)]
    # log(1 + a) = const + N with N = log(1 + ratio0*(e^L - 1)); both the
    # exponential E of L and N are grown one grade at a time: the exp and
    # log recursions only read lower grades, so earlier entries stay valid.
    E = [CothFun.constant(ONE)]  # e^L
    X = [CothFun.zero()]  # ratio0*(e^L - 1)
    N = [CothFun.zero()]

    for k in range(1, K + 1):
        drive_k = drive if k == 1 else CothFun.zero()
        # products-only part of grade k (the new grade L_k still zero)
        e_part = CothFun.zero()
        for i in range(1, k):
            if grades[i].is_zero() or E[k - i].is_zero():
                continue
            e_part = e_part + grades[i].scale(ring.integer(i)).mul(E[k - i])
        e_part = e_part.scale(inv_k[k])
        x_part = e_part.scale(ratio0)
        n_part = x_part.scale(ring.integer(k))
        for i in range(1, k):
            if N[i].is_zero() or X[k - i].is_zero():
                continue
            n_part = n_part - N[i].scale(ring.integer(i)).mul(X[k - i])
        n_part = n_part.scale(inv_k[k])
        feed = n_part + drive_k.singular_part(0).scale(ratio0)
        grades[k] = (drive_k + (-convolve_K(feed))).map_coeffs(
            lambda c: c.canonicalize()
        )
        # finish grade k of the running series with the now-known L_k
        E.append(e_part + grades[k])
        X.append(E[k].scale(ratio0))
        N.append(n_part + grades[k].scale(ratio0))

    sol.log_aux = BetaSeries(grades, K)

    one_plus = [CothFun.constant(ONE + a0)]
    for i in range(1, K + 1):
        one_plus.append(E[i].scale(a0))
    sol.one_plus_a = _canonical_series(BetaSeries(one_plus, K))
    sol.occ = _canonical_series(
        sol.one_plus_a.inverse(lambda g0: CothFun.constant(g0.const.inverse()))
    )
    unit = BetaSeries.constant(CothFun.constant(ONE), K, _zero)
    sol.occ_bar = unit - sol.occ
    sol.log_one_plus_a = BetaSeries(N, K)
    return sol


def nlie_residual(sol: AuxSolution) -> BetaSeries:
    """log(a) - drive + conv(log(1+a)), which must vanish identically."""
    K = sol.order
    drive_series = BetaSeries.from_grade(1, drive_term(), K, _zero) if K >= 1 else None
    conv = BetaSeries(
        [convolve_K(g.singular_part(0)) for g in sol.log_one_plus_a.grades], K
    )
    return sol.log_aux - drive_series + conv


def log_aux_difference(aux_k: AuxSolution, aux_kp: AuxSolution) -> BetaSeries:
    """log a(kappa') - log a(kappa) up to the constant; every grade must
    have a vanishing unshifted component for the master functional equation
    to be solvable, and that is asserted here."""
    if aux_k.order != aux_kp.order:
        raise SolvabilityError("auxiliary solutions have different orders")
    diff = aux_kp.log_aux - aux_k.log_aux
    for k, g in enumerate(diff.grades):
        if not g.singular_part(0).is_zero():
            raise SolvabilityError(
                f"unshifted component survives in the twist difference at grade {k}"
            )
    return diff


def compute_rho(aux_k: AuxSolution, aux_kp: AuxSolution, tilde_phi: BetaSeries,
                order: int = None) -> BetaSeries:
    """Eigenvalue ratio as a graded series from the difference relation
    rho * P = P(q.)/(1 + 1/a) + P(q^-1 .)/(1 + a) with P the one-variable
    ratio function; exact graded division by P."""
    K = aux_k.order if order is None else order
    tw = ring.kpow(1) / ring.kppow(1)  # q**(kappa - kappa')
    up = BetaSeries([g.shift(1) for g in tilde_phi.grades], tilde_phi.order)
    dn = BetaSeries([g.shift(-1) for g in tilde_phi.grades], tilde_phi.order)
    num = aux_k.occ_bar.mul(up).scale(tw) + aux_k.occ.mul(dn).scale(tw.inverse())
    rho = num.mul(tilde_phi.inverse(lambda g0: CothFun.constant(g0.const.inverse())))
    rho = _canonical_series(rho)
    return rho.truncate(K) if rho.order != K else rho


def measure_weight(aux_k: AuxSolution, rho: BetaSeries) -> BetaSeries:
    """1 / (rho * (1 + a)): the weight of the convolution measure."""
    prod = rho.mul(aux_k.one_plus_a)
    return _canonical_series(
        prod.inverse(lambda g0: CothFun.constant(g0.const.inverse()))
    )


def occupation_partition_residual(sol: AuxSolution) -> BetaSeries:
    """1/(1+a) + 1/(1+1/a) - 1, exactly zero at every grade."""
    unit = BetaSeries.constant(CothFun.constant(ONE), sol.order, _zero)
    return sol.occ + sol.occ_bar - unit
