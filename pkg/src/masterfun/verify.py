"""Exact machine checks of every identity and integral equation.

The convolution over the closed contour is evaluated in closed form by
residues.  At a fixed expansion grade the integrand is a finite sum of
terms

    coeff * [pure-eta part P(mu)] * [A = coth^(j1)(l - mu + k1*pi*nu*i)]
          * [B = coth^(j2)(mu - l' + k2*pi*nu*i)]

(with A, B optional and the eta twists already cancelled).  Three pole
families sit inside the contour:

* mu = 0 from the unshifted terms of P,
* mu = l' (only when k2 = 0) from B,
* mu = l  (only when k1 = 0) from A,

everything else (shifted lattice points, kernel poles) stays outside.
Each residue needs only the single pure pole of coth^(j) and Leibniz
derivatives of the regular cofactors, so the result lands back in the
basis exactly.  The global ORIENTATION from the auxiliary stage
multiplies every residue sum, and each integral trades one power of
2*pi*i against the function objects' bookkeeping exponent.
"""

from __future__ import annotations

import math
import time

from . import ring
from .cothfun import BiFun, CothFun, TermAccumulator, reduce_cross, reduce_same
from .derived import (
    apply_H,
    bi_constant_series,
    bump_ipi,
    delta_series,
    derive,
    embed_onevar,
    kernels,
    to_onevar,
)
from .errors import TwistError
from .master import (
    Pipeline,
    boundary_residuals,
    compatibility_residuals,
    dual_system_residuals,
    gamma_identity_residual,
)
from .nlie import ORIENTATION
from .ring import ONE, ZERO, RingElem
from .series import BetaSeries

TW0 = (0, 0, 0, 0)


def _slot_product(parts):
    """Product of 0..2 same-variable basis factors -> [(slot|None, coeff)]."""
    parts = [p for p in parts if p is not None]
    if not parts:
        return [(None, ONE)]
    if len(parts) == 1:
        return [(parts[0], ONE)]
    (j1, m1), (j2, m2) = parts
    if m1 == m2:
        const, coeffs = reduce_same(j1, j2)
        out = [(None, const)] if not const.is_zero() else []
        out += [((r, m1), c) for r, c in coeffs.items()]
        return out
    const, alphas, betas = reduce_cross(j1, j2, m2 - m1)
    out = [(None, const)] if not const.is_zero() else []
    out += [((r, m1), c) for r, c in alphas.items()]
    out += [((s, m2), c) for s, c in betas.items()]
    return out


def _contour_pair(fkey, fc, gkey, gc, wb: CothFun, out, pcache: dict):
    """Add the contour integral of one integrand term pair into ``out``."""
    lt1, rt1, L1, R1, D1 = fkey
    lt2, rt2, L2, R2, D2 = gkey
    for D in (D1, D2):
        if D is not None and D[0] == "i":
            raise TwistError("antidifference symbols cannot enter the convolution")
    if tuple(a + b for a, b in zip(rt1, lt2)) != TW0:
        raise TwistError("net eta twist left in the convolution integrand")
    A = (D1[1], D1[2]) if D1 is not None else None  # (k1, j1)
    B = (D2[1], D2[2]) if D2 is not None else None  # (k2, j2)
    pkey = (id(wb), R1, L2)
    P = pcache.get(pkey)
    if P is None:
        P = wb
        if R1 is not None:
            P = P.mul(CothFun.basis(*R1))
        if L2 is not None:
            P = P.mul(CothFun.basis(*L2))
        pcache[pkey] = P
    cc = fc * gc
    orient = ring.integer(ORIENTATION)
    pieces = []  # (extraL, extraR, D, coeff)

    # residues at mu = 0 from the unshifted part of P
    for (r, mm), p in P.terms.items():
        if mm != 0 or p.is_zero():
            continue
        base = orient * ring.integer(2 * (-1) ** r) * p * cc
        for t in range(r + 1):
            s = r - t
            if A is None and t:
                continue
            if B is None and s:
                continue
            coeff = base * ring.integer(math.comb(r, t))
            extraL = extraR = None
            if A is not None:
                k1, j1 = A
                extraL = (j1 + t, k1)
                if t % 2:
                    coeff = -coeff
            if B is not None:
                k2, j2 = B
                extraR = (j2 + s, -k2)
                if (j2 + s + 1) % 2:
                    coeff = -coeff
            pieces.append((extraL, extraR, None, coeff))

    # residue at mu = l' from an unshifted B factor
    if B is not None and B[0] == 0:
        j2 = B[1]
        base = orient * ring.integer(2 * (-1) ** j2) * cc
        for t in range(j2 + 1):
            s = j2 - t
            if A is None and s:
                continue
            comb = ring.integer(math.comb(j2, t))
            dpart = None
            asign = ONE
            if A is not None:
                k1, j1 = A
                dpart = ("c", k1, j1 + s)
                if s % 2:
                    asign = -ONE
            if t == 0 and not P.const.is_zero():
                pieces.append((None, None, dpart, base * comb * asign * P.const))
            for (r, mm), p in P.terms.items():
                if p.is_zero():
                    continue
                pieces.append(((None), (r + t, mm), dpart, base * comb * asign * p))

    # residue at mu = l from an unshifted A factor (measure direction flips)
    if A is not None and A[0] == 0:
        j1 = A[1]
        base = orient * ring.integer(-2 * (-1) ** j1) * cc
        for t in range(j1 + 1):
            s = j1 - t
            if B is None and s:
                continue
            comb = ring.integer(math.comb(j1, t))
            dpart = None
            bsign = ONE
            if B is not None:
                k2, j2 = B
                dpart = ("c", k2, j2 + s)
                if s % 2:
                    bsign = -ONE
            tsign = -ONE if t % 2 else ONE
            if t == 0 and not P.const.is_zero():
                pieces.append((None, None, dpart, base * comb * bsign * P.const))
            for (r, mm), p in P.terms.items():
                if p.is_zero():
                    continue
                pieces.append(
                    (((r + t, mm)), None, dpart, base * comb * bsign * tsign * p)
                )

    for extraL, extraR, dpart, coeff in pieces:
        if coeff.is_zero():
            continue
        for slotL, cL in _slot_product([L1, extraL]):
            for slotR, cR in _slot_product([R2, extraR]):
                out.bump((lt1, rt2, slotL, slotR, dpart), coeff * cL * cR)


def _contour_grade(acc, fb: BiFun, gb: BiFun, wb: CothFun, pcache: dict):
    for fkey, fc in fb.terms.items():
        if fc.is_zero():
            continue
        for gkey, gc in gb.terms.items():
            if gc.is_zero():
                continue
            _contour_pair(fkey, fc, gkey, gc, wb, acc, pcache)


def contour_bifun(fb: BiFun, gb: BiFun, wb: CothFun) -> BiFun:
    """One fixed-grade contour integral of f(., eta) g(eta, ..) dm(eta)."""
    acc = TermAccumulator()
    _contour_grade(acc, fb, gb, wb, {})
    return BiFun(acc.finalize(), fb.ipi + gb.ipi + wb.ipi - 1)


def star(f: BetaSeries, g: BetaSeries, pipe: Pipeline) -> BetaSeries:
    """Graded convolution with the thermal measure."""
    f._check(g)
    w = pipe.weight
    order = f.order
    ipis = {fb.ipi for fb in f.grades if not fb.is_zero()}
    gpis = {gb.ipi for gb in g.grades if not gb.is_zero()}
    ipi = (ipis.pop() if ipis else 0) + (gpis.pop() if gpis else 0) - 1
    grades = []
    pcache: dict = {}
    for n in range(order + 1):
        acc = TermAccumulator()
        for i in range(n + 1):
            if f.grades[i].is_zero():
                continue
            for j in range(n - i + 1):
                if g.grades[j].is_zero():
                    continue
                k = n - i - j
                _contour_grade(acc, f.grades[i], g.grades[j], w.grades[k], pcache)
        grades.append(BiFun(acc.finalize(), ipi))
    return BetaSeries(grades, order)


def inv_part(F: BetaSeries, eps: int = 1) -> BetaSeries:
    """Total dressed coefficient of the antidifference symbols, summed over
    the two parity references (the symbols themselves removed)."""
    grades = []
    for g in F.grades:
        out = BiFun(ipi=g.ipi)
        for (lt, rt, L, R, D), c in g.terms.items():
            if D is not None and D[0] == "i" and D[2] == eps:
                out._bump((lt, rt, L, R, None), c)
        grades.append(out.normalize())
    return BetaSeries(grades, F.order)


# ---------------------------------------------------------------------------
# the check suites
# ---------------------------------------------------------------------------


class CheckReport:
    def __init__(self, name, order, passed, detail="", seconds=0.0):
        self.name = name
        self.order = order
        self.passed = passed
        self.detail = detail
        self.seconds = seconds

    def __repr__(self):
        flag = "pass" if self.passed else "FAIL"
        return f"CheckReport({self.name}@K={self.order}: {flag}, {self.seconds:.2f}s)"

    def to_json(self):
        return {
            "check": self.name,
            "order": self.order,
            "passed": self.passed,
            "residual": self.detail,
            "seconds": round(self.seconds, 3),
        }


def _series_zero(F: BetaSeries):
    for k, g in enumerate(F.grades):
        if not g.is_zero():
            return False, f"grade {k}: {g.text() if hasattr(g, 'text') else g!r}"
    return True, ""


def _elem_equal(a: RingElem, b: RingElem) -> bool:
    ca, cb = a.canonicalize(), b.canonicalize()
    if ca.unit == cb.unit and ca.den == cb.den and ca.num == cb.num:
        return True
    return (a - b).is_zero()


def _series_equal(F: BetaSeries, G: BetaSeries):
    """Gradewise equality using canonical structural comparison per term;
    canonical forms are unique, so matching keys compare without any
    large-polynomial arithmetic."""
    for k, (fg, gg) in enumerate(zip(F.grades, G.grades)):
        if isinstance(fg, CothFun):
            if fg.is_zero() and gg.is_zero():
                continue
            if fg.twist != gg.twist or fg.ipi != gg.ipi:
                return False, f"grade {k}: prefactor mismatch"
            if not _elem_equal(fg.const, gg.const):
                return False, f"grade {k}: constant part differs"
            keys = set(fg.terms) | set(gg.terms)
            for key in keys:
                if not _elem_equal(fg.terms.get(key, ZERO), gg.terms.get(key, ZERO)):
                    return False, f"grade {k}: term {key} differs"
        else:
            if fg.is_zero() and gg.is_zero():
                continue
            if fg.ipi != gg.ipi:
                return False, f"grade {k}: bookkeeping power differs"
            keys = set(fg.terms) | set(gg.terms)
            for key in keys:
                if not _elem_equal(fg.terms.get(key, ZERO), gg.terms.get(key, ZERO)):
                    return False, f"grade {k}: term {key} differs"
    return True, ""


def _specialize_fun(obj, regime: str):
    if regime == "kp=k+a":
        sub = lambda c: c.subs_kappap_eq_kappa_plus_alpha()
        tmap = lambda t: (t[0] + t[2], t[1] + t[2], 0, t[3])
    elif regime == "kp=k":
        sub = lambda c: c.subs_kappap_eq_kappa()
        tmap = lambda t: (t[0], t[1] + t[2], 0, t[3])
    else:
        raise ValueError(regime)
    if isinstance(obj, CothFun):
        return obj.map_coeffs(sub, tmap)
    return obj.map_coeffs(sub, tmap)


def specialize_series(F: BetaSeries, regime: str) -> BetaSeries:
    return F.map(lambda g: _specialize_fun(g, regime))


def sigma_drive() -> CothFun:
    """Delta applied to the bare power prefactor."""
    return CothFun.constant(ring.apow(-1) - ring.apow(1), twist=(-1, 0, 0, 0))


CHECK_NAMES = (
    "gamma-id",
    "compat",
    "cj0",
    "dual",
    "HPhi",
    "symmetries",
    "limits",
    "resolvent-eq",
    "G-eq",
    "Gbar-eq",
    "sigma-eq",
    "normalization",
    "omega-eq",
    "specialize",
)


def run_check(pipe: Pipeline, name: str, order: int = None) -> CheckReport:
    """Run one named identity suite at the pipeline's order."""
    t0 = time.time()
    K = pipe.order if order is None else order
    if K > pipe.order:
        raise ValueError("requested order exceeds the pipeline order")
    passed, detail = True, ""

    if name == "gamma-id":
        box = 5
        for j in range(box):
            for jp in range(box):
                for jpp in range(box):
                    for l in range(box):
                        r = gamma_identity_residual(j, jp, jpp, l)
                        if not r.is_zero():
                            passed, detail = False, f"{(j, jp, jpp, l)}: {r.text()}"
                            break

    elif name == "compat":
        for idx, r in compatibility_residuals(pipe.cp_table, pipe.cbarp_table, K).items():
            if not r.is_zero():
                passed, detail = False, f"{idx}: {r.text()}"
                break

    elif name == "cj0":
        for idx, r in boundary_residuals(
            pipe.c2_table, pipe.cp_table, pipe.cbarp_table, K
        ).items():
            if not r.is_zero():
                passed, detail = False, f"{idx}: {r.text()}"
                break

    elif name == "dual":
        for idx, r in dual_system_residuals(pipe.c2_table, pipe.cbarp_table, K).items():
            if not r.is_zero():
                passed, detail = False, f"{idx}: {r.text()}"
                break

    elif name == "HPhi":
        for side in ("left", "right"):
            res = apply_H(embed_onevar(pipe.phi_one, side), pipe, side)
            ok, msg = _series_zero(res)
            if not ok:
                passed, detail = False, f"{side}: {msg}"
                break

    elif name == "symmetries":
        pairs = [
            ("Phi", pipe.phi_two(+1), pipe.phi_two(-1).map(lambda g: g.swap())),
            ("R", derive(pipe, "R", +1), derive(pipe, "R", -1).map(lambda g: g.swap())),
            (
                "omega",
                derive(pipe, "omega", +1),
                derive(pipe, "omega", -1).map(lambda g: g.swap()),
            ),
            (
                "Gbar",
                derive(pipe, "Gbar", +1),
                bump_ipi(derive(pipe, "G", -1).map(lambda g: g.swap()), 1).scale(-ONE),
            ),
        ]
        for tag, lhs, rhs in pairs:
            ok, msg = _series_equal(lhs, rhs)
            if not ok:
                passed, detail = False, f"{tag}: {msg}"
                break

    elif name == "limits":
        ta = ring.qa_minus_qainv()
        half = ring.rational(1, 2)
        checks = []
        R_series = derive(pipe, "R", +1)
        sig_p = derive(pipe, "sigma", +1)
        sig_m = derive(pipe, "sigma", -1)
        lhs1 = R_series.map(lambda g: g.asym("left", (-1, 0, 0, 0)))
        rhs1 = bump_ipi(sig_p.scale(-half), 1)
        checks.append(("R-left", lhs1, rhs1))
        lhs2 = R_series.map(lambda g: g.asym("right", (1, 0, 0, 0)))
        rhs2 = bump_ipi(sig_m.scale(-half), 1)
        checks.append(("R-right", lhs2, rhs2))
        phi2 = pipe.phi_two(+1)
        lhs3 = phi2.map(lambda g: g.asym("left", (-1, 0, 0, 0)))
        rhs3 = pipe.phi_one_alpha(+1).scale(half / ta)
        checks.append(("Phi-left", lhs3, rhs3))
        lhs4 = phi2.map(lambda g: g.asym("right", (1, 0, 0, 0)))
        rhs4 = pipe.phi_one_alpha(-1).scale(-half / ta)
        checks.append(("Phi-right", lhs4, rhs4))
        for tag, lhs, rhs in checks:
            ok, msg = _series_equal(lhs, rhs)
            if not ok:
                passed, detail = False, f"{tag}: {msg}"
                break

    elif name == "resolvent-eq":
        Kser = bi_constant_series(kernels(pipe, "K"), K)
        R_series = derive(pipe, "R", +1)
        res = R_series - star(R_series, Kser, pipe) - Kser
        passed, detail = _series_zero(res)

    elif name == "G-eq":
        Kser = bi_constant_series(kernels(pipe, "K"), K)
        G = derive(pipe, "G", +1)
        res = G - kernels(pipe, "f_right") - star(Kser, G, pipe)
        passed, detail = _series_zero(res)

    elif name == "Gbar-eq":
        Kser = bi_constant_series(kernels(pipe, "K"), K)
        Gb = derive(pipe, "Gbar", +1)
        res = Gb - kernels(pipe, "f_left") - star(Gb, Kser, pipe)
        passed, detail = _series_zero(res)

    elif name == "sigma-eq":
        Kser = bi_constant_series(kernels(pipe, "K"), K)
        sig = derive(pipe, "sigma", +1)
        conv = star(embed_onevar(sig, "right"), Kser, pipe)
        drive = BetaSeries.constant(sigma_drive(), K, CothFun.zero)
        res = sig - drive - to_onevar(conv, "right")
        passed, detail = _series_zero(res)

    elif name == "normalization":
        # fixed at kappa' = kappa + alpha in the measure
        Gs = specialize_series(derive(pipe, "G", +1), "kp=k+a")
        rho_s = specialize_series(pipe.rho, "kp=k+a")
        w_s = specialize_series(pipe.weight, "kp=k+a")
        lim = Gs.map(lambda g: g.asym("left", (-1, 0, 0, 0)))
        ok1, msg1 = _series_zero(lim)
        twisted = Gs.map(
            lambda g: BiFun(
                {
                    (
                        tuple(a + b for a, b in zip(lt, (-1, 0, 0, 0))),
                        tuple(a + b for a, b in zip(rt, (1, 0, 0, 0))),
                        L,
                        R,
                        D,
                    ): c
                    for (lt, rt, L, R, D), c in g.terms.items()
                },
                g.ipi,
            ).scale(ring.apow(-1) - ring.apow(1))
        )
        unit = bi_constant_series(BiFun.constant(ONE), K)
        sub_pipe = _WeightShim(pipe, w_s)
        integral = bump_ipi(star(unit, twisted, sub_pipe), 1)
        const = BetaSeries.constant(
            CothFun.constant(ring.apow(-1)), K, CothFun.zero
        )
        res = const - rho_s - to_onevar(integral, "right")
        ok2, msg2 = _series_zero(res)
        passed = ok1 and ok2
        detail = "" if passed else f"limit: {msg1} | relation: {msg2}"

    elif name == "omega-eq":
        psi_fun = derive(pipe, "Psi", +1)
        alt = star(derive(pipe, "Gbar", +1), kernels(pipe, "f_right"), pipe)
        passed, detail = _series_zero(psi_fun - alt)

    elif name == "specialize":
        msgs = []
        cp_s = pipe.cp_table.in_regime("kp=k+a")
        c_s = pipe.c_table.in_regime("kp=k+a")
        for (k, j) in cp_s.entries:
            if not (cp_s.get(k, j) - c_s.get(k, j)).is_zero():
                msgs.append(f"c' != c at {(k, j)}")
                break
        sig_s = specialize_series(derive(pipe, "sigma", +1), "kp=k+a")
        alt = specialize_series(pipe.phi_one.map(lambda g: g.delta()), "kp=k+a")
        ok, msg = _series_zero(sig_s - alt)
        if not ok:
            msgs.append(f"sigma vs Delta Phi/Phi0: {msg}")
        rho_1 = specialize_series(pipe.rho, "kp=k")
        one = BetaSeries.constant(CothFun.constant(ONE), pipe.order, CothFun.zero)
        ok, msg = _series_zero(rho_1 - one)
        if not ok:
            msgs.append(f"rho != 1 at kp=k: {msg}")
        om_s = specialize_series(derive(pipe, "omega", +1), "kp=k")
        ok, msg = _series_zero(inv_part(om_s, +1))
        if not ok:
            msgs.append(f"net antidifference coefficient at kp=k: {msg}")
        passed = not msgs
        detail = "; ".join(msgs)

    else:
        raise ValueError(f"unknown check {name!r}")

    return CheckReport(name, K, passed, detail, time.time() - t0)


class _WeightShim:
    """Pipeline stand-in with a substituted measure weight."""

    def __init__(self, pipe: Pipeline, weight: BetaSeries):
        self.order = pipe.order
        self.weight = weight


def run_all(pipe: Pipeline, names=CHECK_NAMES):
    return [run_check(pipe, n) for n in names]
