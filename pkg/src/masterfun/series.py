"""Truncated beta-graded series over any coefficient algebra.

A series holds grades 0..K explicitly; every operation threads the hard
truncation bound, and grade-k output only ever reads grades <= k of the
inputs, so fixed-order computations are exact.
"""

from __future__ import annotations

from .errors import GradingError


def _mul(a, b):
    mul = getattr(a, "mul", None)
    if mul is not None:
        return mul(b)
    return a * b


class BetaSeries:
    __slots__ = ("grades", "order")

    def __init__(self, grades, order: int = None):
        grades = list(grades)
        if order is None:
            order = len(grades) - 1
        if len(grades) != order + 1:
            raise GradingError(
                f"need {order + 1} grades for truncation order {order}, got {len(grades)}"
            )
        self.grades = grades
        self.order = order

    @classmethod
    def from_grade(cls, k: int, value, order: int, zero_factory):
        grades = [zero_factory() for _ in range(order + 1)]
        grades[k] = value
        return cls(grades, order)

    @classmethod
    def constant(cls, value, order: int, zero_factory):
        return cls.from_grade(0, value, order, zero_factory)

    def grade(self, k: int):
        return self.grades[k]

    def is_zero(self) -> bool:
        return all(g.is_zero() for g in self.grades)

    def map(self, fn) -> "BetaSeries":
        return BetaSeries([fn(g) for g in self.grades], self.order)

    def truncate(self, new_order: int) -> "BetaSeries":
        if new_order > self.order:
            raise GradingError("cannot extend a truncated series")
        return BetaSeries(self.grades[: new_order + 1], new_order)

    def _check(self, other: "BetaSeries"):
        if self.order != other.order:
            raise GradingError(
                f"truncation orders differ: {self.order} vs {other.order}; "
                "re-truncate explicitly"
            )

    def __add__(self, other: "BetaSeries") -> "BetaSeries":
        self._check(other)
        return BetaSeries(
            [a + b for a, b in zip(self.grades, other.grades)], self.order
        )

    def __sub__(self, other: "BetaSeries") -> "BetaSeries":
        self._check(other)
        return BetaSeries(
            [a - b for a, b in zip(self.grades, other.grades)], self.order
        )

    def __neg__(self):
        return BetaSeries([-g for g in self.grades], self.order)

    def mul(self, other: "BetaSeries") -> "BetaSeries":
        """Cauchy product with hard truncation."""
        self._check(other)
        out = []
        for k in range(self.order + 1):
            acc = None
            for i in range(k + 1):
                a, b = self.grades[i], other.grades[k - i]
                if a.is_zero() or b.is_zero():
                    continue
                t = _mul(a, b)
                acc = t if acc is None else acc + t
            if acc is None:
                acc = self._zero_like()
            out.append(acc)
        return BetaSeries(out, self.order)

    def _zero_like(self):
        g0 = self.grades[0]
        scale = getattr(g0, "scale", None)
        if scale is not None:
            from .ring import ZERO

            return g0.scale(ZERO)
        from .ring import ZERO

        return ZERO

    def scale(self, factor) -> "BetaSeries":
        def do(g):
            sc = getattr(g, "scale", None)
            return sc(factor) if sc is not None else g * factor

        return BetaSeries([do(g) for g in self.grades], self.order)

    def shift_grade(self, s: int) -> "BetaSeries":
        """Multiply by beta**s (s >= 0), truncating at the top."""
        grades = [self._zero_like()] * s + self.grades[: self.order + 1 - s]
        return BetaSeries(grades, self.order)

    def inverse(self, invert_grade0) -> "BetaSeries":
        """Graded inverse; ``invert_grade0`` maps grade 0 to its inverse."""
        inv0 = invert_grade0(self.grades[0])
        out = [inv0]
        for k in range(1, self.order + 1):
            acc = None
            for i in range(1, k + 1):
                if self.grades[i].is_zero() or out[k - i].is_zero():
                    continue
                t = _mul(self.grades[i], out[k - i])
                acc = t if acc is None else acc + t
            if acc is None:
                out.append(self._zero_like())
            else:
                out.append(-_mul(inv0, acc))
        return BetaSeries(out, self.order)

    def __eq__(self, other):
        if not isinstance(other, BetaSeries):
            return NotImplemented
        return self.order == other.order and (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        inner = ", ".join(f"b^{k}: {g!r}" for k, g in enumerate(self.grades))
        return f"BetaSeries[{inner}]"


def series_arith(a: BetaSeries, b: BetaSeries, op: str) -> BetaSeries:
    if op == "add":
        return a + b
    if op == "mul":
        return a.mul(b)
    raise ValueError(f"unknown op {op!r}")
