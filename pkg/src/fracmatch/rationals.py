"""Exact rationals and the power-of-two structure of their denominators.

Values are :class:`fractions.Fraction`, which is always kept reduced.
``R_n`` below is the set of rationals in ``[0, 1]`` whose reduced
denominator has exactly ``n`` factors of two.
"""

from __future__ import annotations

from fractions import Fraction

Rat = Fraction

ZERO = Fraction(0)
HALF = Fraction(1, 2)
ONE = Fraction(1)


def even_part(x: int) -> int:
    """Largest power of two dividing ``x``; ``even_part(0) == 0``."""
    if x < 0:
        raise ValueError("even_part is defined for non-negative integers")
    return x & -x


def odd_part(x: int) -> int:
    if x < 0:
        raise ValueError("odd_part is defined for non-negative integers")
    if x == 0:
        return 1
    return x // even_part(x)


def even_denom(x: Fraction) -> int:
    return even_part(Fraction(x).denominator)


def odd_denom(x: Fraction) -> int:
    return odd_part(Fraction(x).denominator)


def class_index(x: Fraction) -> int:
    """The ``n`` with ``x`` in ``R_n`` (number of trailing zero bits of the denominator)."""
    return even_denom(x).bit_length() - 1


def in_class_range(x: Fraction, lo: int = 0, hi: int | None = None) -> bool:
    n = class_index(x)
    return n >= lo and (hi is None or n <= hi)


def in_S(x: Fraction, d: int) -> bool:
    """True iff ``x == i / 2**d`` for an integer ``0 <= i <= 2**d``."""
    x = Fraction(x)
    return 0 <= x <= 1 and (x * 2**d).denominator == 1


def S(d: int) -> list[Fraction]:
    return [Fraction(i, 2**d) for i in range(2**d + 1)]


def add(a: Fraction, b: Fraction) -> Fraction:
    return Fraction(a) + Fraction(b)


def sub_clamped_at_zero(a: Fraction, b: Fraction) -> Fraction:
    return max(Fraction(a) - Fraction(b), ZERO)


def rmin(a: Fraction, b: Fraction) -> Fraction:
    return min(Fraction(a), Fraction(b))


def cmp(a: Fraction, b: Fraction) -> int:
    a, b = Fraction(a), Fraction(b)
    return (a > b) - (a < b)


def format_rat(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rat(text: str) -> Fraction:
    """Parse ``"p/q"``, ``"0"`` or ``"1"`` (any integer). Rejects floats and negatives."""
    text = text.strip()
    num, sep, den = text.partition("/")
    if not num.isdigit() or (sep and not den.isdigit()):
        raise ValueError(f"not a non-negative rational: {text!r}")
    if sep and int(den) == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return Fraction(int(num), int(den) if sep else 1)


def parse_value_set(text: str) -> tuple[str, int]:
    """Parse ``"S(d)"`` or ``"R<=n"`` / ``"R(<=n)"`` into ``("S", d)`` / ``("R", n)``."""
    s = text.replace(" ", "")
    if s.startswith("S(") and s.endswith(")") and s[2:-1].isdigit():
        return "S", int(s[2:-1])
    for prefix in ("R(<=", "R<="):
        if s.startswith(prefix):
            rest = s[len(prefix):].rstrip(")")
            if rest.isdigit():
                return "R", int(rest)
    raise ValueError(f"unknown value set {text!r}; expected S(d) or R<=n")


def in_value_set(x: Fraction, value_set: tuple[str, int]) -> bool:
    kind, k = value_set
    if kind == "S":
        return in_S(x, k)
    return 0 <= x <= 1 and class_index(x) <= k
