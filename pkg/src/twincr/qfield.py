"""Exact scalars in the real quadratic field Q(sqrt2, sqrt3).

A value is a + b*sqrt2 + c*sqrt3 + d*sqrt6 with rational coefficients.
Sign determination is fully exact (no floating point), which is what makes
wall incidences in the twin Tits cone decidable.
"""

from __future__ import annotations

from fractions import Fraction


def _sign_q2(p: Fraction, q: Fraction) -> int:
    # sign of p + q*sqrt2
    if q == 0:
        return (p > 0) - (p < 0)
    if p == 0:
        return (q > 0) - (q < 0)
    if p > 0 and q > 0:
        return 1
    if p < 0 and q < 0:
        return -1
    t = p * p - 2 * q * q
    s = (t > 0) - (t < 0)
    return s if p > 0 else -s


class QF:
    """An element of Q(sqrt2, sqrt3), immutable."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a=0, b=0, c=0, d=0):
        object.__setattr__(self, "a", Fraction(a))
        object.__setattr__(self, "b", Fraction(b))
        object.__setattr__(self, "c", Fraction(c))
        object.__setattr__(self, "d", Fraction(d))

    def __setattr__(self, *_):
        raise AttributeError("QF is immutable")

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return QF(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    __radd__ = __add__

    def __neg__(self):
        return QF(-self.a, -self.b, -self.c, -self.d)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, c, d = self.a, self.b, self.c, self.d
        e, f, g, h = other.a, other.b, other.c, other.d
        return QF(
            a * e + 2 * b * f + 3 * c * g + 6 * d * h,
            a * f + b * e + 3 * (c * h + d * g),
            a * g + c * e + 2 * (b * h + d * f),
            a * h + d * e + b * g + c * f,
        )

    __rmul__ = __mul__

    def inverse(self) -> QF:
        c2 = QF(self.a, -self.b, self.c, -self.d)  # sqrt2 -> -sqrt2
        c3 = QF(self.a, self.b, -self.c, -self.d)  # sqrt3 -> -sqrt3
        c23 = QF(self.a, -self.b, -self.c, self.d)
        num = c2 * c3 * c23
        norm = self * num  # rational
        if norm.a == 0:
            raise ZeroDivisionError("QF inverse of zero")
        assert norm.b == 0 and norm.c == 0 and norm.d == 0
        inv = Fraction(1) / norm.a
        return QF(num.a * inv, num.b * inv, num.c * inv, num.d * inv)

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return _coerce(other) * self.inverse()

    def sign(self) -> int:
        # self = x + sqrt3 * z with x, z in Q(sqrt2)
        sx = _sign_q2(self.a, self.b)
        sz = _sign_q2(self.c, self.d)
        if sz == 0:
            return sx
        if sx == 0:
            return sz
        if sx == sz:
            return sx
        # compare x^2 against 3 z^2 inside Q(sqrt2)
        p = self.a * self.a + 2 * self.b * self.b - 3 * self.c * self.c - 6 * self.d * self.d
        q = 2 * self.a * self.b - 6 * self.c * self.d
        t = _sign_q2(p, q)
        return t if sx > 0 else -t

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self.a, self.b, self.c, self.d) == (other.a, other.b, other.c, other.d)

    def __hash__(self):
        return hash((self.a, self.b, self.c, self.d))

    def __bool__(self):
        return bool(self.a or self.b or self.c or self.d)

    def __lt__(self, other):
        return (self - _coerce(other)).sign() < 0

    def __le__(self, other):
        return (self - _coerce(other)).sign() <= 0

    def __gt__(self, other):
        return (self - _coerce(other)).sign() > 0

    def __ge__(self, other):
        return (self - _coerce(other)).sign() >= 0

    def __repr__(self):
        return f"QF({self.a}, {self.b}, {self.c}, {self.d})"

    def __str__(self):
        return format_qf(self)

    def to_float(self) -> float:
        return (
            float(self.a)
            + float(self.b) * 1.4142135623730951
            + float(self.c) * 1.7320508075688772
            + float(self.d) * 2.449489742783178
        )


def _coerce(x):
    if isinstance(x, QF):
        return x
    if isinstance(x, (int, Fraction)):
        return QF(x)
    return NotImplemented


QF_ZERO = QF(0)
QF_ONE = QF(1)


def sign_of(x) -> int:
    """Exact sign of a Fraction, int or QF."""
    if isinstance(x, QF):
        return x.sign()
    return (x > 0) - (x < 0)


def parse_qf(text: str) -> QF:
    """Parse the interchange format "3/2+0r2+1/3r3+0r6".

    Terms may appear in any order and may be omitted; "r2" stands for sqrt2,
    bare rationals are the rational part.
    """
    s = text.replace(" ", "").replace("-", "+-")
    if s.startswith("+"):
        s = s[1:]
    coeffs = {"": Fraction(0), "r2": Fraction(0), "r3": Fraction(0), "r6": Fraction(0)}
    for term in s.split("+"):
        if not term:
            continue
        for tag in ("r2", "r3", "r6"):
            if term.endswith(tag):
                body = term[: -len(tag)]
                if body in ("", "-"):
                    body += "1"
                coeffs[tag] += Fraction(body)
                break
        else:
            coeffs[""] += Fraction(term)
    return QF(coeffs[""], coeffs["r2"], coeffs["r3"], coeffs["r6"])


def format_qf(x) -> str:
    if isinstance(x, (int, Fraction)):
        x = QF(x)
    return f"{x.a}+{x.b}r2+{x.c}r3+{x.d}r6"
