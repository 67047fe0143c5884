"""Exact arithmetic over F_q[t, t^-1] and F_q(t) for prime q.

Polynomials are coefficient tuples (low degree first); a Laurent polynomial
is t^m times an ordinary polynomial with nonzero constant term.  The span
degree (degree of the normalized polynomial part) makes the Laurent ring
Euclidean, which drives the Smith normal form in `modules`.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError


def _check_prime(q: int):
    if q < 2 or any(q % k == 0 for k in range(2, int(q**0.5) + 1)):
        raise InputError(f"q={q} is not prime")


# -- plain polynomials over F_q (tuples, low degree first) -------------------------

def ptrim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def padd(a, b, q):
    n = max(len(a), len(b))
    return ptrim(((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % q for i in range(n))


def pneg(a, q):
    return tuple((-x) % q for x in a)


def pmul(a, b, q):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % q
    return ptrim(out)


def pdivmod(a, b, q):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    binv = pow(b[-1], q - 2, q)
    quo = [0] * max(0, len(a) - len(b) + 1)
    while len(ptrim(a)) >= len(b):
        a = list(ptrim(a))
        k = len(a) - len(b)
        f = (a[-1] * binv) % q
        quo[k] = f
        for i, x in enumerate(b):
            a[k + i] = (a[k + i] - f * x) % q
    return ptrim(quo), ptrim(a)


def pgcd(a, b, q):
    a, b = ptrim(a), ptrim(b)
    while b:
        _, r = pdivmod(a, b, q)
        a, b = b, r
    if a:
        inv = pow(a[-1], q - 2, q)
        a = tuple((x * inv) % q for x in a)  # monic
    return a


def pval(a) -> int:
    for i, x in enumerate(a):
        if x:
            return i
    return 0


@dataclass(frozen=True)
class Laurent:
    """t^shift * poly with poly() == () or poly[0] != 0."""

    q: int
    shift: int
    poly: tuple

    def __post_init__(self):
        if self.poly and self.poly[0] == 0:
            raise AssertionError("unnormalized Laurent")

    @classmethod
    def make(cls, q, shift, coeffs):
        coeffs = ptrim(x % q for x in coeffs)
        if not coeffs:
            return cls(q, 0, ())
        v = pval(coeffs)
        return cls(q, shift + v, coeffs[v:])

    @classmethod
    def zero(cls, q):
        return cls(q, 0, ())

    @classmethod
    def one(cls, q):
        return cls(q, 0, (1,))

    @classmethod
    def t(cls, q, k=1):
        return cls(q, k, (1,))

    @classmethod
    def const(cls, q, c):
        c %= q
        return cls(q, 0, (c,) if c else ())

    def is_zero(self):
        return not self.poly

    def is_unit(self):
        return len(self.poly) == 1

    def span(self) -> int:
        """Degree of the normalized polynomial part (Euclidean size)."""
        if not self.poly:
            return -1
        return len(self.poly) - 1

    def lowest_exp(self):
        return self.shift

    def degree(self):
        return self.shift + len(self.poly) - 1 if self.poly else None

    def __add__(self, other):
        a, b = self, other
        if a.is_zero():
            return b
        if b.is_zero():
            return a
        lo = min(a.shift, b.shift)
        hi = max(a.shift + len(a.poly), b.shift + len(b.poly))
        out = [0] * (hi - lo)
        for i, x in enumerate(a.poly):
            out[a.shift - lo + i] += x
        for i, x in enumerate(b.poly):
            out[b.shift - lo + i] += x
        return Laurent.make(self.q, lo, out)

    def __neg__(self):
        return Laurent(self.q, self.shift, pneg(self.poly, self.q)) if self.poly else self

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if self.is_zero() or other.is_zero():
            return Laurent.zero(self.q)
        return Laurent(self.q, self.shift + other.shift, pmul(self.poly, other.poly, self.q))

    def unit_inverse(self):
        if not self.is_unit():
            raise ZeroDivisionError(f"{self} is not a unit")
        return Laurent(self.q, -self.shift, (pow(self.poly[0], self.q - 2, self.q),))

    def normalize(self):
        """(m, g): f = t^m g with g(0) != 0.  The documented normal form."""
        return self.shift, self.poly

    def monic_normalize(self):
        """Strip the t-power and scale to monic: the canonical associate."""
        if self.is_zero():
            return self
        inv = pow(self.poly[-1], self.q - 2, self.q)
        return Laurent(self.q, 0, tuple((x * inv) % self.q for x in self.poly))

    def __divmod__(self, other):
        """f = quo * d + rem with span(rem) < span(d) or rem = 0."""
        if other.is_zero():
            raise ZeroDivisionError("Laurent division by zero")
        if self.is_zero():
            return Laurent.zero(self.q), Laurent.zero(self.q)
        Q, R = pdivmod(self.poly, other.poly, self.q)
        quo = Laurent.make(self.q, self.shift - other.shift, Q)
        rem = Laurent.make(self.q, self.shift, R)
        return quo, rem

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def divides(self, other) -> bool:
        if self.is_zero():
            return other.is_zero()
        return divmod(other, self)[1].is_zero()

    def __str__(self):
        return format_laurent(self)

    def __repr__(self):
        return f"L({format_laurent(self)})"


def gcd_laurent(a: Laurent, b: Laurent) -> Laurent:
    g = pgcd(a.poly, b.poly, a.q)
    return Laurent(a.q, 0, g)


def parse_laurent(text: str, q: int) -> Laurent:
    """Parse "t^-1+1+t" style strings (coefficients are integers mod q)."""
    _check_prime(q)
    s = text.replace(" ", "").replace("^-", "^~").replace("-", "+-")
    if s.startswith("+"):
        s = s[1:]
    if not s:
        raise InputError("empty Laurent literal")
    terms = {}
    for term in s.split("+"):
        if not term:
            continue
        neg = term.startswith("-")
        if neg:
            term = term[1:]
        if "t" in term:
            coeff_s, _, exp_s = term.partition("t")
            coeff = int(coeff_s) if coeff_s else 1
            if exp_s.startswith("^"):
                exp = int(exp_s[1:].replace("~", "-"))
            elif exp_s == "":
                exp = 1
            else:
                raise InputError(f"bad term {term!r}")
        else:
            coeff = int(term)
            exp = 0
        if neg:
            coeff = -coeff
        terms[exp] = (terms.get(exp, 0) + coeff) % q
    if not terms:
        return Laurent.zero(q)
    lo = min(terms)
    hi = max(terms)
    return Laurent.make(q, lo, [terms.get(e, 0) for e in range(lo, hi + 1)])


def format_laurent(f: Laurent) -> str:
    if f.is_zero():
        return "0"
    parts = []
    for i, c in enumerate(f.poly):
        if not c:
            continue
        e = f.shift + i
        if e == 0:
            parts.append(str(c))
        else:
            head = "" if c == 1 else str(c)
            parts.append(f"{head}t" if e == 1 else f"{head}t^{e}")
    return "+".join(parts)


# -- rational functions F_q(t) ---------------------------------------------------------


@dataclass(frozen=True)
class RatFunc:
    """num/den with den monic and gcd(num, den) = 1; num, den plain polys."""

    q: int
    num: tuple
    den: tuple

    @classmethod
    def make(cls, q, num, den=(1,)):
        num = ptrim(x % q for x in num)
        den = ptrim(x % q for x in den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            return cls(q, (), (1,))
        g = pgcd(num, den, q)
        if g != (1,):
            num, _ = pdivmod(num, g, q)
            den, _ = pdivmod(den, g, q)
        inv = pow(den[-1], q - 2, q)
        num = tuple((x * inv) % q for x in num)
        den = tuple((x * inv) % q for x in den)
        return cls(q, num, den)

    @classmethod
    def from_laurent(cls, f: Laurent):
        if f.is_zero():
            return cls.make(f.q, ())
        if f.shift >= 0:
            return cls.make(f.q, (0,) * f.shift + f.poly)
        return cls.make(f.q, f.poly, (0,) * (-f.shift) + (1,))

    @classmethod
    def zero(cls, q):
        return cls.make(q, ())

    @classmethod
    def one(cls, q):
        return cls.make(q, (1,))

    def is_zero(self):
        return not self.num

    def __add__(self, other):
        q = self.q
        return RatFunc.make(
            q,
            padd(pmul(self.num, other.den, q), pmul(other.num, self.den, q), q),
            pmul(self.den, other.den, q),
        )

    def __neg__(self):
        return RatFunc(self.q, pneg(self.num, self.q), self.den)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        return RatFunc.make(self.q, pmul(self.num, other.num, self.q), pmul(self.den, other.den, self.q))

    def __truediv__(self, other):
        if other.is_zero():
            raise ZeroDivisionError
        return RatFunc.make(self.q, pmul(self.num, other.den, self.q), pmul(self.den, other.num, self.q))

    def ord_zero(self) -> int:
        """Order of vanishing at t = 0 (+infinity for 0)."""
        if self.is_zero():
            raise ZeroDivisionError("ord of zero")
        return pval(self.num) - pval(self.den)

    def ord_inf(self) -> int:
        if self.is_zero():
            raise ZeroDivisionError("ord of zero")
        return (len(self.den) - 1) - (len(self.num) - 1)

    def in_A(self, place: str) -> bool:
        """Membership in the valuation ring at the place ("zero" or "inf")."""
        if self.is_zero():
            return True
        return (self.ord_zero() if place == "zero" else self.ord_inf()) >= 0

    def series(self, place: str, upto: int):
        """Laurent-series digits at the place, from ord(self) up to `upto`
        (exclusive), as a dict order -> coefficient; orders measured in the
        local uniformizer (t at zero, 1/t at infinity)."""
        if self.is_zero():
            return {}
        q = self.q
        if place == "zero":
            num, den = self.num, self.den
            extra = 0
        else:
            num, den = tuple(reversed(self.num)), tuple(reversed(self.den))
            extra = (len(self.den) - 1) - (len(self.num) - 1)
        o = extra + pval(num) - pval(den)
        num = num[pval(num):]
        den = den[pval(den):]
        digits = {}
        dinv = pow(den[0], q - 2, q)
        rem = list(num)
        k = 0
        while o + k < upto:
            c = (rem[0] * dinv) % q if rem else 0
            if c:
                digits[o + k] = c
            # rem = (rem - c*den) / u
            m = max(len(rem), len(den))
            new = [((rem[i] if i < len(rem) else 0) - c * (den[i] if i < len(den) else 0)) % q for i in range(m)]
            rem = new[1:]
            k += 1
            if not ptrim(rem) and all(v == 0 for v in rem):
                rem = []
                if o + k >= upto:
                    break
                # remaining digits are zero
                break
        return digits

    def __str__(self):
        n = format_laurent(Laurent.make(self.q, 0, self.num))
        if self.den == (1,):
            return n
        d = format_laurent(Laurent.make(self.q, 0, self.den))
        return f"({n})/({d})"

    def __repr__(self):
        return f"RF({self})"


def ratfunc_from_digits(q: int, digits, place: str) -> RatFunc:
    """The Laurent polynomial (in t or 1/t) with the given digit dict."""
    out = RatFunc.zero(q)
    for o, c in digits.items():
        e = o if place == "zero" else -o
        out = out + RatFunc.from_laurent(Laurent.make(q, e, (c,)))
    return out
