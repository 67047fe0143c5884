"""Coxeter systems (W, S) with exact word arithmetic.

Elements are interned per system and identified by their matrix in the
reflection representation; canonical words are ShortLex-minimal over the
user's generator ordering.  Two independent word-problem routes exist:

* the descent oracle on the reflection representation (used internally), and
* Tits' solution by breadth-first closure under braid moves plus
  ss-deletion (`CoxeterSystem.reduce`), kept as the reference route.

They are cross-checked against each other in the test suite.

A system is immutable after construction apart from internal caches; cache
inserts are idempotent, so concurrent readers see consistent values.
"""

from __future__ import annotations

import json
from fractions import Fraction
from itertools import combinations

from .errors import CapExceededInconclusive, InputError, NotSpherical, SystemMismatch, UnknownGenerator
from .qfield import QF

ALLOWED_ORDERS = {2, 3, 4, 6, 0}  # 0 encodes infinity
INF = 0

# -cos(pi/m) for the allowed orders, exact.
_COS_TABLE = {
    2: QF(0),
    3: QF(Fraction(-1, 2)),
    4: QF(0, Fraction(-1, 2)),
    6: QF(0, 0, Fraction(-1, 2)),
    INF: QF(-1),
}


def _rational_cos(m: int):
    # Fraction fast path for systems without m in {4, 6}.
    return {2: Fraction(0), 3: Fraction(-1, 2), INF: Fraction(-1)}[m]


class Element:
    """A group element: canonical ShortLex word plus matrices of w and w^-1
    in the reflection representation.  Interned: one object per element."""

    __slots__ = ("system", "word", "length", "mat", "inv")

    def __init__(self, system, word, mat, inv):
        self.system = system
        self.word = word          # tuple of generator indices, canonical
        self.length = len(word)
        self.mat = mat            # action on the root space, tuple of row-tuples
        self.inv = inv

    def __repr__(self):
        return f"<{self.system.label_word(self.word) or '1'}>"

    def labels(self) -> str:
        return self.system.label_word(self.word)

    def key(self):
        return self.word

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Element):
            return NotImplemented
        return self.system is other.system and self.word == other.word

    def __hash__(self):
        return hash(self.word)

    def __mul__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self.system.multiply(self, other)

    def __invert__(self):
        return self.system.inverse(self)


def _mat_mul(A, B):
    n = len(A)
    rng = range(n)
    return tuple(
        tuple(sum(A[i][k] * B[k][j] for k in rng) for j in rng) for i in rng
    )


def _mat_vec(A, v):
    n = len(A)
    rng = range(n)
    return tuple(sum(A[i][k] * v[k] for k in rng) for i in rng)


def _identity_mat(n, one, zero):
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


class CoxeterSystem:
    """A Coxeter system with matrix entries in {1,2,3,4,6,infinity}."""

    def __init__(self, generators, m):
        generators = tuple(generators)
        if not generators:
            raise InputError("need at least one generator")
        for g in generators:
            if not g or not g.isascii() or not g.isidentifier():
                raise InputError(f"generator label {g!r} is not an ASCII identifier")
        if len(set(generators)) != len(generators):
            raise InputError("duplicate generator labels")
        n = len(generators)
        m = tuple(tuple(int(x) for x in row) for row in m)
        if len(m) != n or any(len(row) != n for row in m):
            raise InputError("Coxeter matrix shape does not match generators")
        for i in range(n):
            if m[i][i] != 1:
                raise InputError("Coxeter matrix diagonal must be 1")
            for j in range(n):
                if m[i][j] != m[j][i]:
                    raise InputError("Coxeter matrix must be symmetric")
                if i != j and m[i][j] not in ALLOWED_ORDERS:
                    raise InputError(
                        f"off-diagonal order {m[i][j]} unsupported (allowed: 2,3,4,6,0=infinity)"
                    )
        self.generators = generators
        self.m = m
        self.rank = n
        self._gen_index = {g: i for i, g in enumerate(generators)}

        self._rational = all(m[i][j] in (1, 2, 3, INF) for i in range(n) for j in range(n))
        if self._rational:
            one, zero = Fraction(1), Fraction(0)
            cos = lambda mm: _rational_cos(mm)
        else:
            one, zero = QF(1), QF(0)
            cos = lambda mm: _COS_TABLE[mm]
        self._one, self._zero = one, zero
        # bilinear form B(alpha_i, alpha_j)
        self.bilinear = tuple(
            tuple(one if i == j else cos(m[i][j]) for j in range(n)) for i in range(n)
        )
        # root-space action of generator s: alpha_t -> alpha_t - 2 B(s,t) alpha_s
        self._gen_mats = []
        for s in range(n):
            rows = [[one if i == j else zero for j in range(n)] for i in range(n)]
            for t in range(n):
                rows[s][t] = rows[s][t] - 2 * self.bilinear[s][t]
            self._gen_mats.append(tuple(tuple(r) for r in rows))
        self._gen_mats = tuple(self._gen_mats)

        ident = _identity_mat(n, one, zero)
        self._elements = {}
        self.identity = Element(self, (), ident, ident)
        self._elements[()] = self.identity
        self._by_mat = {ident: self.identity}

        self._gens = []
        for s in range(n):
            g = Element(self, (s,), self._gen_mats[s], self._gen_mats[s])
            self._elements[(s,)] = g
            self._by_mat.setdefault(g.mat, g)
            self._gens.append(g)
        self._gens = tuple(self._gens)

        self._mul_cache = {}
        self._canon_cache = {}
        self._ball_cache = {}
        self._parabolic_cache = {}
        self._null_vector = self._compute_null_vector()

    # -- construction helpers ------------------------------------------------

    @classmethod
    def from_file(cls, path) -> "CoxeterSystem":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data) -> "CoxeterSystem":
        try:
            return cls(data["generators"], data["m"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad Coxeter matrix file: {exc}") from exc

    def to_dict(self):
        return {"generators": list(self.generators), "m": [list(r) for r in self.m]}

    def gens(self):
        return self._gens

    def gen(self, i: int) -> Element:
        return self._gens[i]

    def order(self, s: int, t: int) -> int:
        return self.m[s][t]

    def label_word(self, word) -> str:
        return "".join(self.generators[i] for i in word)

    def parse_word(self, text: str):
        """Greedy longest-match split of a label string into generator indices."""
        labels = sorted(self.generators, key=len, reverse=True)
        out = []
        i = 0
        while i < len(text):
            for lab in labels:
                if text.startswith(lab, i):
                    out.append(self._gen_index[lab])
                    i += len(lab)
                    break
            else:
                raise UnknownGenerator(f"cannot read generator at ...{text[i:]!r}")
        return tuple(out)

    # -- element arithmetic ---------------------------------------------------

    def _intern(self, mat, inv) -> Element:
        e = self._by_mat.get(mat)
        if e is not None:
            return e
        word = self._canonical_from_mats(mat, inv)
        e = self._elements.get(word)
        if e is None:
            e = Element(self, word, mat, inv)
            self._elements[word] = e
        self._by_mat[mat] = e
        return e

    def _canonical_from_mats(self, mat, inv):
        """ShortLex canonical word by greedy smallest left descent."""
        word = []
        n = self.rank
        while True:
            for s in range(n):
                # left descent at s  <=>  w^-1(alpha_s) is a negative root
                col = tuple(inv[i][s] for i in range(n))
                if _is_negative_root(col):
                    word.append(s)
                    gm = self._gen_mats[s]
                    mat = _mat_mul(gm, mat)
                    inv = _mat_mul(inv, gm)
                    break
            else:
                break
        return tuple(word)

    def element_from_word(self, word) -> Element:
        for s in word:
            if not (0 <= s < self.rank):
                raise UnknownGenerator(f"generator index {s} out of range")
        e = self.identity
        for s in word:
            e = self.mul_gen(e, s)
        return e

    def element_from_labels(self, text: str) -> Element:
        return self.element_from_word(self.parse_word(text))

    def mul_gen(self, e: Element, s: int) -> Element:
        key = (e.word, s)
        r = self._mul_cache.get(key)
        if r is None:
            gm = self._gen_mats[s]
            r = self._intern(_mat_mul(e.mat, gm), _mat_mul(gm, e.inv))
            self._mul_cache[key] = r
        return r

    def multiply(self, a: Element, b: Element) -> Element:
        if a.system is not self or b.system is not self:
            raise SystemMismatch("elements from different Coxeter systems")
        if b.length == 0:
            return a
        if a.length == 0:
            return b
        if b.length == 1:
            return self.mul_gen(a, b.word[0])
        key = (a.word, b.word)
        r = self._mul_cache.get(key)
        if r is None:
            r = self._intern(_mat_mul(a.mat, b.mat), _mat_mul(b.inv, a.inv))
            self._mul_cache[key] = r
        return r

    def inverse(self, e: Element) -> Element:
        return self._intern(e.inv, e.mat)

    def right_descent(self, e: Element, s: int) -> bool:
        # l(ws) < l(w)  <=>  w(alpha_s) < 0
        n = self.rank
        col = tuple(e.mat[i][s] for i in range(n))
        return _is_negative_root(col)

    def left_descent(self, e: Element, s: int) -> bool:
        n = self.rank
        col = tuple(e.inv[i][s] for i in range(n))
        return _is_negative_root(col)

    # -- Tits' word problem (reference route) ----------------------------------

    def reduce(self, word) -> Element:
        """Canonical form by braid-move closure plus ss-deletion (Tits).

        `word` is a sequence of generator indices or a label string.
        """
        if isinstance(word, str):
            word = self.parse_word(word)
        word = tuple(word)
        for s in word:
            if not (0 <= s < self.rank):
                raise UnknownGenerator(f"generator index {s} out of range")
        canon = self._tits_canonical(word)
        return self.element_from_word(canon)

    def _tits_canonical(self, word):
        cached = self._canon_cache.get(word)
        if cached is not None:
            return cached
        seen = {word}
        stack = [word]
        while stack:
            u = stack.pop()
            for i in range(len(u) - 1):
                if u[i] == u[i + 1]:
                    shorter = self._tits_canonical(u[:i] + u[i + 2 :])
                    for v in seen:
                        self._canon_cache[v] = shorter
                    return shorter
            for v in self._braid_neighbors(u):
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        best = min(seen)  # same length everywhere: tuple order = ShortLex
        for v in seen:
            self._canon_cache[v] = best
        return best

    def _braid_neighbors(self, u):
        out = []
        n = len(u)
        for i in range(n - 1):
            s, t = u[i], u[i + 1]
            if s == t:
                continue
            mm = self.m[s][t]
            if mm == INF or i + mm > n:
                continue
            ok = True
            for k in range(mm):
                if u[i + k] != (s if k % 2 == 0 else t):
                    ok = False
                    break
            if ok:
                repl = tuple((t if k % 2 == 0 else s) for k in range(mm))
                out.append(u[:i] + repl + u[i + mm :])
        return out

    # -- balls and parabolics ---------------------------------------------------

    def ball(self, radius: int):
        """All elements of length <= radius, ShortLex-sorted."""
        if radius in self._ball_cache:
            return self._ball_cache[radius]
        layer = [self.identity]
        seen = {self.identity}
        out = [self.identity]
        for r in range(1, radius + 1):
            nxt = []
            for e in layer:
                for s in range(self.rank):
                    f = self.mul_gen(e, s)
                    if f.length == r and f not in seen:
                        seen.add(f)
                        nxt.append(f)
            nxt.sort(key=lambda e: e.word)
            out.extend(nxt)
            layer = nxt
        result = tuple(out)
        self._ball_cache[radius] = result
        return result

    def parabolic(self, J, cap: int = 10000):
        """All elements of W_J, or raise; cached.  J is an iterable of indices."""
        key = frozenset(J)
        cached = self._parabolic_cache.get(key)
        if cached is not None:
            return cached
        for s, t in combinations(sorted(key), 2):
            if self.m[s][t] == INF:
                raise CapExceededInconclusive(
                    f"W_J infinite: m({self.generators[s]},{self.generators[t]}) = infinity"
                )
        js = sorted(key)
        seen = {self.identity}
        layer = [self.identity]
        while layer:
            nxt = []
            for e in layer:
                for s in js:
                    f = self.mul_gen(e, s)
                    if f not in seen:
                        if len(seen) >= cap:
                            raise CapExceededInconclusive(
                                f"parabolic enumeration exceeded cap {cap}"
                            )
                        seen.add(f)
                        nxt.append(f)
            layer = nxt
        result = tuple(sorted(seen, key=lambda e: (e.length, e.word)))
        self._parabolic_cache[key] = result
        return result

    def is_spherical(self, J, cap: int = 10000) -> bool:
        """True iff W_J is finite.  Raises CapExceededInconclusive when the
        bounded enumeration cannot close and no rank-2 certificate applies."""
        key = frozenset(J)
        for s, t in combinations(sorted(key), 2):
            if self.m[s][t] == INF:
                return False
        try:
            self.parabolic(key, cap=cap)
            return True
        except CapExceededInconclusive:
            raise

    def longest_element(self, J, cap: int = 10000) -> Element:
        key = frozenset(J)
        try:
            finite = self.is_spherical(key, cap=cap)
        except CapExceededInconclusive:
            raise
        if not finite:
            raise NotSpherical(f"W_J is infinite for J={sorted(key)}")
        members = self.parabolic(key, cap=cap)
        w0 = members[-1]  # sorted by (length, word); unique max length
        assert all(self.right_descent(w0, s) for s in key)
        return w0

    def reflections_up_to(self, radius: int):
        """All reflections u s u^-1 of length <= 2*radius + 1, sorted."""
        out = set()
        for u in self.ball(radius):
            ui = self.inverse(u)
            for s in range(self.rank):
                t = self.multiply(self.multiply(u, self._gens[s]), ui)
                if t.length <= 2 * radius + 1:
                    out.add(t)
        res = tuple(sorted(out, key=lambda e: (e.length, e.word)))
        assert all(t.length % 2 == 1 and self.multiply(t, t).length == 0 for t in res)
        return res

    def parabolic_reflections(self, J):
        """Reflections of the (spherical) standard parabolic W_J."""
        members = self.parabolic(J)
        out = set()
        for u in members:
            ui = self.inverse(u)
            for s in sorted(J):
                out.add(self.multiply(self.multiply(u, self._gens[s]), ui))
        return tuple(sorted(out, key=lambda e: (e.length, e.word)))

    def min_coset_rep(self, e: Element, J) -> Element:
        """ShortLex-minimal representative of the coset e W_J."""
        js = sorted(J)
        changed = True
        while changed:
            changed = False
            for s in js:
                if self.right_descent(e, s):
                    e = self.mul_gen(e, s)
                    changed = True
        return e

    def left_decompose(self, e: Element, J):
        """Write e = u * e' with u in W_J and e' minimal in W_J e.
        Returns (u, e')."""
        js = sorted(J)
        letters = []
        changed = True
        while changed:
            changed = False
            for s in js:
                if self.left_descent(e, s):
                    letters.append(s)
                    e = self.multiply(self._gens[s], e)
                    changed = True
                    break
        return self.element_from_word(tuple(letters)), e

    def double_coset_min(self, e: Element, J_left, J_right) -> Element:
        changed = True
        while changed:
            changed = False
            for s in sorted(J_left):
                if self.left_descent(e, s):
                    e = self.multiply(self._gens[s], e)
                    changed = True
            for s in sorted(J_right):
                if self.right_descent(e, s):
                    e = self.mul_gen(e, s)
                    changed = True
        return e

    def in_parabolic(self, e: Element, J) -> bool:
        return set(e.word) <= set(J)

    def support(self, e: Element):
        return frozenset(e.word)

    # -- affine structure ---------------------------------------------------------

    def _compute_null_vector(self):
        """A positive vector in the radical of B, if one exists (affine type)."""
        n = self.rank
        B = [[self.bilinear[i][j] for j in range(n)] for i in range(n)]
        # Gaussian elimination to find the kernel, exact.
        rows = [row[:] + [self._one if False else self._zero] for row in B]  # augmented unused
        mat = [row[:] for row in B]
        pivots = []
        r = 0
        for c in range(n):
            pr = None
            for i in range(r, n):
                if mat[i][c] != self._zero:
                    pr = i
                    break
            if pr is None:
                continue
            mat[r], mat[pr] = mat[pr], mat[r]
            inv = _invert_scalar(mat[r][c])
            mat[r] = [x * inv for x in mat[r]]
            for i in range(n):
                if i != r and mat[i][c] != self._zero:
                    f = mat[i][c]
                    mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
            pivots.append(c)
            r += 1
        free = [c for c in range(n) if c not in pivots]
        if len(free) != 1:
            return None
        fc = free[0]
        v = [self._zero] * n
        v[fc] = self._one
        for i, c in enumerate(pivots):
            v[c] = -mat[i][fc]
        from .qfield import sign_of

        signs = [sign_of(x) for x in v]
        if all(s > 0 for s in signs):
            return tuple(v)
        if all(s < 0 for s in signs):
            return tuple(-x for x in v)
        return None

    @property
    def is_affine_like(self) -> bool:
        """True when B has a one-dimensional radical spanned by a positive
        vector (covers D-infinity and the affine types used here)."""
        return self._null_vector is not None

    def level(self, coords):
        """The W-invariant level functional on dual coordinates (affine type)."""
        if self._null_vector is None:
            return None
        total = self._zero
        for d, x in zip(self._null_vector, coords):
            total = total + d * x
        return total


def _is_negative_root(col) -> bool:
    for x in col:
        if isinstance(x, QF):
            s = x.sign()
        else:
            s = (x > 0) - (x < 0)
        if s != 0:
            return s < 0
    raise AssertionError("zero vector is not a root")


def _invert_scalar(x):
    if isinstance(x, QF):
        return x.inverse()
    return Fraction(1) / x


# -- ready-made systems used throughout the tests and demos ---------------------

def dinfinity() -> CoxeterSystem:
    return CoxeterSystem(("s", "t"), ((1, INF), (INF, 1)))


def a2() -> CoxeterSystem:
    return CoxeterSystem(("s", "t"), ((1, 3), (3, 1)))


def affine_a2() -> CoxeterSystem:
    return CoxeterSystem(("s", "t", "u"), ((1, 3, 3), (3, 1, 3), (3, 3, 1)))


def hyperbolic_uvw() -> CoxeterSystem:
    """The rank-3 system with m(u,v)=3, m(u,w)=2, m(v,w)=infinity."""
    return CoxeterSystem(("u", "v", "w"), ((1, 3, 2), (3, 1, INF), (2, INF, 1)))
