"""The rank-2 twin tree of lattice classes for SL_2 over F_q[t, t^-1].

Vertices of the plus (minus) tree are homothety classes of lattices over the
valuation ring at t = 0 (at infinity).  A class is canonicalized by column
Hermite reduction over the valuation ring: basis [[pi^a, 0], [y, pi^b]] with
y reduced modulo pi^b, then shift-normalized; equality of canonical keys
decides equality of classes.

The canonical representative is an R-basis (its determinant is a power of
t), so the opposition involution "same symbol on the other side" transports
a class by reinterpreting its canonical matrix over the other valuation
ring.  Numerical codistance is |j - l| for the Birkhoff splitting type
N = u diag(t^j, t^l) v (u over F_q[t] with constant determinant, v integral
at infinity): the frame A u is then an R-basis, i.e. a genuine twin
apartment containing both classes.  An adapted frame whose determinant is
not a unit of R would be an apartment pair but not a twin apartment, and
measuring exponents along it gives wrong codistances; the section-counting
route below avoids constructing frames altogether.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DepthExceeded, InputError, NotInteriorRepresentable
from .laurent import Laurent, RatFunc, pgcd, ratfunc_from_digits
from . import modules as mods

PLACES = ("zero", "inf")


def _rf(q, x):
    if isinstance(x, RatFunc):
        return x
    if isinstance(x, Laurent):
        return RatFunc.from_laurent(x)
    if isinstance(x, int):
        return RatFunc.make(q, (x,))
    if isinstance(x, str):
        from .laurent import parse_laurent

        if x.strip() == "0":
            return RatFunc.zero(q)
        return RatFunc.from_laurent(parse_laurent(x, q))
    raise InputError(f"bad rational entry {x!r}")


def rf_mat(q, rows):
    return tuple(tuple(_rf(q, x) for x in row) for row in rows)


def mat_mul2(A, B, q):
    return tuple(
        tuple(
            sum((A[i][k] * B[k][j] for k in range(2)), RatFunc.zero(q))
            for j in range(2)
        )
        for i in range(2)
    )


def mat_det2(A, q):
    return A[0][0] * A[1][1] - A[0][1] * A[1][0]


def mat_inv2(A, q):
    d = mat_det2(A, q)
    if d.is_zero():
        raise InputError("singular matrix")
    return (
        (A[1][1] / d, (-A[0][1]) / d),
        ((-A[1][0]) / d, A[0][0] / d),
    )


def _uniformizer(q, place):
    return RatFunc.from_laurent(Laurent.t(q, 1 if place == "zero" else -1))


def _ord(x: RatFunc, place) -> int:
    return x.ord_zero() if place == "zero" else x.ord_inf()


def _pi_pow(q, place, k: int) -> RatFunc:
    return RatFunc.from_laurent(Laurent.t(q, k if place == "zero" else -k))


def _digits(x: RatFunc, place, upto: int):
    return x.series(place, upto)


# -- canonical class form -------------------------------------------------------------


@dataclass(frozen=True)
class LatticeClass:
    """A homothety class of lattices at one place, by canonical key.

    key = (n, digits) encodes the shift-normalized Hermite form
    [[1, 0], [y, pi^n]] with y the finite digit sum (orders < n, possibly
    negative).  The canonical matrix has determinant pi^n, so it is an
    R-basis of K^2."""

    q: int
    place: str
    key: tuple

    def __repr__(self):
        n, digits = self.key
        side = "+" if self.place == "zero" else "-"
        return f"[[{side};{n};{dict(digits)}]]"

    def canonical_matrix(self):
        n, digits = self.key
        q = self.q
        y = ratfunc_from_digits(q, dict(digits), self.place)
        return (
            (RatFunc.one(q), RatFunc.zero(q)),
            (y, _pi_pow(q, self.place, n)),
        )


def classify(q, place, M) -> LatticeClass:
    """Canonical class of the lattice spanned over A_place by the columns of M.

    The Hermite data is intrinsic: pi^a generates the first coordinates of
    the lattice, pi^b the second coordinates of its x1 = 0 part, and y is
    determined modulo pi^b; homothety only shifts (a, b, y), normalized here
    by a = 0."""
    M = rf_mat(q, M)
    if mat_det2(M, q).is_zero():
        raise InputError("lattice basis is singular")
    c1 = (M[0][0], M[1][0])
    c2 = (M[0][1], M[1][1])
    # pivot: column whose first entry has minimal order; zero = +infinity
    o1 = None if c1[0].is_zero() else _ord(c1[0], place)
    o2 = None if c2[0].is_zero() else _ord(c2[0], place)
    if o1 is None or (o2 is not None and o2 < o1):
        c1, c2 = c2, c1
        o1, o2 = o2, o1
    # clear the first entry of c2 (the ratio is integral by pivot choice)
    if not c2[0].is_zero():
        f = c2[0] / c1[0]
        c2 = (RatFunc.zero(q), c2[1] - f * c1[1])
    # unit-normalize the pivots
    a = _ord(c1[0], place)
    u1 = c1[0] / _pi_pow(q, place, a)
    y = c1[1] / u1
    b = _ord(c2[1], place)
    # y is well defined modulo pi^b: keep its digits below order b
    ydig = {} if y.is_zero() else _digits(y, place, b)
    digits = tuple(sorted((o - a, c) for o, c in ydig.items() if c))
    return LatticeClass(q, place, (b - a, digits))


def standard_class(q, place) -> LatticeClass:
    return classify(q, place, ((1, 0), (0, 1)))


def class_action(g, L: LatticeClass) -> LatticeClass:
    """The class of g * L for g over R (or any K-matrix)."""
    q = L.q
    G = rf_mat(q, g)
    return classify(q, L.place, mat_mul2(G, L.canonical_matrix(), q))


def neighbors(L: LatticeClass):
    """The q+1 index-q sublattice classes (tree adjacency)."""
    q = L.q
    M = L.canonical_matrix()
    pi = _uniformizer(q, L.place)
    c1 = (M[0][0], M[1][0])
    c2 = (M[0][1], M[1][1])
    out = []
    for mu in range(q):
        muf = RatFunc.make(q, (mu,))
        cols = (
            (c1[0] + muf * c2[0], c1[1] + muf * c2[1]),
            (pi * c2[0], pi * c2[1]),
        )
        out.append(classify(q, L.place, ((cols[0][0], cols[1][0]), (cols[0][1], cols[1][1]))))
    cols = ((pi * c1[0], pi * c1[1]), c2)
    out.append(classify(q, L.place, ((cols[0][0], cols[1][0]), (cols[0][1], cols[1][1]))))
    return out


# -- opposition and codistance ---------------------------------------------------------


def op_class(L: LatticeClass) -> LatticeClass:
    """Same canonical symbol read over the other valuation ring."""
    other = "inf" if L.place == "zero" else "zero"
    return classify(L.q, other, L.canonical_matrix())


def opposite_classes(Lp: LatticeClass, Lm: LatticeClass) -> bool:
    if Lp.place == Lm.place:
        raise InputError("opposition relates the two places")
    return op_class(Lp) == Lm


def _nullity_modq(q, rows, ncols) -> int:
    """Nullity of the F_q matrix given as a list of rows."""
    A = [list(r) for r in rows]
    rank = 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(A)) if A[r][col] % q), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = pow(A[rank][col] % q, q - 2, q)
        A[rank] = [(x * inv) % q for x in A[rank]]
        for r in range(len(A)):
            if r != rank and A[r][col] % q:
                f = A[r][col] % q
                A[r] = [(x - f * y) % q for x, y in zip(A[r], A[rank])]
        rank += 1
    return ncols - rank


def birkhoff_exponents(q, N):
    """The splitting type {j, l} of N in GL2(F_q[t]) diag(t^j, t^l) GL2(A_inf).

    Unique by Grothendieck's splitting theorem; computed by exact section
    counting:  phi(k) = dim {x in F_q[t]^2 : t^k N^-1 x integral at infinity}
    equals max(0, j-k+1) + max(0, l-k+1)."""
    N = rf_mat(q, N)
    det = mat_det2(N, q)
    if det.is_zero():
        raise InputError("singular matrix")
    total = -det.ord_inf()  # j + l
    G = mat_inv2(N, q)
    spread = 0
    for row in G:
        for x in row:
            if not x.is_zero():
                spread = max(spread, abs(x.ord_inf()), len(x.num), len(x.den))
    B = abs(total) + spread + 4
    D = B  # polynomial degree cap for candidate sections

    def phi(k: int) -> int:
        rows_by_order = {}
        ncols = 2 * (D + 1)
        omin = None
        digits = {}
        for r in range(2):
            for i in range(2):
                f = G[r][i]
                if f.is_zero():
                    digits[(r, i)] = {}
                    continue
                upto = -k + D + 1
                digits[(r, i)] = f.series("inf", upto)
                o0 = f.ord_inf()
                omin = o0 if omin is None else min(omin, o0)
        if omin is None:
            return 0
        rows = []
        for r in range(2):
            for o in range(omin - D, -k):
                row = [0] * ncols
                nonzero = False
                for i in range(2):
                    dig = digits[(r, i)]
                    for a in range(D + 1):
                        c = dig.get(o + a, 0)
                        if c:
                            row[i * (D + 1) + a] = c
                            nonzero = True
                if nonzero:
                    rows.append(row)
        return _nullity_modq(q, rows, ncols)

    j = None
    for k in range(B, -B - 2, -1):
        if phi(k) > 0:
            j = k
            break
    assert j is not None, "no sections found inside the bound"
    l = total - j
    hi, lo = max(j, l), min(j, l)
    # consistency with the closed form at two probe points
    assert phi(hi) == (1 if hi > lo else 2)
    assert phi(hi + 1) == 0
    return j, l


def codistance(Lp: LatticeClass, Lm: LatticeClass) -> int:
    """Numerical codistance along a common twin apartment (an R-basis frame):
    |j - l| for the Birkhoff splitting type of the relative matrix."""
    if Lp.place == Lm.place:
        raise InputError("codistance relates the two places")
    q = Lp.q
    A = Lp.canonical_matrix() if Lp.place == "zero" else Lm.canonical_matrix()
    B = Lm.canonical_matrix() if Lp.place == "zero" else Lp.canonical_matrix()
    N = mat_mul2(mat_inv2(A, q), B, q)
    j, l = birkhoff_exponents(q, N)
    return abs(j - l)


# -- the built twin tree ------------------------------------------------------------------


class TwinTree:
    """Both trees built by breadth-first search to a fixed depth."""

    def __init__(self, q: int = 2, depth: int = 4):
        if depth < 1:
            raise InputError("depth must be >= 1")
        self.q = q
        self.depth = depth
        self.side = {}
        for place in PLACES:
            root = standard_class(q, place)
            verts = {root: 0}
            adj = {root: []}
            frontier = [root]
            for d in range(1, depth + 1):
                nxt = []
                for L in frontier:
                    for Nb in neighbors(L):
                        if Nb not in verts:
                            verts[Nb] = d
                            adj[Nb] = []
                            nxt.append(Nb)
                        if Nb not in adj[L]:
                            adj[L].append(Nb)
                        if L not in adj[Nb]:
                            adj[Nb].append(L)
                frontier = nxt
            self.side[place] = (verts, adj)

    def vertices(self, place, max_depth=None):
        verts, _ = self.side[place]
        cap = self.depth if max_depth is None else max_depth
        return [L for L, d in verts.items() if d <= cap]

    def depth_of(self, L: LatticeClass) -> int:
        verts, _ = self.side[L.place]
        if L not in verts:
            raise DepthExceeded(f"{L} outside the built ball")
        return verts[L]

    def adjacency(self, L: LatticeClass):
        _, adj = self.side[L.place]
        if L not in adj:
            raise DepthExceeded(f"{L} outside the built ball")
        return list(adj[L])

    def distance(self, A: LatticeClass, B: LatticeClass) -> int:
        if A.place != B.place:
            raise InputError("graph distance is within one tree")
        _, adj = self.side[A.place]
        if A not in adj or B not in adj:
            raise DepthExceeded("vertex outside the built ball")
        seen = {A: 0}
        frontier = [A]
        while frontier:
            nxt = []
            for v in frontier:
                if v == B:
                    return seen[v]
                for w in adj[v]:
                    if w not in seen:
                        seen[w] = seen[v] + 1
                        nxt.append(w)
            frontier = nxt
        raise DepthExceeded("no path inside the built ball")

    def fixed_vertices(self, place, gens):
        out = []
        for L in self.vertices(place):
            if all(class_action(g, L) == L for g in gens):
                out.append(L)
        return out


# -- interior ends ----------------------------------------------------------------------


@dataclass(frozen=True)
class InteriorEnd:
    """An end of one tree that lies in a twin apartment from an R-basis;
    labelled by the rank-1 direct summand it stabilizes."""

    place: str
    module: "mods.RSubmodule"

    def __repr__(self):
        side = "+" if self.place == "zero" else "-"
        return f"end({side};{self.module!r})"


def interior_ends(q: int, degree_bound: int, place: str):
    """Ends with eventually-periodic symbols [[f1, t^n f2]]: one for each
    rank-1 direct summand with entries of degree <= the bound."""
    out = []
    for M in mods.invariant_summands((), 1, degree_bound, q, 2):
        out.append(InteriorEnd(place, M))
    return out


def ends_interior_opposite(e1: InteriorEnd, e2: InteriorEnd) -> bool:
    if e1.place == e2.place:
        raise InputError("interior opposition relates the two places")
    M1, M2 = e1.module, e2.module
    cols = M1.basis + M2.basis
    T = tuple(tuple(cols[j][i] for j in range(2)) for i in range(2))
    return mods.det_laurent(T, M1.q).is_unit()


def end_ray_classes(q, place, module: "mods.RSubmodule", length: int, complement=None):
    """The ray [[f1, t^n f2]] (n = 0..length) attached to the end of a rank-1
    summand, inside the apartment of a completed R-basis."""
    if not mods.is_direct_summand(module):
        raise NotInteriorRepresentable("module is not a direct summand")
    comp = complement if complement is not None else mods.find_complement_basis(module)
    f1, f2 = module.basis[0], comp.basis[0]
    tpow = Laurent.t(q)
    out = []
    cur = f2
    for n in range(length + 1):
        M = ((RatFunc.from_laurent(f1[0]), RatFunc.from_laurent(cur[0])),
             (RatFunc.from_laurent(f1[1]), RatFunc.from_laurent(cur[1])))
        out.append(classify(q, place, M))
        cur = tuple(tpow * x for x in cur)
    return out


def apartment_classes(q, place, basis_mat, k_range):
    """Vertex classes [[t^k f1, f2]] of the apartment of an R-basis."""
    out = []
    for k in k_range:
        M = (
            (basis_mat[0][0] * _pi_pow(q, "zero", k), basis_mat[0][1]),
            (basis_mat[1][0] * _pi_pow(q, "zero", k), basis_mat[1][1]),
        )
        out.append(classify(q, place, M))
    return out


def rbasis_matrix(q, module: "mods.RSubmodule", complement: "mods.RSubmodule"):
    f1, f2 = module.basis[0], complement.basis[0]
    return (
        (RatFunc.from_laurent(f1[0]), RatFunc.from_laurent(f2[0])),
        (RatFunc.from_laurent(f1[1]), RatFunc.from_laurent(f2[1])),
    )


def extend_apartment(tree: TwinTree, q, basis_mat, target: LatticeClass, k_window=None):
    """A twin apartment (R-basis) containing the target class and a subray of
    the input apartment's ray: constructive fold-by-fold walk.

    Returns (new_basis_matrix, folds); folds <= the initial gallery distance."""
    if k_window is None:
        k_window = range(-tree.depth - 1, tree.depth + 2)

    def apt_classes(Bm):
        return [L for L in apartment_classes(q, target.place, Bm, k_window)]

    def dist_to_apartment(Bm):
        cls = [L for L in apt_classes(Bm) if L in tree.side[target.place][0]]
        if target in cls:
            return 0
        best = None
        for L in cls:
            try:
                d = tree.distance(L, target)
            except DepthExceeded:
                continue
            if best is None or d < best:
                best = d
        if best is None:
            raise DepthExceeded("apartment does not meet the built ball")
        return best

    B = rf_mat(q, basis_mat)
    d0 = dist_to_apartment(B)
    folds = 0
    elementary = []
    for c in range(1, q):
        for k in range(-tree.depth - 1, tree.depth + 2):
            e = RatFunc.from_laurent(Laurent.make(q, k, (c,)))
            elementary.append(("12", e))
            elementary.append(("21", e))
    while dist_to_apartment(B) > 0:
        d = dist_to_apartment(B)
        improved = None
        for pos, e in elementary:
            if pos == "12":
                Bn = ((B[0][0], B[0][1] + e * B[0][0]), (B[1][0], B[1][1] + e * B[1][0]))
            else:
                Bn = ((B[0][0] + e * B[0][1], B[0][1]), (B[1][0] + e * B[1][1], B[1][1]))
            try:
                dn = dist_to_apartment(Bn)
            except DepthExceeded:
                continue
            if dn < d:
                improved = Bn
                break
        if improved is None:
            raise DepthExceeded("no fold improves the distance inside the ball")
        B = improved
        folds += 1
        if folds > d0:
            raise AssertionError("fold count exceeded the initial distance")
    assert target in apt_classes(B)
    return B, folds
