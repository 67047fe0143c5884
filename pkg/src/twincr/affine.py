"""Euclidean (affine) twin apartments in identified coordinates.

Both components share one affine space over Q; op is the identity on
coordinates, and a twin root with wall functional f and offset c is the pair
({f >= c} on plus, {f <= c} on minus).  A ConvexDescription lists such
constraints; complete-reducibility checks run three independent routes:

* direct:      the two tightened polyhedra coincide (exact LP),
* at infinity: recession-direction cells are interior-opposite-closed,
* Levi:        the common tight flat is a wall flat of full dimension.

Supported affine types: A1 (dimension 1) and A2 (dimension 2).  All linear
programming is exact rational Fourier-Motzkin; there are no tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
import json
import math

from .errors import EmptyComponent, InputError, NotOpposite, SignMismatch

PLUS = 1
MINUS = -1


# -- exact Fourier-Motzkin -------------------------------------------------------

def _fm_eliminate(cons, k):
    """Eliminate variable k from constraints a.x >= c; a are tuples."""
    lowers, uppers, rest = [], [], []
    for a, c in cons:
        if a[k] > 0:
            lowers.append((a, c))
        elif a[k] < 0:
            uppers.append((a, c))
        else:
            rest.append((a, c))
    for al, cl in lowers:
        for au, cu in uppers:
            # al.x >= cl gives x_k >= (cl - al'.x)/al[k]; combine with upper
            coef = tuple(
                al[i] * (-au[k]) + au[i] * al[k] if i != k else Fraction(0)
                for i in range(len(al))
            )
            rest.append((coef, cl * (-au[k]) + cu * al[k]))
    return rest


def fm_feasible(cons, nvars: int) -> bool:
    cons = [(tuple(Fraction(x) for x in a), Fraction(c)) for a, c in cons]
    for k in range(nvars):
        cons = _fm_eliminate(cons, k)
    return all(c <= 0 for _, c in cons)


def fm_sup(objective, cons, nvars: int):
    """sup{objective . x : cons} -> Fraction, or None for +infinity.
    Raises EmptyComponent when infeasible."""
    if not fm_feasible(cons, nvars):
        raise EmptyComponent("infeasible system")
    # introduce t with t <= objective.x, i.e. objective.x - t >= 0
    obj = tuple(Fraction(x) for x in objective)
    ext = [(tuple(a) + (Fraction(0),), Fraction(c)) for a, c in cons]
    ext.append((obj + (Fraction(-1),), Fraction(0)))
    for k in range(nvars):
        ext = _fm_eliminate(ext, k)
    best = None
    for a, c in ext:
        t = a[nvars]
        if t < 0:
            bound = c / t  # t <= bound
            best = bound if best is None else min(best, bound)
        elif t == 0 and c > 0:
            raise EmptyComponent("infeasible system")
    return best


def fm_point(cons, nvars: int):
    """A feasible rational point, by elimination and back-substitution."""
    cons = [(tuple(Fraction(x) for x in a), Fraction(c)) for a, c in cons]
    stages = [cons]
    for k in range(nvars):
        stages.append(_fm_eliminate(stages[-1], k))
    if not all(c <= 0 for _, c in stages[-1]):
        raise EmptyComponent("infeasible system")
    point = [Fraction(0)] * nvars
    for k in range(nvars - 1, -1, -1):
        lo, hi = None, None
        for a, c in stages[k]:
            if a[k] == 0:
                continue
            rhs = c - sum(a[i] * point[i] for i in range(nvars) if i != k)
            bound = rhs / a[k]
            if a[k] > 0:
                lo = bound if lo is None else max(lo, bound)
            else:
                hi = bound if hi is None else min(hi, bound)
        if lo is not None and hi is not None:
            point[k] = (lo + hi) / 2
        elif lo is not None:
            point[k] = lo
        elif hi is not None:
            point[k] = hi
    return tuple(point)


# -- apartments and direction cells ------------------------------------------------


class AffineApartment:
    """Affine twin apartment of type A1 or A2 with its wall-functional family."""

    def __init__(self, kind: str):
        kind = kind.upper()
        if kind == "A1":
            self.dim = 1
            self.functionals = ((Fraction(1),),)
        elif kind == "A2":
            self.dim = 2
            self.functionals = (
                (Fraction(1), Fraction(0)),
                (Fraction(0), Fraction(1)),
                (Fraction(1), Fraction(1)),
            )
        else:
            raise InputError(f"unsupported affine type {kind!r} (use A1 or A2)")
        self.kind = kind
        self._direction_cells = self._enumerate_directions()

    def _enumerate_directions(self):
        reps = {}
        rng = range(-2, 3)
        if self.dim == 1:
            candidates = [(Fraction(v),) for v in (-1, 0, 1)]
        else:
            candidates = [
                (Fraction(a), Fraction(b)) for a in rng for b in rng
            ]
        for v in candidates:
            sig = tuple(_sgn(_dot(f, v)) for f in self.functionals)
            if sig not in reps:
                reps[sig] = v
        cells = [DirectionCell(sig, reps[sig]) for sig in sorted(reps)]
        return tuple(cells)

    def direction_cells(self, include_zero: bool = True):
        if include_zero:
            return self._direction_cells
        return tuple(D for D in self._direction_cells if not D.is_zero())

    def direction_of(self, vector) -> "DirectionCell":
        v = tuple(Fraction(x) for x in vector)
        sig = tuple(_sgn(_dot(f, v)) for f in self.functionals)
        for D in self._direction_cells:
            if D.signs == sig:
                return D
        raise AssertionError("unreachable: sign pattern not in the fan")

    def wall_functional(self, coeffs):
        """Validate and normalize a functional to +/- a family member."""
        v = tuple(Fraction(x) for x in coeffs)
        for f in self.functionals:
            for s in (1, -1):
                cand = tuple(s * x for x in f)
                q = None
                ok = True
                for a, b in zip(v, cand):
                    if b == 0:
                        if a != 0:
                            ok = False
                            break
                    else:
                        r = a / b
                        if q is None:
                            q = r
                        elif r != q:
                            ok = False
                            break
                if ok and q is not None and q > 0:
                    return cand, q
        raise InputError(f"{coeffs} is not a wall functional of type {self.kind}")


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _sgn(x) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class DirectionCell:
    """A cell of the linear-part arrangement: sign vector plus an interior
    representative direction."""

    signs: tuple
    rep: tuple

    def is_zero(self) -> bool:
        return all(s == 0 for s in self.signs)

    def negate(self) -> "DirectionCell":
        return DirectionCell(tuple(-s for s in self.signs), tuple(-x for x in self.rep))

    def cone_dim(self, apt: AffineApartment) -> int:
        if self.is_zero():
            return 0
        zero_funcs = [f for f, s in zip(apt.functionals, self.signs) if s == 0]
        return apt.dim - _rank(zero_funcs)

    def is_face_of(self, other: "DirectionCell") -> bool:
        return all(s == 0 or s == t for s, t in zip(self.signs, other.signs))

    def __repr__(self):
        return "dir(" + "".join("+0-"[1 - s] for s in self.signs) + ")"


def _rank(vectors) -> int:
    rows = [list(v) for v in vectors]
    r = 0
    cols = len(rows[0]) if rows else 0
    for c in range(cols):
        piv = None
        for i in range(r, len(rows)):
            if rows[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c] / rows[r][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
    return r


@dataclass(frozen=True)
class ConicalCell:
    """A translate base + direction of a linear-part cell, on one component."""

    sign: int
    base: tuple
    direction: DirectionCell

    def is_sector(self, apt: AffineApartment) -> bool:
        return self.direction.cone_dim(apt) == apt.dim


def reversal(A: ConicalCell) -> ConicalCell:
    return ConicalCell(A.sign, A.base, A.direction.negate())


def twin(A: ConicalCell) -> ConicalCell:
    return ConicalCell(-A.sign, A.base, A.direction.negate())


def root_truncation(apt: AffineApartment, wall, A: ConicalCell) -> ConicalCell:
    """A subcell of A with the same direction inside one root of the wall.

    `wall` is (functional, offset)."""
    f, c = wall
    f = tuple(Fraction(x) for x in f)
    c = Fraction(c)
    d = A.direction
    fd = _dot(f, d.rep)
    fx = _dot(f, A.base)
    if fd == 0:
        return A  # f is constant on A; A already lies in a closed root
    sigma = 1 if fd > 0 else -1
    # aim for sigma*f >= sigma*c
    gap = sigma * c - sigma * fx
    if gap <= 0:
        return A
    lam = gap / (sigma * fd)
    new_base = tuple(b + lam * r for b, r in zip(A.base, d.rep))
    return ConicalCell(A.sign, new_base, d)


# -- convex descriptions ------------------------------------------------------------


class ConvexDescription:
    """A convex subcomplex given as a finite list of affine twin-root
    constraints (functional, offset): plus part {f >= c}, minus part {f <= c}."""

    def __init__(self, apt: AffineApartment, constraints):
        self.apt = apt
        norm = []
        for f, c in constraints:
            func, scale = apt.wall_functional(f)
            norm.append((func, Fraction(c) / scale))
        self.constraints = tuple(sorted(norm))

    def __repr__(self):
        return f"ConvexDescription({self.apt.kind}, {list(self.constraints)})"

    # tightened integer systems describing the actual cell complexes
    def plus_system(self):
        return [(f, Fraction(math.ceil(c))) for f, c in self.constraints]

    def minus_system(self):
        # {f <= floor(c)}  as  {-f >= -floor(c)}
        return [
            (tuple(-x for x in f), Fraction(-math.floor(c)))
            for f, c in self.constraints
        ]

    def feasible_both(self) -> bool:
        n = self.apt.dim
        return fm_feasible(self.plus_system(), n) and fm_feasible(self.minus_system(), n)

    def require_feasible(self):
        n = self.apt.dim
        if not fm_feasible(self.plus_system(), n):
            raise EmptyComponent("plus component has no cells")
        if not fm_feasible(self.minus_system(), n):
            raise EmptyComponent("minus component has no cells")

    def to_records(self):
        return [
            {"coroot": [str(x) for x in f], "offset": str(c)}
            for f, c in self.constraints
        ]

    @classmethod
    def from_records(cls, apt: AffineApartment, records):
        cons = []
        for rec in records:
            try:
                f = tuple(Fraction(x) for x in rec["coroot"])
                c = Fraction(rec["offset"])
            except (KeyError, ValueError) as exc:
                raise InputError(f"bad constraint record {rec}: {exc}") from exc
            cons.append((f, c))
        return cls(apt, cons)


def save_description(Y: ConvexDescription, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"type": Y.apt.kind, "constraints": Y.to_records()}, fh, indent=1, sort_keys=True)


def load_description(path) -> ConvexDescription:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    apt = AffineApartment(data["type"])
    return ConvexDescription.from_records(apt, data["constraints"])


def _poly_subset(cons_sub, cons_super, nvars) -> bool:
    """Every point of {cons_sub} satisfies {cons_super} (both >= systems)."""
    for g, d in cons_super:
        neg = tuple(-x for x in g)
        s = fm_sup(neg, cons_sub, nvars)  # sup of -g  =>  inf g = -s
        if s is None:
            return False
        if -s < d:
            return False
    return True


# -- the building at infinity ---------------------------------------------------------


@dataclass(frozen=True)
class InfinitySimplex:
    sign: int
    direction: DirectionCell

    def __repr__(self):
        return f"({'+' if self.sign > 0 else '-'},{self.direction!r})"


def infinity_of(Y: ConvexDescription):
    """Recession-direction cells per component: (plus_set, minus_set)."""
    Y.require_feasible()
    plus, minus = [], []
    for D in Y.apt.direction_cells(include_zero=False):
        ok_plus = all(_dot(f, D.rep) >= 0 for f, _ in Y.constraints)
        ok_minus = all(_dot(f, D.rep) <= 0 for f, _ in Y.constraints)
        if ok_plus:
            plus.append(InfinitySimplex(PLUS, D))
        if ok_minus:
            minus.append(InfinitySimplex(MINUS, D))
    return tuple(plus), tuple(minus)


def interior_opposite(e: InfinitySimplex, e2: InfinitySimplex) -> bool:
    """Thin identified-coordinate model: equal directions across components."""
    if e.sign == e2.sign:
        raise SignMismatch("interior opposition relates the two components")
    return e.direction.signs == e2.direction.signs


def is_cr_direct(Y: ConvexDescription) -> bool:
    """Direct definition in the thin model: the two cell complexes coincide,
    decided exactly on the integer-tightened polyhedra."""
    Y.require_feasible()
    n = Y.apt.dim
    P = Y.plus_system()
    M = Y.minus_system()
    return _poly_subset(P, M, n) and _poly_subset(M, P, n)


def is_cr_at_infinity(Y: ConvexDescription, mode: str = "max-simplices") -> bool:
    """Complete reducibility read off at infinity.

    mode "max-simplices": every simplex of maximal dimension in Y-infinity
    has an interior opposite there; mode "vertices": every vertex does.
    Vacuously true when Y-infinity is empty on both components."""
    if mode not in ("max-simplices", "vertices"):
        raise InputError(f"unknown mode {mode!r}")
    plus, minus = infinity_of(Y)
    plus_dirs = {e.direction.signs for e in plus}
    minus_dirs = {e.direction.signs for e in minus}
    apt = Y.apt
    if mode == "max-simplices":
        maxdim = max(
            [e.direction.cone_dim(apt) for e in plus + minus] or [0]
        )
        targets_plus = [e for e in plus if e.direction.cone_dim(apt) == maxdim]
        targets_minus = [e for e in minus if e.direction.cone_dim(apt) == maxdim]
    else:
        targets_plus = [e for e in plus if e.direction.cone_dim(apt) == 1]
        targets_minus = [e for e in minus if e.direction.cone_dim(apt) == 1]
    for e in targets_plus:
        if e.direction.signs not in minus_dirs:
            return False
    for e in targets_minus:
        if e.direction.signs not in plus_dirs:
            return False
    return True


# -- Levi spheres and dimensions ---------------------------------------------------


def _implicit_equalities(Y: ConvexDescription):
    """Indices of constraints that are tight on the whole plus complex."""
    n = Y.apt.dim
    P = Y.plus_system()
    out = []
    for i, (f, c) in enumerate(P):
        s = fm_sup(f, P, n)
        if s is not None and s == c:
            out.append(i)
    return out


def dimension(Y: ConvexDescription) -> int:
    """Dimension of the (plus) cell complex of Y."""
    Y.require_feasible()
    n = Y.apt.dim
    P = Y.plus_system()
    eq = _implicit_equalities(Y)
    funcs = [P[i][0] for i in eq]
    return n - _rank(funcs)


def levi_sphere_criterion(Y: ConvexDescription) -> bool:
    """True iff Y contains a Levi sphere of dimension dim(Y): a wall flat
    inside both components, of full dimension.

    Independent of is_cr_direct: decides whether the common tight flat
    L' = {f_i = c_i for all i} is nonempty of dimension dim(Y)."""
    Y.require_feasible()
    n = Y.apt.dim
    P = Y.plus_system()
    eqs = []
    for f, c in P:
        eqs.append((f, c))
        eqs.append((tuple(-x for x in f), -c))
    if not fm_feasible(eqs, n):
        return False
    flat_dim = n - _rank([f for f, _ in P])
    return flat_dim == dimension(Y)


def levi_sphere(apt: AffineApartment, s: "ACell", s2: "ACell") -> ConvexDescription:
    """The support of an op-paired cell pair, as a ConvexDescription."""
    if s.sign == s2.sign or s.key != s2.key:
        raise NotOpposite("Levi spheres come from op-paired cells")
    cons = []
    for f, (k, on) in zip(apt.functionals, s.key):
        if on:
            cons.append((f, Fraction(k)))
            cons.append((tuple(-x for x in f), Fraction(-k)))
    return ConvexDescription(apt, cons)


# -- cells of the affine arrangement (bounded enumeration) ---------------------------


@dataclass(frozen=True)
class ACell:
    """An arrangement cell with a representative interior point.
    key[i] = (floor of f_i, whether f_i is integral on the cell)."""

    sign: int
    key: tuple
    rep: tuple

    def dim(self, apt: AffineApartment) -> int:
        funcs = [f for f, (k, on) in zip(apt.functionals, self.key) if on]
        return apt.dim - _rank(funcs)

    def __repr__(self):
        return f"({'+' if self.sign > 0 else '-'};{self.key})"


def cell_of_point(apt: AffineApartment, sign: int, p) -> ACell:
    p = tuple(Fraction(x) for x in p)
    key = []
    for f in apt.functionals:
        v = _dot(f, p)
        fl = math.floor(v)
        key.append((fl, v == fl))
    return ACell(sign, tuple(key), p)


def cells_in_box(apt: AffineApartment, radius: int, sign: int):
    """All arrangement cells with representative points in [-radius, radius]^d."""
    pts = []
    R = radius
    if apt.dim == 1:
        for k in range(-R, R + 1):
            pts.append((Fraction(k),))
            if k < R:
                pts.append((Fraction(2 * k + 1, 2),))
    else:
        for a in range(-R, R + 1):
            for b in range(-R, R + 1):
                pts.append((Fraction(a), Fraction(b)))
                pts.append((Fraction(2 * a + 1, 2), Fraction(b)))
                pts.append((Fraction(a), Fraction(2 * b + 1, 2)))
                pts.append((Fraction(2 * a + 1, 2), Fraction(2 * b + 1, 2)))
                pts.append((Fraction(3 * a + 1, 3), Fraction(3 * b + 1, 3)))
                pts.append((Fraction(3 * a + 2, 3), Fraction(3 * b + 2, 3)))
    seen = {}
    for p in pts:
        cell = cell_of_point(apt, sign, p)
        seen.setdefault(cell.key, cell)
    return [seen[k] for k in sorted(seen)]


def cell_in_plus(Y: ConvexDescription, cell: ACell) -> bool:
    """Closed cell contained in the plus complex of Y."""
    for f, c in Y.plus_system():
        k, on = _eval_key(Y.apt, cell, f)
        if Fraction(k) < c:
            return False
    return True


def cell_in_minus(Y: ConvexDescription, cell: ACell) -> bool:
    for f, c in Y.constraints:
        k, on = _eval_key(Y.apt, cell, f)
        hi = Fraction(k) if on else Fraction(k + 1)
        if hi > Fraction(math.floor(c)):
            return False
    return True


def _eval_key(apt: AffineApartment, cell: ACell, f):
    for g, (k, on) in zip(apt.functionals, cell.key):
        if g == f:
            return k, on
        if tuple(-x for x in g) == f:
            return (-k - (0 if on else 1), on)
    raise AssertionError("functional not in family")


def is_cr_direct_by_cells(Y: ConvexDescription, radius: int) -> bool:
    """Window cross-check of the direct definition: cells of the plus complex
    inside the box coincide with cells of the minus complex."""
    Y.require_feasible()
    plus_cells = {c.key for c in cells_in_box(Y.apt, radius, PLUS) if cell_in_plus(Y, c)}
    minus_cells = {c.key for c in cells_in_box(Y.apt, radius, MINUS) if cell_in_minus(Y, c)}
    return plus_cells == minus_cells


def vertex_criterion(Y: ConvexDescription, radius: int) -> bool:
    """Every (spherical) vertex of Y has an opposite vertex in Y: in
    identified coordinates, vertex sets of both complexes agree (windowed)."""
    Y.require_feasible()
    plus_v = {
        c.key
        for c in cells_in_box(Y.apt, radius, PLUS)
        if c.dim(Y.apt) == 0 and cell_in_plus(Y, c)
    }
    minus_v = {
        c.key
        for c in cells_in_box(Y.apt, radius, MINUS)
        if c.dim(Y.apt) == 0 and cell_in_minus(Y, c)
    }
    return plus_v == minus_v


def conical_cell_in_hull(apt: AffineApartment, vertex_point, other_cell: ACell):
    """Constructive witness for the hull lemma: a conical cell of maximal
    dimension inside Con(vertex, other)_plus, based at the vertex.

    Returns (ConicalCell, hull_constraints)."""
    x = tuple(Fraction(v) for v in vertex_point)
    cons = []
    for f in apt.functionals:
        for g in (f, tuple(-v for v in f)):
            gx = _dot(g, x)
            if gx != math.floor(gx):
                continue  # offsets must be integral walls through x
            k, on = _eval_key(apt, other_cell, g)
            hi = Fraction(k) if on else Fraction(k + 1)
            if hi <= gx:
                cons.append((g, gx))
    # maximal direction cell of the recession cone
    best = None
    for D in apt.direction_cells():
        if all(_dot(g, D.rep) >= 0 for g, _ in cons):
            if best is None or D.cone_dim(apt) > best.cone_dim(apt):
                best = D
    cell = ConicalCell(PLUS, x, best)
    # verify x + D inside the hull polyhedron
    for g, c in cons:
        assert _dot(g, x) >= c and _dot(g, best.rep) >= 0
    return cell, cons
