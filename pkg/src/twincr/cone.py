"""Exact geometric realization: the twin Tits cone.

Points live in the dual of the root space, in "fundamental coordinates"
x_s = f(alpha_s); the closed fundamental chamber is the nonnegative orthant
and the cell of a simplex (sign, J, w) is  sign * w(C_J)  with
C_J = {x >= 0, x_j = 0 for j in J}.  All arithmetic is exact (Fraction, or
Q(sqrt2,sqrt3) when the Coxeter matrix contains 4 or 6).

For systems whose bilinear form has a one-dimensional positive radical
(D-infinity and the affine types) the invariant level functional certifies
membership: the twin cone is {level != 0} plus the origin, and nonzero
points of the level-zero hyperplane are certified Outside.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .coxeter import CoxeterSystem, Element, _mat_vec
from .errors import CapExceeded, InputError, NotBallComplete
from .qfield import QF, parse_qf, sign_of
from .twin import MINUS, PLUS, Subcomplex, TwinSimplex, make_simplex


class GeometricRep:
    """Dual (contragredient) reflection representation of a Coxeter system."""

    def __init__(self, system: CoxeterSystem):
        self.system = system
        n = system.rank
        one, zero = system._one, system._zero
        mats = []
        for s in range(n):
            rows = [[one if i == j else zero for j in range(n)] for i in range(n)]
            for t in range(n):
                rows[t][s] = rows[t][s] - 2 * system.bilinear[t][s]
            mats.append(tuple(tuple(r) for r in rows))
        self.gen_mats = tuple(mats)
        self.zero = zero
        self.one = one

    def point(self, coords):
        n = self.system.rank
        coords = tuple(self._scalar(c) for c in coords)
        if len(coords) != n:
            raise InputError(f"point needs {n} coordinates")
        return coords

    def _scalar(self, c):
        if isinstance(c, str):
            c = parse_qf(c)
        if isinstance(c, QF):
            if self.system._rational:
                if c.b or c.c or c.d:
                    raise InputError("irrational coordinate in a rational system")
                return c.a
            return c
        if isinstance(c, (int, Fraction)):
            c = Fraction(c)
            return c if self.system._rational else QF(c)
        raise InputError(f"bad coordinate {c!r}")

    def apply_gen(self, s: int, p):
        return _mat_vec(self.gen_mats[s], p)

    def act(self, w: Element, p):
        """Apply w letter by letter (rightmost letter first)."""
        p = self.point(p)
        for s in reversed(w.word):
            p = self.apply_gen(s, p)
        return p

    def negate(self, p):
        return tuple(-c for c in p)

    def is_zero(self, p) -> bool:
        return all(sign_of(c) == 0 for c in p)

    def barycenter(self, A: TwinSimplex):
        """An interior rational point of the cell of A."""
        y0 = tuple(self.zero if j in A.J else self.one for j in range(self.system.rank))
        p = self.act(A.w, y0)
        return p if A.sign == PLUS else self.negate(p)


@dataclass(frozen=True)
class LocatedCell:
    status: str                      # "in" | "origin" | "outside" | "unknown"
    simplex: TwinSimplex | None = None

    def __repr__(self):
        if self.status == "in":
            return f"cell{self.simplex!r}"
        return self.status

    def to_record(self):
        if self.status == "in":
            A = self.simplex
            sys = A.w.system
            return {
                "status": "in",
                "sign": "+" if A.sign > 0 else "-",
                "type": [sys.generators[j] for j in A.J],
                "word": A.w.labels(),
            }
        return {"status": self.status}


ORIGIN = LocatedCell("origin")
OUTSIDE = LocatedCell("outside")
UNKNOWN = LocatedCell("unknown")


class GapMarker:
    """Marks a maximal subinterval of a segment lying outside the twin cone."""

    def __repr__(self):
        return "<gap>"

    def to_record(self):
        return {"status": "gap"}


GAP = GapMarker()


def _descend(rep: GeometricRep, p, cap: int):
    """Walk p into the fundamental cone; returns (word, final) or None."""
    sys = rep.system
    word = []
    for _ in range(cap + 1):
        neg = None
        for s in range(sys.rank):
            if sign_of(p[s]) < 0:
                neg = s
                break
        if neg is None:
            return word, p
        word.append(neg)
        p = rep.apply_gen(neg, p)
    return None


def locate(rep: GeometricRep, p, radius_cap: int = 64) -> LocatedCell:
    """Point location in the twin Tits cone by descent walks.

    Unknown is a value, not an error: it reports that both descent walks hit
    the cap and no certificate applies.
    """
    p = rep.point(p)
    sys = rep.system
    if rep.is_zero(p):
        return ORIGIN
    if sys.is_affine_like:
        lv = sign_of(sys.level(p))
        if lv == 0:
            return OUTSIDE
        if lv > 0:
            got = _descend(rep, p, radius_cap)
            assert got is not None, "positive-level descent must terminate"
            return _cell_from_walk(sys, PLUS, *got)
        got = _descend(rep, rep.negate(p), radius_cap)
        assert got is not None
        return _cell_from_walk(sys, MINUS, *got)
    got = _descend(rep, p, radius_cap)
    if got is not None:
        return _cell_from_walk(sys, PLUS, *got)
    got = _descend(rep, rep.negate(p), radius_cap)
    if got is not None:
        return _cell_from_walk(sys, MINUS, *got)
    return UNKNOWN


def _cell_from_walk(sys: CoxeterSystem, sign: int, word, final) -> LocatedCell:
    J = tuple(s for s in range(sys.rank) if sign_of(final[s]) == 0)
    if len(J) >= sys.rank:
        return ORIGIN
    w = sys.element_from_word(tuple(word))
    return LocatedCell("in", make_simplex(sys, sign, J, w))


# -- segments -------------------------------------------------------------------


def _origin_time(x, y):
    """lambda in (0,1) with x + lambda (y - x) = 0, or None."""
    lam = None
    for xi, yi in zip(x, y):
        d = yi - xi
        if sign_of(d) != 0:
            cand = (-xi) / d if not isinstance(d, QF) else (-xi) / d
            lam = cand
            break
    if lam is None:
        return None
    for xi, yi in zip(x, y):
        if sign_of(xi + lam * (yi - xi)) != 0:
            return None
    if sign_of(lam) > 0 and sign_of(lam - 1) < 0:
        return lam
    return None


def _segment_coeffs(rep, frame_inv_mat, x, y, sign):
    """Local coordinates z(lambda) = A + lambda B of sign*p(lambda) in a frame."""
    sx = x if sign == PLUS else rep.negate(x)
    sy = y if sign == PLUS else rep.negate(y)
    A = _mat_vec(frame_inv_mat, sx)
    B = tuple(b - a for a, b in zip(A, _mat_vec(frame_inv_mat, sy)))
    return A, B


def _dual_mat(rep: GeometricRep, w: Element):
    """Matrix of w in the dual representation (cached per element)."""
    cache = rep.__dict__.setdefault("_dualmat_cache", {})
    mk = w.word
    m = cache.get(mk)
    if m is None:
        n = rep.system.rank
        cols = []
        for j in range(n):
            e = tuple(rep.one if i == j else rep.zero for i in range(n))
            cols.append(rep.act(w, e))
        m = tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))
        cache[mk] = m
    return m


class _Walker:
    """Walks a segment through the chamber cones of one component."""

    def __init__(self, rep: GeometricRep, x, y, sign, start_cell: TwinSimplex):
        self.rep = rep
        self.sys = rep.system
        self.sign = sign
        self.x = x
        self.y = y
        self.frame = start_cell.w
        self.lam = None  # current position parameter (None = at start 0)

    def _coeffs(self):
        inv = _dual_mat(self.rep, self.sys.inverse(self.frame))
        return _segment_coeffs(self.rep, inv, self.x, self.y, self.sign)

    def cells(self, lam_from, lam_to, cap, on_cell):
        """Emit the cells met on [lam_from, lam_to]; on_cell(cell) may return
        False to stop early.  Returns "done" | "stopped" | "cap"."""
        sys = self.sys
        lam = lam_from
        A, B = self._coeffs()
        # ensure the frame is valid at lam (all coords >= 0 at lam, and
        # moving direction admissible); cross walls until it is
        steps = 0
        while True:
            fixed = True
            for s in range(sys.rank):
                v = A[s] + lam * B[s]
                sv = sign_of(v)
                if sv < 0 or (sv == 0 and sign_of(B[s]) < 0 and self._interior(lam, lam_to)):
                    self.frame = sys.mul_gen(self.frame, s)
                    A, B = self._coeffs()
                    fixed = False
                    steps += 1
                    if steps > cap:
                        return "cap"
                    break
            if fixed:
                break
        while True:
            # cell at the point lam
            J_here = tuple(s for s in range(sys.rank) if sign_of(A[s] + lam * B[s]) == 0)
            cell = self._emit(J_here)
            if cell is not None and on_cell(cell) is False:
                return "stopped"
            if self._eq(lam, lam_to):
                return "done"
            # next event: smallest root of a decreasing coordinate in (lam, lam_to]
            nxt = None
            for s in range(sys.rank):
                bs = sign_of(B[s])
                if bs < 0:
                    root = -(A[s]) / B[s]
                    if self._lt(lam, root) and not self._lt(lam_to, root):
                        if nxt is None or self._lt(root, nxt):
                            nxt = root
            # open-interval cell between lam and min(nxt, lam_to)
            J_open = tuple(
                s
                for s in range(sys.rank)
                if sign_of(A[s]) == 0 and sign_of(B[s]) == 0
            )
            upper = lam_to if nxt is None else nxt
            if self._lt(lam, upper):
                cell = self._emit(J_open)
                if cell is not None and on_cell(cell) is False:
                    return "stopped"
            if nxt is None:
                # close at lam_to
                J_end = tuple(
                    s for s in range(sys.rank) if sign_of(A[s] + lam_to * B[s]) == 0
                )
                cell = self._emit(J_end)
                if cell is not None and on_cell(cell) is False:
                    return "stopped"
                return "done"
            lam = nxt
            # cross all walls that turn negative just after lam
            crossed = True
            while crossed:
                crossed = False
                for s in range(sys.rank):
                    v = A[s] + lam * B[s]
                    if sign_of(v) == 0 and sign_of(B[s]) < 0 and self._interior(lam, lam_to):
                        self.frame = sys.mul_gen(self.frame, s)
                        A, B = self._coeffs()
                        crossed = True
                        steps += 1
                        if steps > cap:
                            return "cap"
                        break
                else:
                    break
            if self._eq(lam, lam_to):
                J_end = tuple(
                    s for s in range(sys.rank) if sign_of(A[s] + lam * B[s]) == 0
                )
                cell = self._emit(J_end)
                if cell is not None and on_cell(cell) is False:
                    return "stopped"
                return "done"

    def _emit(self, J):
        sys = self.sys
        if len(J) >= sys.rank:
            return None  # the origin; callers handle it separately
        return make_simplex(sys, self.sign, J, self.frame)

    @staticmethod
    def _lt(a, b):
        return sign_of(b - a) > 0

    @staticmethod
    def _eq(a, b):
        return sign_of(b - a) == 0

    def _interior(self, lam, lam_to):
        return self._lt(lam, lam_to)


def cells_on_segment(rep: GeometricRep, x, y, radius_cap: int = 128):
    """Ordered cells met by the straight segment [x, y], with gap markers for
    maximal subintervals outside the twin cone.

    Near a nonzero boundary point the crossed cells accumulate; the walk then
    truncates at the cap and the trace carries a GapMarker at the crossing.
    Raises CapExceeded (with partial trace) when a within-cone walk caps out.
    """
    x = rep.point(x)
    y = rep.point(y)
    lx = locate(rep, x)
    ly = locate(rep, y)
    if lx.status not in ("in", "origin") or ly.status not in ("in", "origin"):
        raise InputError("segment endpoints must lie in the twin cone")
    one = rep.one
    zero = rep.zero
    trace = []

    def collect(cell):
        if not trace or trace[-1] != cell:
            trace.append(cell)

    def walk_part(sign, lam_a, lam_b, start_cell, reverse=False):
        """Walk the open part in one component; returns True if capped."""
        if reverse:
            wx, wy = y, x
            la, lb = one - lam_b, one - lam_a
            start = start_cell
        else:
            wx, wy = x, y
            la, lb = lam_a, lam_b
            start = start_cell
        part = []
        walker = _Walker(rep, wx, wy, sign, start)
        status = walker.cells(la, lb, radius_cap, lambda c: part.append(c))
        if reverse:
            part.reverse()
        for c in part:
            collect(LocatedCell("in", c))
        return status == "cap"

    if lx.status == "origin" and ly.status == "origin":
        collect(ORIGIN)
        return trace

    sys = rep.system
    lam0 = None if (lx.status == "origin" or ly.status == "origin") else _origin_time(x, y)

    same_component = (
        lx.status == "in" and ly.status == "in" and lx.simplex.sign == ly.simplex.sign
    )
    if same_component and lam0 is None:
        capped = walk_part(lx.simplex.sign, zero, one, lx.simplex)
        if capped:
            raise CapExceeded("segment walk cap exceeded", partial=trace)
        return trace

    # split at the origin when the segment passes through it
    if lx.status == "origin":
        collect(ORIGIN)
        capped = walk_part(ly.simplex.sign, one, one, ly.simplex)  # endpoint only
        # walk from just after 0 to 1 in y's component, reversed direction trick:
        trace2 = []
        walker = _Walker(rep, y, x, ly.simplex.sign, ly.simplex)
        status = walker.cells(zero, one, radius_cap, lambda c: trace2.append(c))
        for c in reversed(trace2):
            collect(LocatedCell("in", c))
        if status == "cap":
            raise CapExceeded("segment walk cap exceeded", partial=trace)
        return trace
    if ly.status == "origin":
        capped = walk_part(lx.simplex.sign, zero, one, lx.simplex)
        if capped:
            raise CapExceeded("segment walk cap exceeded", partial=trace)
        collect(ORIGIN)
        return trace
    if lam0 is not None:
        capped1 = walk_part(lx.simplex.sign, zero, lam0, lx.simplex)
        if capped1:
            raise CapExceeded("segment walk cap exceeded", partial=trace)
        collect(ORIGIN)
        rest = []
        walker = _Walker(rep, y, x, ly.simplex.sign, ly.simplex)
        status = walker.cells(zero, one - lam0, radius_cap, lambda c: rest.append(c))
        for c in reversed(rest):
            collect(LocatedCell("in", c))
        if status == "cap":
            raise CapExceeded("segment walk cap exceeded", partial=trace)
        return trace

    # opposite components, not through the origin
    if sys.is_affine_like:
        Lx = sys.level(x)
        Ly = sys.level(y)
        lam_star = Lx / (Lx - Ly)
        walk_part(lx.simplex.sign, zero, lam_star, lx.simplex)
        collect(GAP)
        rest = []
        walker = _Walker(rep, y, x, ly.simplex.sign, ly.simplex)
        walker.cells(zero, one - lam_star, radius_cap, lambda c: rest.append(c))
        for c in reversed(rest):
            collect(LocatedCell("in", c))
        return trace
    # no certificate for the exit interval: walk until the cap and report
    part = []
    walker = _Walker(rep, x, y, lx.simplex.sign, lx.simplex)
    status = walker.cells(zero, one, radius_cap, lambda c: part.append(c))
    for c in part:
        collect(LocatedCell("in", c))
    raise CapExceeded("cross-component walk without certificate", partial=trace)


# -- geometric convexity -----------------------------------------------------------


def is_convex_in_X(rep: GeometricRep, Y: Subcomplex, require_ball_complete=True, cap=None) -> bool:
    """Geometric convexity of the cell union of Y in the twin Tits cone.

    Tests straight segments between interior points (barycenters) of all
    cell pairs of Y; every cell met must belong to Y.  The walk stops early
    at the first cell outside Y, which also makes cross-component gap
    configurations decidable (Y is finite, the crossed cells are not).
    """
    if require_ball_complete and not Y.ball_complete:
        raise NotBallComplete
    members = list(Y)
    if cap is None:
        cap = len(members) + 16
    keyset = {A.key() for A in members}
    pts = [(A, rep.barycenter(A)) for A in members]
    for i, (A, pa) in enumerate(pts):
        for B, pb in pts[i + 1 :]:
            if _face_related(A, B):
                continue
            if not _segment_inside(rep, pa, pb, A, B, keyset, cap):
                return False
    return True


def _face_related(A: TwinSimplex, B: TwinSimplex):
    if A.sign != B.sign:
        return False
    if set(A.J) >= set(B.J) and A.w.system.min_coset_rep(A.w, B.J) is B.w:
        return True
    if set(B.J) >= set(A.J) and A.w.system.min_coset_rep(B.w, A.J) is A.w:
        return True
    return False


def _segment_inside(rep, pa, pb, A, B, keyset, cap):
    """True iff every cell met by [pa, pb] belongs to keyset (origin free)."""
    ok = [True]

    def check(cell):
        if cell.key() not in keyset:
            ok[0] = False
            return False
        return True

    zero, one = rep.zero, rep.one
    if A.sign == B.sign:
        walker = _Walker(rep, pa, pb, A.sign, A)
        status = walker.cells(zero, one, cap, check)
        if status == "cap":
            raise CapExceeded("convexity walk cap exceeded")
        return ok[0]
    lam0 = _origin_time(pa, pb)
    if lam0 is not None:
        walker = _Walker(rep, pa, pb, A.sign, A)
        status = walker.cells(zero, lam0, cap, check)
        if status == "cap":
            raise CapExceeded("convexity walk cap exceeded")
        if not ok[0]:
            return False
        walker = _Walker(rep, pb, pa, B.sign, B)
        status = walker.cells(zero, one - lam0, cap, check)
        if status == "cap":
            raise CapExceeded("convexity walk cap exceeded")
        return ok[0]
    # no origin on the segment: the cells near the exit accumulate, while Y
    # is finite, so some met cell lies outside Y; the early-exit walk finds it
    walker = _Walker(rep, pa, pb, A.sign, A)
    status = walker.cells(zero, one, cap, check)
    if status == "stopped":
        return False
    if status == "cap":
        return False  # crossed more distinct cells than Y has members
    return ok[0]


def in_root_geometric(rep: GeometricRep, cells, root) -> bool:
    """Check cells against a twin root by signs (used for half-space tests)."""
    from .twin import in_root

    return all(in_root(c.simplex, root) for c in cells if c.status == "in")


def parse_point(rep: GeometricRep, text: str):
    """Parse a point given as coordinate strings joined by ';'."""
    parts = [p for p in text.split(";") if p.strip()]
    return rep.point([parse_qf(p) for p in parts])
