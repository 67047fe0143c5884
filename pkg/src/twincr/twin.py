"""The thin twin building of type (W, S).

Chambers are signed group elements, simplices signed cosets (sign, J, w)
with w the ShortLex-minimal coset representative.  Codistance follows the
thin-model convention delta*((+,w), (-,v)) = w^-1 v, which makes the
fundamental pair ((+,1), (-,1)) opposite.

Sign sequences are *signed*: sigma_t on the minus component is the negation
of the plus value for the same (J, w), so a twin root (t, side) is exactly
{A : sigma_t(A) in {0, side}} on both components.

All subcomplex operations are ball-relative: results carry an explicit
radius and a ball_complete flag, and theorem-level checks are only made on
ball-complete instances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

from .coxeter import CoxeterSystem, Element
from .errors import InputError, NotBallComplete, NotSpherical, SignMismatch

PLUS = 1
MINUS = -1


@dataclass(frozen=True)
class TwinSimplex:
    """A simplex of the twin apartment: sign, residue type J, minimal coset rep."""

    sign: int
    J: tuple          # sorted tuple of generator indices
    w: Element

    def key(self):
        return (self.sign, self.J, self.w.word)

    def __repr__(self):
        sys = self.w.system
        jlab = "{" + ",".join(sys.generators[j] for j in self.J) + "}"
        return f"({'+' if self.sign > 0 else '-'},{jlab},{self.w.labels() or '1'})"

    @property
    def system(self):
        return self.w.system

    def is_chamber(self):
        return not self.J


@dataclass(frozen=True)
class TwinRoot:
    """A twin root: a reflection (the twin wall) plus a side."""

    t: Element
    side: int

    def key(self):
        return (self.t.word, self.side)

    def __repr__(self):
        return f"root({self.t.labels()},{'+' if self.side > 0 else '-'})"


def make_simplex(system: CoxeterSystem, sign: int, J, w: Element) -> TwinSimplex:
    if sign not in (PLUS, MINUS):
        raise InputError("sign must be +1 or -1")
    J = tuple(sorted(set(J)))
    if any(not 0 <= j < system.rank for j in J):
        raise InputError("type subset out of range")
    if len(J) >= system.rank:
        raise InputError("J must be a proper subset of S (the empty simplex is implicit)")
    return TwinSimplex(sign, J, system.min_coset_rep(w, J))


def chamber(system: CoxeterSystem, sign: int, w: Element) -> TwinSimplex:
    return make_simplex(system, sign, (), w)


def is_spherical_simplex(A: TwinSimplex) -> bool:
    return A.system.is_spherical(A.J)


def faces(A: TwinSimplex):
    """All faces of A (supersets of the residue type), excluding the empty simplex."""
    sys = A.system
    rest = [j for j in range(sys.rank) if j not in A.J]
    out = []
    for r in range(len(rest) + 1):
        for extra in combinations(rest, r):
            J2 = tuple(sorted(A.J + extra))
            if len(J2) >= sys.rank:
                continue
            out.append(make_simplex(sys, A.sign, J2, A.w))
    return out


def op_involution(A: TwinSimplex) -> TwinSimplex:
    return TwinSimplex(-A.sign, A.J, A.w)


# -- distances -----------------------------------------------------------------


def weyl_distance(C: TwinSimplex, D: TwinSimplex) -> Element:
    if C.sign != D.sign:
        raise SignMismatch("use codistance for opposite-sign chambers")
    sys = C.system
    return sys.multiply(sys.inverse(C.w), D.w)


def codistance(C: TwinSimplex, D: TwinSimplex) -> Element:
    if C.sign == D.sign:
        raise SignMismatch("use weyl_distance for same-sign chambers")
    sys = C.system
    return sys.multiply(sys.inverse(C.w), D.w)


def numerical_codistance(C: TwinSimplex, D: TwinSimplex) -> int:
    return codistance(C, D).length


def opposite(C: TwinSimplex, D: TwinSimplex) -> bool:
    """Simplices are opposite iff D = op(C) (thin model: unique opposites)."""
    return C.sign != D.sign and C.J == D.J and C.w is D.w


# -- sign sequences --------------------------------------------------------------


def sign_plus(system: CoxeterSystem, J, w: Element, t: Element) -> int:
    """The component-plus sign of the coset w W_J with respect to wall t."""
    key = (t.word, J, w.word)
    cache = system.__dict__.setdefault("_sigma_cache", {})
    val = cache.get(key)
    if val is None:
        conj = system.multiply(system.multiply(system.inverse(w), t), w)
        if system.in_parabolic(conj, J):
            val = 0
        else:
            tw = system.multiply(t, w)
            val = 1 if tw.length > w.length else -1
        cache[key] = val
    return val


def sign_of(A: TwinSimplex, t: Element) -> int:
    """Signed sign sequence: negated on the minus component."""
    v = sign_plus(A.system, A.J, A.w, t)
    return v if A.sign == PLUS else -v


def zero_walls(A: TwinSimplex):
    """Walls through A, i.e. reflections stabilizing the coset.
    Requires A spherical (finitely many such walls)."""
    sys = A.system
    cache = sys.__dict__.setdefault("_zerowall_cache", {})
    ck = (A.J, A.w.word)
    out = cache.get(ck)
    if out is None:
        refl = sys.parabolic_reflections(A.J)
        wi = sys.inverse(A.w)
        walls = [sys.multiply(sys.multiply(A.w, r), wi) for r in refl]
        out = tuple(sorted(set(walls), key=lambda e: (e.length, e.word)))
        cache[ck] = out
    return out


def in_root(A: TwinSimplex, root: TwinRoot) -> bool:
    return sign_of(A, root.t) in (0, root.side)


# -- projections ------------------------------------------------------------------


def project_same(A: TwinSimplex, B: TwinSimplex) -> TwinSimplex:
    """The product AB within one component (the gate construction)."""
    if A.sign != B.sign:
        raise SignMismatch("project_same needs equal signs")
    sys = A.system
    cache = sys.__dict__.setdefault("_projsame_cache", {})
    ck = (A.key(), B.key())
    res = cache.get(ck)
    if res is None:
        d = sys.multiply(sys.inverse(A.w), B.w)
        d2 = sys.min_coset_rep(d, B.J)
        x1, _ = sys.left_decompose(d2, A.J)
        w1 = sys.double_coset_min(d, A.J, B.J)
        w1i = sys.inverse(w1)
        J1 = tuple(
            s
            for s in A.J
            if _is_generator_in(sys, sys.multiply(sys.multiply(w1i, sys.gen(s)), w1), B.J)
        )
        gate = sys.multiply(A.w, x1)
        res = make_simplex(sys, A.sign, J1, gate)
        cache[ck] = res
    return res


def _is_generator_in(sys, e: Element, J) -> bool:
    return e.length == 1 and e.word[0] in J


def project_twin(A: TwinSimplex, B: TwinSimplex) -> TwinSimplex:
    """Cross-component projection of B onto the spherical simplex A.

    Implemented through the link: proj_A B is opposite proj_A(op B) in the
    link of A, which pins it down exactly.
    """
    if A.sign == B.sign:
        raise SignMismatch("project_twin needs opposite signs")
    sys = A.system
    if not sys.is_spherical(A.J):
        raise NotSpherical("cross-component projection needs a spherical target")
    cache = sys.__dict__.setdefault("_projtwin_cache", {})
    ck = (A.key(), B.key())
    res = cache.get(ck)
    if res is None:
        X = project_same(A, op_involution(B))
        res = _op_link(A, X)
        cache[ck] = res
    return res


def _op_link(A: TwinSimplex, X: TwinSimplex) -> TwinSimplex:
    """Opposition involution of the link of A, applied to a simplex X >= A."""
    sys = A.system
    u = sys.multiply(sys.inverse(A.w), X.w)
    assert sys.in_parabolic(u, A.J), "X is not a face-neighbour of A in its residue"
    w0 = sys.longest_element(A.J)
    J2 = []
    for s in X.J:
        conj = sys.multiply(sys.multiply(w0, sys.gen(s)), w0)
        assert _is_generator_in(sys, conj, A.J)
        J2.append(conj.word[0])
    rep = sys.multiply(A.w, sys.multiply(u, w0))
    return make_simplex(sys, A.sign, tuple(sorted(J2)), rep)


# independent oracle routes, used by the verification suites


def project_twin_by_signs(A: TwinSimplex, B: TwinSimplex) -> TwinSimplex:
    """Sign-sequence route: the unique face X >= A whose signs on the walls
    through A agree with B's."""
    if A.sign == B.sign:
        raise SignMismatch
    sys = A.system
    walls = zero_walls(A)
    targets = [sign_of(B, t) for t in walls]
    found = []
    for X in _residue_faces(A):
        if all(sign_of(X, t) == tg for t, tg in zip(walls, targets)):
            found.append(X)
    if len(found) != 1:
        raise AssertionError(f"sign route did not isolate a simplex: {found}")
    return found[0]


def _residue_faces(A: TwinSimplex):
    """All simplices X >= A (faces of chambers of A's residue containing A)."""
    sys = A.system
    cache = sys.__dict__.setdefault("_resface_cache", {})
    ck = (A.sign, A.J, A.w.word)
    res = cache.get(ck)
    if res is not None:
        return res
    members = sys.parabolic(A.J)
    out = {}
    for J2 in _subsets(A.J):
        seen = set()
        for x in members:
            rep = sys.min_coset_rep(sys.multiply(A.w, x), J2)
            if rep not in seen:
                seen.add(rep)
                X = TwinSimplex(A.sign, J2, rep)
                out[X.key()] = X
    res = [out[k] for k in sorted(out)]
    cache[ck] = res
    return res


def _subsets(J):
    J = tuple(J)
    for r in range(len(J) + 1):
        yield from (tuple(sorted(c)) for c in combinations(J, r))


def project_twin_by_max_codistance(A: TwinSimplex, B: TwinSimplex, radius_margin: int = 6):
    """Definitional route: intersect, over chambers D >= B, the unique
    chamber >= A of maximal codistance to D.

    For a nonspherical B-residue the chambers are enumerated inside a ball;
    returns (simplex, stabilized) where stabilized reports that the last two
    enumeration layers did not change the intersection.
    """
    if A.sign == B.sign:
        raise SignMismatch
    sys = A.system
    res_members = sys.parabolic(A.J)

    def gate_for(D: TwinSimplex) -> TwinSimplex:
        best = None
        best_len = -1
        count = 0
        for x in res_members:
            cand = sys.multiply(A.w, x)
            ln = sys.multiply(sys.inverse(cand), D.w).length
            if ln > best_len:
                best, best_len, count = cand, ln, 1
            elif ln == best_len:
                count += 1
        assert count == 1, "gate not unique"
        return chamber(sys, A.sign, best)

    if sys.is_spherical(B.J):
        gates = [
            gate_for(chamber(sys, B.sign, sys.multiply(B.w, x)))
            for x in sys.parabolic(B.J)
        ]
        return _common_face(gates), True
    # nonspherical B-residue: chambers of B.w W_J enumerated by length layers
    maxlen = B.w.length + radius_margin
    frontier = [B.w]
    seen = {B.w}
    layers = [[B.w]]
    while frontier:
        nxt = []
        for e in frontier:
            for s in B.J:
                f = sys.mul_gen(e, s)
                if f not in seen and f.length <= maxlen:
                    seen.add(f)
                    nxt.append(f)
        if nxt:
            layers.append(sorted(nxt, key=lambda e: e.word))
        frontier = nxt
    gates = []
    inter = None
    last_change_layer = 0
    for li, layer in enumerate(layers):
        for e in layer:
            gates.append(gate_for(chamber(sys, B.sign, e)))
        new_inter = _common_face(gates)
        if inter is None or new_inter != inter:
            inter = new_inter
            last_change_layer = li
    stabilized = last_change_layer <= len(layers) - 3
    return inter, stabilized


def _common_face(chambers_list):
    """The largest simplex that is a face of every chamber in the list."""
    sys = chambers_list[0].system
    sign = chambers_list[0].sign
    u0 = chambers_list[0].w
    u0i = sys.inverse(u0)
    J = set()
    for c in chambers_list[1:]:
        J |= sys.support(sys.multiply(u0i, c.w))
    return make_simplex(sys, sign, tuple(sorted(J)), u0)


# -- subcomplexes --------------------------------------------------------------------


class Subcomplex:
    """A finite, face-closed set of simplices of both components, with
    ball-relative bookkeeping."""

    def __init__(self, system: CoxeterSystem, simplices, radius: int, ball_complete: bool):
        self.system = system
        self._set = {}
        for A in simplices:
            self._set[A.key()] = A
        self.radius = radius
        self.ball_complete = ball_complete

    def __iter__(self):
        return (self._set[k] for k in sorted(self._set))

    def __len__(self):
        return len(self._set)

    def __contains__(self, A: TwinSimplex):
        return A.key() in self._set

    def component(self, sign: int):
        return [A for A in self if A.sign == sign]

    def key(self):
        return tuple(sorted(self._set))

    def __eq__(self, other):
        return isinstance(other, Subcomplex) and self.key() == other.key()

    def max_length(self):
        return max((A.w.length for A in self), default=0)

    def to_records(self):
        sys = self.system
        return [
            {
                "sign": "+" if A.sign > 0 else "-",
                "type": [sys.generators[j] for j in A.J],
                "word": A.w.labels(),
            }
            for A in self
        ]

    @classmethod
    def from_records(cls, system: CoxeterSystem, records, radius: int, ball_complete=True):
        simplices = []
        for rec in records:
            try:
                sign = PLUS if rec["sign"] == "+" else MINUS
                J = tuple(system._gen_index[g] for g in rec["type"])
                w = system.element_from_labels(rec["word"])
            except KeyError as exc:
                raise InputError(f"bad subcomplex record {rec}: {exc}") from exc
            simplices.append(make_simplex(system, sign, J, w))
        closed = []
        for A in simplices:
            closed.extend(faces(A))
        return cls(system, closed, radius, ball_complete)


def save_subcomplex(Y: Subcomplex, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(Y.to_records(), fh, indent=1, sort_keys=True)


def load_subcomplex(system: CoxeterSystem, path, radius: int) -> Subcomplex:
    with open(path, "r", encoding="utf-8") as fh:
        return Subcomplex.from_records(system, json.load(fh), radius)


def twin_root_to_record(root: TwinRoot):
    return {"reflection": root.t.labels(), "side": "+" if root.side > 0 else "-"}


def twin_root_from_record(system: CoxeterSystem, rec) -> TwinRoot:
    t = system.element_from_labels(rec["reflection"])
    if t.length % 2 == 0 or system.multiply(t, t).length != 0:
        raise InputError(f"{rec['reflection']!r} is not a reflection")
    return TwinRoot(t, PLUS if rec["side"] == "+" else MINUS)


# -- hulls ---------------------------------------------------------------------------


def convex_hull(seeds, radius: int, cross_only: bool = False) -> Subcomplex:
    """Closure of the seeds under projections, truncated to the ball.

    With cross_only=True only projections between the two components are
    applied (the coconvex hull).  The result's ball_complete flag is True
    iff the closure reached a fixed point with nothing truncated and every
    member at word length <= radius - 2.
    """
    seeds = list(seeds)
    if not seeds:
        raise InputError("seeds must be nonempty")
    sys = seeds[0].system
    for comp in (PLUS, MINUS):
        members = [A for A in seeds if A.sign == comp]
        if members and not any(sys.is_spherical(A.J) for A in members):
            raise InputError("each nonempty seed component needs a spherical simplex")

    current = {}
    overflow = False

    def add(A: TwinSimplex):
        nonlocal overflow
        if A.w.length > radius:
            overflow = True
            return []
        new = []
        for F in faces(A):
            if F.key() not in current:
                current[F.key()] = F
                new.append(F)
        return new

    fresh = []
    for A in seeds:
        fresh.extend(add(A))

    while fresh:
        members = [current[k] for k in sorted(current)]
        fresh_keys = {A.key() for A in fresh}
        produced = []
        for A in members:
            a_spherical = sys.is_spherical(A.J)
            for B in members:
                if A is B:
                    continue
                if A.key() not in fresh_keys and B.key() not in fresh_keys:
                    continue
                if A.sign == B.sign:
                    if cross_only:
                        continue
                    produced.append(project_same(A, B))
                elif a_spherical:
                    produced.append(project_twin(A, B))
        fresh = []
        for P in produced:
            if P.key() not in current:
                fresh.extend(add(P))
    maxlen = max((A.w.length for A in current.values()), default=0)
    complete = (not overflow) and maxlen <= radius - 2
    return Subcomplex(sys, current.values(), radius, complete)


def coconvex_hull(seeds, radius: int) -> Subcomplex:
    return convex_hull(seeds, radius, cross_only=True)


def projection_escape(Y: Subcomplex, cross_only: bool = False):
    """First pair (A, B) in Y whose projection leaves Y, or None."""
    sys = Y.system
    members = list(Y)
    for A in members:
        a_spherical = sys.is_spherical(A.J)
        for B in members:
            if A is B:
                continue
            if A.sign == B.sign:
                if cross_only:
                    continue
                P = project_same(A, B)
            elif a_spherical:
                P = project_twin(A, B)
            else:
                continue
            if P not in Y:
                return (A, B, P)
    return None


def is_convex(Y: Subcomplex, require_ball_complete: bool = True) -> bool:
    """True iff Y is closed under both projection kinds."""
    if require_ball_complete and not Y.ball_complete:
        raise NotBallComplete("convexity is only decided on ball-complete subcomplexes")
    for comp in (PLUS, MINUS):
        members = Y.component(comp)
        if members and not any(is_spherical_simplex(A) for A in members):
            raise InputError("each nonempty component must contain a spherical simplex")
    return projection_escape(Y) is None


def ball_simplices(system: CoxeterSystem, radius: int, signs=(PLUS, MINUS)):
    """All simplices with minimal representative inside the ball."""
    cache = system.__dict__.setdefault("_ballsimp_cache", {})
    key = (radius, tuple(signs))
    if key in cache:
        return cache[key]
    out = []
    elements = system.ball(radius)
    for J in _subsets(range(system.rank)):
        if len(J) >= system.rank:
            continue
        seen = set()
        for w in elements:
            rep = system.min_coset_rep(w, J)
            if rep.length <= radius and rep not in seen:
                seen.add(rep)
                for sign in signs:
                    out.append(TwinSimplex(sign, J, rep))
    out.sort(key=lambda A: A.key())
    cache[key] = tuple(out)
    return cache[key]


def candidate_walls(Y: Subcomplex, margin: int = 1):
    """Ball-relevant walls touching Y (some simplex of Y lies on the wall)."""
    sys = Y.system
    refl = sys.reflections_up_to(Y.radius + margin)
    return [t for t in refl if any(sign_of(A, t) == 0 for A in Y)]


def twin_root_decomposition(Y: Subcomplex, require_ball_complete: bool = True):
    """Twin roots alpha with Y inside alpha and Y touching the wall of alpha,
    together with the ball-restricted intersection check.

    Returns (roots, intersection_equals_Y).
    """
    if require_ball_complete and not Y.ball_complete:
        raise NotBallComplete
    sys = Y.system
    roots = []
    for t in candidate_walls(Y):
        for side in (PLUS, MINUS):
            root = TwinRoot(t, side)
            if all(in_root(A, root) for A in Y):
                roots.append(root)
    inter = []
    for A in ball_simplices(sys, Y.radius):
        if all(in_root(A, r) for r in roots):
            inter.append(A)
    equal = {A.key() for A in inter} == {A.key() for A in Y}
    return roots, equal
