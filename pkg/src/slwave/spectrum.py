"""Exact interval-set lattice on [0, l], metric neighbourhoods, atoms and eikonals.

Sets are finite unions of open intervals with :class:`fractions.Fraction`
endpoints, so neighbourhoods, unions, intersections and measures are exact.
Floats given by the caller are read through their shortest decimal repr
(``0.3`` becomes ``3/10``), which keeps reflections such as ``1 - 0.3 = 0.7``
exact.  Sets that differ by finitely many points are identified: complements
drop isolated points.  Touching intervals such as (0, 1/2) and (1/2, 1) stay
separate, since their union does not contain 1/2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import ParameterError
from .grid import Grid, GridFunction


def exact(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, Rational)):
        return Fraction(v)
    if isinstance(v, (float, np.floating)):
        if not np.isfinite(v):
            raise ParameterError(f"non-finite value {v!r}")
        return Fraction(repr(float(v)))
    if isinstance(v, str):
        return Fraction(v)
    raise ParameterError(f"cannot convert {v!r} to an exact number")


def _normalize(pairs, l: Fraction) -> tuple[tuple[Fraction, Fraction], ...]:
    """Clip to [0, l], drop empty pieces and merge overlapping ones."""
    clipped = sorted((max(a, Fraction(0)), min(b, l)) for a, b in pairs)
    out: list[list[Fraction]] = []
    for a, b in clipped:
        if a >= b:
            continue
        if out and a < out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return tuple((a, b) for a, b in out)


class IntervalSet:
    """A finite union of disjoint open intervals in [0, l]."""

    def __init__(self, l, intervals=()):
        self.l = exact(l)
        if self.l <= 0:
            raise ParameterError("interval length must be positive")
        pairs = []
        for pair in intervals:
            a, b = (exact(v) for v in pair)
            if a > b:
                raise ParameterError(f"interval ({a}, {b}) has its ends reversed")
            if a < 0 or b > self.l:
                raise ParameterError(f"interval ({a}, {b}) leaves [0, {self.l}]")
            pairs.append((a, b))
        self.intervals = _normalize(pairs, self.l)

    def _new(self, intervals):
        return type(self)(self.l, intervals)

    def __eq__(self, other):
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return self.l == other.l and self.intervals == other.intervals

    def __hash__(self):
        return hash((self.l, self.intervals))

    def __repr__(self):
        body = " U ".join(f"({a}, {b})" for a, b in self.intervals) or "empty"
        return f"{type(self).__name__}(l={self.l}: {body})"

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    @property
    def measure(self) -> Fraction:
        return sum((b - a for a, b in self.intervals), Fraction(0))

    def reflect(self) -> "IntervalSet":
        return IntervalSet(self.l, [(self.l - b, self.l - a) for a, b in self.intervals])

    @property
    def is_symmetric(self) -> bool:
        return self.reflect().intervals == self.intervals

    def contains(self, x) -> bool:
        x = exact(x)
        return any(a < x < b for a, b in self.intervals)

    def issubset(self, other: "IntervalSet") -> bool:
        _same_l(self, other)
        return all(any(c <= a and b <= d for c, d in other.intervals) for a, b in self.intervals)

    def mask(self, x: np.ndarray) -> np.ndarray:
        """Membership of sample points (float comparison)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for a, b in self.intervals:
            out |= (x > float(a)) & (x < float(b))
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_dict(self) -> dict:
        return {"l": float(self.l), "intervals": [[float(a), float(b)] for a, b in self.intervals]}

    @classmethod
    def from_dict(cls, d: dict):
        try:
            return cls(d["l"], [tuple(p) for p in d["intervals"]])
        except (KeyError, TypeError) as exc:
            raise ParameterError(f"malformed interval-set record: {exc}") from None

    @classmethod
    def from_json(cls, text: str):
        return cls.from_dict(json.loads(text))


class ElementarySet(IntervalSet):
    """Interval set symmetric about l/2."""

    def __init__(self, l, intervals=()):
        super().__init__(l, intervals)
        if not self.is_symmetric:
            raise ParameterError(f"set is not symmetric about l/2: {self.intervals}")


def _same_l(e: IntervalSet, f: IntervalSet):
    if e.l != f.l:
        raise ParameterError(f"sets live on different intervals: l={e.l} vs l={f.l}")


def _result_type(*sets):
    return ElementarySet if all(isinstance(s, ElementarySet) for s in sets) else IntervalSet


def neighborhood(E: IntervalSet, t) -> IntervalSet:
    """{x in [0, l] : dist(x, E) < t}; E itself for t = 0."""
    t = exact(t)
    if t < 0:
        raise ParameterError("neighbourhood radius must be non-negative")
    if t == 0:
        return E
    return E._new(_normalize([(a - t, b + t) for a, b in E.intervals], E.l))


def _complement(E: IntervalSet):
    pts = [Fraction(0)]
    for a, b in E.intervals:
        pts += [a, b]
    pts.append(E.l)
    return [(pts[i], pts[i + 1]) for i in range(0, len(pts), 2)]


def _meet(E: IntervalSet, F: IntervalSet):
    out = []
    for a, b in E.intervals:
        for c, d in F.intervals:
            lo, hi = max(a, c), min(b, d)
            if lo < hi:
                out.append((lo, hi))
    return out


def _join(E: IntervalSet, F: IntervalSet):
    # union of open intervals: overlaps merge, touching ends stay apart
    return list(E.intervals) + list(F.intervals)


def lattice_op(kind: str, E: IntervalSet, F: IntervalSet | None = None) -> IntervalSet:
    if kind == "complement":
        if F is not None:
            raise ParameterError("complement takes a single set")
        return E._new(_complement(E))
    if F is None:
        raise ParameterError(f"{kind} needs two sets")
    _same_l(E, F)
    cls = _result_type(E, F)
    if kind == "join":
        return cls(E.l, _join(E, F))
    if kind == "meet":
        return cls(E.l, _meet(E, F))
    raise ParameterError(f"unknown lattice operation {kind!r}")


def join(E, F):
    return lattice_op("join", E, F)


def meet(E, F):
    return lattice_op("meet", E, F)


def complement(E):
    return lattice_op("complement", E)


def symdiff_measure(E: IntervalSet, F: IntervalSet) -> Fraction:
    """Lebesgue measure of the symmetric difference."""
    _same_l(E, F)
    both = sum((b - a for a, b in _meet(E, F)), Fraction(0))
    return E.measure + F.measure - 2 * both


# ---------------------------------------------------------------------------
# wave spectrum

@dataclass(frozen=True)
class Atom:
    """The spectrum point at coordinate x in [0, l/2]."""

    x: Fraction
    l: Fraction

    def __init__(self, x, l=1):
        x, l = exact(x), exact(l)
        if not 0 <= x <= l / 2:
            raise ParameterError(f"atom coordinate {x} outside [0, {l / 2}]")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "l", l)

    @property
    def points(self) -> tuple[Fraction, Fraction]:
        return self.x, self.l - self.x


def atom_set(a: Atom, t, l=None) -> ElementarySet:
    """({x} U {l - x})^t."""
    l = a.l if l is None else exact(l)
    if l != a.l:
        raise ParameterError("atom belongs to a different interval")
    t = exact(t)
    if t <= 0:
        raise ParameterError("atom sets need t > 0")
    x, y = a.points
    return ElementarySet(l, _normalize([(x - t, x + t), (y - t, y + t)], l))


def eikonal_profile(a: Atom, grid: Grid) -> GridFunction:
    """Distance to {x_a, l - x_a} sampled at the grid nodes."""
    if exact(grid.l) != a.l and abs(grid.l - float(a.l)) > 1e-12 * grid.l:
        raise ParameterError("grid and atom live on different intervals")
    x = grid.nodes
    p, r = float(a.x), float(a.l - a.x)
    return GridFunction(grid, np.minimum(np.abs(x - p), np.abs(x - r)))


def spectrum_distance(a: Atom, b: Atom) -> Fraction:
    if a.l != b.l:
        raise ParameterError("atoms belong to different intervals")
    return abs(a.x - b.x)


def boundary_atom(l=1) -> Atom:
    """omega_0: the only boundary point of the spectrum."""
    return Atom(0, l)


def boundary_distance(a: Atom) -> Fraction:
    return spectrum_distance(a, boundary_atom(a.l))


def reachable_set(t, l=1) -> ElementarySet:
    """(0, t) U (l - t, l): the support set reachable from both ends at time t."""
    return atom_set(boundary_atom(l), t)
