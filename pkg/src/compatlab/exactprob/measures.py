"""Joint laws on finite grids, their disintegrations, noise-outsourcing tables and couplings."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .compat import CompatStructure, check_compatibility
from .space import (FiniteSpace, PreconditionError, Rv, StructuralError, VerificationFailure,
                    as_weight, fmt_number)


@dataclass(frozen=True, eq=False)
class JointMeasure:
    """Mass on ``x_values x y_values``; grids are ordered and duplicate-free."""

    x_values: tuple
    y_values: tuple
    mass: Mapping  # (x, y) -> weight; missing pairs carry zero mass

    def __post_init__(self):
        xs, ys = tuple(self.x_values), tuple(self.y_values)
        if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
            raise StructuralError("grid values must be distinct")
        mass = {}
        for (x, y), w in dict(self.mass).items():
            if x not in xs or y not in ys:
                raise StructuralError(f"mass at ({x!r}, {y!r}) is off the grid")
            w = as_weight(w)
            if w < 0:
                raise StructuralError("negative mass")
            if w != 0:
                mass[(x, y)] = w
        total = sum(mass.values())
        exact = all(isinstance(w, Fraction) for w in mass.values())
        if (total != 1) if exact else abs(total - 1.0) > 1e-12:
            raise StructuralError(f"total mass {total} != 1")
        object.__setattr__(self, "x_values", xs)
        object.__setattr__(self, "y_values", ys)
        object.__setattr__(self, "mass", mass)

    @property
    def exact(self) -> bool:
        return all(isinstance(w, Fraction) for w in self.mass.values())

    def __call__(self, x, y):
        return self.mass.get((x, y), 0)

    def __eq__(self, other):
        return isinstance(other, JointMeasure) and self.mass == other.mass

    def __hash__(self):
        return hash(frozenset(self.mass.items()))

    def y_marginal(self) -> dict:
        out = {}
        for (x, y), w in self.mass.items():
            out[y] = out.get(y, 0) + w
        return {y: out[y] for y in self.y_values if y in out}

    def x_marginal(self) -> dict:
        out = {}
        for (x, y), w in self.mass.items():
            out[x] = out.get(x, 0) + w
        return {x: out[x] for x in self.x_values if x in out}

    @classmethod
    def graph(cls, F: Mapping, nu: Mapping, x_values=None) -> "JointMeasure":
        """Law of ``(F(Y), Y)`` for ``Y ~ nu``: the measure of a strong solution."""
        nu = {y: as_weight(w) for y, w in nu.items()}
        missing = [y for y, w in nu.items() if w != 0 and y not in F]
        if missing:
            raise PreconditionError(f"map undefined at y-values {missing}")
        xs = tuple(x_values) if x_values is not None else tuple(dict.fromkeys(F[y] for y in nu if y in F))
        return cls(xs, tuple(nu), {(F[y], y): w for y, w in nu.items() if w != 0})

    def mixture(self, other: "JointMeasure", weight=Fraction(1, 2)) -> "JointMeasure":
        """``weight * self + (1 - weight) * other`` on the union of the grids."""
        xs = tuple(dict.fromkeys(self.x_values + other.x_values))
        ys = tuple(dict.fromkeys(self.y_values + other.y_values))
        mass = {}
        for k, w in self.mass.items():
            mass[k] = mass.get(k, 0) + weight * w
        for k, w in other.mass.items():
            mass[k] = mass.get(k, 0) + (1 - weight) * w
        return JointMeasure(xs, ys, mass)

    def to_space(self):
        """``(space, X, Y)`` with one atom per positive-mass pair."""
        pairs = [(x, y) for y in self.y_values for x in self.x_values if (x, y) in self.mass]
        space = FiniteSpace(tuple(pairs), tuple(self.mass[p] for p in pairs))
        return space, Rv(space, [p[0] for p in pairs]), Rv(space, [p[1] for p in pairs])

    def as_float(self) -> "JointMeasure":
        return JointMeasure(self.x_values, self.y_values, {k: float(w) for k, w in self.mass.items()})

    def to_json(self) -> dict:
        return {"x_values": list(self.x_values), "y_values": list(self.y_values),
                "mass": [[x, y, fmt_number(w)] for (x, y), w in self.mass.items()]}


@dataclass(frozen=True)
class Kernel:
    """``rows[y][i]`` is ``eta(y, {x_values[i]})``."""

    x_values: tuple
    rows: Mapping

    def __post_init__(self):
        for y, row in self.rows.items():
            if len(row) != len(self.x_values):
                raise StructuralError(f"row {y!r} has wrong length")
            if any(w < 0 for w in row):
                raise StructuralError(f"row {y!r} has negative mass")
            s = sum(row)
            if (s != 1) if all(isinstance(w, Fraction) for w in row) else abs(s - 1) > 1e-12:
                raise StructuralError(f"row {y!r} sums to {s}")

    def row(self, y) -> tuple:
        return self.rows[y]

    def reassemble(self, nu: Mapping) -> JointMeasure:
        """``eta(y, dx) nu(dy)``."""
        mass = {(x, y): w * nu[y] for y, row in self.rows.items() for x, w in zip(self.x_values, row)}
        return JointMeasure(self.x_values, tuple(self.rows), mass)


def disintegrate(mu: JointMeasure) -> Kernel:
    """Rows ``mass(x, y) / nu(y)`` for every ``y`` with positive marginal mass."""
    nu = mu.y_marginal()
    return Kernel(mu.x_values, {y: tuple(mu(x, y) / nu[y] for x in mu.x_values) for y in nu})


@dataclass(frozen=True)
class SamplerTable:
    """For each ``y``: consecutive ``(lo, hi, x)`` intervals of ``[0, 1]`` in grid order.

    Intervals are closed on the left and open on the right, except the last.
    """

    intervals: Mapping

    def lookup(self, y, u):
        segs = self.intervals[y]
        if not 0 <= u <= 1:
            raise ValueError("u must lie in [0, 1]")
        for lo, hi, x in segs:
            if lo <= u < hi:
                return x
        return segs[-1][2]

    def breakpoints(self, y=None) -> list:
        ys = [y] if y is not None else list(self.intervals)
        pts = {0, 1}
        for yy in ys:
            for lo, hi, _ in self.intervals[yy]:
                pts.update((lo, hi))
        return sorted(pts)

    def pushforward(self, nu: Mapping, x_values) -> JointMeasure:
        """Law of ``(G(Y, xi), Y)``, integrating ``xi`` exactly over the breakpoint cells."""
        mass = {}
        for y, wy in nu.items():
            pts = self.breakpoints(y)
            for lo, hi in zip(pts[:-1], pts[1:]):
                x = self.lookup(y, lo)
                mass[(x, y)] = mass.get((x, y), 0) + wy * (hi - lo)
        return JointMeasure(tuple(x_values), tuple(nu), mass)


def sampler_from_kernel(k: Kernel) -> SamplerTable:
    """Noise-outsourcing map ``G(y, u)``: quantile cells of each row in ``x_values`` order."""
    table = {}
    for y, row in k.rows.items():
        segs, lo = [], 0
        for x, w in zip(k.x_values, row):
            if w > 0:
                segs.append((lo, lo + w, x))
                lo = lo + w
        # pin the last edge to exactly 1 so float rows still cover [0, 1]
        segs[-1] = (segs[-1][0], 1 if isinstance(lo, Fraction) else 1.0, segs[-1][2])
        table[y] = tuple(segs)
    return SamplerTable(table)


def is_strong(k: Kernel):
    """The map ``y -> x`` when every row is a point mass, else ``None``."""
    out = {}
    for y, row in k.rows.items():
        support = [x for x, w in zip(k.x_values, row) if w > 0]
        if len(support) != 1:
            return None
        out[y] = support[0]
    return out


def mix_solutions(F1: Mapping, F2: Mapping, nu: Mapping) -> JointMeasure:
    """``1/2 graph(F1) + 1/2 graph(F2)``: ``X = F1(Y)`` or ``F2(Y)`` by an independent fair coin."""
    support = [y for y, w in nu.items() if as_weight(w) != 0]
    for name, F in (("F1", F1), ("F2", F2)):
        missing = [y for y in support if y not in F]
        if missing:
            raise PreconditionError(f"{name} undefined at {missing}")
    xs = tuple(dict.fromkeys([F1[y] for y in support] + [F2[y] for y in support]))
    return JointMeasure.graph(F1, nu, xs).mixture(JointMeasure.graph(F2, nu, xs))


@dataclass(frozen=True)
class Coupling:
    space: FiniteSpace
    X1: Rv
    X2: Rv
    Y: Rv

    def disagreement(self):
        return self.X1.ne(self.X2).expectation()

    def compressed(self) -> "Coupling":
        """Same law of ``(X1, X2, Y)`` on the atoms ``(x1, x2, y)`` with merged cell mass."""
        mass: dict = {}
        w = self.space.weights
        for i, key in enumerate(zip(self.X1.values, self.X2.values, self.Y.values)):
            mass[key] = mass.get(key, 0) + w[i]
        space = FiniteSpace(tuple(mass), tuple(mass.values()))
        atoms = space.atoms
        return Coupling(space, Rv(space, [a[0] for a in atoms]), Rv(space, [a[1] for a in atoms]),
                        Rv(space, [a[2] for a in atoms]))


def _same_marginal(mu1: JointMeasure, mu2: JointMeasure):
    if mu1.y_marginal() != mu2.y_marginal():
        raise PreconditionError("measures do not share the y-marginal")


def canonical_coupling(mu1: JointMeasure, mu2: JointMeasure) -> Coupling:
    """``X_i = G_i(Y, xi_i)`` on the product of ``Y``-atoms and two independent ``xi`` grids.

    ``[0, 1]`` is cut at every breakpoint of both sampler tables, so each ``xi``
    takes finitely many cell values and the construction is exact.
    """
    _same_marginal(mu1, mu2)
    nu = mu1.y_marginal()
    g1 = sampler_from_kernel(disintegrate(mu1))
    g2 = sampler_from_kernel(disintegrate(mu2))
    c1 = _cells(g1.breakpoints())
    c2 = _cells(g2.breakpoints())
    atoms, weights, x1, x2, yv = [], [], [], [], []
    for y, wy in nu.items():
        for i, (lo1, len1) in enumerate(c1):
            a = g1.lookup(y, lo1)
            for j, (lo2, len2) in enumerate(c2):
                atoms.append((y, i, j))
                weights.append(wy * len1 * len2)
                x1.append(a)
                x2.append(g2.lookup(y, lo2))
                yv.append(y)
    space = FiniteSpace(tuple(atoms), tuple(weights))
    return Coupling(space, Rv(space, x1), Rv(space, x2), Rv(space, yv))


def _cells(pts):
    return [(lo, hi - lo) for lo, hi in zip(pts[:-1], pts[1:]) if hi > lo]


def coupling_disagreement(mu1: JointMeasure, mu2: JointMeasure):
    """``P(X1 != X2)`` under the canonical coupling, summed cell by cell per ``y``.

    Integrates the same ``G_1(y, xi_1) != G_2(y, xi_2)`` event as
    :func:`canonical_coupling`, without materialising the product space.
    """
    _same_marginal(mu1, mu2)
    nu = mu1.y_marginal()
    k1, k2 = disintegrate(mu1), disintegrate(mu2)
    total = 0
    for y, wy in nu.items():
        same = 0
        r2 = dict(zip(k2.x_values, k2.row(y)))
        for x, w in zip(k1.x_values, k1.row(y)):
            if w:
                same += w * r2.get(x, 0)
        total += wy * (1 - same)
    return total


def is_compatible_measure(mu: JointMeasure, C: CompatStructure) -> bool:
    space, X, Y = mu.to_space()
    return check_compatibility(X, Y, C).passed


@dataclass(frozen=True)
class GYWResult:
    a_holds: bool
    b_holds: bool
    n_given: int
    n_admissible: int
    n_distinct: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def theorem_gyw_check(measures: Sequence[JointMeasure], C: CompatStructure | None = None) -> GYWResult:
    """Evaluate both sides of the strong-existence / uniqueness equivalence on a finite family.

    (a) the family is nonempty and every ordered pair's canonical coupling has
    ``P(X1 != X2) = 0``; (b) the family has exactly one law and it is strong.  With a
    structure ``C``, laws that are not ``C``-compatible are removed first.  Raises
    :class:`VerificationFailure` when (a) and (b) disagree.
    """
    given = list(measures)
    admissible = [m for m in given if C is None or is_compatible_measure(m, C)]
    distinct = list(dict.fromkeys(admissible))
    if not distinct:
        return GYWResult(False, False, len(given), 0, 0)
    nu = distinct[0].y_marginal()
    for m in distinct[1:]:
        if m.y_marginal() != nu:
            raise PreconditionError("all measures must share the y-marginal")
    tol = 0 if all(m.exact for m in distinct) else 1e-9
    b = len(distinct) == 1 and is_strong(disintegrate(distinct[0])) is not None
    a = all(coupling_disagreement(m1, m2) <= tol for m1 in distinct for m2 in distinct)
    if a != b:
        raise VerificationFailure(f"pointwise-uniqueness side {a} != strong-uniqueness side {b}")
    return GYWResult(a, b, len(given), len(admissible), len(distinct))
