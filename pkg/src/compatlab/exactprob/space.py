"""Finite probability spaces, random variables on them and sigma-algebras as partitions.

Weights are ``Fraction`` (exact mode) or ``float`` (float mode).  Zero-mass atoms
are never stored: builders drop them, so almost-sure statements become
statements about every stored atom.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Callable, Hashable, Sequence

FLOAT_TOL = 1e-9


class StructuralError(ValueError):
    """Objects living on different spaces, empty blocks, malformed partitions."""


class PreconditionError(ValueError):
    pass


class VerificationFailure(AssertionError):
    """An identity that must hold on every instance did not."""


def as_weight(w):
    """Parse ``"p/q"`` strings and ints as ``Fraction``; leave floats alone."""
    if isinstance(w, Fraction):
        return w
    if isinstance(w, str):
        return Fraction(w)
    if isinstance(w, int):
        return Fraction(w)
    return float(w)


def fmt_number(v):
    """Render exact rationals as ``"p/q"`` (integers stay ints) for JSON reports."""
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, tuple):
        return [fmt_number(x) for x in v]
    return v


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    atoms: tuple
    weights: tuple

    def __post_init__(self):
        atoms = tuple(self.atoms)
        weights = tuple(as_weight(w) for w in self.weights)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        if len(atoms) != len(weights):
            raise StructuralError("one weight per atom required")
        if not atoms:
            raise StructuralError("empty sample space")
        if len(set(atoms)) != len(atoms):
            raise StructuralError("atoms must be distinct")
        if any(w <= 0 for w in weights):
            raise StructuralError("weights must be positive; prune zero-mass atoms first")
        total = sum(weights)
        if self.exact:
            if total != 1:
                raise StructuralError(f"weights sum to {total}, not 1")
        elif abs(total - 1.0) > 1e-12:
            raise StructuralError(f"weights sum to {total!r}, not 1")

    @classmethod
    def from_weights(cls, atoms: Sequence, weights: Sequence):
        """Build after dropping zero-weight atoms; returns ``(space, kept_indices)``."""
        ws = [as_weight(w) for w in weights]
        keep = [i for i, w in enumerate(ws) if w != 0]
        return cls(tuple(atoms[i] for i in keep), tuple(ws[i] for i in keep)), keep

    @classmethod
    def uniform(cls, atoms: Sequence) -> "FiniteSpace":
        atoms = tuple(atoms)
        return cls(atoms, (Fraction(1, len(atoms)),) * len(atoms))

    @property
    def exact(self) -> bool:
        return all(isinstance(w, Fraction) for w in self.weights)

    @property
    def tolerance(self):
        return 0 if self.exact else FLOAT_TOL

    def __len__(self) -> int:
        return len(self.atoms)

    def rv(self, fn: Callable[[Hashable], object]) -> "Rv":
        """Random variable ``omega -> fn(atom)``."""
        return Rv(self, tuple(fn(a) for a in self.atoms))

    def as_float(self) -> "FiniteSpace":
        return FiniteSpace(self.atoms, tuple(float(w) for w in self.weights))

    def trivial(self) -> "Partition":
        return Partition(self, (tuple(range(len(self))),))

    def discrete(self) -> "Partition":
        return Partition(self, tuple((i,) for i in range(len(self))))


class Rv:
    """Per-atom values on a :class:`FiniteSpace`; scalars support elementwise arithmetic."""

    __slots__ = ("space", "values")

    def __init__(self, space: FiniteSpace, values: Sequence):
        values = tuple(values)
        if len(values) != len(space):
            raise StructuralError(f"{len(values)} values for {len(space)} atoms")
        self.space = space
        self.values = values

    def __repr__(self):
        return f"Rv({list(self.values)!r})"

    def __len__(self):
        return len(self.values)

    @property
    def arity(self) -> int:
        v = self.values[0]
        return len(v) if isinstance(v, tuple) else 1

    def map(self, fn: Callable) -> "Rv":
        return Rv(self.space, tuple(fn(v) for v in self.values))

    def coord(self, i: int) -> "Rv":
        return self.map(lambda v: v[i])

    def _binary(self, other, op):
        if isinstance(other, Rv):
            _same_space(self, other)
            return Rv(self.space, tuple(op(a, b) for a, b in zip(self.values, other.values)))
        return Rv(self.space, tuple(op(a, other) for a in self.values))

    def __add__(self, o):
        return self._binary(o, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, o):
        return self._binary(o, lambda a, b: a - b)

    def __rsub__(self, o):
        return self._binary(o, lambda a, b: b - a)

    def __mul__(self, o):
        return self._binary(o, lambda a, b: a * b)

    __rmul__ = __mul__

    def __neg__(self):
        return self.map(lambda a: -a)

    def eq(self, o) -> "Rv":
        """Indicator ``1{self == o}`` as 0/1 integers."""
        return self._binary(o, lambda a, b: int(a == b))

    def ne(self, o) -> "Rv":
        return self._binary(o, lambda a, b: int(a != b))

    def expectation(self):
        return sum(w * v for w, v in zip(self.space.weights, self.values))

    def max_abs_diff(self, other: "Rv"):
        _same_space(self, other)
        return max(abs(a - b) for a, b in zip(self.values, other.values))


@dataclass(frozen=True, eq=False)
class Partition:
    """Disjoint blocks of atom indices covering the space, in canonical order."""

    space: FiniteSpace
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[0] if b else -1))
        object.__setattr__(self, "blocks", blocks)
        seen = [b for blk in blocks for b in blk]
        if any(len(b) == 0 for b in blocks):
            raise StructuralError("empty block")
        if sorted(seen) != list(range(len(self.space))):
            raise StructuralError("blocks must be disjoint and cover every atom")
        label = [0] * len(self.space)
        for j, blk in enumerate(blocks):
            for i in blk:
                label[i] = j
        object.__setattr__(self, "_label", tuple(label))

    @property
    def labels(self) -> tuple:
        return self._label

    def __len__(self):
        return len(self.blocks)

    def __eq__(self, other):
        return isinstance(other, Partition) and self.space is other.space and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def refines(self, other: "Partition") -> bool:
        """True when every block of ``self`` sits inside a block of ``other`` (self is finer)."""
        _same_space(self, other)
        return all(len({other.labels[i] for i in blk}) == 1 for blk in self.blocks)

    def coarser_than(self, other: "Partition") -> bool:
        return other.refines(self)

    def measurable(self, rv: Rv, tol=0) -> bool:
        """Is ``rv`` constant on every block (up to ``tol`` for reals)?"""
        _same_space(self, rv)
        for blk in self.blocks:
            v0 = rv.values[blk[0]]
            for i in blk[1:]:
                v = rv.values[i]
                if tol and isinstance(v, Number):
                    if abs(v - v0) > tol:
                        return False
                elif v != v0:
                    return False
        return True


def _same_space(a, b):
    if a.space is not b.space:
        raise StructuralError("objects live on different sample spaces")


def sigma_of(rvs: Sequence[Rv]) -> Partition:
    """Coarsest partition making every ``rv`` measurable: level sets of the tuple map."""
    rvs = list(rvs)
    if not rvs:
        raise PreconditionError("sigma_of needs at least one random variable")
    space = rvs[0].space
    for r in rvs[1:]:
        _same_space(rvs[0], r)
    groups: dict = {}
    for i in range(len(space)):
        groups.setdefault(tuple(r.values[i] for r in rvs), []).append(i)
    return Partition(space, tuple(groups.values()))


def join(p: Partition, q: Partition) -> Partition:
    """Common refinement ``p v q``."""
    _same_space(p, q)
    groups: dict = {}
    for i in range(len(p.space)):
        groups.setdefault((p.labels[i], q.labels[i]), []).append(i)
    return Partition(p.space, tuple(groups.values()))


def join_all(parts: Sequence[Partition]) -> Partition:
    out = parts[0]
    for p in parts[1:]:
        out = join(out, p)
    return out


def cond_exp(h: Rv, p: Partition) -> Rv:
    """``E[h | p]``: the weight-averaged value of ``h`` on each block."""
    _same_space(h, p)
    w = p.space.weights
    out = [None] * len(h)
    for blk in p.blocks:
        mass = sum(w[i] for i in blk)
        if mass == 0:
            raise StructuralError("zero-mass block")
        val = sum(w[i] * h.values[i] for i in blk) / mass
        for i in blk:
            out[i] = val
    return Rv(h.space, out)


def indicator_set(values) -> list:
    """Indicators of each distinct value: a spanning set for functions of a finite-range variable."""
    distinct = list(dict.fromkeys(values))
    return [(repr(v), (lambda y, v=v: int(y == v))) for v in distinct]
