"""Compatibility structures and the exact checks built on conditional expectations."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping, Sequence

from .space import (Partition, PreconditionError, Rv, StructuralError, _same_space, cond_exp,
                    fmt_number, indicator_set, join, join_all, sigma_of)

Rule = Callable[[Hashable, Rv], Partition]


@dataclass(frozen=True)
class CompatStructure:
    """Indexed pairs of partition rules ``alpha -> (F_alpha^X rule, F_alpha^Y rule)``.

    ``h_set`` (pairs ``(label, fn)`` acting on values of ``Y``) restricts the checks to
    partial compatibility; ``None`` means all indicators of ``Y``'s values.  ``order``
    lists the pairs ``(a1, a2)`` with ``a1`` preceding ``a2``.
    """

    alphas: tuple
    x_rule: Rule
    y_rule: Rule
    h_set: tuple | None = None
    order: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(self.alphas))
        if self.h_set is not None:
            object.__setattr__(self, "h_set", tuple(self.h_set))
        if self.order is not None:
            object.__setattr__(self, "order", tuple(tuple(p) for p in self.order))

    @classmethod
    def from_maps(cls, alphas, x_map, y_map, h_set=None, order=None) -> "CompatStructure":
        """Rules generated by value maps: ``F_alpha^X = sigma(x_map(alpha, X))``."""
        return cls(alphas,
                   lambda a, X: sigma_of([X.map(lambda v: x_map(a, v))]),
                   lambda a, Y: sigma_of([Y.map(lambda v: y_map(a, v))]),
                   h_set, order)

    @classmethod
    def coordinates(cls, x_coords: Mapping, y_coords: Mapping, h_set=None, order=None):
        """Partitions generated by coordinate subsets of tuple-valued ``X`` and ``Y``."""
        alphas = tuple(x_coords)
        if set(alphas) != set(y_coords):
            raise PreconditionError("x and y coordinate maps need the same alphas")
        xs = {a: tuple(x_coords[a]) for a in alphas}
        ys = {a: tuple(y_coords[a]) for a in alphas}
        return cls.from_maps(alphas, lambda a, v: tuple(v[i] for i in xs[a]),
                             lambda a, v: tuple(v[i] for i in ys[a]), h_set, order)

    @classmethod
    def prefix(cls, k: int, h_set=None, with_order: bool = True) -> "CompatStructure":
        """``alpha = 1..k``: both sides see their first ``alpha`` coordinates (a filtration)."""
        alphas = tuple(range(1, k + 1))
        order = tuple((a, b) for a in alphas for b in alphas if a < b) if with_order else None
        return cls.from_maps(alphas, lambda a, v: v[:a], lambda a, v: v[:a], h_set, order)

    def x_partition(self, alpha, X: Rv) -> Partition:
        return self.x_rule(alpha, X)

    def y_partition(self, alpha, Y: Rv) -> Partition:
        return self.y_rule(alpha, Y)

    def partial(self, h_set) -> "CompatStructure":
        return CompatStructure(self.alphas, self.x_rule, self.y_rule, tuple(h_set), self.order)

    def pairs(self):
        if self.order is not None:
            return self.order
        try:
            srt = sorted(self.alphas)
        except TypeError as exc:
            raise PreconditionError("no order declared and alphas are not sortable") from exc
        return tuple((a, b) for i, a in enumerate(srt) for b in srt[i + 1:])


@dataclass
class CheckReport:
    kind: str
    passed: bool
    deviations: dict = field(default_factory=dict)   # alpha -> max deviation
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "passed": self.passed,
            "deviations": {str(a): fmt_number(v) for a, v in self.deviations.items()},
            "details": {str(k): fmt_number(v) if not isinstance(v, (dict, list)) else v
                        for k, v in self.details.items()},
        }


def _h_functions(Y: Rv, C: CompatStructure):
    return list(C.h_set) if C.h_set is not None else indicator_set(Y.values)


def _tol(rv: Rv):
    return rv.space.tolerance


def _identity_deviation(Y: Rv, fine: Partition, coarse: Partition, hs) -> tuple:
    worst, worst_h = 0, None
    for label, h in hs:
        hv = Y.map(h)
        dev = cond_exp(hv, fine).max_abs_diff(cond_exp(hv, coarse))
        if worst_h is None or dev > worst:
            worst, worst_h = dev, label
    return worst, worst_h


def _require_alphas(C: CompatStructure):
    if not C.alphas:
        raise PreconditionError("compatibility structure has no alphas")


def check_compatibility(X: Rv, Y: Rv, C: CompatStructure) -> CheckReport:
    """``E[h(Y) | F_a^X v F_a^Y] = E[h(Y) | F_a^Y]`` for every alpha and every ``h``."""
    _require_alphas(C)
    _same_space(X, Y)
    hs = _h_functions(Y, C)
    devs, worst_h = {}, {}
    for a in C.alphas:
        py = C.y_partition(a, Y)
        devs[a], worst_h[a] = _identity_deviation(Y, join(C.x_partition(a, X), py), py, hs)
    tol = _tol(Y)
    return CheckReport("partial_compatibility" if C.h_set is not None else "compatibility",
                       all(d <= tol for d in devs.values()), devs,
                       {"n_h": len(hs), "worst_h": {str(a): worst_h[a] for a in C.alphas}})


def check_joint_compatibility(X1: Rv, X2: Rv, Y: Rv, C: CompatStructure) -> CheckReport:
    """Same identity with conditioning on ``F_a^{X1} v F_a^{X2} v F_a^Y``."""
    _require_alphas(C)
    _same_space(X1, Y)
    _same_space(X2, Y)
    hs = _h_functions(Y, C)
    devs = {}
    for a in C.alphas:
        py = C.y_partition(a, Y)
        fine = join_all([C.x_partition(a, X1), C.x_partition(a, X2), py])
        devs[a], _ = _identity_deviation(Y, fine, py, hs)
    tol = _tol(Y)
    kind = "joint_partial_compatibility" if C.h_set is not None else "joint_compatibility"
    return CheckReport(kind, all(d <= tol for d in devs.values()), devs, {"n_h": len(hs)})


def check_dual(X: Rv, Y: Rv, C: CompatStructure) -> CheckReport:
    """``E[g(X) | sigma(Y)] = E[g(X) | F_a^Y]`` for ``g`` spanning ``F_a^X``-measurable functions.

    Characterises full compatibility, so a partial ``h_set`` is rejected.
    """
    _require_alphas(C)
    _same_space(X, Y)
    if C.h_set is not None:
        raise PreconditionError("the dual form characterises full compatibility only")
    full_y = sigma_of([Y])
    devs = {}
    for a in C.alphas:
        px, py = C.x_partition(a, X), C.y_partition(a, Y)
        worst = 0
        for blk in px.blocks:
            members = set(blk)
            g = Rv(X.space, tuple(int(i in members) for i in range(len(X))))
            worst = max(worst, cond_exp(g, full_y).max_abs_diff(cond_exp(g, py)))
        devs[a] = worst
    tol = _tol(Y)
    return CheckReport("dual", all(d <= tol for d in devs.values()), devs)


def check_adapted(X: Rv, Y: Rv, C: CompatStructure) -> dict:
    """Per alpha: is ``F_a^X`` contained in ``F_a^Y`` (every Y-block inside one X-block)?"""
    _same_space(X, Y)
    return {a: C.y_partition(a, Y).refines(C.x_partition(a, X)) for a in C.alphas}


def is_function_of(X: Rv, Y: Rv) -> bool:
    """``sigma(X) subset sigma(Y)``: on a pruned finite space, ``X = F(Y)`` everywhere."""
    return sigma_of([Y]).refines(sigma_of([X]))


def _check_filtration(C: CompatStructure, rv: Rv, rule, side: str):
    for a1, a2 in C.pairs():
        if not rule(a2, rv).refines(rule(a1, rv)):
            raise PreconditionError(f"{side}-side partitions are not increasing from {a1!r} to {a2!r}")


def check_martingale_condition(M: Mapping, X: Rv, Y: Rv, C: CompatStructure) -> CheckReport:
    """``E[M(a2) | F_{a1}^X v F_{a1}^Y] = M(a1)`` for each declared ``a1 < a2``.

    ``M[a]`` must be ``F_a^Y``-measurable and both partition families filtrations.
    """
    _require_alphas(C)
    _same_space(X, Y)
    _check_filtration(C, Y, C.y_partition, "Y")
    _check_filtration(C, X, C.x_partition, "X")
    for a in C.alphas:
        if a not in M:
            raise PreconditionError(f"martingale has no value at alpha={a!r}")
        if not C.y_partition(a, Y).measurable(M[a]):
            raise PreconditionError(f"M({a!r}) is not F_alpha^Y-measurable")
    devs = {}
    for a1, a2 in C.pairs():
        fine = join(C.x_partition(a1, X), C.y_partition(a1, Y))
        devs[(a1, a2)] = cond_exp(M[a2], fine).max_abs_diff(M[a1])
    tol = _tol(Y)
    return CheckReport("martingale_condition", all(d <= tol for d in devs.values()), devs)


def martingale_from_terminal(Z: Rv, Y: Rv, C: CompatStructure) -> dict:
    """``M(a) = E[Z | F_a^Y]``, an ``F^Y``-martingale whenever the Y-side is a filtration."""
    return {a: cond_exp(Z, C.y_partition(a, Y)) for a in C.alphas}


def check_filtrations(X: Rv, Y: Rv, C: CompatStructure) -> bool:
    try:
        _check_filtration(C, Y, C.y_partition, "Y")
        _check_filtration(C, X, C.x_partition, "X")
    except PreconditionError:
        return False
    return True


__all__ = [
    "CheckReport", "CompatStructure", "StructuralError", "check_adapted", "check_compatibility",
    "check_dual", "check_filtrations", "check_joint_compatibility", "check_martingale_condition",
    "is_function_of", "martingale_from_terminal",
]
