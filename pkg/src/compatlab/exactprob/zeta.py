"""The four-sign counterexample: partial compatibility that does not survive coupling."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .compat import CheckReport, CompatStructure, check_compatibility, check_joint_compatibility
from .space import FiniteSpace, Rv, cond_exp, fmt_number, join_all, sigma_of

ALPHA = "alpha"


@dataclass
class ZetaScenario:
    space: FiniteSpace
    Y: Rv
    X: Rv
    X1: Rv
    X2: Rv
    structure: CompatStructure


def build_zeta_scenario() -> ZetaScenario:
    """64 equally likely atoms ``(z1, z2, z3, z4, b1, b2)``.

    ``z_i`` are fair signs; ``Y = (z1 z2, z2 z3, z3 z4, z4 z1)``.  The selector
    ``G(Y, xi) = Y2`` if ``xi < 1/2`` else ``Y3`` only depends on which half of
    ``[0, 1]`` ``xi`` falls in, so each uniform reduces to the fair bit ``b_i``.
    """
    atoms = [z + (b1, b2) for z in itertools.product((1, -1), repeat=4) for b1 in (0, 1) for b2 in (0, 1)]
    space = FiniteSpace.uniform(atoms)
    Y = space.rv(lambda a: (a[0] * a[1], a[1] * a[2], a[2] * a[3], a[3] * a[0]))

    def G(y, bit):
        return y[1] if bit == 0 else y[2]

    X1 = space.rv(lambda a: G(Y.values[atoms.index(a)], a[4]))
    X2 = space.rv(lambda a: G(Y.values[atoms.index(a)], a[5]))
    h0 = ("Y4", lambda y: y[3])
    C = CompatStructure.from_maps((ALPHA,), x_map=lambda a, x: x, y_map=lambda a, y: y[0], h_set=(h0,))
    return ZetaScenario(space, Y, X1, X1, X2, C)


def closed_form(sc: ZetaScenario) -> Rv:
    """``1{X1 != X2} Y1 X1 X2 + (1/3) 1{X1 = X2} Y1``."""
    Y1 = sc.Y.coord(0)
    return sc.X1.ne(sc.X2) * Y1 * sc.X1 * sc.X2 + Fraction(1, 3) * sc.X1.eq(sc.X2) * Y1


@dataclass
class ZetaReport:
    single_cond_exp_joint: Rv
    single_cond_exp_y: Rv
    partial_single: CheckReport
    partial_joint: CheckReport
    enumerated: Rv
    closed: Rv
    mismatched_atoms: int

    @property
    def passed(self) -> bool:
        zero = all(v == 0 for v in self.single_cond_exp_joint.values + self.single_cond_exp_y.values)
        return (zero and self.partial_single.passed and not self.partial_joint.passed
                and self.mismatched_atoms == 0)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "single_X_conditional_expectation_is_zero": all(
                v == 0 for v in self.single_cond_exp_joint.values + self.single_cond_exp_y.values),
            "partial_compatibility_single": self.partial_single.to_json(),
            "partial_compatibility_joint": self.partial_joint.to_json(),
            "closed_form_mismatched_atoms": self.mismatched_atoms,
            "joint_conditional_expectation_values": sorted({fmt_number(v) for v in self.enumerated.values},
                                                           key=lambda s: Fraction(s)),
        }


def zeta_counterexample() -> ZetaReport:
    sc = build_zeta_scenario()
    C = sc.structure
    h0 = sc.Y.coord(3)
    py = C.y_partition(ALPHA, sc.Y)
    ce_joint = cond_exp(h0, join_all([py, C.x_partition(ALPHA, sc.X)]))
    ce_y = cond_exp(h0, py)
    single = check_compatibility(sc.X, sc.Y, C)
    joint = check_joint_compatibility(sc.X1, sc.X2, sc.Y, C)
    enumerated = cond_exp(h0, join_all([py, sigma_of([sc.X1]), sigma_of([sc.X2])]))
    closed = closed_form(sc)
    mismatched = sum(a != b for a, b in zip(enumerated.values, closed.values))
    return ZetaReport(ce_joint, ce_y, single, joint, enumerated, closed, mismatched)
