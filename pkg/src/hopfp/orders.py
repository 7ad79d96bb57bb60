"""Formulas that pin down canonical values over the built-in order.

A system whose states carry a strict total order under the reserved
action "<" supports definable arithmetic: width-c tuples of states are
compared lexicographically, and sets are compared as binary numbers
whose most significant digit is the largest member.  Iterating the
powerset climbs a tower of domains, and at every level the order, the
successor relation and "this is the j-th value" stay expressible with
formulas whose size does not depend on the domain, only on the level,
the width and j.

A level-1 value occupies width many ground variables; from level 2 on a
value is a single set-typed variable.  Builders therefore work with
slots, tuples of variable names, and draw bound names from a NameSupply
so that nested builds never capture each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .logic import (
    GROUND,
    Act,
    Apply,
    Compound,
    Formula,
    Not,
    Or,
    SetOf,
    Type,
    and_,
    conj,
    disj,
    exists_all,
    forall,
    forall_all,
    implies,
)
from .lts import ORDER_ACTION

Slot = tuple[str, ...]


@dataclass(frozen=True)
class TowerSpec:
    """One level of the tower of domains over width-many ground parts.

    Level 1 holds the ground tuples themselves, each further level the
    powerset of the one below.
    """

    width: int
    level: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.level < 1:
            raise ValueError("width and level must be at least 1")

    @property
    def value_type(self) -> Type:
        t: Type = GROUND if self.width == 1 else Compound((GROUND,) * self.width)
        for _ in range(self.level - 1):
            t = SetOf(t)
        return t

    @property
    def slot_types(self) -> tuple[Type, ...]:
        if self.level == 1:
            return (GROUND,) * self.width
        return (self.value_type,)

    @property
    def slot_arity(self) -> int:
        return len(self.slot_types)

    def down(self) -> "TowerSpec":
        if self.level == 1:
            raise ValueError("level 1 has no lower level")
        return TowerSpec(self.width, self.level - 1)


class NameSupply:
    """Hands out variable names that avoid a reserved set and each other."""

    def __init__(self, taken: Iterable[str] = ()) -> None:
        self._taken = set(taken)
        self._next: dict[str, int] = {}

    def fresh(self, base: str = "z") -> str:
        i = self._next.get(base, 0)
        while True:
            name = "%s%d" % (base, i)
            i += 1
            if name not in self._taken:
                break
        self._next[base] = i
        self._taken.add(name)
        return name

    def slot(self, spec: TowerSpec, base: str = "z") -> Slot:
        return tuple(self.fresh(base) for _ in range(spec.slot_arity))


def quantify_exists(spec: TowerSpec, names: Slot, body: Formula) -> Formula:
    return exists_all(zip(names, spec.slot_types), body)


def quantify_forall(spec: TowerSpec, names: Slot, body: Formula) -> Formula:
    return forall_all(zip(names, spec.slot_types), body)


def build_lt(spec: TowerSpec, a: Slot, b: Slot, supply: NameSupply) -> Formula:
    """a comes strictly before b in the canonical order of the level."""
    if spec.level == 1:
        disjuncts = []
        for i in range(spec.width):
            parts: list[Formula] = [Act(ORDER_ACTION, a[i], b[i])]
            parts += [Not(Act(ORDER_ACTION, b[j], a[j])) for j in range(i)]
            disjuncts.append(conj(parts))
        return disj(disjuncts)
    down = spec.down()
    z = supply.slot(down, "z")
    w = supply.slot(down, "w")
    x, y = a[0], b[0]
    above = quantify_forall(
        down,
        w,
        implies(
            build_lt(down, z, w, supply),
            implies(Apply(x, w), Apply(y, w)),
        ),
    )
    witness = conj([Apply(y, z), Not(Apply(x, z)), above])
    return quantify_exists(down, z, witness)


def build_eq(spec: TowerSpec, a: Slot, b: Slot, supply: NameSupply) -> Formula:
    return and_(Not(build_lt(spec, a, b, supply)), Not(build_lt(spec, b, a, supply)))


def build_succ(spec: TowerSpec, a: Slot, b: Slot, supply: NameSupply) -> Formula:
    """b is the immediate successor of a: a < b with nothing in between."""
    z = supply.slot(spec, "z")
    gap_free = quantify_forall(
        spec,
        z,
        implies(
            build_lt(spec, z, b, supply),
            Or(build_eq(spec, z, a, supply), build_lt(spec, z, a, supply)),
        ),
    )
    return and_(build_lt(spec, a, b, supply), gap_free)


def build_index(spec: TowerSpec, j: int, names: Slot, supply: NameSupply) -> Formula:
    """The slot holds the j-th value of the level in canonical order.

    Size grows linearly with j: the zero case says nothing is smaller,
    and each step asserts a successor of a fresh witness for j - 1.
    """
    if j < 0:
        raise ValueError("index must not be negative")
    if j == 0:
        y = supply.slot(spec, "y")
        body = Or(build_lt(spec, names, y, supply), build_eq(spec, names, y, supply))
        return quantify_forall(spec, y, body)
    y = supply.slot(spec, "y")
    below = build_index(spec, j - 1, y, supply)
    return quantify_exists(spec, y, and_(below, build_succ(spec, y, names, supply)))


def build_total_order_axiom(supply: Optional[NameSupply] = None) -> Formula:
    """The reserved order action is a strict total order on states.

    Irreflexivity and transitivity are first order.  Totality needs a
    twist: without built-in equality, "x equals y" is expressed as x and
    y belonging to the same ground sets, which costs one second-order
    universal.
    """
    s = supply or NameSupply()
    x, y, z, cls = s.fresh("x"), s.fresh("y"), s.fresh("z"), s.fresh("S")
    lt = lambda u, v: Act(ORDER_ACTION, u, v)
    irreflexive = forall(x, GROUND, Not(lt(x, x)))
    transitive = forall_all(
        [(x, GROUND), (y, GROUND), (z, GROUND)],
        implies(and_(lt(x, y), lt(y, z)), lt(x, z)),
    )
    same = forall(cls, SetOf(GROUND), implies(Apply(cls, (x,)), Apply(cls, (y,))))
    connected = forall_all(
        [(x, GROUND), (y, GROUND)],
        disj([lt(x, y), lt(y, x), same]),
    )
    return conj([irreflexive, transitive, connected])
