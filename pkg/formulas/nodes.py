"""
Formula syntax tree.

Nodes are immutable and compare structurally, so they can be used directly
as memo keys. Only the five core constructors survive `desugar`.
"""
from dataclasses import dataclass, fields


class Formula:
    __slots__ = ()

    def _values(self):
        return tuple(getattr(self, field.name) for field in fields(self))

    def __eq__(self, other):
        if self is other:
            return True
        return type(self) is type(other) and self._values() == other._values()

    def __hash__(self):
        cached = self.__dict__.get('_hash')
        if cached is None:
            cached = hash((type(self).__name__,) + self._values())
            object.__setattr__(self, '_hash', cached)
        return cached

    def __str__(self):
        from formulas.utils import render
        return render(self)

    def children(self):
        return tuple(value for value in self._values() if isinstance(value, Formula))

    @property
    def is_core(self):
        return isinstance(self, CORE_TYPES)


@dataclass(frozen=True, eq=False)
class Atomic(Formula):
    name: str


@dataclass(frozen=True, eq=False)
class Bottom(Formula):
    pass


@dataclass(frozen=True, eq=False)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True, eq=False)
class Knows(Formula):
    agent: str
    body: Formula


@dataclass(frozen=True, eq=False)
class Announce(Formula):
    announced: Formula
    body: Formula


@dataclass(frozen=True, eq=False)
class Not(Formula):
    body: Formula


@dataclass(frozen=True, eq=False)
class And(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True, eq=False)
class Or(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True, eq=False)
class Iff(Formula):
    lhs: Formula
    rhs: Formula


CORE_TYPES = (Atomic, Bottom, Implies, Knows, Announce)

BOTTOM = Bottom()
TOP = Implies(BOTTOM, BOTTOM)


def atoms_of(formula):
    """Names of the atoms occurring anywhere in the formula"""
    if isinstance(formula, Atomic):
        return {formula.name}
    found = set()
    for child in formula.children():
        found |= atoms_of(child)
    return found


def agents_of(formula):
    found = {formula.agent} if isinstance(formula, Knows) else set()
    for child in formula.children():
        found |= agents_of(child)
    return found


def subformulas(formula):
    yield formula
    for child in formula.children():
        yield from subformulas(child)


def has_announcement(formula):
    return any(isinstance(node, Announce) for node in subformulas(formula))
