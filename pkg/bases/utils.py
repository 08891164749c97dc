"""
Finite rule universes and the lattice of bases over them.

A base is an int bit-set over the universe's optional rule groups; the
fixed rules are part of every base. Atom sets are int bit-sets over the
universe's atoms.
"""
import logging
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from bespal.conf import engine_setting
from bespal.exceptions import UniverseError

logger = logging.getLogger(__name__)

NAME_PATTERN = re.compile(r'^[A-Za-z0-9_]+$')


@dataclass(frozen=True)
class BaseRule:
    premises: frozenset
    conclusion: str

    def __post_init__(self):
        object.__setattr__(self, 'premises', frozenset(self.premises))

    def __str__(self):
        return f"{','.join(sorted(self.premises))} => {self.conclusion}".lstrip()

    @classmethod
    def from_text(cls, text):
        """Parse `p1,...,pn => p`; `=> p` is an axiom"""
        if '=>' not in text:
            raise UniverseError(f"rule {text!r} has no '=>'")
        left, right = text.split('=>', 1)
        premises = [atom.strip() for atom in left.split(',') if atom.strip()]
        return cls(frozenset(premises), right.strip())


def axiom(atom):
    return BaseRule(frozenset(), atom)


@dataclass(frozen=True)
class RuleGroup:
    name: str
    rules: tuple

    def __post_init__(self):
        object.__setattr__(self, 'rules', tuple(self.rules))


def _popcount(value):
    return bin(value).count('1')


def iter_submasks(mask):
    """Yield every submask of mask in increasing order"""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        sub = (sub - mask) & mask


class Universe:
    """Atoms, agents, fixed rules and the optional rule groups spanning the base lattice."""

    def __init__(self, atoms, agents=(), fixed_rules=(), optional_groups=(), name=''):
        self.name = name
        self.atoms = tuple(atoms)
        self.agents = tuple(agents)
        self.fixed_rules = tuple(fixed_rules)
        self.groups = tuple(optional_groups)
        self._validate()

        self.atom_index = {atom: index for index, atom in enumerate(self.atoms)}
        self.agent_index = {agent: index for index, agent in enumerate(self.agents)}
        self.group_index = {group.name: index for index, group in enumerate(self.groups)}
        self.width = len(self.groups)
        self.size = 1 << self.width
        self.top = self.size - 1
        self.all_atoms = (1 << len(self.atoms)) - 1

        self._premises = []
        self._conclusions = []
        self._watchers = [[] for _ in self.atoms]
        self._fixed_ids = [self._compile(rule) for rule in self.fixed_rules]
        self._group_ids = [[self._compile(rule) for rule in group.rules] for group in self.groups]
        self._closures = {}

    def __repr__(self):
        return f"<Universe {self.name or '?'}: {len(self.atoms)} atoms, {self.width} groups>"

    def _validate(self):
        limit = engine_setting('MAX_OPTIONAL_GROUPS')
        if len(self.groups) > limit:
            raise UniverseError(f"{len(self.groups)} optional groups exceed the limit of {limit}")
        for kind, names in (('atom', self.atoms), ('agent', self.agents),
                            ('group', [group.name for group in self.groups])):
            for value in names:
                if not isinstance(value, str) or not NAME_PATTERN.match(value):
                    raise UniverseError(f"invalid {kind} name {value!r}")
            if len(set(names)) != len(names):
                raise UniverseError(f"duplicate {kind} names")
        declared = set(self.atoms)
        rules = list(self.fixed_rules)
        for group in self.groups:
            if not group.rules:
                raise UniverseError(f"group {group.name!r} has no rules")
            rules.extend(group.rules)
        for rule in rules:
            unknown = (set(rule.premises) | {rule.conclusion}) - declared
            if unknown:
                raise UniverseError(f"rule {rule} mentions undeclared atoms {sorted(unknown)}")

    def _compile(self, rule):
        rule_id = len(self._conclusions)
        premises = tuple(sorted(self.atom_index[atom] for atom in rule.premises))
        self._premises.append(premises)
        self._conclusions.append(self.atom_index[rule.conclusion])
        for atom in premises:
            self._watchers[atom].append(rule_id)
        return rule_id

    # closure

    def closure_mask(self, base):
        """Atoms derivable from nothing under the base's rules, as an atom bit-set"""
        cached = self._closures.get(base)
        if cached is None:
            cached = self._forward_chain(base)
            self._closures[base] = cached
        return cached

    def _active_rules(self, base):
        active = list(self._fixed_ids)
        for index in range(self.width):
            if base >> index & 1:
                active.extend(self._group_ids[index])
        return active

    def _forward_chain(self, base):
        active = self._active_rules(base)
        is_active = set(active)
        remaining = {}
        agenda = []
        for rule_id in active:
            if self._premises[rule_id]:
                remaining[rule_id] = len(self._premises[rule_id])
            else:
                agenda.append(self._conclusions[rule_id])
        derived = 0
        while agenda:
            atom = agenda.pop()
            if derived >> atom & 1:
                continue
            derived |= 1 << atom
            for rule_id in self._watchers[atom]:
                if rule_id in is_active:
                    remaining[rule_id] -= 1
                    if remaining[rule_id] == 0:
                        agenda.append(self._conclusions[rule_id])
        return derived

    def atom_names(self, mask):
        return frozenset(atom for index, atom in enumerate(self.atoms) if mask >> index & 1)

    def atom_mask(self, names):
        mask = 0
        for name in names:
            try:
                mask |= 1 << self.atom_index[name]
            except KeyError:
                raise UniverseError(f"unknown atom {name!r}") from None
        return mask

    # consistency

    def is_consistent(self, base):
        return self.closure_mask(base) != self.all_atoms

    def is_max_consistent(self, base):
        if not self.is_consistent(base):
            return False
        return all(not self.is_consistent(base | 1 << index)
                   for index in range(self.width) if not base >> index & 1)

    @cached_property
    def consistency(self):
        """Boolean vector indexed by base: True where the base is consistent"""
        return np.array([self.is_consistent(base) for base in range(self.size)], dtype=bool)

    @cached_property
    def consistent_bases(self):
        return tuple(int(base) for base in np.flatnonzero(self.consistency))

    @cached_property
    def inconsistent_bases(self):
        return tuple(int(base) for base in np.flatnonzero(~self.consistency))

    # lattice

    def check_base(self, base):
        if not isinstance(base, (int, np.integer)) or base < 0 or base > self.top:
            raise UniverseError(f"{base!r} is not a base of {self!r}")
        return int(base)

    def supersets(self, base, consistent_only=False):
        free = self.top ^ base
        for extra in iter_submasks(free):
            candidate = base | extra
            if not consistent_only or self.is_consistent(candidate):
                yield candidate

    def subsets(self, base, consistent_only=False):
        for candidate in iter_submasks(base):
            if not consistent_only or self.is_consistent(candidate):
                yield candidate

    @cached_property
    def superset_matrix(self):
        """contains[E, C] is True when base E contains base C"""
        ids = np.arange(self.size)
        return (ids[:, None] & ids[None, :]) == ids[None, :]

    @cached_property
    def popcounts(self):
        return np.array([_popcount(base) for base in range(self.size)], dtype=np.int64)

    # naming

    def base_from_groups(self, names):
        base = 0
        for name in names:
            try:
                base |= 1 << self.group_index[name]
            except KeyError:
                raise UniverseError(f"unknown rule group {name!r}") from None
        return base

    def group_names(self, base):
        return [group.name for index, group in enumerate(self.groups) if base >> index & 1]

    def describe(self, base):
        return '{' + ','.join(self.group_names(base)) + '}'

    def rules_of(self, base):
        rules = set(self.fixed_rules)
        for index, group in enumerate(self.groups):
            if base >> index & 1:
                rules.update(group.rules)
        return frozenset(rules)


def closure(universe, base):
    """Closure of the empty set under the base's rules"""
    return universe.atom_names(universe.closure_mask(universe.check_base(base)))


def naive_closure(universe, base):
    """Iterate every rule in declaration order until nothing changes; the oracle for closure"""
    rules = list(universe.fixed_rules)
    for index, group in enumerate(universe.groups):
        if base >> index & 1:
            rules.extend(group.rules)
    derived = set()
    changed = True
    while changed:
        changed = False
        for rule in rules:
            if rule.conclusion not in derived and set(rule.premises) <= derived:
                derived.add(rule.conclusion)
                changed = True
    return frozenset(derived)


def is_consistent(universe, base):
    return universe.is_consistent(universe.check_base(base))


def is_max_consistent(universe, base):
    return universe.is_max_consistent(universe.check_base(base))


def enumerate_supersets(universe, base, consistent_only=False):
    return universe.supersets(universe.check_base(base), consistent_only)


def enumerate_subsets(universe, base, consistent_only=False):
    return universe.subsets(universe.check_base(base), consistent_only)


def negation_rules(atom, atoms):
    """Rules deriving every atom from atom; a base holding them and atom is inconsistent"""
    return tuple(BaseRule(frozenset({atom}), other) for other in atoms)


def negation_universe(atoms, agents=('a', 'b'), extra_groups=(), name=''):
    """
    An axiom group has_x and a negation group no_x per atom, plus a spare atom
    no rule derives, so only bases holding both groups of an atom are inconsistent.
    """
    every = list(atoms) + ['spare']
    groups = []
    for atom in atoms:
        groups.append(RuleGroup(f"has_{atom}", (axiom(atom),)))
        groups.append(RuleGroup(f"no_{atom}", negation_rules(atom, every)))
    groups.extend(extra_groups)
    return Universe(every, agents, (), groups, name=name or 'negation-' + '-'.join(atoms))
