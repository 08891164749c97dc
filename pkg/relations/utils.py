"""
Per-agent relations over the base lattice.

Relations are stored as one boolean adjacency matrix per agent, indexed by
base bit-set. S5 relations are built from labels: bases sharing a label are
related, a negative label relates the base to nothing.
"""
import hashlib
import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import pandas as pd

from bespal.conf import engine_setting
from bespal.exceptions import BudgetExceeded, SaturationError

logger = logging.getLogger(__name__)

CONDITIONS = ('a', 'b', 'c', 'd', 'reflexive', 'transitive', 'euclidean')
FRAME_CONDITIONS = ('a', 'b', 'reflexive', 'transitive', 'euclidean')

# Bell(10) fits the default budget, Bell(11) does not
SAMPLE_HINT = ('exhaustive enumeration is only feasible up to about 10 consistent bases; '
               "use sample mode instead (--sample on the command line)")


class AgentRelationSet:
    def __init__(self, universe, matrices, s5_verified=False):
        self.universe = universe
        self.matrices = {}
        for agent in sorted(matrices):
            matrix = np.array(matrices[agent], dtype=bool)
            if matrix.shape != (universe.size, universe.size):
                raise ValueError(f"relation for {agent} has shape {matrix.shape}, expected {universe.size}")
            matrix.setflags(write=False)
            self.matrices[agent] = matrix
        self.s5_verified = s5_verified

    def __repr__(self):
        return f"<AgentRelationSet {self.id} agents={list(self.matrices)}>"

    @classmethod
    def from_labels(cls, universe, labels, s5_verified=False):
        matrices = {}
        for agent, agent_labels in labels.items():
            agent_labels = np.asarray(agent_labels)
            matrices[agent] = (agent_labels[:, None] == agent_labels[None, :]) & (agent_labels[:, None] >= 0)
        return cls(universe, matrices, s5_verified=s5_verified)

    @classmethod
    def from_pairs(cls, universe, pairs, agents=None):
        agents = list(agents if agents is not None else pairs)
        matrices = {agent: np.zeros((universe.size, universe.size), dtype=bool) for agent in agents}
        for agent, agent_pairs in pairs.items():
            for source, target in agent_pairs:
                matrices[agent][source, target] = True
        return cls(universe, matrices)

    @classmethod
    def identity(cls, universe, agents=None):
        agents = universe.agents if agents is None else agents
        return cls.from_labels(universe, {agent: np.arange(universe.size) for agent in agents},
                               s5_verified=True)

    @property
    def agents(self):
        return tuple(self.matrices)

    @cached_property
    def id(self):
        digest = hashlib.sha1()
        for agent, matrix in self.matrices.items():
            digest.update(agent.encode('utf-8'))
            digest.update(np.packbits(matrix).tobytes())
        return digest.hexdigest()[:16]

    @cached_property
    def union(self):
        combined = np.zeros((self.universe.size, self.universe.size), dtype=bool)
        for matrix in self.matrices.values():
            combined |= matrix
        return combined

    def related(self, agent, source, target):
        return bool(self.matrices[agent][source, target])

    def successors(self, agent, base):
        return [int(target) for target in np.flatnonzero(self.matrices[agent][base])]

    def edges(self, agent, bases=None):
        """Ordered pairs of the agent's relation, optionally restricted to a set of bases"""
        matrix = self.matrices[agent]
        if bases is not None:
            mask = np.zeros(self.universe.size, dtype=bool)
            mask[list(bases)] = True
            matrix = matrix & mask[:, None] & mask[None, :]
        return frozenset((int(source), int(target)) for source, target in np.argwhere(matrix))

    def links(self, agent, bases=None):
        """Undirected non-loop edges, for comparing against drawn graphs"""
        return frozenset(frozenset(pair) for pair in self.edges(agent, bases) if pair[0] != pair[1])

    def restricted(self, bases):
        mask = np.zeros(self.universe.size, dtype=bool)
        mask[list(bases)] = True
        keep = mask[:, None] & mask[None, :]
        return AgentRelationSet(self.universe, {agent: matrix & keep for agent, matrix in self.matrices.items()})

    def without_edge(self, agent, source, target):
        matrices = {name: matrix.copy() for name, matrix in self.matrices.items()}
        matrices[agent][source, target] = False
        return AgentRelationSet(self.universe, matrices)

    def same_edges(self, other):
        return self.matrices.keys() == other.matrices.keys() and all(
            np.array_equal(matrix, other.matrices[agent]) for agent, matrix in self.matrices.items()
        )

    def labels(self, agent):
        """Class labels of an equivalence relation: the smallest related base, or -1"""
        matrix = self.matrices[agent]
        labels = np.argmax(matrix, axis=1)
        labels[~matrix.any(axis=1)] = -1
        return labels


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: tuple = ()


@dataclass
class ConditionReport:
    agent: str
    verdicts: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(verdict.holds for verdict in self.verdicts.values())

    def holds(self, *names):
        return all(self.verdicts[name].holds for name in names)

    def failures(self):
        return [(name, self.verdicts[name].witness) for name in CONDITIONS
                if name in self.verdicts and not self.verdicts[name].holds]

    def describe_failure(self, universe):
        failures = self.failures()
        if not failures:
            return f"{self.agent}: all conditions hold"
        name, witness = failures[0]
        bases = ', '.join(universe.describe(base) for base in witness)
        return f"{self.agent}: condition ({name}) fails at {bases}"

    def as_dict(self, universe):
        return {
            'agent': self.agent,
            'ok': self.ok,
            'verdicts': {
                name: {
                    'holds': verdict.holds,
                    'witness': [universe.describe(base) for base in verdict.witness],
                }
                for name, verdict in self.verdicts.items()
            },
        }


def conditions_frame(reports, universe):
    """One row per agent and condition, for text reports"""
    rows = []
    for report in reports:
        for name in CONDITIONS:
            verdict = report.verdicts[name]
            rows.append({
                'agent': report.agent,
                'condition': name,
                'holds': verdict.holds,
                'witness': ' '.join(universe.describe(base) for base in verdict.witness),
            })
    return pd.DataFrame.from_records(rows, columns=['agent', 'condition', 'holds', 'witness'])


def _first(mask):
    hits = np.argwhere(mask)
    return tuple(int(value) for value in hits[0]) if len(hits) else None


def _product(left, right):
    return (left.astype(np.float32) @ right.astype(np.float32)) > 0


def check_modal_conditions(universe, relations, agent):
    """Evaluate conditions (a)-(d) and the equivalence properties of one agent's relation"""
    matrix = relations.matrices[agent]
    consistent = universe.consistency
    inconsistent = ~consistent
    contains = universe.superset_matrix
    verdicts = {}

    into_consistent = (matrix & consistent[None, :]).any(axis=1)
    into_inconsistent = (matrix & inconsistent[None, :]).any(axis=1)
    bad_rows = inconsistent & (into_consistent | ~into_inconsistent)
    if bad_rows.any():
        base = int(np.argmax(bad_rows))
        if into_consistent[base]:
            target = int(np.argmax(matrix[base] & consistent))
            verdicts['a'] = Verdict(False, (base, target))
        else:
            verdicts['a'] = Verdict(False, (base,))
    else:
        verdicts['a'] = Verdict(True)

    pair = _first(matrix & consistent[:, None] & inconsistent[None, :])
    verdicts['b'] = Verdict(pair is None, pair or ())

    # (c): R B C and consistent D >= B need some E >= C with R D E
    reaches_above = _product(matrix, contains)
    stuck = consistent[:, None] & ~reaches_above
    pair = _first(matrix & _product(contains.T, stuck))
    if pair is None:
        verdicts['c'] = Verdict(True)
    else:
        source, target = pair
        extension = int(np.argmax(contains[:, source] & stuck[:, target]))
        verdicts['c'] = Verdict(False, (source, target, extension))

    # (d): R B C with C consistent and D <= B need some E <= C with R D E
    reaches_below = _product(matrix, contains.T)
    stuck = ~reaches_below
    pair = _first(matrix & consistent[None, :] & _product(contains, stuck))
    if pair is None:
        verdicts['d'] = Verdict(True)
    else:
        source, target = pair
        restriction = int(np.argmax(contains[source, :] & stuck[:, target]))
        verdicts['d'] = Verdict(False, (source, target, restriction))

    diagonal = np.diagonal(matrix)
    if diagonal.all():
        verdicts['reflexive'] = Verdict(True)
    else:
        verdicts['reflexive'] = Verdict(False, (int(np.argmin(diagonal)),))

    pair = _first(_product(matrix, matrix) & ~matrix)
    if pair is None:
        verdicts['transitive'] = Verdict(True)
    else:
        source, target = pair
        middle = int(np.argmax(matrix[source] & matrix[:, target]))
        verdicts['transitive'] = Verdict(False, (source, middle, target))

    pair = _first(_product(matrix.T, matrix) & ~matrix)
    if pair is None:
        verdicts['euclidean'] = Verdict(True)
    else:
        left, right = pair
        source = int(np.argmax(matrix[:, left] & matrix[:, right]))
        verdicts['euclidean'] = Verdict(False, (source, left, right))

    return ConditionReport(agent, verdicts)


def check_all(universe, relations):
    return {agent: check_modal_conditions(universe, relations, agent) for agent in relations.agents}


def reachable_set(universe, relations, base):
    """Bases reachable from base through any chain of agent edges, base included"""
    reached = np.zeros(universe.size, dtype=bool)
    reached[base] = True
    if not relations.matrices:
        return frozenset({base})
    union = relations.union
    frontier = reached.copy()
    while frontier.any():
        step = union[frontier].any(axis=0) & ~reached
        reached |= step
        frontier = step
    return frozenset(int(value) for value in np.flatnonzero(reached))


def relation_domain(relations):
    """Bases occurring on either side of some edge of some agent"""
    if not relations.matrices:
        return frozenset()
    union = relations.union
    occurring = union.any(axis=0) | union.any(axis=1)
    return frozenset(int(value) for value in np.flatnonzero(occurring))


def group_union(relations):
    mask = 0
    for base in relation_domain(relations):
        mask |= base
    return mask


def rule_union(universe, relations):
    """All base rules of the bases in the relation's domain; fixed rules once"""
    domain = relation_domain(relations)
    if not domain:
        return frozenset()
    return universe.rules_of(group_union(relations))


# partitions

def canonical_labels(keys):
    """Replace arbitrary hashable keys by ints in order of first appearance; None becomes -1"""
    assigned = {}
    labels = np.full(len(keys), -1, dtype=np.int64)
    for index, key in enumerate(keys):
        if key is None:
            continue
        labels[index] = assigned.setdefault(key, len(assigned))
    return labels


def complete_partition(universe, core_labels):
    """
    Wire the bases around a core layer.

    core_labels maps each core base to its class. Proper subsets of core
    bases are grouped by the set of classes above them; the remaining
    consistent bases by the classes of their subsets in that layer together
    with the groups they add beyond the layer; inconsistent bases form one
    class. Returns (layer_keys, full_keys) as per-base key lists.
    """
    consistent = universe.consistency
    core_groups = 0
    for base in core_labels:
        core_groups |= base
    keys = [None] * universe.size
    for base, label in core_labels.items():
        keys[base] = ('core', label)
    for base in universe.consistent_bases:
        if base in core_labels:
            continue
        above = frozenset(core_labels[other] for other in universe.supersets(base)
                          if other != base and other in core_labels)
        if above:
            keys[base] = ('sub', above)
    layer = list(keys)
    for base in universe.consistent_bases:
        if keys[base] is not None:
            continue
        below = frozenset(layer[other] for other in universe.subsets(base)
                          if other != base and layer[other] is not None)
        keys[base] = ('sup', below, base & ~core_groups)
    for base in range(universe.size):
        if not consistent[base]:
            keys[base] = ('inconsistent',)
    return layer, keys


def stabilize_partition(universe, labels, frozen=frozenset()):
    """
    Coarsest refinement in which every block of consistent bases sees the same
    blocks among its consistent supersets and among its subsets.

    Frozen bases and inconsistent bases keep their blocks.
    """
    consistent = universe.consistency
    current = canonical_labels(list(labels))
    rounds = 0
    while True:
        keys = []
        for base in range(universe.size):
            if not consistent[base] or base in frozen:
                keys.append(('kept', int(current[base])))
                continue
            above = frozenset(int(current[other]) for other in universe.supersets(base, consistent_only=True))
            below = frozenset(int(current[other]) for other in universe.subsets(base))
            keys.append((int(current[base]), above, below))
        refined = canonical_labels(keys)
        rounds += 1
        if refined.max(initial=-1) == current.max(initial=-1):
            logger.debug('partition stable after %d rounds with %d blocks', rounds, refined.max(initial=-1) + 1)
            return refined
        current = refined


def equivalence_classes(bases, pairs):
    """Union-find over bases; returns base -> smallest member of its class"""
    parent = {base: base for base in bases}

    def find(base):
        while parent[base] != base:
            parent[base] = parent[parent[base]]
            base = parent[base]
        return base

    for left, right in pairs:
        root_left, root_right = find(left), find(right)
        if root_left != root_right:
            parent[max(root_left, root_right)] = min(root_left, root_right)
    return {base: find(base) for base in bases}


def saturate_core_relation(universe, core_edges, agents=None):
    """
    Complete per-agent core edges into S5-modal relations over the whole lattice.

    The equivalence closure of each agent's core edges is kept exactly on the
    core layer; the rest of the lattice is wired around it and stabilised.
    """
    agents = tuple(agents if agents is not None else universe.agents)
    consistent = universe.consistency
    layer = sorted({base for pairs in core_edges.values() for pair in pairs for base in pair})
    for agent, pairs in core_edges.items():
        for left, right in pairs:
            if consistent[left] != consistent[right]:
                raw = AgentRelationSet.from_pairs(universe, {agent: [(left, right), (right, left)]})
                report = check_modal_conditions(universe, raw, agent)
                raise SaturationError(
                    f"core edge {universe.describe(left)}-{universe.describe(right)} of {agent} "
                    f"mixes consistent and inconsistent bases", report)
    for base in layer:
        if not consistent[base]:
            raise SaturationError(f"core base {universe.describe(base)} is inconsistent")

    labels = {}
    for agent in agents:
        classes = equivalence_classes(layer, core_edges.get(agent, ()))
        _, keys = complete_partition(universe, classes)
        labels[agent] = stabilize_partition(universe, keys, frozen=frozenset(layer))
    relations = AgentRelationSet.from_labels(universe, labels)
    for agent in agents:
        report = check_modal_conditions(universe, relations, agent)
        if not report.ok:
            raise SaturationError(f"core admits no modal completion: {report.describe_failure(universe)}", report)
    relations.s5_verified = True
    logger.debug('saturated %d core bases for agents %s', len(layer), ', '.join(agents))
    return relations


# enumeration

def restricted_growth_strings(count):
    """Every set partition of range(count), as block labels in first-appearance order"""
    if count == 0:
        yield ()
        return
    prefix = [0]

    def extend(top):
        if len(prefix) == count:
            yield tuple(prefix)
            return
        for label in range(top + 2):
            prefix.append(label)
            yield from extend(max(top, label))
            prefix.pop()

    yield from extend(0)


def bell_number(count):
    row = [1]
    for _ in range(count):
        nxt = [row[-1]]
        for value in row:
            nxt.append(nxt[-1] + value)
        row = nxt
    return row[0]


def _labels_for(universe, codes):
    consistent = universe.consistent_bases
    labels = np.full(universe.size, len(consistent), dtype=np.int64)
    for base, code in zip(consistent, codes):
        labels[base] = code
    return labels


def modal_partitions(universe, agent, budget=None):
    """All S5-modal relations for one agent, as label arrays"""
    budget = engine_setting('BUDGET') if budget is None else budget
    count = len(universe.consistent_bases)
    if bell_number(count) > budget:
        raise BudgetExceeded(f"{bell_number(count)} partitions of {count} consistent bases exceed budget {budget}; "
                             + SAMPLE_HINT)
    valid = []
    for codes in restricted_growth_strings(count):
        labels = _labels_for(universe, codes)
        single = AgentRelationSet.from_labels(universe, {agent: labels})
        if check_modal_conditions(universe, single, agent).ok:
            valid.append(labels)
    return valid


def check_exhaustive_bounds(universe):
    if universe.width > engine_setting('EXHAUSTIVE_MAX_GROUPS'):
        raise BudgetExceeded(f"exhaustive mode allows at most {engine_setting('EXHAUSTIVE_MAX_GROUPS')} "
                             f"optional groups, universe has {universe.width}; " + SAMPLE_HINT)
    if len(universe.agents) > engine_setting('EXHAUSTIVE_MAX_AGENTS'):
        raise BudgetExceeded(f"exhaustive mode allows at most {engine_setting('EXHAUSTIVE_MAX_AGENTS')} "
                             f"agents, universe has {len(universe.agents)}; " + SAMPLE_HINT)


def exhaustive_relation_sets(universe, budget=None):
    budget = engine_setting('BUDGET') if budget is None else budget
    check_exhaustive_bounds(universe)
    per_agent = [modal_partitions(universe, agent, budget) for agent in universe.agents]
    total = int(np.prod([len(options) for options in per_agent])) if per_agent else 1
    if total > budget:
        raise BudgetExceeded(f"{total} relation sets exceed budget {budget}; " + SAMPLE_HINT)
    for combination in itertools.product(*per_agent):
        yield AgentRelationSet.from_labels(universe, dict(zip(universe.agents, combination)), s5_verified=True)


def sampled_relation_sets(universe, count, seed, budget=None):
    """
    Draw random partitions of the consistent bases and refine each to the
    nearest stable partition, which is always S5-modal.
    """
    budget = engine_setting('BUDGET') if budget is None else budget
    if count > budget:
        raise BudgetExceeded(f"{count} samples exceed budget {budget}")
    rng = np.random.default_rng(seed)
    consistent = universe.consistent_bases
    for _ in range(count):
        labels = {}
        for agent in universe.agents:
            blocks = int(rng.integers(1, len(consistent) + 1)) if consistent else 1
            codes = rng.integers(0, blocks, size=len(consistent))
            labels[agent] = stabilize_partition(universe, _labels_for(universe, codes))
        relations = AgentRelationSet.from_labels(universe, labels)
        for agent in universe.agents:
            report = check_modal_conditions(universe, relations, agent)
            if not report.ok:
                raise SaturationError(f"sampled relation failed its self-test: {report.describe_failure(universe)}",
                                      report)
        relations.s5_verified = True
        yield relations


def relation_sets(universe, mode='exhaustive', count=None, seed=None, budget=None):
    """Relation sets the validity quantifier ranges over"""
    if mode == 'exhaustive':
        return exhaustive_relation_sets(universe, budget)
    if mode == 'sample':
        count = engine_setting('SAMPLE_SIZE') if count is None else count
        seed = engine_setting('DEFAULT_SEED') if seed is None else seed
        return sampled_relation_sets(universe, count, seed, budget)
    raise ValueError(f"unknown relation enumeration mode {mode!r}")
