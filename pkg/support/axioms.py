"""
Axiom and rule schemas of S5 and PAL, instantiated over a universe's atoms
and agents, and checked for validity over its relation space.
"""
import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from bespal.conf import engine_setting
from formulas.nodes import Announce, And, Atomic, BOTTOM, Iff, Implies, Knows, Not
from formulas.utils import render
from kripke.utils import valid_in_model
from support.utils import SupportEngine

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Schema:
    name: str
    arity: int
    build: object
    agents: int = 0
    rule: bool = False

    def instantiate(self, formulas, agents=()):
        """An axiom instance, or (premises, conclusion) for a rule"""
        return self.build(*formulas, *agents)


CLASSICAL = (
    Schema('1', 2, lambda p, q: Implies(p, Implies(q, p))),
    Schema('2', 3, lambda p, q, r: Implies(Implies(p, Implies(q, r)), Implies(Implies(p, q), Implies(p, r)))),
    Schema('3', 2, lambda p, q: Implies(Implies(Not(p), Not(q)), Implies(q, p))),
)

S5 = (
    Schema('K', 2, lambda p, q, a: Implies(Knows(a, Implies(p, q)), Implies(Knows(a, p), Knows(a, q))), agents=1),
    Schema('T', 1, lambda p, a: Implies(Knows(a, p), p), agents=1),
    Schema('4', 1, lambda p, a: Implies(Knows(a, p), Knows(a, Knows(a, p))), agents=1),
    Schema('5', 1, lambda p, a: Implies(Not(Knows(a, p)), Knows(a, Not(Knows(a, p)))), agents=1),
)

PAL = (
    # the second place only takes atoms
    Schema('atomic_permanence', 2, lambda p, q: Iff(Announce(p, q), Implies(p, q))),
    Schema('announcement_bottom', 1, lambda p: Iff(Announce(p, BOTTOM), Implies(p, BOTTOM))),
    Schema('announcement_implication', 3,
           lambda p, q, r: Iff(Announce(p, Implies(q, r)), Implies(Announce(p, q), Announce(p, r)))),
    Schema('announcement_knowledge', 2,
           lambda p, q, a: Iff(Announce(p, Knows(a, q)), Implies(p, Knows(a, Announce(p, q)))), agents=1),
    Schema('announcement_composition', 3,
           lambda p, q, r: Iff(Announce(p, Announce(q, r)), Announce(And(p, Announce(p, q)), r))),
)

RULES = (
    Schema('MP', 2, lambda p, q: ((p, Implies(p, q)), q), rule=True),
    Schema('NEC', 1, lambda p, a: ((p,), Knows(a, p)), agents=1, rule=True),
    Schema('announcement_necessitation', 2, lambda p, q: ((q,), Announce(p, q)), rule=True),
)

CATALOGUE = {schema.name: schema for schema in CLASSICAL + S5 + PAL + RULES}

# Unsound on purpose: what one agent knows is claimed for another.
KNOWLEDGE_TRANSFER = Schema('knowledge_transfer', 1, lambda p, a, b: Implies(Knows(a, p), Knows(b, p)), agents=2)


def instance_pool(atoms, agents, depth):
    """Formulas up to the given depth over atoms, bot and the primitive operators"""
    pool = [Atomic(atom) for atom in atoms] + [BOTTOM]
    seen = set(pool)
    layer = list(pool)
    for _ in range(depth):
        grown = []
        for left in layer:
            grown.append(Not(left))
            grown.extend(Knows(agent, left) for agent in agents)
            for right in pool:
                grown.append(Implies(left, right))
                grown.append(Announce(left, right))
        layer = [formula for formula in dict.fromkeys(grown) if formula not in seen]
        seen.update(layer)
        pool.extend(layer)
    return pool


def _spread(total, limit):
    """At most limit indices below total, evenly spaced and always including the first"""
    if total <= limit:
        return list(range(total))
    picks = np.linspace(0, total - 1, num=limit).round().astype(np.int64)
    return list(dict.fromkeys(int(pick) for pick in picks))


def _decode(index, sizes):
    """Mixed-radix digits of index, the last place varying fastest"""
    digits = []
    for size in reversed(sizes):
        index, digit = divmod(index, size)
        digits.append(digit)
    return digits[::-1]


def schema_instances(schema, atoms, agents, depth=1, limit=None):
    """
    Instances spread evenly over the product of instance pools and agent
    choices, in product order, without building the product.
    """
    limit = engine_setting('AXIOM_INSTANCE_LIMIT') if limit is None else limit
    pool = instance_pool(atoms, agents, depth)
    places = [pool] * schema.arity
    if schema.name == 'atomic_permanence':
        places = [pool, [Atomic(atom) for atom in atoms]]
    agent_choices = list(itertools.permutations(agents, schema.agents))
    sizes = [len(place) for place in places] + [len(agent_choices)]
    total = int(np.prod(sizes, dtype=object)) if all(sizes) else 0
    instances = []
    for index in _spread(total, limit):
        *positions, choice = _decode(index, sizes)
        formulas = [place[position] for place, position in zip(places, positions)]
        instances.append(schema.instantiate(formulas, agent_choices[choice]))
    return instances


@dataclass
class InstanceResult:
    schema: str
    formula: str
    ok: bool
    base: int = None
    relations: str = ''


@dataclass
class AxiomReport:
    results: list = field(default_factory=list)

    @property
    def failures(self):
        return [result for result in self.results if not result.ok]

    @property
    def ok(self):
        return not self.failures

    def to_frame(self):
        return pd.DataFrame.from_records(
            [vars(result) for result in self.results],
            columns=['schema', 'formula', 'ok', 'base', 'relations'],
        )

    def summary(self):
        """Instances and valid instances per schema"""
        frame = self.to_frame()
        if frame.empty:
            return frame
        return frame.groupby('schema', sort=False)['ok'].agg(['count', 'sum']).rename(
            columns={'count': 'instances', 'sum': 'valid'})

    def as_dict(self, universe):
        return {
            'ok': self.ok,
            'instances': len(self.results),
            'failures': [
                {
                    'schema': result.schema,
                    'formula': result.formula,
                    'base': universe.describe(result.base) if result.base is not None else None,
                    'relations': result.relations,
                }
                for result in self.failures
            ],
        }


def _resolve(schemas):
    if schemas is None:
        return list(CATALOGUE.values())
    return [CATALOGUE[schema] if isinstance(schema, str) else schema for schema in schemas]


def _describe(schema, instance):
    if not schema.rule:
        return render(instance)
    premises, conclusion = instance
    return f"{' ; '.join(render(premise) for premise in premises)} / {render(conclusion)}"


def axiom_suite(universe, depth=1, relations_mode='exhaustive', schemas=None, limit=None,
                engine=None, count=None, seed=None):
    """
    Check every instance of the chosen schemas over the universe's relation space.

    Axiom instances must hold at every base under every relation set. A rule
    instance fails when its premises are valid and its conclusion is not;
    instances with an invalid premise are skipped.
    """
    engine = engine or SupportEngine(universe)
    report = AxiomReport()
    for schema in _resolve(schemas):
        for instance in schema_instances(schema, universe.atoms, universe.agents, depth, limit):
            if schema.rule:
                premises, conclusion = instance
                if not all(engine.valid_in_space(premise, relations_mode, count, seed) for premise in premises):
                    continue
                verdict = engine.valid_in_space(conclusion, relations_mode, count, seed)
            else:
                verdict = engine.valid_in_space(instance, relations_mode, count, seed)
            report.results.append(InstanceResult(
                schema.name, _describe(schema, instance), verdict.ok, verdict.base,
                verdict.relations.id if verdict.relations is not None else '',
            ))
    if report.failures:
        logger.info('%d of %d axiom instances fail on %s', len(report.failures), len(report.results),
                    universe.name or 'universe')
    return report


def kripke_axiom_suite(models, atoms, agents, depth=1, schemas=None, limit=None):
    """The same catalogue checked for validity across a collection of Kripke models"""
    report = AxiomReport()

    def failing_model(formula):
        return next((model for model in models if not valid_in_model(model, formula)), None)

    for schema in _resolve(schemas):
        for instance in schema_instances(schema, atoms, agents, depth, limit):
            if schema.rule:
                premises, conclusion = instance
                if any(failing_model(premise) is not None for premise in premises):
                    continue
                witness = failing_model(conclusion)
            else:
                witness = failing_model(instance)
            report.results.append(InstanceResult(
                schema.name, _describe(schema, instance), witness is None,
                relations='' if witness is None else f"model {witness.model_id}",
            ))
    return report
