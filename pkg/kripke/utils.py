"""Multi-agent Kripke models and classical PAL truth."""
import itertools
import logging
from dataclasses import dataclass, field

from bases.loaders import read_document
from bespal.exceptions import KripkeModelError
from formulas.nodes import Announce, Atomic, Bottom, Implies, Knows
from formulas.utils import desugar, render

logger = logging.getLogger(__name__)

_model_ids = itertools.count(1)


@dataclass(frozen=True)
class S5Check:
    ok: bool
    agent: str = ''
    prop: str = ''
    witness: tuple = ()


@dataclass(eq=False)
class KripkeModel:
    worlds: tuple
    relations: dict
    valuation: dict
    model_id: int = field(default_factory=lambda: next(_model_ids))

    def __post_init__(self):
        self.worlds = tuple(self.worlds)
        declared = set(self.worlds)
        if len(declared) != len(self.worlds):
            raise KripkeModelError('duplicate world identifiers')
        self.relations = {agent: frozenset(tuple(pair) for pair in pairs)
                          for agent, pairs in self.relations.items()}
        self.valuation = {atom: frozenset(worlds) for atom, worlds in self.valuation.items()}
        for agent, pairs in self.relations.items():
            for pair in pairs:
                if not set(pair) <= declared:
                    raise KripkeModelError(f"relation {agent} uses undeclared world in {pair}")
        for atom, worlds in self.valuation.items():
            if not worlds <= declared:
                raise KripkeModelError(f"valuation of {atom} uses undeclared worlds")
        self._successors = {
            agent: {world: sorted(v for (w, v) in pairs if w == world) for world in self.worlds}
            for agent, pairs in self.relations.items()
        }
        self.world_set = declared
        self._truth = {}
        self._restrictions = {}

    def successors(self, agent, world):
        return self._successors.get(agent, {}).get(world, [])


def is_s5_model(model):
    """Check every agent relation is reflexive, transitive and Euclidean; report the first violation"""
    for agent in sorted(model.relations):
        pairs = model.relations[agent]
        for world in model.worlds:
            if (world, world) not in pairs:
                return S5Check(False, agent, 'reflexive', (world,))
        ordered = sorted(pairs)
        for (w, v) in ordered:
            for u in model.successors(agent, v):
                if (w, u) not in pairs:
                    return S5Check(False, agent, 'transitive', (w, v, u))
        for (w, v) in ordered:
            for u in model.successors(agent, w):
                if (v, u) not in pairs:
                    return S5Check(False, agent, 'euclidean', (w, v, u))
    return S5Check(True)


def restrict(model, formula):
    """The submodel of worlds where the formula is true"""
    formula = desugar(formula)
    cached = model._restrictions.get(formula)
    if cached is not None:
        return cached
    check = is_s5_model(model)
    if not check.ok:
        raise KripkeModelError(
            f"announcements need an S5 model: {check.agent} is not {check.prop} at {check.witness}"
        )
    kept = [world for world in model.worlds if _truth(model, world, formula)]
    survivors = set(kept)
    restricted = KripkeModel(
        worlds=kept,
        relations={agent: [(w, v) for (w, v) in pairs if w in survivors and v in survivors]
                   for agent, pairs in model.relations.items()},
        valuation={atom: worlds & survivors for atom, worlds in model.valuation.items()},
    )
    logger.debug('restrict by %s keeps %d of %d worlds', render(formula), len(kept), len(model.worlds))
    model._restrictions[formula] = restricted
    return restricted


def evaluate(model, world, formula):
    """Truth of a (possibly sugared) formula at a world"""
    if world not in model.world_set:
        raise KripkeModelError(f"unknown world {world!r}")
    return _truth(model, world, desugar(formula))


def _truth(model, world, formula):
    key = (world, formula)
    cached = model._truth.get(key)
    if cached is not None:
        return cached
    if isinstance(formula, Atomic):
        value = world in model.valuation.get(formula.name, ())
    elif isinstance(formula, Bottom):
        value = False
    elif isinstance(formula, Implies):
        value = not _truth(model, world, formula.lhs) or _truth(model, world, formula.rhs)
    elif isinstance(formula, Knows):
        if formula.agent not in model.relations:
            raise KripkeModelError(f"model has no relation for agent {formula.agent!r}")
        value = all(_truth(model, other, formula.body) for other in model.successors(formula.agent, world))
    elif isinstance(formula, Announce):
        value = (not _truth(model, world, formula.announced)
                 or _truth(restrict(model, formula.announced), world, formula.body))
    else:
        raise TypeError(f"cannot evaluate {type(formula).__name__}")
    model._truth[key] = value
    return value


def valid_in_model(model, formula):
    """True when the formula holds at every world"""
    formula = desugar(formula)
    return all(_truth(model, world, formula) for world in model.worlds)


def equivalence_closure(worlds, pairs):
    """Least equivalence relation on worlds containing pairs"""
    parent = {world: world for world in worlds}

    def find(world):
        while parent[world] != world:
            parent[world] = parent[parent[world]]
            world = parent[world]
        return world

    for w, v in pairs:
        parent[find(w)] = find(v)
    classes = {}
    for world in worlds:
        classes.setdefault(find(world), []).append(world)
    return {(w, v) for members in classes.values() for w in members for v in members}


def model_from_partitions(worlds, partitions, valuation):
    """Build an S5 model from per-agent lists of world blocks"""
    relations = {agent: {(w, v) for block in blocks for w in block for v in block}
                 for agent, blocks in partitions.items()}
    return KripkeModel(worlds=worlds, relations=relations, valuation=valuation)


def model_from_data(data):
    """
    Build a model from a document. An optional agents list must match the
    relation keys exactly; an agent without a relation is an error.
    """
    try:
        worlds = list(data['worlds'])
        relations = {agent: [tuple(pair) for pair in pairs]
                     for agent, pairs in data.get('relations', {}).items()}
        valuation = data.get('valuation', {})
        agents = data.get('agents')
    except (KeyError, TypeError, AttributeError) as exc:
        raise KripkeModelError(f"malformed Kripke model: {exc}") from exc
    if agents is not None:
        missing = sorted(set(agents) - set(relations))
        if missing:
            raise KripkeModelError(f"agents without a relation: {', '.join(missing)}")
        undeclared = sorted(set(relations) - set(agents))
        if undeclared:
            raise KripkeModelError(f"relations for undeclared agents: {', '.join(undeclared)}")
    for agent, pairs in relations.items():
        if any(len(pair) != 2 for pair in pairs):
            raise KripkeModelError(f"relation {agent} holds a non-pair")
    if data.get('s5_closure'):
        relations = {agent: equivalence_closure(worlds, pairs) for agent, pairs in relations.items()}
    return KripkeModel(worlds=worlds, relations=relations, valuation=valuation)


def load_model(source):
    return model_from_data(read_document(source))
