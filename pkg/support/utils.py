"""
The support relation over a universe of bases.

SupportEngine evaluates judgements with a memo keyed on (base, relation-set
id, announcement sequence, formula). Knowledge after announcements ranges
over the effective updates at every superset: the canonical construction by
default, every effective update in exhaustive mode.
"""
import logging
from dataclasses import dataclass, field

from bespal.conf import engine_setting
from bespal.exceptions import UniverseError
from formulas.nodes import Announce, Atomic, Bottom, Implies, Knows, agents_of, atoms_of
from formulas.utils import compose_delta, desugar, render, translate
from relations.utils import relation_sets
from updates.utils import canonical_update, effective_updates

logger = logging.getLogger(__name__)

MODES = ('canonical', 'exhaustive')


@dataclass(frozen=True)
class Judgement:
    base: int
    relations: object
    goal: object
    delta: tuple = ()
    context: tuple = ()
    mode: str = 'canonical'


@dataclass
class Validity:
    ok: bool
    base: int = None
    relations: object = None
    checked: int = 0

    def __bool__(self):
        return self.ok

    def describe(self, universe):
        if self.ok:
            return f"valid over {self.checked} relation sets"
        return f"fails at {universe.describe(self.base)} under relations {self.relations.id}"


@dataclass
class Crosscheck:
    ok: bool
    mismatches: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class ModeComparison:
    canonical: bool
    exhaustive: bool

    @property
    def agree(self):
        return self.canonical == self.exhaustive


class SupportEngine:
    def __init__(self, universe, mode=None, budget=None, efq_shortcut=True):
        self.universe = universe
        self.mode = mode or engine_setting('DEFAULT_MODE')
        if self.mode not in MODES:
            raise ValueError(f"unknown support mode {self.mode!r}")
        self.budget = budget
        self.efq_shortcut = efq_shortcut
        self._memo = {}
        self._updates = {}
        self._spaces = {}
        self._siblings = {}

    def __repr__(self):
        return f"<SupportEngine {self.universe.name or '?'} mode={self.mode}>"

    def _prepare(self, formula):
        unknown_atoms = atoms_of(formula) - set(self.universe.atoms)
        if unknown_atoms:
            raise UniverseError(f"{render(formula)} mentions unknown atoms {sorted(unknown_atoms)}")
        unknown_agents = agents_of(formula) - set(self.universe.agents)
        if unknown_agents:
            raise UniverseError(f"{render(formula)} mentions unknown agents {sorted(unknown_agents)}")
        return desugar(formula)

    def sibling(self, mode):
        """An engine over the same universe in another mode"""
        if mode == self.mode:
            return self
        if mode not in self._siblings:
            self._siblings[mode] = SupportEngine(self.universe, mode, self.budget, self.efq_shortcut)
        return self._siblings[mode]

    # judgements

    def supports(self, base, relations, goal, delta=(), context=()):
        base = self.universe.check_base(base)
        goal = self._prepare(goal)
        delta = tuple(self._prepare(formula) for formula in delta)
        if not context:
            return self._holds(base, relations, delta, goal)
        context = tuple(self._prepare(formula) for formula in context)
        for other in self.universe.supersets(base):
            if all(self._holds(other, relations, delta, premise) for premise in context) \
                    and not self._holds(other, relations, delta, goal):
                return False
        return True

    def judge(self, judgement):
        engine = self.sibling(judgement.mode or self.mode)
        return engine.supports(judgement.base, judgement.relations, judgement.goal,
                               judgement.delta, judgement.context)

    def _holds(self, base, relations, delta, formula):
        key = (base, relations.id, delta, formula)
        cached = self._memo.get(key)
        if cached is None:
            cached = self._evaluate(base, relations, delta, formula)
            self._memo[key] = cached
        return cached

    def _evaluate(self, base, relations, delta, formula):
        universe = self.universe
        if self.efq_shortcut and not universe.consistency[base]:
            return True
        if isinstance(formula, Atomic):
            return bool(universe.closure_mask(base) >> universe.atom_index[formula.name] & 1)
        if isinstance(formula, Bottom):
            return not universe.consistency[base]
        if isinstance(formula, Implies):
            return all(not self._holds(other, relations, delta, formula.lhs)
                       or self._holds(other, relations, delta, formula.rhs)
                       for other in universe.supersets(base))
        if isinstance(formula, Knows):
            if not delta:
                return all(self._holds(target, relations, delta, formula.body)
                           for target in relations.successors(formula.agent, base))
            return all(self._holds(target, relations, delta, formula.body)
                       for other in universe.supersets(base)
                       for update in self._effective(relations, delta, other)
                       for target in update.successors(formula.agent, other))
        if isinstance(formula, Announce):
            extended = delta + (formula.announced,)
            return all(not self._holds(other, relations, delta, formula.announced)
                       or self._holds(other, relations, extended, formula.body)
                       for other in universe.supersets(base))
        raise TypeError(f"cannot evaluate {type(formula).__name__}")

    def _effective(self, relations, delta, base):
        """Effective updates by delta at base, as objects answering successors(agent, base)"""
        key = (relations.id, delta, base)
        updates = self._updates.get(key)
        if updates is None:
            announced = desugar(compose_delta(delta))
            if not self._holds(base, relations, (), announced):
                updates = ()
            elif self.mode == 'canonical':
                # only the kept component is read here, so the completion is not verified
                updates = (canonical_update(self.universe, relations, announced, base, engine=self,
                                            verify=False),)
            else:
                updates = tuple(effective_updates(self.universe, relations, delta, base, mode='exhaustive',
                                                  engine=self, budget=self.budget))
            self._updates[key] = updates
        return updates

    # quantification over the space

    def relation_space(self, relations_mode='exhaustive', count=None, seed=None):
        key = (relations_mode, count, seed)
        if key not in self._spaces:
            self._spaces[key] = list(relation_sets(self.universe, relations_mode, count, seed, self.budget))
            logger.debug('%s: %d relation sets in %s mode', self.universe.name,
                         len(self._spaces[key]), relations_mode)
        return self._spaces[key]

    def valid_under(self, relations, formula):
        """First base of the universe not supporting formula under relations, or None"""
        for base in range(self.universe.size):
            if not self.supports(base, relations, formula):
                return base
        return None

    def valid_in_space(self, formula, relations_mode='exhaustive', count=None, seed=None):
        space = self.relation_space(relations_mode, count, seed)
        for checked, relations in enumerate(space, start=1):
            base = self.valid_under(relations, formula)
            if base is not None:
                return Validity(False, base, relations, checked)
        return Validity(True, checked=len(space))

    def translation_crosscheck(self, formula, relations_mode='exhaustive', count=None, seed=None):
        """Compare support of a formula and of its announcement-free translation at every base"""
        translated = translate(formula)
        mismatches = []
        for relations in self.relation_space(relations_mode, count, seed):
            for base in range(self.universe.size):
                original = self.supports(base, relations, formula)
                rewritten = self.supports(base, relations, translated)
                if original != rewritten:
                    mismatches.append((base, relations, original, rewritten))
        if mismatches:
            logger.warning('%s and %s disagree at %d judgements', render(formula), render(translated),
                           len(mismatches))
        return Crosscheck(not mismatches, mismatches)

    def annk_conditions(self, base, relations, agent, announced, body):
        """
        Both sides of the announcement-knowledge equivalence: knowledge of body
        after announced, and knowledge that body holds after announced.
        """
        after = self.supports(base, relations, Knows(agent, body), delta=(announced,))
        before = self.supports(base, relations, Knows(agent, Announce(announced, body)))
        return after, before

    def compare_modes(self, base, relations, goal, delta=()):
        comparison = ModeComparison(
            self.sibling('canonical').supports(base, relations, goal, delta),
            self.sibling('exhaustive').supports(base, relations, goal, delta),
        )
        if not comparison.agree:
            logger.warning('modes disagree on %s at %s: canonical=%s exhaustive=%s', render(goal),
                           self.universe.describe(base), comparison.canonical, comparison.exhaustive)
        return comparison
