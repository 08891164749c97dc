from django.test import SimpleTestCase
from hypothesis import given, settings
import hypothesis.strategies as st

from bases.utils import BaseRule, RuleGroup, Universe, axiom, negation_rules, negation_universe
from bespal.exceptions import UniverseError
from formulas.nodes import Not, Or
from formulas.parser import parse
from formulas.strategies import core_formulas, depth
from relations.utils import AgentRelationSet, saturate_core_relation
from scenarios.builders import MUDDY_ANNOUNCEMENT, NOBODY_KNOWS, build_card_game, build_muddy_counterexample
from support.axioms import (
    CATALOGUE, KNOWLEDGE_TRANSFER, axiom_suite, instance_pool, schema_instances,
)
from support.utils import Judgement, SupportEngine

ALSO_P = RuleGroup('also_p', (axiom('p'),))
P_GIVES_Q = RuleGroup('p_gives_q', (BaseRule(frozenset({'p'}), 'q'),))
NO_P_AGAIN = RuleGroup('no_p_again', negation_rules('p', ['p', 'spare']))
AXIOM_SCHEMAS = {name for name, schema in CATALOGUE.items() if not schema.rule}


def micro_universe():
    groups = [RuleGroup('g1', (axiom('p'),)), RuleGroup('g2', (axiom('q'),))]
    return Universe(['p', 'q', 'r'], ['a', 'b'], (), groups, name='micro')


def blurred_relations(universe):
    """a sees nothing beyond the base itself; b cannot tell the two single groups apart"""
    return saturate_core_relation(universe, {'b': [(1, 2)]})


class AtomicSupportTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.spec = build_card_game()
        cls.universe = cls.spec.universe
        cls.relations = AgentRelationSet.identity(cls.universe)
        cls.engine = SupportEngine(cls.universe)
        cls.deal = cls.spec.named_bases['B_012']

    def test_atoms_follow_closure(self):
        self.assertTrue(self.engine.supports(self.deal, self.relations, parse('0_a')))
        self.assertFalse(self.engine.supports(self.deal, self.relations, parse('1_a')))

    def test_negation_at_a_deal(self):
        self.assertTrue(self.engine.supports(self.deal, self.relations, parse('~1_a')))

    def test_bottom_only_at_inconsistent_bases(self):
        clash = self.universe.base_from_groups(['0_a', '1_a'])
        self.assertTrue(self.engine.supports(clash, self.relations, parse('bot')))
        self.assertFalse(self.engine.supports(self.deal, self.relations, parse('bot')))

    def test_excluded_middle_needs_a_maximal_base(self):
        self.assertTrue(self.engine.supports(self.deal, self.relations, parse('~1_a | 1_a')))
        self.assertFalse(self.engine.supports(0, self.relations, parse('~0_a | 0_a')))

    def test_disjunction_splits_at_maximal_bases(self):
        self.assertTrue(self.universe.is_max_consistent(self.deal))
        self.assertTrue(self.engine.supports(self.deal, self.relations, parse('0_a | 1_a')))

    def test_explosion_without_shortcut(self):
        engine = SupportEngine(self.universe, efq_shortcut=False)
        clash = self.universe.base_from_groups(['0_a', '1_a', '2_b'])
        for text in ('bot', '1_c', 'K[a] 0_b', '[0_c] 1_b', '~0_a'):
            self.assertTrue(engine.supports(clash, self.relations, parse(text)), text)

    def test_unknown_atom(self):
        with self.assertRaises(UniverseError):
            self.engine.supports(self.deal, self.relations, parse('3_a'))

    def test_unknown_agent(self):
        with self.assertRaises(UniverseError):
            self.engine.supports(self.deal, self.relations, parse('K[d] 0_a'))


class KnowledgeTests(SimpleTestCase):
    def setUp(self):
        self.universe = micro_universe()
        self.engine = SupportEngine(self.universe)

    def test_identity_knowledge_is_truth(self):
        relations = AgentRelationSet.identity(self.universe)
        for base in range(self.universe.size):
            self.assertEqual(self.engine.supports(base, relations, parse('K[a] p')),
                             self.engine.supports(base, relations, parse('p')))

    def test_blurred_agent(self):
        relations = blurred_relations(self.universe)
        g1 = self.universe.base_from_groups(['g1'])
        self.assertTrue(self.engine.supports(g1, relations, parse('K[a] p')))
        self.assertFalse(self.engine.supports(g1, relations, parse('K[b] p')))

    def test_context(self):
        universe = negation_universe(['p', 'q'])
        engine = SupportEngine(universe)
        relations = AgentRelationSet.identity(universe)
        self.assertFalse(engine.supports(0, relations, parse('q'), context=(parse('p'),)))
        self.assertTrue(engine.supports(0, relations, parse('q'), context=(parse('p & q'),)))
        self.assertTrue(engine.supports(0, relations, parse('p'), context=(parse('~~p'),)))

    def test_judgement(self):
        relations = AgentRelationSet.identity(self.universe)
        judgement = Judgement(1, relations, parse('K[a] p'), delta=(parse('p'),), mode='exhaustive')
        self.assertTrue(self.engine.judge(judgement))

    def test_modes_agree(self):
        relations = AgentRelationSet.identity(self.universe)
        comparison = self.engine.compare_modes(1, relations, parse('K[a] p'), delta=(parse('p'),))
        self.assertTrue(comparison.agree)
        self.assertTrue(comparison.canonical)

    @settings(max_examples=80, deadline=None)
    @given(core_formulas(max_leaves=4), st.integers(min_value=0, max_value=3), st.integers(min_value=0, max_value=3))
    def test_monotone(self, formula, base, extra):
        relations = blurred_relations(self.universe)
        if self.engine.supports(base, relations, formula):
            self.assertTrue(self.engine.supports(base | extra, relations, formula))


class ScenarioKnowledgeTests(SimpleTestCase):
    def test_card_game(self):
        spec = build_card_game()
        relations = spec.relations()
        engine = SupportEngine(spec.universe)
        deal = spec.named_bases['B_012']
        goal = parse('K[c] (0_a & 1_b & 2_c)')
        announced = parse('~1_a')
        self.assertFalse(engine.supports(deal, relations, goal))
        self.assertTrue(engine.supports(deal, relations, goal, delta=(announced,)))
        self.assertTrue(engine.supports(deal, relations, parse('[~1_a] K[c] (0_a & 1_b & 2_c)')))
        self.assertFalse(engine.supports(deal, relations, parse('K[a] (1_b & 2_c)'), delta=(announced,)))

    def test_announcement_knowledge_where_the_announcement_holds(self):
        spec = build_card_game()
        relations = spec.relations()
        engine = SupportEngine(spec.universe)
        deal = spec.named_bases['B_012']
        self.assertEqual(engine.annk_conditions(deal, relations, 'c', parse('~1_a'), parse('0_a & 1_b & 2_c')),
                         (True, True))
        self.assertEqual(engine.annk_conditions(deal, relations, 'a', parse('~1_a'), parse('1_b & 2_c')),
                         (False, False))

    def test_muddy_counterexample(self):
        spec = build_muddy_counterexample()
        relations = spec.relations()
        engine = SupportEngine(spec.universe)
        delta = (parse(MUDDY_ANNOUNCEMENT), parse(NOBODY_KNOWS))
        actual = spec.named_bases['B_ab']
        self.assertTrue(engine.supports(actual, relations, parse('K[b] m_b'), delta=delta))
        self.assertFalse(engine.supports(actual, relations, parse('K[a] m_a'), delta=delta))
        self.assertFalse(engine.supports(actual, relations, parse('K[c] m_c'), delta=delta))


class ValidityTests(SimpleTestCase):
    def setUp(self):
        self.universe = micro_universe()
        self.engine = SupportEngine(self.universe)

    def test_bottom_is_not_valid(self):
        validity = self.engine.valid_in_space(parse('bot'))
        self.assertFalse(validity)
        self.assertEqual(validity.base, 0)
        self.assertIn('fails at {}', validity.describe(self.universe))

    def test_truth_axiom_is_valid(self):
        validity = self.engine.valid_in_space(parse('K[a] p -> p'))
        self.assertTrue(validity)
        self.assertEqual(validity.checked, len(self.engine.relation_space()))

    def test_knowledge_of_every_truth_is_not_valid(self):
        self.assertFalse(self.engine.valid_in_space(parse('p -> K[a] p')))

    def test_sampled_space(self):
        validity = self.engine.valid_in_space(parse('K[b] q -> q'), 'sample', count=10, seed=3)
        self.assertTrue(validity)
        self.assertEqual(validity.checked, 10)

    def test_translation_agrees_on_announcements(self):
        for text in ('[q] p', '[q] bot', '[q] (p -> r)'):
            self.assertTrue(self.engine.translation_crosscheck(parse(text)), text)


class AxiomSuiteTests(SimpleTestCase):
    def test_instance_pool_starts_with_atoms(self):
        pool = instance_pool(['p', 'q'], ['a'], depth=1)
        self.assertEqual([str(formula) for formula in pool[:3]], ['p', 'q', 'bot'])
        self.assertEqual(len(pool), len(set(pool)))

    def test_instances_are_capped(self):
        instances = schema_instances(CATALOGUE['K'], ['p', 'q'], ['a', 'b'], depth=1, limit=7)
        self.assertLessEqual(len(instances), 7)
        self.assertEqual(str(instances[0]), 'K[a] (p -> p) -> K[a] p -> K[a] p')

    def test_every_schema_holds_on_micro_universes(self):
        for universe, depth, limit in (
            (negation_universe(['p']), 2, 12),
            (negation_universe(['p'], agents=('a',), extra_groups=[ALSO_P], name='doubled-p'), 2, 6),
            (negation_universe(['p'], agents=('a',), extra_groups=[NO_P_AGAIN], name='refuted-p'), 1, 8),
        ):
            with self.subTest(universe=universe.name):
                self.assertLessEqual(universe.width, 4)
                report = axiom_suite(universe, depth=depth, limit=limit)
                self.assertTrue(report.ok, report.as_dict(universe)['failures'])
                self.assertTrue(set(report.to_frame()['schema']) >= AXIOM_SCHEMAS)

    def test_every_schema_holds_on_sampled_universes(self):
        for universe in (
            negation_universe(['p', 'q'], extra_groups=[P_GIVES_Q], name='p-gives-q'),
            negation_universe(['p', 'q'], extra_groups=[ALSO_P], name='doubled-p-q'),
        ):
            with self.subTest(universe=universe.name):
                engine = SupportEngine(universe)
                report = axiom_suite(universe, depth=1, relations_mode='sample', limit=2, engine=engine,
                                     count=100, seed=17)
                self.assertTrue(report.ok, report.as_dict(universe)['failures'])
                self.assertEqual(len(engine.relation_space('sample', 100, 17)), 100)
                self.assertTrue(set(report.to_frame()['schema']) >= AXIOM_SCHEMAS)

    def test_knowledge_transfer_fails(self):
        universe = micro_universe()
        report = axiom_suite(universe, depth=1, schemas=[KNOWLEDGE_TRANSFER], limit=5)
        self.assertFalse(report.ok)
        self.assertEqual(report.failures[0].schema, 'knowledge_transfer')
        self.assertEqual(report.failures[0].formula, 'K[a] p -> K[b] p')

    def test_no_schemas(self):
        report = axiom_suite(micro_universe(), schemas=[])
        self.assertTrue(report.ok)
        self.assertTrue(report.to_frame().empty)
        self.assertTrue(report.summary().empty)

    def test_summary_counts_instances(self):
        report = axiom_suite(micro_universe(), schemas=['T'], limit=4)
        summary = report.summary()
        self.assertEqual(summary.loc['T', 'instances'], len(report.results))
        self.assertEqual(summary.loc['T', 'valid'], len(report.results))


def shallow(formula):
    return depth(formula) <= 4


class TranslationCrosscheckTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.one_atom = SupportEngine(negation_universe(['p']))
        cls.two_atoms = SupportEngine(negation_universe(['p', 'q']))

    @settings(max_examples=60, deadline=None)
    @given(core_formulas(atoms=('p',), max_leaves=5).filter(shallow))
    def test_canonical_translation_over_every_relation_set(self, formula):
        check = self.one_atom.translation_crosscheck(formula)
        self.assertTrue(check, [(self.one_atom.universe.describe(base), relations.id)
                                for base, relations, _, _ in check.mismatches])

    @settings(max_examples=30, deadline=None)
    @given(core_formulas(atoms=('p', 'q'), max_leaves=5).filter(shallow))
    def test_canonical_translation_over_sampled_relation_sets(self, formula):
        self.assertTrue(self.two_atoms.translation_crosscheck(formula, 'sample', count=8, seed=5))

    def test_knowledge_after_announcement(self):
        for text in ('[q] K[a] p', '[p] K[b] p', '[~p] K[a] ~p', '[K[a] p] K[b] p'):
            self.assertTrue(self.two_atoms.translation_crosscheck(parse(text), 'sample', count=8, seed=5), text)

    def test_exhaustive_updates_disagree_with_the_translation(self):
        universe = micro_universe()
        engine = SupportEngine(universe, mode='exhaustive')
        with self.assertLogs('support.utils', 'WARNING'):
            check = engine.translation_crosscheck(parse('[q] K[a] p'))
        self.assertFalse(check)
        self.assertIn(universe.base_from_groups(['g1']), {base for base, _, _, _ in check.mismatches})


class SupportPropertyTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.universe = negation_universe(['p', 'q'])
        cls.engine = SupportEngine(cls.universe)
        cls.space = cls.engine.relation_space('sample', count=6, seed=11)
        cls.maximal = [base for base in cls.universe.consistent_bases if cls.universe.is_max_consistent(base)]

    @settings(max_examples=40, deadline=None)
    @given(core_formulas(atoms=('p', 'q'), max_leaves=5), st.integers(0, 5))
    def test_explosion_at_every_inconsistent_base(self, formula, index):
        plain = SupportEngine(self.universe, efq_shortcut=False)
        for base in self.universe.inconsistent_bases:
            self.assertTrue(plain.supports(base, self.space[index], formula), self.universe.describe(base))

    @settings(max_examples=40, deadline=None)
    @given(core_formulas(atoms=('p', 'q'), max_leaves=4), core_formulas(atoms=('p', 'q'), max_leaves=4),
           st.integers(0, 5))
    def test_disjunction_at_maximal_bases(self, left, right, index):
        relations = self.space[index]
        for base in self.maximal:
            self.assertTrue(self.engine.supports(base, relations, Or(left, Not(left))))
            either = self.engine.supports(base, relations, left) or self.engine.supports(base, relations, right)
            self.assertEqual(self.engine.supports(base, relations, Or(left, right)), either)

    @settings(max_examples=60, deadline=None)
    @given(core_formulas(atoms=('p', 'q'), max_leaves=4), core_formulas(atoms=('p', 'q'), max_leaves=3),
           st.integers(0, 15), st.integers(0, 15), st.integers(0, 5))
    def test_monotone_after_announcements(self, formula, announced, base, extra, index):
        relations = self.space[index]
        delta = (announced,)
        if self.engine.supports(base, relations, formula, delta=delta):
            self.assertTrue(self.engine.supports(base | extra, relations, formula, delta=delta))

    def test_maximal_bases(self):
        self.assertEqual([self.universe.describe(base) for base in self.maximal],
                         ['{has_p,has_q}', '{no_p,has_q}', '{has_p,no_q}', '{no_p,no_q}'])


class AnnouncementKnowledgeTests(SimpleTestCase):
    def test_both_sides_agree_wherever_the_announcement_holds(self):
        universe = negation_universe(['p'])
        engine = SupportEngine(universe)
        pool = instance_pool(universe.atoms, universe.agents, depth=1)[:12]
        checked = 0
        for relations in engine.relation_space():
            for base in range(universe.size):
                for announced in pool:
                    if not engine.supports(base, relations, announced):
                        continue
                    for agent in universe.agents:
                        for body in pool:
                            after, before = engine.annk_conditions(base, relations, agent, announced, body)
                            self.assertEqual(after, before, (universe.describe(base), relations.id, agent,
                                                             str(announced), str(body)))
                            checked += 1
        self.assertGreater(checked, 1000)
