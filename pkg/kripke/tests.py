from django.test import SimpleTestCase
from hypothesis import given, settings

from bespal.exceptions import KripkeModelError
from formulas.nodes import And, Announce
from formulas.parser import parse
from formulas.strategies import core_formulas, depth, propositional_formulas
from formulas.utils import translate
from kripke.strategies import s5_models
from kripke.utils import (
    KripkeModel, equivalence_closure, evaluate, is_s5_model, model_from_data, restrict, valid_in_model,
)
from scenarios.builders import MUDDY_ANNOUNCEMENT, NOBODY_KNOWS, build_card_game, muddy_model
from support.axioms import CLASSICAL, PAL, RULES, S5, kripke_axiom_suite


class S5CheckTests(SimpleTestCase):
    def test_card_game_model(self):
        self.assertTrue(is_s5_model(build_card_game().kripke_model).ok)

    def test_missing_loop(self):
        model = KripkeModel(worlds=['u', 'v'], relations={'a': [('u', 'u')]}, valuation={})
        check = is_s5_model(model)
        self.assertFalse(check.ok)
        self.assertEqual((check.agent, check.prop, check.witness), ('a', 'reflexive', ('v',)))

    def test_not_euclidean(self):
        model = KripkeModel(worlds=['u', 'v'], relations={'a': [('u', 'u'), ('v', 'v'), ('u', 'v')]},
                            valuation={})
        check = is_s5_model(model)
        self.assertEqual((check.prop, check.witness), ('euclidean', ('u', 'v', 'u')))

    def test_announcement_needs_s5(self):
        model = KripkeModel(worlds=['u'], relations={'a': []}, valuation={'p': {'u'}})
        with self.assertRaises(KripkeModelError):
            evaluate(model, 'u', parse('[p] p'))

    def test_agent_without_relation(self):
        model = KripkeModel(worlds=['u'], relations={'a': [('u', 'u')]}, valuation={'p': {'u'}})
        self.assertTrue(evaluate(model, 'u', parse('K[a] p')))
        with self.assertRaises(KripkeModelError):
            evaluate(model, 'u', parse('K[b] p'))
        with self.assertRaises(KripkeModelError):
            evaluate(model, 'u', parse('[p] K[b] p'))

    def test_undeclared_world(self):
        with self.assertRaises(KripkeModelError):
            KripkeModel(worlds=['u'], relations={'a': [('u', 'x')]}, valuation={})


class CardGameModelTests(SimpleTestCase):
    def setUp(self):
        self.model = build_card_game().kripke_model

    def test_restriction_keeps_four_deals(self):
        restricted = restrict(self.model, parse('~1_a'))
        self.assertEqual(sorted(restricted.worlds), ['012', '021', '201', '210'])

    def test_c_learns_the_deal(self):
        goal = parse('K[c] (0_a & 1_b & 2_c)')
        self.assertFalse(evaluate(self.model, '012', goal))
        self.assertTrue(evaluate(self.model, '012', parse('[~1_a] K[c] (0_a & 1_b & 2_c)')))

    def test_a_does_not(self):
        self.assertFalse(evaluate(self.model, '012', parse('[~1_a] K[a] (1_b & 2_c)')))

    def test_unknown_world(self):
        with self.assertRaises(KripkeModelError):
            evaluate(self.model, '111', parse('0_a'))


class MuddyModelTests(SimpleTestCase):
    def setUp(self):
        self.model = muddy_model()
        self.prefix = f"[{MUDDY_ANNOUNCEMENT}] [{NOBODY_KNOWS}] "

    def test_nobody_knows_at_first(self):
        self.assertFalse(evaluate(self.model, 'ab', parse('K[a] m_a')))
        self.assertTrue(evaluate(self.model, 'ab', parse(NOBODY_KNOWS)))

    def test_muddy_children_know_after_two_announcements(self):
        self.assertTrue(evaluate(self.model, 'ab', parse(self.prefix + '(K[a] m_a & K[b] m_b)')))

    def test_clean_child_does_not(self):
        self.assertFalse(evaluate(self.model, 'ab', parse(self.prefix + 'K[c] m_c')))

    def test_extra_valuation(self):
        model = muddy_model({'m_a': {'none'}})
        self.assertFalse(evaluate(model, 'ab', parse(self.prefix + 'K[a] m_a')))


class LoaderTests(SimpleTestCase):
    def test_closure_of_declared_pairs(self):
        model = model_from_data({
            'worlds': ['u', 'v', 'w'],
            'relations': {'a': [['u', 'v'], ['v', 'w']]},
            'valuation': {'p': ['u']},
            's5_closure': True,
        })
        self.assertTrue(is_s5_model(model).ok)
        self.assertEqual(len(model.relations['a']), 9)

    def test_declared_agents_need_relations(self):
        document = {'worlds': ['u'], 'agents': ['a', 'b'], 'relations': {'a': [['u', 'u']]}}
        with self.assertRaises(KripkeModelError) as caught:
            model_from_data(document)
        self.assertIn('agents without a relation: b', str(caught.exception))
        with self.assertRaises(KripkeModelError):
            model_from_data({'worlds': ['u'], 'agents': [], 'relations': {'a': [['u', 'u']]}})
        model = model_from_data(dict(document, relations={'a': [['u', 'u']], 'b': [['u', 'u']]}))
        self.assertEqual(sorted(model.relations), ['a', 'b'])

    def test_non_pair(self):
        with self.assertRaises(KripkeModelError):
            model_from_data({'worlds': ['u'], 'relations': {'a': [['u']]}})

    def test_missing_worlds(self):
        with self.assertRaises(KripkeModelError):
            model_from_data({'relations': {}})

    def test_equivalence_closure(self):
        pairs = equivalence_closure(['u', 'v', 'w'], [('u', 'v')])
        self.assertIn(('v', 'u'), pairs)
        self.assertIn(('w', 'w'), pairs)
        self.assertNotIn(('u', 'w'), pairs)


class TranslationTests(SimpleTestCase):
    @settings(max_examples=150, deadline=None)
    @given(s5_models(), core_formulas(max_leaves=5).filter(lambda formula: depth(formula) <= 4))
    def test_translation_preserves_truth(self, model, formula):
        translated = translate(formula)
        for world in model.worlds:
            self.assertEqual(evaluate(model, world, formula), evaluate(model, world, translated))

    @settings(max_examples=50, deadline=None)
    @given(s5_models())
    def test_truth_axiom(self, model):
        self.assertTrue(valid_in_model(model, parse('K[a] p -> p')))


class AnnouncementPropertyTests(SimpleTestCase):
    @settings(max_examples=100, deadline=None)
    @given(s5_models(), propositional_formulas(max_leaves=4))
    def test_restriction_is_idempotent(self, model, formula):
        once = restrict(model, formula)
        twice = restrict(once, formula)
        self.assertEqual(twice.worlds, once.worlds)
        self.assertEqual(twice.relations, once.relations)

    @settings(max_examples=100, deadline=None)
    @given(s5_models(), core_formulas(max_leaves=3), core_formulas(max_leaves=3), core_formulas(max_leaves=3))
    def test_nested_announcements_compose(self, model, first, second, body):
        nested = Announce(first, Announce(second, body))
        composed = Announce(And(first, Announce(first, second)), body)
        for world in model.worlds:
            self.assertEqual(evaluate(model, world, nested), evaluate(model, world, composed), world)


class KripkeAxiomSuiteTests(SimpleTestCase):
    def test_catalogue_is_valid_on_s5_models(self):
        models = [build_card_game().kripke_model, muddy_model()]
        report = kripke_axiom_suite(models, ['0_a', 'm_a'], ['a', 'b'], depth=1,
                                    schemas=list(CLASSICAL + S5 + PAL + RULES), limit=8)
        self.assertTrue(report.ok, report.failures)
        self.assertTrue(report.results)
