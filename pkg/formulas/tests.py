from django.test import SimpleTestCase
from hypothesis import given, settings

from bespal.exceptions import FormulaSyntaxError
from formulas.nodes import (
    Announce, And, Atomic, BOTTOM, Implies, Knows, Not, Or, has_announcement, subformulas,
)
from formulas.parser import parse
from formulas.strategies import core_formulas, formulas
from formulas.utils import complexity, compose_delta, desugar, render, translate

p, q, r = Atomic('p'), Atomic('q'), Atomic('r')


class ParseTests(SimpleTestCase):
    def test_bottom(self):
        self.assertEqual(parse('bot'), BOTTOM)

    def test_card_game_announcement(self):
        expected = Announce(
            Not(Atomic('1_a')),
            Knows('c', And(Atomic('0_a'), And(Atomic('1_b'), Atomic('2_c')))),
        )
        self.assertEqual(parse('[~1_a] K[c] (0_a & 1_b & 2_c)'), expected)

    def test_implication_is_right_associative(self):
        self.assertEqual(parse('p -> q -> r'), Implies(p, Implies(q, r)))

    def test_precedence(self):
        self.assertEqual(parse('~p & q | r -> p'), Implies(Or(And(Not(p), q), r), p))

    def test_prefix_operators_bind_tightly(self):
        self.assertEqual(parse('[p] q -> r'), Implies(Announce(p, q), r))
        self.assertEqual(parse('K[a] p & q'), And(Knows('a', p), q))

    def test_atoms_starting_with_keyword_letters(self):
        self.assertEqual(parse('Kx & bottom'), And(Atomic('Kx'), Atomic('bottom')))

    def test_syntax_error_reports_offset(self):
        with self.assertRaises(FormulaSyntaxError) as caught:
            parse('p & & q')
        self.assertEqual(caught.exception.offset, 4)

    def test_syntax_error_at_end(self):
        with self.assertRaises(FormulaSyntaxError) as caught:
            parse('p ->')
        self.assertEqual(caught.exception.offset, 4)
        self.assertTrue(caught.exception.expected)

    def test_syntax_error_is_value_error(self):
        with self.assertRaises(ValueError):
            parse('p $ q')


class RenderTests(SimpleTestCase):
    def test_bottom(self):
        self.assertEqual(render(BOTTOM), 'bot')

    def test_right_nested_implication(self):
        self.assertEqual(render(Implies(p, Implies(q, r))), 'p -> q -> r')
        self.assertEqual(render(Implies(Implies(p, q), r)), '(p -> q) -> r')

    def test_announcement(self):
        self.assertEqual(render(Announce(Not(Atomic('1_a')), Knows('c', p))), '[~1_a] K[c] p')

    def test_knowledge_of_implication(self):
        self.assertEqual(render(Implies(q, Knows('a', Implies(q, p)))), 'q -> K[a] (q -> p)')

    @given(formulas())
    def test_parse_inverts_render(self, formula):
        self.assertEqual(parse(render(formula)), formula)


class DesugarTests(SimpleTestCase):
    def test_negation(self):
        self.assertEqual(desugar(Not(p)), Implies(p, BOTTOM))

    def test_conjunction(self):
        expected = Implies(
            Implies(Implies(Implies(p, BOTTOM), BOTTOM), Implies(q, BOTTOM)),
            BOTTOM,
        )
        self.assertEqual(desugar(And(p, q)), expected)

    def test_disjunction(self):
        self.assertEqual(desugar(Or(p, q)), Implies(Implies(p, BOTTOM), q))

    @given(formulas())
    def test_idempotent(self, formula):
        once = desugar(formula)
        self.assertEqual(desugar(once), once)
        self.assertTrue(all(node.is_core for node in subformulas(once)))


class ComplexityTests(SimpleTestCase):
    def test_atom(self):
        self.assertEqual(complexity(p), 1)

    def test_announcement(self):
        self.assertEqual(complexity(Announce(p, q)), 3)

    def test_negation(self):
        self.assertEqual(complexity(Not(p)), 2)

    @given(formulas())
    def test_subformulas_are_no_more_complex(self, formula):
        whole = complexity(formula)
        for part in subformulas(desugar(formula)):
            self.assertLessEqual(complexity(part), whole)


class TranslateTests(SimpleTestCase):
    def test_atom_is_unchanged(self):
        self.assertEqual(translate(p), p)

    def test_announcement_and_knowledge(self):
        self.assertEqual(translate(Announce(q, Knows('a', p))), Implies(q, Knows('a', Implies(q, p))))

    def test_announcement_and_bottom(self):
        self.assertEqual(translate(Announce(q, BOTTOM)), Implies(q, BOTTOM))

    def test_renders_like_the_command_line(self):
        self.assertEqual(render(translate(parse('[q] K[a] p'))), 'q -> K[a] (q -> p)')

    @settings(max_examples=200, deadline=None)
    @given(core_formulas(max_leaves=8))
    def test_every_rewrite_lowers_complexity(self, formula):
        trace = []
        result = translate(formula, trace)
        self.assertFalse(has_announcement(result))
        for _, _, before, after in trace:
            self.assertLess(after, before)


class ComposeDeltaTests(SimpleTestCase):
    def test_empty_sequence_is_a_tautology(self):
        self.assertEqual(compose_delta([]), Implies(BOTTOM, BOTTOM))

    def test_single_announcement(self):
        self.assertEqual(compose_delta([p]), p)

    def test_pair(self):
        self.assertEqual(compose_delta([p, q]), And(p, Announce(p, q)))

    def test_triple_nests_to_the_right(self):
        self.assertEqual(compose_delta([p, q, r]), And(p, Announce(p, And(q, Announce(q, r)))))
