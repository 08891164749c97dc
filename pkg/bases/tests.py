import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase
from hypothesis import given, settings
import hypothesis.strategies as st

from bases.loaders import load_universe, resolve_base, universe_from_data, universe_to_data
from bases.utils import (
    BaseRule, RuleGroup, Universe, axiom, closure, enumerate_subsets, enumerate_supersets, iter_submasks,
    is_consistent, naive_closure, negation_universe,
)
from bespal.exceptions import UniverseError
from scenarios.builders import card_universe


def chain_universe():
    return Universe(
        atoms=['p', 'q', 'r'],
        agents=['a'],
        fixed_rules=[BaseRule(frozenset({'p'}), 'q')],
        optional_groups=[
            RuleGroup('g1', (axiom('p'),)),
            RuleGroup('g2', (BaseRule(frozenset({'q'}), 'r'),)),
            RuleGroup('g3', (BaseRule(frozenset({'r'}), 'p'), BaseRule(frozenset({'q', 'r'}), 'q'))),
        ],
        name='chain',
    )


class BaseRuleTests(SimpleTestCase):
    def test_from_text(self):
        self.assertEqual(BaseRule.from_text('p, q => r'), BaseRule(frozenset({'p', 'q'}), 'r'))
        self.assertEqual(BaseRule.from_text('=> p'), axiom('p'))

    def test_str(self):
        self.assertEqual(str(BaseRule(frozenset({'q', 'p'}), 'r')), 'p,q => r')
        self.assertEqual(str(axiom('p')), '=> p')

    def test_missing_arrow(self):
        with self.assertRaises(UniverseError):
            BaseRule.from_text('p q')


class UniverseValidationTests(SimpleTestCase):
    def test_undeclared_atom(self):
        with self.assertRaises(UniverseError):
            Universe(['p'], optional_groups=[RuleGroup('g', (axiom('q'),))])

    def test_duplicate_group(self):
        with self.assertRaises(UniverseError):
            Universe(['p'], optional_groups=[RuleGroup('g', (axiom('p'),)), RuleGroup('g', (axiom('p'),))])

    def test_empty_group(self):
        with self.assertRaises(UniverseError):
            Universe(['p'], optional_groups=[RuleGroup('g', ())])

    def test_bad_name(self):
        with self.assertRaises(UniverseError):
            Universe(['p q'])

    def test_group_limit(self):
        groups = [RuleGroup(f"g{index}", (axiom('p'),)) for index in range(21)]
        with self.assertRaises(UniverseError):
            Universe(['p'], optional_groups=groups)


class ClosureTests(SimpleTestCase):
    def setUp(self):
        self.universe = chain_universe()

    def test_empty_base_uses_fixed_rules_only(self):
        self.assertEqual(closure(self.universe, 0), frozenset())

    def test_chaining_through_fixed_rules(self):
        base = self.universe.base_from_groups(['g1', 'g2'])
        self.assertEqual(closure(self.universe, base), frozenset({'p', 'q', 'r'}))

    def test_premises_never_derived(self):
        base = self.universe.base_from_groups(['g2', 'g3'])
        self.assertEqual(closure(self.universe, base), frozenset())

    @given(st.integers(min_value=0, max_value=7))
    def test_matches_naive_closure(self, base):
        self.assertEqual(closure(self.universe, base), naive_closure(self.universe, base))

    def test_consistency(self):
        self.assertTrue(self.universe.is_consistent(0))
        self.assertFalse(self.universe.is_consistent(self.universe.base_from_groups(['g1', 'g2'])))


class CardGameLatticeTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.universe = card_universe()

    def test_size(self):
        self.assertEqual(self.universe.size, 512)
        self.assertEqual(len(self.universe.consistent_bases), 34)
        self.assertEqual(len(self.universe.inconsistent_bases), 512 - 34)

    def test_matches_naive_closure_everywhere(self):
        atoms = frozenset(self.universe.atoms)
        consistent = 0
        for base in range(self.universe.size):
            derived = naive_closure(self.universe, base)
            self.assertEqual(closure(self.universe, base), derived, self.universe.describe(base))
            consistent += derived != atoms
        self.assertEqual(consistent, 34)

    def test_full_deals_are_maximal(self):
        maximal = [base for base in self.universe.consistent_bases if self.universe.is_max_consistent(base)]
        self.assertEqual(len(maximal), 6)
        self.assertTrue(all(bin(base).count('1') == 3 for base in maximal))

    def test_only_consistent_superset_of_a_deal_is_itself(self):
        deal = self.universe.base_from_groups(['0_a', '1_b', '2_c'])
        self.assertEqual(list(enumerate_supersets(self.universe, deal, consistent_only=True)), [deal])

    def test_two_cards_for_one_player(self):
        base = self.universe.base_from_groups(['0_a', '1_a'])
        self.assertFalse(self.universe.is_consistent(base))
        self.assertEqual(closure(self.universe, base), frozenset(self.universe.atoms))


class ClosurePropertyTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.universes = [chain_universe(), card_universe(), negation_universe(['p', 'q'])]

    def pick(self, which, *bases):
        universe = self.universes[which]
        return (universe,) + tuple(base & universe.size - 1 for base in bases)

    @given(st.integers(0, 2), st.integers(0, 511), st.integers(0, 511))
    def test_closure_is_monotone(self, which, base, extra):
        universe, base, extra = self.pick(which, base, extra)
        self.assertLessEqual(closure(universe, base), closure(universe, base | extra))

    @given(st.integers(0, 2), st.integers(0, 511), st.integers(0, 511))
    def test_inconsistency_is_upward_closed(self, which, base, extra):
        universe, base, extra = self.pick(which, base, extra)
        if not is_consistent(universe, base):
            self.assertFalse(is_consistent(universe, base | extra))

    @given(st.integers(0, 2), st.integers(0, 511))
    def test_closure_is_a_fixpoint(self, which, base):
        universe, base = self.pick(which, base)
        derived = closure(universe, base)
        for rule in universe.rules_of(base):
            if rule.premises <= derived:
                self.assertIn(rule.conclusion, derived, str(rule))

    def test_negation_groups_clash_only_with_their_atom(self):
        universe = self.universes[2]
        self.assertEqual(universe.atoms, ('p', 'q', 'spare'))
        clashes = [universe.describe(base) for base in universe.inconsistent_bases
                   if bin(base).count('1') == 2]
        self.assertEqual(clashes, ['{has_p,no_p}', '{has_q,no_q}'])
        self.assertEqual(len(universe.consistent_bases), 9)


class LatticeTests(SimpleTestCase):
    def setUp(self):
        self.universe = chain_universe()

    def test_submasks_in_increasing_order(self):
        self.assertEqual(list(iter_submasks(0b101)), [0b000, 0b001, 0b100, 0b101])

    def test_supersets_and_subsets(self):
        base = self.universe.base_from_groups(['g2'])
        self.assertEqual(sorted(enumerate_supersets(self.universe, base)), [0b010, 0b011, 0b110, 0b111])
        self.assertEqual(sorted(enumerate_subsets(self.universe, base)), [0, base])

    def test_superset_matrix(self):
        contains = self.universe.superset_matrix
        self.assertTrue(contains[0b111, 0b010])
        self.assertFalse(contains[0b010, 0b111])
        self.assertTrue(contains[0b010, 0])

    def test_check_base(self):
        with self.assertRaises(UniverseError):
            self.universe.check_base(8)

    def test_describe(self):
        self.assertEqual(self.universe.describe(0b101), '{g1,g3}')
        self.assertEqual(self.universe.describe(0), '{}')


class LoaderTests(SimpleTestCase):
    document = {
        'name': 'tiny',
        'atoms': ['p', 'q'],
        'agents': ['a'],
        'fixed_rules': ['p => q'],
        'optional_groups': [{'name': 'g1', 'rules': ['=> p']}, {'name': 'g2', 'rules': [{'conclusion': 'q'}]}],
    }

    def test_from_mapping(self):
        universe = load_universe(self.document)
        self.assertEqual(universe.name, 'tiny')
        self.assertEqual(closure(universe, 1), frozenset({'p', 'q'}))

    def test_from_file(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / 'tiny.json'
            path.write_text(json.dumps(self.document))
            universe = load_universe(path)
        self.assertEqual(universe.atoms, ('p', 'q'))

    def test_round_trip_through_data(self):
        universe = universe_from_data(self.document)
        again = universe_from_data(universe_to_data(universe))
        self.assertEqual(again.groups, universe.groups)
        self.assertEqual(again.fixed_rules, universe.fixed_rules)

    def test_missing_atoms(self):
        with self.assertRaises(UniverseError):
            universe_from_data({'optional_groups': []})

    def test_missing_file(self):
        with self.assertRaises(UniverseError):
            load_universe('/nonexistent/universe.yaml')

    def test_resolve_base(self):
        universe = universe_from_data(self.document)
        self.assertEqual(resolve_base(universe, '{}'), 0)
        self.assertEqual(resolve_base(universe, 'g1, g2'), 3)
        self.assertEqual(resolve_base(universe, ['g2']), 2)
        self.assertEqual(resolve_base(universe, 'top', {'top': 3}), 3)
        with self.assertRaises(UniverseError):
            resolve_base(universe, 'g9')
