import numpy as np
from django.test import SimpleTestCase
from hypothesis import given
import hypothesis.strategies as st

from bases.utils import RuleGroup, Universe, axiom
from bespal.exceptions import BudgetExceeded, SaturationError, UniverseError
from relations.loaders import core_edges_from_data, relations_from_data
from relations.utils import (
    CONDITIONS, AgentRelationSet, bell_number, check_all, check_modal_conditions, conditions_frame,
    equivalence_classes, exhaustive_relation_sets, modal_partitions, reachable_set, relation_domain,
    relation_sets, restricted_growth_strings, rule_union, saturate_core_relation, stabilize_partition,
)
from scenarios.builders import build_card_game, build_muddy, build_muddy_counterexample


def axiom_universe(count, agents=('a', 'b')):
    """One axiom group per atom plus an atom no base derives, so every base is consistent"""
    atoms = [f"p{index}" for index in range(1, count + 1)]
    groups = [RuleGroup(f"g{index}", (axiom(atom),)) for index, atom in enumerate(atoms, start=1)]
    return Universe(atoms + ['spare'], agents, (), groups, name=f"axioms-{count}")


class ConditionTests(SimpleTestCase):
    def test_identity_satisfies_everything(self):
        universe = build_card_game().universe
        reports = check_all(universe, AgentRelationSet.identity(universe))
        self.assertTrue(all(report.ok for report in reports.values()))

    def test_edge_into_inconsistent_base(self):
        universe = build_card_game().universe
        deal = universe.base_from_groups(['0_a', '1_b', '2_c'])
        clash = universe.base_from_groups(['0_a', '1_a'])
        pairs = [(base, base) for base in range(universe.size)] + [(deal, clash)]
        relations = AgentRelationSet.from_pairs(universe, {'a': pairs})
        report = check_modal_conditions(universe, relations, 'a')
        self.assertFalse(report.holds('b'))
        self.assertEqual(report.verdicts['b'].witness, (deal, clash))
        self.assertTrue(report.holds('a'))

    def test_restriction_condition_fails_without_matching_subset(self):
        universe = axiom_universe(3)
        upper_left = universe.base_from_groups(['g1', 'g3'])
        upper_right = universe.base_from_groups(['g2', 'g3'])
        labels = np.arange(universe.size)
        labels[upper_right] = labels[upper_left]
        relations = AgentRelationSet.from_labels(universe, {'a': labels})
        report = check_modal_conditions(universe, relations, 'a')
        self.assertTrue(report.holds('a', 'b', 'c', 'reflexive', 'transitive', 'euclidean'))
        self.assertFalse(report.holds('d'))
        self.assertEqual(report.verdicts['d'].witness,
                         (upper_left, upper_right, universe.base_from_groups(['g1'])))
        self.assertIn('condition (d)', report.describe_failure(universe))

    def test_missing_loop(self):
        universe = axiom_universe(1, agents=('a',))
        relations = AgentRelationSet.from_pairs(universe, {'a': [(0, 0)]})
        report = check_modal_conditions(universe, relations, 'a')
        self.assertEqual(report.verdicts['reflexive'].witness, (1,))

    def test_frame_has_a_row_per_condition(self):
        universe = axiom_universe(2)
        reports = check_all(universe, AgentRelationSet.identity(universe)).values()
        frame = conditions_frame(reports, universe)
        self.assertEqual(len(frame), len(CONDITIONS) * 2)
        self.assertTrue(frame['holds'].all())


class RelationSetTests(SimpleTestCase):
    def setUp(self):
        self.universe = axiom_universe(2)

    def test_reachability_chains_agents(self):
        relations = AgentRelationSet.from_pairs(self.universe, {'a': [(0, 1)], 'b': [(1, 2)]})
        self.assertEqual(reachable_set(self.universe, relations, 0), frozenset({0, 1, 2}))
        self.assertEqual(reachable_set(self.universe, relations, 3), frozenset({3}))

    def test_domain_and_rule_union(self):
        relations = AgentRelationSet.from_pairs(self.universe, {'a': [(0, 1)]})
        self.assertEqual(relation_domain(relations), frozenset({0, 1}))
        self.assertEqual(rule_union(self.universe, relations), frozenset({axiom('p1')}))

    def test_id_depends_on_edges(self):
        identity = AgentRelationSet.identity(self.universe)
        self.assertEqual(identity.id, AgentRelationSet.identity(self.universe).id)
        self.assertNotEqual(identity.id, identity.without_edge('a', 0, 0).id)

    def test_matrices_are_read_only(self):
        identity = AgentRelationSet.identity(self.universe)
        with self.assertRaises(ValueError):
            identity.matrices['a'][0, 1] = True

    def test_labels(self):
        labels = np.array([0, 0, 2, -1])
        relations = AgentRelationSet.from_labels(self.universe, {'a': labels})
        self.assertEqual(relations.labels('a').tolist(), [0, 0, 2, -1])
        self.assertEqual(relations.successors('a', 3), [])

    def test_equivalence_classes(self):
        classes = equivalence_classes([1, 2, 3, 5], [(5, 2), (3, 5)])
        self.assertEqual(classes, {1: 1, 2: 2, 3: 2, 5: 2})


edge_lists = st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7)), max_size=10)


class ReachabilityPropertyTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.universe = axiom_universe(3)

    @given(edge_lists, edge_lists, st.integers(0, 7))
    def test_more_edges_reach_more(self, first, second, base):
        smaller = AgentRelationSet.from_pairs(self.universe, {'a': first})
        larger = AgentRelationSet.from_pairs(self.universe, {'a': first + second, 'b': second})
        self.assertLessEqual(reachable_set(self.universe, smaller, base),
                             reachable_set(self.universe, larger, base))

    @given(edge_lists, st.integers(0, 7), st.integers(0, 7))
    def test_symmetric_edges_reach_both_ways(self, pairs, left, right):
        pairs = pairs + [(target, source) for source, target in pairs]
        relations = AgentRelationSet.from_pairs(self.universe, {'a': pairs})
        self.assertEqual(right in reachable_set(self.universe, relations, left),
                         left in reachable_set(self.universe, relations, right))

    @given(edge_lists, st.integers(0, 7))
    def test_reached_set_is_closed(self, pairs, base):
        relations = AgentRelationSet.from_pairs(self.universe, {'a': pairs})
        reached = reachable_set(self.universe, relations, base)
        self.assertIn(base, reached)
        for source, target in pairs:
            if source in reached:
                self.assertIn(target, reached)


class SaturationTests(SimpleTestCase):
    def test_card_game_keeps_the_core(self):
        spec = build_card_game()
        relations = spec.relations()
        self.assertTrue(relations.s5_verified)
        deals = set(spec.named_bases.values())
        for agent, pairs in spec.core_edges().items():
            self.assertEqual(relations.links(agent, deals), frozenset(frozenset(pair) for pair in pairs))

    def test_muddy_children(self):
        spec = build_muddy()
        relations = spec.relations()
        self.assertTrue(all(report.ok for report in check_all(spec.universe, relations).values()))
        self.assertTrue(relations.related('a', spec.named_bases['B_b'], spec.named_bases['B_ab']))
        self.assertFalse(relations.related('a', spec.named_bases['B_b'], spec.named_bases['B_bc']))

    def test_counterexample(self):
        spec = build_muddy_counterexample()
        self.assertTrue(spec.relations().s5_verified)

    def test_mixed_edge(self):
        universe = build_card_game().universe
        deal = universe.base_from_groups(['0_a', '1_b', '2_c'])
        clash = universe.base_from_groups(['0_a', '1_a'])
        with self.assertRaises(SaturationError) as caught:
            saturate_core_relation(universe, {'a': [(deal, clash)]})
        self.assertFalse(caught.exception.report.holds('b'))

    def test_stable_partition_is_modal(self):
        universe = axiom_universe(3)
        labels = stabilize_partition(universe, [base % 3 for base in range(universe.size)])
        relations = AgentRelationSet.from_labels(universe, {'a': labels})
        self.assertTrue(check_modal_conditions(universe, relations, 'a').ok)


class EnumerationTests(SimpleTestCase):
    def test_bell_numbers(self):
        self.assertEqual([bell_number(count) for count in range(6)], [1, 1, 2, 5, 15, 52])
        self.assertEqual(len(list(restricted_growth_strings(4))), 15)

    def test_single_group_has_two_modal_relations(self):
        universe = axiom_universe(1, agents=('a',))
        self.assertEqual(len(modal_partitions(universe, 'a')), 2)
        self.assertEqual(len(list(exhaustive_relation_sets(universe))), 2)

    def test_every_enumerated_set_is_modal(self):
        universe = axiom_universe(2)
        for relations in exhaustive_relation_sets(universe):
            self.assertTrue(all(report.ok for report in check_all(universe, relations).values()))

    def test_too_many_groups(self):
        with self.assertRaises(BudgetExceeded) as caught:
            list(exhaustive_relation_sets(axiom_universe(5)))
        self.assertIn('--sample', str(caught.exception))

    def test_partition_budget_points_to_sampling(self):
        with self.assertRaises(BudgetExceeded) as caught:
            modal_partitions(axiom_universe(4, agents=('a',)), 'a')
        self.assertIn('about 10 consistent bases', str(caught.exception))

    def test_too_many_agents(self):
        with self.assertRaises(BudgetExceeded):
            list(exhaustive_relation_sets(axiom_universe(1, agents=('a', 'b', 'c'))))

    def test_budget(self):
        with self.assertRaises(BudgetExceeded):
            list(exhaustive_relation_sets(axiom_universe(3), budget=10))

    def test_empty_sample(self):
        self.assertEqual(list(relation_sets(axiom_universe(3), 'sample', count=0, seed=1)), [])

    def test_sample_is_seeded(self):
        universe = axiom_universe(3)
        first = [relations.id for relations in relation_sets(universe, 'sample', count=5, seed=7)]
        second = [relations.id for relations in relation_sets(universe, 'sample', count=5, seed=7)]
        self.assertEqual(first, second)
        self.assertEqual(len(first), 5)

    def test_unknown_mode(self):
        with self.assertRaises(ValueError):
            relation_sets(axiom_universe(1), 'random')


class LoaderTests(SimpleTestCase):
    def setUp(self):
        self.universe = axiom_universe(2)

    def test_named_bases_in_document(self):
        data = {
            'named_bases': {'left': ['g1'], 'right': 'g2'},
            'relations': [{'agent': 'a', 'core_edges': [['left', 'right']]}],
        }
        self.assertEqual(core_edges_from_data(self.universe, data), {'a': [(1, 2)]})

    def test_saturates_by_default(self):
        relations = relations_from_data(self.universe, [{'agent': 'a', 'core_edges': [['g1', 'g2']]}])
        self.assertTrue(relations.s5_verified)
        self.assertTrue(relations.related('a', 1, 2))
        self.assertTrue(relations.related('b', 3, 3))

    def test_raw_relations(self):
        data = {'raw': True, 'relations': [{'agent': 'a', 'core_edges': [['{}', 'g1']]}]}
        relations = relations_from_data(self.universe, data)
        self.assertEqual(relations.edges('a'), frozenset({(0, 1)}))
        self.assertEqual(relations.edges('b'), frozenset())
        self.assertFalse(check_modal_conditions(self.universe, relations, 'a').ok)

    def test_unknown_agent(self):
        with self.assertRaises(UniverseError):
            core_edges_from_data(self.universe, [{'agent': 'z', 'core_edges': []}])

    def test_bad_pair(self):
        with self.assertRaises(UniverseError):
            core_edges_from_data(self.universe, [{'agent': 'a', 'core_edges': [['g1']]}])
