import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, override_settings
from hypothesis import given, settings

from bases.utils import RuleGroup, Universe, axiom, negation_universe
from bespal.exceptions import UpdatePreconditionError, UpdateVerificationError
from formulas.nodes import TOP, And, Announce
from formulas.parser import parse
from formulas.strategies import core_formulas
from formulas.utils import compose_delta
from relations.utils import FRAME_CONDITIONS, AgentRelationSet
from scenarios.builders import (
    MUDDY_ANNOUNCEMENT, NOBODY_KNOWS, build_card_game, build_muddy, build_muddy_counterexample,
)
from support.axioms import instance_pool
from support.utils import SupportEngine
from updates.export import export_stages, relation_to_dot, stages_to_data
from updates.utils import (
    STAGES, canonical_update, effective_updates, is_effective_update, sequential_update,
)


def micro_universe():
    groups = [RuleGroup('g1', (axiom('p'),)), RuleGroup('g2', (axiom('q'),))]
    return Universe(['p', 'q', 'r'], ['a', 'b'], (), groups, name='micro')


def links_by_name(spec, relations):
    names = spec.base_names
    return {
        agent: {frozenset(names[base] for base in link) for link in relations.links(agent)}
        for agent in relations.agents
    }


def linked(*pairs):
    """Links written as 'b ab' for B_b and B_ab"""
    return {frozenset(f"B_{name}" for name in pair.split()) for pair in pairs}


class CardGameUpdateTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.spec = build_card_game()
        cls.universe = cls.spec.universe
        cls.relations = cls.spec.relations()
        cls.engine = SupportEngine(cls.universe)
        cls.actual = cls.spec.named_bases['B_012']
        cls.stages = canonical_update(cls.universe, cls.relations, parse('~1_a'), cls.actual, cls.engine)

    def test_announcement_removes_deals_where_a_holds_one(self):
        kept = {self.spec.base_names[base] for base in self.stages.core}
        self.assertEqual(kept, {'B_012', 'B_021', 'B_201', 'B_210'})

    def test_c_keeps_a_single_link(self):
        self.assertEqual(links_by_name(self.spec, self.stages.s_star)['c'], {frozenset({'B_021', 'B_201'})})

    def test_completion_is_an_equivalence_but_not_liftable_for_c(self):
        report = self.stages.reports['c']
        self.assertTrue(report.holds(*FRAME_CONDITIONS))
        self.assertFalse(report.holds('d'))
        self.assertFalse(self.stages.r.s5_verified)

    def test_verify_warns_unless_strict(self):
        with self.assertLogs('updates.utils', 'WARNING'):
            self.stages.verify(strict=False)
        with self.assertRaises(UpdateVerificationError) as caught:
            self.stages.verify(strict=True)
        self.assertTrue(caught.exception.reports)

    def test_precondition(self):
        with self.assertRaises(UpdatePreconditionError):
            canonical_update(self.universe, self.relations, parse('~1_a'), self.spec.named_bases['B_102'],
                             self.engine)

    def test_completion_fails_restriction_for_b_and_c(self):
        names = self.spec.named_bases
        two_a = self.universe.base_from_groups(['2_a'])
        self.assertEqual(self.stages.verification.failures, (
            ('b', 'd', (names['B_210'], names['B_012'], two_a)),
            ('c', 'd', (names['B_201'], names['B_021'], two_a)),
        ))
        self.assertTrue(self.stages.verification.frame_ok)

    def test_canonical_result_is_not_effective(self):
        check = is_effective_update(self.universe, self.relations, self.stages.r, parse('~1_a'),
                                    self.actual, self.engine)
        self.assertFalse(check)
        names = self.spec.named_bases
        self.assertEqual((check.reason, check.agent, check.witness), (
            'condition (d) fails', 'b',
            (names['B_210'], names['B_012'], self.universe.base_from_groups(['2_a'])),
        ))

    def test_original_relation_reaches_a_refuting_deal(self):
        check = is_effective_update(self.universe, self.relations, self.relations, parse('~1_a'),
                                    self.actual, self.engine)
        self.assertFalse(check)
        self.assertEqual(check.reason, 'reachable base refutes the announcement')
        self.assertEqual(check.witness[1], self.spec.named_bases['B_120'])

    def test_dropping_a_pinned_edge(self):
        b012, b021 = self.spec.named_bases['B_012'], self.spec.named_bases['B_021']
        damaged = self.stages.r.without_edge('a', b012, b021)
        check = is_effective_update(self.universe, self.relations, damaged, parse('~1_a'), self.actual,
                                    self.engine)
        self.assertFalse(check)
        self.assertEqual((check.reason, check.agent, check.witness), ('pinned edge missing', 'a', (b012, b021)))

    def test_composed_update_matches_sequential_updates(self):
        announcements = [parse('~1_a'), parse('K[c] (0_a & 1_b & 2_c)')]
        history = sequential_update(self.universe, self.relations, announcements, self.actual, self.engine)
        composed = canonical_update(self.universe, self.relations, compose_delta(announcements), self.actual,
                                    self.engine)
        self.assertTrue(composed.s_star.same_edges(history[-1].s_star))
        self.assertEqual(composed.core, frozenset({self.actual}))


class MuddyUpdateTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.spec = build_muddy()
        cls.universe = cls.spec.universe
        cls.relations = cls.spec.relations()
        cls.engine = SupportEngine(cls.universe)
        cls.actual = cls.spec.named_bases['B_ab']
        cls.announcements = [parse(MUDDY_ANNOUNCEMENT), parse(NOBODY_KNOWS)]

    def test_first_announcement_drops_the_clean_state(self):
        stages = canonical_update(self.universe, self.relations, self.announcements[0], self.actual, self.engine)
        self.assertNotIn(self.spec.named_bases['B_none'], stages.core)
        self.assertEqual(len(stages.core), 7)
        self.assertEqual(sum(len(links) for links in links_by_name(self.spec, stages.s_star).values()), 9)

    def test_both_announcements(self):
        stages = canonical_update(self.universe, self.relations, compose_delta(self.announcements), self.actual,
                                  self.engine)
        self.assertEqual({self.spec.base_names[base] for base in stages.core}, {'B_ab', 'B_ac', 'B_bc', 'B_abc'})
        self.assertEqual(links_by_name(self.spec, stages.s_star), {
            'a': {frozenset({'B_bc', 'B_abc'})},
            'b': {frozenset({'B_ac', 'B_abc'})},
            'c': {frozenset({'B_ab', 'B_abc'})},
        })

    def test_composed_update_matches_sequential_updates(self):
        history = sequential_update(self.universe, self.relations, self.announcements, self.actual, self.engine)
        composed = canonical_update(self.universe, self.relations, compose_delta(self.announcements),
                                    self.actual, self.engine)
        self.assertEqual(len(history), 2)
        self.assertTrue(composed.s_star.same_edges(history[-1].s_star))

    def test_tautology_keeps_the_reachable_relation(self):
        stages = canonical_update(self.universe, self.relations, TOP, self.actual, self.engine)
        self.assertEqual(stages.core, stages.reach)
        self.assertTrue(stages.s_star.same_edges(stages.s))

    def test_empty_announcement_sequence(self):
        updates = list(effective_updates(self.universe, self.relations, [], self.actual, engine=self.engine))
        self.assertEqual(len(updates), 1)

    def test_verified_by_default(self):
        stages = canonical_update(self.universe, self.relations, self.announcements[0], self.actual,
                                  SupportEngine(self.universe))
        self.assertIn('verification', stages.__dict__)
        self.assertTrue(stages.verification.frame_ok)

    @override_settings(BESPAL={'VERIFY_UPDATES': False})
    def test_verification_can_be_switched_off(self):
        stages = canonical_update(self.universe, self.relations, self.announcements[0], self.actual,
                                  SupportEngine(self.universe))
        self.assertNotIn('verification', stages.__dict__)
        self.assertNotIn('r', stages.__dict__)

    def test_first_announcement_links(self):
        stages = canonical_update(self.universe, self.relations, self.announcements[0], self.actual, self.engine)
        self.assertEqual(links_by_name(self.spec, stages.s_star), {
            'a': linked('b ab', 'c ac', 'bc abc'),
            'b': linked('a ab', 'c bc', 'ac abc'),
            'c': linked('a ac', 'b bc', 'ab abc'),
        })


class CounterexampleUpdateTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.spec = build_muddy_counterexample()
        cls.stages = canonical_update(cls.spec.universe, cls.spec.relations(), parse(MUDDY_ANNOUNCEMENT),
                                      cls.spec.named_bases['B_ab'])

    def test_marker_keeps_the_clean_state(self):
        self.assertIn(self.spec.named_bases['B_none'], self.stages.core)
        self.assertEqual(len(self.stages.core), 8)

    def test_announcement_keeps_every_link(self):
        expected = {
            'a': linked('none a', 'b ab', 'c ac', 'bc abc'),
            'b': linked('none b', 'a ab', 'c bc', 'ac abc'),
            'c': linked('none c', 'a ac', 'b bc', 'ab abc'),
        }
        self.assertEqual(links_by_name(self.spec, self.stages.s_announced), expected)
        self.assertEqual(links_by_name(self.spec, self.stages.s_star), expected)



class SampledUpdateTests(SimpleTestCase):
    """Canonical updates over negation universes, where only the lifting conditions may fail"""

    def assertLiftingWitness(self, universe, relations, agent, name, witness):
        matrix = relations.matrices[agent]
        source, target, moved = witness
        self.assertTrue(matrix[source, target])
        if name == 'c':
            self.assertEqual(moved & source, source)
            self.assertTrue(universe.consistency[moved])
            candidates = universe.supersets(target)
        else:
            self.assertEqual(name, 'd')
            self.assertEqual(moved & source, moved)
            self.assertTrue(universe.consistency[target])
            candidates = universe.subsets(target)
        self.assertFalse(any(matrix[moved, other] for other in candidates))

    def assertSymmetric(self, relations):
        for matrix in relations.matrices.values():
            self.assertTrue(np.array_equal(matrix, matrix.T))

    def test_five_hundred_instances(self):
        instances = 0
        for universe, relations_mode, count in (
            (negation_universe(['p']), 'exhaustive', None),
            (negation_universe(['p', 'q']), 'sample', 6),
        ):
            engine = SupportEngine(universe)
            pool = instance_pool(universe.atoms, universe.agents, depth=1)[:24]
            for relations in engine.relation_space(relations_mode, count=count, seed=23):
                for formula in pool:
                    for base in range(universe.size):
                        if not engine.supports(base, relations, formula):
                            continue
                        stages = canonical_update(universe, relations, formula, base, engine, verify=False)
                        for name in ('s', 's_announced', 's_star'):
                            self.assertSymmetric(stages.stage(name))
                        verification = stages.verification
                        self.assertTrue(verification.frame_ok, verification.describe(universe))
                        check = is_effective_update(universe, relations, stages.r, formula, base, engine)
                        self.assertEqual(bool(check), verification.ok)
                        if not check:
                            self.assertIn(check.reason, ('condition (c) fails', 'condition (d) fails'))
                        for agent, name, witness in verification.failures:
                            self.assertLiftingWitness(universe, stages.r, agent, name, witness)
                        instances += 1
        self.assertGreaterEqual(instances, 500)


class CompositionTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.universe = negation_universe(['p'])
        cls.engine = SupportEngine(cls.universe)

    @settings(max_examples=40, deadline=None)
    @given(core_formulas(atoms=('p',), max_leaves=3), core_formulas(atoms=('p',), max_leaves=3),
           core_formulas(atoms=('p',), max_leaves=3))
    def test_nested_announcements_compose(self, first, second, body):
        nested = Announce(first, Announce(second, body))
        composed = Announce(And(first, Announce(first, second)), body)
        for relations in self.engine.relation_space():
            for base in range(self.universe.size):
                self.assertEqual(self.engine.supports(base, relations, nested),
                                 self.engine.supports(base, relations, composed),
                                 (self.universe.describe(base), relations.id))


class ExhaustiveUpdateTests(SimpleTestCase):
    def test_every_candidate_respects_the_announcement(self):
        universe = micro_universe()
        relations = AgentRelationSet.identity(universe)
        engine = SupportEngine(universe, mode='exhaustive')
        base = universe.base_from_groups(['g1'])
        updates = list(effective_updates(universe, relations, [parse('p')], base, mode='exhaustive',
                                         engine=engine))
        self.assertTrue(updates)
        supporting = {base, universe.top}
        for update in updates:
            for agent in update.agents:
                self.assertLessEqual(set(update.successors(agent, base)), supporting)

    def test_unknown_mode(self):
        universe = micro_universe()
        with self.assertRaises(ValueError):
            effective_updates(universe, AgentRelationSet.identity(universe), [], 0, mode='random')


class ExportTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.spec = build_card_game()
        cls.stages = canonical_update(cls.spec.universe, cls.spec.relations(), parse('~1_a'),
                                      cls.spec.named_bases['B_012'])

    def test_dot(self):
        dot = relation_to_dot(self.spec.universe, self.stages.s_star, title='after', names=self.spec.base_names)
        self.assertTrue(dot.startswith('digraph "after" {'))
        self.assertIn('"B_201" -> "B_021" [label="c" dir=none];', dot)
        self.assertNotIn('B_102', dot)

    def test_subset_edges(self):
        universe = micro_universe()
        dot = relation_to_dot(universe, AgentRelationSet.identity(universe), subset_edges=True)
        self.assertIn('"{}" -> "{g1}" [style=dotted arrowhead=none];', dot)

    def test_stage_data(self):
        data = stages_to_data(self.stages, self.spec.base_names, ('s_star',))
        self.assertEqual(data['announced'], '~1_a')
        self.assertEqual(data['at'], 'B_012')
        self.assertEqual(data['core'], ['B_012', 'B_021', 'B_201', 'B_210'])
        self.assertIn(['B_021', 'B_201'], data['stages']['s_star']['c'])
        self.assertFalse(data['verification']['ok'])
        self.assertEqual(data['verification']['failures'][0],
                         {'agent': 'b', 'condition': 'd', 'witness': ['B_210', 'B_012', '{2_a}']})

    def test_files(self):
        with tempfile.TemporaryDirectory() as directory:
            written = export_stages(self.stages, directory, 'card', self.spec.base_names)
            self.assertEqual(len(written), len(STAGES) + 1)
            data = json.loads((Path(directory) / 'card.json').read_text())
            self.assertEqual(set(data['stages']), set(STAGES))
            self.assertTrue((Path(directory) / 'card.s_star.dot').exists())
