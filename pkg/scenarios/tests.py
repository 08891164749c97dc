import json
import tempfile
from io import StringIO
from pathlib import Path

import yaml
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from bases.utils import BaseRule, RuleGroup, Universe, axiom
from bespal.exceptions import UniverseError, VerdictMismatch
from formulas.parser import parse
from relations.utils import AgentRelationSet
from scenarios.builders import BUILTIN_SCENARIOS, build_card_game, build_muddy_counterexample
from scenarios.models import ScenarioRun
from scenarios.utils import CheckStep, load_scenario, record_run, run_scenario, scenario_from_data
from support.utils import SupportEngine

TINY = {
    'name': 'tiny',
    'universe': {
        'atoms': ['p', 'q', 'r'],
        'agents': ['a'],
        'optional_groups': [{'name': 'g1', 'rules': ['=> p']}, {'name': 'g2', 'rules': ['=> q']}],
    },
    'named_bases': {'left': ['g1'], 'right': 'g2'},
    'actual': 'left',
    'relations': [{'agent': 'a', 'core_edges': [['left', 'right']]}],
    'script': [
        {'check': {'name': 'a cannot tell', 'base': 'left', 'goal': 'K[a] p', 'expected': False}},
        {'announce': 'p'},
        {'check': {'base': 'left', 'goal': 'K[a] p', 'expected': True}},
    ],
}

MICRO = {
    'name': 'micro',
    'atoms': ['p', 'q', 'r'],
    'agents': ['a', 'b'],
    'optional_groups': [{'name': 'g1', 'rules': ['=> p']}, {'name': 'g2', 'rules': ['=> q']}],
}


def write_yaml(directory, name, data):
    path = Path(directory) / name
    path.write_text(yaml.safe_dump(data))
    return str(path)


class BuiltinScenarioTests(SimpleTestCase):
    def test_card_game(self):
        report = run_scenario(load_scenario('card-game'))
        self.assertTrue(report.ok, report.to_frame())
        self.assertEqual(len(report.updates), 1)
        self.assertEqual(report.updates[0]['core'], ['B_012', 'B_021', 'B_201', 'B_210'])

    def test_muddy(self):
        report = run_scenario(load_scenario('muddy'))
        self.assertTrue(report.ok, report.to_frame())
        self.assertEqual(len(report.updates), 2)

    def test_muddy_counterexample(self):
        report = run_scenario(load_scenario('muddy-counterexample'))
        self.assertTrue(report.ok, report.to_frame())
        verdicts = {check.name: check.actual for check in report.checks}
        self.assertFalse(verdicts['a knows after both announcements'])
        self.assertFalse(verdicts['a knows after both announcements (Kripke)'])

    def test_relation_reports(self):
        report = run_scenario(load_scenario('card-game'))
        self.assertEqual(set(report.relation_reports), {'a', 'b', 'c'})
        self.assertTrue(all(entry['ok'] for entry in report.relation_reports.values()))

    def test_strict_run_raises_on_mismatch(self):
        spec = build_card_game()
        spec.script.append(CheckStep('wrong on purpose', 'B_012', spec.script[0].goal, False))
        with self.assertRaises(VerdictMismatch) as caught:
            run_scenario(spec, strict=True)
        self.assertEqual([check.name for check in caught.exception.mismatches], ['wrong on purpose'])

    def test_exports(self):
        with tempfile.TemporaryDirectory() as directory:
            report = run_scenario(load_scenario('card-game'), out=directory)
            self.assertTrue((Path(directory) / 'card-game.1.s_star.dot').exists())
            self.assertEqual(len(report.exports), 6)

    def test_catalogue(self):
        self.assertEqual(set(BUILTIN_SCENARIOS), {'card-game', 'muddy', 'muddy-counterexample'})


def literal_counterexample_universe():
    """Marker groups without clash rules, so only the base holding every group is inconsistent"""
    muddy_sets = ['', 'a', 'b', 'c', 'ab', 'ac', 'bc', 'abc']
    markers = {muddy: f"p_{muddy or 'none'}" for muddy in muddy_sets}
    groups = []
    for muddy, marker in markers.items():
        if muddy:
            rules = (axiom(marker),) + tuple(axiom(f"m_{child}") for child in muddy)
        else:
            rules = (axiom(marker), BaseRule(frozenset({marker}), 'm_a'))
        groups.append(RuleGroup(f"g_{muddy or 'none'}", rules))
    return Universe(['m_a', 'm_b', 'm_c'] + list(markers.values()), ['a', 'b', 'c'], (), groups,
                    name='literal-counterexample')


class CounterexampleUniverseTests(SimpleTestCase):
    def test_clash_rules_make_single_groups_maximal(self):
        spec = build_muddy_counterexample()
        universe = spec.universe
        self.assertTrue(all(universe.is_max_consistent(base) for base in spec.named_bases.values()))
        engine = SupportEngine(universe)
        self.assertTrue(engine.supports(spec.named_bases['B_a'], AgentRelationSet.identity(universe),
                                        parse('~m_b')))

    def test_without_clash_rules_only_the_top_is_inconsistent(self):
        universe = literal_counterexample_universe()
        self.assertEqual(universe.inconsistent_bases, (universe.top,))
        engine = SupportEngine(universe)
        only_a = universe.base_from_groups(['g_a'])
        self.assertFalse(engine.supports(only_a, AgentRelationSet.identity(universe), parse('~m_b')))
        self.assertTrue(engine.supports(only_a, AgentRelationSet.identity(universe), parse('m_a')))


class ScenarioFileTests(SimpleTestCase):
    def test_run_from_file(self):
        with tempfile.TemporaryDirectory() as directory:
            spec = load_scenario(write_yaml(directory, 'tiny.yaml', TINY))
        self.assertEqual(spec.name, 'tiny')
        self.assertEqual(spec.named_bases, {'left': 1, 'right': 2})
        report = run_scenario(spec)
        self.assertTrue(report.ok, report.to_frame())
        self.assertEqual(report.checks[1].name, 'check 3')

    def test_unknown_step(self):
        data = dict(TINY, script=[{'shout': 'p'}])
        with self.assertRaises(UniverseError):
            scenario_from_data(data)

    def test_unknown_base_in_check(self):
        data = dict(TINY, script=[{'check': {'base': 'middle', 'goal': 'p', 'expected': True}}])
        with self.assertRaises(UniverseError):
            scenario_from_data(data)

    def test_unknown_agent_in_relations(self):
        data = dict(TINY, relations=[{'agent': 'z', 'core_edges': []}])
        with self.assertRaises(UniverseError):
            scenario_from_data(data)

    def test_kripke_check_needs_a_model(self):
        data = dict(TINY, script=[{'kripke_check': {'world': 'u', 'goal': 'p', 'expected': True}}])
        with self.assertRaises(UniverseError):
            scenario_from_data(data)


class RecordRunTests(TestCase):
    def test_record(self):
        report = run_scenario(load_scenario('card-game'))
        run = record_run(report, seed=11)
        self.assertTrue(run.ok)
        self.assertEqual(run.seed, 11)
        self.assertEqual(run.checks.count(), len(report.checks))
        self.assertTrue(all(outcome.ok for outcome in run.checks.all()))
        self.assertEqual(str(run), 'card-game (canonical) - ok')

    def test_command_records(self):
        call_command('bespal', 'scenario', 'run', 'muddy', '--record', stdout=StringIO())
        self.assertEqual(ScenarioRun.objects.get().name, 'muddy')


class CommandTests(SimpleTestCase):
    def run_command(self, *args):
        out = StringIO()
        call_command('bespal', *args, stdout=out)
        return out.getvalue()

    def test_translate(self):
        output = self.run_command('translate', '[q] K[a] p')
        self.assertEqual(output.splitlines(), ['q -> K[a] (q -> p)', 'c=6'])

    def test_translate_json(self):
        data = json.loads(self.run_command('translate', '[q] K[a] p', '--format', 'json'))
        self.assertEqual(data['translation'], 'q -> K[a] (q -> p)')
        self.assertEqual(data['steps'][0][2:], [6, 5])

    def test_scenario_run(self):
        self.assertIn('card-game', self.run_command('scenario', 'run', 'card-game'))

    def test_unknown_scenario(self):
        with self.assertRaises(CommandError) as caught:
            self.run_command('scenario', 'run', 'no-such-scenario')
        self.assertEqual(caught.exception.returncode, 2)

    def test_check(self):
        output = self.run_command('check', '--scenario', 'card-game', '--base', 'B_012',
                                  '--formula', 'K[c] (0_a & 1_b & 2_c)', '--announce', '~1_a')
        self.assertIn('True', output)

    def test_false_verdict(self):
        with self.assertRaises(CommandError) as caught:
            self.run_command('check', '--scenario', 'card-game', '--base', 'B_012', '--formula', 'bot')
        self.assertEqual(caught.exception.returncode, 1)

    def test_syntax_error(self):
        with self.assertRaises(CommandError) as caught:
            self.run_command('check', '--scenario', 'card-game', '--base', 'B_012', '--formula', 'p & & q')
        self.assertEqual(caught.exception.returncode, 2)

    def test_kripke_check(self):
        output = self.run_command('kripke-check', '--scenario', 'card-game', '--world', '012',
                                  '--formula', '[~1_a] K[c] (0_a & 1_b & 2_c)')
        self.assertIn('True', output)

    def test_validate_relation(self):
        data = json.loads(self.run_command('validate-relation', '--scenario', 'muddy', '--format', 'json'))
        self.assertTrue(all(report['ok'] for report in data['reports']))

    def test_update_exports_stages(self):
        with tempfile.TemporaryDirectory() as directory:
            with self.assertRaises(CommandError) as caught:
                self.run_command('update', '--scenario', 'card-game', '--base', 'B_012', '--formula', '~1_a',
                                 '--out', directory)
            self.assertTrue((Path(directory) / 'card-game.1.s_star.dot').exists())
        self.assertEqual(caught.exception.returncode, 1)
        self.assertIn('b: condition (d) fails', str(caught.exception))

    def test_sequential_update_json(self):
        out = StringIO()
        with self.assertRaises(CommandError) as caught:
            call_command('bespal', 'update', '--scenario', 'card-game', '--base', 'B_012', '--formula', '~1_a',
                         '--formula', 'K[c] (0_a & 1_b & 2_c)', '--sequential', '--format', 'json', stdout=out)
        self.assertEqual(caught.exception.returncode, 1)
        data = json.loads(out.getvalue())
        self.assertEqual(len(data), 2)
        self.assertEqual(data[1]['core'], ['B_012'])
        self.assertEqual([entry['agent'] for entry in data[0]['verification']['failures']], ['b', 'c'])

    def test_valid_and_axioms_from_universe_file(self):
        with tempfile.TemporaryDirectory() as directory:
            path = write_yaml(directory, 'micro.yaml', MICRO)
            self.assertIn('valid', self.run_command('valid', '--universe', path, '--formula', 'K[a] p -> p'))
            with self.assertRaises(CommandError) as caught:
                self.run_command('valid', '--universe', path, '--formula', 'bot')
            self.assertEqual(caught.exception.returncode, 1)
            output = self.run_command('axioms', '--universe', path, '--schema', 'T', '--limit', '3')
            self.assertIn('T', output)

    def test_budget(self):
        with self.assertRaises(CommandError) as caught:
            self.run_command('valid', '--scenario', 'card-game', '--formula', '0_a')
        self.assertEqual(caught.exception.returncode, 3)
        self.assertIn('--sample', str(caught.exception))
