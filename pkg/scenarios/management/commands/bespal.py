import json
import logging

from django.core.management.base import BaseCommand, CommandError

from bases.loaders import load_universe, resolve_base
from bespal.conf import engine_setting
from bespal.exceptions import BespalError, BudgetExceeded, FormulaSyntaxError, UniverseError
from formulas.parser import parse
from formulas.utils import complexity, compose_delta, render, translate
from kripke.utils import evaluate, load_model
from relations.loaders import load_relations
from relations.utils import check_modal_conditions, conditions_frame
from scenarios.utils import load_scenario, record_run, run_scenario
from support.axioms import axiom_suite
from support.utils import SupportEngine
from updates.export import export_stages, relation_to_dot, stages_to_data
from updates.utils import STAGES, canonical_update, sequential_update

logger = logging.getLogger(__name__)

SEMANTIC = 1
USAGE = 2
BUDGET = 3


class Command(BaseCommand):
    help = 'Evaluate, update and validate public announcement formulas over bases and Kripke models'

    def add_arguments(self, parser):
        subcommands = parser.add_subparsers(dest='subcommand', required=True)

        def subcommand(name, help_text, setting=True):
            sub = subcommands.add_parser(name, help=help_text)
            sub.add_argument('--mode', choices=['canonical', 'exhaustive'], default=None)
            sub.add_argument('--seed', type=int, default=None)
            sub.add_argument('--format', choices=['text', 'json', 'dot'], default='text')
            sub.add_argument('--out', default=None, help='Directory for exported files')
            sub.add_argument('--budget', type=int, default=None)
            if setting:
                sub.add_argument('--scenario', help='Built-in scenario name or scenario file')
                sub.add_argument('--universe', help='Universe file (JSON or YAML)')
                sub.add_argument('--relations', help='Relation file (JSON or YAML)')
            return sub

        check = subcommand('check', 'Decide support of a formula at a base')
        check.add_argument('--base', required=True)
        check.add_argument('--formula', required=True)
        check.add_argument('--announce', action='append', default=[], help='Announcement, in order')
        check.add_argument('--context', action='append', default=[], help='Premise of the judgement')

        kripke = subcommand('kripke-check', 'Evaluate a formula in a Kripke model', setting=False)
        kripke.add_argument('--model', help='Kripke model file')
        kripke.add_argument('--scenario', help='Scenario whose Kripke model to use')
        kripke.add_argument('--world', required=True)
        kripke.add_argument('--formula', required=True)

        subcommand('validate-relation', 'Report conditions (a)-(d) and S5 for every agent')

        update = subcommand('update', 'Run the canonical update and export its stages')
        update.add_argument('--base', required=True)
        update.add_argument('--formula', action='append', required=True, help='Announcement, in order')
        update.add_argument('--sequential', action='store_true', help='Update once per announcement')

        valid = subcommand('valid', 'Check validity over every base and relation set')
        valid.add_argument('--formula', required=True)
        valid.add_argument('--sample', type=int, default=None,
                           help='Sample this many relation sets; needed above about 10 consistent bases')

        axioms = subcommand('axioms', 'Check the axiom and rule schemas')
        axioms.add_argument('--depth', type=int, default=1)
        axioms.add_argument('--limit', type=int, default=None)
        axioms.add_argument('--schema', action='append', default=None)
        axioms.add_argument('--sample', type=int, default=None,
                            help='Sample this many relation sets; needed above about 10 consistent bases')

        translate_parser = subcommand('translate', 'Print the announcement-free translation', setting=False)
        translate_parser.add_argument('formula')

        scenario = subcommand('scenario', 'Run a scenario script', setting=False)
        scenario.add_argument('action', choices=['run'])
        scenario.add_argument('target', help='Built-in scenario name or scenario file')
        scenario.add_argument('--record', action='store_true', help='Store the run in the database')

    def handle(self, *args, **options):
        handler = getattr(self, 'handle_' + options['subcommand'].replace('-', '_'))
        try:
            handler(options)
        except FormulaSyntaxError as exc:
            raise CommandError(str(exc), returncode=USAGE) from exc
        except BudgetExceeded as exc:
            raise CommandError(str(exc), returncode=BUDGET) from exc
        except BespalError as exc:
            raise CommandError(str(exc), returncode=SEMANTIC) from exc

    # helpers

    def emit(self, options, data, text):
        if options['format'] == 'json':
            self.stdout.write(json.dumps(data, sort_keys=True, indent=2))
        else:
            self.stdout.write(text)

    def verdict(self, ok, message):
        if ok:
            self.stdout.write(self.style.SUCCESS(message))
        else:
            raise CommandError(message, returncode=SEMANTIC)

    def setting(self, options, need_relations=True):
        """(universe, relations, named bases) from --scenario or --universe/--relations"""
        if options.get('scenario'):
            spec = load_scenario(options['scenario'])
            relations = spec.relations() if need_relations else None
            return spec.universe, relations, spec.named_bases
        if not options.get('universe'):
            raise CommandError('give --scenario or --universe', returncode=USAGE)
        universe = load_universe(options['universe'])
        if not need_relations:
            return universe, None, {}
        if not options.get('relations'):
            raise CommandError('give --relations with --universe', returncode=USAGE)
        return universe, load_relations(universe, options['relations']), {}

    def engine(self, universe, options):
        return SupportEngine(universe, mode=options['mode'], budget=options['budget'])

    # subcommands

    def handle_check(self, options):
        universe, relations, named = self.setting(options)
        base = resolve_base(universe, options['base'], named)
        goal = parse(options['formula'])
        delta = tuple(parse(text) for text in options['announce'])
        context = tuple(parse(text) for text in options['context'])
        verdict = self.engine(universe, options).supports(base, relations, goal, delta, context)
        data = {
            'base': universe.describe(base),
            'goal': render(goal),
            'delta': [render(formula) for formula in delta],
            'context': [render(formula) for formula in context],
            'relations': relations.id,
            'verdict': verdict,
        }
        self.emit(options, data, f"{universe.describe(base)} supports {render(goal)}: {verdict}")
        if not verdict:
            raise CommandError('verdict: false', returncode=SEMANTIC)

    def handle_kripke_check(self, options):
        if options.get('scenario'):
            model = load_scenario(options['scenario']).kripke_model
            if model is None:
                raise CommandError(f"scenario {options['scenario']} has no Kripke model", returncode=SEMANTIC)
        elif options.get('model'):
            model = load_model(options['model'])
        else:
            raise CommandError('give --model or --scenario', returncode=USAGE)
        goal = parse(options['formula'])
        verdict = evaluate(model, options['world'], goal)
        self.emit(options, {'world': options['world'], 'goal': render(goal), 'verdict': verdict},
                  f"{options['world']} satisfies {render(goal)}: {verdict}")
        if not verdict:
            raise CommandError('verdict: false', returncode=SEMANTIC)

    def handle_validate_relation(self, options):
        universe, relations, _ = self.setting(options)
        reports = [check_modal_conditions(universe, relations, agent) for agent in relations.agents]
        if options['format'] == 'dot':
            self.stdout.write(relation_to_dot(universe, relations, title=universe.name or 'relations'))
        else:
            self.emit(options, {'relations': relations.id,
                                'reports': [report.as_dict(universe) for report in reports]},
                      conditions_frame(reports, universe).to_string(index=False))
        failing = [report for report in reports if not report.ok]
        if failing:
            raise CommandError('; '.join(report.describe_failure(universe) for report in failing),
                               returncode=SEMANTIC)

    def handle_update(self, options):
        universe, relations, named = self.setting(options)
        base = resolve_base(universe, options['base'], named)
        announcements = [parse(text) for text in options['formula']]
        engine = self.engine(universe, options)
        if options['sequential']:
            history = sequential_update(universe, relations, announcements, base, engine)
        else:
            history = [canonical_update(universe, relations, compose_delta(announcements), base, engine)]
        names = {value: key for key, value in named.items()}
        if options['out']:
            for step, stages in enumerate(history, start=1):
                export_stages(stages, options['out'], f"{universe.name or 'update'}.{step}", names)
        if options['format'] == 'dot':
            for stages in history:
                for stage in STAGES:
                    self.stdout.write(relation_to_dot(universe, stages.stage(stage), title=stage, names=names))
        else:
            data = [stages_to_data(stages, names) for stages in history]
            lines = []
            for stages in history:
                lines.append(f"update by {render(stages.announced)} at {universe.describe(stages.at)}: "
                             f"{len(stages.core)} of {len(stages.reach)} reachable bases kept")
                lines.append('  ' + stages.verification.describe(universe))
            self.emit(options, data, '\n'.join(lines))
        failing = [stages for stages in history if not stages.verification]
        if failing:
            raise CommandError('completed relation fails its modal checks: '
                               + '; '.join(stages.verification.describe(universe) for stages in failing),
                               returncode=SEMANTIC)

    def _space(self, options):
        if options['sample'] is not None:
            seed = options['seed'] if options['seed'] is not None else engine_setting('DEFAULT_SEED')
            return 'sample', options['sample'], seed
        return 'exhaustive', None, None

    def handle_valid(self, options):
        universe, _, _ = self.setting(options, need_relations=False)
        goal = parse(options['formula'])
        validity = self.engine(universe, options).valid_in_space(goal, *self._space(options))
        data = {'formula': render(goal), 'valid': validity.ok, 'checked': validity.checked,
                'counterexample': None if validity.ok else {
                    'base': universe.describe(validity.base), 'relations': validity.relations.id}}
        self.emit(options, data, f"{render(goal)}: {validity.describe(universe)}")
        if not validity.ok:
            raise CommandError(f"not valid: {validity.describe(universe)}", returncode=SEMANTIC)

    def handle_axioms(self, options):
        universe, _, _ = self.setting(options, need_relations=False)
        relations_mode, count, seed = self._space(options)
        report = axiom_suite(universe, options['depth'], relations_mode, options['schema'], options['limit'],
                             self.engine(universe, options), count, seed)
        self.emit(options, report.as_dict(universe), report.summary().to_string())
        if not report.ok:
            raise CommandError(f"{len(report.failures)} axiom instances fail", returncode=SEMANTIC)

    def handle_translate(self, options):
        formula = parse(options['formula'])
        steps = []
        translated = translate(formula, trace=steps)
        data = {
            'formula': render(formula),
            'translation': render(translated),
            'complexity': complexity(formula),
            'steps': [[render(before), render(after), c_before, c_after]
                      for before, after, c_before, c_after in steps],
        }
        self.emit(options, data, f"{render(translated)}\nc={complexity(formula)}")

    def handle_scenario(self, options):
        try:
            spec = load_scenario(options['target'])
        except UniverseError as exc:
            raise CommandError(str(exc), returncode=USAGE) from exc
        mode = options['mode'] or engine_setting('DEFAULT_MODE')
        engine = SupportEngine(spec.universe, mode=mode, budget=options['budget'])
        report = run_scenario(spec, mode=mode, out=options['out'], engine=engine)
        if options['record']:
            seed = options['seed'] if options['seed'] is not None else engine_setting('DEFAULT_SEED')
            record_run(report, seed=seed)
        self.emit(options, report.as_dict(), report.to_frame().to_string(index=False))
        self.verdict(report.ok, f"{spec.name}: {len(report.checks)} checks, "
                                f"{len(report.mismatches)} mismatches")
