"""
Scenario specs: a universe, named bases, core relations, an optional Kripke
twin and a script of announcements and expected verdicts.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from bases.loaders import read_document, resolve_base, universe_from_data
from bespal.exceptions import UniverseError, VerdictMismatch
from formulas.nodes import Announce
from formulas.parser import parse
from formulas.utils import compose_delta, render
from kripke.utils import evaluate, model_from_data
from relations.loaders import core_edges_from_data
from relations.utils import check_modal_conditions, saturate_core_relation
from support.utils import SupportEngine
from updates.export import export_stages, stages_to_data
from updates.utils import canonical_update

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnnounceStep:
    formula: object


@dataclass(frozen=True)
class CheckStep:
    name: str
    base: str
    goal: object
    expected: bool


@dataclass(frozen=True)
class KripkeCheckStep:
    name: str
    world: str
    goal: object
    expected: bool


@dataclass
class ScenarioSpec:
    name: str
    universe: object
    named_bases: dict
    actual: str
    core_relations: dict
    kripke_model: object = None
    script: list = field(default_factory=list)

    def __post_init__(self):
        if self.actual not in self.named_bases:
            raise UniverseError(f"scenario {self.name}: unknown actual base {self.actual!r}")
        for agent, pairs in self.core_relations.items():
            if agent not in self.universe.agents:
                raise UniverseError(f"scenario {self.name}: unknown agent {agent!r}")
            for pair in pairs:
                for name in pair:
                    if name not in self.named_bases:
                        raise UniverseError(f"scenario {self.name}: unknown base {name!r}")
        for step in self.script:
            if isinstance(step, CheckStep) and step.base not in self.named_bases:
                raise UniverseError(f"scenario {self.name}: check {step.name} names unknown base {step.base!r}")
            if isinstance(step, KripkeCheckStep) and self.kripke_model is None:
                raise UniverseError(f"scenario {self.name}: check {step.name} needs a Kripke model")

    @property
    def base_names(self):
        return {base: name for name, base in self.named_bases.items()}

    def core_edges(self):
        return {agent: [(self.named_bases[left], self.named_bases[right]) for left, right in pairs]
                for agent, pairs in self.core_relations.items()}

    def relations(self):
        return saturate_core_relation(self.universe, self.core_edges())


def _step_from_data(entry, index):
    if not isinstance(entry, dict) or len(entry) != 1:
        raise UniverseError(f"script step {index} must be a single-key mapping")
    (kind, body), = entry.items()
    if kind == 'announce':
        return AnnounceStep(parse(body))
    try:
        goal = parse(body['goal'])
        expected = bool(body['expected'])
        name = body.get('name') or f"{kind} {index}"
        if kind == 'check':
            return CheckStep(name, body['base'], goal, expected)
        if kind == 'kripke_check':
            return KripkeCheckStep(name, str(body['world']), goal, expected)
    except (KeyError, TypeError, AttributeError) as exc:
        raise UniverseError(f"malformed script step {index}: {exc}") from exc
    raise UniverseError(f"unknown script step {kind!r}")


def scenario_from_data(data, name=''):
    try:
        universe = universe_from_data(data['universe'], name=data.get('name', name))
        named_bases = {}
        for base_name, reference in (data.get('named_bases') or {}).items():
            named_bases[base_name] = resolve_base(universe, reference, named_bases)
        actual = data['actual']
    except (KeyError, TypeError, AttributeError) as exc:
        raise UniverseError(f"malformed scenario: missing or invalid {exc}") from exc
    entries = data.get('relations') or []
    # resolves every reference, so malformed entries and unknown names fail here
    core_edges_from_data(universe, entries, named_bases)
    core = {}
    for entry in entries:
        core.setdefault(entry['agent'], []).extend(tuple(pair) for pair in entry.get('core_edges', ()))
    model = model_from_data(data['kripke_model']) if data.get('kripke_model') else None
    script = [_step_from_data(entry, index) for index, entry in enumerate(data.get('script', ()), start=1)]
    return ScenarioSpec(data.get('name', name), universe, named_bases, actual, core, model, script)


def load_scenario(reference):
    """A built-in scenario by name, or a scenario file"""
    from scenarios.builders import BUILTIN_SCENARIOS

    if reference in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[reference]()
    data = read_document(reference)
    if not isinstance(data, dict):
        raise UniverseError('a scenario document must be a mapping')
    return scenario_from_data(data, name=Path(reference).stem)


@dataclass
class CheckResult:
    name: str
    kind: str
    at: str
    goal: str
    delta: tuple
    expected: bool
    actual: bool

    @property
    def ok(self):
        return self.expected == self.actual


@dataclass
class ScenarioReport:
    name: str
    mode: str
    checks: list = field(default_factory=list)
    updates: list = field(default_factory=list)
    relation_reports: dict = field(default_factory=dict)
    exports: list = field(default_factory=list)

    @property
    def ok(self):
        return all(check.ok for check in self.checks)

    @property
    def mismatches(self):
        return [check for check in self.checks if not check.ok]

    def to_frame(self):
        return pd.DataFrame.from_records(
            [{'check': check.name, 'kind': check.kind, 'at': check.at, 'goal': check.goal,
              'expected': check.expected, 'actual': check.actual, 'ok': check.ok} for check in self.checks],
            columns=['check', 'kind', 'at', 'goal', 'expected', 'actual', 'ok'],
        )

    def as_dict(self):
        return {
            'scenario': self.name,
            'mode': self.mode,
            'ok': self.ok,
            'checks': [
                {'name': check.name, 'kind': check.kind, 'at': check.at, 'goal': check.goal,
                 'delta': list(check.delta), 'expected': check.expected, 'actual': check.actual,
                 'ok': check.ok}
                for check in self.checks
            ],
            'relations': self.relation_reports,
            'updates': self.updates,
            'exports': [str(path) for path in self.exports],
        }


def run_scenario(spec, mode='canonical', out=None, strict=False, engine=None):
    """
    Saturate the scenario's relations, play its script and compare verdicts.

    Each announcement also runs the canonical update by the announcements so
    far at the actual base; with out set, its stages are written there as
    `<scenario>.<step>.<stage>.dot` plus JSON.
    """
    universe = spec.universe
    relations = spec.relations()
    engine = engine or SupportEngine(universe, mode=mode)
    names = spec.base_names
    actual = spec.named_bases[spec.actual]
    report = ScenarioReport(spec.name, mode)
    report.relation_reports = {
        agent: check_modal_conditions(universe, relations, agent).as_dict(universe) for agent in relations.agents
    }
    delta = []
    for step in spec.script:
        if isinstance(step, AnnounceStep):
            delta.append(step.formula)
            stages = canonical_update(universe, relations, compose_delta(delta), actual, engine)
            report.updates.append(stages_to_data(stages, names, ('s', 's_announced', 's_star')))
            if out is not None:
                report.exports.extend(export_stages(stages, out, f"{spec.name}.{len(delta)}", names))
            logger.info('%s: announced %s, %d bases kept', spec.name, render(step.formula), len(stages.core))
        elif isinstance(step, CheckStep):
            verdict = engine.supports(spec.named_bases[step.base], relations, step.goal, delta=tuple(delta))
            report.checks.append(CheckResult(step.name, 'support', step.base, render(step.goal),
                                             tuple(render(formula) for formula in delta), step.expected, verdict))
        else:
            goal = step.goal
            for formula in reversed(delta):
                goal = Announce(formula, goal)
            verdict = evaluate(spec.kripke_model, step.world, goal)
            report.checks.append(CheckResult(step.name, 'kripke', step.world, render(goal), (),
                                             step.expected, verdict))
    for check in report.mismatches:
        logger.warning('%s: %s expected %s, got %s', spec.name, check.name, check.expected, check.actual)
    if strict and not report.ok:
        raise VerdictMismatch(f"{len(report.mismatches)} checks of {spec.name} did not match",
                              report.mismatches)
    return report


def record_run(report, seed=None):
    from scenarios.models import CheckOutcome, ScenarioRun

    run = ScenarioRun.objects.create(name=report.name, mode=report.mode, seed=seed, ok=report.ok,
                                     report=report.as_dict())
    CheckOutcome.objects.bulk_create([
        CheckOutcome(run=run, name=check.name, kind=check.kind, goal=check.goal,
                     expected=check.expected, actual=check.actual)
        for check in report.checks
    ])
    return run
