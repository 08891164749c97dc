"""
Announcement updates of relation sets.

canonical_update runs the four-step construction at a base and keeps every
stage. Only the first two stages are needed to evaluate knowledge after an
announcement; the completed relation and its condition reports are built on
first access.
"""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from bespal.conf import engine_setting
from bespal.exceptions import UpdatePreconditionError, UpdateVerificationError
from formulas.utils import compose_delta, render
from relations.utils import (
    FRAME_CONDITIONS, AgentRelationSet, canonical_labels, check_modal_conditions,
    complete_partition, reachable_set, relation_sets, stabilize_partition,
)

logger = logging.getLogger(__name__)

STAGES = ('s', 's_announced', 's_star', 't_stage', 'r')


@dataclass(frozen=True)
class UpdateVerification:
    """Condition failures of a completed update, one (agent, condition, witness) per failing condition"""
    failures: tuple = ()

    def __bool__(self):
        return self.ok

    @property
    def ok(self):
        return not self.failures

    @property
    def frame_ok(self):
        return all(name not in FRAME_CONDITIONS for _, name, _ in self.failures)

    def describe(self, universe):
        if not self.failures:
            return 'all conditions hold'
        return '; '.join(f"{agent}: condition ({name}) fails at "
                         + ', '.join(universe.describe(base) for base in witness)
                         for agent, name, witness in self.failures)

    def as_dict(self, universe, names=None):
        names = names or {}
        return {
            'ok': self.ok,
            'failures': [
                {'agent': agent, 'condition': name,
                 'witness': [names.get(base, universe.describe(base)) for base in witness]}
                for agent, name, witness in self.failures
            ],
        }


def default_engine(universe, mode=None):
    from support.utils import SupportEngine
    return SupportEngine(universe, mode=mode)


class UpdateStages:
    def __init__(self, universe, original, announced, at, supporting):
        self.universe = universe
        self.original = original
        self.announced = announced
        self.at = at
        self.reach = reachable_set(universe, original, at)
        self.supporting = frozenset(supporting)

        self.s = original.restricted(self.reach)
        keep = np.zeros(universe.size, dtype=bool)
        keep[list(self.supporting & self.reach)] = True
        self.s_announced = AgentRelationSet(universe, {
            agent: matrix & keep[:, None] & keep[None, :]
            for agent, matrix in self.s.matrices.items()
        })
        self.core = reachable_set(universe, self.s_announced, at)
        self.s_star = self.s_announced.restricted(self.core)
        logger.debug('update by %s at %s: %d reachable, %d kept', render(announced),
                     universe.describe(at), len(self.reach), len(self.core))

    def __repr__(self):
        return f"<UpdateStages {render(self.announced)} at {self.universe.describe(self.at)}>"

    def successors(self, agent, base):
        """Successors in the final relation; bases on the kept component only need the S* stage"""
        if base in self.core:
            return self.s_star.successors(agent, base)
        return self.r.successors(agent, base)

    @cached_property
    def _completion(self):
        partitions = {}
        for agent in self.s_star.agents:
            classes = {base: int(label) for base, label in zip(
                sorted(self.core), self.s_star.labels(agent)[sorted(self.core)])}
            layer, keys = complete_partition(self.universe, classes)
            partitions[agent] = (
                canonical_labels(layer),
                stabilize_partition(self.universe, keys, frozen=self.core),
            )
        return partitions

    @cached_property
    def t_stage(self):
        return AgentRelationSet.from_labels(
            self.universe, {agent: layer for agent, (layer, _) in self._completion.items()})

    @cached_property
    def r(self):
        relations = AgentRelationSet.from_labels(
            self.universe, {agent: labels for agent, (_, labels) in self._completion.items()})
        relations.s5_verified = all(
            check_modal_conditions(self.universe, relations, agent).ok for agent in relations.agents)
        return relations

    @cached_property
    def reports(self):
        return {agent: check_modal_conditions(self.universe, self.r, agent) for agent in self.r.agents}

    @cached_property
    def verification(self):
        return UpdateVerification(tuple(
            (agent, name, witness)
            for agent, report in sorted(self.reports.items())
            for name, witness in report.failures()
        ))

    def stage(self, name):
        if name not in STAGES:
            raise ValueError(f"unknown stage {name!r}")
        return getattr(self, name)

    def verify(self, strict=None):
        """
        Check the completed relation and return its verification report.
        Frame failures always raise; (c) and (d) failures raise only in strict
        mode and are logged otherwise.
        """
        strict = engine_setting('STRICT_UPDATES') if strict is None else strict
        verification = self.verification
        if not verification.frame_ok:
            raise UpdateVerificationError(
                f"update by {render(self.announced)} is not an equivalence: {verification.describe(self.universe)}",
                self.reports)
        if not verification.ok:
            summary = verification.describe(self.universe)
            if strict:
                raise UpdateVerificationError(f"update by {render(self.announced)}: {summary}", self.reports)
            logger.warning('update by %s at %s: %s', render(self.announced),
                           self.universe.describe(self.at), summary)
        return verification


def canonical_update(universe, relations, formula, base, engine=None, verify=None):
    """
    Run the four-step update of relations by formula at base.

    With verify (default VERIFY_UPDATES) the completed relation is checked
    and the report is kept on the result as stages.verification.
    """
    engine = engine or default_engine(universe)
    if not engine.supports(base, relations, formula):
        raise UpdatePreconditionError(
            f"{universe.describe(base)} does not support {render(formula)}; nothing to update")
    reach = reachable_set(universe, relations, base)
    supporting = [other for other in sorted(reach) if engine.supports(other, relations, formula)]
    stages = UpdateStages(universe, relations, formula, base, supporting)
    if verify is None:
        verify = engine_setting('VERIFY_UPDATES')
    if verify:
        stages.verify()
    return stages


def sequential_update(universe, relations, announcements, base, engine=None, verify=None):
    """Update by each announcement in turn, each against the previous result"""
    engine = engine or default_engine(universe)
    history = []
    current = relations
    for formula in announcements:
        stages = canonical_update(universe, current, formula, base, engine, verify)
        history.append(stages)
        current = stages.r
    return history


@dataclass(frozen=True)
class EffectiveCheck:
    ok: bool
    reason: str = ''
    agent: str = ''
    witness: tuple = ()

    def __bool__(self):
        return self.ok


def is_effective_update(universe, original, updated, formula, base, engine=None):
    """
    Decide whether updated is an effective update of original by formula at base.

    Every base reachable under updated must support formula; on bases reachable
    under both, updated keeps exactly the original edges between supporting
    bases; and every agent's relation satisfies (a)-(d) and is an equivalence.
    """
    engine = engine or default_engine(universe)
    reach_old = reachable_set(universe, original, base)
    reach_new = reachable_set(universe, updated, base)
    supported = {}

    def supports(other):
        if other not in supported:
            supported[other] = engine.supports(other, original, formula)
        return supported[other]

    for other in sorted(reach_new):
        if not supports(other):
            for agent in updated.agents:
                sources = [source for source in np.flatnonzero(updated.matrices[agent][:, other])
                           if int(source) != other and int(source) in reach_new]
                if sources:
                    return EffectiveCheck(False, 'reachable base refutes the announcement', agent,
                                          (int(sources[0]), other))
            return EffectiveCheck(False, 'reachable base refutes the announcement', '', (other,))

    for agent in sorted(updated.agents):
        before = original.matrices[agent]
        after = updated.matrices[agent]
        for source in sorted(reach_old & reach_new):
            for target in sorted(reach_old):
                expected = bool(before[source, target]) and supports(source) and supports(target)
                if bool(after[source, target]) != expected:
                    reason = 'pinned edge missing' if expected else 'edge outside the announcement kept'
                    return EffectiveCheck(False, reason, agent, (source, target))

    for agent in sorted(updated.agents):
        report = check_modal_conditions(universe, updated, agent)
        if not report.ok:
            name, witness = report.failures()[0]
            return EffectiveCheck(False, f"condition ({name}) fails", agent, witness)
    return EffectiveCheck(True)


def effective_updates(universe, relations, delta, base, mode='canonical', engine=None, budget=None):
    """Effective updates of relations by an announcement sequence at base"""
    engine = engine or default_engine(universe, mode)
    formula = compose_delta(delta)
    if not engine.supports(base, relations, formula):
        return iter(())
    if mode == 'canonical':
        return iter([canonical_update(universe, relations, formula, base, engine).r])
    if mode == 'exhaustive':
        candidates = relation_sets(universe, 'exhaustive', budget=budget)
        return (candidate for candidate in candidates
                if is_effective_update(universe, relations, candidate, formula, base, engine))
    raise ValueError(f"unknown update mode {mode!r}")
