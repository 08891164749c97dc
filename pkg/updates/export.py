import json
import logging
from pathlib import Path

from formulas.utils import render
from relations.utils import relation_domain
from updates.utils import STAGES

logger = logging.getLogger(__name__)


def _label(universe, base, names):
    return names.get(base) or universe.describe(base)


def _quote(text):
    return '"' + text.replace('\\', '\\\\').replace('"', '\\"') + '"'


def relation_to_dot(universe, relations, title='relations', names=None, subset_edges=False, bases=None):
    """
    Render a relation set in the dot language.

    Each unordered pair is drawn once per agent and labelled with the agent;
    symmetric pairs have no arrowhead. Loops are omitted. With subset_edges,
    dotted arrows join each base to the bases one group larger.
    """
    names = names or {}
    nodes = sorted(relation_domain(relations) if bases is None else bases)
    node_set = set(nodes)
    lines = [f"digraph {_quote(title)} {{", '\trankdir=BT;']
    for base in nodes:
        lines.append(f"\t{_quote(_label(universe, base, names))};")
    for agent in relations.agents:
        edges = relations.edges(agent, node_set)
        for source, target in sorted(edges):
            if source == target or (target < source and (target, source) in edges):
                continue
            style = ' dir=none' if (target, source) in edges else ''
            lines.append(f"\t{_quote(_label(universe, source, names))} -> "
                         f"{_quote(_label(universe, target, names))} [label={_quote(agent)}{style}];")
    if subset_edges:
        for base in nodes:
            for index in range(universe.width):
                larger = base | 1 << index
                if larger != base and larger in node_set:
                    lines.append(f"\t{_quote(_label(universe, base, names))} -> "
                                 f"{_quote(_label(universe, larger, names))} [style=dotted arrowhead=none];")
    lines.append('}')
    return '\n'.join(lines) + '\n'


def stage_edges(universe, relations, names=None, bases=None):
    names = names or {}
    node_set = set(relation_domain(relations) if bases is None else bases)
    return {
        agent: [[_label(universe, source, names), _label(universe, target, names)]
                for source, target in sorted(relations.edges(agent, node_set))]
        for agent in relations.agents
    }


def stages_to_data(stages, names=None, stages_wanted=STAGES):
    """JSON-ready edge lists for each stage of an update"""
    universe = stages.universe
    names = names or {}
    return {
        'announced': render(stages.announced),
        'at': _label(universe, stages.at, names),
        'core': sorted(_label(universe, base, names) for base in stages.core),
        'verification': stages.verification.as_dict(universe, names),
        'stages': {
            name: stage_edges(universe, stages.stage(name), names)
            for name in stages_wanted
        },
    }


def export_stages(stages, directory, prefix, names=None, subset_edges=False, stages_wanted=STAGES):
    """Write `<prefix>.<stage>.dot` for every stage plus `<prefix>.json`; returns the paths"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in stages_wanted:
        path = directory / f"{prefix}.{name}.dot"
        path.write_text(relation_to_dot(stages.universe, stages.stage(name), title=f"{prefix}.{name}",
                                        names=names, subset_edges=subset_edges), encoding='utf-8')
        written.append(path)
    path = directory / f"{prefix}.json"
    path.write_text(json.dumps(stages_to_data(stages, names, stages_wanted), sort_keys=True, indent=2),
                    encoding='utf-8')
    written.append(path)
    logger.info('wrote %d stage files for %s', len(written), prefix)
    return written
