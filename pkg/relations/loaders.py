from bases.loaders import read_document, resolve_base
from bespal.exceptions import UniverseError
from relations.utils import AgentRelationSet, saturate_core_relation


def _entries(data):
    if isinstance(data, list):
        return data
    if 'relations' in data:
        return data['relations']
    return [data]


def core_edges_from_data(universe, data, named_bases=None):
    """Per-agent core edge lists from a relation document, with base references resolved"""
    named_bases = dict(named_bases or {})
    if isinstance(data, dict):
        for name, reference in (data.get('named_bases') or {}).items():
            named_bases[name] = resolve_base(universe, reference, named_bases)
    edges = {}
    for entry in _entries(data):
        try:
            agent = entry['agent']
            pairs = entry.get('core_edges', ())
        except (KeyError, TypeError, AttributeError) as exc:
            raise UniverseError(f"malformed relation entry {entry!r}") from exc
        if agent not in universe.agents:
            raise UniverseError(f"relation names unknown agent {agent!r}")
        resolved = edges.setdefault(agent, [])
        for pair in pairs:
            if len(pair) != 2:
                raise UniverseError(f"core edge {pair!r} does not name two bases")
            resolved.append(tuple(resolve_base(universe, reference, named_bases) for reference in pair))
    return edges


def relations_from_data(universe, data, named_bases=None):
    """
    Build the relation set a document describes.

    Core edges are saturated into S5-modal relations unless the document sets
    `raw: true`, in which case exactly the listed ordered pairs are used.
    """
    edges = core_edges_from_data(universe, data, named_bases)
    if isinstance(data, dict) and data.get('raw'):
        return AgentRelationSet.from_pairs(universe, edges, agents=universe.agents)
    return saturate_core_relation(universe, edges)


def load_relations(universe, source, named_bases=None):
    return relations_from_data(universe, read_document(source), named_bases)
