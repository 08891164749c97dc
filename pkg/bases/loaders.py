from pathlib import Path

import yaml

from bases.utils import BaseRule, RuleGroup, Universe
from bespal.exceptions import UniverseError


def read_document(source):
    """Load a mapping from a YAML/JSON path, a text blob, or pass a mapping through"""
    if isinstance(source, dict):
        return source
    path = Path(source)
    try:
        with open(path, encoding='utf-8') as handle:
            document = yaml.safe_load(handle)
    except OSError as exc:
        raise UniverseError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise UniverseError(f"{path} is not valid JSON/YAML: {exc}") from exc
    if not isinstance(document, (dict, list)):
        raise UniverseError(f"{path} does not hold a mapping")
    return document


def rule_from_data(data):
    if isinstance(data, str):
        return BaseRule.from_text(data)
    try:
        return BaseRule(frozenset(data.get('premises', ())), data['conclusion'])
    except (KeyError, AttributeError, TypeError) as exc:
        raise UniverseError(f"malformed rule {data!r}") from exc


def universe_from_data(data, name=''):
    try:
        groups = [
            RuleGroup(group['name'], tuple(rule_from_data(rule) for rule in group['rules']))
            for group in data.get('optional_groups', ())
        ]
        return Universe(
            atoms=data['atoms'],
            agents=data.get('agents', ()),
            fixed_rules=[rule_from_data(rule) for rule in data.get('fixed_rules', ())],
            optional_groups=groups,
            name=data.get('name', name),
        )
    except (KeyError, TypeError) as exc:
        raise UniverseError(f"malformed universe: missing or invalid {exc}") from exc


def load_universe(source):
    data = read_document(source)
    if not isinstance(data, dict):
        raise UniverseError('a universe document must be a mapping')
    name = data.get('name') or (Path(source).stem if not isinstance(source, dict) else '')
    return universe_from_data(data, name=name)


def resolve_base(universe, reference, named_bases=None):
    """
    Turn a base reference into a bit-set.

    A reference is a named base, a list of group names, a comma separated
    string of group names, `{}` for the empty base, or a bit-set.
    """
    named_bases = named_bases or {}
    if isinstance(reference, bool):
        raise UniverseError(f"invalid base reference {reference!r}")
    if isinstance(reference, int):
        return universe.check_base(reference)
    if isinstance(reference, (list, tuple)):
        return universe.base_from_groups(reference)
    if not isinstance(reference, str):
        raise UniverseError(f"invalid base reference {reference!r}")
    if reference in named_bases:
        return named_bases[reference]
    text = reference.strip().strip('{}')
    if not text:
        return 0
    return universe.base_from_groups(part.strip() for part in text.split(','))


def universe_to_data(universe):
    return {
        'name': universe.name,
        'atoms': list(universe.atoms),
        'agents': list(universe.agents),
        'fixed_rules': [str(rule) for rule in universe.fixed_rules],
        'optional_groups': [
            {'name': group.name, 'rules': [str(rule) for rule in group.rules]}
            for group in universe.groups
        ],
    }
