"""Built-in scenarios: the three-player card game and the muddy children."""
import itertools

from bases.utils import BaseRule, RuleGroup, Universe, axiom, negation_rules
from formulas.parser import parse
from kripke.utils import model_from_partitions
from scenarios.utils import AnnounceStep, CheckStep, KripkeCheckStep, ScenarioSpec

PLAYERS = ('a', 'b', 'c')
CARDS = ('0', '1', '2')
CHILDREN = ('a', 'b', 'c')

MUDDY_ANNOUNCEMENT = 'm_a | m_b | m_c'
NOBODY_KNOWS = '~(K[a] m_a | K[a] ~m_a) & ~(K[b] m_b | K[b] ~m_b) & ~(K[c] m_c | K[c] ~m_c)'


def card_atom(card, player):
    return f"{card}_{player}"


def card_universe():
    """
    Nine optional axioms, one per card and player; the fixed rules make any
    base where two players hold one card, or one player holds two, inconsistent.
    """
    atoms = [card_atom(card, player) for player in PLAYERS for card in CARDS]
    clashes = []
    for card in CARDS:
        for first, second in itertools.combinations(PLAYERS, 2):
            clashes.append((card_atom(card, first), card_atom(card, second)))
    for player in PLAYERS:
        for first, second in itertools.combinations(CARDS, 2):
            clashes.append((card_atom(first, player), card_atom(second, player)))
    fixed = [BaseRule(frozenset(pair), atom) for pair in clashes for atom in atoms]
    groups = [RuleGroup(atom, (axiom(atom),)) for atom in atoms]
    return Universe(atoms, PLAYERS, fixed, groups, name='card-game')


def build_card_game():
    universe = card_universe()
    deals = [''.join(deal) for deal in itertools.permutations(CARDS)]
    named_bases = {
        f"B_{deal}": universe.base_from_groups(card_atom(card, player) for card, player in zip(deal, PLAYERS))
        for deal in deals
    }
    # a player cannot tell apart deals giving them the same card
    core = {
        player: [(f"B_{left}", f"B_{right}") for left, right in itertools.combinations(deals, 2)
                 if left[index] == right[index]]
        for index, player in enumerate(PLAYERS)
    }
    model = model_from_partitions(
        deals,
        {player: [[deal for deal in deals if deal[index] == card] for card in CARDS]
         for index, player in enumerate(PLAYERS)},
        {card_atom(card, player): {deal for deal in deals if deal[index] == card}
         for index, player in enumerate(PLAYERS) for card in CARDS},
    )
    goal = parse('K[c] (0_a & 1_b & 2_c)')
    script = [
        CheckStep('c does not know the deal', 'B_012', goal, False),
        KripkeCheckStep('c does not know the deal (Kripke)', '012', goal, False),
        AnnounceStep(parse('~1_a')),
        CheckStep('c knows the deal after ~1_a', 'B_012', goal, True),
        KripkeCheckStep('c knows the deal after ~1_a (Kripke)', '012', goal, True),
        CheckStep('a still does not know the deal', 'B_012', parse('K[a] (1_b & 2_c)'), False),
    ]
    return ScenarioSpec('card-game', universe, named_bases, 'B_012', core, model, script)


def muddy_name(children):
    return 'B_' + (''.join(children) or 'none')


def _muddy_sets():
    return [''.join(combo) for size in range(len(CHILDREN) + 1) for combo in itertools.combinations(CHILDREN, size)]


def _muddy_core():
    # each child sees the others but not their own forehead
    return {
        child: [(muddy_name(muddy), muddy_name(''.join(sorted(muddy + child))))
                for muddy in _muddy_sets() if child not in muddy]
        for child in CHILDREN
    }


def muddy_model(valuation_extra=None):
    worlds = [muddy or 'none' for muddy in _muddy_sets()]
    partitions = {
        child: [[muddy or 'none', ''.join(sorted(muddy + child))] for muddy in _muddy_sets() if child not in muddy]
        for child in CHILDREN
    }
    valuation = {f"m_{child}": {muddy for muddy in worlds if child in muddy and muddy != 'none'}
                 for child in CHILDREN}
    for atom, worlds_extra in (valuation_extra or {}).items():
        valuation[atom] = valuation[atom] | set(worlds_extra)
    return model_from_partitions(worlds, partitions, valuation)


def _muddy_script(expect_a):
    goal_ab = parse('K[a] m_a & K[b] m_b')
    knows_a, knows_b, knows_c = parse('K[a] m_a'), parse('K[b] m_b'), parse('K[c] m_c')
    return [
        CheckStep('a does not know at first', 'B_ab', knows_a, False),
        AnnounceStep(parse(MUDDY_ANNOUNCEMENT)),
        AnnounceStep(parse(NOBODY_KNOWS)),
        CheckStep('b knows after both announcements', 'B_ab', knows_b, True),
        CheckStep('a knows after both announcements', 'B_ab', knows_a, expect_a),
        CheckStep('c still does not know', 'B_ab', knows_c, False),
        CheckStep('a and b know', 'B_ab', goal_ab, expect_a),
        KripkeCheckStep('b knows after both announcements (Kripke)', 'ab', knows_b, True),
        KripkeCheckStep('a knows after both announcements (Kripke)', 'ab', knows_a, expect_a),
        KripkeCheckStep('a and b know (Kripke)', 'ab', goal_ab, expect_a),
    ]


def muddy_universe():
    """
    Per child an axiom making them muddy and a block making them clean, which
    derives every atom from m_j. The spare atom keeps the all-muddy base consistent.
    """
    atoms = [f"m_{child}" for child in CHILDREN] + ['spare']
    groups = []
    for child in CHILDREN:
        groups.append(RuleGroup(f"muddy_{child}", (axiom(f"m_{child}"),)))
    for child in CHILDREN:
        groups.append(RuleGroup(f"clean_{child}", negation_rules(f"m_{child}", atoms)))
    return Universe(atoms, CHILDREN, (), groups, name='muddy')


def build_muddy():
    universe = muddy_universe()
    named_bases = {
        muddy_name(muddy): universe.base_from_groups(
            [f"muddy_{child}" for child in CHILDREN if child in muddy]
            + [f"clean_{child}" for child in CHILDREN if child not in muddy])
        for muddy in _muddy_sets()
    }
    return ScenarioSpec('muddy', universe, named_bases, 'B_ab', _muddy_core(), muddy_model(), _muddy_script(True))


def counterexample_universe():
    """
    One group per set of muddy children: a marker axiom plus the muddy axioms.
    The empty set's group derives m_a from its marker. Any two markers
    together derive every atom, so each group alone is maximally consistent.
    """
    markers = {muddy: f"p_{muddy or 'none'}" for muddy in _muddy_sets()}
    atoms = [f"m_{child}" for child in CHILDREN] + list(markers.values())
    fixed = [BaseRule(frozenset(pair), atom)
             for pair in itertools.combinations(markers.values(), 2) for atom in atoms]
    groups = []
    for muddy, marker in markers.items():
        if muddy:
            rules = (axiom(marker),) + tuple(axiom(f"m_{child}") for child in muddy)
        else:
            rules = (axiom(marker), BaseRule(frozenset({marker}), 'm_a'))
        groups.append(RuleGroup(f"g_{muddy or 'none'}", rules))
    return Universe(atoms, CHILDREN, fixed, groups, name='muddy-counterexample')


def build_muddy_counterexample():
    universe = counterexample_universe()
    named_bases = {muddy_name(muddy): universe.base_from_groups([f"g_{muddy or 'none'}"])
                   for muddy in _muddy_sets()}
    model = muddy_model({'m_a': {'none'}})
    return ScenarioSpec('muddy-counterexample', universe, named_bases, 'B_ab', _muddy_core(), model,
                        _muddy_script(False))


BUILTIN_SCENARIOS = {
    'card-game': build_card_game,
    'muddy': build_muddy,
    'muddy-counterexample': build_muddy_counterexample,
}
