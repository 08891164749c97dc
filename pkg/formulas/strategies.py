"""Hypothesis strategies for formulas, shared by the test modules."""
import hypothesis.strategies as st

from formulas.nodes import Announce, And, Atomic, BOTTOM, Iff, Implies, Knows, Not, Or


def leaves(atoms=('p', 'q', 'r')):
    return st.one_of(st.sampled_from(atoms).map(Atomic), st.just(BOTTOM))


def core_formulas(atoms=('p', 'q', 'r'), agents=('a', 'b'), max_leaves=6):
    return st.recursive(
        leaves(atoms),
        lambda children: st.one_of(
            st.builds(Implies, children, children),
            st.builds(Knows, st.sampled_from(agents), children),
            st.builds(Announce, children, children),
        ),
        max_leaves=max_leaves,
    )


def propositional_formulas(atoms=('p', 'q', 'r'), max_leaves=6):
    """Formulas without modal operators"""
    return st.recursive(leaves(atoms), lambda children: st.builds(Implies, children, children),
                        max_leaves=max_leaves)


def formulas(atoms=('p', 'q', 'r'), agents=('a', 'b'), max_leaves=6):
    """Formulas including the sugar connectives"""
    return st.recursive(
        leaves(atoms),
        lambda children: st.one_of(
            st.builds(Implies, children, children),
            st.builds(Knows, st.sampled_from(agents), children),
            st.builds(Announce, children, children),
            st.builds(Not, children),
            st.builds(And, children, children),
            st.builds(Or, children, children),
            st.builds(Iff, children, children),
        ),
        max_leaves=max_leaves,
    )


def depth(formula):
    children = formula.children()
    return 1 + max((depth(child) for child in children), default=0)
