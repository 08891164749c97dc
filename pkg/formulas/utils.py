import logging

from bespal.exceptions import TranslationError
from formulas.nodes import (
    Announce, And, Atomic, BOTTOM, Bottom, Iff, Implies, Knows, Not, Or, TOP,
)

logger = logging.getLogger(__name__)

# Binding strength used by render; higher binds tighter.
IFF, IMPLIES, OR, AND, PREFIX, ATOM = range(6)


def _wrap(text, level, minimum):
    return f"({text})" if level < minimum else text


def _render(formula):
    """Return (text, level) where level is the binding strength of the top operator"""
    if isinstance(formula, Atomic):
        return formula.name, ATOM
    if isinstance(formula, Bottom):
        return 'bot', ATOM
    if isinstance(formula, Not):
        return f"~{_operand(formula.body, PREFIX)}", PREFIX
    if isinstance(formula, Knows):
        return f"K[{formula.agent}] {_operand(formula.body, PREFIX)}", PREFIX
    if isinstance(formula, Announce):
        announced, _ = _render(formula.announced)
        return f"[{announced}] {_operand(formula.body, PREFIX)}", PREFIX
    if isinstance(formula, Iff):
        return f"{_operand(formula.lhs, IMPLIES)} <-> {_operand(formula.rhs, IMPLIES)}", IFF
    binary = {Implies: ('->', IMPLIES), Or: ('|', OR), And: ('&', AND)}
    symbol, level = binary[type(formula)]
    return f"{_operand(formula.lhs, level + 1)} {symbol} {_operand(formula.rhs, level)}", level


def _operand(formula, minimum):
    text, level = _render(formula)
    return _wrap(text, level, minimum)


def render(formula):
    """Render a formula with the fewest parentheses the grammar needs"""
    text, _ = _render(formula)
    return text


def desugar(formula):
    """Rewrite Not/And/Or/Iff into the five core constructors"""
    if isinstance(formula, (Atomic, Bottom)):
        return formula
    if isinstance(formula, Implies):
        return Implies(desugar(formula.lhs), desugar(formula.rhs))
    if isinstance(formula, Knows):
        return Knows(formula.agent, desugar(formula.body))
    if isinstance(formula, Announce):
        return Announce(desugar(formula.announced), desugar(formula.body))
    if isinstance(formula, Not):
        return negate(desugar(formula.body))
    if isinstance(formula, And):
        return conjoin(desugar(formula.lhs), desugar(formula.rhs))
    if isinstance(formula, Or):
        return Implies(negate(desugar(formula.lhs)), desugar(formula.rhs))
    if isinstance(formula, Iff):
        lhs, rhs = desugar(formula.lhs), desugar(formula.rhs)
        return conjoin(Implies(lhs, rhs), Implies(rhs, lhs))
    raise TypeError(f"not a formula: {formula!r}")


def negate(formula):
    return Implies(formula, BOTTOM)


def conjoin(lhs, rhs):
    # lhs & rhs  ==  ~(~~lhs -> ~rhs)
    return negate(Implies(negate(negate(lhs)), negate(rhs)))


def complexity(formula):
    """Termination measure for the translation, computed on the desugared formula"""
    return _complexity(desugar(formula))


def _complexity(formula):
    if isinstance(formula, (Atomic, Bottom)):
        return 1
    if isinstance(formula, Implies):
        return 1 + max(_complexity(formula.lhs), _complexity(formula.rhs))
    if isinstance(formula, Knows):
        return 1 + _complexity(formula.body)
    if isinstance(formula, Announce):
        return (2 + _complexity(formula.announced)) * _complexity(formula.body)
    raise TypeError(f"complexity needs a desugared formula, got {type(formula).__name__}")


def _rewrite_announcement(formula):
    """One reduction step for an announcement, chosen by the shape of its body"""
    announced, body = formula.announced, formula.body
    if isinstance(body, (Atomic, Bottom)):
        return Implies(announced, body)
    if isinstance(body, Implies):
        return Implies(Announce(announced, body.lhs), Announce(announced, body.rhs))
    if isinstance(body, Knows):
        return Implies(announced, Knows(body.agent, Announce(announced, body.body)))
    if isinstance(body, Announce):
        return Announce(conjoin(announced, Announce(announced, body.announced)), body.body)
    raise TypeError(f"translate needs a desugared formula, got {type(body).__name__}")


def translate(formula, trace=None):
    """
    Translate a formula into an announcement-free one.

    Every announcement rewrite is checked against the complexity measure;
    when `trace` is a list, each step is appended as (before, after,
    complexity_before, complexity_after).
    """
    formula = desugar(formula)
    return _translate(formula, trace)


def _translate(formula, trace):
    if isinstance(formula, (Atomic, Bottom)):
        return formula
    if isinstance(formula, Implies):
        return Implies(_translate(formula.lhs, trace), _translate(formula.rhs, trace))
    if isinstance(formula, Knows):
        return Knows(formula.agent, _translate(formula.body, trace))
    rewritten = _rewrite_announcement(formula)
    before, after = _complexity(formula), _complexity(rewritten)
    if after >= before:
        raise TranslationError(
            f"rewrite of {render(formula)} did not lower complexity ({before} -> {after})"
        )
    if trace is not None:
        trace.append((formula, rewritten, before, after))
    logger.debug('translate %s => %s (%d -> %d)', render(formula), render(rewritten), before, after)
    return _translate(rewritten, trace)


def compose_delta(delta):
    """Fold an announcement sequence into the single formula that performs the same update"""
    delta = list(delta)
    if not delta:
        return TOP
    if len(delta) == 1:
        return delta[0]
    head, rest = delta[0], delta[1:]
    return And(head, Announce(head, compose_delta(rest)))
