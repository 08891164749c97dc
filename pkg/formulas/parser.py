"""
Text front-end for formulas.

Precedence, tightest first: prefix operators (`~`, `K[a]`, `[phi]`),
`&`, `|`, `->`, `<->`. Binary operators are right-associative; `<->` does
not chain.
"""
from lark import Lark, Transformer
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput

from bespal.exceptions import FormulaSyntaxError
from formulas.nodes import Announce, And, Atomic, BOTTOM, Iff, Implies, Knows, Not, Or

FORMULA_GRAMMAR = r"""
    ?start: iff

    ?iff: imp
        | imp "<->" imp                 -> iff

    ?imp: disj
        | disj "->" imp                 -> implies

    ?disj: conj
         | conj "|" disj                -> or_

    ?conj: unary
         | unary "&" conj               -> and_

    ?unary: "~" unary                   -> not_
          | "K" "[" NAME "]" unary      -> knows
          | "[" iff "]" unary           -> announce
          | atom

    ?atom: "bot"                        -> bottom
         | NAME                         -> atomic
         | "(" iff ")"

    NAME: /[A-Za-z0-9_]+/

    %import common.WS
    %ignore WS
"""


class FormulaBuilder(Transformer):
    def iff(self, children):
        return Iff(*children)

    def implies(self, children):
        return Implies(*children)

    def or_(self, children):
        return Or(*children)

    def and_(self, children):
        return And(*children)

    def not_(self, children):
        return Not(children[0])

    def knows(self, children):
        agent, body = children
        return Knows(str(agent), body)

    def announce(self, children):
        return Announce(*children)

    def bottom(self, children):
        return BOTTOM

    def atomic(self, children):
        return Atomic(str(children[0]))


_parser = Lark(FORMULA_GRAMMAR, parser='lalr', transformer=FormulaBuilder())


def _byte_offset(text, position):
    return len(text[:position].encode('utf-8'))


def parse(text):
    """Parse formula text into a syntax tree, raising FormulaSyntaxError on bad input"""
    try:
        return _parser.parse(text)
    except UnexpectedEOF as exc:
        raise FormulaSyntaxError('unexpected end of input', text, _byte_offset(text, len(text)),
                                 exc.expected) from exc
    except UnexpectedCharacters as exc:
        raise FormulaSyntaxError(f"unexpected character {text[exc.pos_in_stream]!r}", text,
                                 _byte_offset(text, exc.pos_in_stream), exc.allowed or ()) from exc
    except UnexpectedInput as exc:
        token = getattr(exc, 'token', None)
        position = exc.pos_in_stream
        if position is None or position < 0 or (token is not None and token.type == '$END'):
            position = len(text)
        expected = getattr(exc, 'expected', None) or getattr(exc, 'accepts', None) or ()
        if token is not None and token.type == '$END':
            message = 'unexpected end of input'
        else:
            message = f"unexpected token {str(token)!r}" if token is not None else 'syntax error'
        raise FormulaSyntaxError(message, text, _byte_offset(text, position), expected) from exc


def parse_sequence(texts):
    """Parse a list of announcement texts (the Delta of a judgement)"""
    return tuple(parse(text) for text in texts)
