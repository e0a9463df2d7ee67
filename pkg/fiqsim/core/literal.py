"""
Fiq literal format.

    "101?(1/4)?*"

`0` and `1` are determined bits, `?(p/q)` is an undetermined bit with an
exact propensity, `?` abbreviates `?(1/2)`, and a trailing `*` stands for
the all-1/2 tail. The `*` may be omitted on input and is always printed.
"""

import re
from fractions import Fraction

from ..exceptions import LiteralParseError
from .fiq import Determined, Fiq
from .numbers import HALF

_PROPENSITY = re.compile(r"\((\d+)(?:/(\d+))?\)")


def parse_fiq(literal: str) -> Fiq:
    text = literal.strip()
    fiq = Fiq()
    position = 0
    i = 0
    while i < len(text):
        ch = text[i]
        column = i + 1
        if ch == "*":
            if i != len(text) - 1:
                raise LiteralParseError(literal, column, "'*' must be the last character")
            break
        position += 1
        if ch in "01":
            fiq.record(position, int(ch))
            i += 1
        elif ch == "?":
            match = _PROPENSITY.match(text, i + 1)
            if match is None:
                if i + 1 < len(text) and text[i + 1] == "(":
                    raise LiteralParseError(
                        literal, column + 1, "expected '(p/q)' with non-negative integers"
                    )
                fiq.set_propensity(position, HALF)
                i += 1
                continue
            numerator = int(match.group(1))
            denominator = int(match.group(2)) if match.group(2) is not None else 1
            if denominator == 0:
                raise LiteralParseError(literal, column, "zero denominator")
            value = Fraction(numerator, denominator)
            if value > 1:
                raise LiteralParseError(
                    literal, column, f"propensity {numerator}/{denominator} outside [0, 1]"
                )
            fiq.set_propensity(position, value)
            i = match.end()
        else:
            raise LiteralParseError(literal, column, f"unexpected character {ch!r}")
    return fiq


def format_fiq(x: Fiq) -> str:
    parts = []
    for _, state in x.states():
        if isinstance(state, Determined):
            parts.append(str(state.bit))
        elif state.propensity.value == HALF:
            parts.append("?")
        else:
            value = state.propensity.value
            parts.append(f"?({value.numerator}/{value.denominator})")
    parts.append("*")
    return "".join(parts)
