"""Reader and writer for the UAI ``MARKOV`` text format (binary variables only)."""

from __future__ import annotations

import re
from typing import Iterator

from ..errors import UaiParseError, UnsupportedCardinalityError
from ..pgm_core import Factor, GraphicalModel

_TOKEN = re.compile(r"\S+")


class _Tokens:
    def __init__(self, text: str):
        self._items: list[tuple[str, int, int]] = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            for m in _TOKEN.finditer(line):
                self._items.append((m.group(), lineno, m.start() + 1))
        self._pos = 0
        self._last = (1, 1)

    def next(self, what: str) -> tuple[str, int, int]:
        if self._pos >= len(self._items):
            raise UaiParseError(f"unexpected end of input, expected {what}", *self._last)
        tok = self._items[self._pos]
        self._pos += 1
        self._last = (tok[1], tok[2] + len(tok[0]))
        return tok

    def int(self, what: str) -> tuple[int, int, int]:
        tok, line, col = self.next(what)
        try:
            return int(tok), line, col
        except ValueError:
            raise UaiParseError(f"expected integer {what}, got {tok!r}", line, col) from None

    def float(self, what: str) -> float:
        tok, line, col = self.next(what)
        try:
            return float(tok)
        except ValueError:
            raise UaiParseError(f"expected number {what}, got {tok!r}", line, col) from None

    def remaining(self) -> Iterator[tuple[str, int, int]]:
        return iter(self._items[self._pos :])


def read_uai(text: str) -> GraphicalModel:
    toks = _Tokens(text)
    kind, line, col = toks.next("preamble type")
    if kind != "MARKOV":
        raise UaiParseError(f"expected 'MARKOV' preamble, got {kind!r}", line, col)
    n, line, col = toks.int("variable count")
    if n < 0:
        raise UaiParseError(f"negative variable count {n}", line, col)
    for i in range(n):
        card, line, col = toks.int(f"cardinality of variable {i}")
        if card != 2:
            raise UnsupportedCardinalityError(
                f"variable {i} has cardinality {card}; only binary variables are supported", line, col
            )
    nf, line, col = toks.int("factor count")
    if nf < 0:
        raise UaiParseError(f"negative factor count {nf}", line, col)
    scopes = []
    for k in range(nf):
        size, line, col = toks.int(f"scope size of factor {k}")
        if size < 0:
            raise UaiParseError(f"negative scope size {size}", line, col)
        scope = []
        for _ in range(size):
            v, line, col = toks.int(f"variable id in scope of factor {k}")
            if not 0 <= v < n:
                raise UaiParseError(f"variable id {v} out of range 0..{n - 1}", line, col)
            scope.append(v)
        scopes.append(scope)
    factors = []
    for k, scope in enumerate(scopes):
        count, line, col = toks.int(f"table size of factor {k}")
        if count != 2 ** len(scope):
            raise UaiParseError(
                f"factor {k} declares {count} entries, expected {2 ** len(scope)}", line, col
            )
        values = [toks.float(f"entry of factor {k}") for _ in range(count)]
        factors.append(Factor(scope, values))
    for tok, line, col in toks.remaining():
        raise UaiParseError(f"unexpected trailing token {tok!r}", line, col)
    return GraphicalModel.from_factors(n, factors)


def write_uai(model: GraphicalModel) -> str:
    lines = ["MARKOV", str(model.num_variables), " ".join("2" for _ in model.variables)]
    lines.append(str(len(model.factors)))
    for f in model.factors:
        lines.append(" ".join(str(x) for x in (len(f.scope), *f.scope)))
    lines.append("")
    for f in model.factors:
        lines.append(str(f.values.size))
        lines.append(" " + " ".join(repr(float(x)) for x in f.values))
        lines.append("")
    return "\n".join(lines)
