"""Text format for walk circuits (``.qwc``).

::

    # comments run to end of line
    step 1 {
      coin line2 I
      coin line3 HWP 45        # half-wave plate angle in degrees
      pr line2 -1 0.0          # phase retarder: line, site, phase in radians
      shift                    # the beam-displacer pair
      exchange pos = -1
    }

Within a step, statements are applied as retarders, coins, shift, exchange
regardless of the order written; a reordering produces a warning.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Iterator, Optional

from .hilbert import Line
from .walk import Circuit, Coin, ExchangeRule, PhaseRetarder, Step

BUILTIN_RESOURCE = "protocol.qwc"


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    message: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity.value}: {self.message}"


class CircuitParseError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


@dataclass(frozen=True)
class Token:
    kind: str  # "word", "number", "{", "}", "=", "eof"
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}=])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> Iterator[Token]:
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise CircuitParseError(
                [Diagnostic(Severity.ERROR, f"unexpected character {text[pos]!r}", line, col)]
            )
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "number":
            yield Token("number", m.group(), line, col)
        elif kind == "word":
            yield Token("word", m.group(), line, col)
        elif kind == "punct":
            yield Token(m.group(), m.group(), line, col)
        pos = m.end()
    yield Token("eof", "", line, pos - line_start + 1)


class _Syntax(Exception):
    def __init__(self, tok: Token, message: str):
        self.tok = tok
        self.message = message


_STMT_KEYWORDS = ("coin", "pr", "shift", "exchange")
_STAGE = {"pr": 0, "coin": 1, "shift": 2, "exchange": 3}
_LINES = {"line2": Line.LINE2, "line3": Line.LINE3}


class _Parser:
    def __init__(self, text: str):
        self.diags: list[Diagnostic] = []
        self.toks = list(tokenize(text))
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, tok: Token, message: str) -> None:
        self.diags.append(Diagnostic(Severity.ERROR, message, tok.line, tok.column))

    def warn(self, tok: Token, message: str) -> None:
        self.diags.append(Diagnostic(Severity.WARNING, message, tok.line, tok.column))

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            got = t.text or "end of input"
            raise _Syntax(t, f"expected {want!r}, got {got!r}")
        return self.advance()

    def integer(self) -> int:
        t = self.expect("number")
        if not re.fullmatch(r"[+-]?\d+", t.text):
            raise _Syntax(t, f"expected an integer, got {t.text!r}")
        return int(t.text)

    def real(self) -> float:
        t = self.expect("number")
        value = float(t.text)
        if not math.isfinite(value):
            raise _Syntax(t, f"number out of range: {t.text!r}")
        return value

    def line(self) -> Line:
        t = self.expect("word")
        if t.text not in _LINES:
            raise _Syntax(t, f"expected 'line2' or 'line3', got {t.text!r}")
        return _LINES[t.text]

    def parse(self) -> Circuit:
        steps: list[Step] = []
        if self.tok.kind == "eof":
            self.error(self.tok, "expected at least one step")
        while self.tok.kind != "eof":
            try:
                steps.append(self.step(len(steps) + 1))
            except _Syntax as e:
                self.error(e.tok, e.message)
                self.recover_to_step()
        return Circuit(tuple(steps))

    def recover_to_step(self) -> None:
        while self.tok.kind != "eof" and not (self.tok.kind == "word" and self.tok.text == "step"):
            self.advance()

    def step(self, expected_number: int) -> Step:
        head = self.tok
        if head.kind != "word" or head.text != "step":
            raise _Syntax(head, f"unknown keyword {head.text!r}, expected 'step'")
        self.advance()
        num_tok = self.tok
        number = self.integer()
        if number != expected_number:
            self.error(
                num_tok,
                f"steps must be numbered consecutively: expected {expected_number}, got {number}",
            )
        self.expect("{")
        coins: dict[Line, Coin] = {}
        retarders: list[PhaseRetarder] = []
        shift_tok: Optional[Token] = None
        exchange: Optional[ExchangeRule] = None
        exchange_tok: Optional[Token] = None
        stages: list[int] = []
        while self.tok.kind != "}":
            t = self.tok
            if t.kind == "eof":
                raise _Syntax(t, "unterminated step: expected '}'")
            try:
                if t.kind != "word" or t.text not in _STMT_KEYWORDS:
                    raise _Syntax(t, f"unknown keyword {t.text!r}")
                self.advance()
                stages.append(_STAGE[t.text])
                if t.text == "coin":
                    line = self.line()
                    coin = self.coin()
                    if line in coins:
                        self.error(t, f"duplicate coin for {line} in step {number}")
                    else:
                        coins[line] = coin
                elif t.text == "pr":
                    line = self.line()
                    pos = self.integer()
                    retarders.append(PhaseRetarder(line, pos, self.real()))
                elif t.text == "shift":
                    if shift_tok is not None:
                        self.error(t, f"duplicate shift in step {number}")
                    shift_tok = t
                else:
                    self.expect("word", "pos")
                    self.expect("=")
                    rule = ExchangeRule(self.integer())
                    if exchange_tok is not None:
                        self.error(t, f"duplicate exchange in step {number}")
                    else:
                        exchange, exchange_tok = rule, t
            except _Syntax as e:
                self.error(e.tok, e.message)
                self.recover_to_statement()
        self.expect("}")
        if stages != sorted(stages):
            self.warn(
                head,
                f"step {number}: statements reordered to retarders, coins, shift, exchange",
            )
        return Step(
            coin_line2=coins.get(Line.LINE2, Coin.identity()),
            coin_line3=coins.get(Line.LINE3, Coin.identity()),
            retarders=tuple(retarders),
            do_shift=shift_tok is not None,
            exchange=exchange,
        )

    def recover_to_statement(self) -> None:
        while self.tok.kind not in ("}", "eof") and not (
            self.tok.kind == "word" and self.tok.text in _STMT_KEYWORDS + ("step",)
        ):
            self.advance()
        if self.tok.kind == "word" and self.tok.text == "step":
            raise _Syntax(self.tok, "unterminated step: expected '}'")

    def coin(self) -> Coin:
        t = self.expect("word")
        if t.text == "I":
            return Coin.identity()
        if t.text == "HWP":
            degrees = self.real()
            return Coin.hwp(math.radians(degrees))
        raise _Syntax(t, f"expected 'I' or 'HWP <degrees>', got {t.text!r}")


def parse(source: str) -> tuple[Circuit, list[Diagnostic]]:
    """Compile ``source``; return the circuit and any warnings.

    Raises :class:`CircuitParseError` carrying every diagnostic if there is
    at least one error.
    """
    p = _Parser(source)
    circuit = p.parse()
    if any(d.severity is Severity.ERROR for d in p.diags):
        raise CircuitParseError(p.diags)
    return circuit, p.diags


def parse_file(path) -> tuple[Circuit, list[Diagnostic]]:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def _num(x: float) -> str:
    s = f"{x:.12g}"
    return "0" if s == "-0" else s


def format_coin(coin: Coin) -> str:
    if coin.hwp_angle is not None:
        return f"HWP {_num(math.degrees(coin.hwp_angle))}"
    if coin.close_to(Coin.identity()):
        return "I"
    raise ValueError(f"coin {coin!r} has no wave-plate angle and cannot be written")


def format_circuit(circuit: Circuit) -> str:
    """Canonical text for ``circuit``; ``parse`` reads it back."""
    out = []
    for n, step in enumerate(circuit, start=1):
        out.append(f"step {n} {{")
        for r in step.retarders:
            out.append(f"  pr {r.line} {r.position} {_num(r.phase)}")
        out.append(f"  coin line2 {format_coin(step.coin_line2)}")
        out.append(f"  coin line3 {format_coin(step.coin_line3)}")
        if step.do_shift:
            out.append("  shift")
        if step.exchange is not None:
            out.append(f"  exchange pos = {step.exchange.position}")
        out.append("}")
    return "\n".join(out) + "\n"


def builtin_protocol_source() -> str:
    return resources.files("qwswap").joinpath(BUILTIN_RESOURCE).read_text(encoding="utf-8")
