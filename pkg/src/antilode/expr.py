"""Parser and evaluator for coefficient expressions.

Expressions are built from decimal literals, the constants ``i``, ``pi``,
``e``, the single variable ``x``, the binary operators ``+ - * / ^`` and a
fixed set of unary functions.  Precedence, loosest to tightest: ``+ -``,
``* /``, unary minus, ``^`` (right-associative).  ``i`` is reserved and
always denotes the imaginary unit.

Trees are immutable after parsing and evaluation is pure, so parsed
expressions can be shared freely between threads.
"""

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EvaluationError, ParseError

__all__ = [
    "Lit", "Var", "Neg", "BinOp", "Call", "Expression",
    "parse", "evaluate", "to_str", "depends_on_x", "FUNCTIONS",
]

_PI = 3.141592653589793
_E = 2.718281828459045


@dataclass(frozen=True)
class Lit:
    value: complex


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Expression"


Expression = Union[Lit, Var, Neg, BinOp, Call]

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "exp": np.exp,
    "log": np.log,        # principal branch
    "sqrt": np.sqrt,      # principal branch
    "abs": lambda z: np.abs(z) + 0j,
    "re": lambda z: np.real(z) + 0j,
    "im": lambda z: np.imag(z) + 0j,
    "conj": np.conj,
}

_CONSTANTS = {"i": 1j, "pi": complex(_PI), "e": complex(_E)}

_TOKEN_RE = re.compile(
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)

# left binding powers
_BP_ADD = 10
_BP_MUL = 20
_BP_NEG = 25
_BP_POW = 30


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def advance(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, op: str, expected: str):
        kind, text, pos = self.advance()
        if kind != "op" or text != op:
            found = repr(text) if kind != "end" else "end of input"
            raise ParseError(f"expected {expected}, found {found}", pos)

    def parse_expression(self, min_bp: int) -> Expression:
        left = self._nud(self.advance())
        while True:
            kind, text, _ = self.peek()
            if kind != "op" or text not in "+-*/^":
                break
            bp = _BP_ADD if text in "+-" else (_BP_MUL if text in "*/" else _BP_POW)
            if bp <= min_bp:
                break
            self.advance()
            # '^' is right-associative: its right operand may bind another '^'
            right = self.parse_expression(bp - 1 if text == "^" else bp)
            left = BinOp(text, left, right)
        return left

    def _nud(self, tok) -> Expression:
        kind, text, pos = tok
        if kind == "num":
            return Lit(complex(float(text)))
        if kind == "name":
            if text in _CONSTANTS:
                return Lit(_CONSTANTS[text])
            if text == "x":
                return Var()
            if text in FUNCTIONS:
                self.expect("(", f"'(' after function name '{text}'")
                arg = self.parse_expression(0)
                self.expect(")", "')' closing the function argument")
                return Call(text, arg)
            raise ParseError(f"unknown identifier '{text}'", pos)
        if kind == "op":
            if text == "-":
                return Neg(self.parse_expression(_BP_NEG))
            if text == "(":
                inner = self.parse_expression(0)
                self.expect(")", "')'")
                return inner
        found = repr(text) if kind != "end" else "end of input"
        raise ParseError(f"expected a number, name, '(' or unary '-', found {found}", pos)


def parse(text: str) -> Expression:
    """Parse an expression string into an immutable syntax tree."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    p = _Parser(text)
    tree = p.parse_expression(0)
    kind, text_, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected trailing input {text_!r}", pos)
    return tree


def _eval(node: Expression, x):
    if isinstance(node, Lit):
        # numpy scalar: division by zero yields inf/nan (caught later)
        # instead of raising, matching array behaviour
        return np.complex128(node.value)
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        # 0 - z rather than -z: keeps zero imaginary parts on the +0 side,
        # so sqrt(-x) lands on the upper branch like sqrt(0 - x)
        return 0.0 - _eval(node.operand, x)
    if isinstance(node, Call):
        return FUNCTIONS[node.name](_eval(node.arg, x))
    a = _eval(node.left, x)
    b = _eval(node.right, x)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return np.power(a, b)


def evaluate(expr: Expression, x):
    """Evaluate the tree at a real ``x`` (scalar or ndarray) as a complex value.

    Raises :class:`EvaluationError` if the result is non-finite anywhere
    (overflow to infinity, 0/0).
    """
    xv = np.asarray(x, dtype=np.complex128)
    with np.errstate(all="ignore"):
        out = np.asarray(_eval(expr, xv), dtype=np.complex128)
    if out.shape != xv.shape:
        out = np.broadcast_to(out, xv.shape)
    finite = np.isfinite(out)
    if not np.all(finite):
        if xv.ndim == 0:
            raise EvaluationError(f"expression is not finite at x = {x}")
        bad = np.real(xv[np.argmax(~finite)])
        raise EvaluationError(f"expression is not finite at x = {bad}")
    if xv.ndim == 0:
        return complex(out[()])
    return np.array(out)


def _fmt_literal(v: complex) -> str:
    if v == 1j:
        return "i"
    if v.imag == 0.0:
        return repr(v.real)
    if v.real == 0.0:
        return f"{v.imag!r}*i"
    return f"({v.real!r} + {v.imag!r}*i)"


def _precedence(node: Expression) -> int:
    if isinstance(node, BinOp):
        return _BP_ADD if node.op in "+-" else (_BP_MUL if node.op in "*/" else _BP_POW)
    if isinstance(node, Neg):
        return _BP_NEG
    return 100


def _render(node: Expression, required: int) -> str:
    # Parenthesize whenever this node binds looser than its context requires.
    prec = _precedence(node)
    if isinstance(node, Lit):
        s = _fmt_literal(node.value)
    elif isinstance(node, Var):
        s = "x"
    elif isinstance(node, Call):
        s = f"{node.name}({_render(node.arg, 0)})"
    elif isinstance(node, Neg):
        s = "-" + _render(node.operand, _BP_NEG + 1)
    else:
        if node.op == "^":
            # right-associative: only the left child needs strictly tighter binding
            s = _render(node.left, prec + 1) + "^" + _render(node.right, prec)
        elif node.op in "+-":
            s = _render(node.left, prec) + f" {node.op} " + _render(node.right, prec + 1)
        else:
            s = _render(node.left, prec) + node.op + _render(node.right, prec + 1)
    return f"({s})" if prec < required else s


def to_str(expr: Expression) -> str:
    """Render a tree back to a string that re-parses to the identical tree."""
    return _render(expr, 0)


def depends_on_x(expr: Expression) -> bool:
    """Whether the tree references the variable at all."""
    if isinstance(expr, Var):
        return True
    if isinstance(expr, Lit):
        return False
    if isinstance(expr, Neg):
        return depends_on_x(expr.operand)
    if isinstance(expr, Call):
        return depends_on_x(expr.arg)
    return depends_on_x(expr.left) or depends_on_x(expr.right)
