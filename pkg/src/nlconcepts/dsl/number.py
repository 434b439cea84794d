"""Parser and evaluator for the number-concept language.

Boolean expressions over a single free variable x, evaluated on the
integers 1..100. Evaluation is total: arithmetic saturates at +/-1e9 and
every predicate is defined for every input.

Grammar (see grammars/number.ebnf):

    expr    = or_expr
    or_expr = and_expr { "or" and_expr }
    and_expr= unary { "and" unary }
    unary   = "not" unary | atom
    atom    = "true" | "false" | pred "(" args ")" | comparison
            | "(" expr ")"
    comparison = arith cmp_op arith { cmp_op arith }
    arith   = term { ("+"|"-") term }
    term    = power { ("*"|"mod") power }
    power   = primary [ "^" integer ]
    primary = integer | "x" | "(" arith ")"

Conventions (these matter for concepts like "powers of two"):
  * prime(1) is false.
  * power(b, x) is true iff x = b^k for some integer k >= 0, so
    power(2, 1) is true.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Tuple

SAT = 10**9  # arithmetic saturation bound


class DslSyntaxError(SyntaxError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Lit:
    value: int


@dataclass(frozen=True)
class Var:
    pass  # the single free variable x


@dataclass(frozen=True)
class Arith:
    op: str  # + - * mod ^
    left: object
    right: object


@dataclass(frozen=True)
class Cmp:
    op: str  # < <= == >= >
    left: object
    right: object


@dataclass(frozen=True)
class Pred:
    name: str
    args: Tuple[object, ...]


@dataclass(frozen=True)
class InSet:
    members: Tuple[int, ...]
    arg: object


@dataclass(frozen=True)
class BoolOp:
    op: str  # and / or
    left: object
    right: object


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class BoolLit:
    value: bool


# arity of each predicate, excluding in_set which has special syntax
PREDICATES = {
    "even": 1,
    "odd": 1,
    "prime": 1,
    "square": 1,
    "cube": 1,
    "power": 2,
    "multiple": 2,
    "between": 3,
    "ends_in": 2,
    "contains_digit": 2,
}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op><=|>=|==|!=|[-+*^<>=(){},%.]))"
)

_CMP_CANON = {"=": "==", "%": "mod"}


def _tokenize(src: str):
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m or m.end() == m.start():
            if src[pos:].strip():
                raise DslSyntaxError(f"unexpected character {src[pos:].strip()[0]!r}", pos)
            break
        if m.group("num") is not None:
            tokens.append(("num", int(m.group("num")), m.start()))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name"), m.start()))
        else:
            op = _CMP_CANON.get(m.group("op"), m.group("op"))
            tokens.append(("op", op, m.start()))
        pos = m.end()
    tokens.append(("eof", None, len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            raise DslSyntaxError(f"expected {want!r}, found {tok[1]!r}", tok[2])
        return tok

    def fail(self, message):
        raise DslSyntaxError(message, self.peek()[2])

    # booleans ------------------------------------------------------------

    def parse_expr(self):
        node = self.parse_and()
        while self.peek()[:2] == ("name", "or"):
            self.next()
            node = BoolOp("or", node, self.parse_and())
        return node

    def parse_and(self):
        node = self.parse_unary()
        while self.peek()[:2] == ("name", "and"):
            self.next()
            node = BoolOp("and", node, self.parse_unary())
        return node

    def parse_unary(self):
        if self.peek()[:2] == ("name", "not"):
            self.next()
            return Not(self.parse_unary())
        return self.parse_atom()

    def parse_atom(self):
        kind, value, pos = self.peek()
        if kind == "name" and value in ("true", "false"):
            self.next()
            return BoolLit(value == "true")
        if kind == "name" and value == "in_set":
            return self.parse_in_set()
        if kind == "name" and value in PREDICATES:
            return self.parse_pred()
        if kind == "op" and value == "(":
            # could be a parenthesized boolean or the start of an
            # arithmetic comparison; backtrack on comparison failure
            saved = self.i
            self.next()
            try:
                node = self.parse_expr()
                self.expect("op", ")")
                if self._at_cmp():
                    raise DslSyntaxError("arith context", pos)
                return node
            except DslSyntaxError:
                self.i = saved
        return self.parse_comparison()

    def _at_cmp(self):
        kind, value, _ = self.peek()
        return kind == "op" and value in ("<", "<=", "==", "!=", ">=", ">")

    def parse_pred(self):
        _, name, _ = self.next()
        self.expect("op", "(")
        args = [self.parse_arith()]
        while self.peek()[:2] == ("op", ","):
            self.next()
            args.append(self.parse_arith())
        self.expect("op", ")")
        if len(args) != PREDICATES[name]:
            self.fail(f"{name} takes {PREDICATES[name]} argument(s), got {len(args)}")
        return Pred(name, tuple(args))

    def parse_in_set(self):
        self.next()  # in_set
        self.expect("op", "(")
        self.expect("op", "{")
        members = [self.expect("num")[1]]
        while self.peek()[:2] == ("op", ","):
            self.next()
            members.append(self.expect("num")[1])
        self.expect("op", "}")
        self.expect("op", ",")
        arg = self.parse_arith()
        self.expect("op", ")")
        return InSet(tuple(members), arg)

    def parse_comparison(self):
        left = self.parse_arith()
        if not self._at_cmp():
            self.fail("expected a comparison operator")
        node = None
        while self._at_cmp():
            op = self.next()[1]
            right = self.parse_arith()
            link = Cmp(op, left, right)
            node = link if node is None else BoolOp("and", node, link)
            left = right
        return node

    # arithmetic ----------------------------------------------------------

    def parse_arith(self):
        node = self.parse_term()
        while self.peek()[0] == "op" and self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            node = Arith(op, node, self.parse_term())
        return node

    def parse_term(self):
        node = self.parse_power()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "mod") or self.peek()[:2] == ("name", "mod"):
            op = self.next()[1]
            node = Arith("mod" if op == "mod" else op, node, self.parse_power())
        return node

    def parse_power(self):
        node = self.parse_primary()
        if self.peek()[:2] == ("op", "^"):
            self.next()
            exponent = self.expect("num")[1]
            node = Arith("^", node, Lit(exponent))
        return node

    def parse_primary(self):
        kind, value, pos = self.next()
        if kind == "num":
            return Lit(value)
        if kind == "name" and value == "x":
            return Var()
        if kind == "op" and value == "(":
            node = self.parse_arith()
            self.expect("op", ")")
            return node
        raise DslSyntaxError(f"unexpected token {value!r}", pos)


def parse_number_concept(src: str):
    """Parse a number-concept expression; raises DslSyntaxError on failure."""
    parser = _Parser(src)
    node = parser.parse_expr()
    if parser.peek()[0] != "eof":
        parser.fail(f"trailing input {parser.peek()[1]!r}")
    return node


# ---------------------------------------------------------------------------
# Evaluation


def _sat(v: int) -> int:
    return max(-SAT, min(SAT, v))


def _eval_arith(node, x: int) -> int:
    if isinstance(node, Lit):
        return node.value
    if isinstance(node, Var):
        return x
    a = _eval_arith(node.left, x)
    b = _eval_arith(node.right, x)
    if node.op == "+":
        return _sat(a + b)
    if node.op == "-":
        return _sat(a - b)
    if node.op == "*":
        return _sat(a * b)
    if node.op == "mod":
        return a % b if b != 0 else 0
    if node.op == "^":
        if b < 0:
            return 0
        out = 1
        for _ in range(min(b, 64)):
            out = _sat(out * a)
            if abs(out) >= SAT:
                break
        return out
    raise AssertionError(node.op)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _is_power(base: int, n: int) -> bool:
    # n = base^k for integer k >= 0
    if n == 1:
        return True
    if base in (-1, 0, 1):
        return n == base
    v = 1
    while abs(v) < abs(n) + 1:
        v *= base
        if v == n:
            return True
        if v == 0:
            break
    return False


def _eval_pred(name: str, args, x: int) -> bool:
    vals = [_eval_arith(a, x) for a in args]
    if name == "even":
        return vals[0] % 2 == 0
    if name == "odd":
        return vals[0] % 2 != 0
    if name == "prime":
        return _is_prime(vals[0])
    if name == "square":
        v = vals[0]
        return v >= 0 and int(round(v**0.5)) ** 2 == v
    if name == "cube":
        v = vals[0]
        r = int(round(abs(v) ** (1 / 3)))
        return any((r + d) ** 3 == abs(v) for d in (-1, 0, 1)) if v >= 0 else False
    if name == "power":
        return _is_power(vals[0], vals[1])
    if name == "multiple":
        k, v = vals
        return v % k == 0 if k != 0 else v == 0
    if name == "between":
        lo, hi, v = vals
        return lo <= v <= hi
    if name == "ends_in":
        d, v = vals
        return abs(v) % 10 == d
    if name == "contains_digit":
        d, v = vals
        return str(d) in str(abs(v))
    raise AssertionError(name)


def eval_number(expr, x: int) -> bool:
    """Evaluate a parsed expression at x. Total for any integer input."""
    if isinstance(expr, BoolLit):
        return expr.value
    if isinstance(expr, BoolOp):
        if expr.op == "and":
            return eval_number(expr.left, x) and eval_number(expr.right, x)
        return eval_number(expr.left, x) or eval_number(expr.right, x)
    if isinstance(expr, Not):
        return not eval_number(expr.arg, x)
    if isinstance(expr, Cmp):
        a = _eval_arith(expr.left, x)
        b = _eval_arith(expr.right, x)
        return {
            "<": a < b,
            "<=": a <= b,
            "==": a == b,
            "!=": a != b,
            ">=": a >= b,
            ">": a > b,
        }[expr.op]
    if isinstance(expr, Pred):
        return _eval_pred(expr.name, expr.args, x)
    if isinstance(expr, InSet):
        return _eval_arith(expr.arg, x) in expr.members
    raise TypeError(f"not a boolean expression: {expr!r}")


def number_extension(expr) -> frozenset:
    """The set of integers in 1..100 satisfying the expression."""
    return frozenset(x for x in range(1, 101) if eval_number(expr, x))


# ---------------------------------------------------------------------------
# Formatting (minimal parenthesization, round-trips through the parser)

_BOOL_PREC = {"or": 1, "and": 2}
_ARITH_PREC = {"+": 1, "-": 1, "*": 2, "mod": 2, "^": 3}


def _fmt_arith(node, parent_prec=0) -> str:
    if isinstance(node, Lit):
        return str(node.value)
    if isinstance(node, Var):
        return "x"
    prec = _ARITH_PREC[node.op]
    op = f" {node.op} " if node.op == "mod" else f" {node.op} " if node.op in "+-" else node.op
    if node.op == "^":
        text = f"{_fmt_arith(node.left, prec + 1)}^{_fmt_arith(node.right, prec)}"
    else:
        text = f"{_fmt_arith(node.left, prec)}{op}{_fmt_arith(node.right, prec + 1)}"
    return f"({text})" if prec < parent_prec else text


def format_number_concept(node, parent_prec=0) -> str:
    if isinstance(node, BoolLit):
        return "true" if node.value else "false"
    if isinstance(node, BoolOp):
        prec = _BOOL_PREC[node.op]
        text = (
            f"{format_number_concept(node.left, prec)} {node.op} "
            f"{format_number_concept(node.right, prec + 1)}"
        )
        return f"({text})" if prec < parent_prec else text
    if isinstance(node, Not):
        return f"not {format_number_concept(node.arg, 3)}"
    if isinstance(node, Cmp):
        return f"{_fmt_arith(node.left)} {node.op} {_fmt_arith(node.right)}"
    if isinstance(node, Pred):
        args = ", ".join(_fmt_arith(a) for a in node.args)
        return f"{node.name}({args})"
    if isinstance(node, InSet):
        members = ", ".join(str(m) for m in node.members)
        return f"in_set({{{members}}}, {_fmt_arith(node.arg)})"
    raise TypeError(f"not a boolean expression: {node!r}")
