"""Text problem files.

A problem file is a list of ``[section]`` headers followed by ``key = value``
lines; ``#`` starts a comment. Example::

    [problem]
    name = rod            # optional, names output files
    kind = diffusion      # or wave
    bc = dirichlet        # or robin
    alpha = 0.5
    l = 1
    T = 1

    [coefficients]
    k = 1 + 0.5 * sin(pi * x / l) * exp(-t)
    q = x * t
    f = 0

    [boundary]            # robin only
    beta1 = 1
    beta2 = 1
    mu1 = 0
    mu2 = 0

    [initial]
    u0 = sin(pi * x / l)
    u1 = 0                # wave only

    [exact]               # optional, enables error tables
    u = exp(-t) * sin(pi * x / l)

Expressions follow the grammar::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" unary)?            # right associative
    atom   := number | name | name "(" expr ")" | "(" expr ")"

with functions ``sin``, ``cos``, ``exp``, constants ``pi`` and ``l``, and the
variables ``x`` (space) and ``t`` (time). Which variables are allowed depends
on the key: ``k, q, f, u`` take ``x, t``; ``beta_i, mu_i`` take ``t``;
``u0, u1`` take ``x``; bounds and ``alpha, l, T`` are constants.
"""

from __future__ import annotations

import pathlib

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from fracenergy.errors import ProblemFileError
from fracenergy.problem_spec import (
    BCKind,
    BoundaryCondition,
    Coefficients,
    EquationKind,
    InitialData,
    ProblemSpec,
    eval_field,
)

__all__ = ["Expression", "parse_expression", "parse_problem", "load_problem", "ParsedProblem"]

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


# {{{ expressions


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(text: str, line: int, col0: int) -> list[_Tok]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ProblemFileError(f"unexpected character {text[bad]!r}", line, col0 + bad)
        kind = m.lastgroup
        out.append(_Tok(kind, m.group(kind), col0 + m.start(kind)))
        pos = m.end()
    out.append(_Tok("end", "", col0 + len(text.rstrip())))
    return out


Node = Callable[[dict], np.ndarray]


class _Parser:
    def __init__(self, text: str, names: dict[str, float], variables: tuple[str, ...],
                 line: int, col0: int) -> None:
        self.toks = _tokenize(text, line, col0)
        self.i = 0
        self.names = names
        self.variables = variables
        self.line = line
        self.used: set[str] = set()

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.toks[self.i]
        return ProblemFileError(msg, self.line, tok.col)

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self, text: str | None = None) -> _Tok:
        tok = self.tok
        if text is not None and tok.text != text:
            found = tok.text or "end of expression"
            raise self.error(f"expected {text!r}, found {found!r}")
        self.i += 1
        return tok

    def parse(self) -> Node:
        if self.tok.kind == "end":
            raise self.error("empty expression")
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self.take().text
            rhs = self.term()
            node = _binary(op, node, rhs)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.take().text
            rhs = self.unary()
            node = _binary(op, node, rhs)
        return node

    def unary(self) -> Node:
        if self.tok.text in ("+", "-"):
            op = self.take().text
            inner = self.unary()
            return inner if op == "+" else (lambda env, a=inner: -a(env))
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.text == "^":
            self.take()
            return _binary("^", base, self.unary())
        return base

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.take()
            value = float(tok.text)
            return lambda env: value
        if tok.text == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if tok.kind == "name":
            self.take()
            name = tok.text
            if name in _FUNCTIONS:
                self.take("(")
                arg = self.expr()
                self.take(")")
                fn = _FUNCTIONS[name]
                return lambda env: fn(arg(env))
            if name in self.variables:
                self.used.add(name)
                return lambda env: env[name]
            if name in self.names:
                value = self.names[name]
                return lambda env: value
            if name in ("x", "t"):
                raise self.error(f"variable {name!r} is not allowed here", tok)
            raise self.error(f"unknown name {name!r}", tok)
        found = tok.text or "end of expression"
        raise self.error(f"unexpected {found!r}")


def _binary(op: str, a: Node, b: Node) -> Node:
    if op == "+":
        return lambda env: a(env) + b(env)
    if op == "-":
        return lambda env: a(env) - b(env)
    if op == "*":
        return lambda env: a(env) * b(env)
    if op == "/":
        return lambda env: np.divide(a(env), b(env))
    return lambda env: np.power(a(env), b(env))


@dataclass(frozen=True)
class Expression:
    """A compiled expression; call with keyword arrays for its variables."""

    text: str
    variables: tuple[str, ...]
    node: Node

    def __call__(self, **env) -> np.ndarray:
        missing = [v for v in self.variables if v not in env]
        if missing:
            raise TypeError(f"missing variables: {', '.join(missing)}")
        with np.errstate(all="ignore"):
            return np.asarray(self.node(env), dtype=np.float64)

    def constant(self) -> float:
        return float(self())


def parse_expression(
    text: str,
    variables: tuple[str, ...] = ("x", "t"),
    names: dict[str, float] | None = None,
    line: int = 1,
    column: int = 1,
) -> Expression:
    """Compile *text*; ``pi`` is always known, other constants come from *names*."""
    consts = {"pi": math.pi}
    consts.update(names or {})
    parser = _Parser(text, consts, variables, line, column)
    node = parser.parse()
    return Expression(text, variables, node)


# }}}


# {{{ files

_SECTIONS = {
    "problem": {"kind", "bc", "alpha", "l", "T", "name"},
    "coefficients": {"k", "q", "f", "c1", "c2", "m1", "m2", "c3"},
    "boundary": {"beta1", "beta2", "mu1", "mu2", "beta", "c4"},
    "initial": {"u0", "u1"},
    "exact": {"u"},
}
_CONSTANT_KEYS = {"alpha", "l", "T", "c1", "c2", "m1", "m2", "c3", "beta", "c4"}
_WORD_KEYS = {"kind", "bc", "name"}
_VARIABLES = {
    "k": ("x", "t"), "q": ("x", "t"), "f": ("x", "t"), "u": ("x", "t"),
    "beta1": ("t",), "beta2": ("t",), "mu1": ("t",), "mu2": ("t",),
    "u0": ("x",), "u1": ("x",),
}


@dataclass(frozen=True)
class _Entry:
    value: str
    line: int
    column: int


@dataclass(frozen=True)
class ParsedProblem:
    spec: ProblemSpec
    #: exact solution ``u(x, t)`` if the file has an ``[exact]`` section
    exact: Callable | None
    name: str


def _read_entries(text: str) -> dict[str, dict[str, _Entry]]:
    sections: dict[str, dict[str, _Entry]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        col = len(line) - len(line.lstrip()) + 1
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ProblemFileError("unterminated section header", lineno, col)
            name = stripped[1:-1].strip()
            if name not in _SECTIONS:
                raise ProblemFileError(
                    f"unknown section [{name}]; expected one of {', '.join(_SECTIONS)}", lineno, col
                )
            if name in sections:
                raise ProblemFileError(f"duplicate section [{name}]", lineno, col)
            sections[name] = {}
            current = name
            continue
        if "=" not in line:
            raise ProblemFileError("expected 'key = value'", lineno, col)
        if current is None:
            raise ProblemFileError("entry before any section header", lineno, col)
        key_part, value = line.split("=", 1)
        key = key_part.strip()
        if key not in _SECTIONS[current]:
            raise ProblemFileError(f"unknown key {key!r} in [{current}]", lineno, col)
        if key in sections[current]:
            raise ProblemFileError(f"duplicate key {key!r}", lineno, col)
        vcol = len(key_part) + 2
        sections[current][key] = _Entry(value, lineno, vcol)
    return sections


def parse_problem(text: str, alpha: float | None = None, default_name: str = "problem-file") -> ParsedProblem:
    """Parse problem-file *text*; *alpha*, if given, overrides the file's value.

    The problem is named by its ``name`` key, else by *default_name*.
    """
    sections = _read_entries(text)
    if "problem" not in sections:
        raise ProblemFileError("missing [problem] section", 1, 1)
    prob = sections["problem"]

    def need(section: str, key: str) -> _Entry:
        entry = sections.get(section, {}).get(key)
        if entry is None:
            raise ProblemFileError(f"missing key {key!r} in [{section}]", 1, 1)
        return entry

    def word(key: str, choices) -> str:
        entry = need("problem", key)
        value = entry.value.strip().lower()
        if value not in choices:
            raise ProblemFileError(
                f"{key} must be one of {', '.join(choices)}, got {value!r}", entry.line, entry.column
            )
        return value

    kind = EquationKind(word("kind", [k.value for k in EquationKind]))
    bc_kind = BCKind(word("bc", [b.value for b in BCKind]))

    def const(section: str, key: str, names: dict[str, float], default=None):
        entry = sections.get(section, {}).get(key)
        if entry is None:
            if default is _REQUIRED:
                need(section, key)
            return default
        return parse_expression(entry.value, (), names, entry.line, entry.column).constant()

    l = const("problem", "l", {}, 1.0)
    names = {"l": l}
    T = const("problem", "T", names, 1.0)
    a = const("problem", "alpha", names, _REQUIRED) if alpha is None else float(alpha)
    if not (0.0 < a < 1.0):
        entry = prob.get("alpha")
        raise ProblemFileError(
            f"alpha must lie in (0, 1), got {a!r}",
            entry.line if entry and alpha is None else 0,
            entry.column if entry and alpha is None else 0,
        )

    def fn(section: str, key: str, required: bool = True):
        entry = sections.get(section, {}).get(key)
        if entry is None:
            if required:
                need(section, key)
            return None
        expr = parse_expression(entry.value, _VARIABLES[key], names, entry.line, entry.column)
        variables = _VARIABLES[key]
        if variables == ("x", "t"):
            return lambda x, t, e=expr: e(x=x, t=t)
        if variables == ("t",):
            return lambda t, e=expr: e(t=t)
        return lambda x, e=expr: e(x=x)

    coeffs = Coefficients(
        k=fn("coefficients", "k"),
        q=fn("coefficients", "q"),
        f=fn("coefficients", "f"),
        **{b: const("coefficients", b, names) for b in ("c1", "c2", "m1", "m2", "c3")},
    )

    robin = bc_kind is BCKind.Robin
    if not robin and sections.get("boundary"):
        first = next(iter(sections["boundary"].values()))
        raise ProblemFileError("[boundary] entries are only used with bc = robin", first.line, 1)
    bc = BoundaryCondition(
        bc_kind,
        beta1=fn("boundary", "beta1", robin),
        beta2=fn("boundary", "beta2", robin),
        mu1=fn("boundary", "mu1", robin),
        mu2=fn("boundary", "mu2", robin),
        beta=const("boundary", "beta", names),
        c4=const("boundary", "c4", names),
    )

    wave = kind is EquationKind.Wave
    u1_entry = sections.get("initial", {}).get("u1")
    if u1_entry is not None and not wave:
        raise ProblemFileError("u1 is only used by wave problems", u1_entry.line, 1)
    init = InitialData(fn("initial", "u0"), fn("initial", "u1", wave))

    exact_fn = fn("exact", "u", False)
    exact = None if exact_fn is None else (lambda x, t, g=exact_fn: eval_field(g, x, t))

    name_entry = prob.get("name")
    name = name_entry.value.strip() if name_entry else default_name
    spec = ProblemSpec(kind, a, l, T, coeffs, bc, init, source=f"{name}\n{text}")
    return ParsedProblem(spec, exact, name)


_REQUIRED = object()


def load_problem(path, alpha: float | None = None) -> ParsedProblem:
    """Read and parse a problem file; unnamed problems take the file's stem."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_problem(text, alpha, default_name=pathlib.Path(path).stem)


# }}}
