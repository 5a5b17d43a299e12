"""The model-construction language: a closed textual form in which a language
model (or a person) writes workflow models.

The language has assignments, five whitelisted constructor calls, and a final
declaration naming the resulting model. It is interpreted by a closed
evaluator, never executed by a general-purpose runtime: there is no way to
express I/O, imports, loops, or arithmetic, so untrusted sources are safe by
construction.

Grammar::

    program    = { stmt } , finaldecl
    stmt       = ident "=" expr term
    finaldecl  = "final" "(" ident ")"
    expr       = call | ident
    call       = "activity" "(" string ")" | "silent" "(" ")"
               | "xor" "(" expr { "," expr } ")"
               | "loop" "(" expr "," expr ")"
               | "partial_order" "(" "[" expr { "," expr } "]" ","
                                     "[" [ edge { "," edge } ] "]" ")"
    edge       = "(" integer "," integer ")"
    term       = newline | ";"

Comments run from ``#`` to end of line. Newlines inside brackets do not
terminate a statement, and terminators between statements are optional; both
liberalizations accept strictly more of what language models actually emit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from .powl import (
    ArityError,
    BadEdgeError,
    CyclicOrderError,
    InvalidLabelError,
    MAX_MODEL_NODES,
    PowlNode,
    make_activity,
    make_loop,
    make_partial_order,
    make_silent,
    make_xor,
)

MAX_SOURCE_CHARS = 20_000
MAX_STATEMENTS = 500

FUNCTIONS = ("activity", "silent", "xor", "loop", "partial_order")
RESERVED = set(FUNCTIONS) | {"final"}

# Tokens from general-purpose languages; naming them precisely beats a
# generic syntax error when a model tries to smuggle real code in.
FORBIDDEN = {
    "import", "from", "def", "class", "return", "while", "for", "if", "elif",
    "else", "try", "except", "finally", "with", "lambda", "global", "nonlocal",
    "del", "yield", "raise", "pass", "break", "continue", "assert", "async",
    "await", "exec", "eval", "open", "print", "input", "compile", "__import__",
    "getattr", "setattr", "globals", "locals", "vars",
}


class PclError(Exception):
    """A rejected program. The message is self-contained because it is sent
    back to the language model verbatim."""

    def __init__(self, kind: str, line: int, col: int, message: str):
        super().__init__(f"{kind} error at line {line}, column {col}: {message}")
        self.kind = kind
        self.line = line
        self.col = col
        self.message = message


@dataclass(frozen=True)
class Token:
    kind: str  # NAME | STRING | INT | SYMBOL | TERM | EOF
    value: str
    line: int
    col: int


@dataclass(frozen=True)
class IdentRef:
    name: str
    line: int
    col: int


@dataclass(frozen=True)
class CallExpr:
    func: str
    args: tuple["Expr", ...]
    edges: tuple[tuple[int, int], ...]
    label: str | None
    line: int
    col: int


Expr = Union[IdentRef, CallExpr]


@dataclass(frozen=True)
class Statement:
    target: str
    expr: Expr
    line: int
    col: int


@dataclass(frozen=True)
class PclProgram:
    statements: tuple[Statement, ...]
    final_ident: str
    final_line: int
    final_col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    depth = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            if depth == 0:
                tokens.append(Token("TERM", "\n", line, col))
            i += 1
            line += 1
            col = 1
            continue
        if ch == ";":
            tokens.append(Token("TERM", ";", line, col))
            i += 1
            col += 1
            continue
        if ch.isalpha() or ch == "_":
            start, start_col = i, col
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
                col += 1
            tokens.append(Token("NAME", source[start:i], line, start_col))
            continue
        if ch.isdigit():
            start, start_col = i, col
            while i < n and source[i].isdigit():
                i += 1
                col += 1
            tokens.append(Token("INT", source[start:i], line, start_col))
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            chars: list[str] = []
            while True:
                if i >= n or source[i] == "\n":
                    raise PclError("lex", start_line, start_col, "unterminated string literal")
                c = source[i]
                if c == "\\":
                    if i + 1 >= n or source[i + 1] not in ('"', "\\"):
                        raise PclError(
                            "lex", line, col,
                            'unsupported escape in string; only \\" and \\\\ are allowed',
                        )
                    chars.append(source[i + 1])
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    i += 1
                    col += 1
                    break
                chars.append(c)
                i += 1
                col += 1
            tokens.append(Token("STRING", "".join(chars), start_line, start_col))
            continue
        if ch in "()[]=,":
            if ch in "([":
                depth += 1
            elif ch in ")]":
                depth = max(0, depth - 1)
            tokens.append(Token("SYMBOL", ch, line, col))
            i += 1
            col += 1
            continue
        raise PclError("lex", line, col, f"unexpected character {ch!r}")
    tokens.append(Token("EOF", "", line, col))
    return tokens


def lexes(source: str) -> bool:
    """True if the text tokenizes cleanly and contains at least one real token."""
    try:
        tokens = tokenize(source)
    except PclError:
        return False
    return any(t.kind not in ("TERM", "EOF") for t in tokens)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect_symbol(self, symbol: str, context: str) -> Token:
        tok = self.peek()
        if tok.kind == "SYMBOL" and tok.value == symbol:
            return self.advance()
        raise PclError(
            "parse", tok.line, tok.col,
            f"expected '{symbol}' {context}, found {_describe(tok)}",
        )

    def skip_terms(self) -> None:
        while self.peek().kind == "TERM":
            self.advance()


def _describe(tok: Token) -> str:
    if tok.kind == "EOF":
        return "end of input"
    if tok.kind == "TERM":
        return "end of line"
    return f"'{tok.value}'"


def parse(source: str) -> PclProgram:
    if len(source) > MAX_SOURCE_CHARS:
        raise PclError(
            "limit-exceeded", 1, 1,
            f"source is {len(source)} characters long, limit is {MAX_SOURCE_CHARS}",
        )
    p = _Parser(tokenize(source))
    statements: list[Statement] = []
    p.skip_terms()
    while True:
        tok = p.peek()
        if tok.kind == "EOF":
            raise PclError(
                "no-final", tok.line, tok.col,
                "the program never declares its result; end with final(<identifier>)",
            )
        if tok.kind != "NAME":
            raise PclError(
                "parse", tok.line, tok.col,
                f"expected a statement or final(...), found {_describe(tok)}",
            )
        if tok.value == "final":
            break
        statements.append(_parse_statement(p))
        if len(statements) > MAX_STATEMENTS:
            raise PclError(
                "limit-exceeded", tok.line, tok.col,
                f"program has more than {MAX_STATEMENTS} statements",
            )
        p.skip_terms()

    final_tok = p.advance()  # 'final'
    p.expect_symbol("(", "after final")
    ident = p.peek()
    if ident.kind != "NAME":
        raise PclError(
            "parse", ident.line, ident.col,
            f"final(...) needs an identifier, found {_describe(ident)}",
        )
    p.advance()
    p.expect_symbol(")", "to close final(...)")
    p.skip_terms()
    trailing = p.peek()
    if trailing.kind != "EOF":
        raise PclError(
            "parse", trailing.line, trailing.col,
            f"nothing may follow the final declaration, found {_describe(trailing)}",
        )
    return PclProgram(tuple(statements), ident.value, final_tok.line, final_tok.col)


def _parse_statement(p: _Parser) -> Statement:
    target = p.advance()
    if target.value in FORBIDDEN:
        raise PclError(
            "forbidden-construct", target.line, target.col,
            f"the token '{target.value}' is not part of the modeling language; "
            "only activity, silent, xor, loop, partial_order and final are available",
        )
    if target.value in RESERVED:
        raise PclError(
            "parse", target.line, target.col,
            f"'{target.value}' is a reserved word and cannot be assigned",
        )
    p.expect_symbol("=", f"after identifier '{target.value}'")
    expr = _parse_expr(p)
    tok = p.peek()
    if tok.kind == "TERM":
        p.advance()
    elif tok.kind not in ("EOF", "NAME"):
        raise PclError(
            "parse", tok.line, tok.col,
            f"expected end of statement, found {_describe(tok)}",
        )
    return Statement(target.value, expr, target.line, target.col)


def _parse_expr(p: _Parser) -> Expr:
    tok = p.peek()
    if tok.kind != "NAME":
        raise PclError(
            "parse", tok.line, tok.col, f"expected an expression, found {_describe(tok)}"
        )
    name = tok.value
    is_call = p.peek(1).kind == "SYMBOL" and p.peek(1).value == "("
    if not is_call:
        if name in FORBIDDEN:
            raise PclError(
                "forbidden-construct", tok.line, tok.col,
                f"the token '{name}' is not part of the modeling language",
            )
        if name in RESERVED:
            raise PclError(
                "parse", tok.line, tok.col,
                f"'{name}' is a reserved word, not a submodel identifier",
            )
        p.advance()
        return IdentRef(name, tok.line, tok.col)
    if name not in FUNCTIONS:
        if name in FORBIDDEN:
            raise PclError(
                "forbidden-construct", tok.line, tok.col,
                f"calling '{name}' is not allowed; the only functions are "
                + ", ".join(FUNCTIONS),
            )
        if name == "final":
            raise PclError(
                "parse", tok.line, tok.col,
                "final(...) is only allowed as the program's last declaration",
            )
        raise PclError(
            "unknown-function", tok.line, tok.col,
            f"unknown function '{name}'; the only functions are " + ", ".join(FUNCTIONS),
        )
    p.advance()
    p.expect_symbol("(", f"after '{name}'")
    if name == "activity":
        return _parse_activity(p, tok)
    if name == "silent":
        return _parse_silent(p, tok)
    if name == "partial_order":
        return _parse_partial_order(p, tok)
    args = _parse_expr_list(p, closing=")")
    p.expect_symbol(")", f"to close {name}(...)")
    if name == "xor" and len(args) < 2:
        raise PclError(
            "arity", tok.line, tok.col,
            f"xor(...) needs at least 2 alternatives, got {len(args)}",
        )
    if name == "loop" and len(args) != 2:
        raise PclError(
            "arity", tok.line, tok.col,
            f"loop(...) takes exactly 2 arguments (do, redo), got {len(args)}",
        )
    return CallExpr(name, tuple(args), (), None, tok.line, tok.col)


def _parse_activity(p: _Parser, tok: Token) -> CallExpr:
    nxt = p.peek()
    if nxt.kind == "SYMBOL" and nxt.value == ")":
        raise PclError(
            "arity", tok.line, tok.col, "activity(...) takes exactly 1 string label, got 0"
        )
    if nxt.kind != "STRING":
        raise PclError(
            "parse", nxt.line, nxt.col,
            f"activity(...) needs a double-quoted label, found {_describe(nxt)}",
        )
    p.advance()
    if p.peek().kind == "SYMBOL" and p.peek().value == ",":
        raise PclError(
            "arity", tok.line, tok.col, "activity(...) takes exactly 1 string label"
        )
    p.expect_symbol(")", "to close activity(...)")
    return CallExpr("activity", (), (), nxt.value, tok.line, tok.col)


def _parse_silent(p: _Parser, tok: Token) -> CallExpr:
    nxt = p.peek()
    if not (nxt.kind == "SYMBOL" and nxt.value == ")"):
        raise PclError("arity", tok.line, tok.col, "silent() takes no arguments")
    p.advance()
    return CallExpr("silent", (), (), None, tok.line, tok.col)


def _parse_partial_order(p: _Parser, tok: Token) -> CallExpr:
    nxt = p.peek()
    if not (nxt.kind == "SYMBOL" and nxt.value == "["):
        raise PclError(
            "parse", nxt.line, nxt.col,
            "partial_order(...) takes two bracketed lists: [children], [edges]; "
            f"found {_describe(nxt)}",
        )
    p.advance()
    children = _parse_expr_list(p, closing="]")
    p.expect_symbol("]", "to close the child list")
    if not children:
        raise PclError(
            "arity", tok.line, tok.col, "partial_order(...) needs at least 1 child"
        )
    p.expect_symbol(",", "between the child list and the edge list")
    p.expect_symbol("[", "to open the edge list")
    edges: list[tuple[int, int]] = []
    while not (p.peek().kind == "SYMBOL" and p.peek().value == "]"):
        p.expect_symbol("(", "to open an edge pair")
        first = p.peek()
        if first.kind != "INT":
            raise PclError(
                "parse", first.line, first.col,
                f"edge indices must be integers, found {_describe(first)}",
            )
        p.advance()
        p.expect_symbol(",", "between edge indices")
        second = p.peek()
        if second.kind != "INT":
            raise PclError(
                "parse", second.line, second.col,
                f"edge indices must be integers, found {_describe(second)}",
            )
        p.advance()
        p.expect_symbol(")", "to close the edge pair")
        edges.append((int(first.value), int(second.value)))
        if p.peek().kind == "SYMBOL" and p.peek().value == ",":
            p.advance()
        elif not (p.peek().kind == "SYMBOL" and p.peek().value == "]"):
            bad = p.peek()
            raise PclError(
                "parse", bad.line, bad.col,
                f"expected ',' or ']' in the edge list, found {_describe(bad)}",
            )
    p.advance()  # ']'
    p.expect_symbol(")", "to close partial_order(...)")
    return CallExpr("partial_order", tuple(children), tuple(edges), None, tok.line, tok.col)


def _parse_expr_list(p: _Parser, closing: str) -> list[Expr]:
    args: list[Expr] = []
    if p.peek().kind == "SYMBOL" and p.peek().value == closing:
        return args
    args.append(_parse_expr(p))
    while p.peek().kind == "SYMBOL" and p.peek().value == ",":
        p.advance()
        args.append(_parse_expr(p))
    return args


def _iter_idents(expr: Expr) -> Iterator[IdentRef]:
    if isinstance(expr, IdentRef):
        yield expr
    else:
        for arg in expr.args:
            yield from _iter_idents(arg)


def check(program: PclProgram) -> PclError | None:
    """First invariant violation in statement order, or None if the program
    is well-formed: single assignment, define-before-use, single consumption,
    and every submodel reachable from the final identifier."""
    assigned: dict[str, Statement] = {}
    consumed: dict[str, IdentRef] = {}
    for stmt in program.statements:
        if stmt.target in assigned:
            first = assigned[stmt.target]
            return PclError(
                "reassignment", stmt.line, stmt.col,
                f"identifier '{stmt.target}' is assigned twice; "
                f"it was first assigned at line {first.line}",
            )
        for ref in _iter_idents(stmt.expr):
            if ref.name not in assigned:
                return PclError(
                    "undefined-ident", ref.line, ref.col,
                    f"identifier '{ref.name}' is used before it is assigned",
                )
            if ref.name in consumed:
                earlier = consumed[ref.name]
                return PclError(
                    "reuse-of-submodel", ref.line, ref.col,
                    f"submodel '{ref.name}' is already part of another submodel "
                    f"(used at line {earlier.line}); every submodel may be used exactly once",
                )
            consumed[ref.name] = ref
        assigned[stmt.target] = stmt

    final = program.final_ident
    if final not in assigned:
        return PclError(
            "undefined-ident", program.final_line, program.final_col,
            f"final(...) names '{final}', which is never assigned",
        )
    if final in consumed:
        earlier = consumed[final]
        return PclError(
            "reuse-of-submodel", program.final_line, program.final_col,
            f"final(...) names '{final}', but it is already part of another "
            f"submodel (used at line {earlier.line})",
        )

    deps = {
        stmt.target: [ref.name for ref in _iter_idents(stmt.expr)]
        for stmt in program.statements
    }
    reachable = {final}
    stack = [final]
    while stack:
        for name in deps.get(stack.pop(), ()):
            if name not in reachable:
                reachable.add(name)
                stack.append(name)
    for stmt in program.statements:
        if stmt.target not in reachable:
            return PclError(
                "unused-submodel", stmt.line, stmt.col,
                f"submodel '{stmt.target}' is never used in the final model; "
                "remove it or connect it",
            )
    return None


def interpret(program: PclProgram) -> PowlNode:
    """Evaluate a check-passing program with the model constructors only.

    Pure by construction: the evaluator touches no files, sockets, clocks, or
    environment, and is deterministic in the source text.
    """
    env: dict[str, PowlNode] = {}
    built = [0]

    def notch(stmt: Statement) -> None:
        built[0] += 1
        if built[0] > MAX_MODEL_NODES:
            raise PclError(
                "limit-exceeded", stmt.line, stmt.col,
                f"model exceeds the size limit of {MAX_MODEL_NODES} nodes",
            )

    def evaluate(expr: Expr, stmt: Statement) -> PowlNode:
        if isinstance(expr, IdentRef):
            return env[expr.name]
        args = [evaluate(a, stmt) for a in expr.args]
        notch(stmt)
        try:
            if expr.func == "activity":
                return make_activity(expr.label or "")
            if expr.func == "silent":
                return make_silent()
            if expr.func == "xor":
                return make_xor(args)
            if expr.func == "loop":
                return make_loop(args[0], args[1])
            if expr.func == "partial_order":
                return make_partial_order(args, set(expr.edges))
        except InvalidLabelError as exc:
            raise PclError("invalid-label", stmt.line, stmt.col, str(exc)) from exc
        except ArityError as exc:
            raise PclError("arity", stmt.line, stmt.col, str(exc)) from exc
        except BadEdgeError as exc:
            raise PclError("bad-edge", stmt.line, stmt.col, str(exc)) from exc
        except CyclicOrderError as exc:
            raise PclError("cyclic-order", stmt.line, stmt.col, str(exc)) from exc
        raise AssertionError(f"unreachable function {expr.func!r}")

    for stmt in program.statements:
        env[stmt.target] = evaluate(stmt.expr, stmt)
    return env[program.final_ident]


def run_pcl(source: str) -> PowlNode:
    """Parse, check, and interpret; raises PclError at the first problem."""
    program = parse(source)
    error = check(program)
    if error is not None:
        raise error
    return interpret(program)
