"""The visual-program language.

A program is a list of single-assignment statements::

    BOX0 = LOC('round cocktail table')
    BOX1 = LOC('blue and yellow poster')
    TARGET = CLOSEST(BOX0, BOX1)

Grammar::

    program   := statement (NEWLINE statement)*
    statement := IDENT "=" OPNAME "(" [arg ("," arg)*] ")"
    arg       := STRING | IDENT | NUMBER

Identifiers and op names are case-insensitive and canonicalized to upper
case. Relation synonyms are folded into one canonical op at parse time.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Union

# Argument kinds: set = variable bound to objects, str = query text,
# num = number, prop = box property keyword. A leading "?" marks optional.
SIGNATURES: dict[str, tuple[str, ...]] = {
    "LOC": ("str",),
    "CLOSEST": ("set", "set"),
    "FARTHEST": ("set", "set"),
    "NEAR": ("set", "set", "?num"),
    "FAR": ("set", "set", "?num"),
    "ABOVE": ("set", "set"),
    "BELOW": ("set", "set"),
    "ON": ("set", "set"),
    "HIGHER": ("set", "?set"),
    "LOWER": ("set", "?set"),
    "MIDDLE": ("set", "?set"),
    "LEFT": ("set", "?set"),
    "RIGHT": ("set", "?set"),
    "FRONT": ("set", "?set"),
    "BEHIND": ("set", "?set"),
    "BETWEEN": ("set", "set", "set"),
    "LEFTMOST": ("set",),
    "RIGHTMOST": ("set",),
    "MIN": ("set", "prop"),
    "MAX": ("set", "prop"),
}

VIEW_INDEPENDENT = ("CLOSEST", "FARTHEST", "NEAR", "FAR", "ABOVE", "BELOW", "ON", "MIDDLE", "HIGHER", "LOWER")
VIEW_DEPENDENT = ("LEFT", "RIGHT", "FRONT", "BEHIND", "BETWEEN", "LEFTMOST", "RIGHTMOST")
FUNCTIONAL = ("MIN", "MAX")

ALIASES = {
    "NEXT_TO": "NEAR",
    "CLOSE": "NEAR",
    "UNDER": "BELOW",
    "TOP": "ON",
    "BACK": "BEHIND",
    # best-effort mappings, flagged in traces
    "FACING": "FRONT",
    "LOOKING": "FRONT",
    "ACROSS": "BETWEEN",
}
APPROXIMATE_ALIASES = frozenset({"FACING", "LOOKING", "ACROSS"})
UNSUPPORTED = frozenset({"OPPOSITE"})
PROPERTIES = ("SIZE", "LENGTH", "WIDTH", "HEIGHT")
RESULT_VAR = "TARGET"


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class LexError(ParseError):
    pass


class UnknownOpError(ParseError):
    pass


class UnsupportedRelationError(UnknownOpError):
    pass


class ArityError(ParseError):
    pass


class UndefinedVariableError(ParseError):
    pass


class ReassignmentError(ParseError):
    pass


class ProgramGenerationError(ValueError):
    """No parsable program could be recovered from generated text."""


# -- AST ----------------------------------------------------------------------

@dataclass(frozen=True)
class Str:
    value: str

    def render(self) -> str:
        q = '"' if "'" in self.value else "'"
        return f"{q}{self.value}{q}"


@dataclass(frozen=True)
class Var:
    name: str

    def render(self) -> str:
        return self.name


@dataclass(frozen=True)
class Num:
    value: float

    def render(self) -> str:
        return format(Decimal(repr(float(self.value))), "f")


Arg = Union[Str, Var, Num]


@dataclass(frozen=True)
class Statement:
    output_var: str
    op: str
    args: tuple
    # spelling used in the source, e.g. "FACING" for a FRONT statement
    source_op: str = field(default="", compare=False)
    line: int = field(default=0, compare=False)

    def render(self) -> str:
        return f"{self.output_var} = {self.op}({', '.join(a.render() for a in self.args)})"

    @property
    def approximate(self) -> bool:
        return self.source_op in APPROXIMATE_ALIASES


@dataclass(frozen=True)
class Program:
    statements: tuple

    @property
    def result_var(self) -> str:
        names = [s.output_var for s in self.statements]
        return RESULT_VAR if RESULT_VAR in names else names[-1]

    def __str__(self) -> str:
        return pretty(self)


# -- lexer --------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_PUNCT = {"=": "EQ", "(": "LPAREN", ")": "RPAREN", ",": "COMMA"}


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            tokens.append(Token("NEWLINE", c, line, col))
            i, line, col = i + 1, line + 1, 1
            continue
        if c.isspace():
            i, col = i + 1, col + 1
            continue
        start_col = col
        if c in _PUNCT:
            tokens.append(Token(_PUNCT[c], c, line, col))
            i, col = i + 1, col + 1
        elif c in "'\"":
            j = i + 1
            while j < n and text[j] != c and text[j] != "\n":
                j += 1
            if j >= n or text[j] != c:
                raise LexError("unterminated string literal", line, start_col)
            tokens.append(Token("STRING", text[i + 1:j], line, start_col))
            col += j + 1 - i
            i = j + 1
        elif c.isascii() and c.isalpha():
            j = i + 1
            while j < n and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("IDENT", text[i:j], line, start_col))
            col += j - i
            i = j
        elif c.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                k = j + 1
                while k < n and text[k].isdigit():
                    k += 1
                if k == j + 1:
                    raise LexError("malformed number", line, start_col)
                j = k
            if j < n and (text[j].isalpha() or text[j] == "_"):
                raise LexError(f"malformed number {text[i:j + 1]!r}", line, start_col)
            tokens.append(Token("NUMBER", text[i:j], line, start_col))
            col += j - i
            i = j
        else:
            raise LexError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


# -- parser -------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> Token:
        tok = self.next()
        if tok.kind != kind:
            found = "end of input" if tok.kind == "EOF" else repr(tok.text)
            raise ParseError(f"expected {what}, found {found}", tok.line, tok.col)
        return tok

    def skip_newlines(self):
        while self.peek().kind == "NEWLINE":
            self.next()

    def statement(self) -> tuple[Token, Token, list[tuple[Token, Arg]]]:
        var = self.expect("IDENT", "variable name")
        self.expect("EQ", "'='")
        op = self.expect("IDENT", "module name")
        self.expect("LPAREN", "'('")
        args: list[tuple[Token, Arg]] = []
        if self.peek().kind != "RPAREN":
            while True:
                args.append(self.arg())
                if self.peek().kind == "COMMA":
                    self.next()
                    continue
                break
        self.expect("RPAREN", "')' or ','")
        end = self.peek()
        if end.kind not in ("NEWLINE", "EOF"):
            raise ParseError(f"expected end of statement, found {end.text!r}", end.line, end.col)
        return var, op, args

    def arg(self) -> tuple[Token, Arg]:
        tok = self.next()
        if tok.kind == "STRING":
            if not tok.text.strip():
                raise ParseError("empty string literal", tok.line, tok.col)
            return tok, Str(tok.text)
        if tok.kind == "IDENT":
            return tok, Var(tok.text.upper())
        if tok.kind == "NUMBER":
            return tok, Num(float(tok.text))
        found = "end of input" if tok.kind == "EOF" else repr(tok.text)
        raise ParseError(f"expected an argument, found {found}", tok.line, tok.col)


def _canonical_op(tok: Token) -> str:
    name = tok.text.upper()
    if name in UNSUPPORTED:
        raise UnsupportedRelationError(f"unsupported relation {name}", tok.line, tok.col)
    name = ALIASES.get(name, name)
    if name not in SIGNATURES:
        raise UnknownOpError(f"unknown module {tok.text!r}", tok.line, tok.col)
    return name


def _check_args(op: str, op_tok: Token, args: list[tuple[Token, Arg]], defined: set) -> tuple:
    sig = SIGNATURES[op]
    # name unbound variables before complaining about arity
    for i, (tok, arg) in enumerate(args):
        kind = sig[i].lstrip("?") if i < len(sig) else None
        if isinstance(arg, Var) and kind != "prop" and arg.name not in defined and arg.name not in PROPERTIES:
            raise UndefinedVariableError(f"undefined variable {arg.name}", tok.line, tok.col)
    required = sum(1 for k in sig if not k.startswith("?"))
    if not required <= len(args) <= len(sig):
        want = str(required) if required == len(sig) else f"{required}-{len(sig)}"
        raise ArityError(f"{op} expects {want} arguments, got {len(args)}", op_tok.line, op_tok.col)
    out = []
    for kind, (tok, arg) in zip(sig, args):
        kind = kind.lstrip("?")
        if kind == "prop":
            name = arg.name if isinstance(arg, Var) else arg.value.upper() if isinstance(arg, Str) else None
            if name not in PROPERTIES:
                raise ArityError(f"{op} expects a property in {PROPERTIES}, got {tok.text!r}", tok.line, tok.col)
            out.append(Var(name))
        elif kind == "set":
            if not isinstance(arg, Var):
                raise ArityError(f"{op} expects a variable, got {tok.text!r}", tok.line, tok.col)
            if arg.name not in defined:
                raise UndefinedVariableError(f"undefined variable {arg.name}", tok.line, tok.col)
            out.append(arg)
        elif kind == "str":
            if not isinstance(arg, Str):
                raise ArityError(f"{op} expects a quoted query, got {tok.text!r}", tok.line, tok.col)
            out.append(arg)
        else:
            if not isinstance(arg, Num):
                raise ArityError(f"{op} expects a number, got {tok.text!r}", tok.line, tok.col)
            out.append(arg)
    return tuple(out)


def parse(text: str) -> Program:
    p = _Parser(tokenize(text))
    statements = []
    defined: set = set()
    p.skip_newlines()
    while p.peek().kind != "EOF":
        var_tok, op_tok, args = p.statement()
        op = _canonical_op(op_tok)
        checked = _check_args(op, op_tok, args, defined)
        name = var_tok.text.upper()
        if name in defined:
            raise ReassignmentError(f"variable {name} assigned twice", var_tok.line, var_tok.col)
        defined.add(name)
        statements.append(Statement(name, op, checked, source_op=op_tok.text.upper(), line=var_tok.line))
        p.skip_newlines()
    if not statements:
        eof = p.peek()
        raise ParseError("empty program", eof.line, eof.col)
    return Program(tuple(statements))


def pretty(program: Program) -> str:
    return "\n".join(s.render() for s in program.statements)


def _is_statement_line(line: str) -> bool:
    try:
        tokens = tokenize(line)
        p = _Parser(tokens)
        p.statement()
        return p.peek().kind == "EOF"
    except ParseError:
        return False


def extract_program(raw_llm_text: str) -> Program:
    """Recover a program from free-form generated text.

    Collects runs of consecutive statement lines (blank lines do not break a
    run) and parses the longest run that forms a valid program.
    """
    runs: list[list[str]] = []
    current: list[str] = []
    for line in raw_llm_text.splitlines():
        if not line.strip():
            continue
        if _is_statement_line(line):
            current.append(line.strip())
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)
    errors = []
    for run in sorted(runs, key=len, reverse=True):
        try:
            return parse("\n".join(run))
        except ParseError as exc:
            errors.append(str(exc))
    detail = f" ({errors[0]})" if errors else ""
    raise ProgramGenerationError(f"no parsable program in generated text{detail}")
