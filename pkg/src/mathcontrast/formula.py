"""Arithmetic formula parsing, placeholder alignment, and step merging.

The parser implements

    Expr   := Term (('+' | '-') Term)*
    Term   := Factor (('*' | '/') Factor)*
    Factor := Number | Identifier | '(' Expr ')' | '-' Factor

over text that may carry currency symbols and thousands separators
(stripped while tokenizing). Alignment replaces every number and
identifier with the placeholder '@' so only operator structure remains.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .errors import MergeError, ParseError

log = logging.getLogger(__name__)

ALIGNED_ALPHABET_RE = re.compile(r"^[@+\-*/();]+$")

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


@dataclass(frozen=True)
class ExprNode:
    """One node of a parsed arithmetic expression.

    ``kind`` is one of ``number``, ``identifier``, ``binary``, ``neg``.
    Binary nodes carry exactly two children and an ``op`` in ``+-*/``;
    ``neg`` carries one child; leaves carry their literal ``text``.
    ``span`` is the character range in the source and does not take part
    in structural equality.
    """

    kind: str
    op: str | None = None
    children: tuple["ExprNode", ...] = ()
    text: str | None = None
    span: tuple[int, int] = field(default=(0, 0), compare=False)

    def value(self) -> float:
        """Numeric value of a number leaf."""
        if self.kind != "number":
            raise ValueError(f"not a number leaf: {self.kind}")
        return float(self.text)


@dataclass(frozen=True)
class AlignedFormula:
    """A formula with every operand replaced by '@'.

    ``text`` ranges over the alphabet ``@+-*/();`` (';' joins merged
    steps), ``token_count`` counts the placeholders, and ``origin`` keeps
    the raw pre-alignment string.
    """

    text: str
    token_count: int
    origin: str

    def __post_init__(self):
        if self.text and not ALIGNED_ALPHABET_RE.match(self.text):
            raise ValueError(f"aligned text contains foreign characters: {self.text!r}")
        if not _balanced(self.text):
            raise ValueError(f"aligned text has unbalanced parentheses: {self.text!r}")


def _balanced(s: str) -> bool:
    depth = 0
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_SKIP_CHARS = {"$", "\\"}


def _read_token(s: str, i: int) -> tuple[str, str, int] | None:
    """Read one token at index ``i``; None when s[i] starts no token."""
    ch = s[i]
    if ch.isdigit() or (ch == "." and i + 1 < len(s) and s[i + 1].isdigit()):
        j = i
        seen_dot = False
        text = []
        while j < len(s):
            c = s[j]
            if c.isdigit():
                text.append(c)
            elif c == "." and not seen_dot and j + 1 < len(s) and s[j + 1].isdigit():
                seen_dot = True
                text.append(c)
            elif c == "," and j + 1 < len(s) and s[j + 1].isdigit() and j > i:
                pass  # thousands separator inside a number
            else:
                break
            j += 1
        return "number", "".join(text), j
    if ch.isalpha() or ch == "_":
        j = i
        while j < len(s) and (s[j].isalnum() or s[j] == "_"):
            j += 1
        return "ident", s[i:j], j
    if ch == "@":
        return "at", "@", i + 1
    if ch in "+-*/":
        return "op", ch, i + 1
    if ch == "(":
        return "lparen", ch, i + 1
    if ch == ")":
        return "rparen", ch, i + 1
    return None


def _tokenize(s: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    while i < len(s):
        if s[i].isspace() or s[i] in _SKIP_CHARS:
            i += 1
            continue
        tok = _read_token(s, i)
        if tok is None:
            raise ParseError(f"unexpected character {s[i]!r}", i)
        kind, text, j = tok
        tokens.append((kind, text, i))
        i = j
    return tokens


# ---------------------------------------------------------------------------
# Recursive-descent parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[tuple[str, str, int]], source_len: int):
        self.tokens = tokens
        self.pos = 0
        self.source_len = source_len

    def _peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _err_pos(self) -> int:
        tok = self._peek()
        return tok[2] if tok else self.source_len

    def expr(self) -> ExprNode:
        node = self.term()
        while (tok := self._peek()) and tok[0] == "op" and tok[1] in "+-":
            self.pos += 1
            right = self.term()
            node = ExprNode(
                "binary", tok[1], (node, right), span=(node.span[0], right.span[1])
            )
        return node

    def term(self) -> ExprNode:
        node = self.factor()
        while (tok := self._peek()) and tok[0] == "op" and tok[1] in "*/":
            self.pos += 1
            right = self.factor()
            node = ExprNode(
                "binary", tok[1], (node, right), span=(node.span[0], right.span[1])
            )
        return node

    def factor(self) -> ExprNode:
        tok = self._peek()
        if tok is None:
            raise ParseError("expected operand, found end of input", self._err_pos())
        kind, text, pos = tok
        if kind == "number":
            self.pos += 1
            return ExprNode("number", text=text, span=(pos, pos + len(text)))
        if kind in ("ident", "at"):
            self.pos += 1
            return ExprNode("identifier", text=text, span=(pos, pos + len(text)))
        if kind == "lparen":
            self.pos += 1
            node = self.expr()
            closing = self._peek()
            if closing is None or closing[0] != "rparen":
                raise ParseError("expected ')'", self._err_pos())
            self.pos += 1
            return ExprNode(
                node.kind,
                node.op,
                node.children,
                node.text,
                span=(pos, closing[2] + 1),
            )
        if kind == "op" and text == "-":
            self.pos += 1
            child = self.factor()
            return ExprNode("neg", children=(child,), span=(pos, child.span[1]))
        raise ParseError(f"unexpected token {text!r}", pos)


def parse_expression(raw: str) -> ExprNode:
    """Parse expression text into an AST.

    Currency symbols, backslash escapes, and thousands separators are
    stripped while tokenizing, so error positions refer to the raw input.
    """
    if not raw or not raw.strip():
        raise ParseError("empty expression", 0)
    tokens = _tokenize(raw)
    if not tokens:
        raise ParseError("empty expression", 0)
    parser = _Parser(tokens, len(raw))
    node = parser.expr()
    if parser._peek() is not None:
        tok = parser._peek()
        raise ParseError(f"unexpected trailing token {tok[1]!r}", tok[2])
    return node


def to_text(node: ExprNode) -> str:
    """Render an AST back to text; reparsing yields a structurally equal tree."""
    if node.kind in ("number", "identifier"):
        return node.text
    if node.kind == "neg":
        child = node.children[0]
        inner = to_text(child)
        return f"-({inner})" if child.kind == "binary" else f"-{inner}"
    left, right = node.children
    prec = _PREC[node.op]
    left_s = to_text(left)
    if left.kind == "binary" and _PREC[left.op] < prec:
        left_s = f"({left_s})"
    right_s = to_text(right)
    if right.kind == "binary" and _PREC[right.op] <= prec:
        right_s = f"({right_s})"
    return f"{left_s}{node.op}{right_s}"


# ---------------------------------------------------------------------------
# Variable alignment
# ---------------------------------------------------------------------------


def align_variables(expr: ExprNode | str) -> AlignedFormula:
    """Replace every number and identifier with '@', keeping structure.

    Accepts raw expression text (validated by parsing first, with input
    parentheses preserved verbatim) or an already-parsed node. Text with
    ';' separators is aligned piecewise, so merged formulas realign to
    themselves.
    """
    if isinstance(expr, ExprNode):
        raw = to_text(expr)
    else:
        raw = expr
    parts = raw.split(";")
    aligned_parts = []
    count = 0
    for part in parts:
        parse_expression(part)
        out = []
        for kind, _text, _pos in _tokenize(part):
            if kind in ("number", "ident", "at"):
                out.append("@")
                count += 1
            else:
                out.append(_text)
        aligned_parts.append("".join(out))
    return AlignedFormula(";".join(aligned_parts), count, raw)


def merge_steps(steps: list[str]) -> AlignedFormula:
    """Join per-step formulas into one aligned total formula.

    A single step aligns directly; several steps join with ';' (a
    first-class character for downstream edit distance). Unparseable
    steps are dropped with a logged warning count.
    """
    if not steps:
        raise MergeError("no steps to merge")
    kept = []
    dropped = 0
    for step in steps:
        try:
            kept.append(align_variables(step))
        except ParseError:
            dropped += 1
    if dropped:
        log.warning("merge_steps dropped %d unparseable step(s)", dropped)
    if not kept:
        raise MergeError(f"all {len(steps)} steps were unparseable")
    if len(kept) == 1:
        return kept[0]
    return AlignedFormula(
        ";".join(a.text for a in kept),
        sum(a.token_count for a in kept),
        ";".join(a.origin for a in kept),
    )


# ---------------------------------------------------------------------------
# Expression chains in running text
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Chain:
    """An arithmetic step found in prose: expression plus stated result.

    For "so in total they had 32 + 42 = 74." the expression is
    "32 + 42" and the result 74.0; a bare expression has result None.
    """

    expression: str
    result: float | None


# Prose words would lex as identifiers; inside chains only short names
# (x, ab) count as operands.
_CHAIN_MAX_IDENT = 2


def _scan_operand(line: str, i: int) -> int | None:
    """Consume one operand (number, short ident, '@', parenthesized group,
    or a negation of one) starting at i; returns the end index or None."""
    if i < len(line) and line[i] == "-":
        j = _skip_pad(line, i + 1)
        return _scan_operand(line, j)
    tok = _read_token(line, i) if i < len(line) else None
    if tok is None:
        return None
    kind, text, j = tok
    if kind == "number" or kind == "at":
        return j
    if kind == "ident":
        return j if len(text) <= _CHAIN_MAX_IDENT else None
    if kind == "lparen":
        return _scan_group(line, i)
    return None


def _scan_group(line: str, i: int) -> int | None:
    """Consume a balanced '(...)' whose body is a chain-style expression."""
    j = _skip_pad(line, i + 1)
    j = _scan_expression(line, j)
    if j is None:
        return None
    j = _skip_pad(line, j)
    if j < len(line) and line[j] == ")":
        return j + 1
    return None


def _skip_pad(line: str, i: int) -> int:
    while i < len(line) and (line[i].isspace() or line[i] in _SKIP_CHARS):
        i += 1
    return i


def _scan_expression(line: str, i: int) -> int | None:
    """Consume operand (op operand)* greedily; returns end index or None."""
    end = _scan_operand(line, i)
    if end is None:
        return None
    while True:
        j = _skip_pad(line, end)
        if j >= len(line) or line[j] not in "+-*/":
            return end
        k = _skip_pad(line, j + 1)
        nxt = _scan_operand(line, k)
        if nxt is None:
            return end
        end = nxt


def _has_operator(segment: str) -> bool:
    try:
        node = parse_expression(segment)
    except ParseError:
        return False
    stack = [node]
    while stack:
        n = stack.pop()
        if n.kind == "binary":
            return True
        stack.extend(n.children)
    return False


def find_chains(text: str) -> list[Chain]:
    """Find arithmetic steps in model output text.

    Scans each line for spans shaped like ``expr (= expr)*``; a span
    starts at a digit or '('. The step expression is the first
    '='-segment containing an operator, and the stated result is the
    final segment when it is a bare number. Pure-number spans are not
    steps and are skipped.
    """
    chains = []
    for line in text.splitlines():
        i = 0
        while i < len(line):
            ch = line[i]
            if not (ch.isdigit() or ch == "("):
                i += 1
                continue
            end = _scan_expression(line, i)
            if end is None:
                i += 1
                continue
            segments = [line[i:end].strip()]
            j = _skip_pad(line, end)
            while j < len(line) and line[j] == "=":
                k = _skip_pad(line, j + 1)
                nxt_end = _scan_expression(line, k)
                if nxt_end is None:
                    break
                segments.append(line[k:nxt_end].strip())
                j = _skip_pad(line, nxt_end)
            expr_seg = next((s for s in segments if _has_operator(s)), None)
            if expr_seg is not None:
                result = None
                last = segments[-1]
                if len(segments) > 1 and not _has_operator(last):
                    try:
                        result = parse_expression(last).value()
                    except (ParseError, ValueError):
                        result = None
                chains.append(Chain(expr_seg, result))
            i = max(j, end)
    return chains
