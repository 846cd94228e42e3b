"""Single-line Bash parsing, syntax validation, and command-level scoring.

Commands are split into atomic commands joined by connectors (;, &&, ||, |).
Each atomic command is turned into an option/positional dictionary using a
per-utility arity table, since POSIX alone cannot tell whether `-o value`
is a valued option or a flag followed by a positional.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path

from .core import (
    Diagnostic,
    ParseError,
    ScoreError,
    SemanticScore,
    Span,
    ValidationReport,
)

CONNECTORS = ("&&", "||", ";", "|")
REDIRECT_OPS = (">>", "2>>", "<<<", "2>", "&>", ">", "<")


def load_arity_table(path: str | Path | None = None) -> dict[str, frozenset[str]]:
    """Load the utility -> valued-flags table shipped with the package."""
    if path is None:
        text = (
            importlib_resources.files("dslrepair.data")
            .joinpath("bash_arity.json")
            .read_text()
        )
    else:
        text = Path(path).read_text()
    raw = json.loads(text)
    return {util: frozenset(entry.get("valued_flags", [])) for util, entry in raw.items()}


_DEFAULT_TABLE: dict[str, frozenset[str]] | None = None


def default_arity_table() -> dict[str, frozenset[str]]:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = load_arity_table()
    return _DEFAULT_TABLE


def set_default_arity_table(path: str | Path | None) -> None:
    """Override the shipped table; None restores the packaged default."""
    global _DEFAULT_TABLE
    _DEFAULT_TABLE = load_arity_table(path) if path is not None else None


@dataclass(frozen=True)
class AtomicCommand:
    program: str
    options: dict[str, object] = field(default_factory=dict)
    positionals: tuple[str, ...] = ()
    redirections: tuple[tuple[str, str], ...] = ()

    def pair_set(self) -> set[tuple[str, object]]:
        pairs: set[tuple[str, object]] = {("__program__", self.program)}
        pairs.update(self.options.items())
        for i, pos in enumerate(self.positionals):
            pairs.add((f"__pos_{i}__", pos))
        return pairs


@dataclass(frozen=True)
class BashCommandList:
    atoms: tuple[AtomicCommand, ...]
    connectors: tuple[str, ...]
    # (first_atom_index, last_atom_index) per parenthesised group, outermost first
    grouping: tuple[tuple[int, int], ...] = ()


@dataclass
class _Token:
    kind: str  # "word" | "op" | "lparen" | "rparen" | "redirect"
    text: str
    line: int
    col: int
    had_backtick: bool = False


def _err(code: str, message: str, line: int = 1, col: int = 1) -> ParseError:
    return ParseError(Diagnostic(code, message, Span(line, col)))


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    col = lambda pos: pos + 1  # single logical line

    while i < n:
        c = text[i]
        if c in " \t":
            i += 1
            continue
        if c == "\n":
            raise _err("BASH_SYNTAX", "unescaped newline in single-line command", 1, col(i))
        # connectors / grouping
        two = text[i : i + 2]
        if two in ("&&", "||"):
            tokens.append(_Token("op", two, 1, col(i)))
            i += 2
            continue
        if c in ";|":
            tokens.append(_Token("op", c, 1, col(i)))
            i += 1
            continue
        if c == "(":
            tokens.append(_Token("lparen", c, 1, col(i)))
            i += 1
            continue
        if c == ")":
            tokens.append(_Token("rparen", c, 1, col(i)))
            i += 1
            continue
        for op in REDIRECT_OPS:
            if text.startswith(op, i):
                tokens.append(_Token("redirect", op, 1, col(i)))
                i += len(op)
                break
        else:
            word, i, had_backtick = _read_word(text, i)
            tokens.append(_Token("word", word, 1, col(i), had_backtick=had_backtick))
    return tokens


def _read_word(text: str, i: int) -> tuple[str, int, bool]:
    """Consume one shell word starting at i, resolving quotes and escapes.

    Command substitution $(...) is kept opaque, including its delimiters.
    """
    n = len(text)
    out: list[str] = []
    start = i
    had_backtick = False
    while i < n:
        c = text[i]
        if c in " \t\n;|()<>&" and not (c == "&" and text[i : i + 2] != "&&"):
            # `&` alone (background) is not supported; only `&&`/`&>` reach here
            break
        if c == "\\":
            if i + 1 >= n:
                raise _err("BASH_SYNTAX", "dangling backslash", 1, i + 1)
            out.append(text[i + 1])
            i += 2
        elif c == "'":
            end = text.find("'", i + 1)
            if end == -1:
                raise _err("BASH_SYNTAX", "unterminated quote", 1, i + 1)
            out.append(text[i + 1 : end])
            i = end + 1
        elif c == '"':
            j = i + 1
            buf: list[str] = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n and text[j + 1] in '"\\$`':
                    buf.append(text[j + 1])
                    j += 2
                else:
                    buf.append(text[j])
                    j += 1
            if j >= n:
                raise _err("BASH_SYNTAX", "unterminated quote", 1, i + 1)
            out.append("".join(buf))
            i = j + 1
        elif c == "$" and text[i : i + 2] == "$(":
            depth = 0
            j = i + 1
            while j < n:
                if text[j] == "(":
                    depth += 1
                elif text[j] == ")":
                    depth -= 1
                    if depth == 0:
                        break
                j += 1
            if j >= n:
                raise _err("BASH_UNBALANCED_PAREN", "unterminated command substitution", 1, i + 1)
            out.append(text[i : j + 1])
            i = j + 1
        elif c == "`":
            end = text.find("`", i + 1)
            if end == -1:
                raise _err("BASH_SYNTAX", "unterminated backtick substitution", 1, i + 1)
            out.append(text[i : end + 1])
            had_backtick = True
            i = end + 1
        else:
            out.append(c)
            i += 1
    if i == start:
        raise _err("BASH_SYNTAX", f"unexpected character {text[i]!r}", 1, i + 1)
    return "".join(out), i, had_backtick


def _build_atom(words: list[str], redirects: list[tuple[str, str]], table) -> AtomicCommand:
    program = words[0]
    valued = table.get(program.rsplit("/", 1)[-1], frozenset())
    options: dict[str, object] = {}
    positionals: list[str] = []
    k = 1
    while k < len(words):
        w = words[k]
        if w.startswith("--") and len(w) > 2:
            if "=" in w:
                flag, _, value = w.partition("=")
                options[flag] = value
            elif w in valued and k + 1 < len(words):
                options[w] = words[k + 1]
                k += 1
            else:
                options[w] = True
        elif w.startswith("-") and len(w) > 1 and not w[1].isdigit():
            if w in valued and k + 1 < len(words):
                options[w] = words[k + 1]
                k += 1
            elif len(w) > 2 and w not in valued:
                # combined short flags: split; last one may take a value
                for ch in w[1:-1]:
                    options[f"-{ch}"] = True
                last = f"-{w[-1]}"
                if last in valued and k + 1 < len(words):
                    options[last] = words[k + 1]
                    k += 1
                else:
                    options[last] = True
            else:
                options[w] = True
        else:
            positionals.append(w)
        k += 1
    return AtomicCommand(
        program=program,
        options=options,
        positionals=tuple(positionals),
        redirections=tuple(redirects),
    )


def parse_bash(text: str) -> BashCommandList:
    """Parse one logical command line into atomic commands and connectors."""
    tokens = _tokenize(text)
    if not tokens:
        raise _err("BASH_SYNTAX", "empty command")

    atoms: list[AtomicCommand] = []
    connectors: list[str] = []
    grouping: list[tuple[int, int]] = []
    table = default_arity_table()

    words: list[str] = []
    redirects: list[tuple[str, str]] = []
    paren_stack: list[int] = []  # atom index at group open
    expecting_command = True
    just_closed = False  # a ')' flushed the current command already

    def flush(tok: _Token | None):
        nonlocal words, redirects
        if not words:
            if redirects:
                raise _err("BASH_SYNTAX", "redirection without a command", 1, 1)
            where = (tok.line, tok.col) if tok else (1, 1)
            raise _err("BASH_EMPTY_COMMAND", "empty command between connectors", *where)
        atoms.append(_build_atom(words, redirects, table))
        words, redirects = [], []

    idx = 0
    while idx < len(tokens):
        tok = tokens[idx]
        if tok.kind == "word":
            words.append(tok.text)
            expecting_command = False
            just_closed = False
        elif tok.kind == "redirect":
            if idx + 1 >= len(tokens) or tokens[idx + 1].kind != "word":
                raise _err("BASH_REDIRECT_TARGET", f"redirection {tok.text!r} has no target", tok.line, tok.col)
            redirects.append((tok.text, tokens[idx + 1].text))
            idx += 1
            expecting_command = False
            just_closed = False
        elif tok.kind == "op":
            if words or redirects or not just_closed:
                flush(tok)
            connectors.append(tok.text)
            expecting_command = True
            just_closed = False
        elif tok.kind == "lparen":
            if words:
                raise _err("BASH_SYNTAX", "unexpected '(' after command words", tok.line, tok.col)
            paren_stack.append(len(atoms))
        elif tok.kind == "rparen":
            if not paren_stack:
                raise _err("BASH_UNBALANCED_PAREN", "unmatched ')'", tok.line, tok.col)
            flush(tok)
            start = paren_stack.pop()
            grouping.append((start, len(atoms) - 1))
            expecting_command = False
            just_closed = True
        idx += 1

    if expecting_command and connectors and not words:
        if connectors[-1] == ";":
            connectors.pop()  # a trailing semicolon is harmless
        else:
            last = tokens[-1]
            raise _err(
                "BASH_TRAILING_CONNECTOR",
                f"trailing connector {connectors[-1]!r}",
                last.line,
                last.col,
            )
    if words or redirects or not atoms:
        flush(None)
    if paren_stack:
        raise _err("BASH_UNBALANCED_PAREN", "unmatched '('")

    grouping.sort()
    return BashCommandList(
        atoms=tuple(atoms),
        connectors=tuple(connectors),
        grouping=tuple(grouping),
    )


def validate_bash(text: str) -> ValidationReport:
    """Pass/fail verdict plus diagnostics; only compilation-level problems fail."""
    try:
        parse_bash(text)
    except ParseError as exc:
        return ValidationReport.from_diagnostics([exc.diagnostic])

    diagnostics: list[Diagnostic] = []
    # style finding, never error-severity
    try:
        for tok in _tokenize(text):
            if tok.kind == "word" and tok.had_backtick:
                diagnostics.append(
                    Diagnostic("BASH_BACKTICK_STYLE", "prefer $(...) over backticks", Span(tok.line, tok.col))
                )
                break
    except ParseError:
        pass
    return ValidationReport.from_diagnostics(diagnostics)


def atom_score(gt: AtomicCommand, pred: AtomicCommand | None) -> float:
    gt_pairs = gt.pair_set()
    if pred is None:
        return 0.0
    pred_pairs = pred.pair_set()
    return len(gt_pairs & pred_pairs) / len(gt_pairs)


def bash_score(gt: BashCommandList, pred: BashCommandList) -> SemanticScore:
    """Mean per-atom dictionary overlap, atoms aligned greedily by program name."""
    if not gt.atoms:
        raise ScoreError("ground-truth command list has no atoms")
    consumed = [False] * len(pred.atoms)
    total = 0.0
    for gt_atom in gt.atoms:
        match = None
        for j, pred_atom in enumerate(pred.atoms):
            if not consumed[j] and pred_atom.program == gt_atom.program:
                consumed[j] = True
                match = pred_atom
                break
        total += atom_score(gt_atom, match)
    return SemanticScore(total / len(gt.atoms))
