"""Scanner for the C subset: pointer declarations, allocations, loops.

This is not a full C parser. It walks the token stream recognizing the
statement shapes the transforms rewrite and records exact source spans
for each. Template declarations/definitions are recorded as opaque spans
that every transform leaves untouched; anything else the scanner does not
recognize is simply left alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lexer import COMMENT, IDENT, NUMBER, PREPROC, PUNCT, Token, tokenize

__all__ = ["SourceUnit", "PointerDeclaration", "AllocationStmt", "LoopInfo", "parse_subset"]

_TYPE_KEYWORDS = frozenset(
    {"void", "char", "short", "int", "long", "float", "double", "bool", "signed", "unsigned"}
)
_QUALIFIERS = frozenset({"static", "const", "extern", "register", "volatile", "struct", "union", "inline"})
_CONTROL = frozenset(
    {"if", "else", "for", "while", "do", "switch", "case", "default", "return",
     "break", "continue", "goto", "sizeof", "new", "delete", "typedef", "using",
     "namespace", "template", "class", "enum", "true", "false", "nullptr"}
)
_NULLISH = frozenset({"nullptr", "NULL", "0"})


@dataclass(frozen=True)
class PointerDeclaration:
    """One pointer declarator `*...* name` plus any initializer.

    edit_start points at the first star; edit_end is past the declarator
    (and past the initializer when it must be dropped on conversion).
    """

    name: str
    stars: int
    edit_start: int
    edit_end: int
    line: int
    is_param: bool = False
    init_kind: str = "none"  # none | nullish | new | other
    base_symbols_in_init: tuple[str, ...] = ()


@dataclass(frozen=True)
class AllocationStmt:
    """`x = new T[...];` or `delete[] x;` statement, spanning through `;`."""

    kind: str  # new | delete
    symbol: str
    start: int
    end: int
    line: int


@dataclass(frozen=True)
class LoopInfo:
    keyword: str  # for | while
    offset: int  # start of the loop keyword
    line: int
    label: str | None  # existing label, if any


@dataclass
class SourceUnit:
    text: str
    tokens: list[Token]
    opaque_spans: list[tuple[int, int]] = field(default_factory=list)
    pointer_decls: list[PointerDeclaration] = field(default_factory=list)
    allocations: list[AllocationStmt] = field(default_factory=list)
    loops: list[LoopInfo] = field(default_factory=list)
    existing_labels: set[str] = field(default_factory=set)
    bracket_depth: dict[int, int] = field(default_factory=dict)  # token index -> [ ] depth

    def in_opaque(self, offset: int) -> bool:
        return any(s <= offset < e for s, e in self.opaque_spans)

    def line_of(self, offset: int) -> int:
        return self.text.count("\n", 0, offset) + 1


def parse_subset(text: str) -> SourceUnit:
    """Tokenize and scan; unrecognized regions are preserved untouched."""
    tokens = tokenize(text)
    unit = SourceUnit(text=text, tokens=tokens)
    _mark_template_spans(unit)
    sig = [
        i
        for i, t in enumerate(tokens)
        if t.kind not in (COMMENT, PREPROC) and not unit.in_opaque(t.start)
    ]
    _compute_bracket_depth(unit)
    _scan_loops(unit, sig)
    _scan_statements(unit, sig)
    return unit


def _mark_template_spans(unit: SourceUnit) -> None:
    """A `template` keyword opaques everything through the end of the
    following declaration (`;`) or definition (matching `}`)."""
    tokens = unit.tokens
    i = 0
    while i < len(tokens):
        t = tokens[i]
        if t.kind == IDENT and t.text == "template":
            start = t.start
            j = i + 1
            # the <...> parameter list
            if j < len(tokens) and tokens[j].text == "<":
                depth = 0
                while j < len(tokens):
                    if tokens[j].text == "<":
                        depth += 1
                    elif tokens[j].text == ">":
                        depth -= 1
                        if depth == 0:
                            j += 1
                            break
                    elif tokens[j].text == ">>":
                        depth -= 2
                        if depth <= 0:
                            j += 1
                            break
                    j += 1
            # then scan to `;` or through a balanced `{...}` body
            brace = 0
            saw_brace = False
            while j < len(tokens):
                txt = tokens[j].text
                if txt == "{":
                    brace += 1
                    saw_brace = True
                elif txt == "}":
                    brace -= 1
                    if saw_brace and brace == 0:
                        j += 1
                        break
                elif txt == ";" and not saw_brace:
                    j += 1
                    break
                j += 1
            end = tokens[j - 1].end if j - 1 < len(tokens) else len(unit.text)
            unit.opaque_spans.append((start, end))
            i = j
        else:
            i += 1


def _compute_bracket_depth(unit: SourceUnit) -> None:
    depth = 0
    for i, t in enumerate(unit.tokens):
        if t.kind == PUNCT and t.text == "]":
            depth = max(0, depth - 1)
        unit.bracket_depth[i] = depth
        if t.kind == PUNCT and t.text == "[":
            depth += 1


def _scan_loops(unit: SourceUnit, sig: list[int]) -> None:
    tokens = unit.tokens
    brace_depth = 0
    do_stack: list[int] = []
    for pos, i in enumerate(sig):
        t = tokens[i]
        if t.kind == PUNCT:
            if t.text == "{":
                brace_depth += 1
            elif t.text == "}":
                brace_depth -= 1
            continue
        if t.kind != IDENT:
            continue
        if t.text == "do":
            do_stack.append(brace_depth)
            continue
        if t.text not in ("for", "while"):
            if t.kind == IDENT and pos + 1 < len(sig):
                nxt = tokens[sig[pos + 1]]
                if nxt.kind == PUNCT and nxt.text == ":" and not t.is_keyword:
                    unit.existing_labels.add(t.text)
            continue
        if t.text == "while" and do_stack and do_stack[-1] == brace_depth:
            do_stack.pop()  # tail of a do-while, not a loop head
            continue
        label = None
        if pos >= 2:
            colon = tokens[sig[pos - 1]]
            name = tokens[sig[pos - 2]]
            if colon.kind == PUNCT and colon.text == ":" and name.kind == IDENT and not name.is_keyword:
                label = name.text
        unit.loops.append(
            LoopInfo(keyword=t.text, offset=t.start, line=unit.line_of(t.start), label=label)
        )


def _scan_statements(unit: SourceUnit, sig: list[int]) -> None:
    """Try declaration/allocation matches at every statement start."""
    tokens = unit.tokens
    starts = [0] if sig else []
    for pos, i in enumerate(sig[:-1]):
        if tokens[i].kind == PUNCT and tokens[i].text in (";", "{", "}"):
            starts.append(pos + 1)
    for pos in starts:
        if pos >= len(sig):
            continue
        _match_declaration(unit, sig, pos) or _match_allocation(unit, sig, pos)


def _tok(unit: SourceUnit, sig: list[int], pos: int) -> Token | None:
    if 0 <= pos < len(sig):
        return unit.tokens[sig[pos]]
    return None


def _match_declaration(unit: SourceUnit, sig: list[int], pos: int) -> bool:
    tokens = unit.tokens
    p = pos
    t = _tok(unit, sig, p)
    if t is None or t.kind != IDENT:
        return False
    # qualifiers, then the type name (possibly multi-word or :: qualified)
    while t is not None and t.kind == IDENT and t.text in _QUALIFIERS:
        p += 1
        t = _tok(unit, sig, p)
    if t is None or t.kind != IDENT or t.text in _CONTROL:
        return False
    saw_type = False
    if t.text in _TYPE_KEYWORDS:
        while t is not None and t.kind == IDENT and t.text in _TYPE_KEYWORDS:
            saw_type = True
            p += 1
            t = _tok(unit, sig, p)
    elif not t.is_keyword:
        saw_type = True
        p += 1
        t = _tok(unit, sig, p)
        while t is not None and t.kind == PUNCT and t.text == "::":
            p += 1
            t = _tok(unit, sig, p)
            if t is None or t.kind != IDENT:
                return False
            p += 1
            t = _tok(unit, sig, p)
    if not saw_type:
        return False

    # function definition/prototype: name ( params )
    if t is not None and t.kind == IDENT and not t.is_keyword:
        nxt = _tok(unit, sig, p + 1)
        if nxt is not None and nxt.kind == PUNCT and nxt.text == "(":
            _scan_parameters(unit, sig, p + 1)
            return True

    decls: list[PointerDeclaration] = []
    while True:
        stars = 0
        star_start = None
        while t is not None and t.kind == PUNCT and t.text == "*":
            if star_start is None:
                star_start = t.start
            stars += 1
            p += 1
            t = _tok(unit, sig, p)
        if t is None or t.kind != IDENT or t.is_keyword:
            return False
        name_tok = t
        p += 1
        t = _tok(unit, sig, p)
        if t is not None and t.kind == PUNCT and t.text == "(":
            return False  # function declarator
        if t is not None and t.kind == PUNCT and t.text == "[":
            # already an array declarator; skip its brackets, no conversion
            while t is not None and t.kind == PUNCT and t.text == "[":
                depth = 0
                while t is not None:
                    if t.text == "[":
                        depth += 1
                    elif t.text == "]":
                        depth -= 1
                        if depth == 0:
                            p += 1
                            t = _tok(unit, sig, p)
                            break
                    p += 1
                    t = _tok(unit, sig, p)
            stars = 0  # treat as non-pointer declarator
        init_kind = "none"
        init_end = name_tok.end
        init_symbols: list[str] = []
        if t is not None and t.kind == PUNCT and t.text == "=":
            p += 1
            t = _tok(unit, sig, p)
            init_tokens: list[Token] = []
            depth = 0
            while t is not None:
                if t.kind == PUNCT and t.text in "([":
                    depth += 1
                elif t.kind == PUNCT and t.text in ")]":
                    depth -= 1
                elif t.kind == PUNCT and t.text in (",", ";") and depth == 0:
                    break
                init_tokens.append(t)
                p += 1
                t = _tok(unit, sig, p)
            if not init_tokens:
                return False
            init_end = init_tokens[-1].end
            if len(init_tokens) == 1 and init_tokens[0].text in _NULLISH:
                init_kind = "nullish"
            elif init_tokens[0].kind == IDENT and init_tokens[0].text == "new":
                init_kind = "new"
            else:
                init_kind = "other"
            init_symbols = [x.text for x in init_tokens if x.kind == IDENT]
        if stars > 0:
            edit_end = name_tok.end if init_kind == "none" else init_end
            decls.append(
                PointerDeclaration(
                    name=name_tok.text,
                    stars=stars,
                    edit_start=star_start,
                    edit_end=edit_end,
                    line=unit.line_of(name_tok.start),
                    init_kind=init_kind,
                    base_symbols_in_init=tuple(init_symbols),
                )
            )
        if t is None:
            return False
        if t.kind == PUNCT and t.text == ",":
            p += 1
            t = _tok(unit, sig, p)
            continue
        if t.kind == PUNCT and t.text == ";":
            unit.pointer_decls.extend(decls)
            return True
        return False


def _scan_parameters(unit: SourceUnit, sig: list[int], open_paren_pos: int) -> None:
    """Record pointer parameters `[quals] type *...* name` inside a
    function's parameter list."""
    tokens = unit.tokens
    p = open_paren_pos
    depth = 0
    groups: list[list[Token]] = [[]]
    while p < len(sig):
        t = tokens[sig[p]]
        if t.kind == PUNCT and t.text == "(":
            depth += 1
            if depth == 1:
                p += 1
                continue
        elif t.kind == PUNCT and t.text == ")":
            depth -= 1
            if depth == 0:
                break
        elif t.kind == PUNCT and t.text == "," and depth == 1:
            groups.append([])
            p += 1
            continue
        groups[-1].append(t)
        p += 1
    for group in groups:
        toks = [t for t in group if not (t.kind == IDENT and t.text in _QUALIFIERS)]
        if len(toks) < 3:
            continue
        # type tokens, then stars, then the name as the final token
        name = toks[-1]
        if name.kind != IDENT or name.is_keyword:
            continue
        stars = 0
        star_start = None
        k = len(toks) - 2
        while k >= 0 and toks[k].kind == PUNCT and toks[k].text == "*":
            star_start = toks[k].start
            stars += 1
            k -= 1
        if stars == 0 or k < 0:
            continue
        if toks[k].kind != IDENT:
            continue
        unit.pointer_decls.append(
            PointerDeclaration(
                name=name.text,
                stars=stars,
                edit_start=star_start,
                edit_end=name.end,
                line=unit.line_of(name.start),
                is_param=True,
            )
        )


def _match_allocation(unit: SourceUnit, sig: list[int], pos: int) -> bool:
    tokens = unit.tokens
    t = _tok(unit, sig, pos)
    if t is None or t.kind != IDENT:
        return False
    start = t.start
    if t.text == "delete":
        p = pos + 1
        nxt = _tok(unit, sig, p)
        if nxt is not None and nxt.kind == PUNCT and nxt.text == "[":
            p += 1
            closing = _tok(unit, sig, p)
            if closing is None or closing.text != "]":
                return False
            p += 1
        base = _tok(unit, sig, p)
        if base is None or base.kind != IDENT or base.is_keyword:
            return False
        symbol = base.text
        while True:
            p += 1
            t2 = _tok(unit, sig, p)
            if t2 is None:
                return False
            if t2.kind == PUNCT and t2.text == ";":
                unit.allocations.append(
                    AllocationStmt("delete", symbol, start, t2.end, unit.line_of(start))
                )
                return True
            if t2.kind == PUNCT and t2.text in ("{", "}"):
                return False
    if t.is_keyword:
        return False
    # lvalue: IDENT { [..] | .x | ->x }* = new ... ;
    symbol = t.text
    p = pos + 1
    depth = 0
    while True:
        t2 = _tok(unit, sig, p)
        if t2 is None:
            return False
        if depth == 0 and t2.kind == PUNCT and t2.text == "=":
            p += 1
            break
        if t2.kind == PUNCT and t2.text == "[":
            depth += 1
        elif t2.kind == PUNCT and t2.text == "]":
            depth -= 1
        elif depth == 0 and not (
            (t2.kind == PUNCT and t2.text in (".", "->")) or t2.kind in (IDENT, NUMBER)
        ):
            return False
        p += 1
    t2 = _tok(unit, sig, p)
    if t2 is None or t2.kind != IDENT or t2.text != "new":
        return False
    while t2 is not None and not (t2.kind == PUNCT and t2.text == ";"):
        if t2.kind == PUNCT and t2.text in ("{", "}"):
            return False
        p += 1
        t2 = _tok(unit, sig, p)
    if t2 is None:
        return False
    unit.allocations.append(AllocationStmt("new", symbol, start, t2.end, unit.line_of(start)))
    return True
