"""The HLS-compatibility rewrites: static arrays, literal casts, loop labels."""

from __future__ import annotations

import re

from .edits import Edit, EditSet, RefactorError
from .lexer import COMMENT, IDENT, NUMBER, PREPROC, PUNCT
from .parsing import SourceUnit
from .sizemap import SizeMap

__all__ = ["static_mem", "literal_typecast", "label_loops", "CAST_SCOPES"]

_IDENT_RE = re.compile(r"^[A-Za-z_]\w*$")


def _expand_to_line(text: str, start: int, end: int) -> tuple[int, int]:
    """Grow a statement span to swallow its line when nothing else is on it."""
    line_start = text.rfind("\n", 0, start) + 1
    eol = text.find("\n", end)
    line_end = len(text) if eol == -1 else eol + 1
    before = text[line_start:start]
    after = text[end : line_end - 1 if eol != -1 else line_end]
    if before.strip() == "" and after.strip() == "":
        return line_start, line_end
    return start, end


def static_mem(unit: SourceUnit, sizes: SizeMap, emit_defines: bool = False) -> EditSet:
    """Convert mapped pointer declarations to statically sized arrays.

    `T *x;` becomes `T x[C1];`, deeper pointers gain one bracket per
    level, and parameter declarations follow the same rule. Matching
    `x = new T[...]` and `delete[] x` statements are removed. Every
    targeted declaration must have a size entry; missing entries and
    pointer arithmetic on converted symbols are reported with locations,
    never guessed around.
    """
    edits: list[Edit] = []
    missing: list[str] = []
    problems: list[str] = []
    converted: set[str] = set()

    used_aliases: dict[str, int] = {}
    for decl in unit.pointer_decls:
        where = f"line {decl.line}: {'parameter' if decl.is_param else 'declaration'} {decl.name}"
        if decl.name not in sizes:
            missing.append(where)
            continue
        caps = sizes[decl.name]
        if len(caps) != decl.stars:
            problems.append(
                f"{where}: {decl.stars} pointer levels but {len(caps)} capacities in the size map"
            )
            continue
        if decl.init_kind == "other":
            problems.append(f"{where}: initializer is not a new[] or null and cannot be rewritten")
            continue
        brackets = "".join(f"[{c.render()}]" for c in caps)
        edits.append(Edit(decl.edit_start, decl.edit_end, f"{decl.name}{brackets}"))
        converted.add(decl.name)
        for c in caps:
            if c.alias:
                used_aliases[c.alias] = c.value

    if missing:
        raise RefactorError("size map has no entry for targeted pointers", missing)
    if problems:
        raise RefactorError("pointer declarations the subset cannot rewrite", problems)

    removal_spans = []
    for alloc in unit.allocations:
        if alloc.symbol in sizes:
            start, end = _expand_to_line(unit.text, alloc.start, alloc.end)
            removal_spans.append((start, end))
            edits.append(Edit(start, end, ""))

    arith = _pointer_arithmetic_sites(unit, converted, edits)
    if arith:
        raise RefactorError("pointer arithmetic the subset cannot rewrite", arith)

    if emit_defines and used_aliases:
        already = _defined_macros(unit)
        pending = {n: v for n, v in used_aliases.items() if n not in already}
        if pending:
            lines = "".join(f"#define {name} {value}\n" for name, value in sorted(pending.items()))
            edits.append(Edit(0, 0, lines))

    return EditSet(edits)


def _defined_macros(unit: SourceUnit) -> set[str]:
    names = set()
    for t in unit.tokens:
        if t.kind == PREPROC:
            m = re.match(r"#\s*define\s+(\w+)", t.text)
            if m:
                names.add(m.group(1))
    return names


def _pointer_arithmetic_sites(
    unit: SourceUnit, converted: set[str], edits: list[Edit]
) -> list[str]:
    """Uses of converted symbols that stop being legal once the symbol is
    an array: reassignment, ++/--, +=/-=."""
    if not converted:
        return []
    spans = [(e.start, e.end) for e in edits]

    def inside_edit(offset: int) -> bool:
        return any(s <= offset < e for s, e in spans)

    sig = [
        t
        for t in unit.tokens
        if t.kind not in (COMMENT, PREPROC) and not unit.in_opaque(t.start)
    ]
    sites = []
    for k, t in enumerate(sig):
        if t.kind != IDENT or t.text not in converted or inside_edit(t.start):
            continue
        prev = sig[k - 1] if k > 0 else None
        nxt = sig[k + 1] if k + 1 < len(sig) else None
        if prev is not None and prev.kind in (IDENT, PUNCT) and prev.text in (".", "->"):
            continue  # member access, not the converted symbol itself
        if nxt is not None and nxt.kind == PUNCT and nxt.text in ("=", "++", "--", "+=", "-="):
            sites.append(f"line {unit.line_of(t.start)}: {t.text} {nxt.text}")
        elif prev is not None and prev.kind == PUNCT and prev.text in ("++", "--"):
            sites.append(f"line {unit.line_of(t.start)}: {prev.text} {t.text}")
    return sites


CAST_SCOPES = ("floating-literals-only", "all-numeric")


def literal_typecast(unit: SourceUnit, target_type_name: str, scope: str = CAST_SCOPES[0]) -> EditSet:
    """Wrap in-scope numeric literals as `target(L)`.

    Literals inside array brackets, preprocessor lines, comments, strings,
    templates, and literals already the sole argument of a function-style
    cast are left alone, which also makes the transform idempotent.
    """
    if not _IDENT_RE.match(target_type_name):
        raise ValueError(f"target type {target_type_name!r} is not a valid identifier")
    if scope not in CAST_SCOPES:
        raise ValueError(f"scope must be one of {CAST_SCOPES}, got {scope!r}")
    sig_positions = [
        i
        for i, t in enumerate(unit.tokens)
        if t.kind not in (COMMENT, PREPROC) and not unit.in_opaque(t.start)
    ]
    pos_of = {token_idx: k for k, token_idx in enumerate(sig_positions)}
    edits = []
    for i in sig_positions:
        t = unit.tokens[i]
        if t.kind != NUMBER:
            continue
        if scope == "floating-literals-only" and not t.is_float:
            continue
        if unit.bracket_depth.get(i, 0) > 0:
            continue
        k = pos_of[i]
        prev = unit.tokens[sig_positions[k - 1]] if k > 0 else None
        prev2 = unit.tokens[sig_positions[k - 2]] if k > 1 else None
        nxt = unit.tokens[sig_positions[k + 1]] if k + 1 < len(sig_positions) else None
        if (
            prev is not None
            and prev.kind == PUNCT
            and prev.text == "("
            and prev2 is not None
            and prev2.kind == IDENT
            and not prev2.is_keyword
            and nxt is not None
            and nxt.kind == PUNCT
            and nxt.text == ")"
        ):
            continue  # already the sole argument of a cast
        edits.append(Edit(t.start, t.end, f"{target_type_name}({t.text})"))
    return EditSet(edits)


def _label_letters():
    """A, B, ..., Z, AA, AB, ..."""
    import itertools
    import string

    for size in itertools.count(1):
        for combo in itertools.product(string.ascii_uppercase, repeat=size):
            yield "".join(combo)


def label_loops(unit: SourceUnit, kernel_name: str) -> EditSet:
    """Prefix every unlabeled for/while loop with LOOP_<KERNEL>_<X>:.

    Letters enumerate loops in depth-first source order; labels already in
    the file are preserved and never duplicated.
    """
    if not _IDENT_RE.match(kernel_name):
        raise ValueError(f"kernel name {kernel_name!r} is not a valid identifier")
    prefix = f"LOOP_{kernel_name.upper()}_"
    used = set(unit.existing_labels)
    letters = _label_letters()
    edits = []
    for loop in unit.loops:
        if loop.label is not None:
            used.add(loop.label)
            continue
        label = prefix + next(letters)
        while label in used:
            label = prefix + next(letters)
        used.add(label)
        edits.append(Edit(loop.offset, loop.offset, f"{label}: "))
    return EditSet(edits)
