"""C-subset parsing and deterministic HLS-compatibility rewrites.

The subset covers declarations, assignments, arithmetic and relational
expressions, array indexing, member access, calls, for/while loops, and
new[]/delete[] statements. Constructs outside the subset (templates,
preprocessor lines, strings, comments) are preserved verbatim and left
untouched by every transform. All transforms are span-local edit sets:
bytes outside the edited ranges are identical before and after, and
re-applying a transform to its own output yields no edits.
"""

from .edits import Edit, EditSet, RefactorError
from .lexer import LexError, Token, tokenize
from .parsing import LoopInfo, PointerDeclaration, SourceUnit, parse_subset
from .sizemap import Capacity, SizeMap, suggest_capacity
from .transforms import label_loops, literal_typecast, static_mem
from .codeql import emit_ioquery

__all__ = [
    "Edit",
    "EditSet",
    "RefactorError",
    "LexError",
    "Token",
    "tokenize",
    "SourceUnit",
    "PointerDeclaration",
    "LoopInfo",
    "parse_subset",
    "Capacity",
    "SizeMap",
    "suggest_capacity",
    "static_mem",
    "literal_typecast",
    "label_loops",
    "emit_ioquery",
]
