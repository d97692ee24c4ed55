"""I/O-footprint CodeQL query emission.

The query classifies every variable access in a kernel function (and in
functions it calls, one level deep) as INPUT or OUTPUT. Only the function
name and file name vary; the rest of the query is emitted byte-exact.
"""

from __future__ import annotations

__all__ = ["emit_ioquery"]

_QUERY_TEMPLATE = """\
import cpp

from Function f, Variable v,
     VariableAccess va, string usage,
     Function calledFunc
where
  f.getName() = "{function}" and
  f.getFile().getBaseName() =
    "{file}" and
  (
    (va.getEnclosingFunction() = f) or
    (exists(FunctionCall fc |
      fc.getEnclosingFunction() = f and
      fc.getTarget() = calledFunc and
      va.getEnclosingFunction() = calledFunc
    ))
  ) and
  va.getTarget() = v and
  if va.isUsedAsLValue()
  then usage = "OUTPUT"
  else usage = "INPUT"
select va,
  v.getName() + "," +
  v.getType().toString() + "," + usage
"""


def emit_ioquery(function_name: str, file_name: str) -> str:
    """Instantiate the query for one kernel function and source file."""
    if not function_name:
        raise ValueError("function name must be non-empty")
    if not file_name:
        raise ValueError("file name must be non-empty")
    return _QUERY_TEMPLATE.replace("{function}", function_name).replace("{file}", file_name)
