import json
from pathlib import Path

import pytest

from hlskit.refactor import (
    EditSet,
    LexError,
    RefactorError,
    SizeMap,
    emit_ioquery,
    label_loops,
    literal_typecast,
    parse_subset,
    static_mem,
    suggest_capacity,
    tokenize,
)

GOLDEN = Path(__file__).parent / "golden"
CASES = sorted(p.name for p in GOLDEN.iterdir() if (p / "case.json").exists())


def apply_case(case_dir, text):
    cfg = json.loads((case_dir / "case.json").read_text())
    unit = parse_subset(text)
    transform = cfg["transform"]
    if transform == "static_mem":
        sizes = SizeMap.from_json(cfg["sizes"])
        return static_mem(unit, sizes, emit_defines=cfg.get("emit_defines", False))
    if transform == "literal_typecast":
        return literal_typecast(unit, cfg["target"], scope=cfg.get("scope", "floating-literals-only"))
    if transform == "label_loops":
        return label_loops(unit, cfg["kernel"])
    raise AssertionError(f"unknown transform {transform}")


class TestGoldenCorpus:
    def test_corpus_size(self):
        assert len(CASES) >= 20

    @pytest.mark.parametrize("name", CASES)
    def test_expected_output(self, name):
        case_dir = GOLDEN / name
        source = (case_dir / "input.c").read_text()
        expected = (case_dir / "expected.c").read_text()
        edits = apply_case(case_dir, source)
        assert edits.apply(source) == expected

    @pytest.mark.parametrize("name", CASES)
    def test_idempotent(self, name):
        case_dir = GOLDEN / name
        source = (case_dir / "input.c").read_text()
        once = apply_case(case_dir, source).apply(source)
        again = apply_case(case_dir, once)
        assert again.is_empty, f"second application produced edits: {again.edits}"

    @pytest.mark.parametrize("name", CASES)
    def test_bytes_outside_edits_unchanged(self, name):
        case_dir = GOLDEN / name
        source = (case_dir / "input.c").read_text()
        edits = apply_case(case_dir, source)
        cursor = 0
        output = edits.apply(source)
        out_cursor = 0
        for e in edits.edits:
            chunk = source[cursor : e.start]
            assert output[out_cursor : out_cursor + len(chunk)] == chunk
            out_cursor += len(chunk) + len(e.replacement)
            cursor = e.end
        assert output[out_cursor:] == source[cursor:]


class TestParseSubset:
    def test_pointer_declaration_node(self):
        unit = parse_subset("double *f;\n")
        assert len(unit.pointer_decls) == 1
        d = unit.pointer_decls[0]
        assert d.name == "f" and d.stars == 1 and not d.is_param

    def test_loop_node_with_span(self):
        text = "for (i = 0; i < n; i++) { work(i); }\n"
        unit = parse_subset(text)
        assert len(unit.loops) == 1
        assert unit.loops[0].keyword == "for"
        assert text[unit.loops[0].offset :].startswith("for")

    def test_template_is_opaque_and_parse_succeeds(self):
        text = "template <class T> T id(T x) { return x; }\nint *p;\n"
        unit = parse_subset(text)
        assert unit.opaque_spans
        s, e = unit.opaque_spans[0]
        assert "template" in text[s:e] and text[s:e].endswith("}")
        assert [d.name for d in unit.pointer_decls] == ["p"]

    def test_unterminated_string_reports_line(self):
        with pytest.raises(LexError, match="line 2"):
            parse_subset('int x;\nchar *s = "oops;\n')

    def test_unterminated_comment(self):
        with pytest.raises(LexError, match="unterminated block comment"):
            parse_subset("int x; /* never closed\nint y;\n")

    def test_triple_pointer(self):
        unit = parse_subset("three_body_header ***thbp;\n")
        assert unit.pointer_decls[0].stars == 3


class TestStaticMemErrors:
    def test_missing_size_entry_reported(self):
        unit = parse_subset("double *f;\nint *g;\n")
        with pytest.raises(RefactorError, match="g"):
            static_mem(unit, SizeMap.from_json({"f": [64]}))

    def test_dimension_mismatch_reported(self):
        unit = parse_subset("int **nbr;\n")
        with pytest.raises(RefactorError, match="capacities"):
            static_mem(unit, SizeMap.from_json({"nbr": [64]}))

    def test_pointer_arithmetic_reported_with_location(self):
        unit = parse_subset("double *f;\nvoid step() {\n    f += 4;\n}\n")
        with pytest.raises(RefactorError, match="line 3"):
            static_mem(unit, SizeMap.from_json({"f": [64]}))

    def test_unrewritable_initializer(self):
        unit = parse_subset("double *f = other;\n")
        with pytest.raises(RefactorError, match="initializer"):
            static_mem(unit, SizeMap.from_json({"f": [64]}))

    def test_reparse_has_no_pointer_decls(self):
        source = "double *f;\nint **nbr;\nvoid go(double *pos) { pos[0] = 1.0; }\n"
        unit = parse_subset(source)
        sizes = SizeMap.from_json({"f": [64], "nbr": [8, 8], "pos": [64]})
        converted = static_mem(unit, sizes).apply(source)
        assert parse_subset(converted).pointer_decls == []


class TestSuggestCapacity:
    def test_reference_values(self):
        assert suggest_capacity(168) == 2048
        assert suggest_capacity(1) == 16
        assert suggest_capacity(40320) == 524288

    def test_factor_override(self):
        assert suggest_capacity(100, factor=1.0) == 128

    def test_overflow(self):
        with pytest.raises(OverflowError):
            suggest_capacity(2**62)

    def test_validation(self):
        with pytest.raises(ValueError):
            suggest_capacity(0)


class TestLiteralTypecastCount:
    def test_cast_count_matches_tokenizer_count(self):
        source = (
            "#define K 9.9\n"
            "double w = 0.5 * x + 1.25;\n"
            "a[2] = 3.5;\n"
            "y = Calc_t(0.5) + pow(x, 2.0);\n"
            "// comment 7.5\n"
        )
        unit = parse_subset(source)
        # in-scope floats countable independently: 0.5, 1.25, 3.5, 2.0
        # (9.9 preproc, 0.5 already cast, 7.5 comment, 2 is an index)
        in_scope = 0
        for i, t in enumerate(unit.tokens):
            if t.kind == "number" and t.is_float and unit.bracket_depth.get(i, 0) == 0:
                in_scope += 1
        assert in_scope == 5  # includes the already-cast 0.5
        edits = literal_typecast(unit, "Calc_t")
        assert len(edits) == 4

    def test_invalid_target(self):
        with pytest.raises(ValueError):
            literal_typecast(parse_subset("x = 1.0;"), "not an ident")

    def test_invalid_scope(self):
        with pytest.raises(ValueError):
            literal_typecast(parse_subset("x = 1.0;"), "T", scope="everything")


class TestLabelLoops:
    def test_kernel_name_validation(self):
        with pytest.raises(ValueError):
            label_loops(parse_subset("for(;;){}"), "bad name")

    def test_lowercase_kernel_uppercased(self):
        edits = label_loops(parse_subset("while (x) { y(); }\n"), "evaluate")
        assert "LOOP_EVALUATE_A:" in edits.apply("while (x) { y(); }\n")

    def test_many_loops_letter_sequence(self):
        source = "".join(f"for (int i{k} = 0; i{k} < n; i{k}++) {{ f(); }}\n" for k in range(28))
        out = label_loops(parse_subset(source), "K").apply(source)
        assert "LOOP_K_Z:" in out and "LOOP_K_AA:" in out and "LOOP_K_AB:" in out


class TestEmitIoquery:
    # the reference query text, transcribed from the published figure
    REFERENCE = """\
import cpp

from Function f, Variable v,
     VariableAccess va, string usage,
     Function calledFunc
where
  f.getName() = "Torsion_Angles" and
  f.getFile().getBaseName() =
    "reaxff_torsion_angles.cpp" and
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

    def test_reference_pair_byte_exact(self):
        assert emit_ioquery("Torsion_Angles", "reaxff_torsion_angles.cpp") == self.REFERENCE

    def test_substitution(self):
        q = emit_ioquery("Evaluate", "lr_handler.cpp")
        assert 'f.getName() = "Evaluate" and' in q
        assert '"lr_handler.cpp" and' in q
        # identical shape up to the two parameters
        assert q.replace("Evaluate", "Torsion_Angles").replace(
            "lr_handler.cpp", "reaxff_torsion_angles.cpp"
        ) == self.REFERENCE

    def test_empty_names_rejected(self):
        with pytest.raises(ValueError):
            emit_ioquery("", "file.cpp")
        with pytest.raises(ValueError):
            emit_ioquery("f", "")


class TestEditSet:
    def test_overlap_rejected(self):
        from hlskit.refactor import Edit

        with pytest.raises(ValueError, match="overlapping"):
            EditSet([Edit(0, 5, "x"), Edit(3, 8, "y")])

    def test_unified_diff(self):
        source = "double *f;\n"
        unit = parse_subset(source)
        edits = static_mem(unit, SizeMap.from_json({"f": [2048]}))
        diff = edits.unified_diff(source)
        assert "-double *f;" in diff and "+double f[2048];" in diff


def test_tokenizer_spans_cover_text():
    source = 'int a = 3; /* c */ char *s = "x"; # \nfor (;;) {}\n'
    tokens = tokenize(source)
    for t in tokens:
        assert source[t.start : t.end] == t.text
