from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from refactormirror.ast_nodes import MethodDecl
from refactormirror.detector import detect
from refactormirror.engine import (
    apply,
    check,
    expression_occurrences,
    extract_method_instance,
    extract_variable_instance,
    inline_method_instance,
    inline_variable_instance,
    invert,
    rename_instance,
)
from refactormirror.mirror import mirror
from refactormirror.printer import print_expr
from refactormirror.refactorings import ExtractClassParams, RefactoringInstance
from refactormirror.source_model import find_method, local_variables, parse, print_unit

OPERATORS = ("+", "-", "*")
PROPERTY_SETTINGS = settings(
    max_examples=200,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)


def _expr(names: list[str]):
    leaf = st.one_of(st.sampled_from(names), st.integers(min_value=0, max_value=9).map(str))
    return st.recursive(
        leaf,
        lambda inner: st.tuples(inner, st.sampled_from(OPERATORS), inner).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        max_leaves=4,
    )


@st.composite
def programs(draw) -> str:
    """A class with one straight-line method whose locals are all used by the final return."""
    names = ["a", "b", "f0", "f1"]
    count = draw(st.integers(min_value=1, max_value=4))
    lines = []
    for k in range(count):
        lines.append(f"        int v{k} = {draw(_expr(names))};")
        names.append(f"v{k}")
    total = " + ".join(f"v{k}" for k in range(count))
    lines.append(f"        return {total} + {draw(_expr(names))};")
    body = "\n".join(lines)
    source = (
        "public class Gen {\n    private int f0;\n    private int f1;\n\n"
        f"    public int run(int a, int b) {{\n{body}\n    }}\n}}\n"
    )
    return print_unit(parse(source))


@st.composite
def split_programs(draw) -> str:
    """A class whose two fields are read only by ``mix``, next to an unrelated ``run``."""
    source = (
        "public class Gen {\n    private int f0;\n    private int f1;\n\n"
        f"    public int run(int a, int b) {{\n        return {draw(_expr(['a', 'b']))};\n    }}\n\n"
        f"    public int mix() {{\n        return f0 + f1 + {draw(_expr(['f0', 'f1']))};\n    }}\n}}\n"
    )
    return print_unit(parse(source))


def _method(unit):
    return find_method(unit, "Gen.run(int,int)")


def _helper(unit):
    return next(m for m in unit.types[0].members if isinstance(m, MethodDecl) and m.name == "helper")


def _single_statement_extraction(unit, pick):
    method = _method(unit)
    start = pick % (len(method.body.stmts) - 1)
    return extract_method_instance(unit, method, method.body, start, start + 1, "helper")


@PROPERTY_SETTINGS
@given(programs(), st.integers(min_value=0, max_value=3))
def test_renamed_local_is_detected_and_reverted(source, pick):
    unit = parse(source)
    locals_ = local_variables(_method(unit))
    r = rename_instance(unit, locals_[pick % len(locals_)], "renamed")
    after = apply(unit, r)
    assert r.key() in {d.key() for d in detect(unit, after)}
    undo = invert(r, unit, after)
    assert print_unit(apply(after, undo)) == source


@PROPERTY_SETTINGS
@given(programs())
def test_renamed_parameter_is_detected_and_reverted(source):
    unit = parse(source)
    r = rename_instance(unit, _method(unit).params[0], "alpha")
    after = apply(unit, r)
    assert r.key() in {d.key() for d in detect(unit, after)}
    assert print_unit(apply(after, invert(r, unit, after))) == source


@PROPERTY_SETTINGS
@given(programs())
def test_renamed_method_is_detected_and_reverted(source):
    unit = parse(source)
    r = rename_instance(unit, _method(unit), "compute")
    after = apply(unit, r)
    assert "public int compute(int a, int b) {" in print_unit(after)
    assert r.key() in {d.key() for d in detect(unit, after)}
    assert print_unit(apply(after, invert(r, unit, after))) == source


@PROPERTY_SETTINGS
@given(programs(), st.integers(min_value=0, max_value=1))
def test_renamed_field_is_detected_and_reverted(source, pick):
    unit = parse(source)
    r = rename_instance(unit, unit.types[0].members[pick], "g0")
    after = apply(unit, r)
    assert r.kind == "rename_attribute"
    assert r.key() in {d.key() for d in detect(unit, after)}
    assert print_unit(apply(after, invert(r, unit, after))) == source


@PROPERTY_SETTINGS
@given(programs(), st.integers(min_value=0, max_value=3))
def test_inlined_local_is_detected_and_extracted_back(source, pick):
    unit = parse(source)
    locals_ = local_variables(_method(unit))
    r = inline_variable_instance(unit, locals_[pick % len(locals_)])
    assume(check(unit, r) == [])
    after = apply(unit, r)
    assert r.key() in {d.key() for d in detect(unit, after)}
    undo = invert(r, unit, after)
    assert check(after, undo) == []
    assert print_unit(apply(after, undo)) == source


@PROPERTY_SETTINGS
@given(programs(), st.integers(min_value=0, max_value=3))
def test_extracted_variable_is_detected_and_inlined_back(source, pick):
    unit = parse(source)
    method = _method(unit)
    locals_ = local_variables(method)
    init = locals_[pick % len(locals_)].init
    occurrences = expression_occurrences(method, print_expr(init))
    r = extract_variable_instance(unit, method, occurrences, "extracted", type_text="int")
    assume(check(unit, r) == [])
    after = apply(unit, r)
    assert r.anchor() in {d.anchor() for d in detect(unit, after)}
    undo = invert(r, unit, after)
    assert check(after, undo) == []
    assert print_unit(apply(after, undo)) == source


@PROPERTY_SETTINGS
@given(programs(), st.integers(min_value=0, max_value=3))
def test_extracted_method_is_detected_and_inlined_back(source, pick):
    unit = parse(source)
    r = _single_statement_extraction(unit, pick)
    assume(check(unit, r) == [])
    after = apply(unit, r)
    assert r.anchor() in {d.anchor() for d in detect(unit, after)}
    undo = invert(r, unit, after)
    assert undo.kind == "inline_method"
    assert check(after, undo) == []
    assert print_unit(apply(after, undo)) == source


@PROPERTY_SETTINGS
@given(programs(), st.integers(min_value=0, max_value=3))
def test_inlined_method_is_detected_and_extracted_back(source, pick):
    original = parse(source)
    extraction = _single_statement_extraction(original, pick)
    assume(check(original, extraction) == [])
    unit = apply(original, extraction)
    r = inline_method_instance(unit, _helper(unit))
    assert check(unit, r) == []
    after = apply(unit, r)
    assert print_unit(after) == source
    assert r.anchor() in {d.anchor() for d in detect(unit, after)}
    undo = invert(r, unit, after)
    assert undo.kind == "extract_method"
    assert print_unit(apply(after, undo)) == print_unit(unit)


@PROPERTY_SETTINGS
@given(split_programs())
def test_extracted_class_is_detected_and_mirrored(source):
    unit = parse(source)
    r = RefactoringInstance.build("extract_class", ExtractClassParams(
        source_class="Gen", moved_fields=["f0", "f1"], moved_methods=["mix()"],
        new_class="Part", delegate_field="part",
    ))
    assert check(unit, r) == []
    refactored = print_unit(apply(unit, r))
    assert "    private final Part part = new Part();\n" in refactored
    assert r.anchor() in {d.anchor() for d in detect(unit, parse(refactored))}
    report = mirror(source, refactored)
    assert report.c_hat == refactored
    assert report.clean


@PROPERTY_SETTINGS
@given(programs(), st.integers(min_value=0, max_value=3))
def test_mirror_of_a_pure_refactoring_is_clean(source, pick):
    unit = parse(source)
    locals_ = local_variables(_method(unit))
    refactored = print_unit(apply(unit, rename_instance(unit, locals_[pick % len(locals_)], "renamed")))
    report = mirror(source, refactored)
    assert report.c_hat == refactored
    assert report.clean


@PROPERTY_SETTINGS
@given(programs())
def test_mirror_of_identical_documents_changes_nothing(source):
    report = mirror(source, source)
    assert report.c_hat == source
    assert report.applied == [] and report.residual == []
    assert report.clean
