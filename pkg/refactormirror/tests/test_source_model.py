import pytest

from refactormirror.ast_nodes import OpaqueExpr
from refactormirror.binder import EXTERNAL
from refactormirror.errors import SourceSyntaxError, UnknownEntity, UnknownNode
from refactormirror.source_model import (
    binding_paths,
    count_loc,
    entity_path,
    find_local,
    find_method,
    local_variables,
    parse,
    print_unit,
    resolve,
)

from .java_sources import ELVIS, EMPTY

SHADOWED = """\
public class Counter {
    private int count;

    public int bump(int count) {
        this.count = this.count + count;
        return this.count;
    }

    public int reset() {
        int count = 0;
        return count;
    }
}
"""


def _targets(unit, name):
    return [target for _, ref, target in binding_paths(unit) if ref == name]


def test_sample_sources_print_back_unchanged(sample_entries):
    for e in sample_entries:
        assert print_unit(parse(e.code_before)) == e.code_before, f"{e.id} does not round-trip"


def test_printing_is_idempotent_on_untidy_input():
    messy = "package a.b;\nimport java.util.List;\npublic class A{int x=1;int y;void m(){if(x>0)x++;else{x--;}}}"
    once = print_unit(parse(messy))
    assert print_unit(parse(once)) == once
    assert once.startswith("package a.b;\n\nimport java.util.List;\n\npublic class A {\n")
    assert "    int x = 1;\n    int y;\n\n    void m() {" in once, "fields are not grouped canonically"


def test_locals_and_parameters_shadow_fields():
    unit = parse(SHADOWED)
    assert set(_targets(unit, "count")) == {
        "Counter.count",
        "Counter.bump(int).count",
        "Counter.reset().count",
    }
    reset = find_method(unit, "Counter.reset()")
    local = find_local(reset, "count")
    assert [entity_path(unit, r) for r in [local]] == ["Counter.reset().count"]
    assert len(unit.refs_to(local)) == 1


def test_method_calls_resolve_by_name_and_arity(entry):
    unit = parse(entry("s01").code_before)
    assert _targets(unit, "calc") == ["Account.calc(int)"]


def test_slice_returns_the_declaration_text(entry):
    unit = parse(entry("s02").code_before)
    method = find_method(unit, "Stats.sum(int[])")
    text = unit.slice(method)
    assert text.startswith("public int sum(int[] values) {")
    assert text.endswith("return t;\n    }")
    assert unit.slice(local_variables(method)[0]) == "int t = 0"


def test_unknown_names_are_external(entry):
    unit = parse(entry("s05").code_before)
    assert EXTERNAL in _targets(unit, "println")


def test_resolve_rejects_non_reference_nodes(entry):
    unit = parse(entry("s02").code_before)
    method = find_method(unit, "Stats.sum(int[])")
    with pytest.raises(UnknownNode):
        resolve(unit, method.id)
    decl = local_variables(method)[0]
    assert resolve(unit, unit.refs_to(decl)[0].id) == decl.id


def test_unknown_entities_raise(entry):
    unit = parse(entry("s02").code_before)
    with pytest.raises(UnknownEntity):
        find_method(unit, "Stats.sum(int)")
    with pytest.raises(UnknownEntity):
        find_local(find_method(unit, "Stats.sum(int[])"), "t", ordinal=1)


@pytest.mark.parametrize("source", [
    "public class A {\n    void m() {\n        String s = \"open;\n    }\n}\n",
    "public class A {\n    void m() {\n        int x = (1 + 2;\n    }\n}\n",
    "public class A {\n    void m() {\n        int x = 1;\n    }\n",
    "public class A {\n    /* never closed\n}\n",
])
def test_malformed_sources_raise_syntax_errors(source):
    with pytest.raises(SourceSyntaxError) as err:
        parse(source)
    assert err.value.span.start_line >= 1


def test_count_loc_skips_blank_lines():
    assert count_loc("class A {\n\n    int x;\n   \n}\n") == 3


def test_unsupported_operator_is_kept_verbatim():
    unit = parse(ELVIS)
    value = find_method(unit, "Fallback.pick(Integer,int)").body.stmts[0].value
    assert isinstance(value, OpaqueExpr) and value.text == "a ?: b"
    assert print_unit(unit) == ELVIS
    assert print_unit(parse(print_unit(unit))) == ELVIS


def test_empty_class_prints_back_unchanged():
    unit = parse(EMPTY)
    assert [c.name for c in unit.types] == ["Empty"]
    assert print_unit(unit) == EMPTY
