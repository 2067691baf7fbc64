import pytest

from refactormirror.config import DetectorConfig
from refactormirror.detector import detect
from refactormirror.engine import extract_method_instance
from refactormirror.matching import dice, match_entities, token_bag
from refactormirror.source_model import find_method, parse

from .java_sources import (
    CART,
    CART_EXTRACTED,
    EMPTY,
    FOLDER_FILTER,
    FOLDER_FILTER_EXTRACTED,
    PATHS,
    PATHS_RENAMED,
    PERSON,
    PERSON_EXTRACTED,
)


def _kinds(found):
    return [r.kind for r in found]


def test_identical_documents_have_no_refactorings(entry):
    code = entry("s03").code_before
    assert detect(parse(code), parse(code)) == []


@pytest.mark.parametrize("entry_id", ["s01", "s02", "s03", "s04", "s05", "s06"])
def test_expected_code_yields_the_oracle_instance(entry, entry_id):
    e = entry(entry_id)
    found = detect(parse(e.code_before), parse(e.code_expected))
    keys = {r.key() for r in found}
    assert e.oracle_instance.key() in keys, f"{entry_id}: detected {[r.label() for r in found]}"


def test_extract_method_with_return_value_is_detected():
    before = parse(CART)
    method = find_method(before, "Cart.checkout(int)")
    expected = extract_method_instance(before, method, method.body, 0, 2, "subtotal")
    found = detect(before, parse(CART_EXTRACTED))
    assert [r.key() for r in found] == [expected.key()]


def test_extract_class_is_detected():
    found = detect(parse(PERSON), parse(PERSON_EXTRACTED))
    assert _kinds(found) == ["extract_class"], [r.label() for r in found]
    params = found[0].params
    assert params["source_class"] == "Person"
    assert params["moved_fields"] == ["areaCode", "number"]
    assert params["moved_methods"] == ["phone()"]
    assert params["new_class"] == "Phone"
    assert params["delegate_field"] == "telephone"
    assert params["nested"] is False


def test_partial_rename_is_not_reported(entry):
    e = entry("s02")
    partial = e.code_expected.replace("return total;", "return t;")
    found = detect(parse(e.code_before), parse(partial))
    assert "rename_variable" not in _kinds(found)


def test_parameter_rename_keeps_position_and_type():
    before = "public class A {\n    int f(int a, int b) {\n        return a - b;\n    }\n}\n"
    after = "public class A {\n    int f(int left, int b) {\n        return left - b;\n    }\n}\n"
    found = detect(parse(before), parse(after))
    assert [(r.kind, r.params["old_name"], r.params["new_name"]) for r in found] == [
        ("rename_parameter", "a", "left"),
    ]


def test_method_rename_found_by_body_similarity():
    before = ("public class A {\n    private int x;\n\n    int get() {\n        return x * 2 + 1;\n    }\n\n"
              "    int use() {\n        return get();\n    }\n}\n")
    after = before.replace("get()", "doubledPlusOne()")
    found = detect(parse(before), parse(after))
    assert _kinds(found) == ["rename_method"]
    strict = detect(parse(before), parse(after), DetectorConfig(body_similarity=1.0))
    assert _kinds(strict) == ["rename_method"], "the abstracted body is identical, so dice is 1"


def test_dice_and_matching_basics():
    assert dice(token_bag("a + b"), token_bag("a + b")) == 1.0
    assert dice(token_bag("a"), token_bag("b")) == 0.0
    before = parse(PERSON)
    matches = match_entities(before, parse(PERSON_EXTRACTED))
    kinds = [m.kind for m in matches]
    assert kinds.count("class") == 1
    assert kinds.count("field") == 1, "only `name` survives in Person"


def test_empty_class_has_no_refactorings():
    assert detect(parse(EMPTY), parse(EMPTY)) == []


def test_condition_extracted_to_a_local_is_detected():
    found = detect(parse(FOLDER_FILTER), parse(FOLDER_FILTER_EXTRACTED))
    assert _kinds(found) == ["extract_variable"]
    params = found[0].params
    assert params["new_name"] == "startsForbidden"
    assert params["expression"] == "path.startsWith(forbidden)"
    assert params["type_text"] == "boolean"


def test_method_renamed_after_a_body_change_is_matched():
    before, after = parse(PATHS), parse(PATHS_RENAMED)
    found = detect(before, after)
    assert [(r.kind, r.params["old_name"], r.params["new_name"]) for r in found] == [
        ("rename_method", "relativizeAndClean", "relativize"),
    ]
    renamed = next(m for m in match_entities(before, after) if m.kind == "method" and m.similarity < 1.0)
    assert DetectorConfig().body_similarity <= renamed.similarity < 1.0
