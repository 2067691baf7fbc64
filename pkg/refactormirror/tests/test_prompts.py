import json

import pytest

from refactormirror.errors import MissingField, UnknownSubcategory
from refactormirror.prompts import PromptSpec, narrowed, render, scoped_slice, splice
from refactormirror.subcategories import BUILTIN, load_extra, lookup, subcategory_registry


@pytest.fixture
def account(entry):
    return entry("s01").code_before


def test_p1_only_embeds_the_code(account):
    prompt = render(PromptSpec(template="P1", code=account))
    assert account.rstrip("\n") in prompt
    assert "Rename Method" not in prompt
    assert "{" + "code}" not in prompt


def test_p2_names_the_refactoring_type(account):
    prompt = render(PromptSpec(template="P2", refactoring_type="rename_method", code=account))
    assert "Apply a Rename Method refactoring." in prompt
    with pytest.raises(MissingField):
        render(PromptSpec(template="P2", code=account))


def test_p2_sub_adds_the_motive(account):
    spec = PromptSpec(template="P2_SUB", refactoring_type="rename_method",
                      subcategory="inconsistent_method_name", code=account)
    prompt = render(spec)
    assert "motive: inconsistent method name." in prompt
    assert BUILTIN["inconsistent_method_name"].description in prompt
    assert render(spec) == prompt, "rendering must be deterministic"


def test_p2_sub_narrow_sends_only_the_method(account):
    spec = PromptSpec(template="P2_SUB_NARROW", refactoring_type="rename_method",
                      subcategory="inconsistent_method_name", target_entities=["Account.calc(int)"], code=account)
    prompt = render(spec)
    assert "public double calc(int years)" in prompt
    assert "public double report()" not in prompt
    assert "single method taken from a larger document" in prompt
    with pytest.raises(MissingField):
        render(spec.model_copy(update={"target_entities": []}))


def test_p3_lists_target_entities(account):
    prompt = render(PromptSpec(template="P3", refactoring_type="rename_method",
                               target_entities=["Account.calc(int)"], code=account))
    assert "Refactor these code entities: Account.calc(int)" in prompt
    with pytest.raises(MissingField):
        render(PromptSpec(template="P3", refactoring_type="rename_method", code=account))


def test_unknown_subcategory(account):
    with pytest.raises(UnknownSubcategory):
        render(PromptSpec(template="P2_SUB", refactoring_type="rename_method", subcategory="vibes", code=account))


def test_scoped_slices(account):
    method = scoped_slice(account, "method", "Account.calc(int)")
    assert (method.start_line, method.end_line) == (5, 11)
    assert method.text.startswith("    public double calc(int years) {")
    whole_class = scoped_slice(account, "class", "Account.calc(int)")
    assert (whole_class.start_line, whole_class.end_line) == (1, 16)
    assert scoped_slice(account, "document", "Account").text == account
    with pytest.raises(MissingField):
        scoped_slice(account, "method", "Account")


def test_splice_puts_the_reply_back(account):
    piece = scoped_slice(account, "method", "Account.calc(int)")
    renamed = piece.text.replace("calc", "compoundedBalance")
    spliced = splice(account, piece, renamed)
    assert "public double compoundedBalance(int years)" in spliced
    assert "return calc(1);" in spliced
    assert spliced.endswith("}\n")
    assert splice(account, piece, piece.text) == account


def test_narrowing_to_a_missing_entity(account):
    spec = PromptSpec(template="P2_SUB_NARROW", refactoring_type="rename_method",
                      subcategory="inconsistent_method_name", target_entities=["Account.gone()"], code=account)
    with pytest.raises(MissingField):
        narrowed(spec, BUILTIN["inconsistent_method_name"])


def test_user_defined_subcategories(tmp_path):
    extra = tmp_path / "extra.json"
    extra.write_text(json.dumps({
        "feature_envy": {"description": "Move it.", "search_scope": "class", "refactoring_types": ["extract_class"]},
    }))
    loaded = load_extra(extra)
    assert loaded["feature_envy"].user_defined
    registry = subcategory_registry(extra)
    assert len(registry) == len(BUILTIN) + 1
    assert lookup("feature_envy", registry).search_scope == "class"
    assert len(BUILTIN) == 9
    with pytest.raises(UnknownSubcategory):
        lookup("feature_envy", dict(BUILTIN))
