import pytest

from refactormirror.config import EngineConfig
from refactormirror.mirror import mirror, unresolved_references
from refactormirror.source_model import parse

from .java_sources import (
    BRANCHER,
    BRANCHER_INLINED,
    BRANCHER_UNGUARDED,
    CHECKER,
    CHECKER_OUT_OF_SCOPE,
    CHECKER_REPAIRED,
    EMPTY,
    FOLDER_FILTER,
    FOLDER_FILTER_EXTRACTED,
    LEDGER,
    LEDGER_RENAMED,
    PATHS,
    PATHS_RENAMED,
)

# (edit applied on top of the rename, text that only the faulty version contains)
SEMANTIC_BUGS = [
    (("i < n", "i <= n"), "i <= n"),
    (("int sum = 0;", "int sum = 1;"), "int sum = 1"),
    (("sum += items[i];", "sum -= items[i];"), "sum -= items[i]"),
    (("if (sum > limit)", "if (sum >= limit)"), "sum >= limit"),
    (("sum = limit;", "sum = limit - 1;"), "sum = limit - 1"),
    (("return sum;", "return sum + 1;"), "return sum + 1"),
    (("count >= limit", "count > limit"), "count > limit"),
    (('"item:"', '"item-"'), '"item-"'),
    (("prefix + name", "name + prefix"), "name + prefix"),
    (("i++", "i += 2"), "i += 2"),
    (("int i = 0", "int i = 1"), "int i = 1"),
    (("items[i]", "items[i + 1]"), "items[i + 1]"),
    (("return count >= limit;", "return count < limit;"), "count < limit"),
    (("private int limit;", "private int limit = 10;"), "int limit = 10"),
    (("        return sum;", "        sum = sum * 2;\n        return sum;"), "sum = sum * 2"),
    (("return prefix + name;", "return prefix + name.trim();"), "name.trim()"),
    (("        int sum = 0;", "        n = n / 2;\n        int sum = 0;"), "n = n / 2"),
]

SYNTAX_BUGS = [
    ("missing closing brace", lambda text: text[: text.rindex("}")]),
    ("unterminated string", lambda text: text.replace('"item:"', '"item:')),
    ("unbalanced parenthesis", lambda text: text.replace("return sum;", "return sum);")),
]


def _inject(edit):
    old, new = edit
    assert LEDGER_RENAMED.count(old) >= 1, f"edit target {old!r} not found"
    return LEDGER_RENAMED.replace(old, new, 1)


def test_identical_documents_are_clean():
    report = mirror(LEDGER, LEDGER)
    assert report.clean
    assert report.exit_code() == 0
    assert report.c_hat == LEDGER
    assert report.detected == 0 and report.reapply_rate is None


def test_pure_rename_is_reapplied_exactly():
    report = mirror(LEDGER, LEDGER_RENAMED)
    assert [r.kind for r in report.applied] == ["rename_variable"]
    assert report.c_hat == LEDGER_RENAMED
    assert report.clean and report.exit_code() == 0
    assert report.reapply_rate == 1.0


@pytest.mark.parametrize("edit, marker", SEMANTIC_BUGS, ids=[m for _, m in SEMANTIC_BUGS])
def test_injected_semantic_change_stays_out_of_c_hat(edit, marker):
    report = mirror(LEDGER, _inject(edit))
    assert [r.kind for r in report.applied] == ["rename_variable"]
    assert marker not in report.c_hat, "the faulty edit leaked into c_hat"
    assert any(marker in h.text for h in report.residual), "the faulty edit is not reported"
    assert all(h.classification == "semantic_change" for h in report.residual)
    assert report.exit_code() == 2
    parse(report.c_hat)


def test_deleted_statement_is_kept():
    faulty = LEDGER_RENAMED.replace("        if (sum > limit) {\n            sum = limit;\n        }\n", "")
    report = mirror(LEDGER, faulty)
    assert "if (" in report.c_hat and "= limit;" in report.c_hat
    assert any("= limit;" in h.text for h in report.residual)
    assert report.exit_code() == 2


@pytest.mark.parametrize("name, breaker", SYNTAX_BUGS, ids=[n for n, _ in SYNTAX_BUGS])
def test_unparsable_output_leaves_the_original(name, breaker):
    report = mirror(LEDGER, breaker(LEDGER_RENAMED))
    assert report.c_hat == LEDGER
    assert report.applied == []
    assert [h.classification for h in report.residual] == ["syntax_error_source"]
    assert report.exit_code() == 2


def test_declaration_used_outside_its_scope_is_repaired():
    report = mirror(CHECKER, CHECKER_OUT_OF_SCOPE)
    assert [r.kind for r in report.applied] == ["extract_variable"]
    assert report.c_hat == CHECKER_REPAIRED
    assert unresolved_references(parse(report.c_hat)) == []
    assert [(u.name, u.line) for u in report.unresolved] == [("filePath", 8)]
    assert report.residual, "the scope error must be reported"
    assert {h.classification for h in report.residual} == {"syntax_error_source"}


def test_skipped_instance_is_reported_with_its_rule():
    report = mirror(CHECKER, CHECKER_OUT_OF_SCOPE, EngineConfig(strict=True))
    assert report.applied == []
    assert report.c_hat == CHECKER
    assert [s.reason for s in report.skipped] == ["precondition_failed"]
    assert [v.rule_id for v in report.skipped[0].violations] == ["extract_variable.method-call"]
    assert report.reapply_rate == 0.0


def test_mirror_is_deterministic():
    faulty = _inject(SEMANTIC_BUGS[0][0])
    first, second = mirror(LEDGER, faulty), mirror(LEDGER, faulty)
    assert first.model_dump() == second.model_dump()


def test_dropped_null_guard_is_residual_while_the_inline_is_kept():
    report = mirror(BRANCHER, BRANCHER_UNGUARDED)
    assert [r.kind for r in report.applied] == ["inline_variable"]
    assert report.c_hat == BRANCHER_INLINED
    assert "} else if (ref != null) {" in report.c_hat
    assert any("? point : ref.getName()" in h.text for h in report.residual)
    assert {h.classification for h in report.residual} == {"semantic_change"}
    assert report.exit_code() == 2


def test_extracted_condition_is_reapplied():
    report = mirror(FOLDER_FILTER, FOLDER_FILTER_EXTRACTED)
    assert [r.kind for r in report.applied] == ["extract_variable"]
    assert report.c_hat == FOLDER_FILTER_EXTRACTED
    assert report.clean


def test_renamed_method_with_a_dropped_statement():
    report = mirror(PATHS, PATHS_RENAMED)
    assert [r.kind for r in report.applied] == ["rename_method"]
    assert "return \"[\" + relativize(path) + \"]\";" in report.c_hat
    assert "relative = relative.trim();" in report.c_hat
    assert any("relative.trim()" in h.text for h in report.residual)
    assert report.exit_code() == 2


@pytest.mark.parametrize("before, after", [
    (LEDGER, _inject(SEMANTIC_BUGS[0][0])),
    (BRANCHER, BRANCHER_UNGUARDED),
    (CHECKER, CHECKER_OUT_OF_SCOPE),
], ids=["semantic-change", "dropped-guard", "out-of-scope"])
def test_mirror_of_its_own_output_changes_nothing(before, after):
    c_hat = mirror(before, after).c_hat
    again = mirror(c_hat, c_hat)
    assert again.c_hat == c_hat
    assert again.applied == [] and again.residual == []
    assert again.clean


def test_empty_class_is_left_alone():
    report = mirror(EMPTY, EMPTY)
    assert report.c_hat == EMPTY
    assert report.detected == 0 and report.clean


def test_library_use_without_logfire_setup_is_quiet(recwarn):
    mirror(LEDGER, _inject(SEMANTIC_BUGS[0][0]))
    names = {type(w.message).__name__ for w in recwarn}
    assert "LogfireNotConfiguredWarning" not in names
