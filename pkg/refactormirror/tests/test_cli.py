import json

from refactormirror.main import main

from .java_sources import LEDGER, LEDGER_RENAMED


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_mirror_exit_codes(tmp_path, capsys):
    before = _write(tmp_path, "before.java", LEDGER)
    clean = _write(tmp_path, "clean.java", LEDGER_RENAMED)
    buggy = _write(tmp_path, "buggy.java", LEDGER_RENAMED.replace("i < n", "i <= n"))
    c_hat = tmp_path / "c_hat.java"

    assert main(["mirror", "--before", before, "--after", clean, "--out", str(c_hat)]) == 0
    assert c_hat.read_text() == LEDGER_RENAMED
    assert main(["mirror", "--before", before, "--after", buggy]) == 2
    out = capsys.readouterr().out
    assert "semantic_change" in out and "i <= n" in out


def test_mirror_json_output(tmp_path, capsys):
    before = _write(tmp_path, "before.java", LEDGER)
    after = _write(tmp_path, "after.java", LEDGER_RENAMED)
    assert main(["mirror", "--before", before, "--after", after, "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert [r["kind"] for r in data["applied"]] == ["rename_variable"]


def test_detect_and_apply(tmp_path, capsys):
    before = _write(tmp_path, "before.java", LEDGER)
    after = _write(tmp_path, "after.java", LEDGER_RENAMED)
    assert main(["detect", "--before", before, "--after", after, "--format", "json"]) == 0
    instances = json.loads(capsys.readouterr().out)
    assert len(instances) == 1
    instance = _write(tmp_path, "instance.json", json.dumps(instances[0]))
    assert main(["apply", "--source", before, "--instance", instance]) == 0
    assert capsys.readouterr().out == LEDGER_RENAMED
    assert main(["apply", "--source", after, "--instance", instance, "--invert-of", before]) == 0
    assert capsys.readouterr().out == LEDGER


def test_parse_dumps_the_tree_and_bindings(tmp_path, capsys):
    source = _write(tmp_path, "Ledger.java", LEDGER)
    assert main(["parse", source, "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["unit"]["loc"] > 0
    assert len(data["unit"]["types"]) == 1
    assert ["Name", "limit", "Ledger.limit"] in data["bindings"]


def test_evaluate_bundled_tables(capsys):
    assert main(["evaluate"]) == 0
    out = capsys.readouterr().out
    assert "28 (15.6%)" in out
    assert "234.6%" in out


def test_usage_errors(tmp_path, capsys):
    assert main([]) == 1
    assert main(["mirror", "--before", str(tmp_path / "nope.java"), "--after", str(tmp_path / "nope.java")]) == 1
    broken = _write(tmp_path, "broken.java", "public class {")
    assert main(["parse", broken]) == 1
    assert "[error]" in capsys.readouterr().err


def test_run_with_seeded_replay_is_reproducible(tmp_path, data_dir):
    args = ["run", "--dataset", str(data_dir / "sample_dataset.json"),
            "--seed-responses", str(data_dir / "sample_responses.json"),
            "--replay-dir", str(tmp_path / "replay")]
    assert main([*args, "--output-dir", str(tmp_path / "a")]) == 0
    assert main([*args, "--output-dir", str(tmp_path / "b")]) == 0
    first = (tmp_path / "a" / "report.json").read_text()
    assert first == (tmp_path / "b" / "report.json").read_text()

    outcomes = {o["entry_id"]: o for o in json.loads((tmp_path / "a" / "outcomes.json").read_text())}
    assert [k for k, o in sorted(outcomes.items()) if o["success"]] == ["s01", "s02", "s03", "s04"]
    assert outcomes["s05"]["note"] == "no code in response"
    assert (tmp_path / "a" / "runs.csv").exists()
    assert any((tmp_path / "a" / "logs").iterdir())


def test_run_without_recorded_responses_is_a_provider_error(tmp_path, data_dir):
    code = main(["run", "--dataset", str(data_dir / "sample_dataset.json"),
                 "--replay-dir", str(tmp_path / "empty"), "--output-dir", str(tmp_path / "out")])
    assert code == 3
