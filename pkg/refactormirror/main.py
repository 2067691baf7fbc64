from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from . import config
from .agent_logging import configure_logging
from .config import DetectorConfig, EngineConfig, RunConfig
from .detector import detect
from .engine import apply, invert
from .errors import PreconditionFailed, ProviderError, RefactorMirrorError
from .gateway import ReplayProvider, load_responses, make_provider, seed_replay_store
from .harness import (
    MetricsReport,
    evaluate_outcomes,
    evaluate_tables,
    load_dataset,
    load_outcome_tables,
    load_outcomes,
    load_ratings,
    render_table,
)
from .mirror import MirrorReport, mirror
from .prompts import PromptSpec, render
from .refactorings import RefactoringInstance
from .runner import entry_prompts, run_dataset
from .source_model import binding_paths, dump_unit, parse, print_unit

PUBLISHED_OUTCOMES = config.DATA_DIR / "published_outcomes.json"

EXIT_OK, EXIT_USAGE, EXIT_RESIDUAL, EXIT_PROVIDER = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _emit_json(data) -> None:
    print(json.dumps(data, indent=2, sort_keys=True, default=str))


def _print_instances(instances: list[RefactoringInstance], fmt: str) -> None:
    if fmt == "json":
        _emit_json([r.model_dump(mode="json") for r in instances])
        return
    if not instances:
        print("(no refactorings)")
    for r in instances:
        print(f"{r.kind:<18}line {r.position():<5}{r.label()}")


def _print_mirror(report: MirrorReport, fmt: str) -> None:
    if fmt == "json":
        _emit_json(report.model_dump(mode="json"))
        return
    print(f"detected {report.detected}, applied {len(report.applied)}, skipped {len(report.skipped)}, "
          f"residual {len(report.residual)}")
    for r in report.applied:
        print(f"  applied  {r.label()}")
    for s in report.skipped:
        rules = ", ".join(v.rule_id for v in s.violations)
        print(f"  skipped  {s.instance.label()}  [{s.reason}{': ' + rules if rules else ''}]")
    for hunk in report.residual:
        where = f"c_hat {hunk.before.start_line}-{hunk.before.end_line}" if hunk.before else "c_hat -"
        print(f"  residual {hunk.classification:<20}{where}")
        for line in hunk.text.splitlines():
            print(f"           {line}")
    for ref in report.unresolved:
        print(f"  unresolved {ref.name} at line {ref.line} in {ref.method}")


def _print_report(report: MetricsReport, fmt: str) -> None:
    if fmt == "json":
        _emit_json(report.to_json())
    else:
        print(render_table(report))


# ---- commands ----


def cmd_parse(args) -> int:
    unit = parse(_read(args.file))
    if args.format == "json":
        _emit_json({"unit": dump_unit(unit), "bindings": binding_paths(unit)})
    else:
        for kind, name, target in binding_paths(unit):
            print(f"{kind:<14}{name:<24}{target}")
    return EXIT_OK


def cmd_detect(args) -> int:
    detector_config = DetectorConfig(body_similarity=args.body_similarity)
    instances = detect(parse(_read(args.before)), parse(_read(args.after)), detector_config)
    _print_instances(instances, args.format)
    return EXIT_OK


def cmd_apply(args) -> int:
    unit = parse(_read(args.source))
    r = RefactoringInstance.model_validate_json(_read(args.instance))
    if args.invert_of:
        r = invert(r, parse(_read(args.invert_of)), unit)
        if args.format == "json":
            _emit_json(r.model_dump(mode="json"))
    try:
        result = apply(unit, r, EngineConfig(strict=args.strict))
    except PreconditionFailed as e:
        for v in e.violations:
            print(f"[error] {v.rule_id} at line {v.span.start_line}: {v.message}", file=sys.stderr)
        return EXIT_USAGE
    text = print_unit(result)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"[apply] wrote {args.out}")
    elif args.format != "json" or not args.invert_of:
        print(text, end="")
    return EXIT_OK


def cmd_mirror(args) -> int:
    report = mirror(_read(args.before), _read(args.after), EngineConfig(strict=args.strict),
                    DetectorConfig(body_similarity=args.body_similarity))
    if args.out:
        Path(args.out).write_text(report.c_hat, encoding="utf-8")
    _print_mirror(report, args.format)
    return report.exit_code()


def cmd_evaluate(args) -> int:
    if args.outcomes:
        ratings = load_ratings(Path(args.ratings)) if args.ratings else []
        report = evaluate_outcomes(load_outcomes(Path(args.outcomes)), ratings)
    else:
        report = evaluate_tables(load_outcome_tables(Path(args.tables)))
    _print_report(report, args.format)
    return EXIT_OK


def cmd_prompt(args) -> int:
    spec = PromptSpec(
        template=args.template,
        refactoring_type=args.type,
        subcategory=args.subcategory,
        target_entities=args.target or [],
        code=_read(args.code),
    )
    prompt = render(spec)
    print(prompt, end="")
    if args.response_file:
        store = ReplayProvider(Path(args.replay_dir))
        path = store.record(prompt, _read(args.response_file))
        print(f"\n[replay] recorded {path}", file=sys.stderr)
    return EXIT_OK


def cmd_run(args) -> int:
    run_config = RunConfig(
        dataset=Path(args.dataset),
        provider=args.provider,
        template=args.template,
        parallelism=args.parallelism,
        strict=args.strict,
        output_dir=Path(args.output_dir),
        replay_dir=Path(args.replay_dir),
    )
    entries = load_dataset(run_config.dataset)
    if args.seed_responses:
        store = ReplayProvider(run_config.replay_dir)
        prompts: dict = {}
        for template in dict.fromkeys(r.template for r in load_responses(Path(args.seed_responses))):
            prompts |= entry_prompts(entries, template)
        seeded = seed_replay_store(store, prompts, load_responses(Path(args.seed_responses)))
        print(f"[replay] seeded {len(seeded)} responses into {run_config.replay_dir}", file=sys.stderr)

    provider = make_provider(run_config.provider, run_config.replay_dir, run_config.model, run_config.endpoint)
    out = run_config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    results = asyncio.run(run_dataset(entries, run_config, provider,
                                      logs_dir=out / "logs", csv_path=out / "runs.csv"))
    outcomes = [r.outcome for r in results]
    (out / "outcomes.json").write_text(
        json.dumps([o.model_dump(mode="json") for o in outcomes], indent=2), encoding="utf-8")
    report = evaluate_outcomes(outcomes)
    (out / "report.json").write_text(json.dumps(report.to_json(), indent=2, sort_keys=True), encoding="utf-8")
    _print_report(report, args.format)
    return EXIT_OK


# ---- CLI ----


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="refactormirror", description="Detect and safely reapply refactorings in LLM output.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--format", choices=["json", "table"], default="table")
        return p

    p = add("parse", "Parse a document and print its AST and bindings")
    p.add_argument("file")
    p.set_defaults(func=cmd_parse)

    p = add("detect", "List refactorings between two versions of a document")
    p.add_argument("--before", required=True)
    p.add_argument("--after", required=True)
    p.add_argument("--body-similarity", type=float, default=config.BODY_SIMILARITY)
    p.set_defaults(func=cmd_detect)

    p = add("apply", "Apply one refactoring instance (JSON file) to a document")
    p.add_argument("--source", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--out", help="Write the result here instead of stdout")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--invert-of", help="Apply the inverse of INSTANCE, which turned this BEFORE file into SOURCE")
    p.set_defaults(func=cmd_apply)

    p = add("mirror", "Reapply the refactorings found in AFTER onto BEFORE")
    p.add_argument("--before", required=True)
    p.add_argument("--after", required=True)
    p.add_argument("--out", help="Write c_hat here")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--body-similarity", type=float, default=config.BODY_SIMILARITY)
    p.set_defaults(func=cmd_mirror)

    p = add("evaluate", "Metrics report from outcome tables or per-entry run outcomes")
    p.add_argument("--tables", default=str(PUBLISHED_OUTCOMES), help="Per-type outcome tables (default: bundled)")
    p.add_argument("--outcomes", help="outcomes.json written by `run`")
    p.add_argument("--ratings", help="Rater scores for Fleiss' kappa")
    p.set_defaults(func=cmd_evaluate)

    p = add("prompt", "Render a prompt; optionally record a response for replay")
    p.add_argument("--template", required=True, choices=["P1", "P2", "P2_SUB", "P2_SUB_NARROW", "P3"])
    p.add_argument("--code", required=True)
    p.add_argument("--type")
    p.add_argument("--subcategory")
    p.add_argument("--target", action="append", help="Entity path (repeatable)")
    p.add_argument("--response-file")
    p.add_argument("--replay-dir", default=config.REPLAY_DIR)
    p.set_defaults(func=cmd_prompt)

    p = add("run", "Prompt, complete, mirror and score every dataset entry")
    p.add_argument("--dataset", required=True)
    p.add_argument("--provider", default="replay", choices=["replay", "openai", "http"])
    p.add_argument("--template", default="P2", choices=["P1", "P2", "P2_SUB", "P2_SUB_NARROW", "P3"])
    p.add_argument("--parallelism", type=int, default=config.PARALLELISM)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--output-dir", default="out")
    p.add_argument("--replay-dir", default=config.REPLAY_DIR)
    p.add_argument("--seed-responses", help="Recorded responses to load into the replay store first")
    p.set_defaults(func=cmd_run)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"[error] {e}", file=sys.stderr)
        return EXIT_USAGE
    configure_logging()
    try:
        return args.func(args)
    except ProviderError as e:
        print(f"[error] provider: {e}", file=sys.stderr)
        return EXIT_PROVIDER
    except (RefactorMirrorError, ValidationError, OSError) as e:
        print(f"[error] {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
