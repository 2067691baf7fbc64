"""The study loop over a dataset: prompt, complete, mirror, score."""
from __future__ import annotations

import asyncio
from pathlib import Path
from typing import Optional

import logfire
from pydantic import BaseModel
from tqdm.auto import tqdm

from .agent_logging import create_log_entry, save_log
from .config import RunConfig
from .csvlog import append_row
from .detector import detect
from .errors import SourceSyntaxError
from .gateway import CompletionExchange, Provider, complete_prompt
from .harness import EntryOutcome, OracleEntry, identifies
from .mirror import MirrorReport, mirror
from .prompts import CodeSlice, PromptSpec, narrowed, render, splice
from .refactorings import RefactoringInstance
from .source_model import parse
from .subcategories import Subcategory, lookup, subcategory_registry


class EntryResult(BaseModel):
    outcome: EntryOutcome
    exchange: Optional[CompletionExchange] = None
    report: Optional[MirrorReport] = None


def oracle_target(r: RefactoringInstance) -> str:
    """Path of the entity the oracle refactoring works on, used for P3 and narrowed prompts."""
    p = r.params
    if r.kind == "rename_method":
        return f"{p['entity']}.{p['old_name']}({','.join(p.get('param_types') or [])})"
    if r.kind.startswith("rename_"):
        return p["entity"]
    return p.get("method") or p.get("source_method") or p["source_class"]


def prompt_spec(entry: OracleEntry, template: str) -> PromptSpec:
    targets = entry.target_entities or [oracle_target(entry.oracle_instance)]
    return PromptSpec(
        template=template,
        refactoring_type=None if template == "P1" else entry.refactoring_type,
        subcategory=entry.subcategory if template.startswith("P2_SUB") else None,
        target_entities=targets if template in ("P3", "P2_SUB_NARROW") else [],
        code=entry.code_before,
    )


def entry_slice(spec: PromptSpec, registry: dict[str, Subcategory]) -> Optional[CodeSlice]:
    if spec.template != "P2_SUB_NARROW":
        return None
    return narrowed(spec, lookup(spec.subcategory, registry))


def entry_prompts(entries: list[OracleEntry], template: str,
                  registry: Optional[dict[str, Subcategory]] = None) -> dict[tuple[str, str], str]:
    registry = registry or subcategory_registry()
    return {(e.id, template): render(prompt_spec(e, template), registry) for e in entries}


def score_entry(entry: OracleEntry, template: str, exchange: CompletionExchange,
                piece: Optional[CodeSlice], config: RunConfig) -> EntryResult:
    """Mirror the refactored code and decide whether it identified the oracle refactoring."""
    def outcome(success: bool, applied: int = 0, residual: int = 0, note: str = "") -> EntryOutcome:
        return EntryOutcome(entry_id=entry.id, refactoring_type=entry.refactoring_type, template=template,
                            loc=entry.loc, success=success, applied=applied, residual=residual, note=note)

    if exchange.code is None:
        return EntryResult(outcome=outcome(False, note="no code in response"), exchange=exchange)
    refactored = splice(entry.code_before, piece, exchange.code) if piece else exchange.code

    report = mirror(entry.code_before, refactored, config.engine())
    try:
        suggested = detect(parse(entry.code_before), parse(refactored))
    except SourceSyntaxError as err:
        return EntryResult(outcome=outcome(False, residual=len(report.residual), note=f"syntax error: {err}"),
                           exchange=exchange, report=report)
    success = identifies(suggested, entry.oracle_instance)
    return EntryResult(
        outcome=outcome(success, applied=len(report.applied), residual=len(report.residual)),
        exchange=exchange,
        report=report,
    )


async def run_entry(entry: OracleEntry, config: RunConfig, provider: Provider,
                    registry: dict[str, Subcategory], semaphore: asyncio.Semaphore) -> EntryResult:
    spec = prompt_spec(entry, config.template)
    piece = entry_slice(spec, registry)
    prompt = render(spec, registry)
    async with semaphore:
        with logfire.span("entry {entry_id}", entry_id=entry.id, template=config.template):
            exchange = await complete_prompt(prompt, provider)
    return score_entry(entry, config.template, exchange, piece, config)


async def run_dataset(entries: list[OracleEntry], config: RunConfig, provider: Provider,
                      registry: Optional[dict[str, Subcategory]] = None,
                      logs_dir: Optional[Path] = None, csv_path: Optional[Path] = None) -> list[EntryResult]:
    """Run every entry with at most ``config.parallelism`` provider calls in flight; results sorted by entry id."""
    registry = registry or subcategory_registry()
    semaphore = asyncio.Semaphore(config.parallelism)
    tasks = [asyncio.create_task(run_entry(e, config, provider, registry, semaphore)) for e in entries]
    results: list[EntryResult] = []
    try:
        for task in tqdm(asyncio.as_completed(tasks), total=len(tasks), desc=f"run {config.template}"):
            results.append(await task)
    except BaseException:
        for task in tasks:
            task.cancel()
        raise
    results.sort(key=lambda r: r.outcome.entry_id)

    for result in results:
        o = result.outcome
        if logs_dir is not None and result.exchange is not None:
            save_log(create_log_entry(result.exchange), logs_dir)
        if csv_path is not None:
            append_row(csv_path, o.entry_id, o.refactoring_type, o.template, o.success, o.applied, o.residual, o.note)
    logfire.info("run finished", template=config.template, entries=len(results),
                 succeeded=sum(r.outcome.success for r in results))
    return results

