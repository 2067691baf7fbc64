"""Detect-and-reapply: keep the refactorings the engine can redo, quarantine everything else."""
from __future__ import annotations

import difflib
import re
from typing import Literal, Optional

import logfire
from pydantic import BaseModel, Field

from .ast_nodes import ClassDecl, FieldDecl, Initializer, MethodDecl, Name, OpaqueMember, walk
from .binder import EXTERNAL
from .config import DetectorConfig, EngineConfig
from .detector import detect
from .engine import apply, check
from .errors import SourceSyntaxError, UnknownEntity, UnsupportedKind
from .printer import member_lines
from .refactorings import PHASE, LineSpan, PreconditionViolation, RefactoringInstance
from .source_model import SourceUnit, class_path, iter_all_classes, local_variables, method_path, parse, print_unit

Classification = Literal["semantic_change", "syntax_error_source", "unknown_edit"]
SkipReason = Literal["precondition_failed", "unsupported_kind"]
MAX_ROUNDS = 64


class Hunk(BaseModel):
    before: Optional[LineSpan] = Field(default=None, description="lines in c_hat")
    after: Optional[LineSpan] = Field(default=None, description="lines in c_prime")
    classification: Classification
    text: str = ""


class SkippedInstance(BaseModel):
    instance: RefactoringInstance
    reason: SkipReason
    violations: list[PreconditionViolation] = Field(default_factory=list)


class UnresolvedReference(BaseModel):
    name: str
    line: int
    method: str


class MirrorReport(BaseModel):
    applied: list[RefactoringInstance] = Field(default_factory=list)
    skipped: list[SkippedInstance] = Field(default_factory=list)
    residual: list[Hunk] = Field(default_factory=list)
    c_hat: str
    detected: int = 0
    reapply_rate: Optional[float] = None
    unresolved: list[UnresolvedReference] = Field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.residual

    def exit_code(self) -> int:
        return 0 if self.clean else 2


# ---- residual diff ----


def _member_key(member, ordinal: int) -> str:
    if isinstance(member, FieldDecl):
        return f"field:{member.name}"
    if isinstance(member, MethodDecl):
        types = ",".join(t.replace(" ", "") for t in member.param_types)
        return f"method:{member.name}({types})"
    if isinstance(member, Initializer):
        return f"init:{ordinal}"
    if isinstance(member, OpaqueMember):
        return f"opaque:{member.text}"
    return f"other:{ordinal}"


def _members(cls: ClassDecl) -> dict[str, object]:
    out: dict[str, object] = {}
    for k, member in enumerate(m for m in cls.members if not isinstance(m, ClassDecl)):
        out[_member_key(member, k)] = member
    return out


def _class_head(cls: ClassDecl) -> str:
    return " ".join(p for p in (cls.modifiers, cls.keyword, cls.name, cls.header) if p)


class ResidualDiff:
    """Member-level structural diff of ``c_hat`` against ``c_prime``."""

    def __init__(self, hat: SourceUnit, prime: SourceUnit, relocatable: set[str], allow_relocation: bool):
        self.hat = hat
        self.prime = prime
        self.relocatable = relocatable
        self.allow_relocation = allow_relocation
        self.hunks: list[Hunk] = []

    def run(self) -> list[Hunk]:
        if self.hat.package_header != self.prime.package_header:
            self.hunks.append(Hunk(classification="unknown_edit", text=f"package: {self.prime.package_header}"))
        if self.hat.imports != self.prime.imports:
            added = sorted(set(self.prime.imports) - set(self.hat.imports))
            removed = sorted(set(self.hat.imports) - set(self.prime.imports))
            self.hunks.append(Hunk(classification="unknown_edit",
                                   text="\n".join([*(f"-{i}" for i in removed), *(f"+{i}" for i in added)])))
        hat_classes = {class_path(self.hat, c): c for c in iter_all_classes(self.hat)}
        prime_classes = {class_path(self.prime, c): c for c in iter_all_classes(self.prime)}
        for path in dict.fromkeys([*hat_classes, *prime_classes]):
            ours, theirs = hat_classes.get(path), prime_classes.get(path)
            if theirs is None:
                self.hunks.append(Hunk(before=LineSpan.of(ours.span), classification="semantic_change",
                                       text=f"-class {path}"))
            elif ours is None:
                self.hunks.append(Hunk(after=LineSpan.of(theirs.span), classification="semantic_change",
                                       text=f"+class {path}"))
            else:
                self._compare_classes(ours, theirs)
        return self.hunks

    def _compare_classes(self, ours: ClassDecl, theirs: ClassDecl) -> None:
        if _class_head(ours) != _class_head(theirs):
            self.hunks.append(Hunk(
                before=LineSpan(start_line=ours.span.start_line, end_line=ours.span.start_line),
                after=LineSpan(start_line=theirs.span.start_line, end_line=theirs.span.start_line),
                classification="semantic_change",
                text=f"-{_class_head(ours)}\n+{_class_head(theirs)}",
            ))
        our_members, their_members = _members(ours), _members(theirs)
        for key in dict.fromkeys([*our_members, *their_members]):
            mine, other = our_members.get(key), their_members.get(key)
            if other is None:
                self.hunks.append(Hunk(before=LineSpan.of(mine.span), classification="semantic_change",
                                       text="\n".join("-" + line for line in member_lines(mine))))
            elif mine is None:
                self.hunks.append(Hunk(after=LineSpan.of(other.span), classification="semantic_change",
                                       text="\n".join("+" + line for line in member_lines(other))))
            else:
                self._compare_members(mine, other)

    def _compare_members(self, mine, other) -> None:
        a, b = member_lines(mine), member_lines(other)
        if a == b:
            return
        matcher = difflib.SequenceMatcher(a=a, b=b, autojunk=False)
        changes = [op for op in matcher.get_opcodes() if op[0] != "equal"]
        if self.allow_relocation:
            changes = self._drop_relocations(changes, a, b)
        for _, i1, i2, j1, j2 in changes:
            start = mine.span.start_line + i1
            end = min(mine.span.start_line + max(i2 - 1, i1), mine.span.end_line)
            text = "\n".join([*("-" + line for line in a[i1:i2]), *("+" + line for line in b[j1:j2])])
            self.hunks.append(Hunk(
                before=LineSpan(start_line=start, end_line=end),
                after=LineSpan.of(other.span),
                classification="semantic_change",
                text=text,
            ))

    def _drop_relocations(self, changes: list, a: list[str], b: list[str]) -> list:
        """Drop a deleted line paired with an identical inserted line that declares an extracted variable."""
        deleted = [c for c in changes if c[0] == "delete" and c[2] - c[1] == 1]
        inserted = [c for c in changes if c[0] == "insert" and c[4] - c[3] == 1]
        dropped = set()
        for d in deleted:
            text = a[d[1]].strip()
            if not any(re.search(rf"\b{re.escape(name)}\s*=", text) for name in self.relocatable):
                continue
            match = next((i for i in inserted if i not in dropped and b[i[3]].strip() == text), None)
            if match is not None:
                dropped.update({d, match})
        return [c for c in changes if c not in dropped]


def unresolved_references(unit: SourceUnit) -> list[UnresolvedReference]:
    """Names that bind to nothing while a local of the same name exists in the enclosing method."""
    out = []
    for cls in iter_all_classes(unit):
        for method in (m for m in cls.members if isinstance(m, MethodDecl)):
            local_names = {v.name for v in local_variables(method)}
            for node in walk(method):
                if (isinstance(node, Name) and node.name in local_names
                        and unit.binding_table.get(node.id) == EXTERNAL):
                    out.append(UnresolvedReference(name=node.name, line=node.span.start_line,
                                                   method=method_path(unit, method)))
    return out


# ---- pipeline ----


def _order(r: RefactoringInstance) -> tuple:
    return PHASE.get(r.kind, len(PHASE)), r.position(), r.key()


def classify_residual(hat: SourceUnit, prime: SourceUnit, applied: list[RefactoringInstance],
                      unresolved: list[UnresolvedReference]) -> list[Hunk]:
    relocatable = {r.params["new_name"] for r in applied if r.kind == "extract_variable"}
    hunks = ResidualDiff(hat, prime, relocatable, allow_relocation=not unresolved).run()
    broken = {u.line for u in unresolved}
    for k, hunk in enumerate(hunks):
        # c_prime would not compile: a name is used outside the scope of its declaration
        if hunk.after and any(hunk.after.start_line <= line <= hunk.after.end_line for line in broken):
            hunks[k] = hunk.model_copy(update={"classification": "syntax_error_source"})
    return hunks


def mirror(c: str, c_prime: str, engine_config: Optional[EngineConfig] = None,
           detector_config: Optional[DetectorConfig] = None) -> MirrorReport:
    before = parse(c)
    try:
        after = parse(c_prime)
    except SourceSyntaxError as err:
        logfire.warn("refactored code does not parse", error=str(err))
        lines = max(1, len(c.splitlines()))
        hunk = Hunk(
            before=LineSpan(start_line=1, end_line=lines),
            after=LineSpan(start_line=err.span.start_line, end_line=err.span.end_line),
            classification="syntax_error_source",
            text=str(err),
        )
        return MirrorReport(c_hat=c, residual=[hunk])

    with logfire.span("mirror"):
        initial = detect(before, after, detector_config)
        current = before
        applied: list[RefactoringInstance] = []
        skipped: list[SkippedInstance] = []
        seen: set[str] = set()
        applied_anchors: set[str] = set()
        candidates = initial
        for _ in range(MAX_ROUNDS):
            candidates = [r for r in candidates if r.anchor() not in seen]
            if not candidates:
                break
            r = min(candidates, key=_order)
            seen.add(r.anchor())
            try:
                violations = check(current, r, engine_config)
            except UnsupportedKind:
                skipped.append(SkippedInstance(instance=r, reason="unsupported_kind"))
                continue
            except UnknownEntity as err:
                logfire.warn("instance refers to a missing entity", label=r.label(), error=str(err))
                skipped.append(SkippedInstance(instance=r, reason="precondition_failed"))
                continue
            if violations:
                logfire.info("skipped {label}", label=r.label(), rules=[v.rule_id for v in violations])
                skipped.append(SkippedInstance(instance=r, reason="precondition_failed", violations=violations))
                continue
            current = apply(current, r, engine_config)
            applied.append(r)
            applied_anchors.add(r.anchor())
            candidates = detect(current, after, detector_config)
        for r in initial:
            if r.anchor() not in seen:
                # overtaken by an earlier application
                skipped.append(SkippedInstance(instance=r, reason="precondition_failed"))

        unresolved = unresolved_references(after)
        residual = classify_residual(current, after, applied, unresolved)
        c_hat = print_unit(current) if applied else c
        reapplied = sum(1 for r in initial if r.anchor() in applied_anchors)
        report = MirrorReport(
            applied=applied,
            skipped=skipped,
            residual=residual,
            c_hat=c_hat,
            detected=len(initial),
            reapply_rate=reapplied / len(initial) if initial else None,
            unresolved=unresolved,
        )
        logfire.info("mirror finished", applied=len(applied), skipped=len(skipped), residual=len(residual))
        return report
