"""RunReport: aggregation of task results into JSON and CSV summaries."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import jsonschema

from .evalengine import Outcome
from .metrics import (
    Difficulty,
    TaskResult,
    agreement,
    failure_distribution,
    fraction_str,
    mean_step_ratio,
    mean_sub_sr,
    pass_at_k,
    percent,
    success_rate,
)
from .noise import NoiseKind
from .reset import ResetReport
from .trajectory import Subset


def _pct(x: Fraction) -> float:
    return float(percent(x))


def _ratio(x: Fraction) -> Dict[str, Any]:
    return {"exact": fraction_str(x), "pct": _pct(x)}


def summarize(results: Sequence[TaskResult]) -> Dict[str, Any]:
    dist = failure_distribution(results)
    counts = {o: sum(r.outcome is o for r in results) for o in Outcome}
    msr = mean_step_ratio(results)
    return {
        "n": len(results),
        "sr": _ratio(success_rate(results)),
        "sub_sr": _ratio(mean_sub_sr(results)),
        "mean_step_ratio": {"exact": fraction_str(msr), "value": float(percent(msr) / 100)},
        "outcomes": {o.value: {"count": counts[o], **_ratio(dist[o])} for o in Outcome},
    }


def success_matrix(results: Sequence[TaskResult]) -> Dict[str, List[bool]]:
    matrix: Dict[str, List[bool]] = {}
    for r in sorted(results, key=lambda r: r.run):
        matrix.setdefault(r.task_id, []).append(r.outcome is Outcome.SUCCESS)
    return matrix


def _task_row(r: TaskResult) -> Dict[str, Any]:
    return {
        "task_id": r.task_id,
        "run": r.run,
        "outcome": r.outcome.value,
        "sub_sr": fraction_str(r.sub_sr),
        "clause_hits": list(r.clause_hits),
        "steps_taken": r.steps_taken,
        "golden_steps": r.golden_steps,
        "step_ratio": fraction_str(r.step_ratio),
        "subset": r.subset.value,
        "difficulty": r.difficulty.value,
        "noise_types_fired": dict(r.noise_types_fired),
        "error": r.error,
    }


def _reset_entry(rr: ResetReport) -> Dict[str, Any]:
    sr = rr.reset_sr
    return {
        "run": rr.run,
        "jobs": [
            {
                "reset_task_id": j.job.reset_task_id,
                "category": j.job.category.value,
                "serves": list(j.job.serves),
                "outcome": j.outcome.value,
                "sub_sr": fraction_str(j.result.sub_sr),
                "restored": j.restored,
            }
            for j in rr.jobs
        ],
        "reset_sr": None if sr is None else _ratio(sr),
        "restored": rr.restored,
    }


@dataclass
class RunReport:
    results: Tuple[TaskResult, ...]
    resets: Tuple[ResetReport, ...] = ()
    config: Mapping[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    errors: Tuple[Mapping[str, Any], ...] = ()
    human_labels: Optional[Mapping[str, bool]] = None

    def aggregate(self) -> Dict[str, Any]:
        res = list(self.results)
        out: Dict[str, Any] = {"overall": summarize(res) if res else None}
        by_subset = {}
        by_cell = {}
        for s in Subset:
            group = [r for r in res if r.subset is s]
            if group:
                by_subset[s.value] = summarize(group)
            for d in Difficulty:
                cell = [r for r in group if r.difficulty is d]
                if cell:
                    by_cell[f"{s.value}/{d.value}"] = summarize(cell)
        by_noise = {}
        for k in NoiseKind:
            group = [r for r in res if r.noise_types_fired.get(k.value)]
            if group:
                by_noise[k.value] = summarize(group)
        out["by_subset"] = by_subset
        out["by_subset_difficulty"] = by_cell
        out["by_noise_type"] = by_noise
        matrix = success_matrix(res)
        runs = min((len(v) for v in matrix.values()), default=0)
        out["pass_at_k"] = {str(k): _ratio(pass_at_k(matrix, k)) for k in range(1, runs + 1)}
        return out

    def agreement_block(self) -> Optional[Dict[str, Any]]:
        if not self.human_labels:
            return None
        labelled = [r for r in self.results if r.run == 0 and r.task_id in self.human_labels]
        if not labelled:
            return None
        a = agreement([r.outcome for r in labelled], [self.human_labels[r.task_id] for r in labelled])
        c = a.counts
        return {
            "tp": c.tp,
            "fp": c.fp,
            "fn": c.fn,
            "tn": c.tn,
            "auto_sr": _ratio(a.auto_sr),
            "human_sr": _ratio(a.human_sr),
            "accuracy": _ratio(a.accuracy),
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config": dict(self.config),
            "seed": self.seed,
            "tasks": [_task_row(r) for r in self.results],
            "aggregate": self.aggregate(),
            "agreement": self.agreement_block(),
            "reset": [_reset_entry(rr) for rr in self.resets],
            "errors": [dict(e) for e in self.errors],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"

    def summary_csv(self) -> str:
        return summary_csv(self.to_dict())


CSV_COLUMNS = [
    "subset",
    "difficulty",
    "n",
    "sr_pct",
    "sub_sr_pct",
    "mean_step_ratio",
    "success_pct",
    "early_termination_pct",
    "overdue_termination_pct",
    "failure_pct",
]


def summary_csv(report: Mapping[str, Any]) -> str:
    """One row per subset x difficulty cell, recomputable from a report dict."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for key, s in report["aggregate"]["by_subset_difficulty"].items():
        subset, difficulty = key.split("/")
        o = s["outcomes"]
        w.writerow(
            [
                subset,
                difficulty,
                s["n"],
                f"{s['sr']['pct']:.2f}",
                f"{s['sub_sr']['pct']:.2f}",
                f"{s['mean_step_ratio']['value']:.2f}",
                f"{o['Success']['pct']:.2f}",
                f"{o['EarlyTermination']['pct']:.2f}",
                f"{o['OverdueTermination']['pct']:.2f}",
                f"{o['Failure']['pct']:.2f}",
            ]
        )
    return buf.getvalue()


def report_schema() -> dict:
    text = resources.files("trajeval").joinpath("data/schemas/run_report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate_report(doc: Mapping[str, Any]) -> None:
    """Raise ``jsonschema.ValidationError`` if ``doc`` is not a well-formed report."""
    jsonschema.validate(doc, report_schema())
