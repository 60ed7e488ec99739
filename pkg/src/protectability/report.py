"""JSON serialization of protectability and EP reports.

Key order is fixed and floats carry 12 significant digits, so equal inputs
give byte-identical output. The provenance timestamp is only filled in when
asked for (or when ``SOURCE_DATE_EPOCH`` is set), because a wall-clock stamp
would break that guarantee.
"""

from __future__ import annotations

import json
import math
import os
from datetime import datetime, timezone

from . import __version__
from .core import PRNG_ALGORITHM
from .metrics import EvalReport, ProtectabilityReport
from .shapley import ContributionScores


def _round(x: float) -> float | None:
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def _clean(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return _round(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _clean(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def timestamp(stamp: bool = False) -> str | None:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        return datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()
    if stamp:
        return datetime.now(timezone.utc).isoformat(timespec="seconds")
    return None


def _provenance(notes=(), stamp: bool = False) -> dict:
    return {"tool": "protectability", "tool_version": __version__, "timestamp": timestamp(stamp),
            "prng": PRNG_ALGORITHM, "notes": list(notes)}


def _scores(scores: ContributionScores) -> list:
    return list(scores.values)


def report_dict(report: ProtectabilityReport, stamp: bool = False) -> dict:
    config = report.config.as_dict()
    config["scheme"] = report.scheme
    contributions = {"task": _scores(report.task), "private": _scores(report.private)}
    if report.task.stderr is not None:
        contributions["task_stderr"] = list(report.task.stderr)
        contributions["private_stderr"] = list(report.private.stderr)
    return _clean({
        "kind": report.kind,
        "score": report.score,
        "degenerate": report.degenerate,
        "selected_features": report.selected_names,
        "contributions": contributions,
        "config": config,
        "provenance": _provenance(report.notes, stamp),
    })


def eval_dict(report: EvalReport, stamp: bool = False) -> dict:
    config = report.config.as_dict()
    return _clean({
        "kind": "EP",
        "score": report.ep,
        "degenerate": False,
        "best_scheme": report.best.scheme,
        "schemes": [
            {"scheme": o.scheme, "acc_task": o.acc_task, "acc_private": o.acc_private, "ep": o.ep}
            for o in report.outcomes
        ],
        "config": config,
        "provenance": _provenance((), stamp),
    })


def to_json(report: ProtectabilityReport | EvalReport, stamp: bool = False) -> str:
    data = eval_dict(report, stamp) if isinstance(report, EvalReport) else report_dict(report, stamp)
    return json.dumps(data, indent=2) + "\n"
