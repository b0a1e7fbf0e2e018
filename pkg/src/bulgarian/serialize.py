"""CSV and JSON output for reports.

CSV floats are written with 17 significant digits so they parse back to the
identical double; reading an emitted file and writing it again reproduces it
byte for byte. JSON files hold one object
``{schema_version, config, results, provenance}``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import numpy as np

from . import __version__
from .bounds import DeviationBound
from .engine import StreamingRun, Trajectory
from .exact import DistributionVector
from .experiments import (
    CycleReport,
    DeviationReport,
    MarginalStat,
    PopovReport,
    StationaryReport,
)
from .partitions import Partition, WeakComposition

SCHEMA_VERSION = 1
BUILD_ID = f"bulgarian-{__version__}"

PathLike = Union[str, Path]


def format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (Partition, WeakComposition)):
        return "+".join(map(str, value.parts))
    return str(value)


def parse_cell(text: str) -> Any:
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    Path(path).write_text(buf.getvalue())


def read_csv(path: PathLike) -> tuple[list[str], list[list[Any]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[parse_cell(c) for c in row] for row in reader]
    return header, rows


def csv_table(report) -> tuple[list[str], list[list[Any]]]:
    """Header and rows for any report type produced by the package."""
    if isinstance(report, DeviationReport):
        header = ["trial", "seed", "sup_distance", "within_epsilon"]
        rows = [
            [t, s, float(d), bool(d <= report.epsilon)]
            for t, (s, d) in enumerate(zip(report.trial_seeds, report.distances))
        ]
        return header, rows
    if isinstance(report, DistributionVector):
        header = ["index", "partition", "probability"]
        return header, [[i, lam, float(pr)] for i, (lam, pr) in enumerate(zip(report.index, report.probs))]
    if isinstance(report, StationaryReport):
        if report.distribution is not None:
            return csv_table(report.distribution)
        return ["sample", "sup_distance"], [[i, float(d)] for i, d in enumerate(report.distances)]
    if isinstance(report, StreamingRun):
        header = ["round", "new_pile", "sup_distance"]
        return header, [
            [r + 1, int(s), float(d)] for r, (s, d) in enumerate(zip(report.new_piles, report.distances))
        ]
    if isinstance(report, Trajectory):
        header = ["round", "new_pile", "state"]
        rows = [[0, "", report.states[0]]]
        rows += [[r + 1, s, st] for r, (s, st) in enumerate(zip(report.new_piles, report.states[1:]))]
        return header, rows
    if isinstance(report, CycleReport):
        header = ["position", "partition", "near_triangular"]
        return header, [[i, lam, ok] for i, (lam, ok) in enumerate(zip(report.cycle, report.near_triangular))]
    if isinstance(report, DeviationBound):
        d = report.as_dict()
        return list(d), [list(d.values())]
    if isinstance(report, PopovReport):
        header = ["trial", "piles", "largest_pile"]
        return header, [[t, int(a), int(b)] for t, (a, b) in enumerate(zip(report.pile_lengths, report.pile_largest))]
    if isinstance(report, (list, tuple)) and all(isinstance(r, MarginalStat) for r in report):
        header = ["k", "mean", "variance", "expected_mean", "expected_variance", "z_mean", "variance_ratio"]
        return header, [
            [r.k, r.mean, r.variance, r.expected_mean, r.expected_variance, r.z_mean, r.variance_ratio]
            for r in report
        ]
    raise TypeError(f"no CSV schema for {type(report).__name__}")


def emit_csv(report, path: PathLike) -> None:
    header, rows = csv_table(report)
    write_csv(path, header, rows)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, (Partition, WeakComposition)):
        return list(value.parts)
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def _params_dict(params) -> dict:
    return {
        "n": params.n,
        "p": params.p,
        "variant": params.variant.value,
        "master_seed": params.master_seed,
    }


def report_results(report) -> dict:
    """Plain-data view of a report for the ``results`` member of a JSON file."""
    if isinstance(report, DeviationReport):
        return {
            "params": _params_dict(report.params),
            "m": report.m,
            "epsilon": report.epsilon,
            "trials": report.trials,
            "count_within": report.count_within,
            "empirical_prob": report.empirical_prob,
            "quantiles": report.quantiles,
            "sup_distances": report.distances,
            "unsorted_sup_distances": report.unsorted_distances,
            "trial_seeds": list(report.trial_seeds),
            "finite_n_bound": report.finite_n_bound.as_dict(),
        }
    if isinstance(report, DistributionVector):
        return {
            "n": report.index.n,
            "partitions": [list(lam.parts) for lam in report.index],
            "probabilities": report.probs,
        }
    if isinstance(report, StationaryReport):
        out = {
            "params": _params_dict(report.params),
            "burn_in": report.burn_in,
            "samples": report.samples,
            "thinning": report.thinning,
            "quantiles": report.quantiles,
        }
        if report.distribution is not None:
            out["distribution"] = report_results(report.distribution)
        return out
    if isinstance(report, StreamingRun):
        return {
            "params": _params_dict(report.params),
            "rounds": report.rounds,
            "initial": report.initial,
            "final": report.final,
            "new_piles": report.new_piles,
            "sup_distances": report.distances,
        }
    if isinstance(report, Trajectory):
        return {
            "params": _params_dict(report.params),
            "rounds": report.rounds,
            "states": list(report.states),
            "new_piles": list(report.new_piles),
        }
    if isinstance(report, CycleReport):
        return {
            "initial": report.initial,
            "tail_length": report.tail_length,
            "cycle_length": report.cycle_length,
            "cycle": list(report.cycle),
            "near_triangular": list(report.near_triangular),
        }
    if isinstance(report, DeviationBound):
        return report.as_dict()
    if isinstance(report, PopovReport):
        return {
            "n": report.n,
            "p": report.p,
            "m": report.m,
            "scale": report.scale,
            "pile_lengths": report.pile_lengths,
            "pile_largest": report.pile_largest,
            "mean_scaled_length": float(np.mean(report.pile_lengths)) / report.scale,
            "mean_scaled_largest": float(np.mean(report.pile_largest)) * report.scale / report.n,
        }
    if isinstance(report, (list, tuple)) and all(isinstance(r, MarginalStat) for r in report):
        return {"marginals": [dict(vars(r)) for r in report]}
    if isinstance(report, dict):
        return report
    raise TypeError(f"no JSON schema for {type(report).__name__}")


def json_document(report, config: dict, master_seed: int) -> dict:
    return _jsonable(
        {
            "schema_version": SCHEMA_VERSION,
            "config": config,
            "results": report_results(report),
            "provenance": {"master_seed": int(master_seed), "build_id": BUILD_ID},
        }
    )


def dump_json(document: dict) -> str:
    return json.dumps(document, indent=2) + "\n"


def emit_json(report, path: PathLike, config: dict, master_seed: int = 0) -> None:
    Path(path).write_text(dump_json(json_document(report, config, master_seed)))


def read_json(path: PathLike) -> dict:
    return json.loads(Path(path).read_text())
