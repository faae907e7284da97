"""
Run reports: one self-describing JSON document per run, plus CSV extracts of
bulk data (basin grids, best-response traces, correlated distributions and
Pareto tables).
"""

import csv
import itertools
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Union

import numpy as np

from .errors import MissingResultError, ParameterError
from .utils.serialization import csv_cell, to_jsonable

logger = logging.getLogger("eqkit.report")

SCHEMA_VERSION = "1"
CSV_KINDS = ("basins", "trace", "ce", "pareto")
# excluded when two runs are compared
VOLATILE_FIELDS = ("timings", "host")


@dataclass
class RunReport:
    config: Dict[str, Any]
    toolkit_version: str
    results: Dict[str, Any] = field(default_factory=dict)
    errors: Dict[str, str] = field(default_factory=dict)
    skipped: Dict[str, str] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)
    host: Optional[Dict[str, Any]] = None
    schema_version: str = SCHEMA_VERSION

    @property
    def completed(self) -> bool:
        """True when every requested analysis produced a result."""
        return all(name in self.results for name in self.config.get("analyses", []))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": self.schema_version,
            "toolkit_version": self.toolkit_version,
            "config": self.config,
            "results": to_jsonable(self.results),
            "errors": dict(self.errors),
            "skipped": dict(self.skipped),
            "timings": dict(self.timings),
            "host": self.host,
        }

    def deterministic_view(self) -> Dict[str, Any]:
        data = self.to_dict()
        for key in VOLATILE_FIELDS:
            data.pop(key, None)
        return data

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, allow_nan=False)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunReport":
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ParameterError(f"Unsupported report schema {data.get('schema_version')!r}, expected {SCHEMA_VERSION}")
        return cls(
            config=data["config"],
            toolkit_version=data["toolkit_version"],
            results=data.get("results", {}),
            errors=data.get("errors", {}),
            skipped=data.get("skipped", {}),
            timings=data.get("timings", {}),
            host=data.get("host"),
        )

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))


def write_report(report: RunReport, directory: Union[str, Path]) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / "report.json"
    path.write_text(report.to_json() + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path


def _result(report: RunReport, analysis: str, key: Optional[str] = None) -> Any:
    if analysis not in report.results:
        reason = report.errors.get(analysis) or report.skipped.get(analysis) or "not requested"
        raise MissingResultError(f"No {analysis!r} result in the report ({reason})")
    value = report.results[analysis]
    if key is not None:
        if not isinstance(value, dict) or value.get(key) is None:
            raise MissingResultError(f"The {analysis!r} result has no {key!r} data")
        value = value[key]
    return value


def basin_rows(report: RunReport) -> Iterator[List[Any]]:
    basins = _result(report, "basins")
    starts, labels, equilibria = basins["starts"], basins["labels"], basins["equilibria"]
    for a, x in enumerate(starts[0]):
        for b, y in enumerate(starts[1]):
            label = labels[a][b]
            ne = equilibria[label] if label >= 0 else [None, None]
            yield [x, y, label, ne[0], ne[1]]


def trace_rows(report: RunReport) -> Iterator[List[Any]]:
    trace = _result(report, "solve", "trace")
    for k, (values, mover) in enumerate(zip(trace["iterates"], trace["movers"])):
        yield [k, mover, *values]


def ce_rows(report: RunReport) -> Iterator[List[Any]]:
    correlated = _result(report, "correlated", "regret_matching")
    probabilities = np.asarray(correlated["probabilities"], dtype=float)
    for actions in itertools.product(*(range(n) for n in probabilities.shape)):
        yield [*actions, float(probabilities[actions])]


def pareto_rows(report: RunReport) -> Iterator[List[Any]]:
    for row in _result(report, "efficiency", "profiles"):
        yield [
            row["kind"],
            row["label"],
            " ".join(csv_cell(c) for c in row["coordinates"]),
            " ".join(csv_cell(u) for u in row["utilities"]),
            row["welfare"],
            row["pareto_optimal"],
        ]


def csv_header(report: RunReport, which: str) -> List[str]:
    if which == "basins":
        _result(report, "basins")
        return ["start_1", "start_2", "ne_label", "ne_coord_1", "ne_coord_2"]
    if which == "trace":
        players = len(_result(report, "solve", "trace")["iterates"][0])
        return ["iteration", "player"] + [f"value_{i + 1}" for i in range(players)]
    if which == "ce":
        players = np.asarray(_result(report, "correlated", "regret_matching")["probabilities"]).ndim
        return [f"action_{i + 1}" for i in range(players)] + ["probability"]
    if which == "pareto":
        return ["kind", "label", "coordinates", "utilities", "welfare", "pareto_optimal"]
    raise ParameterError(f"Unknown CSV kind {which!r}; choose from {', '.join(CSV_KINDS)}")


_ROWS = {"basins": basin_rows, "trace": trace_rows, "ce": ce_rows, "pareto": pareto_rows}


def emit_csv(report: RunReport, which: str, directory: Union[str, Path]) -> Path:
    """Write ``<which>.csv`` under ``directory``; floats use 17 significant digits."""
    header = csv_header(report, which)
    rows = [[csv_cell(v) for v in row] for row in _ROWS[which](report)]
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{which}.csv"
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    logger.info(f"Wrote {path} ({len(rows)} rows)")
    return path


def available_csvs(report: RunReport) -> List[str]:
    """CSV kinds whose source data is present in the report."""
    kinds = []
    for which in CSV_KINDS:
        try:
            csv_header(report, which)
        except MissingResultError:
            continue
        kinds.append(which)
    return kinds


def emit_all(report: RunReport, directory: Union[str, Path], kinds: Optional[Sequence[str]] = None) -> List[Path]:
    return [emit_csv(report, which, directory) for which in (kinds or available_csvs(report))]
