"""CSV emission for run logs and metrics."""

import csv
from pathlib import Path
from typing import Iterable, List, Union

from app.schemas.results import Metrics, RunLog
from app.utils.logger import app_logger

BASE_COLUMNS = [
    "t",
    "qw", "qx", "qy", "qz",
    "qdw", "qdx", "qdy", "qdz",
    "wx", "wy", "wz",
    "qew", "qex", "qey", "qez",
    "sx", "sy", "sz",
    "branch",
    "Mx", "My", "Mz",
]
ESTIMATE_COLUMNS = [f"a{i}" for i in range(1, 7)]

METRIC_COLUMNS = list(Metrics.model_fields)


def _fmt(value) -> str:
    """Shortest round-trip decimal form."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, str)):
        return str(value)
    return repr(float(value))


def runlog_columns(log: RunLog) -> List[str]:
    return BASE_COLUMNS + (ESTIMATE_COLUMNS if log.is_adaptive else [])


def emit_csv(log: RunLog, path: Union[str, Path]) -> Path:
    """Write one header row and one row per logged sample."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(runlog_columns(log))
            for k in range(log.rows):
                values = [log.t[k], *log.q[k], *log.q_d[k], *log.omega[k], *log.q_e[k], *log.s[k], log.branch[k], *log.torque[k]]
                if log.a_hat is not None:
                    values.extend(log.a_hat[k])
                writer.writerow(_fmt(v) for v in values)
    except OSError as e:
        app_logger.error(f"Failed to write run log {path}: {e}")
        raise
    app_logger.info(f"Run log written: {path} ({log.rows} rows)")
    return path


def emit_metrics_csv(metrics: Iterable[Metrics], path: Union[str, Path]) -> Path:
    """One row per scenario, columns named after the :class:`Metrics` fields."""
    path = Path(path)
    rows = list(metrics)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(METRIC_COLUMNS)
            for m in rows:
                data = m.model_dump()
                writer.writerow(_fmt(data[c]) for c in METRIC_COLUMNS)
    except OSError as e:
        app_logger.error(f"Failed to write metrics {path}: {e}")
        raise
    app_logger.info(f"Metrics written: {path} ({len(rows)} rows)")
    return path
