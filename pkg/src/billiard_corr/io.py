"""CSV writers for convergence traces and correlation reports.

Files are UTF-8 with LF line endings.  Probabilities use 17 significant
digits so a reader recovers the exact doubles.
"""

import csv
from pathlib import Path

from .statistics import ConvergenceTrace, CorrelationReport

TRACE_HEADER = ("n", "p1", "p2", "p12", "p1p2")
REPORT_HEADER = ("scenario", "n", "p1", "p2", "p12", "p1p2", "delta", "ci_halfwidth",
                 "ci_level", "significant")


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def _write(path, header, rows):
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def write_trace_csv(trace: ConvergenceTrace, path) -> None:
    _write(path, TRACE_HEADER,
           ([str(n), _g17(p1), _g17(p2), _g17(p12), _g17(pp)] for n, p1, p2, p12, pp in trace.rows()))


def report_row(scenario: str, rep: CorrelationReport) -> list:
    return [scenario, str(rep.n), _g17(rep.p1_hat), _g17(rep.p2_hat), _g17(rep.p12_hat),
            _g17(rep.product), _g17(rep.delta), _g17(rep.ci_halfwidth), repr(float(rep.ci_level)),
            "true" if rep.significant else "false"]


def write_report_csv(rows, path) -> None:
    """``rows`` are ``(scenario_name, CorrelationReport)`` pairs."""
    _write(path, REPORT_HEADER, (report_row(name, rep) for name, rep in rows))


def read_trace_csv(path) -> ConvergenceTrace:
    import numpy as np

    with Path(path).open(encoding="utf-8", newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != TRACE_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        rows = [row for row in r]
    if not rows:
        return ConvergenceTrace.empty()
    cols = list(zip(*rows))
    return ConvergenceTrace(np.array(cols[0], dtype=np.int64),
                            *(np.array(c, dtype=np.float64) for c in cols[1:]))
