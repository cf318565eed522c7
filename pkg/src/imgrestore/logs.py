"""CSV serialization of iteration logs."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

from .solvers import IterationRecord

CSV_HEADER = "k,tau,rel_err,misfit,objective"


def write_log(records: Iterable[IterationRecord], path) -> None:
    """Write records as CSV with LF endings and 13 significant digits."""
    records = list(records)
    if not records:
        raise ValueError("refusing to write an empty iteration log")
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.k},{r.tau:.12e},{r.rel_err:.12e},{r.misfit:.12e},{r.objective:.12e}"
        )
    try:
        Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))
    except OSError as exc:
        raise OSError(f"cannot write iteration log to {path}: {exc}") from exc
