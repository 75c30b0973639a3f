"""Writing and reading experiment results."""
from __future__ import annotations

import json
import logging
from dataclasses import asdict
from pathlib import Path

import pandas as pd

from .const import CSV_COLUMNS, SNR_NOTE, PrecoderKind, ResultFormat
from .exceptions import ResultsWriteError
from .simulation import ExperimentConfig, ResultRow, SimResult

_LOGGER = logging.getLogger(__name__)


def to_frame(result: SimResult) -> pd.DataFrame:
    """Return the result rows as a DataFrame with the CSV columns."""
    frame = pd.DataFrame([asdict(row) for row in result.rows])
    frame["precoder"] = frame["precoder"].astype(str)
    return frame[CSV_COLUMNS]


def _as_json(result: SimResult) -> str:
    rows = []
    for row in result.rows:
        data = asdict(row)
        data["precoder"] = str(row.precoder)
        rows.append(data)
    document = {
        "note": SNR_NOTE,
        "config": result.config.as_dict(),
        "rows": rows,
    }
    return json.dumps(document, indent=2)


def emit_results(result: SimResult, result_format: ResultFormat, path: str | Path) -> None:
    """Write a result file; CSV files open with '#' comment lines."""
    path = Path(path)
    pdp = result.config.pdp
    header = (
        f"# {SNR_NOTE}\n"
        f"# pdp={pdp.kind} decay_ratio={pdp.decay_ratio} seed={result.config.master_seed}\n"
    )
    try:
        if result_format == ResultFormat.JSON:
            path.write_text(_as_json(result) + "\n", encoding="utf-8")
        else:
            with path.open("w", encoding="utf-8", newline="") as handle:
                handle.write(header)
                to_frame(result).to_csv(handle, index=False, lineterminator="\n")
    except OSError as err:
        raise ResultsWriteError(f"Could not write {path}: {err}") from err
    _LOGGER.info("Wrote %d rows to %s", len(result.rows), path)


def load_results(path: str | Path) -> SimResult:
    """Read back a JSON result file."""
    document = json.loads(Path(path).read_text(encoding="utf-8"))
    rows = tuple(
        ResultRow(**{**row, "precoder": PrecoderKind(row["precoder"])})
        for row in document["rows"]
    )
    return SimResult(ExperimentConfig.from_dict(document["config"]), rows)


def read_csv(path: str | Path) -> pd.DataFrame:
    """Read a CSV result file, skipping its comment header."""
    return pd.read_csv(path, comment="#")
