import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

from common.errors import BadConfig
from common.series import CorrelationSeries

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def write_csv(path, columns: Sequence[str], rows: List[Sequence]) -> Path:
    """Rows in the given column order, floats with 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(rows), columns=list(columns))
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.generic):
        return value.item()
    return value


def write_json(path, payload: Dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_plain(payload), indent=2, sort_keys=True) + "\n")
    return path


def correlation_rows(series: CorrelationSeries) -> List[tuple]:
    return [(N, value.real, value.imag, abs(value), abs(value) / N)
            for N, value in series.entries]


CORRELATION_COLUMNS = ("N", "re_S", "im_S", "abs_S", "abs_S_over_N")


def read_correlation_csv(path) -> CorrelationSeries:
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise BadConfig(f"cannot read correlation CSV {path}: {e}")
    missing = {"N", "re_S", "im_S"} - set(frame.columns)
    if missing:
        raise BadConfig(f"{path}: missing columns {sorted(missing)}")
    entries = [(int(row.N), complex(row.re_S, row.im_S)) for row in frame.itertuples()]
    try:
        return CorrelationSeries(entries=entries, meta={"source": str(path)})
    except ValueError as e:
        raise BadConfig(f"{path}: {e}")
