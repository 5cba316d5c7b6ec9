from pathlib import Path
from typing import Any, Optional, Sequence, Union

import pandas as pd

from app.core.logger import get_cli_logger
from app.storage.json_codec import dumps, to_jsonable

logger = get_cli_logger()

CSV_FLOAT_FORMAT = "%.12g"


def write_json(payload: Any, out: Optional[Union[str, Path]] = None) -> str:
    """Sorted-key UTF-8 JSON; written to `out` when given, always returned."""
    text = dumps(payload) + "\n"
    if out is not None:
        Path(out).write_text(text, encoding="utf-8")
        logger.info(f"💾 WRITE | json={out} bytes={len(text.encode('utf-8'))}")
    return text


def write_csv(rows: Sequence[Any], columns: Sequence[str], out: Optional[Union[str, Path]] = None) -> str:
    """CSV with a header row and a fixed float format; +inf is written as "inf"."""
    frame = pd.DataFrame([to_jsonable(row) for row in rows], columns=list(columns))
    text = frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    if out is not None:
        Path(out).write_text(text, encoding="utf-8")
        logger.info(f"💾 WRITE | csv={out} rows={len(frame)}")
    return text


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path)
