"""Atomic JSON and CSV output."""
import csv
import io
import logging
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

from pydantic import BaseModel

logger = logging.getLogger(__name__)


def format_float(value: float) -> str:
    """17 significant digits, enough to round-trip any 64-bit float."""
    return format(float(value), ".17g")


class OutputWriter:
    """Writes result files into one directory; every file appears whole or not at all."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)

    def _atomic_write(self, name: str, text: str) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        target = self.directory / name
        descriptor, temp_path = tempfile.mkstemp(dir=self.directory, prefix=f".{target.name}.", suffix=".tmp")
        try:
            with os.fdopen(descriptor, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
            os.replace(temp_path, target)
        except BaseException:
            Path(temp_path).unlink(missing_ok=True)
            raise
        logger.info(f"[Output] Wrote {target}")
        return target

    def write_json(self, name: str, payload: BaseModel) -> Path:
        """Serialize a model using its aliases (so `passed` is written as `pass`)."""
        return self._atomic_write(name, payload.model_dump_json(by_alias=True, indent=2) + "\n")

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        """Write rows with floats at 17 significant digits."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(cell) if isinstance(cell, float) else cell for cell in row])
        return self._atomic_write(name, buffer.getvalue())
