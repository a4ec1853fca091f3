"""
DCLED - Dataset Service
Reads (label, value) rows and program files, and evaluates programs on
plaintext data (the oracle the delegated results are compared against).
"""

import csv
import logging
from collections.abc import Iterator
from pathlib import Path

from pydantic import ValidationError

from app.core.exceptions import DecodeError, MissingLabelError, StorageError
from app.core.field import FieldElement, SchemeParams
from app.core.prf import Label
from app.models.program import MonomialProgram, QuadraticProgram, eval_plain
from app.schemas.dataset import DataRow, ProgramFile

logger = logging.getLogger(__name__)


def _iter_rows(path: Path) -> Iterator[DataRow]:
    suffix = path.suffix.lower()
    with open(path, newline="", encoding="utf-8") as fh:
        if suffix in (".jsonl", ".ndjson"):
            for number, line in enumerate(fh, start=1):
                if line.strip():
                    try:
                        yield DataRow.model_validate_json(line)
                    except ValidationError as exc:
                        raise DecodeError(f"{path}:{number}: {exc.errors()[0]['msg']}") from exc
            return

        reader = csv.reader(fh)
        for number, fields in enumerate(reader, start=1):
            if not fields or not "".join(fields).strip():
                continue
            if number == 1 and fields[0].strip().lower() == "label":
                continue
            if len(fields) != 2:
                raise DecodeError(f"{path}:{number}: expected label,value")
            try:
                yield DataRow(label=fields[0], value=fields[1])
            except ValidationError as exc:
                raise DecodeError(f"{path}:{number}: {exc.errors()[0]['msg']}") from exc


def load_rows(path: Path, params: SchemeParams) -> list[tuple[Label, FieldElement]]:
    """Rows from a CSV (`label,value`, optional header) or JSONL file."""
    path = Path(path)
    try:
        rows = [row.to_item(params) for row in _iter_rows(path)]
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc}") from exc
    logger.info(f"Loaded {len(rows)} rows from {path}")
    return rows


def load_program(path: Path, params: SchemeParams) -> QuadraticProgram | MonomialProgram:
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc}") from exc
    try:
        doc = ProgramFile.model_validate_json(raw)
    except ValidationError as exc:
        raise DecodeError(f"malformed program file {path}: {exc.errors()[0]['msg']}") from exc
    return doc.to_program(params)


def evaluate_plain(
    prog: QuadraticProgram | MonomialProgram, rows: list[tuple[Label, FieldElement]]
) -> FieldElement:
    """The program on plaintext rows, looked up by label."""
    values = dict(rows)
    missing = [lb.text() for lb in prog.labels if lb not in values]
    if missing:
        raise MissingLabelError(missing)
    inputs = [values[lb] for lb in prog.labels]
    if isinstance(prog, MonomialProgram):
        return prog.eval_plain(inputs)
    return eval_plain(prog, inputs)
