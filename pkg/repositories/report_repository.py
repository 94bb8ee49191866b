"""
Report Repository - File Access Layer
Handles every read of input files and every write of reports.
"""

import csv
import io
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from core import codec
from core.exceptions import InvalidParameterError, SchemaError
from models.exclusion import ExclusionInstance
from models.quantum import BipartiteState, MeasurementEnsemble

logger = logging.getLogger(__name__)

INSTANCE_KINDS = ("as", "ams", "ame")


class ReportRepository:
    """
    Repository pattern for input files and reports.
    Output goes to `output_path` when set, otherwise to stdout.
    """

    def __init__(self, output_path: Optional[Path] = None):
        self.output_path = Path(output_path) if output_path is not None else None

    # ------------------------------------------------------------------
    # Reading
    # ------------------------------------------------------------------

    def read_json(self, path: Path) -> Any:
        """Read and parse one JSON file"""
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise InvalidParameterError(f"cannot read {path}: {e.strerror or e}") from e
        logger.debug(f"Read {len(text)} bytes from {path}")
        return codec.loads(text)

    def read_state(self, path: Path) -> BipartiteState:
        """Read a bipartite pure state (Schmidt form or a d^2 amplitude vector)"""
        return codec.decode_bipartite(self.read_json(path))

    def read_ensemble(self, path: Path) -> MeasurementEnsemble:
        return codec.decode_ensemble(self.read_json(path))

    def read_instance(self, path: Path) -> Tuple[str, Dict[str, Any]]:
        """
        Read a solve instance. Returns the kind ("as", "ams" or "ame") and the raw
        payload; the payload is decoded by the matching `decode_*` helper.
        """
        payload = self.read_json(path)
        if not isinstance(payload, dict):
            raise SchemaError("instance file must hold a JSON object")
        kind = payload.get("kind", "as")
        if kind not in INSTANCE_KINDS:
            raise SchemaError(f"unknown instance kind {kind!r}, expected one of {', '.join(INSTANCE_KINDS)}")
        return kind, payload

    @staticmethod
    def decode_as_instance(payload: Dict[str, Any]) -> ExclusionInstance:
        return codec.decode_exclusion_instance(payload)

    @staticmethod
    def decode_ams_instance(payload: Dict[str, Any]) -> MeasurementEnsemble:
        if "ensemble" not in payload:
            raise SchemaError("ams instance is missing field(s): ensemble")
        return codec.decode_ensemble(payload["ensemble"])

    @staticmethod
    def decode_ame_instance(payload: Dict[str, Any]) -> Tuple[MeasurementEnsemble, BipartiteState]:
        missing = [k for k in ("ensemble", "state") if k not in payload]
        if missing:
            raise SchemaError(f"ame instance is missing field(s): {', '.join(missing)}")
        return codec.decode_ensemble(payload["ensemble"]), codec.decode_bipartite(payload["state"])

    # ------------------------------------------------------------------
    # Writing
    # ------------------------------------------------------------------

    def write_json(self, payload: Any) -> str:
        """Write a payload as deterministic JSON"""
        text = codec.dumps(payload)
        self._emit(text)
        return text

    def write_csv(self, rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> str:
        """
        Write rows under a fixed header. Floats use the shortest round-trip
        repr ('.' decimal separator whatever the locale), booleans are written
        as true/false.
        """
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(row.get(column)) for column in columns])
        text = buffer.getvalue()
        self._emit(text)
        return text

    def write_rows(self, rows: Sequence[Dict[str, Any]], columns: Sequence[str], output_format: str = "csv") -> str:
        """Tabular output as CSV, or as a JSON list of row objects"""
        if output_format == "csv":
            return self.write_csv(rows, columns)
        return self.write_json([{column: _json_cell(row.get(column)) for column in columns} for row in rows])

    def _emit(self, text: str) -> None:
        if self.output_path is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        try:
            self.output_path.parent.mkdir(parents=True, exist_ok=True)
            self.output_path.write_text(text, encoding="utf-8")
        except OSError as e:
            raise InvalidParameterError(f"cannot write {self.output_path}: {e.strerror or e}") from e
        logger.info(f"Wrote {len(text)} bytes to {self.output_path}")


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        encoded = codec.encode_real(value)
        return encoded if isinstance(encoded, str) else repr(encoded)
    return str(value)


def _json_cell(value: Any) -> Any:
    if isinstance(value, float):
        return codec.encode_real(value)
    return value


def parse_csv(text: str) -> List[Dict[str, str]]:
    """Rows of a CSV report as header-keyed strings"""
    return list(csv.DictReader(io.StringIO(text)))
