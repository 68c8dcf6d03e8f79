"""
Append-only results store (one JSON record per line) and the consistency report
that checks stored exact values against the closed-form formulas.
"""

import json
import logging
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple

import pandas as pd
from pydantic import BaseModel, Field, ValidationError

from app.bounds import exact_formulas
from app.errors import InputError
from config import RBL_STORE, TOOL_VERSION

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["verdict", "n", "s", "t", "q", "status", "value", "lo", "hi", "formulas", "mode", "seed",
                  "timestamp"]
VERDICT_ORDER = {"mismatch": 0, "inconclusive": 1, "no-formula": 2, "agrees": 3}


class ResultKey(BaseModel):
    n: int
    s: int
    t: int
    q: int
    mode: str
    seed: Optional[int] = None
    tool_version: str = TOOL_VERSION

    def as_tuple(self) -> Tuple:
        return (self.n, self.s, self.t, self.q, self.mode, self.seed, self.tool_version)


class ResultRecord(BaseModel):
    key: ResultKey
    kind: str  # "exact" | "verify" | "construct"
    payload: Dict[str, Any]
    timestamp: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def to_line(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


def resolve_store_path(cli_value: Optional[str] = None) -> Path:
    """RBL_STORE in the environment wins over the flag; the config default comes last"""
    env_value = os.environ.get("RBL_STORE")
    if env_value:
        return Path(env_value)
    return Path(cli_value or RBL_STORE)


class ResultStore:
    """Newline-delimited JSON file; records are only ever appended"""

    def __init__(self, path) -> None:
        self.path = Path(path)

    def append(self, record: ResultRecord) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write(record.to_line() + "\n")
        logger.info(f"stored {record.kind} record for {record.key.as_tuple()} in {self.path}")

    def records(self) -> Iterator[ResultRecord]:
        if not self.path.exists():
            return
        with open(self.path, "r", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    yield ResultRecord.model_validate(json.loads(line))
                except (json.JSONDecodeError, ValidationError) as e:
                    logger.warning(f"⚠️ skipping corrupt record at {self.path}:{lineno}: {e}")

    def latest(self, kind: Optional[str] = None) -> List[ResultRecord]:
        """Last record per (key, kind), in order of first appearance"""
        chosen: Dict[Tuple, ResultRecord] = {}
        for record in self.records():
            if kind is None or record.kind == kind:
                chosen[(record.key.as_tuple(), record.kind)] = record
        return list(chosen.values())


def _verdict(status: str, value: Optional[int], formulas: Dict[str, int]) -> str:
    if status != "Exact":
        return "inconclusive"
    if not formulas:
        return "no-formula"
    if any(predicted != value for predicted in formulas.values()):
        return "mismatch"
    return "agrees"


def report(store: ResultStore) -> pd.DataFrame:
    """One row per stored exact value, with formula predictions; mismatches first"""
    rows = []
    for record in store.latest(kind="exact"):
        key, payload = record.key, record.payload
        status = payload.get("status", "")
        value = payload.get("value")
        formulas = exact_formulas(key.n, key.s, key.t, key.q)
        rows.append({
            "verdict": _verdict(status, value, formulas),
            "n": key.n, "s": key.s, "t": key.t, "q": key.q,
            "status": status, "value": value, "lo": payload.get("lo"), "hi": payload.get("hi"),
            "formulas": json.dumps(formulas, sort_keys=True),
            "mode": key.mode, "seed": key.seed, "timestamp": record.timestamp,
        })
    table = pd.DataFrame(rows, columns=REPORT_COLUMNS)
    if table.empty:
        return table
    table["_order"] = table["verdict"].map(VERDICT_ORDER)
    table = table.sort_values(["_order", "n", "s", "t", "q"], kind="stable").drop(columns="_order")
    mismatches = int((table["verdict"] == "mismatch").sum())
    if mismatches:
        logger.warning(f"⚠️ {mismatches} stored values disagree with a closed form")
    return table.reset_index(drop=True)


def render_report(table: pd.DataFrame, fmt: str = "json") -> str:
    if fmt == "csv":
        return table.to_csv(index=False)
    if fmt == "json":
        return table.to_json(orient="records", indent=2)
    raise InputError(f"unknown report format {fmt!r}")
