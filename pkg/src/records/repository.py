"""
File layer for instances, certificates and reports.
JSON for records, CSV (via pandas) for tables.
"""

import json
import logging
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Type

import pandas as pd
from pydantic import BaseModel, ValidationError

from ..config.settings import settings
from ..errors import InputError
from .models import (
    BddQuery,
    Certificate,
    CvpInstance,
    InstanceFile,
    LatticeDescription,
    MaxLinInstance,
    ProblemKind,
    ReductionArtifacts,
    RunManifest,
    SuiteStats,
    SvpInstance,
)

logger = logging.getLogger(__name__)

PAYLOAD_TYPES: Dict[ProblemKind, Type[BaseModel]] = {
    ProblemKind.MAXLIN: MaxLinInstance,
    ProblemKind.LATTICE: LatticeDescription,
    ProblemKind.CVP: CvpInstance,
    ProblemKind.SVP: SvpInstance,
    ProblemKind.BDD: BddQuery,
}


def _hydrate_lattice(data: Any) -> Any:
    """Accept lattices given by generators only; the basis is derived."""
    if isinstance(data, dict) and "basis" not in data and "generators" in data:
        from ..lattice.basis import build_lattice
        from .models import RationalMatrix

        gens = data["generators"]
        matrix = gens if isinstance(gens, dict) else RationalMatrix.from_rows(gens)
        return build_lattice(RationalMatrix.model_validate(matrix)).model_dump(mode="json")
    return data


class ArtifactStore:
    """Reads and writes run outputs under one directory"""

    def __init__(self, root: Optional[Path] = None):
        self.root = Path(root or settings.output_dir)
        self.root.mkdir(parents=True, exist_ok=True)
        self._manifest: Optional[RunManifest] = None

    @contextmanager
    def _open_for_write(self, path: Path):
        """Write to a sibling temp file, then move it into place"""
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        try:
            with open(tmp, "w", encoding="utf-8", newline="") as fh:
                yield fh
            tmp.replace(path)
        except Exception:
            tmp.unlink(missing_ok=True)
            raise

    def _resolve(self, path: Path) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.root / path

    # ------------------------------------------------------------------ #
    # Runs
    # ------------------------------------------------------------------ #

    @contextmanager
    def run(self, command: List[str], seed: Optional[int] = None, toy: bool = False) -> Iterator[RunManifest]:
        """Scope in which every written record embeds the run manifest"""
        from .. import __version__

        self._manifest = RunManifest(
            command=list(command),
            seed=seed,
            precision=settings.precision.digits,
            toy=toy,
            version=__version__,
        )
        logger.debug(f"Run started: {' '.join(command)} (seed={seed}, toy={toy})")
        try:
            yield self._manifest
        finally:
            self._manifest = None

    def _stamped(self) -> Optional[RunManifest]:
        if self._manifest is None:
            return None
        return self._manifest.model_copy(update={"completed_at": datetime.now()})

    # ------------------------------------------------------------------ #
    # Instances
    # ------------------------------------------------------------------ #

    def write_instance(
        self,
        path: Path,
        kind: ProblemKind,
        payload: BaseModel,
        artifacts: Optional[ReductionArtifacts] = None,
        toy: bool = False,
    ) -> Path:
        toy = any([toy, getattr(payload, "toy", False), artifacts and artifacts.toy, self._manifest and self._manifest.toy])
        record = InstanceFile(
            kind=kind,
            payload=payload.model_dump(mode="json"),
            toy=toy,
            artifacts=artifacts,
            manifest=self._stamped(),
        )
        return self.write_model(path, record)

    def read_instance(self, path: Path) -> InstanceFile:
        path = self._resolve(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise InputError(f"instance file not found: {path}", kind="schema-error") from e
        except json.JSONDecodeError as e:
            raise InputError(f"{path} is not valid JSON: {e}", kind="schema-error") from e
        try:
            return InstanceFile.model_validate(raw)
        except ValidationError as e:
            raise InputError(f"{path} does not match the instance schema: {e}", kind="schema-error") from e

    def load_payload(self, path: Path, expected: ProblemKind) -> BaseModel:
        """Read an instance file and validate its payload as `expected`"""
        record = self.read_instance(path)
        if record.kind != expected:
            raise InputError(
                f"expected a {expected.value} instance, found {record.kind.value}", kind="schema-error"
            )
        payload = dict(record.payload)
        if expected is ProblemKind.LATTICE:
            payload = _hydrate_lattice(payload)
        elif "lattice" in payload:
            payload["lattice"] = _hydrate_lattice(payload["lattice"])
        try:
            return PAYLOAD_TYPES[expected].model_validate(payload)
        except ValidationError as e:
            raise InputError(f"invalid {expected.value} payload: {e}", kind="schema-error") from e

    # ------------------------------------------------------------------ #
    # Generic records and tables
    # ------------------------------------------------------------------ #

    def write_model(self, path: Path, model: BaseModel) -> Path:
        path = self._resolve(path)
        text = json.dumps(model.model_dump(mode="json"), indent=2, sort_keys=True)
        with self._open_for_write(path) as fh:
            fh.write(text + "\n")
        logger.debug(f"Wrote {type(model).__name__} to {path}")
        return path

    def write_certificate(self, certificate: Certificate) -> Path:
        if certificate.manifest is None and self._manifest is not None:
            certificate = certificate.model_copy(update={"manifest": self._stamped()})
        stamp = certificate.created_at.strftime("%Y%m%dT%H%M%S")
        path = self.root / "certificates" / f"{certificate.name}-{stamp}.json"
        return self.write_model(path, certificate)

    def write_table(self, path: Path, frame: pd.DataFrame) -> Path:
        path = self._resolve(path)
        with self._open_for_write(path) as fh:
            frame.to_csv(fh, index=False)
        logger.info(f"Wrote {len(frame)} rows to {path}")
        return path

    def read_table(self, path: Path) -> pd.DataFrame:
        return pd.read_csv(self._resolve(path))

    def save_suite_stats(self, stats: SuiteStats) -> Path:
        """Append one row per suite run to the history table"""
        path = self.root / "suite_history.csv"
        row = pd.DataFrame([{
            "suite": stats.suite,
            "started_at": stats.started_at.isoformat(),
            "completed_at": stats.completed_at.isoformat() if stats.completed_at else "",
            "duration_seconds": round(stats.duration_seconds, 3),
            "checks_run": stats.checks_run,
            "checks_passed": stats.checks_passed,
            "failures": " | ".join(stats.failures),
        }])
        if path.exists():
            row = pd.concat([pd.read_csv(path), row], ignore_index=True)
        return self.write_table(path, row)


_store: Optional[ArtifactStore] = None


def get_artifact_store() -> ArtifactStore:
    """Get the default store rooted at the configured output directory"""
    global _store
    if _store is None:
        _store = ArtifactStore()
    return _store
