import json
import logging
import platform
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List

from artifacts.cache import sha256_file
from common.errors import CacheCorrupt

logger = logging.getLogger(__name__)

TOOL_VERSION = "0.1.0"


@dataclass
class RunManifest:
    """What ran, with which settings, and the checksum of every file it wrote."""
    config: Dict[str, object]
    tool_version: str = TOOL_VERSION
    stages: Dict[str, float] = field(default_factory=dict)
    cache_hits: List[str] = field(default_factory=list)
    precision_report: Dict[str, object] = field(default_factory=dict)
    files: Dict[str, str] = field(default_factory=dict)
    python: str = field(default_factory=platform.python_version)

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.stages[name] = self.stages.get(name, 0.0) + time.perf_counter() - start

    def add_file(self, path) -> None:
        self.files[str(path)] = sha256_file(path)

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True, default=str) + "\n")
        logger.info(f"Manifest written to {path}")
        return path

    @classmethod
    def read(cls, path) -> "RunManifest":
        try:
            payload = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise CacheCorrupt(f"cannot read manifest {path}: {e}")
        return cls(**payload)


def verify_manifest(path) -> Dict[str, bool]:
    """Recompute every listed checksum; CacheCorrupt names the files that no longer match."""
    manifest = RunManifest.read(path)
    results = {}
    for name, expected in sorted(manifest.files.items()):
        try:
            results[name] = sha256_file(name) == expected
        except OSError:
            results[name] = False
    bad = [name for name, ok in results.items() if not ok]
    if bad:
        raise CacheCorrupt(f"checksum mismatch for {bad}")
    logger.info(f"Verified {len(results)} files from {path}")
    return results
