"""
On-disk cache of sieved tables.

Layout of ``<kind>-<n_max>.msieve``::

    b"MSIEVE01"       8 bytes magic
    n_max             u64 little endian
    values[1..n_max]  one signed byte each
    kind tag          one byte, 0 moebius / 1 liouville

next to it ``<file>.sha256`` holds the hex digest of the whole file.
"""
import hashlib
import logging
import os
import struct
from pathlib import Path
from typing import Tuple

import numpy as np

from common.config import DEFAULT_MEMORY_BUDGET, DEFAULT_SEGMENT_SIZE
from common.errors import CacheCorrupt
from common.table import MobiusTable, TableKind
from engine.sieve import liouville_sieve, mobius_sieve

logger = logging.getLogger(__name__)

MAGIC = b"MSIEVE01"
HEADER = struct.Struct("<8sQ")


def cache_path(cache_dir, kind: TableKind, n_max: int) -> Path:
    return Path(cache_dir) / f"{kind.value}-{n_max}.msieve"


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def save_table(table: MobiusTable, cache_dir) -> Path:
    path = cache_path(cache_dir, table.kind, table.n_max)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as f:
        f.write(HEADER.pack(MAGIC, table.n_max))
        f.write(table.values[1:].tobytes())
        f.write(bytes([table.kind.tag]))
    os.replace(tmp, path)
    Path(f"{path}.sha256").write_text(sha256_file(path) + "\n")
    logger.info(f"Cached {table.kind.value} table to {path}")
    return path


def load_table(path) -> MobiusTable:
    path = Path(path)
    sidecar = Path(f"{path}.sha256")
    try:
        data = path.read_bytes()
        expected = sidecar.read_text().strip()
    except OSError as e:
        raise CacheCorrupt(f"cannot read {path}: {e}")

    if hashlib.sha256(data).hexdigest() != expected:
        raise CacheCorrupt(f"{path}: checksum mismatch")
    if len(data) < HEADER.size + 1:
        raise CacheCorrupt(f"{path}: truncated header")
    magic, n_max = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CacheCorrupt(f"{path}: bad magic {magic!r}")
    if len(data) != HEADER.size + n_max + 1:
        raise CacheCorrupt(f"{path}: expected {HEADER.size + n_max + 1} bytes, found {len(data)}")
    try:
        kind = TableKind.from_tag(data[-1])
    except ValueError as e:
        raise CacheCorrupt(f"{path}: {e}")

    values = np.zeros(n_max + 1, dtype=np.int8)
    values[1:] = np.frombuffer(data, dtype=np.int8, count=n_max, offset=HEADER.size)
    if np.any(np.abs(values.astype(np.int16)) > 1):
        raise CacheCorrupt(f"{path}: values outside {{-1, 0, 1}}")
    return MobiusTable(n_max=n_max, values=values, kind=kind)


def load_or_build(kind: TableKind, n_max: int, cache_dir, rebuild: bool = False,
                  segment_size: int = DEFAULT_SEGMENT_SIZE, threads: int = 1,
                  memory_budget: int = DEFAULT_MEMORY_BUDGET) -> Tuple[MobiusTable, bool]:
    """The cached table when present and intact; returns (table, cache_hit)."""
    path = cache_path(cache_dir, kind, n_max)
    if path.exists() and not rebuild:
        table = load_table(path)
        if table.kind is not kind:
            raise CacheCorrupt(f"{path}: holds a {table.kind.value} table")
        logger.info(f"Cache hit {path}")
        return table, True

    sieve = mobius_sieve if kind is TableKind.MOEBIUS else liouville_sieve
    table = sieve(n_max, segment_size=segment_size, threads=threads, memory_budget=memory_budget)
    save_table(table, cache_dir)
    return table, False
