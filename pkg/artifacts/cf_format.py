"""
``CF v1`` text format for partial quotients::

    CF v1 <count> <source>
    a_0
    a_1
    ...
"""
import logging
from pathlib import Path

from common.errors import BadConfig
from engine.confrac import CFSource, PartialQuotients

logger = logging.getLogger(__name__)

MAGIC = "CF v1"


def dumps(pq: PartialQuotients) -> str:
    lines = [f"{MAGIC} {len(pq)} {pq.source.value}"]
    lines.extend(str(a) for a in pq.a)
    return "\n".join(lines) + "\n"


def loads(text: str) -> PartialQuotients:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise BadConfig("empty CF file")
    header = lines[0].split()
    if len(header) != 4 or " ".join(header[:2]) != MAGIC:
        raise BadConfig(f"bad CF header {lines[0]!r}")
    try:
        count = int(header[2])
        source = CFSource(header[3])
        quotients = tuple(int(line) for line in lines[1:])
    except ValueError as e:
        raise BadConfig(f"malformed CF file: {e}")
    if len(quotients) != count:
        raise BadConfig(f"CF header announces {count} quotients, found {len(quotients)}")
    try:
        return PartialQuotients(quotients, source)
    except ValueError as e:
        raise BadConfig(f"invalid partial quotients: {e}")


def write(pq: PartialQuotients, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(pq))
    logger.info(f"Wrote {len(pq)} partial quotients to {path}")
    return path


def read(path) -> PartialQuotients:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise BadConfig(f"cannot read {path}: {e}")
    return loads(text)
