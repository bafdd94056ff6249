from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional

from common.errors import BadConfig

DEFAULT_N_MAX = 10**6
DEFAULT_GRID = [10**3, 10**4, 10**5, 10**6]
DEFAULT_PRECISION_BITS = 128
DEFAULT_Q_CAP = 10**18
DEFAULT_SEGMENT_SIZE = 1 << 20
DEFAULT_MEMORY_BUDGET = 1 << 32

COEFFICIENT_RULES = ("furstenberg", "constant", "custom-file")
FORMATS = ("csv", "json")
PRECISION_MODES = ("double", "extended")
KINDS = ("moebius", "liouville")


def parse_int(text: str) -> int:
    """Accepts 1000, 1_000, 1e3 and 10^3."""
    text = str(text).strip().replace("_", "")
    if "^" in text:
        base, exponent = text.split("^", 1)
        return int(base) ** int(exponent)
    try:
        return int(text)
    except ValueError:
        value = float(text)
        if not value.is_integer():
            raise BadConfig(f"expected an integer, got {text!r}")
        return int(value)


def parse_grid(text) -> List[int]:
    if isinstance(text, (list, tuple)):
        return [parse_int(v) for v in text]
    return [parse_int(part) for part in str(text).split(",") if part.strip()]


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise BadConfig(f"expected a boolean, got {text!r}")


def _optional(parser):
    def parse(text):
        if text is None or str(text).strip().lower() in ("", "none"):
            return None
        return parser(text)
    return parse


@dataclass
class ExperimentConfig:
    """Every knob of every subcommand; flat so that a manifest diff is one line per change."""
    n_max: int = DEFAULT_N_MAX
    N_grid: List[int] = field(default_factory=lambda: list(DEFAULT_GRID))
    precision_bits: int = DEFAULT_PRECISION_BITS
    q_cap: int = DEFAULT_Q_CAP
    C: float = 1.0
    coefficient_rule: str = "furstenberg"
    coeff_file: Optional[str] = None
    threads: int = 1
    # reserved: echoed in the manifest, no subcommand draws random numbers
    seed: int = 0
    cache_dir: str = ".msieve-cache"
    output_path: Optional[str] = None
    format: str = "csv"
    rebuild: bool = False
    segment_size: int = DEFAULT_SEGMENT_SIZE
    memory_budget: int = DEFAULT_MEMORY_BUDGET
    kind: str = "moebius"
    # alpha / cf
    golden: bool = False
    length: int = 20
    x: str = "pi"
    # orbit / cocycle
    steps: int = 1000
    mode: str = "double"
    a: int = 1
    c: int = 0
    d: int = 1
    x0: float = 0.0
    y0: float = 0.0
    n: int = 1000
    K: Optional[int] = None
    # davenport / phi
    theta: float = 0.0
    grid_count: Optional[int] = None
    c1: float = 1.0
    l_max: int = 50
    quad_nodes: int = 256
    # fit / verify
    input_path: Optional[str] = None
    manifest_path: Optional[str] = None

    def validate(self) -> "ExperimentConfig":
        if self.n_max < 1:
            raise BadConfig(f"n_max must be positive, got {self.n_max}")
        bad = [N for N in self.N_grid if N < 1 or N > self.n_max]
        if bad:
            raise BadConfig(f"grid points {bad} outside [1, {self.n_max}]")
        if sorted(set(self.N_grid)) != list(self.N_grid):
            raise BadConfig("grid must be strictly increasing")
        if self.precision_bits < 64:
            raise BadConfig(f"precision_bits must be >= 64, got {self.precision_bits}")
        if self.threads < 1:
            raise BadConfig(f"threads must be >= 1, got {self.threads}")
        if self.q_cap < 2:
            raise BadConfig("q_cap must be >= 2")
        if self.C < 1:
            raise BadConfig(f"coefficient bound C must be >= 1, got {self.C}")
        if self.coefficient_rule not in COEFFICIENT_RULES:
            raise BadConfig(f"coefficient_rule must be one of {COEFFICIENT_RULES}")
        if self.coefficient_rule == "custom-file" and not self.coeff_file:
            raise BadConfig("coefficient_rule custom-file needs coeff_file")
        if self.format not in FORMATS:
            raise BadConfig(f"format must be one of {FORMATS}")
        if self.mode not in PRECISION_MODES:
            raise BadConfig(f"mode must be one of {PRECISION_MODES}")
        if self.kind not in KINDS:
            raise BadConfig(f"kind must be one of {KINDS}")
        if self.segment_size < 1:
            raise BadConfig("segment_size must be positive")
        if self.a * self.d not in (1, -1):
            raise BadConfig("skew product needs a*d = +-1")
        if self.grid_count is not None and self.grid_count < 2:
            raise BadConfig("grid_count must be >= 2")
        if self.quad_nodes < 16:
            raise BadConfig("quad_nodes must be >= 16")
        return self

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_sources(cls, file_values: Dict[str, str] = None,
                     overrides: Dict[str, object] = None) -> "ExperimentConfig":
        """Defaults, then the config file, then command-line flags (flags win)."""
        merged: Dict[str, object] = {}
        for source in (file_values or {}, overrides or {}):
            for key, value in source.items():
                if value is not None:
                    merged[key.replace("-", "_")] = value

        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in merged.items():
            if key not in known:
                raise BadConfig(f"unknown config key {key!r}")
            try:
                kwargs[key] = _PARSERS[key](value) if isinstance(value, str) else value
            except ValueError as e:
                raise BadConfig(f"bad value for {key}: {e}")
        return cls(**kwargs).validate()


_PARSERS = {
    "n_max": parse_int, "N_grid": parse_grid, "precision_bits": parse_int,
    "q_cap": parse_int, "C": float, "coefficient_rule": str,
    "coeff_file": _optional(str), "threads": parse_int, "seed": parse_int,
    "cache_dir": str, "output_path": _optional(str), "format": str,
    "rebuild": parse_bool, "segment_size": parse_int, "memory_budget": parse_int,
    "kind": str, "golden": parse_bool, "length": parse_int, "x": str,
    "steps": parse_int, "mode": str, "a": parse_int, "c": parse_int,
    "d": parse_int, "x0": float, "y0": float, "n": parse_int,
    "K": _optional(parse_int), "theta": float, "grid_count": _optional(parse_int),
    "c1": float, "l_max": parse_int, "quad_nodes": parse_int,
    "input_path": _optional(str), "manifest_path": _optional(str),
}


def load_config_file(path) -> Dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    values: Dict[str, str] = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as e:
        raise BadConfig(f"cannot read config file {path}: {e}")
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadConfig(f"{path}:{number}: expected key = value")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values
