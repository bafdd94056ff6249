from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple


@dataclass
class CorrelationSeries:
    """Sampled (N, S(N)) pairs plus a free-form description of the observable."""
    entries: List[Tuple[int, complex]] = field(default_factory=list)
    meta: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        previous = 0
        for N, value in self.entries:
            if N <= previous:
                raise ValueError("N must be strictly increasing")
            if abs(value) > N * (1 + 1e-12):
                raise ValueError(f"|S({N})| = {abs(value)} exceeds N")
            previous = N

    def append(self, N: int, value: complex) -> None:
        if self.entries and N <= self.entries[-1][0]:
            raise ValueError("N must be strictly increasing")
        self.entries.append((N, complex(value)))

    def normalized(self) -> List[float]:
        return [abs(value) / N for N, value in self.entries]


@dataclass
class DecayFit:
    A_hat: float
    scale: float
    residual_rms: float
    N_range: Tuple[int, int]
    model: str = "log(N/|S|) = A*loglog(N) - log(scale)"
    dropped: List[int] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "a_hat": self.A_hat,
            "scale": self.scale,
            "residual_rms": self.residual_rms,
            "n_min": self.N_range[0],
            "n_max": self.N_range[1],
            "model": self.model,
            "dropped": list(self.dropped),
        }


@dataclass
class PhiCoefficient:
    l: int
    c1: float
    value: complex
    quad_error: float
    oracle: Optional[complex] = None

    @property
    def oracle_abs_err(self) -> Optional[float]:
        if self.oracle is None:
            return None
        return abs(self.value - self.oracle)


@dataclass
class IrregularityReport:
    """Birkhoff averages of one character along one orbit, per grid point."""
    observable: Tuple[int, int]
    averages: List[Tuple[int, complex]]
    min_abs: float
    max_abs: float
    oscillation: float
    generic: bool = True
