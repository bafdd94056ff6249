from dataclasses import dataclass, field
from enum import Enum
from typing import List, Tuple

import numpy as np


class TableKind(Enum):
    MOEBIUS = "moebius"
    LIOUVILLE = "liouville"

    @property
    def tag(self) -> int:
        # single byte stored at the end of the cache file
        return 0 if self is TableKind.MOEBIUS else 1

    @classmethod
    def from_tag(cls, tag: int) -> "TableKind":
        for kind in cls:
            if kind.tag == tag:
                return kind
        raise ValueError(f"unknown table kind tag {tag}")


@dataclass(frozen=True)
class MobiusTable:
    """
    Sieved values of mu (or lambda) on [1, n_max].

    ``values`` has length n_max + 1 so that ``values[n]`` is the value at n;
    ``values[0]`` is an unused 0.
    """
    n_max: int
    values: np.ndarray
    kind: TableKind = TableKind.MOEBIUS

    def __post_init__(self):
        if self.values.dtype != np.int8 or self.values.shape != (self.n_max + 1,):
            raise ValueError(f"values must be int8 of length {self.n_max + 1}")
        # completed tables are shared between threads
        self.values.setflags(write=False)

    def __getitem__(self, n):
        return self.values[n]

    def window(self, N: int) -> np.ndarray:
        """Values at n = 1..N as a read-only view."""
        if N > self.n_max:
            raise ValueError(f"N={N} exceeds table n_max={self.n_max}")
        return self.values[1:N + 1]


@dataclass
class MertensSeries:
    checkpoints: List[Tuple[int, int]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {N: M for N, M in self.checkpoints}

    def __getitem__(self, N: int) -> int:
        for n, m in self.checkpoints:
            if n == N:
                return m
        raise KeyError(N)
