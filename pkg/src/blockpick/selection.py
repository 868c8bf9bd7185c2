"""Selector output and helpers shared by the three block-length selectors."""
from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class BlockSelection:
    method: str
    block_length: int
    n: int
    unrounded: float
    degenerate: bool = False
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "block_length": self.block_length,
            "n": self.n,
            "unrounded": self.unrounded,
            "degenerate": self.degenerate,
            "diagnostics": self.diagnostics,
        }


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def finalize_block(x: float, n: int) -> int:
    """Round half up and clamp to ``[1, floor(n/3)]``."""
    return min(max(round_half_up(x), 1), max(n // 3, 1))


def plug_in_block(B0: float, V0: float, n: int) -> float:
    """``(2 B0^2 / V0)^(1/3) n^(1/3)``, unrounded."""
    return (2.0 * B0 * B0 / V0) ** (1.0 / 3.0) * n ** (1.0 / 3.0)
