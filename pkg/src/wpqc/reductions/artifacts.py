"""Common output record for reduction steps."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True, eq=False)
class ReductionArtifact:
    """Produced instance of one reduction step.

    ``thresholds`` is ``(c, s)`` for circuit outputs (accept at least c on
    yes-instances, at most s on no-instances) and ``(a, b)`` for Hamiltonian
    outputs (energy at most a on yes-instances, at least b on no-instances).
    """

    step: str
    instance: object
    k_in: int
    k_out: int
    thresholds: tuple[float, float]
    threshold_kind: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.threshold_kind not in ("cs", "ab"):
            raise ValueError(f"threshold kind must be 'cs' or 'ab', got {self.threshold_kind!r}")
        lo, hi = self.thresholds
        gap = lo - hi if self.threshold_kind == "cs" else hi - lo
        if not gap > 0:
            raise ValueError(f"{self.step}: thresholds {self.thresholds} have no positive gap")

    @property
    def gap(self) -> float:
        lo, hi = self.thresholds
        return lo - hi if self.threshold_kind == "cs" else hi - lo

    @property
    def parameter_map(self) -> str:
        return f"k={self.k_in} -> k'={self.k_out}"
