"""Node, level and MRS similarity scores over a list of matched pairs."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .jcn import NodeAttrs


@dataclass(frozen=True)
class Weights:
    volume: float = 0.25
    range: float = 0.25
    b0: float = 0.25
    degree: float = 0.25

    def __post_init__(self):
        w = self.as_tuple()
        if any(not 0.0 <= x <= 1.0 for x in w):
            raise ValueError(f"weights must lie in [0, 1], got {w}")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {w}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.volume, self.range, self.b0, self.degree)


PRESETS = {
    "equal": Weights(),
    "volume": Weights(1.0, 0.0, 0.0, 0.0),
    "range": Weights(0.0, 1.0, 0.0, 0.0),
    "b0": Weights(0.0, 0.0, 1.0, 0.0),
    "degree": Weights(0.0, 0.0, 0.0, 1.0),
}


def parse_weights(text: str) -> Weights:
    """A preset name or four comma-separated reals."""
    if text in PRESETS:
        return PRESETS[text]
    parts = text.split(",")
    if len(parts) != 4:
        raise ValueError(f"weights must be a preset {sorted(PRESETS)} or w1,w2,w3,w4; got {text!r}")
    return Weights(*(float(p) for p in parts))


def ratio(r1: float, r2: float) -> float:
    """min/max of two non-negative numbers; two zeros count as identical."""
    if r1 < 0 or r2 < 0:
        raise ValueError(f"ratio needs non-negative inputs, got {r1}, {r2}")
    hi = max(r1, r2)
    if hi == 0:
        return 1.0
    return min(r1, r2) / hi


def node_similarity(m: NodeAttrs, n: NodeAttrs, w: Weights = Weights()) -> float:
    return (
        w.volume * ratio(m.volume, n.volume)
        + w.range * ratio(m.range_measure, n.range_measure)
        + w.b0 * ratio(m.component_count, n.component_count)
        + w.degree * ratio(m.degree, n.degree)
    )


def level_similarity(pairs) -> float:
    """Volume-weighted sum of pair similarities at one level.

    ``pairs`` yields ``(attrs_m, attrs_n, phi)``; an empty level scores 0.
    """
    return math.fsum((m.volume + n.volume) / 2.0 * phi for m, n, phi in pairs)


def mrs_similarity(level_scores) -> float:
    scores = list(level_scores)
    if not scores:
        raise ValueError("need at least one level")
    return math.fsum(scores) / len(scores)


@dataclass
class SimilarityReport:
    weights: Weights
    level_scores: list[float]
    pair_counts: list[int]
    phi_bar: float
    pairs: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "weights": list(self.weights.as_tuple()),
            "levels": [
                {"k": k, "phi_level": s, "pairs": c}
                for k, (s, c) in enumerate(zip(self.level_scores, self.pair_counts))
            ],
            "phi_bar": self.phi_bar,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def csv_rows(self) -> list[str]:
        rows = ["k,phi_level,pairs"]
        rows += [f"{k},{s:.9f},{c}" for k, (s, c) in enumerate(zip(self.level_scores, self.pair_counts))]
        return rows
