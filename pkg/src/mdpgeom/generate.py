"""Seeded random model generation with a portable, documented PRNG.

The generator is SplitMix64 (public constants 0x9E3779B97F4A7C15,
0xBF58476D1CE4E5B9, 0x94D049BB133111EB), chosen so that any implementation
in any language can reproduce the exact instance stream from the 64-bit
seed. Uniform doubles take the top 53 bits of each output word.

Draw order per SAP, fixed for reproducibility: n weight uniforms, then
(only if sparsity > 0) n sparsity uniforms, then one reward uniform. SAPs
are generated state by state, slot by slot. A row zeroed out entirely by
sparsity is repaired by forcing the self-loop weight to 1; repaired rows
are listed in the generation result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import MdpModel, Sap

PRNG_NAME = "splitmix64"

_MASK = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 PRNG; 64-bit state, full-period output mix."""

    def __init__(self, seed: int):
        self._state = int(seed) & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return (z ^ (z >> 31)) & _MASK

    def uniform(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (2.0**-53)

    def uniforms(self, k: int) -> np.ndarray:
        return np.array([self.uniform() for _ in range(k)], dtype=np.float64)


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of a random instance: sizes, gamma, reward range, sparsity, seed."""

    n: int
    saps_per_state: int
    gamma: float
    reward_range: tuple = (0.0, 1.0)
    sparsity: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.saps_per_state < 1:
            raise ValueError("saps_per_state must be positive")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")
        lo, hi = self.reward_range
        if not lo <= hi:
            raise ValueError("reward_range must be ordered")
        if not 0.0 <= self.sparsity <= 1.0:
            raise ValueError("sparsity must be in [0, 1]")
        object.__setattr__(self, "reward_range", (float(lo), float(hi)))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "saps_per_state": self.saps_per_state,
            "gamma": self.gamma,
            "reward_range": list(self.reward_range),
            "sparsity": self.sparsity,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        return cls(
            n=int(d["n"]),
            saps_per_state=int(d["saps_per_state"]),
            gamma=float(d["gamma"]),
            reward_range=tuple(d.get("reward_range", (0.0, 1.0))),
            sparsity=float(d.get("sparsity", 0.0)),
            seed=int(d.get("seed", 0)),
        )


@dataclass
class GenerationResult:
    model: MdpModel
    spec: GeneratorSpec
    prng: str = PRNG_NAME
    repaired_rows: list = field(default_factory=list)


def generate_model(spec: GeneratorSpec) -> GenerationResult:
    """Deterministically generate a model from ``spec``.

    Each transition row samples independent uniform weights, zeroes entries
    per the sparsity probability, repairs all-zero rows by forcing a
    positive self-loop weight, then normalizes. Rewards are uniform in the
    reward range.
    """
    rng = SplitMix64(spec.seed)
    lo, hi = spec.reward_range
    saps = []
    repaired = []
    for state in range(spec.n):
        for slot in range(spec.saps_per_state):
            weights = rng.uniforms(spec.n)
            if spec.sparsity > 0.0:
                keep = rng.uniforms(spec.n) >= spec.sparsity
                weights = np.where(keep, weights, 0.0)
            if not np.any(weights > 0.0):
                weights[state] = 1.0
                repaired.append((state, slot))
            probs = weights / weights.sum()
            reward = lo + rng.uniform() * (hi - lo)
            saps.append(Sap(state=state, reward=reward, probs=probs))
    model = MdpModel(n=spec.n, saps=tuple(saps), gamma=spec.gamma)
    return GenerationResult(model=model, spec=spec, repaired_rows=repaired)


def uniform_vector(rng: SplitMix64, n: int, lo: float = -1.0, hi: float = 1.0) -> np.ndarray:
    """n uniforms in [lo, hi) from ``rng``; used for random VI start vectors."""
    return lo + rng.uniforms(n) * (hi - lo)
