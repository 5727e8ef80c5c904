"""Reputation-dependent exponentiation weights.

A worker of quality class ``q`` asked in round ``t`` of a HIT gets weight
``lambda_q * gamma_q ** (t - 1)``. With ``cadence = m`` the exponent moves in
steps of ``m`` instead: ``m * floor((t - 1) / m)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import QualityClass

# (good, average, bad) ordering matches how the presets are usually written.
_ORDER = (QualityClass.GOOD, QualityClass.AVERAGE, QualityClass.BAD)


@dataclass(frozen=True)
class WeightScheme:
    """Initial weights and multipliers per quality class.

    ``lam`` and ``gamma`` are (good, average, bad) triples.
    """

    lam: tuple[float, float, float] = (1.0, 1.0, 1.0)
    gamma: tuple[float, float, float] = (1.0, 1.0, 1.0)
    cadence: int = 1
    name: str = "custom"

    def __post_init__(self):
        lam = tuple(float(x) for x in self.lam)
        gamma = tuple(float(x) for x in self.gamma)
        if len(lam) != 3 or len(gamma) != 3:
            raise ValueError("lam and gamma need one value per class (good, average, bad)")
        if min(lam) <= 0 or min(gamma) <= 0:
            raise ValueError(f"weights must be positive: lam={lam}, gamma={gamma}")
        if int(self.cadence) != self.cadence or self.cadence < 1:
            raise ValueError(f"cadence must be a positive integer, got {self.cadence}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "cadence", int(self.cadence))

    def lambda_of(self, cls: QualityClass) -> float:
        return self.lam[_ORDER.index(cls)]

    def gamma_of(self, cls: QualityClass) -> float:
        return self.gamma[_ORDER.index(cls)]

    @property
    def time_invariant(self) -> bool:
        return all(g == 1.0 for g in self.gamma)

    def table(self, max_rounds: int) -> np.ndarray:
        """Weights indexed by ``[QualityClass, t - 1]`` for ``t = 1..max_rounds``.

        Entries are computed with :func:`weight_for` so vectorised callers see
        exactly the same floats as the scalar path.
        """
        out = np.empty((len(QualityClass), max_rounds))
        for cls in QualityClass:
            for t in range(1, max_rounds + 1):
                out[cls, t - 1] = weight_for(self, cls, t)
        return out


def weight_for(scheme: WeightScheme, cls: QualityClass, t: int) -> float:
    if t < 1:
        raise ValueError(f"round must be >= 1, got {t}")
    m = scheme.cadence
    exponent = m * ((t - 1) // m)
    return scheme.lambda_of(cls) * scheme.gamma_of(cls) ** exponent


PRESETS = {
    "V1": WeightScheme((1, 1, 1), (1, 1, 1), name="V1"),
    "V2": WeightScheme((1.2, 1, 0.8), (1, 1, 1), name="V2"),
    "V3": WeightScheme((1, 1, 1), (1.05, 1, 0.95), name="V3"),
    "V4": WeightScheme((1, 1, 1), (1.1, 1, 0.9), name="V4"),
    "V5": WeightScheme((1, 1, 1), (1.1, 1, 1), name="V5"),
    "V6": WeightScheme((1, 1, 1), (1, 1, 0.9), name="V6"),
}


def preset(name: str) -> WeightScheme:
    try:
        return PRESETS[name.strip().upper()]
    except KeyError:
        raise ValueError(f"unknown weight preset {name!r}; choose from {sorted(PRESETS)}") from None


def scaled(base: str, step: float, cadence: int = 1) -> WeightScheme:
    """Variant of V4/V5/V6 whose multipliers move weights by ``step`` per update.

    ``scaled("V4", 0.3)`` gives gamma = (1.3, 1, 0.7).
    """
    up, down = 1.0 + step, 1.0 - step
    gammas = {"V4": (up, 1.0, down), "V5": (up, 1.0, 1.0), "V6": (1.0, 1.0, down)}
    if base not in gammas:
        raise ValueError(f"scaled variants exist for V4, V5, V6, not {base!r}")
    return WeightScheme((1, 1, 1), gammas[base], cadence, name=f"{base}@{step:g}/{cadence}")
