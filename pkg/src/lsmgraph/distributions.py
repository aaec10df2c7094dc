"""Distributions on the unit interval used as underlying laws.

A latent structure graph is specified by a support curve plus a
distribution G on [0,1]; latent positions are images of G-draws under the
arclength map. Anything with a ``sample(n, rng)`` method returning values
in [0,1] can serve as the underlying law; the two concrete families here
are the Beta(a, b) family and finitely supported (discrete/empirical)
distributions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

# Compact parameter box for (a, b); estimates are kept inside it.
THETA_MIN = 1e-3
THETA_MAX = 1e3


@dataclass(frozen=True)
class BetaParams:
    """Beta(a, b) parameters constrained to the box [1e-3, 1e3]^2."""

    a: float
    b: float

    def __post_init__(self) -> None:
        for name, value in (("a", self.a), ("b", self.b)):
            if not np.isfinite(value) or not (THETA_MIN <= value <= THETA_MAX):
                raise ValueError(
                    f"Beta parameter {name}={value!r} outside [{THETA_MIN}, {THETA_MAX}]"
                )

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b], dtype=float)

    def logpdf(self, y: np.ndarray) -> np.ndarray:
        """Elementwise log density; boundary points map to -inf/+inf as appropriate.

        Uses xlogy so the exponent-zero cases (a=1 or b=1) contribute exactly
        0 at the boundary instead of nan.
        """
        y = np.asarray(y, dtype=float)
        log_norm = (
            special.gammaln(self.a)
            + special.gammaln(self.b)
            - special.gammaln(self.a + self.b)
        )
        return special.xlogy(self.a - 1.0, y) + special.xlog1py(self.b - 1.0, -y) - log_norm

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.beta(self.a, self.b, size=n)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely supported distribution on [0,1].

    With uniform weights over observed values this is the empirical
    distribution of a sample; with arbitrary weights it expresses point
    masses (a K-point law on a curve reproduces a K-block blockmodel).
    """

    points: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float).ravel()
        if points.size == 0:
            raise ValueError("discrete distribution needs at least one point")
        if np.any(points < 0.0) or np.any(points > 1.0):
            raise ValueError("discrete support points must lie in [0,1]")
        if self.weights is None:
            weights = np.full(points.size, 1.0 / points.size)
        else:
            weights = np.asarray(self.weights, dtype=float).ravel()
        if weights.shape != points.shape:
            raise ValueError("weights must match points in length")
        if np.any(weights < 0) or not np.isclose(weights.sum(), 1.0, atol=1e-12):
            raise ValueError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def empirical(cls, values: np.ndarray) -> "DiscreteDistribution":
        values = np.asarray(values, dtype=float).ravel()
        return cls(values, np.full(values.size, 1.0 / values.size))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        idx = rng.choice(self.points.size, size=n, p=self.weights)
        return self.points[idx]
