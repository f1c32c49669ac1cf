"""
Streaming moment accumulators

Central-moment sums up to order four with the pairwise merge of Pebay
(2008). Merging block accumulators in block order gives a result that does
not depend on how blocks were scheduled.
"""
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StreamingMoments:
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0

    @classmethod
    def from_values(cls, values: np.ndarray) -> "StreamingMoments":
        values = np.asarray(values, dtype=np.float64).ravel()
        n = values.size
        if n == 0:
            return cls()
        mean = float(values.mean())
        dev = values - mean
        dev2 = dev * dev
        return cls(
            count=n,
            mean=mean,
            m2=float(dev2.sum()),
            m3=float((dev2 * dev).sum()),
            m4=float((dev2 * dev2).sum()),
        )

    def merge(self, other: "StreamingMoments") -> "StreamingMoments":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        na, nb = float(self.count), float(other.count)
        n = na + nb
        delta = other.mean - self.mean
        delta2 = delta * delta
        mean = self.mean + delta * nb / n
        m2 = self.m2 + other.m2 + delta2 * na * nb / n
        m3 = (
            self.m3 + other.m3
            + delta2 * delta * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n
        )
        m4 = (
            self.m4 + other.m4
            + delta2 * delta2 * na * nb * (na * na - na * nb + nb * nb) / (n ** 3)
            + 6.0 * delta2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n
        )
        return StreamingMoments(self.count + other.count, mean, m2, m3, m4)

    @property
    def variance(self) -> float:
        """Unbiased sample variance"""
        if self.count < 2:
            return math.nan
        return self.m2 / (self.count - 1)

    @property
    def se_mean(self) -> float:
        if self.count < 2:
            return math.nan
        return math.sqrt(self.variance / self.count)

    @property
    def se_variance(self) -> float:
        """Plug-in standard error of the sample variance from the fourth central moment"""
        n = self.count
        if n < 4:
            return math.nan
        mu4 = self.m4 / n
        s2 = self.variance
        var_of_var = (mu4 - (n - 3) / (n - 1) * s2 * s2) / n
        return math.sqrt(max(var_of_var, 0.0))
