"""Power-law fits on log-log axes."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import linregress

from .errors import FitUnstable


@dataclass(frozen=True)
class DecayFit:
    """Least-squares line through (log x, log y); the slope is the power-law exponent."""

    slope: float
    intercept: float
    r_squared: float
    n_points: int

    @classmethod
    def fit(cls, x, y) -> "DecayFit":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("x and y must be matching 1-d arrays")
        if x.size < 3:
            raise FitUnstable(f"need at least 3 points for a fit, got {x.size}")
        if np.any(x <= 0) or np.any(y <= 0):
            raise FitUnstable("log-log fit needs positive data")
        res = linregress(np.log(x), np.log(y))
        return cls(float(res.slope), float(res.intercept), float(res.rvalue**2), int(x.size))

    @classmethod
    def dyadic(cls, j, y) -> "DecayFit":
        """Exponent of y ~ 2^{j * slope}."""
        return cls.fit(2.0 ** np.asarray(j, dtype=float), y)

    def to_dict(self) -> dict:
        return asdict(self)
