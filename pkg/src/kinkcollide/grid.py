"""Uniform-grid sampled fields."""

from dataclasses import dataclass
import warnings

import numpy as np


class BoundaryPollutionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class GridField:
    """Real samples on a uniform grid, optionally with paired time derivative."""

    x: np.ndarray
    values: np.ndarray
    dt_values: np.ndarray | None = None

    @property
    def h(self):
        return float(self.x[1] - self.x[0])

    def __len__(self):
        return len(self.x)

    def inner(self, other):
        other = other.values if isinstance(other, GridField) else other
        return float(self.h * np.dot(self.values, other))

    def l2(self):
        return float(np.sqrt(self.h * np.dot(self.values, self.values)))

    def sup(self):
        return float(np.max(np.abs(self.values)))

    def is_padded(self, rel=1e-8):
        scale = max(self.sup(), 1e-300)
        return max(abs(self.values[0]), abs(self.values[-1])) <= rel * scale

    def check_padded(self, rel=1e-8, what="field"):
        if not self.is_padded(rel):
            warnings.warn(f"{what} does not decay at the grid ends", BoundaryPollutionWarning, stacklevel=3)


def uniform_grid(x_min, x_max, n):
    return np.linspace(float(x_min), float(x_max), int(n))
