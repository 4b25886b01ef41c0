"""Uniform one-dimensional grids and small quadrature helpers."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import NDArray


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError("a grid needs at least 3 points")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @cached_property
    def x(self) -> NDArray:
        return np.linspace(self.x_min, self.x_max, self.n)

    def trapezoid(self, f: NDArray) -> float:
        return float(np.trapezoid(f, dx=self.h))


def cumulative_trapezoid(f: NDArray, h: float, initial: float = 0.0) -> NDArray:
    """Running trapezoid integral from the left end, starting at `initial`."""
    out = np.empty_like(f)
    out[0] = 0.0
    np.cumsum(0.5 * h * (f[1:] + f[:-1]), out=out[1:])
    return out + initial


def central_diff(f: NDArray, h: float) -> NDArray:
    """Second-order first derivative with one-sided second-order end rows."""
    d = np.empty_like(f)
    d[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    d[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return d


def second_diff(f: NDArray, h: float) -> NDArray:
    """Three-point second derivative; end rows copy their neighbours."""
    d = np.empty_like(f)
    d[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)
    d[0] = d[1]
    d[-1] = d[-2]
    return d


def fitted_order(resolutions, errors) -> float:
    """Least-squares slope of log(error) against log(1/resolution)."""
    r = np.log(np.asarray(resolutions, dtype=float))
    e = np.log(np.asarray(errors, dtype=float))
    if r.size < 2:
        raise ValueError("need at least two points to fit an order")
    slope = np.polyfit(r, e, 1)[0]
    return float(-slope)
