"""Closed library of analytic profile families with exact derivatives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray


class Profile:
    """A smooth scalar function of one variable with analytic derivatives."""

    def __call__(self, x: ArrayLike) -> NDArray:
        return self.derivative(x, 0)

    def derivative(self, x: ArrayLike, order: int = 1) -> NDArray:
        raise NotImplementedError

    def support(self) -> tuple[float, float]:
        """Interval outside which the first derivative is negligible (< 1e-30)."""
        raise NotImplementedError


@dataclass(frozen=True)
class GaussianBump(Profile):
    amplitude: float = 1.0
    center: float = 0.0
    width: float = 1.0

    def derivative(self, x: ArrayLike, order: int = 1) -> NDArray:
        s = (np.asarray(x, dtype=float) - self.center) / self.width
        g = self.amplitude * np.exp(-s * s)
        # d^n/ds^n exp(-s^2) = (-1)^n H_n(s) exp(-s^2), physicists' Hermite
        if order == 0:
            poly = 1.0
        elif order == 1:
            poly = -2.0 * s
        elif order == 2:
            poly = 4.0 * s * s - 2.0
        elif order == 3:
            poly = -(8.0 * s**3 - 12.0 * s)
        elif order == 4:
            poly = 16.0 * s**4 - 48.0 * s * s + 12.0
        else:
            raise ValueError("derivatives up to order 4 are available")
        return poly * g / self.width**order

    def support(self) -> tuple[float, float]:
        half = 9.0 * self.width
        return self.center - half, self.center + half


@dataclass(frozen=True)
class SmoothedBox(Profile):
    """amplitude * (tanh((x-left)/edge) - tanh((x-right)/edge)) / 2."""

    amplitude: float = 1.0
    left: float = -1.0
    right: float = 1.0
    edge: float = 0.2

    def __post_init__(self) -> None:
        if self.right <= self.left or self.edge <= 0.0:
            raise ValueError("smoothed-box needs left < right and edge > 0")

    @staticmethod
    def _tanh_derivative(z: NDArray, order: int) -> NDArray:
        t = np.tanh(z)
        sech2 = 1.0 - t * t
        if order == 0:
            return t
        if order == 1:
            return sech2
        if order == 2:
            return -2.0 * t * sech2
        if order == 3:
            return sech2 * (6.0 * t * t - 2.0)
        if order == 4:
            return sech2 * t * (16.0 - 24.0 * t * t)
        raise ValueError("derivatives up to order 4 are available")

    def derivative(self, x: ArrayLike, order: int = 1) -> NDArray:
        x = np.asarray(x, dtype=float)
        zl = (x - self.left) / self.edge
        zr = (x - self.right) / self.edge
        d = self._tanh_derivative(zl, order) - self._tanh_derivative(zr, order)
        return 0.5 * self.amplitude * d / self.edge**order

    def support(self) -> tuple[float, float]:
        pad = 36.0 * self.edge
        return self.left - pad, self.right + pad


@dataclass(frozen=True)
class Sine(Profile):
    amplitude: float = 1.0
    wavenumber: float = 1.0
    phase: float = 0.0

    def derivative(self, x: ArrayLike, order: int = 1) -> NDArray:
        arg = self.wavenumber * np.asarray(x, dtype=float) + self.phase
        return self.amplitude * self.wavenumber**order * np.sin(arg + 0.5 * np.pi * order)

    def support(self) -> tuple[float, float]:
        return -np.inf, np.inf


class FunctionProfile(Profile):
    """Wrap user callables for the value and its derivatives."""

    def __init__(self, derivatives: list[Callable[[NDArray], NDArray]], support: tuple[float, float]):
        self._derivs = list(derivatives)
        self._support = support

    def derivative(self, x: ArrayLike, order: int = 1) -> NDArray:
        if order >= len(self._derivs):
            raise ValueError(f"derivative of order {order} not supplied")
        return np.asarray(self._derivs[order](np.asarray(x, dtype=float)), dtype=float)

    def support(self) -> tuple[float, float]:
        return self._support


class ReflectedScaled(Profile):
    """x -> scale * base(-x), used to map a right-moving inner problem."""

    def __init__(self, base: Profile, scale: float = 1.0, reflect: bool = True):
        self.base = base
        self.scale = scale
        self.reflect = reflect

    def derivative(self, x: ArrayLike, order: int = 1) -> NDArray:
        x = np.asarray(x, dtype=float)
        if self.reflect:
            return self.scale * (-1.0) ** order * self.base.derivative(-x, order)
        return self.scale * self.base.derivative(x, order)

    def support(self) -> tuple[float, float]:
        lo, hi = self.base.support()
        return (-hi, -lo) if self.reflect else (lo, hi)


PROFILE_FAMILIES = {
    "gaussian-bump": GaussianBump,
    "smoothed-box": SmoothedBox,
    "sine": Sine,
}


def make_profile(spec: dict) -> Profile:
    """Build a profile from {"family": name, **parameters}."""
    spec = dict(spec)
    family = spec.pop("family", None)
    if family not in PROFILE_FAMILIES:
        raise ValueError(f"unknown profile family {family!r}; choose from {sorted(PROFILE_FAMILIES)}")
    return PROFILE_FAMILIES[family](**spec)
