"""
Potential representations, grids and quadrature shared by the rest of the package.

Units: hbar = 1 and the mass is scaled so that H = -d^2/dx^2 + V(x).
Free particles therefore have E = k^2 and group velocity 2k.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

MIN_SAMPLES_PER_PERIOD = 64


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class TrigSeries:
    """
    Fourier series of a periodic (or antiperiodic) function of period ``period``.

    The function is sum_n c_n exp(i w_n x) with w_n = 2 pi (n + shift) / period,
    n = -M..M for ``shift = 0`` and n = -M..M-1 for ``shift = 1/2``.  A half
    shift makes the function antiperiodic, f(x + a) = -f(x).
    """

    period: float
    coeffs: np.ndarray
    antiperiodic: bool = False
    real: bool = True

    @property
    def harmonics(self) -> np.ndarray:
        m = len(self.coeffs)
        if self.antiperiodic:
            return np.arange(m) - m // 2 + 0.5
        return np.arange(m) - (m - 1) // 2

    @property
    def frequencies(self) -> np.ndarray:
        return 2.0 * np.pi * self.harmonics / self.period

    @classmethod
    def from_samples(cls, values, period: float, antiperiodic: bool = False) -> "TrigSeries":
        """Trigonometric interpolant of samples at x_j = j * period / N."""
        values = np.asarray(values)
        n = len(values)
        real = not np.iscomplexobj(values)
        x = np.arange(n) * period / n
        if antiperiodic:
            g = values * np.exp(-1j * np.pi * x / period)
            c = np.fft.fftshift(np.fft.fft(g) / n)
            # fftshift puts harmonic -n/2 first; the half shift makes the set symmetric
            if n % 2:
                raise LatticeError("antiperiodic interpolation needs an even sample count")
            return cls(period, c, antiperiodic=True, real=real)
        c = np.fft.fft(values) / n
        if n % 2 == 0:
            # split the Nyquist term between +-n/2 so real data stays real
            half = n // 2
            full = np.empty(n + 1, dtype=complex)
            full[1:n] = np.fft.fftshift(c)[1:]
            full[0] = full[n] = 0.5 * c[half]
            return cls(period, full, real=real)
        return cls(period, np.fft.fftshift(c), real=real)

    @classmethod
    def constant(cls, value: float, period: float) -> "TrigSeries":
        return cls(period, np.array([value], dtype=complex))

    def __call__(self, x, derivative: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        shape = x.shape
        x = x.ravel()
        cells = np.floor(x / self.period)
        t = x - cells * self.period
        w = self.frequencies
        c = self.coeffs * (1j * w) ** derivative
        out = np.empty(x.shape, dtype=complex)
        chunk = max(1, 2**21 // max(len(c), 1))
        for start in range(0, len(t), chunk):
            sl = slice(start, start + chunk)
            out[sl] = np.exp(1j * np.outer(t[sl], w)) @ c
        if self.antiperiodic:
            out *= np.where(cells % 2 == 0, 1.0, -1.0)
        if self.real:
            out = out.real
        return out.reshape(shape)

    def scaled(self, factor: complex) -> "TrigSeries":
        return TrigSeries(self.period, self.coeffs * factor, self.antiperiodic, self.real)

    def harmonic(self, n: int) -> complex:
        """Coefficient of exp(2 pi i n x / a) for a periodic series (0 if absent)."""
        if self.antiperiodic:
            raise LatticeError("integer harmonics are undefined for an antiperiodic series")
        m = (len(self.coeffs) - 1) // 2
        if abs(n) > m:
            return 0.0
        return self.coeffs[n + m]

    @property
    def max_harmonic(self) -> int:
        return (len(self.coeffs) - 1) // 2


def square_series(f: TrigSeries, n_samples: Optional[int] = None) -> TrigSeries:
    """Periodic series of f(x)^2 (periodic even when f is antiperiodic)."""
    if n_samples is None:
        n_samples = max(MIN_SAMPLES_PER_PERIOD, 4 * len(f.coeffs))
    n_samples += n_samples % 2
    x = np.arange(n_samples) * f.period / n_samples
    return TrigSeries.from_samples(f(x) ** 2, f.period)


@dataclass(frozen=True)
class PeriodicPotential:
    """
    Real potential of period ``period``.

    Either analytic Mathieu form ``amplitude * cos(2 pi x / a) - offset`` or a
    trigonometric interpolant of uniform samples over one period.
    """

    period: float
    series: TrigSeries
    amplitude: Optional[float] = None
    offset: Optional[float] = None

    @property
    def is_mathieu(self) -> bool:
        return self.amplitude is not None

    def __call__(self, x, derivative: int = 0):
        if self.is_mathieu:
            q = 2.0 * np.pi / self.period
            x = np.asarray(x, dtype=float)
            if derivative == 0:
                return self.amplitude * np.cos(q * x) - self.offset
            # d^n/dx^n cos(qx) = q^n cos(qx + n pi / 2)
            return self.amplitude * q**derivative * np.cos(q * x + derivative * np.pi / 2)
        return self.series(x, derivative)

    eval = __call__

    def harmonic(self, n: int) -> complex:
        return self.series.harmonic(n)

    @property
    def max_harmonic(self) -> int:
        return self.series.max_harmonic

    def __add__(self, other: "PeriodicPotential") -> "PeriodicPotential":
        _check_same_period(self, other)
        n = 2 * max(len(self.series.coeffs), len(other.series.coeffs), MIN_SAMPLES_PER_PERIOD // 2)
        x = np.arange(n) * self.period / n
        return sampled_potential(self(x) + other(x), self.period)


def make_mathieu(V0: float, a: float, E0: float) -> PeriodicPotential:
    """V(x) = V0 cos(2 pi x / a) - E0."""
    if not a > 0:
        raise LatticeError(f"period must be positive, got {a}")
    coeffs = np.array([V0 / 2.0, -E0, V0 / 2.0], dtype=complex)
    return PeriodicPotential(float(a), TrigSeries(float(a), coeffs), float(V0), float(E0))


def constant_potential(c: float, a: float) -> PeriodicPotential:
    return make_mathieu(0.0, a, -c)


def sampled_potential(values, a: float) -> PeriodicPotential:
    values = np.asarray(values, dtype=float)
    if not a > 0:
        raise LatticeError(f"period must be positive, got {a}")
    if len(values) < MIN_SAMPLES_PER_PERIOD:
        raise LatticeError(
            f"sampled potential needs >= {MIN_SAMPLES_PER_PERIOD} points per period, got {len(values)}"
        )
    return PeriodicPotential(float(a), TrigSeries.from_samples(values, float(a)))


def _check_same_period(p: PeriodicPotential, q: PeriodicPotential) -> None:
    if not np.isclose(p.period, q.period, rtol=1e-12, atol=0.0):
        raise LatticeError(f"mismatched periods {p.period} and {q.period}")


@dataclass(frozen=True)
class SimulationWindow:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_min < 0 < self.x_max:
            raise LatticeError("window must satisfy x_min < 0 < x_max")
        n = self.n_points
        if n < 2 or n & (n - 1):
            raise LatticeError(f"n_points must be a power of two, got {n}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    def points_per_period(self, a: float) -> float:
        return a / self.dx


@dataclass(frozen=True)
class InterfacePotential:
    """A non-periodic potential on a window, periodic-like far to either side."""

    window: SimulationWindow
    samples: np.ndarray
    left_lattice: PeriodicPotential
    right_lattice: PeriodicPotential
    wall_center: float = 0.0
    label: str = ""
    func: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __call__(self, x):
        if self.func is None:
            raise LatticeError("this interface potential carries samples only")
        return self.func(x)

    def asymptotic_mismatch(self):
        """Max deviation from the left lattice for x < x_min/2 and from the right one for x > x_max/2."""
        x = self.window.x
        left = x < self.window.x_min / 2
        right = x > self.window.x_max / 2
        dl = np.max(np.abs(self.samples[left] - self.left_lattice(x[left])))
        dr = np.max(np.abs(self.samples[right] - self.right_lattice(x[right])))
        return dl, dr


def step_interface(left: PeriodicPotential, right: PeriodicPotential,
                   window: SimulationWindow) -> InterfacePotential:
    """Abrupt junction: ``left`` for x < 0 and ``right`` for x >= 0."""
    _check_same_period(left, right)

    def func(x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, left(x), right(x))

    return InterfacePotential(window, func(window.x), left, right, 0.0, "step", func)


def steady_state_integral(u1: TrigSeries, mu_R: float) -> TrigSeries:
    """
    Periodic function s(x) = int_{-inf}^x u1(t)^2 exp(2 mu_R (t - x)) dt.

    s solves s' + 2 mu_R s = u1^2, so each Fourier coefficient of u1^2 is
    divided by (2 mu_R + i w_n).
    """
    if not mu_R > 0:
        raise LatticeError(f"mu_R must be positive, got {mu_R}")
    q = square_series(u1)
    return TrigSeries(q.period, q.coeffs / (2.0 * mu_R + 1j * q.frequencies), real=True)


def stable_cumulative_integral(u1: TrigSeries, mu_R: float, alpha: float, x) -> np.ndarray:
    """
    I(x) = exp(-2 mu_R x) * (alpha + int_0^x u1(t)^2 exp(2 mu_R t) dt).

    Evaluated as (alpha - s(0)) exp(-2 mu_R x) + s(x) with s the periodic
    steady state, so no exponentially large intermediate is formed for x > 0.
    """
    s = steady_state_integral(u1, mu_R)
    x = np.asarray(x, dtype=float)
    return (alpha - s(0.0)) * np.exp(-2.0 * mu_R * x) + s(x)


def gauss_legendre_period(f: Callable, a: float, x0: float = 0.0,
                          cells: int = 16, order: int = 16) -> float:
    """Composite Gauss-Legendre quadrature of f over [x0, x0 + a]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    h = a / cells
    left = x0 + h * np.arange(cells)
    t = (left[:, None] + 0.5 * h * (nodes[None, :] + 1.0)).ravel()
    w = np.tile(0.5 * h * weights, cells)
    return float(np.sum(w * f(t)))
