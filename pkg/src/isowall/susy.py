"""
Darboux (supersymmetric) synthesis of transparent domain walls.

Starting from the growing zero-energy solution chi = u1 exp(mu_R x) of a
lattice V1, the wall potential is

    V3 = V1 - 2 (ln D)'',   D(x) = alpha + int_0^x chi^2,

which interpolates between V1 (x -> -inf) and an isospectral lattice V1 + F0
(x -> +inf).  Everything is evaluated through

    D(x) exp(-2 mu_R x) = (alpha - alpha0) exp(-2 mu_R x) + s(x)

with s the periodic steady state of the rescaled integral, so chi itself is
never formed and nodes of u1 are harmless.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .floquet import BlochState, EvanescentSolution
from .lattice import (InterfacePotential, PeriodicPotential, SimulationWindow, TrigSeries,
                      gauss_legendre_period, sampled_potential, steady_state_integral)

MIN_POINTS_PER_PERIOD = 32
EIGEN_RESIDUAL_TOL = 1e-6


class WallError(ValueError):
    pass


def factorized_potentials(W, dW):
    """The partner pair (W^2 + W', W^2 - W') generated by a superpotential."""
    W = np.asarray(W)
    return W * W + dW, W * W - dW


@dataclass(frozen=True)
class Superpotential:
    """W = chi'/chi = mu_R + u1'/u1, periodic with the lattice period."""

    source: EvanescentSolution
    x: np.ndarray
    samples: np.ndarray

    def __call__(self, x, derivative: int = 0):
        u1 = self.source.u1
        u, du = u1(x), u1(x, 1)
        if derivative == 0:
            return self.source.mu_R + du / u
        if derivative == 1:
            return (u1(x, 2) * u - du * du) / (u * u)
        raise ValueError("derivative order must be 0 or 1")


def _require_nodeless(chi: EvanescentSolution) -> None:
    if chi.antiperiodic or chi.node_count() > 0:
        raise WallError("superpotential singular: chi has nodes, use wall_potential directly")


def superpotential(chi: EvanescentSolution, n_samples: int = 256) -> Superpotential:
    _require_nodeless(chi)
    x = np.arange(n_samples) * chi.period / n_samples
    W = Superpotential(chi, x, np.empty(0))
    return Superpotential(chi, x, W(x))


def partner_potential(P: PeriodicPotential, chi: EvanescentSolution,
                      n_samples: int = 256) -> PeriodicPotential:
    """V2 = V1 - 2 W', isospectral to V1 except at E = 0."""
    W = superpotential(chi, n_samples)
    return sampled_potential(P(W.x) - 2.0 * W(W.x, 1), P.period)


def alpha_min(chi: EvanescentSolution) -> float:
    """
    alpha0 = int_{-inf}^0 chi^2, summed cell by cell as a geometric series.

    Each cell [-(n+1)a, -na] contributes exp(-2 mu_R n a) times the first one,
    which is integrated by composite Gauss-Legendre.
    """
    if not chi.mu_R > 0:
        raise WallError("alpha_min needs mu_R > 0")
    a, m = chi.period, chi.mu_R
    first = gauss_legendre_period(lambda t: chi.u1(t) ** 2 * np.exp(2.0 * m * (t - a)), a)
    return first / -np.expm1(-2.0 * m * a)


@dataclass(frozen=True)
class WallFamilyParam:
    alpha: float
    alpha0: float

    def __post_init__(self):
        if not self.alpha > self.alpha0:
            raise WallError(
                f"singular wall: F diverges where alpha + int chi^2 = 0; "
                f"need alpha > alpha0 = {self.alpha0:.10g}, got alpha = {self.alpha:.10g}"
            )


class DomainWall:
    """
    One member of the transparent wall family for a given (chi, alpha).

    ``P`` (the left lattice V1) is only needed for quantities that involve the
    potential itself; the surface state and mapped states depend on chi alone.
    """

    def __init__(self, chi: EvanescentSolution, alpha: float,
                 P: Optional[PeriodicPotential] = None):
        self.chi = chi
        self.P = P
        self.s = steady_state_integral(chi.u1, chi.mu_R)
        self.param = WallFamilyParam(float(alpha), alpha_min(chi))
        self.alpha = self.param.alpha
        # s(0) and the quadrature alpha0 agree to roundoff; s(0) keeps I consistent with s
        self.excess = self.alpha - float(self.s(0.0))

    @property
    def alpha0(self) -> float:
        return self.param.alpha0

    @property
    def center(self) -> float:
        """Where the decaying and periodic parts of the rescaled integral balance."""
        mean_s = float(self.s.coeffs[len(self.s.coeffs) // 2].real)
        return float(np.log(self.excess / mean_s) / (2.0 * self.chi.mu_R))

    def _decay(self, x):
        x = np.asarray(x, dtype=float)
        return x, np.exp(-2.0 * self.chi.mu_R * np.abs(x))

    def rescaled_integral(self, x):
        """I(x) = exp(-2 mu_R x) (alpha + int_0^x chi^2); grows for x -> -inf."""
        x = np.asarray(x, dtype=float)
        return self.excess * np.exp(-2.0 * self.chi.mu_R * x) + self.s(x)

    def inverse_integral(self, x):
        """1 / I(x) without overflow on either side."""
        x, y = self._decay(x)
        s = self.s(x)
        return np.where(x <= 0, y / (self.excess + y * s), 1.0 / (self.excess * y + s))

    def correction(self, x):
        """F(x) = 2 u1^4 / I^2 - 4 u1 (u1' + mu_R u1) / I."""
        u1 = self.chi.u1
        u, du = u1(x), u1(x, 1)
        inv = self.inverse_integral(x)
        return 2.0 * u**4 * inv**2 - 4.0 * u * (du + self.chi.mu_R * u) * inv

    def asymptotic_correction(self, x):
        """F0(x), the periodic limit of F as x -> +inf (independent of alpha)."""
        return asymptotic_correction(self.chi, x, self.s)

    def __call__(self, x):
        if self.P is None:
            raise WallError("the wall potential needs the left lattice P")
        return self.P(x) + self.correction(x)

    def surface_state(self, x):
        """Unnormalized g_s = chi / D = u1 exp(-mu_R x) / I(x)."""
        x, y = self._decay(x)
        s = self.s(x)
        root = np.sqrt(y)
        return self.chi.u1(x) * np.where(x <= 0, root / (self.excess + y * s),
                                         root / (self.excess * y + s))

    def mapped(self, psi: BlochState, E: float, x):
        """g = psi + (chi psi' - psi chi') chi / (E D), an eigenfunction of the wall at E."""
        if E == 0:
            raise WallError("mapped states need E != 0")
        x = np.asarray(x, dtype=float)
        u1 = self.chi.u1
        u, du = u1(x), u1(x, 1)
        p, dp = psi.psi(x), psi.psi(x, 1)
        return p + (u * u * dp - u * (du + self.chi.mu_R * u) * p) * self.inverse_integral(x) / E

    def envelope(self, psi: BlochState, E: float, x):
        """h(x) with g ~ h exp(ikx) for x -> +inf; periodic with the lattice period."""
        return _envelope(self.chi, self.s, psi, E, x)


def _envelope(chi: EvanescentSolution, s: TrigSeries, psi: BlochState, E: float, x):
    if E == 0:
        raise WallError("the transmitted envelope needs E != 0")
    x = np.asarray(x, dtype=float)
    v, dv = chi.u1(x), chi.u1(x, 1)
    u, du = psi.u(x), psi.u(x, 1)
    num = (1j * psi.k - chi.mu_R) * v * v * u + v * v * du - u * v * dv
    return u + num / (E * s(x))


def asymptotic_correction(chi: EvanescentSolution, x, s: Optional[TrigSeries] = None):
    if s is None:
        s = steady_state_integral(chi.u1, chi.mu_R)
    u, du, sv = chi.u1(x), chi.u1(x, 1), s(x)
    return 2.0 * u**4 / sv**2 - 4.0 * u * (du + chi.mu_R * u) / sv


def asymptotic_lattice(P: PeriodicPotential, chi: EvanescentSolution,
                       n_samples: Optional[int] = None) -> PeriodicPotential:
    """V1 + F0, the lattice on the far side of every wall in the family."""
    if not chi.mu_R > 0:
        raise WallError("asymptotic_lattice needs mu_R > 0")
    if n_samples is None:
        n_samples = max(256, 4 * len(chi.u1.coeffs))
    x = np.arange(n_samples) * P.period / n_samples
    return sampled_potential(P(x) + asymptotic_correction(chi, x), P.period)


def _check_window(window: SimulationWindow, a: float) -> None:
    if window.points_per_period(a) < MIN_POINTS_PER_PERIOD:
        raise WallError(
            f"window too coarse: {window.points_per_period(a):.1f} points per period, "
            f"need >= {MIN_POINTS_PER_PERIOD}"
        )


def wall_potential(P: PeriodicPotential, chi: EvanescentSolution, alpha: float,
                   window: SimulationWindow) -> InterfacePotential:
    """Sample V3 = V1 + F on the window."""
    _check_window(window, P.period)
    wall = DomainWall(chi, alpha, P)
    return InterfacePotential(window, wall(window.x), P, asymptotic_lattice(P, chi),
                              wall.center, f"wall alpha={alpha:g}", wall)


@dataclass(frozen=True)
class SurfaceState:
    window: SimulationWindow
    samples: np.ndarray
    decay_rate: float
    energy: float = 0.0

    @property
    def peak(self) -> float:
        return float(self.window.x[np.argmax(np.abs(self.samples))])

    def overlap(self, psi) -> complex:
        return complex(np.vdot(self.samples, psi) * self.window.dx)


def surface_state(chi: EvanescentSolution, alpha: float, window: SimulationWindow) -> SurfaceState:
    """Zero-energy bound state of the wall, normalized to unit L2 norm on the window."""
    _check_window(window, chi.period)
    g = DomainWall(chi, alpha).surface_state(window.x)
    g = g / np.sqrt(np.sum(g * g) * window.dx)
    return SurfaceState(window, g, chi.mu_R)


def mapped_state(psi: BlochState, chi: EvanescentSolution, alpha: float, E: float,
                 window: SimulationWindow, P: Optional[PeriodicPotential] = None) -> np.ndarray:
    """
    Wall eigenfunction obtained from a lattice eigenfunction psi at energy E != 0.

    When ``P`` is given, psi is first checked to be an eigenfunction of it.
    """
    if E == 0:
        raise WallError("mapped states need E != 0")
    if P is not None:
        x = np.linspace(0.0, P.period, 257)
        r = np.max(np.abs(-psi.psi(x, 2) + (P(x) - E) * psi.psi(x)))
        if r > EIGEN_RESIDUAL_TOL:
            raise WallError(f"psi is not an eigenfunction at E={E} (residual {r:.2e})")
    return DomainWall(chi, alpha).mapped(psi, E, window.x)


def transmitted_envelope(psi: BlochState, chi: EvanescentSolution, E: float,
                         n_samples: int = 256) -> TrigSeries:
    """The periodic envelope h of the transmitted wave, as a Fourier series."""
    x = np.arange(n_samples) * chi.period / n_samples
    s = steady_state_integral(chi.u1, chi.mu_R)
    return TrigSeries.from_samples(_envelope(chi, s, psi, E, x), chi.period)


_FD8 = np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560])


def second_derivative(f: Callable, x, h: float = 0.02):
    """Eighth-order central difference of a callable."""
    x = np.asarray(x, dtype=float)
    return sum(c * f(x + (j - 4) * h) for j, c in enumerate(_FD8)) / (h * h)


def eigen_residual(V: Callable, g: Callable, E: float, x, h: float = 0.02):
    """max |(-d^2/dx^2 + V - E) g| at the points x, with g'' by finite differences."""
    x = np.asarray(x, dtype=float)
    return float(np.max(np.abs(-second_derivative(g, x, h) + (V(x) - E) * g(x))))
