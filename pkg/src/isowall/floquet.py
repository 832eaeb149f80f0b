"""
Stationary analysis of a periodic potential.

Two independent band solvers live here: a plane-wave Galerkin diagonalization
of the Bloch-reduced Hamiltonian and the Hill discriminant obtained by
integrating one period of the ODE.  The E = 0 evanescent solution that seeds
the Darboux construction is also built here.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize_scalar

from .lattice import PeriodicPotential, TrigSeries

ODE_RTOL = 1e-12
ODE_ATOL = 1e-14
NORMALIZATIONS = ("unit-max", "unit-mean-square")


class FloquetError(RuntimeError):
    pass


class GapError(ValueError):
    pass


@dataclass(frozen=True)
class Monodromy:
    energy: float
    matrix: np.ndarray

    @property
    def discriminant(self) -> float:
        return float(np.trace(self.matrix))

    @property
    def in_gap(self) -> bool:
        return abs(self.discriminant) > 2.0


def monodromy(P: PeriodicPotential, E: float) -> Monodromy:
    """Propagate (psi, psi') across one period for initial data (1, 0) and (0, 1)."""

    def rhs(x, y):
        v = P(x) - E
        return [y[1], v * y[0], y[3], v * y[2]]

    sol = solve_ivp(rhs, (0.0, P.period), [1.0, 0.0, 0.0, 1.0], method="DOP853",
                    rtol=ODE_RTOL, atol=ODE_ATOL)
    if not sol.success:
        raise FloquetError(f"monodromy integration failed at E={E}: {sol.message}")
    y = sol.y[:, -1]
    return Monodromy(float(E), np.array([[y[0], y[2]], [y[1], y[3]]]))


def discriminant(P: PeriodicPotential, E: float) -> float:
    return monodromy(P, E).discriminant


def exponent_from_discriminant(delta: float, a: float) -> complex:
    if delta > 2.0:
        return complex(np.arccosh(delta / 2.0) / a, 0.0)
    if delta < -2.0:
        return complex(np.arccosh(-delta / 2.0) / a, np.pi / a)
    return complex(0.0, np.arccos(delta / 2.0) / a)


def floquet_exponent(P: PeriodicPotential, E: float) -> complex:
    """
    Floquet exponent mu = mu_R + i mu_I with mu_R >= 0.

    In a gap mu_I is 0 or pi/a; in a band mu_R = 0 and mu_I is the quasi-momentum.
    """
    return exponent_from_discriminant(discriminant(P, E), P.period)


def _default_cutoff(P: PeriodicPotential, n_bands: int) -> int:
    return max(32, n_bands + 24, P.max_harmonic + 24)


def _potential_toeplitz(P: PeriodicPotential, M: int) -> np.ndarray:
    n = np.arange(-M, M + 1)
    diff = n[:, None] - n[None, :]
    table = np.array([P.harmonic(int(d)) for d in range(-2 * M, 2 * M + 1)])
    return table[diff + 2 * M]


def bloch_hamiltonian(P: PeriodicPotential, k: complex, M: int) -> np.ndarray:
    """Plane-wave matrix of -(d/dx + ik)^2 + V acting on the periodic part."""
    G = 2.0 * np.pi * np.arange(-M, M + 1) / P.period
    return np.diag((k + G) ** 2).astype(complex) + _potential_toeplitz(P, M)


@dataclass(frozen=True)
class BandStructure:
    k: np.ndarray
    energies: np.ndarray          # shape (n_k, n_bands)
    band_edges: np.ndarray        # shape (n_bands, 2): (bottom, top) of each band
    period: float

    @property
    def n_bands(self) -> int:
        return self.energies.shape[1]

    def gap_edges(self) -> list:
        """Sorted list of every band edge energy (bottom_0, top_0, bottom_1, ...)."""
        return list(self.band_edges.ravel())

    def locate(self, E: float) -> str:
        """'band n', 'gap n' (between bands n-1 and n) or 'semi-infinite'."""
        if E < self.band_edges[0, 0]:
            return "semi-infinite"
        for n, (lo, hi) in enumerate(self.band_edges):
            if lo <= E <= hi:
                return f"band {n}"
            if n + 1 < self.n_bands and hi < E < self.band_edges[n + 1, 0]:
                return f"gap {n + 1}"
        return "above computed bands"


def band_structure(P: PeriodicPotential, n_bands: int, n_k: int = 101,
                   cutoff: Optional[int] = None) -> BandStructure:
    if n_bands < 1:
        raise ValueError("n_bands must be >= 1")
    M = cutoff or _default_cutoff(P, n_bands)
    kmax = np.pi / P.period
    ks = np.linspace(-kmax, kmax, n_k)
    energies = np.empty((n_k, n_bands))
    for i, k in enumerate(ks):
        energies[i] = np.linalg.eigvalsh(bloch_hamiltonian(P, k, M))[:n_bands]
    # in 1-D every band is monotone on [0, pi/a]: extrema sit at k = 0 and k = pi/a
    e0 = np.linalg.eigvalsh(bloch_hamiltonian(P, 0.0, M))[:n_bands]
    e1 = np.linalg.eigvalsh(bloch_hamiltonian(P, kmax, M))[:n_bands]
    edges = np.sort(np.stack([e0, e1], axis=1), axis=1)
    return BandStructure(ks, energies, edges, P.period)


def discriminant_band_edges(P: PeriodicPotential, n_bands: int, scan_step: float = 0.02,
                            xtol: float = 1e-14) -> np.ndarray:
    """
    Band edges as roots of Delta(E) = +-2, independent of the Galerkin solver.

    Delta decreases through zero once inside every band, so the zeros of Delta
    bracket the gaps; inside each bracket the extremum of Delta marks the gap
    and the edges are the crossings of +-2 on either side of it.
    """
    lo = float(np.min(P(np.linspace(0.0, P.period, 513)))) - 1e-3
    zeros = []
    E, d = lo, discriminant(P, lo)
    while len(zeros) < n_bands + 1:
        E_next = E + scan_step
        d_next = discriminant(P, E_next)
        if np.sign(d_next) != np.sign(d):
            zeros.append(brentq(lambda e: discriminant(P, e), E, E_next, xtol=xtol))
        E, d = E_next, d_next
        if E > lo + 1e4:
            raise FloquetError("band-edge scan did not terminate")

    def crossing(target, e1, e2):
        return brentq(lambda e: discriminant(P, e) - target, e1, e2, xtol=xtol)

    edges = np.empty((n_bands, 2))
    edges[0, 0] = crossing(2.0, lo, zeros[0])
    for n in range(n_bands):
        z1, z2 = zeros[n], zeros[n + 1]
        # between z1 and z2 Delta is -2 (n even) or +2 (n odd) at the gap
        sign = -1.0 if n % 2 == 0 else 1.0
        res = minimize_scalar(lambda e: -sign * discriminant(P, e), bounds=(z1, z2),
                              method="bounded", options={"xatol": 1e-12})
        e_ext = float(res.x)
        if sign * discriminant(P, e_ext) <= 2.0:
            edges[n, 1] = e_ext  # closed gap: the edges coincide
            if n + 1 < n_bands:
                edges[n + 1, 0] = e_ext
            continue
        edges[n, 1] = crossing(2.0 * sign, z1, e_ext)
        if n + 1 < n_bands:
            edges[n + 1, 0] = crossing(2.0 * sign, e_ext, z2)
    return edges


@dataclass(frozen=True)
class BlochState:
    energy: float
    k: float
    band: int
    u: TrigSeries            # complex periodic part, unit mean square
    group_velocity: float

    def psi(self, x, derivative: int = 0):
        x = np.asarray(x, dtype=float)
        ph = np.exp(1j * self.k * x)
        if derivative == 0:
            return self.u(x) * ph
        if derivative == 1:
            return (self.u(x, 1) + 1j * self.k * self.u(x)) * ph
        if derivative == 2:
            return (self.u(x, 2) + 2j * self.k * self.u(x, 1) - self.k**2 * self.u(x)) * ph
        raise ValueError("derivative order must be 0, 1 or 2")

    @property
    def direction(self) -> int:
        return int(np.sign(self.group_velocity))


def bloch_state(P: PeriodicPotential, band_index: int, k: float,
                cutoff: Optional[int] = None) -> BlochState:
    a = P.period
    if abs(k) > np.pi / a * (1 + 1e-12):
        raise ValueError(f"k={k} lies outside the Brillouin zone [-pi/a, pi/a]")
    M = cutoff or _default_cutoff(P, band_index + 1)
    w, v = np.linalg.eigh(bloch_hamiltonian(P, k, M))
    c = v[:, band_index]
    c = c * np.exp(-1j * np.angle(c[np.argmax(np.abs(c))]))
    c /= np.linalg.norm(c)
    G = 2.0 * np.pi * np.arange(-M, M + 1) / a
    vg = float(np.sum(np.abs(c) ** 2 * 2.0 * (k + G)))
    return BlochState(float(w[band_index]), float(k), band_index,
                      TrigSeries(a, c, real=False), vg)


def dominant_bloch_state(P: PeriodicPotential, k0: float, n_bands: int = 6) -> BlochState:
    """The Bloch state carrying the largest share of the plane wave exp(i k0 x)."""
    a = P.period
    g = 2.0 * np.pi / a
    k = float(k0 - g * np.round(k0 / g))
    shift = int(np.round((k0 - k) / g))
    best, weight = None, -1.0
    for n in range(n_bands):
        st = bloch_state(P, n, k)
        w = abs(st.u.harmonic(shift)) if shift <= st.u.max_harmonic else 0.0
        if w > weight:
            best, weight = st, w
    return best


@dataclass(frozen=True)
class EvanescentSolution:
    """
    chi(x) = u1(x) exp(mu_R x), a real zero-energy solution growing toward +inf.

    u1 is periodic when mu_I = 0 and antiperiodic when mu_I = pi/a.
    """

    mu_R: float
    mu_I: float
    u1: TrigSeries
    normalization: str = "unit-max"
    scale: float = 1.0

    @property
    def period(self) -> float:
        return self.u1.period

    @property
    def mu(self) -> complex:
        return complex(self.mu_R, self.mu_I)

    @property
    def antiperiodic(self) -> bool:
        return self.u1.antiperiodic

    def scaled(self, c: float) -> "EvanescentSolution":
        return EvanescentSolution(self.mu_R, self.mu_I, self.u1.scaled(c),
                                  self.normalization, self.scale * c)

    def chi(self, x, derivative: int = 0):
        """chi or chi' directly; overflows for large x, use the factored pieces there."""
        x = np.asarray(x, dtype=float)
        grow = np.exp(self.mu_R * x)
        if derivative == 0:
            return self.u1(x) * grow
        if derivative == 1:
            return (self.u1(x, 1) + self.mu_R * self.u1(x)) * grow
        raise ValueError("derivative order must be 0 or 1")

    def residual(self, P: PeriodicPotential, x) -> np.ndarray:
        """(-chi'' + V chi) * exp(-mu_R x), evaluated without forming chi."""
        m = self.mu_R
        u, du, d2u = self.u1(x), self.u1(x, 1), self.u1(x, 2)
        return -(d2u + 2 * m * du + m * m * u) + P(x) * u

    def node_count(self, samples: int = 4096) -> int:
        u = self.u1(np.linspace(0.0, self.period, samples + 1))
        return int(np.count_nonzero(np.sign(u[1:]) != np.sign(u[:-1])))


def gap_solution(P: PeriodicPotential, normalization: str = "unit-max",
                 scale: float = 1.0, cutoff: Optional[int] = None) -> EvanescentSolution:
    """
    Growing zero-energy Floquet solution chi = u1 exp(mu_R x).

    mu comes from the monodromy matrix; u1 is the null vector of the
    plane-wave Hill operator at the complex quasi-momentum pi*theta/a - i mu_R,
    which yields its Fourier coefficients (and hence all derivatives) directly.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"unknown normalization {normalization!r}; expected one of {NORMALIZATIONS}")
    a = P.period
    delta = discriminant(P, 0.0)
    if abs(delta) <= 2.0:
        raise GapError(f"not a gap energy: shift E0 (Delta(0) = {delta:.6g})")
    mu_R = float(np.arccosh(abs(delta) / 2.0) / a)
    antiperiodic = delta < 0
    theta = 0.5 if antiperiodic else 0.0

    M = cutoff or _default_cutoff(P, 1)
    T = _potential_toeplitz(P, M)
    n = np.arange(-M, M + 1)
    if antiperiodic:
        # harmonics -M+1/2 .. M-1/2 form a symmetric set
        n, T = n[:-1], T[:-1, :-1]
    kc = 2.0 * np.pi * (n + theta) / a - 1j * mu_R
    _, _, vh = np.linalg.svd(np.diag(kc**2) + T)
    c = vh[-1].conj()
    # rotate to a real function, then enforce c_{-n} = conj(c_n) exactly
    u = TrigSeries(a, c, antiperiodic, real=False)
    xs = np.arange(256) * a / 256
    vals = u(xs)
    c = c * np.exp(-1j * np.angle(vals[np.argmax(np.abs(vals))]))
    c = 0.5 * (c + c[::-1].conj())
    u1 = TrigSeries(a, c, antiperiodic, real=True)

    fine = np.arange(4096) * a / 4096
    vals = u1(fine)
    if normalization == "unit-max":
        norm = vals[np.argmax(np.abs(vals))]
    else:
        norm = np.sqrt(np.mean(vals**2)) * np.sign(vals[np.argmax(np.abs(vals))])
    u1 = u1.scaled(scale / norm)
    return EvanescentSolution(mu_R, np.pi / a if antiperiodic else 0.0, u1, normalization, scale)
