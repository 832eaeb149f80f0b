"""
Split-step (Strang) pseudospectral evolution of i psi_t = -psi_xx + V(x) psi.

Boundaries are periodic on an oversized window; instead of absorbing layers a
wraparound guard aborts a run as soon as amplitude reaches the window edges.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .lattice import InterfacePotential, SimulationWindow

EDGE_TOL = 1e-6
EDGE_FRACTION = 0.02


class WraparoundError(RuntimeError):
    def __init__(self, message: str, trajectory: list):
        super().__init__(message)
        self.trajectory = trajectory


class MeasurementError(ValueError):
    pass


@dataclass
class WavePacketState:
    window: SimulationWindow
    psi: np.ndarray
    t: float = 0.0

    @property
    def x(self) -> np.ndarray:
        return self.window.x

    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.window.dx)

    def edge_amplitude(self, fraction: float = EDGE_FRACTION) -> float:
        m = max(1, int(fraction * self.window.n_points))
        return float(max(np.max(np.abs(self.psi[:m])), np.max(np.abs(self.psi[-m:]))))

    def centroid(self) -> float:
        p = np.abs(self.psi) ** 2
        return float(np.sum(self.x * p) / np.sum(p))

    def energy(self, V: np.ndarray) -> float:
        """<psi| -d^2/dx^2 + V |psi> with the kinetic part evaluated spectrally."""
        k = wavenumbers(self.window)
        phi = np.fft.fft(self.psi)
        kinetic = np.sum(k * k * np.abs(phi) ** 2) / self.window.n_points
        potential = np.sum(V * np.abs(self.psi) ** 2)
        return float((kinetic + potential) * self.window.dx)


def wavenumbers(window: SimulationWindow) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(window.n_points, d=window.dx)


def gaussian_packet(window: SimulationWindow, x0: float, w: float, k0: float) -> WavePacketState:
    """exp(-(x - x0)^2 / w^2) exp(i k0 x), normalized to unit L2 norm."""
    if not window.x_min < x0 < window.x_max:
        raise ValueError(f"x0={x0} lies outside the window")
    if not w > 4 * window.dx:
        raise ValueError(f"packet width {w} is under-resolved (dx={window.dx:.3g})")
    x = window.x
    psi = np.exp(-((x - x0) / w) ** 2) * np.exp(1j * k0 * x)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * window.dx)
    if max(abs(psi[0]), abs(psi[-1])) > 1e-12:
        raise ValueError("packet touches the window edges; enlarge the window")
    return WavePacketState(window, psi, 0.0)


def _samples(V, window: SimulationWindow) -> np.ndarray:
    if isinstance(V, InterfacePotential):
        if V.window != window:
            raise ValueError("potential and state live on different windows")
        return V.samples
    V = np.asarray(V, dtype=float)
    if V.ndim == 0:
        return np.full(window.n_points, float(V))
    if V.shape != (window.n_points,):
        raise ValueError("potential samples do not match the window")
    return V


class SplitStepPropagator:
    """Strang splitting exp(-iV dt/2) F^-1 exp(-i k^2 dt) F exp(-iV dt/2)."""

    def __init__(self, V, window: SimulationWindow, dt: float):
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.window = window
        self.dt = dt
        self.V = _samples(V, window)
        self.half_potential = np.exp(-0.5j * dt * self.V)
        k = wavenumbers(window)
        self.kinetic = np.exp(-1j * dt * k * k)

    def apply(self, psi: np.ndarray, n_steps: int = 1) -> np.ndarray:
        if n_steps == 0:
            return psi
        hv, kin = self.half_potential, self.kinetic
        full = hv * hv
        psi = hv * psi
        for i in range(n_steps):
            psi = np.fft.ifft(kin * np.fft.fft(psi))
            psi *= full if i < n_steps - 1 else hv
        return psi


def default_dt(window: SimulationWindow) -> float:
    return 0.25 * window.dx**2


def step(state: WavePacketState, V, dt: float) -> WavePacketState:
    prop = SplitStepPropagator(V, state.window, dt)
    return WavePacketState(state.window, prop.apply(state.psi), state.t + dt)


def evolve(state: WavePacketState, V, dt: float, t_final: float, snapshot_stride: int = 100,
           edge_tol: float = EDGE_TOL) -> List[WavePacketState]:
    """
    Evolve to ``t_final``, keeping a snapshot every ``snapshot_stride`` steps.

    The last snapshot is always at t_final (the final step is shortened if
    t_final is not a multiple of dt).  Raises WraparoundError, carrying the
    snapshots taken so far, once the edge amplitude exceeds ``edge_tol``.
    """
    if not t_final > 0:
        raise ValueError("t_final must be positive")
    n_steps = int(np.floor(t_final / dt + 1e-9))
    remainder = t_final - n_steps * dt
    prop = SplitStepPropagator(V, state.window, dt)
    trajectory = [state]
    psi, t, done = state.psi, state.t, 0
    while done < n_steps:
        chunk = min(snapshot_stride, n_steps - done)
        psi = prop.apply(psi, chunk)
        done += chunk
        t = state.t + done * dt
        snap = WavePacketState(state.window, psi, t)
        trajectory.append(snap)
        if snap.edge_amplitude() > edge_tol:
            raise WraparoundError(
                f"edge amplitude {snap.edge_amplitude():.2e} > {edge_tol:.0e} at t={t:.4g}: "
                "enlarge window or shorten t_final", trajectory)
    if remainder > 1e-12:
        psi = SplitStepPropagator(V, state.window, remainder).apply(psi)
        trajectory.append(WavePacketState(state.window, psi, state.t + t_final))
    return trajectory


@dataclass
class ScatteringReport:
    """
    Norm bookkeeping at the measurement time.

    backward + transmitted + bound + center_residual + edge_leakage equals the
    total norm.  ``reflected_norm`` is the part of the backward region that is
    caused by the interface: with a reference run (same packet, left lattice
    everywhere) it is |psi - psi_ref|^2 there, otherwise the whole backward norm.
    """

    reflected_norm: float
    transmitted_norm: float
    bound_norm: float
    edge_leakage: float
    center_residual: float
    backward_norm: float
    total_norm: float
    measurement_time: float
    interface_x: float
    buffer: float
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)

    def accounting_error(self) -> float:
        parts = (self.backward_norm + self.transmitted_norm + self.bound_norm
                 + self.center_residual + self.edge_leakage)
        return abs(parts - self.total_norm)


def clearance_time(x0: float, w: float, group_velocity: float, interface_x: float,
                   buffer: float, n_widths: float = 3.0) -> float:
    """Time for the trailing n_widths standard deviations of |psi|^2 to pass interface + buffer."""
    if group_velocity <= 0:
        return np.inf
    return (interface_x + buffer + n_widths * 0.5 * w - x0) / group_velocity


def scattering_report(trajectory: Sequence[WavePacketState], interface_x: float, buffer: float,
                      gs=None, reference: Optional[WavePacketState] = None,
                      incident: Optional[tuple] = None,
                      edge_fraction: float = EDGE_FRACTION) -> ScatteringReport:
    """
    Partition the final state into backward, center, transmitted and edge parts.

    ``incident = (x0, w, group_velocity)`` enables the check that the slowest
    (band-0) packet has cleared the buffer before the measurement time.
    """
    final = trajectory[-1]
    win = final.window
    x, dx = win.x, win.dx
    if incident is not None:
        t_need = clearance_time(*incident, interface_x, buffer)
        if final.t < t_need:
            raise MeasurementError(
                f"measurement at t={final.t:.4g} is too early: the band-0 packet clears "
                f"the buffer only at t={t_need:.4g}")
    psi = final.psi
    m = max(1, int(edge_fraction * win.n_points))
    edge = np.zeros(win.n_points, bool)
    edge[:m] = edge[-m:] = True
    left = (x < interface_x - buffer) & ~edge
    right = (x > interface_x + buffer) & ~edge
    center = ~(left | right | edge)

    def weight(mask, f=psi):
        return float(np.sum(np.abs(f[mask]) ** 2) * dx)

    bound, proj = 0.0, 0.0
    if gs is not None:
        amp = gs.overlap(psi)
        bound = abs(amp) ** 2
        proj = amp * gs.samples
    if reference is not None:
        if reference.window != win or abs(reference.t - final.t) > 1e-9:
            raise MeasurementError("reference run does not match the trajectory")
        reflected = weight(left, psi - reference.psi - proj)
    else:
        reflected = weight(left, psi - proj)
    total = final.norm()
    backward, transmitted = weight(left), weight(right)
    center_residual = weight(center) - bound
    return ScatteringReport(reflected, transmitted, bound, weight(edge), center_residual,
                            backward, total, final.t, interface_x, buffer)
