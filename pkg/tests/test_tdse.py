import numpy as np
import pytest

from isowall.floquet import gap_solution
from isowall.lattice import SimulationWindow, constant_potential, make_mathieu
from isowall.susy import surface_state, wall_potential
from isowall.tdse import (MeasurementError, SplitStepPropagator, WraparoundError, clearance_time,
                          WavePacketState, default_dt, evolve, gaussian_packet,
                          scattering_report, step)

A = 2 * np.pi


def free_gaussian(x, t, x0, w, k0):
    """Exact solution of i psi_t = -psi_xx for the unit-norm packet exp(-(x-x0)^2/w^2 + i k0 x)."""
    c = (2.0 / (np.pi * w * w)) ** 0.25
    q = w * w + 4j * t
    return (c * np.sqrt(w * w / q) * np.exp(-(x - x0 - 2 * k0 * t) ** 2 / q)
            * np.exp(1j * k0 * x - 1j * k0 * k0 * t))


def test_packet_construction():
    win = SimulationWindow(-100, 100, 2048)
    st = gaussian_packet(win, -10.0, 8.0, 0.0)
    assert st.norm() == pytest.approx(1.0, abs=1e-14)
    assert np.all(np.isreal(st.psi))
    assert np.allclose(st.psi, free_gaussian(win.x, 0.0, -10.0, 8.0, 0.0), atol=1e-13)
    with pytest.raises(ValueError):
        gaussian_packet(win, -95.0, 8.0, 0.0)
    with pytest.raises(ValueError):
        gaussian_packet(win, 0.0, 0.2, 0.0)
    with pytest.raises(ValueError):
        gaussian_packet(win, 150.0, 8.0, 0.0)


def test_free_packet_exact():
    win = SimulationWindow(-200, 200, 4096)
    x0, w, k0, T = -30.0, 6.0, 1.5, 20.0
    traj = evolve(gaussian_packet(win, x0, w, k0), 0.0, 0.01, T, 500)
    exact = free_gaussian(win.x, T, x0, w, k0)
    assert np.max(np.abs(traj[-1].psi - exact)) < 1e-6
    assert traj[-1].centroid() == pytest.approx(x0 + 2 * k0 * T, abs=1e-6)
    # width of |psi|^2 = exp(-2 (x - c)^2 / w(t)^2)
    p = np.abs(traj[-1].psi) ** 2
    var = np.sum((win.x - traj[-1].centroid()) ** 2 * p) / np.sum(p)
    assert 2 * np.sqrt(var) == pytest.approx(w * np.sqrt(1 + (4 * T / w**2) ** 2), rel=1e-8)


def test_constant_potential_is_a_phase():
    win = SimulationWindow(-200, 200, 4096)
    psi0 = gaussian_packet(win, 0.0, 10.0, 0.7)
    free = evolve(psi0, 0.0, 0.05, 10.0, 50)[-1].psi
    shifted = evolve(psi0, 0.3, 0.05, 10.0, 50)[-1].psi
    assert np.max(np.abs(shifted - np.exp(-0.3j * 10.0) * free)) < 1e-12


def test_strang_second_order():
    win = SimulationWindow(-100, 100, 1024)
    V = make_mathieu(0.5, A, 0.0)(win.x)
    psi0 = gaussian_packet(win, -20.0, 6.0, 0.8)
    ref = evolve(psi0, V, 0.0005, 4.0, 8000)[-1].psi
    err = [np.max(np.abs(evolve(psi0, V, dt, 4.0, 8000)[-1].psi - ref)) for dt in (0.02, 0.01)]
    assert err[0] / err[1] == pytest.approx(4.0, rel=0.1)


def test_norm_conservation_long_run():
    win = SimulationWindow(-40, 40, 512)
    V = make_mathieu(0.2, A, -0.0818)(win.x)
    psi = gaussian_packet(win, 0.0, 6.0, 0.0).psi
    prop = SplitStepPropagator(V, win, 0.01)
    one = prop.apply(psi, 1)
    assert abs(np.sum(np.abs(one) ** 2) * win.dx - 1.0) < 1e-12
    out = prop.apply(psi, 100_000)
    assert abs(np.sum(np.abs(out) ** 2) * win.dx - 1.0) < 1e-9


def test_energy_conservation():
    # the Strang energy error is O(dt^2); dt = 5e-4 brings it under 1e-8
    win = SimulationWindow(-200, 200, 4096)
    iface = wall_potential(make_mathieu(0.2, A, -0.0818), gap_solution(make_mathieu(0.2, A, -0.0818)),
                           5.0, win)
    psi0 = gaussian_packet(win, -60.0, 15.0, 0.25)
    # fast higher-band content may wrap; energy is conserved on the periodic grid regardless
    traj = evolve(psi0, iface, 0.0005, 40.0, 20000, edge_tol=np.inf)
    E0, E1 = psi0.energy(iface.samples), traj[-1].energy(iface.samples)
    assert abs(E1 - E0) / abs(E0) < 1e-8


def test_step_and_remainder_landing():
    win = SimulationWindow(-50, 50, 512)
    st = gaussian_packet(win, 0.0, 5.0, 0.0)
    assert step(st, 0.0, 0.1).t == pytest.approx(0.1)
    traj = evolve(st, 0.0, 0.3, 1.0, 2)
    assert traj[-1].t == pytest.approx(1.0, abs=1e-15)
    direct = evolve(st, 0.0, 0.25, 1.0, 4)[-1].psi
    assert np.max(np.abs(traj[-1].psi - direct)) < 1e-12  # free evolution is exact in dt
    assert default_dt(win) == pytest.approx(0.25 * win.dx**2)


def test_wraparound_guard():
    win = SimulationWindow(-50, 50, 512)
    st = gaussian_packet(win, 20.0, 4.0, 2.0)
    with pytest.raises(WraparoundError) as info:
        evolve(st, 0.0, 0.01, 20.0, 10)
    partial = info.value.trajectory
    assert len(partial) > 1 and partial[-1].t < 20.0


def test_surface_state_is_stationary():
    P = make_mathieu(0.2, A, -0.0818)
    chi = gap_solution(P)
    win = SimulationWindow(-60 * A, 60 * A, 8192)
    iface = wall_potential(P, chi, 5.0, win)
    gs = surface_state(chi, 5.0, win)
    traj = evolve(WavePacketState(win, gs.samples.astype(complex)), iface, 0.005, 100.0, 5000)
    assert np.max(np.abs(np.abs(traj[-1].psi) - np.abs(gs.samples))) < 1e-6
    assert abs(gs.overlap(traj[-1].psi)) ** 2 == pytest.approx(1.0, abs=1e-8)


def test_report_free_packet():
    win = SimulationWindow(-800, 800, 8192)
    x0, w, k0 = -100.0, 10.0, 1.0
    # dispersion widens the packet beyond the clearance estimate; wait well past it
    T = 150.0
    assert T > clearance_time(x0, w, 2 * k0, 0.0, 20.0)
    traj = evolve(gaussian_packet(win, x0, w, k0), 0.0, 0.02, T, 1000)
    rep = scattering_report(traj, 0.0, 20.0, incident=(x0, w, 2 * k0))
    assert rep.reflected_norm < 1e-10
    assert rep.transmitted_norm == pytest.approx(1.0, abs=1e-6)
    assert rep.accounting_error() < 1e-9
    with pytest.raises(MeasurementError, match="too early"):
        scattering_report(traj[:2], 0.0, 20.0, incident=(x0, w, 2 * k0))


def test_reference_mismatch():
    win = SimulationWindow(-100, 100, 1024)
    traj = evolve(gaussian_packet(win, 0.0, 5.0, 0.0), 0.0, 0.1, 1.0, 5)
    with pytest.raises(MeasurementError):
        scattering_report(traj, 0.0, 10.0, reference=traj[0])


def test_poschl_teller_wall_is_reflectionless():
    c = 0.3
    P = constant_potential(c, A)
    win = SimulationWindow(-400, 400, 8192)
    iface = wall_potential(P, gap_solution(P), 3.0, win)
    x0, w, k0 = -100.0, 15.0, 0.6
    T = clearance_time(x0, w, 2 * k0, 0.0, 30.0)
    psi0 = gaussian_packet(win, x0, w, k0)
    traj = evolve(psi0, iface, 0.02, T, 1000)
    ref = evolve(psi0, c, 0.02, T, 1000)[-1]
    rep = scattering_report(traj, 0.0, 30.0, reference=ref)
    assert rep.reflected_norm < 1e-6
    assert rep.total_norm == pytest.approx(1.0, abs=1e-10)
    assert rep.accounting_error() < 1e-9
