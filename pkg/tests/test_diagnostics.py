import numpy as np
import pytest

from vacns.diagnostics import (commutator_audit, commutator_ratio,
                               conservation_drift, conserved_quantities,
                               conserved_table, drift_allowance, gn_audit,
                               gn_ratio, nondecay_check, original_residual,
                               psi_consistency, regularity_monitor)
from vacns.grid import Grid
from vacns.initial import constant_state, fourier_mode, state_from_rho
from vacns.linstep import LinStepConfig
from vacns.picard import PicardConfig, Trajectory, time_march
from vacns.state import FluidState, PhysParams, c_from_rho, psi_from_c


def _bump_trajectory(grid, params, u_const, times):
    """Fixed density bump advected by nothing: states identical up to u scaling."""
    rho0 = 1.0 / (1.0 + grid.radius() ** 4)
    traj = Trajectory()
    for t, scale in times:
        st = state_from_rho(grid, rho0, np.zeros(grid.shape + (grid.dim,)), params)
        st.u += np.asarray(u_const) * scale
        st.t = t
        traj.times.append(t)
        traj.states.append(st)
    return traj


def test_conserved_quantities_constant_velocity(params_vacuum):
    # rho a bump with integral m, u constant U: P = m U and E_k = m|U|^2/2
    g = Grid.decay_box(2, 32, 16.0)
    rho0 = 1.0 / (1.0 + g.radius() ** 4)
    st = state_from_rho(g, rho0, np.zeros(g.shape + (2,)), params_vacuum)
    st.u[..., 0] = 0.3
    st.u[..., 1] = -0.4
    rec = conserved_quantities(st, params_vacuum)
    m = g.integral(rho0)
    assert rec.mass == pytest.approx(m, rel=1e-13)
    assert rec.momentum[0] == pytest.approx(0.3 * m, rel=1e-13)
    assert rec.momentum[1] == pytest.approx(-0.4 * m, rel=1e-13)
    assert rec.e_kin == pytest.approx(0.5 * m * 0.25, rel=1e-13)
    assert rec.sup_u == pytest.approx(0.5, rel=1e-13)


def test_floors_from_hand_values(params_const_visc):
    # m(0) = 2, |P(0)| = 1 -> C0 = 1/4 and C_u = 1/2
    g = Grid.periodic(1, 32, 2.0)
    p = params_const_visc
    c_val = float(np.sqrt(2.0))  # rho = c^2/2 = 1 so mass = volume = 2
    st = constant_state(g, p, c_val=c_val, u_val=0.5)
    traj = Trajectory(times=[0.0, 1.0], states=[st, st.with_time(1.0)])
    records = conserved_table(traj, p)
    assert records[0].mass == pytest.approx(2.0, rel=1e-13)
    assert abs(records[0].momentum[0]) == pytest.approx(1.0, rel=1e-13)
    assert records[0].c0_floor == pytest.approx(0.25, rel=1e-12)
    assert records[0].u_floor == pytest.approx(0.5, rel=1e-12)
    assert all(r.ek_margin >= 0 and r.u_margin >= 0 for r in records)


def test_vacuum_state_floors_flagged(params_vacuum):
    g = Grid.periodic(1, 16)
    traj = Trajectory(times=[0.0], states=[FluidState.zero(g)])
    records = conserved_table(traj, params_vacuum)
    rec = records[0]
    assert rec.mass == 0.0 and rec.e_kin == 0.0
    assert rec.c0_floor is None and rec.ek_margin is None


def test_conservation_drift_trivial_cases(params_const_visc):
    g = Grid.periodic(1, 32)
    st = constant_state(g, params_const_visc, c_val=1.0, u_val=0.2)
    single = Trajectory(times=[0.0], states=[st])
    assert conservation_drift(single, params_const_visc) == (0.0, 0.0)
    steady = Trajectory(times=[0.0, 1.0], states=[st, st.with_time(1.0)])
    md, pd = conservation_drift(steady, params_const_visc)
    assert md <= 1e-12 and pd <= 1e-12


def test_nondecay_constant_flow_passes(params_vacuum):
    g = Grid.decay_box(1, 64, 16.0)
    traj = _bump_trajectory(g, params_vacuum, [0.4], [(0.0, 1.0), (1.0, 1.0)])
    verdict = nondecay_check(traj, params_vacuum)
    assert verdict.applicable and verdict.passed
    # constant flow makes the chain C_u = |P|/m = |U| an exact equality,
    # so the floor binds with zero margin (plus the drift allowance)
    assert verdict.u_floor == pytest.approx(0.4, rel=1e-12)
    assert verdict.min_sup_u == pytest.approx(0.4, rel=1e-12)
    assert verdict.margin >= 0.0


def test_nondecay_zero_momentum_not_applicable(params_const_visc):
    g = Grid.periodic(1, 32)
    st = constant_state(g, params_const_visc, c_val=1.0, u_val=0.0)
    traj = Trajectory(times=[0.0, 1.0], states=[st, st.with_time(1.0)])
    verdict = nondecay_check(traj, params_const_visc)
    assert not verdict.applicable


def test_nondecay_decaying_fixture_fails(params_vacuum):
    # harness self-test: u scaled by e^{-t} with rho fixed must FAIL the floor
    g = Grid.decay_box(1, 64, 16.0)
    times = [(t, np.exp(-t)) for t in np.linspace(0.0, 5.0, 11)]
    traj = _bump_trajectory(g, params_vacuum, [0.4], times)
    verdict = nondecay_check(traj, params_vacuum)
    assert verdict.applicable
    assert not verdict.passed
    assert verdict.margin < 0.0
    # the drift allowance is capped, so gross momentum loss cannot excuse it
    assert verdict.allowance <= drift_allowance(1.0, 1.0)


def test_original_residual_steady_states(params_const_visc, params_vacuum):
    g = Grid.periodic(1, 64)
    vac = FluidState.zero(g)
    r_mass, r_mom = original_residual(vac, vac, 0.1, params_vacuum)
    assert r_mass == 0.0 and r_mom == 0.0
    st = constant_state(g, params_const_visc, c_val=1.0)
    r_mass, r_mom = original_residual(st.with_time(0.1), st, 0.1, params_const_visc)
    assert r_mass <= 1e-10 and r_mom <= 1e-10


def test_original_residual_refines(params_const_visc):
    p = params_const_visc
    results = []
    for n, dt in ((128, 0.004), (256, 0.002)):
        g = Grid.periodic(1, n)
        st0 = fourier_mode(g, p, k=1, amplitude=0.05, u_mean=0.2, c_amplitude=0.1)
        lin = LinStepConfig(dt=dt, lin_tol=1e-12)
        traj = time_march(st0, 0.1, p, lin,
                          PicardConfig(window=dt, gamma_tol=1e-14), sample_cadence=1)
        assert traj.completed
        dt_s = traj.times[-1] - traj.times[-2]
        results.append(original_residual(traj.states[-1], traj.states[-2], dt_s, p))
    for i in range(2):
        factor = results[0][i] / results[1][i]
        assert factor >= 1.8, f"residual {i} refined by only {factor}"


def test_regularity_monitor_trivial_and_constant(params_const_visc, params_vacuum):
    g = Grid.periodic(1, 32)
    vac = Trajectory(times=[0.0, 0.5], states=[FluidState.zero(g),
                                               FluidState.zero(g).with_time(0.5)])
    recs = regularity_monitor(vac, params_vacuum)
    assert all(r.c_h2 == 0.0 and r.u_h2 == 0.0 and not r.blown_up for r in recs)
    st = constant_state(g, params_const_visc, c_val=1.0)
    steady = Trajectory(times=[0.0, 0.5], states=[st, st.with_time(0.5)])
    recs = regularity_monitor(steady, params_const_visc)
    assert abs(recs[0].c_h2 - recs[1].c_h2) <= 1e-12
    assert recs[1].ct_h1 <= 1e-12


def test_regularity_monitor_decaying_mode(params_const_visc):
    from vacns.linstep import FrozenVelocity, momentum_step
    p = params_const_visc
    g = Grid.periodic(1, 32)
    st0 = fourier_mode(g, p, k=1, amplitude=0.1)
    traj = Trajectory(times=[0.0], states=[st0])
    u = st0.u
    cfg = LinStepConfig(dt=0.02, lin_tol=1e-12)
    for i in range(1, 6):
        u = momentum_step(u, st0, FrozenVelocity.zero(g), p, cfg)
        nxt = st0.copy()
        nxt.u = u
        nxt.t = 0.02 * i
        traj.times.append(nxt.t)
        traj.states.append(nxt)
    recs = regularity_monitor(traj, p)
    u_h2 = [r.u_h2 for r in recs]
    assert all(u_h2[i + 1] < u_h2[i] for i in range(len(u_h2) - 1))
    assert recs[-1].u_d3_sq_time_integral > 0.0


def test_psi_consistency_definitional(params_const_visc):
    p = params_const_visc
    g = Grid.periodic(2, 32)
    x, y = g.meshgrid()
    c = 1.0 + 0.3 * np.sin(x) * np.sin(y)
    st = FluidState(g, c, psi_from_c(c, g, p), np.zeros(g.shape + (2,)))
    res, curl = psi_consistency(st, p)
    assert res <= 1e-12  # psi built from the definition
    assert curl <= 1e-2  # curl of a discrete quotient is O(h^2)
    flat = FluidState(g, np.full(g.shape, 2.0), np.zeros(g.shape + (2,)),
                      np.zeros(g.shape + (2,)))
    assert psi_consistency(flat, p) == (0.0, 0.0)


def test_psi_consistency_refines_on_evolved_run(params_const_visc):
    p = params_const_visc
    out = {}
    for n, dt in ((32, 0.004), (64, 0.002)):
        g = Grid.periodic(2, n)
        x, y = g.meshgrid()
        c0 = 1.0 + 0.2 * np.sin(x) * np.sin(y)
        u0 = np.zeros(g.shape + (2,))
        u0[..., 0] = 0.15 * np.sin(y)
        u0[..., 1] = 0.1 * np.sin(x)
        st0 = FluidState(g, c0, psi_from_c(c0, g, p), u0)
        traj = time_march(st0, 0.1, p, LinStepConfig(dt=dt, lin_tol=1e-12),
                          PicardConfig(window=0.01, gamma_tol=1e-14))
        assert traj.completed
        out[n] = psi_consistency(traj.final, p)
    for i, label in enumerate(("definitional", "curl")):
        factor = out[32][i] / out[64][i]
        assert factor >= 1.8, f"{label} residual refined by only {factor:.2f}"


def test_gn_ratio_degenerate_p2(grid3d):
    # p = 2 reduces to |f|_2^2 / |f|_2^2 = 1 for any nonzero field
    x = grid3d.meshgrid()[0]
    f = np.sin(x) * np.exp(np.cos(x))
    assert gn_ratio(grid3d, f, 2.0) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        gn_ratio(grid3d, f, 8.0)


def test_gn_ratio_single_mode_hand_value(grid3d):
    # int sin^6 = 5/16 V and |grad_h sin|_2^2 = (V/2)(sin h / h)^2: frozen fixture
    g = grid3d
    f = np.sin(g.meshgrid()[0])
    V, h = g.volume, g.spacing[0]
    expected = (5.0 / 16.0 * V) / ((V / 2.0) * (np.sin(h) / h) ** 2) ** 3
    assert gn_ratio(g, f, 6.0) == pytest.approx(expected, rel=1e-12)


def test_gn_audit_stabilizes(grid3d):
    base = gn_audit(grid3d, 100, seed=0)
    grown = gn_audit(grid3d, 200, seed=0)
    for p in (3.0, 4.0, 6.0):
        change = abs(grown[p] - base[p]) / base[p]
        assert change < 0.10, f"p={p} max ratio moved {change:.3f} on doubling"
        assert grown[p] >= base[p]  # maxima are monotone under corpus growth


def test_commutator_reductions(grid3d):
    g = grid3d
    x = g.meshgrid()[0]
    f = np.sin(x) * np.cos(2 * x)
    const = np.full(g.shape, 2.5)
    # constant g: grad(fg) - f grad g = g grad f exactly; ratio stays below 1
    assert commutator_ratio(g, f, const) <= 1.0
    # constant f: the commutator vanishes identically
    assert commutator_ratio(g, const, f) <= 1e-13


def test_commutator_audit_stabilizes(grid3d):
    base = commutator_audit(grid3d, 100, seed=0)["s1_r2"]
    grown = commutator_audit(grid3d, 200, seed=0)["s1_r2"]
    assert abs(grown - base) / base < 0.10
