import numpy as np
import pytest

from backend.models import (
    ArchitectureFamily,
    ArchitectureSpec,
    ChannelMatrix,
    MIMOScenario,
    Parameterization,
    ScenarioConfig,
    SolveOptions,
)
from backend.harness.scenario import channel_seed, synthesize_scenario
from backend.optimizers import (
    SParameterOptimizer,
    YParameterOptimizer,
    ZParameterOptimizer,
    optimize_s_group,
    optimize_y_forest,
    optimize_z_group_mc,
    update_beamformers,
)
from backend.optimizers.alternating import received_power
from backend.optimizers.ris_steps import (
    inner_bound,
    reactance_gradient,
    s_inner_step,
    symmetric_unitary_map,
    y_inner_step,
    z_inner_step,
)
from backend.ris_service.architectures import random_feasible, validate
from backend.ris_service.channel import map_matched

from conftest import Z0, complex_normal

FULLY = ArchitectureSpec(family=ArchitectureFamily.FULLY, n_i=4)
GROUP = ArchitectureSpec(family=ArchitectureFamily.GROUP, n_i=4, group_size=2)
SINGLE = ArchitectureSpec(family=ArchitectureFamily.SINGLE, n_i=4)
TREE = ArchitectureSpec(family=ArchitectureFamily.TREE, n_i=4)
FOREST = ArchitectureSpec(family=ArchitectureFamily.FOREST, n_i=4, group_size=2)

FAST = SolveOptions(max_iterations=30, inner_iterations=20, seed=5)


def _vectors(seed, n=4):
    rng = np.random.default_rng(seed)
    return complex(complex_normal(rng, ())), complex_normal(rng, n), complex_normal(rng, n)


def _scenarios(seed=1, coupling=False):
    cfg = ScenarioConfig(n_i_list=[4], n_t=2, n_r=2, coupling=coupling,
                         architectures=[{"family": "fully"}])
    return synthesize_scenario(cfg, seed, z0=Z0)


def _is_monotone(trace):
    return all(b >= a * (1 - 1e-9) for a, b in zip(trace, trace[1:]))


# beamformers

def test_beamformers_reach_the_largest_singular_value():
    rng = np.random.default_rng(0)
    h = complex_normal(rng, (3, 2))
    w, g = update_beamformers(h)
    assert abs(g @ h @ w) == pytest.approx(np.linalg.svd(h, compute_uv=False)[0])
    assert np.linalg.norm(w) == pytest.approx(1.0)
    assert np.linalg.norm(g) == pytest.approx(1.0)
    assert w[0].imag == pytest.approx(0.0, abs=1e-12) and w[0].real > 0


def test_beamformers_accept_channel_matrix_and_rank_one():
    h = np.outer([1.0, 1j], [0.0, 2.0])
    w, g = update_beamformers(ChannelMatrix(h=h, fidelity="matched"))
    assert abs(g @ h @ w) == pytest.approx(2 * np.sqrt(2))
    assert w[1].real > 0 and abs(w[0]) < 1e-12


def test_zero_channel_gives_first_canonical_vectors():
    w, g = update_beamformers(np.zeros((3, 2)))
    assert np.array_equal(w, [1, 0])
    assert np.array_equal(g, [1, 0, 0])


# scattering step

def test_symmetric_unitary_map_sends_u_to_v():
    rng = np.random.default_rng(1)
    u = complex_normal(rng, 5)
    v = complex_normal(rng, 5)
    u, v = u / np.linalg.norm(u), v / np.linalg.norm(v)
    theta = symmetric_unitary_map(u, v)
    assert np.allclose(theta @ u, v, atol=1e-10)
    assert np.allclose(theta, theta.T, atol=1e-10)
    assert np.allclose(theta.conj().T @ theta, np.eye(5), atol=1e-10)


def test_inner_bound_grows_with_connectivity():
    s0, a, b = _vectors(2)
    assert inner_bound(s0, a, b, FULLY) >= inner_bound(s0, a, b, GROUP) >= inner_bound(s0, a, b, SINGLE)


@pytest.mark.parametrize("spec", [SINGLE, GROUP, FULLY], ids=lambda s: s.label)
def test_scattering_step_attains_the_bound(spec):
    ris = random_feasible(spec, seed=0, parameterization=Parameterization.SCATTERING, z0=Z0)
    for seed in range(50):
        s0, a, b = _vectors(100 + seed)
        out = s_inner_step(ris, s0, a, b)
        value = abs(s0 + a @ np.asarray(out.values) @ b)
        assert value == pytest.approx(inner_bound(s0, a, b, spec), rel=1e-6)
        assert validate(out).feasible


def test_single_connected_step_beats_phase_grid():
    s0, a, b = _vectors(4, n=2)
    spec = ArchitectureSpec(family=ArchitectureFamily.SINGLE, n_i=2)
    ris = random_feasible(spec, seed=0, z0=Z0)
    best = abs(s0 + a @ np.asarray(s_inner_step(ris, s0, a, b).values) @ b)
    grid = np.linspace(0, 2 * np.pi, 361)
    p1, p2 = np.meshgrid(grid, grid)
    values = np.abs(s0 + a[0] * b[0] * np.exp(1j * p1) + a[1] * b[1] * np.exp(1j * p2))
    assert values.max() <= best * (1 + 1e-12)
    assert values.max() == pytest.approx(best, rel=1e-4)


# susceptance step

@pytest.mark.parametrize("spec", [TREE, FOREST], ids=lambda s: s.label)
def test_susceptance_step_reaches_the_bound(spec):
    rng = np.random.default_rng(6)
    y_rt = complex(complex_normal(rng, ())) / Z0**2
    r = complex_normal(rng, 4) / Z0
    t = complex_normal(rng, 4) / Z0
    ris = random_feasible(spec, seed=1, z0=Z0)
    out = y_inner_step(ris, y_rt, r, t)
    b_mat = np.asarray(out.values).real
    value = abs(-y_rt + r @ np.linalg.solve(1j * b_mat + np.eye(4) / Z0, t))
    s0 = -y_rt + Z0 / 2 * (r @ t)
    assert value == pytest.approx(inner_bound(s0, Z0 / 2 * r, t, spec), rel=1e-6)
    assert validate(out).feasible


# reactance step

def _z_value(x_mat, z_rt, r, t, z_ii):
    return abs(z_rt - r @ np.linalg.solve(1j * x_mat + z_ii, t))


@pytest.mark.parametrize("spec", [SINGLE, GROUP, FULLY], ids=lambda s: s.label)
def test_reactance_step_without_coupling_attains_the_bound(spec):
    z_rt, r, t = _vectors(7)
    z_rt, r, t = z_rt * Z0, r * Z0, t * Z0
    ris = random_feasible(spec, seed=2, parameterization=Parameterization.REACTANCE, z0=Z0)
    out = z_inner_step(ris, z_rt, r, t, Z0 * np.eye(4))
    s0 = z_rt - (r @ t) / (2 * Z0)
    bound = inner_bound(s0, r / (2 * np.sqrt(Z0)), t / np.sqrt(Z0), spec)
    assert _z_value(np.asarray(out.values).real, z_rt, r, t, Z0 * np.eye(4)) == pytest.approx(bound, rel=1e-6)
    assert validate(out).feasible


def test_reactance_step_improves_under_coupling():
    z_rt, r, t = _vectors(8)
    z_rt, r, t = z_rt * Z0, r * Z0, t * Z0
    z_ii = _scenarios(coupling=True).z.blocks.ii
    ris = random_feasible(FULLY, seed=3, z0=Z0)
    out = z_inner_step(ris, z_rt, r, t, z_ii)
    before = _z_value(np.asarray(ris.values).real, z_rt, r, t, z_ii)
    assert _z_value(np.asarray(out.values).real, z_rt, r, t, z_ii) >= before
    assert validate(out).feasible


def test_reactance_gradient_matches_finite_differences():
    z_rt, r, t = _vectors(9)
    z_rt, r, t = z_rt * Z0, r * Z0, t * Z0
    rng = np.random.default_rng(10)
    c = rng.normal(scale=0.1 * Z0, size=(4, 4))
    z_ii = Z0 * np.eye(4) + 1j * (c + c.T)
    x_mat = np.asarray(random_feasible(FULLY, seed=4, z0=Z0).values).real
    grad = reactance_gradient(x_mat, z_rt, r, t, z_ii, FULLY.block_mask())

    eps = 1e-3 * Z0
    for i, j in ((0, 1), (2, 2), (1, 3)):
        step = np.zeros((4, 4))
        step[i, j] = step[j, i] = eps
        up = _z_value(x_mat + step, z_rt, r, t, z_ii) ** 2
        down = _z_value(x_mat - step, z_rt, r, t, z_ii) ** 2
        assert grad[i, j] == pytest.approx((up - down) / (2 * eps), rel=1e-4)
        assert grad[i, j] == grad[j, i]
    assert np.array_equal(grad, grad.T)


def test_reactance_gradient_respects_the_mask():
    z_rt, r, t = _vectors(11)
    x_mat = np.asarray(random_feasible(GROUP, seed=4, z0=Z0).values).real
    grad = reactance_gradient(x_mat, z_rt, r, t, Z0 * np.eye(4), GROUP.block_mask())
    assert np.all(grad[~GROUP.block_mask()] == 0)


def test_reactance_and_scattering_steps_agree_without_coupling():
    scenarios = _scenarios(seed=2)
    ris = random_feasible(FULLY, seed=5, z0=Z0)
    zb, sb = scenarios.z.blocks, scenarios.s.blocks
    w, g = update_beamformers(np.asarray(zb.ri) @ np.asarray(zb.it))

    theta0 = random_feasible(FULLY, seed=5, parameterization=Parameterization.SCATTERING, z0=Z0)
    s_ris = s_inner_step(theta0, g @ sb.rt @ w, g @ sb.ri, sb.it @ w)
    z_ris = z_inner_step(ris, g @ zb.rt @ w, g @ zb.ri, zb.it @ w, Z0 * np.eye(4))
    assert received_power(scenarios.z, z_ris, w, g) == pytest.approx(
        received_power(scenarios.s, s_ris, w, g), rel=1e-6)


# alternating optimization

@pytest.mark.parametrize("spec", [SINGLE, GROUP, FULLY], ids=lambda s: s.label)
def test_scattering_solver_is_monotone_and_feasible(spec):
    scenarios = _scenarios(seed=3)
    sol = optimize_s_group(scenarios.s, spec, FAST)
    assert _is_monotone(sol.trace)
    assert validate(sol.ris).feasible
    assert sol.iterations == len(sol.trace) <= FAST.max_iterations


@pytest.mark.parametrize("spec", [SINGLE, TREE, FOREST], ids=lambda s: s.label)
def test_admittance_solver_is_monotone_and_feasible(spec):
    scenarios = _scenarios(seed=4)
    sol = optimize_y_forest(scenarios.y, spec, FAST)
    assert _is_monotone(sol.trace)
    assert validate(sol.ris).feasible


@pytest.mark.parametrize("spec", [SINGLE, GROUP, FULLY], ids=lambda s: s.label)
def test_coupled_reactance_solver_is_monotone_and_feasible(spec):
    scenarios = _scenarios(seed=5, coupling=True)
    sol = optimize_z_group_mc(scenarios.z, spec, FAST)
    assert _is_monotone(sol.trace)
    assert validate(sol.ris).feasible
    assert sol.ris.parameterization == Parameterization.REACTANCE


def test_solution_power_is_formulation_independent():
    scenarios = _scenarios(seed=6)
    for sol in (optimize_s_group(scenarios.s, GROUP, FAST), optimize_y_forest(scenarios.y, FOREST, FAST)):
        for scn in (scenarios.z, scenarios.y, scenarios.s):
            assert received_power(scn, sol.ris, sol.w, sol.g) == pytest.approx(sol.power, rel=1e-8)


def test_solution_power_respects_the_norm_bound():
    scenarios = _scenarios(seed=7)
    sb = scenarios.s.blocks
    sol = optimize_s_group(scenarios.s, FULLY, FAST)
    gain = np.linalg.norm(sb.rt, 2) + np.linalg.norm(sb.ri, 2) * np.linalg.norm(sb.it, 2)
    assert 0 < sol.power <= scenarios.s.p_t * gain**2 * (1 + 1e-9)


def test_restarts_keep_the_best_run():
    scenarios = _scenarios(seed=8)
    opts = FAST.model_copy(update={"restarts": 3})
    optimizer = SParameterOptimizer(scenarios.s, SINGLE, opts)
    best = optimizer.solve()
    for child in np.random.SeedSequence(opts.seed).spawn(3):
        assert best.power >= optimizer.run_once(int(child.generate_state(1)[0])).power


def test_solver_is_deterministic():
    scenarios = _scenarios(seed=9)
    a = optimize_s_group(scenarios.s, GROUP, FAST)
    b = optimize_s_group(scenarios.s, GROUP, FAST)
    assert a.trace == b.trace


def test_solvers_reject_mismatched_inputs():
    plain = _scenarios(seed=10)
    coupled = _scenarios(seed=10, coupling=True)
    with pytest.raises(ValueError):
        SParameterOptimizer(plain.s, TREE)
    with pytest.raises(ValueError):
        YParameterOptimizer(plain.y, FULLY)
    with pytest.raises(ValueError):
        ZParameterOptimizer(plain.s, FULLY)
    with pytest.raises(ValueError):
        SParameterOptimizer(plain.s, ArchitectureSpec(family=ArchitectureFamily.FULLY, n_i=8))
    coupled_s = MIMOScenario(blocks=map_matched(coupled.z.blocks).s, p_t=coupled.s.p_t)
    with pytest.raises(ValueError):
        optimize_s_group(coupled_s, FULLY)


@pytest.mark.parametrize("tridiagonal,block", [(TREE, FULLY), (FOREST, GROUP)], ids=["tree", "forest"])
def test_tridiagonal_step_matches_block_step(tridiagonal, block):
    scenarios = _scenarios(seed=11)
    yb, sb = scenarios.y.blocks, scenarios.s.blocks
    w, g = update_beamformers(np.asarray(sb.ri) @ np.asarray(sb.it))
    theta0 = random_feasible(block, seed=1, parameterization=Parameterization.SCATTERING, z0=Z0)
    s_ris = s_inner_step(theta0, g @ sb.rt @ w, g @ sb.ri, sb.it @ w)
    y_ris = y_inner_step(random_feasible(tridiagonal, seed=1, z0=Z0), g @ yb.rt @ w, g @ yb.ri, yb.it @ w)
    assert received_power(scenarios.y, y_ris, w, g) == pytest.approx(
        received_power(scenarios.s, s_ris, w, g), rel=1e-6)


# coupled reactance solver

def test_repeated_reactance_steps_keep_x_symmetric():
    """At a converged point the gradient is rounding noise; X must stay on X = Xᵀ."""
    z_rt, r, t = _vectors(12)
    z_rt, r, t = z_rt * Z0, r * Z0, t * Z0
    z_ii = _scenarios(coupling=True).z.blocks.ii
    ris = random_feasible(FULLY, seed=6, z0=Z0)
    previous = 0.0
    for _ in range(30):
        ris = z_inner_step(ris, z_rt, r, t, z_ii, iterations=20)
        x_mat = np.asarray(ris.values).real
        assert np.array_equal(x_mat, x_mat.T)
        value = _z_value(x_mat, z_rt, r, t, z_ii)
        assert value >= previous
        previous = value


@pytest.mark.parametrize("spec", [SINGLE, GROUP, FULLY], ids=lambda s: s.label)
def test_coupled_reactance_solver_over_many_seeds(spec):
    opts = SolveOptions(max_iterations=50, inner_iterations=20)
    for seed in range(20):
        scenarios = _scenarios(seed=100 + seed, coupling=True)
        sol = optimize_z_group_mc(scenarios.z, spec, opts.model_copy(update={"seed": seed}))
        assert all(b >= a - 1e-12 * max(a, 1e-300) for a, b in zip(sol.trace, sol.trace[1:]))
        report = validate(sol.ris)
        assert report.feasible, report.violations
        x_mat = np.asarray(sol.ris.values).real
        assert np.array_equal(x_mat, x_mat.T)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_two_element_coupled_solver_matches_reactance_grid(seed):
    spec = ArchitectureSpec(family=ArchitectureFamily.SINGLE, n_i=2)
    cfg = ScenarioConfig(n_i_list=[2], coupling=True, architectures=[{"family": "single"}])
    scn = synthesize_scenario(cfg, 500 + seed, n_i=2, z0=Z0).z
    zb = scn.blocks
    sol = optimize_z_group_mc(scn, spec, SolveOptions(max_iterations=100, inner_iterations=30,
                                                      restarts=4, seed=seed))

    x = np.linspace(-20 * Z0, 20 * Z0, 400)
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    m = np.broadcast_to(np.asarray(zb.ii), x1.shape + (2, 2)).copy()
    m[..., 0, 0] += 1j * x1
    m[..., 1, 1] += 1j * x2
    it = np.broadcast_to(np.asarray(zb.it), x1.shape + np.asarray(zb.it).shape)
    h = (np.asarray(zb.rt) - np.asarray(zb.ri) @ np.linalg.solve(m, it)) / (2 * Z0)
    grid_best = scn.p_t * np.linalg.svd(h, compute_uv=False)[..., 0].max() ** 2
    assert sol.power >= 0.99 * grid_best


# architecture comparisons on the default geometry

def _rayleigh_scenarios(trial, n_i=16):
    cfg = ScenarioConfig(n_i_list=[n_i])
    return synthesize_scenario(cfg, channel_seed(cfg.master_seed, n_i, trial), n_i=n_i, z0=Z0)


@pytest.mark.parametrize("tridiagonal,block", [
    (ArchitectureSpec(family=ArchitectureFamily.TREE, n_i=16),
     ArchitectureSpec(family=ArchitectureFamily.FULLY, n_i=16)),
    (ArchitectureSpec(family=ArchitectureFamily.FOREST, n_i=16, group_size=4),
     ArchitectureSpec(family=ArchitectureFamily.GROUP, n_i=16, group_size=4)),
], ids=["tree-vs-fully", "forest-vs-group"])
def test_tridiagonal_solver_matches_block_solver_on_average(tridiagonal, block):
    opts = SolveOptions(max_iterations=50, inner_iterations=20, restarts=3, seed=1)
    y_powers, s_powers = [], []
    for trial in range(20):
        scenarios = _rayleigh_scenarios(trial)
        y_powers.append(optimize_y_forest(scenarios.y, tridiagonal, opts).power)
        s_powers.append(optimize_s_group(scenarios.s, block, opts).power)
    assert np.mean(y_powers) == pytest.approx(np.mean(s_powers), rel=1e-2)


def test_connectivity_ordering_per_seed():
    specs = [ArchitectureSpec(family=ArchitectureFamily.SINGLE, n_i=16),
             ArchitectureSpec(family=ArchitectureFamily.GROUP, n_i=16, group_size=4),
             ArchitectureSpec(family=ArchitectureFamily.FULLY, n_i=16)]
    opts = SolveOptions(max_iterations=50, inner_iterations=20, seed=2)
    for trial in range(10):
        scn = _rayleigh_scenarios(trial).s
        single = optimize_s_group(scn, specs[0], opts)
        group = optimize_s_group(scn, specs[1], opts, start=single.ris)
        fully = optimize_s_group(scn, specs[2], opts, start=group.ris)
        assert group.power >= single.power * (1 - 1e-6)
        assert fully.power >= group.power * (1 - 1e-6)


def test_start_must_fit_the_architecture():
    scenarios = _scenarios(seed=12)
    fully = optimize_s_group(scenarios.s, FULLY, FAST)
    with pytest.raises(ValueError):
        optimize_s_group(scenarios.s, SINGLE, FAST, start=fully.ris)
