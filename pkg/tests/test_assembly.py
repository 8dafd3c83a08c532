import numpy as np
import pytest

from hydrocrack import assembly, physics
from hydrocrack.assembly import AssemblyError, GaussPointData
from hydrocrack.core import default_iron_params
from hydrocrack.mesh import MeshError, generate_rect_mesh, geometry, quadrature_for
from hydrocrack.solver import solve_linear
from hydrocrack.verify import distorted_element, fd_jacobian

P = default_iron_params()
KINDS = ("quad4", "quad8")


def _element(kind, seed=0):
    return distorted_element(kind, np.random.default_rng(seed))


def _gp(kind, history, theta=0.0):
    ng = quadrature_for(kind).size
    return GaussPointData(history=np.full(ng, float(history)), theta=np.full(ng, float(theta)))


# --- displacement ------------------------------------------------------------------


@pytest.mark.parametrize("kind", KINDS)
def test_stiffness_scales_with_degradation(kind):
    x = _element(kind)
    n = len(x)
    _, K0 = assembly.element_displacement(x, kind, np.zeros(2 * n), np.zeros(n), P)
    _, K1 = assembly.element_displacement(x, kind, np.zeros(2 * n), np.ones(n), P)
    k = P.stiffness_floor
    assert np.allclose(K1, K0 * k / (1 + k), rtol=1e-12, atol=0)
    assert np.allclose(K0, K0.T)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_displacement_tangent_finite_difference(kind, seed):
    rng = np.random.default_rng(seed)
    x = distorted_element(kind, rng)
    n = len(x)
    u = rng.normal(scale=1e-3, size=2 * n)
    phi = rng.uniform(0, 1, n)
    r, K = assembly.element_displacement(x, kind, u, phi, P)
    J = fd_jacobian(lambda v: assembly.element_displacement(x, kind, v, phi, P)[0], u, 1e-7 * np.linalg.norm(u))
    assert np.linalg.norm(K - J) / np.linalg.norm(K) < 1e-5
    assert np.allclose(r, K @ u, rtol=1e-10, atol=1e-12 * np.abs(r).max())


def test_rigid_body_modes():
    m = generate_rect_mesh(1.0, 1.0, 2, 2, "quad8")
    K, _ = assembly.assemble_displacement(m, np.zeros(m.n_nodes), P)
    w = np.linalg.eigvalsh(K.toarray())
    scale = w.max()
    assert np.sum(np.abs(w) < 1e-10 * scale) == 3
    assert np.all(w > -1e-10 * scale)


def test_global_equilibrium_with_body_force_and_traction():
    m = generate_rect_mesh(2.0, 1.0, 4, 3, "quad4")
    f_ext = assembly.body_force_vector(m, (3.0, -1.0)) + assembly.apply_neumann(m, "right", (5.0, 2.0))
    # external resultant: b * area + t * length
    assert f_ext[0::2].sum() == pytest.approx(3.0 * 2.0 + 5.0 * 1.0)
    assert f_ext[1::2].sum() == pytest.approx(-1.0 * 2.0 + 2.0 * 1.0)
    K, _ = assembly.assemble_displacement(m, np.zeros(m.n_nodes), P)
    left = m.node_set("left")
    dofs = np.concatenate([2 * left, 2 * left + 1])
    sysm = assembly.SparseSystem(K, f_ext, assembly.element_dofs(m, "u"), np.sort(dofs), np.zeros(len(dofs)))
    A, b, _ = sysm.reduced()
    u = sysm.expand(solve_linear(A, b))
    f_int = assembly.internal_force(m, u, np.zeros(m.n_nodes), P)
    reactions = np.zeros_like(f_int)
    reactions[sysm.dirichlet_dofs] = sysm.reactions(u)
    residual = f_int - f_ext - reactions
    assert np.abs(residual).max() < 1e-9 * np.abs(f_ext).max()
    # sum of internal forces = external loads + reactions
    assert f_int.sum() == pytest.approx(f_ext.sum() + reactions.sum(), rel=1e-9, abs=1e-9)


def test_uniaxial_reaction_single_element():
    m = generate_rect_mesh(2.0, 2.0, 1, 1)
    e = 1e-4
    u = np.zeros(8)
    u[1::2] = e * m.nodes[:, 1]
    f = assembly.internal_force(m, u, np.zeros(4), P)
    c11 = physics.plane_strain_stiffness(P.young_modulus, P.poisson_ratio).c0[0, 0]
    top = m.node_set("top")
    assert f[2 * top + 1].sum() == pytest.approx((1 + P.stiffness_floor) * c11 * e * 2.0, rel=1e-12)


# --- phase field ----------------------------------------------------------------------


@pytest.mark.parametrize("kind", KINDS)
def test_phase_residual_zero_when_undamaged(kind):
    x = _element(kind)
    r, _ = assembly.element_phase(x, kind, np.zeros(len(x)), _gp(kind, 0.0), P)
    assert np.allclose(r, 0.0)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_phase_tangent_finite_difference(kind, seed):
    rng = np.random.default_rng(seed)
    x = distorted_element(kind, rng)
    phi = rng.uniform(0, 1, len(x))
    ng = quadrature_for(kind).size
    gp = GaussPointData(history=rng.uniform(0, 300, ng), theta=rng.uniform(0, 1, ng))
    _, K = assembly.element_phase(x, kind, phi, gp, P)
    J = fd_jacobian(lambda v: assembly.element_phase(x, kind, v, gp, P)[0], phi, 1e-7 * np.linalg.norm(phi))
    assert np.linalg.norm(K - J) / np.linalg.norm(K) < 1e-5


@pytest.mark.parametrize("theta", [0.0, 0.5])
def test_uniform_phase_root(theta):
    """Newton on one element with uniform H converges to 2H / (2H + Gc/l)."""
    kind = "quad4"
    x = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    H = 250.0
    gp = _gp(kind, H, theta)
    phi = np.zeros(4)
    for _ in range(5):
        r, K = assembly.element_phase(x, kind, phi, gp, P)
        phi = phi - np.linalg.solve(K, r)
    gc = physics.gc_degraded(theta, P.gc0, P.damage_coeff)
    assert np.allclose(phi, 2 * H / (2 * H + gc / P.length_scale), rtol=1e-12)


def test_update_history_branches():
    x = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    u = np.zeros(8)
    u[0::2] = 1e-3 * x[:, 0]
    c11 = physics.plane_strain_stiffness(P.young_modulus, P.poisson_ratio).c0[0, 0]
    psi = 0.5 * c11 * 1e-6
    gp = assembly.update_history(x, "quad4", u, _gp("quad4", 0.5 * psi), P)
    assert np.allclose(gp.history, psi)
    gp = assembly.update_history(x, "quad4", u, _gp("quad4", 3 * psi), P)
    assert np.allclose(gp.history, 3 * psi)
    # unloading keeps the history
    gp2 = assembly.update_history(x, "quad4", np.zeros(8), gp, P)
    assert np.allclose(gp2.history, gp.history)


# --- diffusion ---------------------------------------------------------------------------


@pytest.mark.parametrize("kind", KINDS)
def test_diffusion_element_properties(kind):
    x = _element(kind)
    n = len(x)
    rng = np.random.default_rng(4)
    sh = rng.uniform(-100, 300, n)
    Kc, M, r = assembly.element_diffusion(x, kind, np.ones(n), sh, P)
    # constant concentrations carry no diffusive flux; the drift term is what remains
    Kc0, _, _ = assembly.element_diffusion(x, kind, np.ones(n), np.zeros(n), P)
    assert np.allclose(Kc0 @ np.ones(n), 0.0, atol=1e-12)
    # columns sum to zero: the operator is conservative
    assert np.allclose(np.ones(n) @ Kc, 0.0, atol=1e-10)
    assert np.allclose(M, M.T) and np.all(np.linalg.eigvalsh(M) > 0)
    assert M.sum() == pytest.approx(geometry_area(x, kind) / P.diffusivity)
    c = rng.uniform(0, 1, n)
    _, _, r = assembly.element_diffusion(x, kind, c, sh, P)
    assert np.allclose(r, Kc @ c)


def geometry_area(x, kind):
    return assembly._single_geometry(x, kind).areas[0]


def test_diffusion_needs_positive_diffusivity():
    x = _element("quad4")
    with pytest.raises(AssemblyError):
        assembly.element_diffusion(x, "quad4", np.zeros(4), np.zeros(4), P.with_overrides(diffusivity=0.0))


def test_flux_load():
    m = generate_rect_mesh(1.0, 2.0, 2, 4, "quad8")
    f = assembly.apply_neumann(m, "right", 0.5, "c", P)
    assert f.sum() == pytest.approx(-0.5 * 2.0 / P.diffusivity)
    with pytest.raises(AssemblyError):
        assembly.apply_neumann(m, "right", 0.5, "c", None)


def test_set_without_boundary_edge():
    m = generate_rect_mesh(1.0, 1.0, 2, 2)
    m.node_sets["corner"] = np.array([0])
    with pytest.raises(MeshError):
        assembly.apply_neumann(m, "corner", (1.0, 0.0))


# --- sigma_h recovery -----------------------------------------------------------------------


@pytest.mark.parametrize("kind", KINDS)
def test_sigma_h_recovery_linear_field(kind):
    m = generate_rect_mesh(2.0, 1.0, 3, 2, kind)
    x, y = m.nodes[:, 0], m.nodes[:, 1]
    # quadratic displacement -> linear stress; exact for quad8, nodal averaging for quad4
    u = np.zeros(2 * m.n_nodes)
    a = 1e-4
    u[0::2] = a * x**2 / 2
    sh = assembly.recover_sigma_h(m, u, np.zeros(m.n_nodes), P)
    c = physics.plane_strain_stiffness(P.young_modulus, P.poisson_ratio).c0
    exact = (c[0, 0] + c[1, 0]) * a * x * (1 + P.poisson_ratio) / 3
    if kind == "quad4":
        # constant strain per element: nodal averaging is exact only at interior nodes
        inner = (x > 1e-9) & (x < 2.0 - 1e-9)
        sh, exact = sh[inner], exact[inner]
    assert np.abs(sh - exact).max() <= 1e-9 * np.abs(exact).max()


def test_sigma_h_constant_exact_quad4():
    m = generate_rect_mesh(1.0, 1.0, 3, 3)
    u = np.zeros(2 * m.n_nodes)
    u[1::2] = 1e-3 * m.nodes[:, 1]
    sh = assembly.recover_sigma_h(m, u, np.zeros(m.n_nodes), P)
    c = physics.plane_strain_stiffness(P.young_modulus, P.poisson_ratio).c0
    assert np.allclose(sh, (c[0, 1] + c[1, 1]) * 1e-3 * 1.3 / 3, rtol=1e-12)


def test_sigma_h_degraded_option():
    m = generate_rect_mesh(1.0, 1.0, 1, 1)
    u = np.zeros(8)
    u[1::2] = 1e-3 * m.nodes[:, 1]
    phi = np.full(4, 0.5)
    a = assembly.recover_sigma_h(m, u, phi, P)
    b = assembly.recover_sigma_h(m, u, phi, P, degraded=True)
    assert np.allclose(b, a * (0.25 + P.stiffness_floor))


# --- global systems -------------------------------------------------------------------------


def test_normalize_dirichlet_last_wins():
    dofs, vals = assembly.normalize_dirichlet([(3, 1.0), (1, 2.0), (3, 5.0)], 5)
    assert list(dofs) == [1, 3] and list(vals) == [2.0, 5.0]
    with pytest.raises(AssemblyError):
        assembly.normalize_dirichlet([(7, 1.0)], 5)


def test_assemble_global_shape_check():
    m = generate_rect_mesh(1.0, 1.0, 2, 2)
    with pytest.raises(AssemblyError):
        assembly.assemble_global(m, "c", np.zeros((4, 8, 8)))


def test_symmetric_elimination():
    m = generate_rect_mesh(1.0, 1.0, 2, 2)
    geo = geometry(m)
    Kc, _ = assembly.diffusion_kernel(geo, np.zeros((4, 4)), 0.0)
    sysm = assembly.assemble_global(m, "c", Kc, dirichlet=[(i, 1.0) for i in m.node_set("left")] + [(i, 0.0) for i in m.node_set("right")])
    A, b, free = sysm.reduced()
    assert abs(A - A.T).max() < 1e-14
    c = sysm.expand(solve_linear(A, b))
    assert np.allclose(c, 1.0 - m.nodes[:, 0])
