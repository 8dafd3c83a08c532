"""Element kernels, global sparse assembly and hydrostatic-stress recovery.

The kernels work on whole batches of elements at once: arrays carry a
leading element axis ``e`` and a quadrature axis ``g``.  The single-element
functions (``element_displacement`` and friends) call the same kernels with
a batch of one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from . import physics
from .core import MaterialParams
from .mesh import (
    ElementGeometry,
    Mesh,
    MeshError,
    compute_geometry,
    gauss_legendre_1d,
    geometry,
    quadrature_for,
    shape_functions,
)


class AssemblyError(ValueError):
    pass


# --- batched kernels ----------------------------------------------------------


def strain_operator(dNdx: np.ndarray) -> np.ndarray:
    """B_u for every quadrature point: (e, g, 3, 2n)."""
    e, g, n, _ = dNdx.shape
    B = np.zeros((e, g, 3, 2 * n))
    B[..., 0, 0::2] = dNdx[..., 0]
    B[..., 1, 1::2] = dNdx[..., 1]
    B[..., 2, 0::2] = dNdx[..., 1]
    B[..., 2, 1::2] = dNdx[..., 0]
    return B


def gauss_strains(geo: ElementGeometry, u_el: np.ndarray) -> np.ndarray:
    """Voigt strains (e, g, 3) from element displacements (e, n, 2)."""
    dx = geo.dNdx[..., 0]
    dy = geo.dNdx[..., 1]
    ux = u_el[..., 0]
    uy = u_el[..., 1]
    exx = np.einsum("egn,en->eg", dx, ux)
    eyy = np.einsum("egn,en->eg", dy, uy)
    gxy = np.einsum("egn,en->eg", dy, ux) + np.einsum("egn,en->eg", dx, uy)
    return np.stack([exx, eyy, gxy], axis=-1)


def displacement_kernel(geo, c0, phi_el, k, u_el=None, with_matrix=True):
    """Degraded elastic stiffness and internal force of each element.

    Returns ``(K, r)`` with K of shape (e, 2n, 2n) (None when
    ``with_matrix`` is False) and r of shape (e, 2n) (None without ``u_el``).
    """
    g = physics.degradation(phi_el @ geo.N.T, k)  # (e, g)
    scale = g * geo.wdet
    B = strain_operator(geo.dNdx)
    K = None
    if with_matrix:
        CB = np.einsum("ij,egjb->egib", c0, B)
        K = np.einsum("eg,egia,egib->eab", scale, B, CB, optimize=True)
    r = None
    if u_el is not None:
        eps = gauss_strains(geo, u_el)
        sig = eps @ c0.T
        r = np.einsum("eg,egia,egi->ea", scale, B, sig, optimize=True)
    return K, r


def phase_kernel(geo, phi_el, history, gc, ell):
    """Phase-field residual (e, n) and tangent (e, n, n).

    ``history`` and ``gc`` are per quadrature point, shape (e, g).
    """
    N = geo.N
    phi_g = phi_el @ N.T
    grad = np.einsum("egnd,en->egd", geo.dNdx, phi_el)
    w = geo.wdet
    mass_coef = (2.0 * history + gc / ell) * w
    K = np.einsum("eg,ga,gb->eab", mass_coef, N, N, optimize=True)
    K += np.einsum("eg,egad,egbd->eab", gc * ell * w, geo.dNdx, geo.dNdx, optimize=True)
    src = (-2.0 * (1.0 - phi_g) * history + gc * phi_g / ell) * w
    r = np.einsum("eg,ga->ea", src, N)
    r += np.einsum("eg,egad,egd->ea", gc * ell * w, geo.dNdx, grad, optimize=True)
    return r, K


def diffusion_kernel(geo, sigma_h_el, drift_coef, diffusivity=None):
    """Diffusivity matrix with stress drift and, optionally, capacity matrix.

    ``drift_coef`` is V_H / (R T).  Returns ``(Kc, M)`` with M None when
    ``diffusivity`` is None.
    """
    w = geo.wdet
    grad_s = np.einsum("egnd,en->egd", geo.dNdx, sigma_h_el)
    Kc = np.einsum("eg,egad,egbd->eab", w, geo.dNdx, geo.dNdx, optimize=True)
    Kc -= drift_coef * np.einsum("eg,egad,egd,gb->eab", w, geo.dNdx, grad_s, geo.N, optimize=True)
    M = None
    if diffusivity is not None:
        if diffusivity <= 0:
            raise AssemblyError("capacity matrix requires a positive diffusivity")
        M = np.einsum("eg,ga,gb->eab", w / diffusivity, geo.N, geo.N, optimize=True)
    return Kc, M


def gauss_values(geo: ElementGeometry, nodal_el: np.ndarray) -> np.ndarray:
    return nodal_el @ geo.N.T


# --- single-element interface -------------------------------------------------


def _single_geometry(coords, kind):
    coords = np.asarray(coords, dtype=float)
    n = coords.shape[0]
    return compute_geometry(coords, np.arange(n)[None, :], kind)


def element_displacement(coords, kind, u_nodal, phi_nodal, params: MaterialParams):
    """Internal force r_u and tangent K_u of one element.

    ``u_nodal`` holds interleaved (x, y) displacements.
    """
    geo = _single_geometry(coords, kind)
    c0 = physics.plane_strain_stiffness(params.young_modulus, params.poisson_ratio).c0
    u_el = np.asarray(u_nodal, dtype=float).reshape(1, -1, 2)
    phi_el = np.asarray(phi_nodal, dtype=float)[None, :]
    K, r = displacement_kernel(geo, c0, phi_el, params.stiffness_floor, u_el)
    return r[0], K[0]


@dataclass
class GaussPointData:
    """Quadrature point state of one element (arrays of length n_gauss)."""

    history: np.ndarray
    theta: np.ndarray
    sigma_h: Optional[np.ndarray] = None
    strain: Optional[np.ndarray] = None


def element_phase(coords, kind, phi_nodal, gp: GaussPointData, params: MaterialParams):
    """Phase-field residual r_phi and tangent K_phi of one element."""
    geo = _single_geometry(coords, kind)
    gc = physics.gc_degraded(np.asarray(gp.theta, dtype=float), params.gc0, params.damage_coeff, params.gc_floor_fraction)
    r, K = phase_kernel(
        geo,
        np.asarray(phi_nodal, dtype=float)[None, :],
        np.asarray(gp.history, dtype=float)[None, :],
        np.asarray(gc, dtype=float)[None, :],
        params.length_scale,
    )
    return r[0], K[0]


def update_history(coords, kind, u_nodal, gp: GaussPointData, params: MaterialParams) -> GaussPointData:
    """History update H <- max(H, psi_0(eps(u))) at each quadrature point."""
    geo = _single_geometry(coords, kind)
    stiff = physics.plane_strain_stiffness(params.young_modulus, params.poisson_ratio)
    eps = gauss_strains(geo, np.asarray(u_nodal, dtype=float).reshape(1, -1, 2))[0]
    psi = physics.strain_energy_density(eps, stiff)
    return GaussPointData(
        history=np.maximum(np.asarray(gp.history, dtype=float), psi),
        theta=gp.theta,
        sigma_h=gp.sigma_h,
        strain=eps,
    )


def element_diffusion(coords, kind, c_nodal, sigma_h_nodal, params: MaterialParams, c_rate=None):
    """Diffusivity K_c, capacity M and residual contribution of one element.

    The residual is ``K_c c + M dc/dt`` (boundary flux is assembled
    separately by :func:`apply_neumann`).
    """
    if params.diffusivity <= 0:
        raise AssemblyError("diffusivity must be positive to form the capacity matrix")
    geo = _single_geometry(coords, kind)
    Kc, M = diffusion_kernel(
        geo, np.asarray(sigma_h_nodal, dtype=float)[None, :], params.molar_volume / params.rt, params.diffusivity
    )
    c = np.asarray(c_nodal, dtype=float)
    r = Kc[0] @ c
    if c_rate is not None:
        r = r + M[0] @ np.asarray(c_rate, dtype=float)
    return Kc[0], M[0], r


# --- hydrostatic stress recovery ------------------------------------------------


def extrapolation_matrix(kind: str) -> np.ndarray:
    """Least-squares map from quadrature-point values to element nodes.

    For quad4 with 2x2 Gauss points this is the exact inverse of the
    interpolation matrix.
    """
    rule = quadrature_for(kind)
    N, _ = shape_functions(kind, rule.points[:, 0], rule.points[:, 1])
    return np.linalg.pinv(N)


def gauss_sigma_h(mesh: Mesh, u, phi, params: MaterialParams, degraded: bool = False) -> np.ndarray:
    geo = geometry(mesh)
    stiff = physics.plane_strain_stiffness(params.young_modulus, params.poisson_ratio)
    u_el = np.asarray(u, dtype=float).reshape(-1, 2)[mesh.elements]
    sig = gauss_strains(geo, u_el) @ stiff.c0.T
    sh = stiff.hydrostatic(sig)
    if degraded:
        sh = sh * physics.degradation(gauss_values(geo, np.asarray(phi)[mesh.elements]), params.stiffness_floor)
    return sh


def nodal_average(mesh: Mesh, element_nodal: np.ndarray) -> np.ndarray:
    """Area-weighted average of element-wise nodal values (e, n) -> (n_nodes,)."""
    area = geometry(mesh).areas
    idx = mesh.elements.ravel()
    w = np.repeat(area, mesh.nodes_per_element)
    num = np.bincount(idx, weights=(element_nodal * area[:, None]).ravel(), minlength=mesh.n_nodes)
    den = np.bincount(idx, weights=w, minlength=mesh.n_nodes)
    out = np.zeros(mesh.n_nodes)
    used = den > 0
    out[used] = num[used] / den[used]
    return out


def recover_sigma_h(mesh: Mesh, u_nodal, phi_nodal, params: MaterialParams, degraded: bool = False) -> np.ndarray:
    """Nodal hydrostatic stress recovered from the quadrature points.

    By default the undamaged stress is used; ``degraded=True`` scales it
    with g(phi).
    """
    sh = gauss_sigma_h(mesh, u_nodal, phi_nodal, params, degraded)
    E = extrapolation_matrix(mesh.kind)
    return nodal_average(mesh, sh @ E.T)


# --- global assembly -----------------------------------------------------------


def element_dofs(mesh: Mesh, field_kind: str) -> np.ndarray:
    if field_kind == "u":
        els = mesh.elements
        dofs = np.empty((els.shape[0], 2 * els.shape[1]), dtype=np.int64)
        dofs[:, 0::2] = 2 * els
        dofs[:, 1::2] = 2 * els + 1
        return dofs
    if field_kind in ("phi", "c"):
        return mesh.elements
    raise AssemblyError(f"unknown field kind {field_kind!r}")


def n_dofs(mesh: Mesh, field_kind: str) -> int:
    return 2 * mesh.n_nodes if field_kind == "u" else mesh.n_nodes


@dataclass
class SparseSystem:
    """Assembled global matrix and right-hand side with Dirichlet data."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    dof_map: np.ndarray
    dirichlet_dofs: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    dirichlet_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def free_dofs(self) -> np.ndarray:
        mask = np.ones(self.size, dtype=bool)
        mask[self.dirichlet_dofs] = False
        return np.where(mask)[0]

    def reduced(self):
        """Symmetrically eliminated system ``(A_ff, b_f - A_fc x_c)``."""
        free = self.free_dofs
        x_c = np.zeros(self.size)
        x_c[self.dirichlet_dofs] = self.dirichlet_values
        A = self.matrix
        b = self.rhs[free] - (A @ x_c)[free]
        return A[free][:, free].tocsc(), b, free

    def expand(self, x_free: np.ndarray) -> np.ndarray:
        x = np.zeros(self.size)
        x[self.dirichlet_dofs] = self.dirichlet_values
        x[self.free_dofs] = x_free
        return x

    def reactions(self, x: np.ndarray) -> np.ndarray:
        """A x - b on the constrained dofs."""
        return (self.matrix @ x - self.rhs)[self.dirichlet_dofs]


def scatter_matrix(dof_map: np.ndarray, blocks: np.ndarray, size: int) -> sp.csr_matrix:
    m = dof_map.shape[1]
    rows = np.repeat(dof_map, m, axis=1).ravel()
    cols = np.tile(dof_map, (1, m)).ravel()
    A = sp.coo_matrix((blocks.ravel(), (rows, cols)), shape=(size, size)).tocsr()
    A.sum_duplicates()
    return A


def scatter_vector(dof_map: np.ndarray, blocks: np.ndarray, size: int) -> np.ndarray:
    return np.bincount(dof_map.ravel(), weights=blocks.ravel(), minlength=size)


def normalize_dirichlet(dirichlet, size: int):
    """Merge (dof, value) pairs; the last entry wins for repeated dofs."""
    if dirichlet is None:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    if isinstance(dirichlet, tuple) and len(dirichlet) == 2 and isinstance(dirichlet[0], np.ndarray):
        dofs, vals = dirichlet
    else:
        pairs = list(dirichlet)
        dofs = np.array([p[0] for p in pairs], dtype=np.int64)
        vals = np.array([p[1] for p in pairs], dtype=float)
    dofs = np.asarray(dofs, dtype=np.int64)
    vals = np.asarray(vals, dtype=float)
    if dofs.size and (dofs.min() < 0 or dofs.max() >= size):
        raise AssemblyError("Dirichlet dof outside the system")
    # keep last occurrence
    rev_u, rev_idx = np.unique(dofs[::-1], return_index=True)
    return rev_u, vals[::-1][rev_idx]


def assemble_global(mesh: Mesh, field_kind: str, element_matrices, element_vectors=None, dirichlet=None, extra_rhs=None) -> SparseSystem:
    """Scatter-add element contributions into a global system.

    ``element_vectors`` are added to the right-hand side (external loads)
    and ``extra_rhs`` is a global vector added on top.
    """
    dof_map = element_dofs(mesh, field_kind)
    size = n_dofs(mesh, field_kind)
    element_matrices = np.asarray(element_matrices)
    if element_matrices.shape[0] != dof_map.shape[0] or element_matrices.shape[1] != dof_map.shape[1]:
        raise AssemblyError(
            f"element contributions of shape {element_matrices.shape[1:]} do not match the {field_kind!r} dof map"
        )
    A = scatter_matrix(dof_map, element_matrices, size)
    b = np.zeros(size)
    if element_vectors is not None:
        b += scatter_vector(dof_map, np.asarray(element_vectors), size)
    if extra_rhs is not None:
        b += extra_rhs
    dofs, vals = normalize_dirichlet(dirichlet, size)
    return SparseSystem(A, b, dof_map, dofs, vals)


# --- boundary loads -----------------------------------------------------------


def set_edges(mesh: Mesh, set_name: str) -> np.ndarray:
    """Boundary edges whose nodes all belong to the named node set."""
    ids = mesh.node_set(set_name)
    member = np.zeros(mesh.n_nodes, dtype=bool)
    member[ids] = True
    edges = mesh.boundary_edges()
    on = member[edges].all(axis=1)
    if not on.any():
        raise MeshError(f"node set {set_name!r} does not cover any boundary edge")
    return edges[on]


def _edge_rule(nen: int):
    s, w = gauss_legendre_1d(2 if nen == 2 else 3)
    if nen == 2:
        N = np.column_stack([(1 - s) / 2, (1 + s) / 2])
        dN = np.tile([-0.5, 0.5], (len(s), 1))
    else:
        # order: end a, end b, middle
        N = np.column_stack([s * (s - 1) / 2, s * (s + 1) / 2, 1 - s**2])
        dN = np.column_stack([s - 0.5, s + 0.5, -2 * s])
    return N, dN, w


def edge_integrals(mesh: Mesh, set_name: str):
    """Consistent edge weights: returns (edges, W) with W[k, a] = int N_a dS."""
    edges = set_edges(mesh, set_name)
    N, dN, w = _edge_rule(edges.shape[1])
    X = mesh.nodes[edges]  # (m, nen, 2)
    tang = np.einsum("ga,mad->mgd", dN, X)
    jac = np.linalg.norm(tang, axis=2)
    W = np.einsum("ga,mg,g->ma", N, jac, w)
    return edges, W


def apply_neumann(mesh: Mesh, boundary_set: str, value, field_kind: str = "u", params: Optional[MaterialParams] = None) -> np.ndarray:
    """Consistent nodal loads of a uniform traction or hydrogen flux.

    For ``field_kind="u"`` ``value`` is a traction vector (tx, ty) and the
    result has 2 entries per node.  For ``"c"`` ``value`` is the outward
    flux q and the result is -(1/D) int N q dS.
    """
    edges, W = edge_integrals(mesh, boundary_set)
    if field_kind == "u":
        t = np.asarray(value, dtype=float).reshape(2)
        f = np.zeros(2 * mesh.n_nodes)
        for d in range(2):
            f += np.bincount(2 * edges.ravel() + d, weights=(W * t[d]).ravel(), minlength=2 * mesh.n_nodes)
        return f
    if field_kind == "c":
        q = float(value)
        if q == 0.0:
            return np.zeros(mesh.n_nodes)
        if params is None or params.diffusivity <= 0:
            raise AssemblyError("a flux boundary condition needs a positive diffusivity")
        return np.bincount(edges.ravel(), weights=(-q / params.diffusivity * W).ravel(), minlength=mesh.n_nodes)
    raise AssemblyError(f"Neumann data not supported for field {field_kind!r}")


def body_force_vector(mesh: Mesh, b) -> np.ndarray:
    """Consistent nodal forces of a uniform body force b = (bx, by)."""
    geo = geometry(mesh)
    b = np.asarray(b, dtype=float).reshape(2)
    wN = np.einsum("eg,ga->ea", geo.wdet, geo.N)
    f = np.zeros(2 * mesh.n_nodes)
    for d in range(2):
        f += np.bincount(2 * mesh.elements.ravel() + d, weights=(wN * b[d]).ravel(), minlength=2 * mesh.n_nodes)
    return f


# --- global operators used by the solver ----------------------------------------


def assemble_displacement(mesh: Mesh, phi, params: MaterialParams, u=None, with_matrix=True):
    geo = geometry(mesh)
    c0 = physics.plane_strain_stiffness(params.young_modulus, params.poisson_ratio).c0
    phi_el = np.asarray(phi, dtype=float)[mesh.elements]
    u_el = None if u is None else np.asarray(u, dtype=float).reshape(-1, 2)[mesh.elements]
    K, r = displacement_kernel(geo, c0, phi_el, params.stiffness_floor, u_el, with_matrix)
    dof_map = element_dofs(mesh, "u")
    size = 2 * mesh.n_nodes
    A = scatter_matrix(dof_map, K, size) if K is not None else None
    f = scatter_vector(dof_map, r, size) if r is not None else None
    return A, f


def internal_force(mesh: Mesh, u, phi, params: MaterialParams) -> np.ndarray:
    _, f = assemble_displacement(mesh, phi, params, u, with_matrix=False)
    return f


def gauss_psi0(mesh: Mesh, u, params: MaterialParams) -> np.ndarray:
    geo = geometry(mesh)
    stiff = physics.plane_strain_stiffness(params.young_modulus, params.poisson_ratio)
    eps = gauss_strains(geo, np.asarray(u, dtype=float).reshape(-1, 2)[mesh.elements])
    return physics.strain_energy_density(eps, stiff)


def gauss_coverage(mesh: Mesh, c, params: MaterialParams) -> np.ndarray:
    geo = geometry(mesh)
    return physics.coverage_from_wtppm(gauss_values(geo, np.asarray(c, dtype=float)[mesh.elements]), params)


def assemble_phase(mesh: Mesh, phi, history, gc, ell: float):
    """Global phase-field tangent and residual for Gauss-point H and Gc."""
    geo = geometry(mesh)
    phi_el = np.asarray(phi, dtype=float)[mesh.elements]
    r, K = phase_kernel(geo, phi_el, history, gc, ell)
    A = scatter_matrix(mesh.elements, K, mesh.n_nodes)
    return A, scatter_vector(mesh.elements, r, mesh.n_nodes)


def assemble_diffusion(mesh: Mesh, sigma_h, params: MaterialParams, with_capacity: bool):
    geo = geometry(mesh)
    Kc, M = diffusion_kernel(
        geo,
        np.asarray(sigma_h, dtype=float)[mesh.elements],
        params.molar_volume / params.rt,
        params.diffusivity if with_capacity else None,
    )
    dof_map = mesh.elements
    A = scatter_matrix(dof_map, Kc, mesh.n_nodes)
    Mg = scatter_matrix(dof_map, M, mesh.n_nodes) if M is not None else None
    return A, Mg


def integrate_nodal(mesh: Mesh, values) -> float:
    """Integral over the domain of a nodal scalar field."""
    geo = geometry(mesh)
    return float(np.sum(gauss_values(geo, np.asarray(values, dtype=float)[mesh.elements]) * geo.wdet))


def surface_energy(mesh: Mesh, phi, gc_gauss, ell: float) -> float:
    """int Gc(theta) gamma_l(phi) dV with Gc given per quadrature point."""
    geo = geometry(mesh)
    phi_el = np.asarray(phi, dtype=float)[mesh.elements]
    pg = gauss_values(geo, phi_el)
    grad = np.einsum("egnd,en->egd", geo.dNdx, phi_el)
    gamma = pg**2 / (2 * ell) + 0.5 * ell * np.sum(grad**2, axis=-1)
    return float(np.sum(gc_gauss * gamma * geo.wdet))
