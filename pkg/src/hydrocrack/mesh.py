"""Quadrilateral meshes, shape functions, quadrature and mesh generation.

Elements are 4-node bilinear (``quad4``) or 8-node serendipity (``quad8``)
quadrilaterals.  Connectivity is counter-clockwise with the mid-side nodes
of ``quad8`` listed after the corners (edge 1-2, 2-3, 3-4, 4-1).  Node and
element indices are zero-based in memory and one-based in files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence

import numpy as np

NODES_PER_ELEMENT = {"quad4": 4, "quad8": 8}

# corner pairs of the element edges (local numbering), plus mid-side node for quad8
_EDGES4 = ((0, 1), (1, 2), (2, 3), (3, 0))
_EDGES8 = ((0, 1, 4), (1, 2, 5), (2, 3, 6), (3, 0, 7))

_REF_NODES = {
    "quad4": np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float),
    "quad8": np.array(
        [[-1, -1], [1, -1], [1, 1], [-1, 1], [0, -1], [1, 0], [0, 1], [-1, 0]],
        dtype=float,
    ),
}


class MeshError(ValueError):
    """Invalid mesh data or a reference to a missing mesh entity."""


class MeshParseError(MeshError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


class MeshQualityError(MeshError):
    """Non-positive Jacobian determinant."""


# --- quadrature ---------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (n, 2)
    weights: np.ndarray  # (n,)
    order: int  # highest polynomial degree per direction integrated exactly

    @property
    def size(self) -> int:
        return len(self.weights)


def gauss_legendre_1d(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def gauss_rule(n: int) -> QuadratureRule:
    """Tensor-product n x n Gauss-Legendre rule on the bi-unit square."""
    x, w = gauss_legendre_1d(n)
    xi, eta = np.meshgrid(x, x, indexing="xy")
    ww = np.outer(w, w)
    pts = np.column_stack([xi.ravel(), eta.ravel()])
    return QuadratureRule(points=pts, weights=ww.ravel(), order=2 * n - 1)


def quadrature_for(kind: str) -> QuadratureRule:
    """Full integration: 2x2 for quad4, 3x3 for quad8."""
    _check_kind(kind)
    return gauss_rule(2 if kind == "quad4" else 3)


def _check_kind(kind: str) -> None:
    if kind not in NODES_PER_ELEMENT:
        raise MeshError(f"unknown element kind {kind!r}")


# --- shape functions ----------------------------------------------------------


def shape_functions(kind: str, xi, eta):
    """Shape function values and reference-space gradients.

    Returns ``(N, dN)`` with ``N`` of shape ``(n,)`` and ``dN`` of shape
    ``(n, 2)`` holding dN/dxi and dN/deta.  ``xi`` and ``eta`` may also be
    arrays of equal shape, in which case a leading axis is added.
    """
    _check_kind(kind)
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    ref = _REF_NODES[kind]
    xa, ya = ref[:, 0], ref[:, 1]
    x = xi[..., None]
    y = eta[..., None]
    if kind == "quad4":
        N = 0.25 * (1 + xa * x) * (1 + ya * y)
        dx = 0.25 * xa * (1 + ya * y)
        dy = 0.25 * ya * (1 + xa * x)
    else:
        N = np.empty(np.broadcast_shapes(x.shape, (8,)))
        dx = np.empty_like(N)
        dy = np.empty_like(N)
        xc, yc = xa[:4], ya[:4]
        N[..., :4] = 0.25 * (1 + xc * x) * (1 + yc * y) * (xc * x + yc * y - 1)
        dx[..., :4] = 0.25 * xc * (1 + yc * y) * (2 * xc * x + yc * y)
        dy[..., :4] = 0.25 * yc * (1 + xc * x) * (xc * x + 2 * yc * y)
        # mid-side nodes on eta = +-1 (xi_a = 0)
        for a in (4, 6):
            yb = ya[a]
            N[..., a] = 0.5 * (1 - x[..., 0] ** 2) * (1 + yb * y[..., 0])
            dx[..., a] = -x[..., 0] * (1 + yb * y[..., 0])
            dy[..., a] = 0.5 * yb * (1 - x[..., 0] ** 2)
        # mid-side nodes on xi = +-1 (eta_a = 0)
        for a in (5, 7):
            xb = xa[a]
            N[..., a] = 0.5 * (1 + xb * x[..., 0]) * (1 - y[..., 0] ** 2)
            dx[..., a] = 0.5 * xb * (1 - y[..., 0] ** 2)
            dy[..., a] = -(1 + xb * x[..., 0]) * y[..., 0]
    return N, np.stack([dx, dy], axis=-1)


def reference_nodes(kind: str) -> np.ndarray:
    _check_kind(kind)
    return _REF_NODES[kind].copy()


def bmatrices(coords, kind: str, xi: float, eta: float, element_id: Optional[int] = None):
    """Strain-displacement and scalar-gradient matrices at one point.

    Parameters
    ----------
    coords : (n, 2) array
        Nodal coordinates of the element.
    kind : str
        ``"quad4"`` or ``"quad8"``.

    Returns
    -------
    B_u : (3, 2n) array
        Maps interleaved nodal displacements to Voigt strain with
        engineering shear.
    B_s : (2, n) array
        Maps nodal scalars to their physical gradient.
    detJ : float
    """
    coords = np.asarray(coords, dtype=float)
    _, dN = shape_functions(kind, xi, eta)
    J = dN.T @ coords  # J[a, b] = dx_b / dxi_a
    detJ = float(np.linalg.det(J))
    if detJ <= 0:
        label = "" if element_id is None else f" {element_id + 1}"
        raise MeshQualityError(f"element{label} has non-positive Jacobian determinant {detJ:.3e}")
    B_s = np.linalg.solve(J, dN.T)
    n = coords.shape[0]
    B_u = np.zeros((3, 2 * n))
    B_u[0, 0::2] = B_s[0]
    B_u[1, 1::2] = B_s[1]
    B_u[2, 0::2] = B_s[1]
    B_u[2, 1::2] = B_s[0]
    return B_u, B_s, detJ


# --- mesh ---------------------------------------------------------------------


@dataclass
class Mesh:
    nodes: np.ndarray  # (n_nodes, 2)
    elements: np.ndarray  # (n_elements, 4|8), zero-based
    kind: str
    node_sets: Dict[str, np.ndarray] = field(default_factory=dict)
    element_sets: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float)
        self.elements = np.ascontiguousarray(self.elements, dtype=np.int64)
        self.node_sets = {k: np.asarray(v, dtype=np.int64) for k, v in self.node_sets.items()}
        self.element_sets = {k: np.asarray(v, dtype=np.int64) for k, v in self.element_sets.items()}
        _check_kind(self.kind)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def nodes_per_element(self) -> int:
        return NODES_PER_ELEMENT[self.kind]

    def node_set(self, name: str) -> np.ndarray:
        try:
            return self.node_sets[name]
        except KeyError:
            raise MeshError(f"node set {name!r} is not defined on the mesh") from None

    def validate(self) -> None:
        n = self.nodes_per_element
        if self.elements.ndim != 2 or self.elements.shape[1] != n:
            raise MeshError(f"{self.kind} connectivity must have {n} columns")
        if self.elements.size and (self.elements.min() < 0 or self.elements.max() >= self.n_nodes):
            bad = np.where((self.elements < 0) | (self.elements >= self.n_nodes))[0][0]
            raise MeshError(f"element {bad + 1} references a node outside 1..{self.n_nodes}")
        for name, ids in self.node_sets.items():
            if ids.size and (ids.min() < 0 or ids.max() >= self.n_nodes):
                raise MeshError(f"node set {name!r} references a node outside 1..{self.n_nodes}")
        geometry(self)  # raises MeshQualityError on inverted elements

    def bounding_box(self) -> tuple[float, float, float, float]:
        lo = self.nodes.min(axis=0)
        hi = self.nodes.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def edge_lengths(self) -> np.ndarray:
        """(n_elements, 4) lengths of the straight corner-to-corner edges."""
        c = self.nodes[self.elements[:, :4]]
        return np.linalg.norm(c - np.roll(c, -1, axis=1), axis=2)

    def centroids(self) -> np.ndarray:
        return self.nodes[self.elements[:, :4]].mean(axis=1)

    def boundary_edges(self) -> np.ndarray:
        """Element edges used by exactly one element.

        Returns an int array of shape (m, 2) or (m, 3) holding node ids in
        element (counter-clockwise) order; for quad8 the third entry is the
        mid-side node.
        """
        return self._boundary_edges

    @cached_property
    def _boundary_edges(self) -> np.ndarray:
        local = _EDGES4 if self.kind == "quad4" else _EDGES8
        edges = np.concatenate([self.elements[:, list(e)] for e in local], axis=0)
        key = np.sort(edges[:, :2], axis=1)
        _, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
        return edges[counts[inv.ravel()] == 1]

    def equals(self, other: "Mesh") -> bool:
        if self.kind != other.kind:
            return False
        if not (np.array_equal(self.nodes, other.nodes) and np.array_equal(self.elements, other.elements)):
            return False
        if set(self.node_sets) != set(other.node_sets):
            return False
        return all(np.array_equal(np.sort(self.node_sets[k]), np.sort(other.node_sets[k])) for k in self.node_sets)


# --- per-element geometry cache ---------------------------------------------


@dataclass
class ElementGeometry:
    """Quadrature data for every element of a mesh.

    Attributes
    ----------
    N : (n_gauss, n) shape functions at the quadrature points.
    dNdx : (n_elements, n_gauss, n, 2) physical gradients.
    detJ, wdet : (n_elements, n_gauss) Jacobian and weight * Jacobian.
    xg : (n_elements, n_gauss, 2) quadrature point coordinates.
    """

    rule: QuadratureRule
    N: np.ndarray
    dNdx: np.ndarray
    detJ: np.ndarray
    wdet: np.ndarray
    xg: np.ndarray

    @property
    def n_gauss(self) -> int:
        return self.rule.size

    @property
    def areas(self) -> np.ndarray:
        return self.wdet.sum(axis=1)


def compute_geometry(nodes: np.ndarray, elements: np.ndarray, kind: str) -> ElementGeometry:
    rule = quadrature_for(kind)
    N, dN = shape_functions(kind, rule.points[:, 0], rule.points[:, 1])  # (g, n), (g, n, 2)
    X = nodes[elements]  # (e, n, 2)
    J = np.einsum("gna,enb->egab", dN, X)
    detJ = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    if np.any(detJ <= 0):
        bad = int(np.where((detJ <= 0).any(axis=1))[0][0])
        raise MeshQualityError(
            f"element {bad + 1} has non-positive Jacobian determinant {detJ[bad].min():.3e}"
        )
    inv = np.empty_like(J)
    inv[..., 0, 0] = J[..., 1, 1]
    inv[..., 1, 1] = J[..., 0, 0]
    inv[..., 0, 1] = -J[..., 0, 1]
    inv[..., 1, 0] = -J[..., 1, 0]
    inv /= detJ[..., None, None]
    # dN/dx_b = sum_a dN/dxi_a * (J^-1)_{b a}
    dNdx = np.einsum("gna,egba->egnb", dN, inv)
    wdet = detJ * rule.weights[None, :]
    xg = np.einsum("gn,end->egd", N, X)
    return ElementGeometry(rule=rule, N=N, dNdx=dNdx, detJ=detJ, wdet=wdet, xg=xg)


_GEOMETRY_CACHE: Dict[int, tuple] = {}


def geometry(mesh: Mesh) -> ElementGeometry:
    """Cached quadrature data of ``mesh``."""
    key = id(mesh)
    hit = _GEOMETRY_CACHE.get(key)
    if hit is not None and hit[0] is mesh.nodes and hit[1] is mesh.elements:
        return hit[2]
    geo = compute_geometry(mesh.nodes, mesh.elements, mesh.kind)
    _GEOMETRY_CACHE[key] = (mesh.nodes, mesh.elements, geo)
    return geo


# --- generation ---------------------------------------------------------------


@dataclass(frozen=True)
class RefinementBand:
    """Axis-aligned rectangle in which element edges must not exceed ``h``."""

    x0: float
    x1: float
    y0: float
    y1: float
    h: float


def graded_coordinates(
    a: float, b: float, h: float, intervals: Sequence[tuple[float, float, float]] = (), growth: float = 1.25
) -> np.ndarray:
    """1D node coordinates on [a, b] with spacing <= h and finer intervals.

    ``intervals`` holds ``(lo, hi, h_fine)`` triples; inside each interval the
    spacing is uniform and at most ``h_fine``.  Away from an interval the
    target spacing grows geometrically by ``growth`` per element up to ``h``.
    """
    length = b - a
    if length <= 0:
        raise MeshError("empty coordinate range")
    ivs = []
    for lo, hi, hf in intervals:
        if hf > h * (1 + 1e-12):
            raise MeshError(f"band element size {hf} exceeds the global element size {h}")
        lo, hi = max(lo, a), min(hi, b)
        if hi > lo:
            ivs.append((lo, hi, hf))
    if not ivs:
        n = max(1, math.ceil(length / h - 1e-9))
        return np.linspace(a, b, n + 1)

    def size(x):
        s = np.full_like(x, h)
        for lo, hi, hf in ivs:
            d = np.maximum(lo - x, 0) + np.maximum(x - hi, 0)
            s = np.minimum(s, hf + (growth - 1.0) * d)
        return s

    breaks = sorted({a, b, *[v for lo, hi, _ in ivs for v in (lo, hi)]})
    coords = [np.array([a])]
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        xs = np.linspace(lo, hi, 2001)
        dens = 1.0 / size(xs)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(xs))])
        n = max(1, math.ceil(cum[-1] - 1e-9))
        targets = np.linspace(0.0, cum[-1], n + 1)
        seg = np.interp(targets, cum, xs)
        seg[0], seg[-1] = lo, hi
        coords.append(seg[1:])
    return np.concatenate(coords)


def _boundary_sets(nodes: np.ndarray, tol: float) -> Dict[str, np.ndarray]:
    x0, y0 = nodes.min(axis=0)
    x1, y1 = nodes.max(axis=0)
    return {
        "left": np.where(np.abs(nodes[:, 0] - x0) < tol)[0],
        "right": np.where(np.abs(nodes[:, 0] - x1) < tol)[0],
        "bottom": np.where(np.abs(nodes[:, 1] - y0) < tol)[0],
        "top": np.where(np.abs(nodes[:, 1] - y1) < tol)[0],
    }


def structured_quad4(xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product grid of 4-node elements."""
    nx, ny = len(xs) - 1, len(ys) - 1
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    j, i = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
    n0 = (j * (nx + 1) + i).ravel()
    elements = np.column_stack([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1])
    return nodes, elements


def generate_rect_mesh(
    width: float,
    height: float,
    nx: int,
    ny: int,
    elem_kind: str = "quad4",
    refinement_bands: Iterable[RefinementBand] = (),
    origin: tuple[float, float] = (0.0, 0.0),
    growth: float = 1.25,
) -> Mesh:
    """Structured rectangle, optionally graded around refinement bands.

    Without bands the grid has exactly ``nx`` by ``ny`` elements.  Each band
    refines its x-range and y-range, so every element inside a band has
    edges no longer than the band's ``h``.  Node sets ``left``, ``right``,
    ``top`` and ``bottom`` are emitted; elements inside band ``i`` form the
    element set ``band{i}``.
    """
    _check_kind(elem_kind)
    if nx < 1 or ny < 1:
        raise MeshError("nx and ny must be >= 1")
    bands = list(refinement_bands)
    ox, oy = origin
    hx, hy = width / nx, height / ny
    for b in bands:
        if b.x0 < ox - 1e-12 or b.x1 > ox + width + 1e-12 or b.y0 < oy - 1e-12 or b.y1 > oy + height + 1e-12:
            raise MeshError("refinement band lies outside the domain")
    xs = graded_coordinates(ox, ox + width, hx, [(b.x0, b.x1, b.h) for b in bands], growth)
    ys = graded_coordinates(oy, oy + height, hy, [(b.y0, b.y1, b.h) for b in bands], growth)
    nodes, elements = structured_quad4(xs, ys)
    tol = 1e-9 * max(width, height)
    mesh = Mesh(nodes, elements, "quad4", _boundary_sets(nodes, tol))
    cen = mesh.centroids()
    for i, b in enumerate(bands):
        inside = (cen[:, 0] > b.x0) & (cen[:, 0] < b.x1) & (cen[:, 1] > b.y0) & (cen[:, 1] < b.y1)
        mesh.element_sets[f"band{i}"] = np.where(inside)[0]
    if elem_kind == "quad8":
        mesh = to_quad8(mesh)
    return mesh


def to_quad8(mesh: Mesh) -> Mesh:
    """Insert mid-side nodes into a 4-node mesh.

    A mid-side node joins a node set when both corner nodes of its edge do.
    """
    if mesh.kind != "quad4":
        raise MeshError("to_quad8 expects a quad4 mesh")
    els = mesh.elements
    edges = np.concatenate([els[:, [a, b]] for a, b in _EDGES4], axis=0)
    key = np.sort(edges, axis=1)
    uniq, inv = np.unique(key, axis=0, return_inverse=True)
    inv = inv.ravel()
    mids = 0.5 * (mesh.nodes[uniq[:, 0]] + mesh.nodes[uniq[:, 1]])
    nodes = np.vstack([mesh.nodes, mids])
    mid_ids = (mesh.n_nodes + inv).reshape(4, -1).T
    elements = np.hstack([els, mid_ids])
    node_sets = {}
    for name, ids in mesh.node_sets.items():
        member = np.zeros(mesh.n_nodes, dtype=bool)
        member[ids] = True
        extra = mesh.n_nodes + np.where(member[uniq[:, 0]] & member[uniq[:, 1]])[0]
        node_sets[name] = np.concatenate([ids, extra])
    return Mesh(nodes, elements, "quad8", node_sets, dict(mesh.element_sets))


def generate_notched_plate_mesh(
    width: float = 1.0,
    height: float = 1.0,
    notch_length: float = 0.5,
    h_fine: float = 0.001,
    band_rows: int = 4,
    levels: int = 3,
    left_segments: int = 3,
    growth: float = 1.35,
    elem_kind: str = "quad4",
    slit: bool = True,
) -> Mesh:
    """Plate with a horizontal edge slit and a refined band along the ligament.

    The slit runs along ``y = height / 2`` from ``x = 0`` to
    ``x = notch_length``.  Square elements of size at most ``h_fine`` fill
    ``band_rows`` rows on each side of the crack line over the ligament
    ``notch_length <= x <= width``.  Above and below the band, ``levels``
    conforming 3:1 transition rows coarsen the mesh before geometrically
    growing rows reach the plate edges.

    Node sets: ``left``, ``right``, ``top``, ``bottom``, ``crack_upper``,
    ``crack_lower`` (slit faces including the tip node) and ``ligament``.
    Element set ``band`` holds the refined elements ahead of the notch.
    """
    _check_kind(elem_kind)
    half = 0.5 * height
    lig = width - notch_length
    m = math.ceil(lig / (h_fine * 3**levels) - 1e-9)
    h0 = lig / (m * 3**levels)
    hL = h0 * 3**levels
    # coarsest x-line: uniform over the ligament, geometric towards x = 0
    if notch_length > 0:
        sizes = growth ** np.arange(left_segments, 0, -1, dtype=float)
        sizes *= notch_length / sizes.sum()
        x_left = np.concatenate([[0.0], np.cumsum(sizes)[:-1]])
        x_coarse = np.concatenate([x_left, notch_length + hL * np.arange(m + 1)])
    else:
        x_coarse = hL * np.arange(m + 1)
    x_coarse[-1] = width
    lines = [x_coarse]
    for _ in range(levels):
        prev = lines[-1]
        fine = np.concatenate(
            [np.linspace(a, b, 4)[:-1] for a, b in zip(prev[:-1], prev[1:])] + [prev[-1:]]
        )
        lines.append(fine)
    x_fine = lines[-1]
    # build the upper half from the crack line upwards
    nodes: list[np.ndarray] = []
    elements: list[np.ndarray] = []
    count = 0

    def add_line(xs, y):
        nonlocal count
        ids = np.arange(count, count + len(xs))
        nodes.append(np.column_stack([xs, np.full(len(xs), y)]))
        count += len(xs)
        return ids

    y = 0.0
    bottom_line = add_line(x_fine, y)
    first_line = bottom_line
    band_elems = []
    n_el = 0
    for _ in range(band_rows):
        y += h0
        top_line = add_line(x_fine, y)
        q = np.column_stack([bottom_line[:-1], bottom_line[1:], top_line[1:], top_line[:-1]])
        elements.append(q)
        in_band = x_fine[:-1] >= notch_length - 1e-12
        band_elems.append(n_el + np.where(in_band)[0])
        n_el += len(q)
        bottom_line = top_line
    xs = x_fine
    dy = 3 * h0
    for _ in range(levels):
        xt = xs[::3]
        c1 = add_line(xs[1::3][: len(xt) - 1], y + dy / 3)
        c2 = add_line(xs[2::3][: len(xt) - 1], y + dy / 3)
        y += dy
        top = add_line(xt, y)
        a0, a1, a2, a3 = bottom_line[0:-1:3], bottom_line[1::3], bottom_line[2::3], bottom_line[3::3]
        b0, b1 = top[:-1], top[1:]
        q = np.vstack(
            [
                np.column_stack([a0, a1, c1, b0]),
                np.column_stack([a1, a2, c2, c1]),
                np.column_stack([a2, a3, b1, c2]),
                np.column_stack([c1, c2, b1, b0]),
            ]
        )
        elements.append(q)
        n_el += len(q)
        bottom_line = top
        xs = xt
        dy *= 3
    remaining = half - y
    if remaining <= 0:
        raise MeshError("band and transition rows exceed the plate half-height")
    h = hL
    heights = []
    while sum(heights) < remaining - 1e-12:
        h *= growth
        heights.append(h)
    heights = np.asarray(heights) * remaining / sum(heights)
    for dh in heights:
        y += dh
        top = add_line(xs, y)
        elements.append(np.column_stack([bottom_line[:-1], bottom_line[1:], top[1:], top[:-1]]))
        n_el += len(xs) - 1
        bottom_line = top
    up_nodes = np.vstack(nodes)
    up_nodes[:, 1] = np.clip(up_nodes[:, 1], 0.0, half)
    up_nodes[bottom_line, 1] = half
    up_els = np.vstack(elements)
    n_up = len(up_nodes)

    # mirror to the lower half; merge the ligament nodes on the crack line
    low_nodes = up_nodes.copy()
    low_nodes[:, 1] *= -1.0
    low_map = np.arange(n_up) + n_up
    on_line = first_line
    shared = on_line[x_fine >= notch_length - 1e-12] if slit else on_line
    low_map[shared] = shared
    keep = np.ones(n_up, dtype=bool)
    keep[shared] = False
    # renumber the kept lower nodes contiguously after the upper ones
    new_ids = np.cumsum(keep) - 1 + n_up
    low_map = np.where(keep, new_ids, low_map)
    low_els = low_map[up_els][:, [0, 3, 2, 1]]
    all_nodes = np.vstack([up_nodes, low_nodes[keep]])
    all_nodes[:, 1] += half
    all_els = np.vstack([up_els, low_els])
    tol = 1e-9 * max(width, height)
    sets = _boundary_sets(all_nodes, tol)
    slit_x = x_fine <= notch_length + 1e-12
    sets["crack_upper"] = on_line[slit_x]
    sets["crack_lower"] = low_map[on_line[slit_x]]
    sets["ligament"] = on_line[~slit_x | (np.abs(x_fine - notch_length) < 1e-12)]
    n_up_el = len(up_els)
    band = np.concatenate(band_elems)
    mesh = Mesh(all_nodes, all_els, "quad4", sets, {"band": np.concatenate([band, band + n_up_el])})
    if elem_kind == "quad8":
        mesh = to_quad8(mesh)
    return mesh


def in_polygon(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """Even-odd rule point-in-polygon test; points on edges count as inside."""
    from matplotlib.path import Path as MplPath

    path = MplPath(np.asarray(polygon, dtype=float))
    pts = np.asarray(points, dtype=float)
    r = 1e-12 * max(1.0, float(np.abs(polygon).max()))
    return path.contains_points(pts, radius=r) | path.contains_points(pts, radius=-r)


# --- text format --------------------------------------------------------------


def write_mesh(path, mesh: Mesh) -> None:
    """Write the line-oriented mesh format read by :func:`read_mesh`."""
    lines = ["$nodes"]
    lines += [f"{i + 1} {x!r} {y!r}" for i, (x, y) in enumerate(mesh.nodes.tolist())]
    lines.append(f"$elements {mesh.kind}")
    lines += [f"{i + 1} " + " ".join(str(n + 1) for n in row) for i, row in enumerate(mesh.elements.tolist())]
    for name in sorted(mesh.node_sets):
        lines.append(f"$nodeset {name}")
        ids = mesh.node_sets[name].tolist()
        for k in range(0, len(ids), 16):
            lines.append(" ".join(str(i + 1) for i in ids[k : k + 16]))
    lines.append("$end")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_mesh(path) -> Mesh:
    """Parse and validate a mesh file."""
    text = Path(path).read_text(encoding="utf-8")
    section = None
    set_name = None
    kind = None
    node_rows: list[tuple[int, float, float]] = []
    elem_rows: list[list[int]] = []
    node_sets: Dict[str, list[int]] = {}
    set_lines: Dict[str, int] = {}
    ended = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ended:
            raise MeshParseError(lineno, "content after $end")
        if line.startswith("$"):
            parts = line.split()
            tag = parts[0]
            if tag == "$nodes" and len(parts) == 1:
                section = "nodes"
            elif tag == "$elements" and len(parts) == 2:
                kind = parts[1]
                if kind not in NODES_PER_ELEMENT:
                    raise MeshParseError(lineno, f"unknown element kind {kind!r}")
                section = "elements"
            elif tag == "$nodeset" and len(parts) == 2:
                section = "nodeset"
                set_name = parts[1]
                if set_name in node_sets:
                    raise MeshParseError(lineno, f"duplicate node set {set_name!r}")
                node_sets[set_name] = []
                set_lines[set_name] = lineno
            elif tag == "$end" and len(parts) == 1:
                ended = True
                section = None
            else:
                raise MeshParseError(lineno, f"unrecognised section header {line!r}")
            continue
        parts = line.split()
        try:
            if section == "nodes":
                if len(parts) != 3:
                    raise ValueError("expected '<id> <x> <y>'")
                node_rows.append((int(parts[0]), float(parts[1]), float(parts[2])))
            elif section == "elements":
                n = NODES_PER_ELEMENT[kind]
                if len(parts) != n + 1:
                    raise ValueError(f"expected an id and {n} node ids")
                elem_rows.append([int(p) for p in parts])
            elif section == "nodeset":
                node_sets[set_name].extend(int(p) for p in parts)
            else:
                raise ValueError("data outside of a section")
        except ValueError as exc:
            raise MeshParseError(lineno, str(exc)) from None
    if not ended:
        raise MeshError("missing $end")
    if not node_rows:
        raise MeshError("no nodes defined")
    if not elem_rows:
        raise MeshError("no elements defined")
    ids = [r[0] for r in node_rows]
    if ids != list(range(1, len(ids) + 1)):
        raise MeshError("node ids must be contiguous and start at 1")
    eids = [r[0] for r in elem_rows]
    if eids != list(range(1, len(eids) + 1)):
        raise MeshError("element ids must be contiguous and start at 1")
    nodes = np.array([[r[1], r[2]] for r in node_rows])
    elements = np.array([r[1:] for r in elem_rows], dtype=np.int64) - 1
    n_nodes = len(nodes)
    for e, row in enumerate(elements):
        if row.min() < 0 or row.max() >= n_nodes:
            raise MeshError(f"element {e + 1} references a node outside 1..{n_nodes}")
    sets = {}
    for name, vals in node_sets.items():
        arr = np.array(vals, dtype=np.int64) - 1
        if arr.size and (arr.min() < 0 or arr.max() >= n_nodes):
            raise MeshError(f"node set {name!r} (line {set_lines[name]}) references a node outside 1..{n_nodes}")
        sets[name] = arr
    mesh = Mesh(nodes, elements, kind, sets)
    mesh.validate()
    return mesh
