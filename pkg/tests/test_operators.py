import numpy as np
import pytest
import sympy as sp

from mvd.geometry import ConvexPolygon
from mvd.grid import V_BCLIP, MvdGrid, inner_cells, inner_omega, sample_scalar, sample_vector
from mvd.operators import (OperatorDomainError, contour_oracle, control_volume_edges, div_h, divergence_matrix,
                           grad_h, gradient_matrix, orientation_sign, rot2d_scalar_h, rot2d_vector_h,
                           rot_scalar_matrix, rot_vector_matrix)

from conftest import hexagon_star_grid, jitter_grid, lattice_grid

GRIDS = [(8, 0), (16, 1), (8, 5)]


def grids():
    return [jitter_grid(n, s) for n, s in GRIDS] + [lattice_grid(8), hexagon_star_grid()]


def interior_random(g, rng):
    y = rng.standard_normal(g.n_nodes)
    y[g.boundary] = 0.0
    return y


def single_cell_grid():
    pts = np.array([(0.5, 0.25), (0.5, 0.75), (0.25, 0.5), (0.75, 0.5)])
    return MvdGrid(ConvexPolygon.unit_square(), pts, [0, 0, 1, 1], [False] * 4, [1.0] * 4,
                   [(0, 1, 2, 3)], [(0.5, 0.5)], [False])


def test_single_cell_gradient():
    g = single_cell_grid()
    np.testing.assert_allclose(g.e1[0], (1, 0))
    y = sample_scalar(lambda x, z: 2 * x + 3 * z, g)
    np.testing.assert_allclose(grad_h(y, g)[0], (2, 3), rtol=1e-15)


def test_orientation_signs():
    g = lattice_grid(4)
    s = orientation_sign(g)
    assert s.shape == (g.n_cells, 4)
    np.testing.assert_array_equal(s[0], [1, -1, 1, -1])


@pytest.mark.parametrize("g", grids(), ids=repr)
def test_constants(g):
    y = np.full(g.n_nodes, 3.5)
    assert np.all(grad_h(y, g) == 0)
    assert np.all(rot2d_scalar_h(y, g) == 0)
    v = sample_vector(lambda x, z: (0.3 + 0 * x, -1.2 + 0 * x), g)
    inner = np.nonzero(g.interior)[0]
    assert np.max(np.abs(div_h(v, g)[inner])) <= 1e-13 * 1.3 / g.measure[inner].min() * g.h
    assert np.max(np.abs(rot2d_vector_h(v, g)[inner])) <= 1e-13 * 1.3 / g.measure[inner].min() * g.h


@pytest.mark.parametrize("g", [lattice_grid(8), lattice_grid(16)], ids=repr)
def test_linear_exactness(g, rng):
    for _ in range(5):
        a, b, c = rng.uniform(-2, 2, 3)
        y = sample_scalar(lambda x, z: a * x + b * z + c, g)
        G = g.to_global(grad_h(y, g))
        assert np.max(np.abs(G - (a, b))) <= 1e-13
        R = g.to_global(rot2d_scalar_h(y, g))
        assert np.max(np.abs(R - (b, -a))) <= 1e-13


def test_rot_of_x1():
    g = jitter_grid(8, 0)
    y = sample_scalar(lambda x, z: x, g)
    np.testing.assert_allclose(g.to_global(rot2d_scalar_h(y, g)), np.tile((0.0, -1.0), (g.n_cells, 1)),
                               atol=1e-9)


@pytest.mark.parametrize("g", grids(), ids=repr)
def test_rotation_identity(g, rng):
    y = rng.standard_normal(g.n_nodes)
    G = grad_h(y, g)
    R = rot2d_scalar_h(y, g)
    np.testing.assert_array_equal(R[:, 0], G[:, 1])
    np.testing.assert_array_equal(R[:, 1], -G[:, 0])


@pytest.mark.parametrize("g", grids(), ids=repr)
def test_duality(g, rng):
    for _ in range(5):
        y = interior_random(g, rng)
        v = rng.standard_normal((g.n_cells, 2))
        lhs = inner_cells(grad_h(y, g), v, g) + inner_omega(y, div_h(v, g), g)
        scale = np.linalg.norm(y) * np.linalg.norm(v)
        assert abs(lhs) <= 1e-12 * scale
        lhs = inner_cells(rot2d_scalar_h(y, g), v, g) - inner_omega(y, rot2d_vector_h(v, g), g)
        assert abs(lhs) <= 1e-12 * scale


@pytest.mark.parametrize("g", grids(), ids=repr)
def test_complexes(g, rng):
    y = rng.standard_normal(g.n_nodes)
    inner = np.nonzero(g.interior)[0]
    tol = 1e-12 * np.abs(y).max() / g.measure[inner].min()
    assert np.max(np.abs(div_h(rot2d_scalar_h(y, g), g)[inner])) <= tol
    assert np.max(np.abs(rot2d_vector_h(grad_h(y, g), g)[inner])) <= tol


def test_telescoping_symbolic():
    # one circumcenter control volume: the rotor of a gradient sums node differences around a closed loop
    ys = sp.symbols("y0:3")
    L_D = sp.symbols("l0:3", positive=True)
    # circulation of grad along each edge i -> i+1 is (y_{i+1} - y_i) / L * L
    total = sum((ys[(i + 1) % 3] - ys[i]) / L_D[i] * L_D[i] for i in range(3))
    assert sp.simplify(total) == 0


@pytest.mark.parametrize("g", grids(), ids=repr)
def test_matrices_match_loops(g, rng):
    y = rng.standard_normal(g.n_nodes)
    v = rng.standard_normal((g.n_cells, 2))
    np.testing.assert_allclose(gradient_matrix(g) @ y, grad_h(y, g).ravel(), rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(rot_scalar_matrix(g) @ y, rot2d_scalar_h(y, g).ravel(), rtol=1e-13, atol=1e-13)
    d = div_h(v, g)
    r = rot2d_vector_h(v, g)
    scale = np.abs(d).max()
    assert np.max(np.abs(divergence_matrix(g) @ v.ravel() - d)) <= 1e-13 * scale
    assert np.max(np.abs(rot_vector_matrix(g) @ v.ravel() - r)) <= 1e-13 * np.abs(r).max()


def test_clip_node_has_no_divergence():
    g = lattice_grid(4)
    k = int(np.nonzero(g.role == V_BCLIP)[0][0])
    v = np.ones((g.n_cells, 2))
    with pytest.raises(OperatorDomainError, match="undefined at degenerate control volume"):
        div_h(v, g, at=k)
    with pytest.raises(OperatorDomainError):
        rot2d_vector_h(v, g, at=k)
    assert div_h(v, g)[k] == 0.0


def test_pointwise_evaluation_matches_array():
    g = jitter_grid(8, 0)
    v = np.random.default_rng(1).standard_normal((g.n_cells, 2))
    d = div_h(v, g)
    for k in np.nonzero(g.interior)[0][:20]:
        assert div_h(v, g, at=int(k)) == d[k]


def linear_fields():
    return {
        "flux": lambda x, y: (x, y),
        "circulation": lambda x, y: (-y, x),
    }


@pytest.mark.parametrize("g", grids(), ids=repr)
def test_contour_oracle_exact_fields(g):
    inner = np.nonzero(g.interior)[0]
    for kind, F in linear_fields().items():
        for k in inner[:25]:
            assert contour_oracle(F, g, int(k), kind) == pytest.approx(2.0, abs=1e-12)
            const = lambda x, y: (0.7 + 0 * x, -0.4 + 0 * x)
            assert contour_oracle(const, g, int(k), kind) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("g", grids(), ids=repr)
def test_discrete_matches_center_rule_bitwise(g):
    inner = np.nonzero(g.interior)[0]
    F = lambda x, y: (np.sin(x) + y * y, np.cos(3 * y) - x)
    v = sample_vector(F, g)
    d = div_h(v, g)
    r = rot2d_vector_h(v, g)
    for k in inner:
        assert contour_oracle(F, g, int(k), "flux", rule="center") == d[k]
        assert contour_oracle(F, g, int(k), "circulation", rule="center") == r[k]


def test_linear_fields_exact_at_interior_nodes():
    g = jitter_grid(16, 1)
    inner = np.nonzero(g.interior)[0]
    d = div_h(sample_vector(lambda x, y: (x, y), g), g)
    r = rot2d_vector_h(sample_vector(lambda x, y: (-y, x), g), g)
    np.testing.assert_allclose(d[inner], 2.0, atol=1e-9)
    np.testing.assert_allclose(r[inner], 2.0, atol=1e-9)


def test_control_volume_edges_close():
    g = jitter_grid(8, 0)
    for k in np.nonzero(g.interior)[0][:30]:
        segs = control_volume_edges(g, int(k))
        total = sum(np.asarray(b) - np.asarray(a) for _, a, b in segs)
        np.testing.assert_allclose(total, 0, atol=1e-14)
        area = 0.5 * sum(a[0] * b[1] - a[1] * b[0] for _, a, b in segs)
        assert area == pytest.approx(g.measure[k], rel=1e-10)
