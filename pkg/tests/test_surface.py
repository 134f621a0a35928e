import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from hyprigid.ambient import NotStarShapedError
from hyprigid.surface import (
    PoleProximityError,
    RadialShape,
    ShapeError,
    build_geometry,
    load_shape,
    make_grid,
    off_center_sphere_shape,
    oracle_shape_operator,
    perturb_sphere,
    project_shape,
    rotate_shape,
    save_shape,
    sphere_shape,
)
from hyprigid.surface.basis import (
    basis_size,
    coefficient_labels,
    evaluate_basis,
    label_position,
    node_basis,
)
from hyprigid.surface.spectral import round_divergence
from hyprigid.symm import garding_membership

SPHERE_AREA = {2: 2 * np.pi, 3: 4 * np.pi}


class TestGrid:
    @pytest.mark.parametrize("n,N", [(2, 8), (2, 33), (3, 6), (3, 20)])
    def test_weights_sum(self, n, N):
        g = make_grid(n, N)
        assert_allclose(g.weights.sum(), SPHERE_AREA[n], rtol=1e-13)
        assert np.all(g.weights > 0)
        assert_allclose(np.linalg.norm(g.nodes, axis=1), 1.0, rtol=1e-15)

    def test_exact_degree_n3(self):
        g = make_grid(3, 6)  # exact up to degree 11
        x, y, z = g.nodes.T
        assert_allclose(g.weights @ z**10, 4 * np.pi / 11, rtol=1e-13)
        assert_allclose(g.weights @ (x**4 * y**6), 4 * np.pi * 3 * 15 / (11 * 9 * 7 * 5 * 3), rtol=1e-12)

    def test_exact_degree_n2(self):
        g = make_grid(2, 9)
        t = g.angles[0]
        assert_allclose(g.weights @ np.cos(t) ** 8, 2 * np.pi * 35 / 128, rtol=1e-13)

    def test_poles_excluded(self):
        th = make_grid(3, 11).angles[0]
        assert th.min() > 0 and th.max() < np.pi


class TestBasis:
    @pytest.mark.parametrize("n,L", [(2, 7), (3, 6)])
    def test_orthonormal(self, n, L):
        N = 2 * L + 2
        B = node_basis(n, L, N)["f"]
        w = make_grid(n, N).weights
        assert_allclose((B * w[:, None]).T @ B, np.eye(basis_size(n, L)), atol=1e-13)

    def test_labels_positions(self):
        for n, L in [(2, 5), (3, 5)]:
            labels = coefficient_labels(n, L)
            assert [label_position(n, lab) for lab in labels] == list(range(basis_size(n, L)))

    @pytest.mark.parametrize("n", [2, 3])
    def test_derivatives_match_finite_differences(self, n, rng):
        L = 5
        if n == 2:
            ang = (np.array([0.4, 2.2]),)
        else:
            ang = (np.array([0.7, 2.1]), np.array([1.3, 4.0]))
        B = evaluate_basis(n, L, ang)
        h = 1e-5

        def shifted(i, s):
            a = [np.array(x, dtype=float) for x in ang]
            a[i] = a[i] + s
            return evaluate_basis(n, L, tuple(a), order=1)

        keys = ["t"] if n == 2 else ["t", "p"]
        for i, key in enumerate(keys):
            fd = (shifted(i, h)["f"] - shifted(i, -h)["f"]) / (2 * h)
            assert_allclose(B[key], fd, atol=1e-8)
        second = {"tt": (0, "t")} if n == 2 else {"tt": (0, "t"), "tp": (1, "t"), "pp": (1, "p")}
        for key, (i, first) in second.items():
            fd = (shifted(i, h)[first] - shifted(i, -h)[first]) / (2 * h)
            assert_allclose(B[key], fd, atol=1e-7)


class TestShape:
    def test_file_round_trip_bit_exact(self, tmp_path):
        s = perturb_sphere(1.0, 0.1, 3, 4, 3)
        path = tmp_path / "s.json"
        save_shape(s, path)
        t = load_shape(path)
        assert t == s
        assert t.coefficients.tobytes() == s.coefficients.tobytes()
        save_shape(t, tmp_path / "t.json")
        assert (tmp_path / "t.json").read_bytes() == path.read_bytes()

    def test_file_format(self, tmp_path):
        s = perturb_sphere(1.0, 0.1, 3, 2, 2)
        d = json.loads(json.dumps(s.to_dict()))
        assert set(d) == {"dimension", "band_limit", "coefficients", "description"}
        assert all(len(row) == 2 for row in d["coefficients"])

    def test_validation(self):
        with pytest.raises(ShapeError):
            RadialShape(4, 1, np.zeros(3))
        with pytest.raises(ShapeError):
            RadialShape(2, 2, np.zeros(4))
        with pytest.raises(ShapeError):
            RadialShape.from_dict({"dimension": 2, "band_limit": 1, "coefficients": [[3, 1.0]]})

    def test_coefficients_read_only(self):
        s = sphere_shape(3, 1.0, 2)
        with pytest.raises(ValueError):
            s.coefficients[0] = 2.0

    def test_reconstruction(self):
        s = perturb_sphere(1.0, 0.1, 5, 4, 3)
        N = 10
        vals = s.on_grid(N)["f"]
        back = project_shape(lambda u: s.radius(u), 3, 4)
        assert_allclose(back.coefficients, s.coefficients, atol=1e-13)
        assert_allclose(s.radius(make_grid(3, N).nodes), vals, atol=1e-13)

    def test_perturb_properties(self):
        a = perturb_sphere(1.0, 0.1, 7, 4, 3)
        b = perturb_sphere(1.0, 0.1, 7, 4, 3)
        assert a == b
        assert perturb_sphere(1.0, 0.1, 8, 4, 3) != a
        assert perturb_sphere(1.0, 0.0, 7, 4, 3) == sphere_shape(3, 1.0, 4)
        geo = build_geometry(a, make_grid(3, 24))
        assert np.all(geo.r > 0)
        assert np.all(garding_membership(geo.principal, 2))
        assert_allclose(np.max(np.abs(geo.r - 1.0)), 0.1, rtol=0.05)
        with pytest.raises(ShapeError):
            perturb_sphere(1.0, 0.5, 7, 4, 3)

    def test_rotation_equivariance(self):
        for n in (2, 3):
            s = perturb_sphere(1.0, 0.1, 2, 4, n)
            angle = 0.37
            rs = rotate_shape(s, angle)
            u = make_grid(n, 16).nodes.copy()
            c, sn = np.cos(angle), np.sin(angle)
            u[:, :2] = u[:, :2] @ np.array([[c, -sn], [sn, c]])  # R^{-1} u
            assert_allclose(rs.radius(make_grid(n, 16).nodes), s.radius(u), atol=1e-12)
            N = 64 if n == 2 else 32
            g = make_grid(n, N)
            assert_allclose(build_geometry(rs, g).area, build_geometry(s, g).area, rtol=1e-10)

    @pytest.mark.parametrize("n", [2, 3])
    def test_grid_rotation_permutes_node_fields(self, n):
        s = perturb_sphere(1.0, 0.1, 6, 4, n)
        N = 16
        g = make_grid(n, N)
        steps = 3
        n_az = g.shape[-1]
        rs = rotate_shape(s, 2 * np.pi * steps / n_az)
        a, b = build_geometry(s, g), build_geometry(rs, g)
        perm = np.roll(np.arange(g.size).reshape(g.shape), steps, axis=-1).ravel()
        for field in ("r", "V", "p", "W", "principal", "area_weights"):
            assert_allclose(getattr(b, field), getattr(a, field)[perm], atol=1e-12)


class TestGeometry:
    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("rho", [0.5, 1.0, 2.0])
    def test_sphere_closed_forms(self, n, rho):
        geo = build_geometry(sphere_shape(n, rho), make_grid(n, 8))
        assert_allclose(geo.principal, 1 / np.tanh(rho), rtol=1e-13)
        assert_allclose(geo.W, 1.0, rtol=1e-15)
        assert_allclose(geo.V, np.cosh(rho), rtol=1e-14)
        assert_allclose(geo.p, np.sinh(rho), rtol=1e-14)
        assert_allclose(geo.area, SPHERE_AREA[n] * np.sinh(rho) ** (n - 1), rtol=1e-13)

    def test_sphere_example_values(self):
        geo = build_geometry(sphere_shape(3, 1.0), make_grid(3, 8))
        assert_allclose(geo.principal, 1.313035, atol=1e-6)
        assert_allclose(geo.area, 4 * np.pi * np.sinh(1.0) ** 2, rtol=1e-14)

    def test_support_identity(self):
        geo = build_geometry(perturb_sphere(1.0, 0.1, 1, 4, 3), make_grid(3, 12))
        assert_allclose(geo.p * geo.W, np.sinh(geo.r), rtol=1e-15)
        assert np.all(geo.p > 0)
        assert np.all(np.linalg.eigvalsh(geo.metric) > 0)

    def test_area_stagnates_at_reference(self):
        for n, N in [(2, 64), (3, 32)]:
            s = perturb_sphere(1.0, 0.1, 7, 4, n)
            a1 = build_geometry(s, make_grid(n, N)).area
            a2 = build_geometry(s, make_grid(n, 2 * N)).area
            assert abs(a1 - a2) / a2 < 1e-10

    def test_errors(self):
        s = perturb_sphere(1.0, 0.1, 1, 4, 3)
        with pytest.raises(ValueError):
            build_geometry(s, make_grid(3, 9))
        bad = sphere_shape(2, 1.0, 1).with_coefficients([-1.0, 0.0, 0.0])
        with pytest.raises(NotStarShapedError):
            build_geometry(bad, make_grid(2, 8))

    def test_off_center_umbilic_spectral(self):
        spreads = []
        for L in (4, 8, 16):
            s = off_center_sphere_shape(3, 1.0, 0.3, L)
            geo = build_geometry(s, make_grid(3, 2 * L + 8))
            spreads.append(np.max(np.abs(geo.principal - 1 / np.tanh(1.0))))
        assert spreads[0] > spreads[1] > spreads[2]
        assert spreads[2] < 1e-9


class TestOracle:
    def test_sphere(self):
        s = sphere_shape(3, 1.0)
        B = oracle_shape_operator(s, [0.3, 0.5, 0.8], 1e-3)
        assert_allclose(B, np.eye(2) / np.tanh(1.0), atol=1e-5)

    @pytest.mark.parametrize("n", [2, 3])
    def test_agreement_second_order(self, n):
        s = perturb_sphere(1.0, 0.1, 4, 4, n)
        g = make_grid(n, 10)
        geo = build_geometry(s, g)
        q = 37 % g.size
        d = [np.max(np.abs(oracle_shape_operator(s, g.nodes[q], h) - geo.shape_operator[q])) for h in (2e-3, 1e-3)]
        assert d[1] < 1e-4
        assert np.log2(d[0] / d[1]) > 1.9

    def test_pole_excluded(self):
        with pytest.raises(PoleProximityError):
            oracle_shape_operator(sphere_shape(3, 1.0), [0.0, 1e-4, 1.0], 1e-3)


def test_round_divergence_theorem():
    g = make_grid(3, 12)
    rng = np.random.default_rng(0)
    Z = rng.normal(size=(g.size, 2))
    assert abs(g.weights @ round_divergence(g, Z)) < 1e-12
