import math

import numpy as np
import pytest

from yamabe_lab.confgrid import (
    BASIS_2FORMS,
    ConformalGrid,
    TwoFormField,
    WeightedField,
    antiselfdual_projection,
    apply_conformal_rescale,
    coordinates,
    cup_pairing,
    field_from_bytes,
    field_from_json,
    field_to_bytes,
    field_to_json,
    harmonic_representative_torus,
    hodge_star_2form,
    l2_norm_2form,
    laplace_beltrami_covariant,
    laplace_beltrami_stencil,
    pointwise_norm_2form,
    scalar_curvature_log_form,
    scalar_curvature_of_conformal_metric,
    selfdual_projection,
    yamabe_operator_flat,
)

TWO_PI = 2 * math.pi


def form(**coeffs):
    return TwoFormField.from_dict({k[1:]: v for k, v in coeffs.items()})


OMEGA1 = form(d12=1, d34=1)


class TestGrid:
    def test_rejects_nonpositive_factor(self):
        u = np.ones((4,) * 4)
        u[1, 2, 3, 0] = 0.0
        with pytest.raises(ValueError):
            ConformalGrid(4, u)

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            ConformalGrid(4, np.ones((5,) * 4))

    def test_factor_is_immutable(self):
        g = ConformalGrid.flat(4)
        with pytest.raises(ValueError):
            g.u[0, 0, 0, 0] = 2.0

    def test_periodic_coordinates(self):
        x = coordinates(4)
        assert x.shape == (4, 4, 4, 4, 4)
        assert x[0, 3, 0, 0, 0] == 0.75 and x[3, 0, 0, 0, 1] == 0.25


class TestYamabeFlat:
    def test_constant(self):
        out = yamabe_operator_flat(np.full((8,) * 4, 2.5), 1 / 8)
        assert np.max(np.abs(out)) < 1e-11

    def test_linearity(self, x8):
        a, b = np.cos(TWO_PI * x8[0]), np.cos(TWO_PI * x8[1])
        np.testing.assert_allclose(
            yamabe_operator_flat(a + b, 1 / 8), yamabe_operator_flat(a, 1 / 8) + yamabe_operator_flat(b, 1 / 8),
            atol=1e-10,
        )

    def test_second_order_convergence(self):
        errs = []
        for n in (8, 16, 32):
            x = coordinates(n)
            phi = np.cos(TWO_PI * x[0])
            errs.append(np.max(np.abs(yamabe_operator_flat(phi, 1 / n) - 6 * TWO_PI**2 * phi)))
        ratios = [errs[0] / errs[1], errs[1] / errs[2]]
        assert all(3.5 <= r <= 4.5 for r in ratios), ratios


def stencil_oracle_curvature(u, h):
    """Pointwise loop: s = u^-3 * 6 * (sum over axes of (2u - u+ - u-)/h^2)."""
    n = u.shape[0]
    s = np.empty_like(u)
    for idx in np.ndindex(u.shape):
        lap = 0.0
        for a in range(4):
            up, dn = list(idx), list(idx)
            up[a] = (up[a] + 1) % n
            dn[a] = (dn[a] - 1) % n
            lap += (2 * u[idx] - u[tuple(up)] - u[tuple(dn)]) / h**2
        s[idx] = 6 * lap / u[idx] ** 3
    return s


class TestScalarCurvature:
    @pytest.mark.parametrize("c", [1.0, 3.0])
    def test_homothety(self, c):
        s = scalar_curvature_of_conformal_metric(ConformalGrid(6, np.full((6,) * 4, c)))
        assert np.max(np.abs(s.values)) < 1e-10
        assert s.weight == 0

    def test_matches_loop_oracle(self):
        n = 6
        x = coordinates(n)
        u = 1 + 0.1 * np.cos(TWO_PI * x[0])
        s = scalar_curvature_of_conformal_metric(ConformalGrid(n, u)).values
        np.testing.assert_allclose(s, stencil_oracle_curvature(u, 1 / n), rtol=1e-12, atol=1e-10)

    def test_log_form_agrees_to_second_order(self):
        errs = []
        for n in (8, 16, 32):
            x = coordinates(n)
            g = ConformalGrid(n, np.exp(0.2 * np.sin(TWO_PI * x[1])))
            errs.append(np.max(np.abs(scalar_curvature_log_form(g) - scalar_curvature_of_conformal_metric(g).values)))
        assert errs[1] < errs[0] / 3 and errs[2] < errs[1] / 3

    def test_laplacians_agree_to_second_order(self):
        errs = []
        for n in (8, 16, 32):
            x = coordinates(n)
            g = ConformalGrid(n, 1 + 0.2 * np.cos(TWO_PI * x[0]))
            phi = np.cos(TWO_PI * x[0]) * np.sin(TWO_PI * x[3])
            errs.append(np.max(np.abs(laplace_beltrami_covariant(g, phi) - laplace_beltrami_stencil(g, phi))))
        # N = 8 is still pre-asymptotic for this product mode (ratio ~3.4)
        assert errs[0] / errs[1] > 3.0
        assert 3.5 <= errs[1] / errs[2] <= 4.5


class TestWeightedField:
    def test_weight_minus_two(self, rng):
        f = WeightedField(rng.normal(size=(4,) * 4), -2)
        out = apply_conformal_rescale(f, 2.0)
        np.testing.assert_allclose(out.values, f.values / 4)
        assert out.weight == -2

    def test_weight_zero(self, rng):
        f = WeightedField(rng.normal(size=(4,) * 4), 0)
        v = np.exp(rng.normal(size=(4,) * 4))
        np.testing.assert_array_equal(apply_conformal_rescale(f, v).values, f.values)

    def test_exponential_factor(self, x8, rng):
        f = WeightedField(rng.normal(size=(8,) * 4), -2)
        v = np.exp(np.cos(TWO_PI * x8[0]))
        np.testing.assert_allclose(apply_conformal_rescale(f, v).values, f.values * np.exp(-2 * np.cos(TWO_PI * x8[0])))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            apply_conformal_rescale(WeightedField(np.ones(3), -2), np.array([1.0, 0.0, 1.0]))


class TestHodge:
    def test_basis_action(self):
        expected = {"12": ("34", 1), "34": ("12", 1), "13": ("24", -1), "24": ("13", -1), "14": ("23", 1), "23": ("14", 1)}
        for src, (dst, sign) in expected.items():
            out = hodge_star_2form(TwoFormField.from_dict({src: 1.0}))
            np.testing.assert_array_equal(out.components, TwoFormField.from_dict({dst: sign}).components)

    def test_star_orientation(self):
        # a ^ *a = |a|^2 vol for every basis element
        for key in BASIS_2FORMS:
            a = TwoFormField.from_dict({key: 1.0})
            assert cup_pairing(a, hodge_star_2form(a)) == 1.0

    def test_selfdual_fixed(self):
        np.testing.assert_array_equal(hodge_star_2form(OMEGA1).components, OMEGA1.components)

    def test_involution_on_fields(self, rng):
        w = TwoFormField(rng.normal(size=(6, 4, 4, 4, 4)))
        np.testing.assert_array_equal(hodge_star_2form(hodge_star_2form(w)).components, w.components)

    def test_projection(self, rng):
        out = selfdual_projection(form(d12=1))
        np.testing.assert_array_equal(out.components, form(d12=0.5, d34=0.5).components)
        np.testing.assert_array_equal(selfdual_projection(OMEGA1).components, OMEGA1.components)
        asd = form(d13=1, d24=1)
        assert np.all(selfdual_projection(asd).components == 0)

    def test_projection_properties(self, rng):
        w = TwoFormField(rng.normal(size=6))
        plus = selfdual_projection(w)
        minus = w - plus
        np.testing.assert_allclose(selfdual_projection(plus).components, plus.components)
        np.testing.assert_allclose(hodge_star_2form(plus).components, plus.components)
        np.testing.assert_allclose(hodge_star_2form(minus).components, -minus.components)
        np.testing.assert_allclose(minus.components, antiselfdual_projection(w).components)


class TestNorms:
    def test_unit_simple_form(self):
        f = pointwise_norm_2form(form(d12=1), ConformalGrid.flat(4))
        np.testing.assert_allclose(f.values, 1.0)
        assert f.weight == -2

    def test_two_summands(self):
        np.testing.assert_allclose(pointwise_norm_2form(OMEGA1, ConformalGrid.flat(4)).values, math.sqrt(2))

    def test_rescaled(self):
        g = ConformalGrid(4, np.full((4,) * 4, 2.0))
        np.testing.assert_allclose(pointwise_norm_2form(OMEGA1, g).values, math.sqrt(2) / 4)

    def test_pointwise_norm_has_weight_minus_two(self, rng, x8):
        base = ConformalGrid(8, 1 + 0.3 * np.cos(TWO_PI * x8[0]))
        v = np.exp(0.2 * np.sin(TWO_PI * x8[2]))
        w = TwoFormField(rng.normal(size=6))
        moved = apply_conformal_rescale(pointwise_norm_2form(w, base), v)
        direct = pointwise_norm_2form(w, base.rescaled(v))
        np.testing.assert_allclose(moved.values, direct.values, rtol=1e-14)

    def test_l2_flat(self):
        assert l2_norm_2form(OMEGA1, ConformalGrid.flat(8)) == pytest.approx(math.sqrt(2), rel=1e-14)

    def test_l2_conformally_invariant(self, x8, rng):
        g = ConformalGrid(8, 1 + 0.3 * np.cos(TWO_PI * x8[0]))
        assert l2_norm_2form(OMEGA1, g) == pytest.approx(math.sqrt(2), rel=1e-12)
        w = TwoFormField(rng.normal(size=(6, 8, 8, 8, 8)))
        assert l2_norm_2form(w, g) == pytest.approx(l2_norm_2form(w, ConformalGrid.flat(8)), rel=1e-12)

    def test_norm_equals_cup_for_selfdual(self, rng):
        w = selfdual_projection(TwoFormField(rng.normal(size=6)))
        assert l2_norm_2form(w, ConformalGrid.flat(4)) ** 2 == pytest.approx(cup_pairing(w, w), rel=1e-12)


class TestHarmonic:
    def test_simple_form_split(self):
        split = harmonic_representative_torus([1, 0, 0, 0, 0, 0])
        assert split.plus_square == pytest.approx(0.5)
        assert split.minus_square == pytest.approx(-0.5)
        np.testing.assert_allclose(split.plus.components, [0.5, 0, 0, 0, 0, 0.5])

    def test_selfdual_input(self):
        split = harmonic_representative_torus(OMEGA1.components)
        assert np.all(split.minus.components == 0)

    def test_orthogonality(self, rng):
        split = harmonic_representative_torus(rng.normal(size=6))
        assert abs(cup_pairing(split.plus, split.minus)) < 1e-14
        assert split.plus_square >= 0 >= split.minus_square


class TestSerialisation:
    def test_json_roundtrip(self, rng):
        vals = rng.normal(size=(3,) * 4)
        back, weight = field_from_json(field_to_json(vals, -2))
        np.testing.assert_array_equal(back, vals)
        assert weight == -2

    def test_binary_roundtrip_two_form(self, rng):
        vals = rng.normal(size=(6, 3, 3, 3, 3))
        blob = field_to_bytes(vals, 0)
        back, weight = field_from_bytes(blob)
        np.testing.assert_array_equal(back, vals)

    def test_x4_fastest(self):
        vals = np.zeros((2,) * 4)
        vals[0, 0, 0, 1] = 1.0
        vals[1, 0, 0, 0] = 2.0
        import json

        doc = json.loads(field_to_json(vals))
        assert doc["values"][1] == 1.0 and doc["values"][8] == 2.0
        assert doc["header"] == {"N": 2, "weight": 0, "components": 1, "order": "x4-fastest"}
        blob = field_to_bytes(vals)
        assert np.frombuffer(blob[-16 * 8:], dtype="<f8")[1] == 1.0

    def test_bad_magic(self):
        with pytest.raises(ValueError):
            field_from_bytes(b"nope" + b"\0" * 8)
