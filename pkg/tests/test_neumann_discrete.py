"""Tests for the Galerkin spaces, assembly, kernel, Garding constants, extension and direct solver"""
import numpy as np
import pytest

from errors import DomainError, ExtensionError, ResolutionError, ShapeError, SpectrumError
from harness.expressions import build_coefficient
from neumann.assembly import (
    BasisTables,
    assemble,
    load_vector,
    mass_matrix,
    panels_for,
    sobolev_gram,
    stiffness_matrix,
)
from neumann.extension import ExtensionOperator, TrigProbe, box_rule, reflection_weights, smoothstep
from neumann.garding import GardingPencil, c_flat_lower_bound, estimate_garding, garding_k1, regularity_constant
from neumann.kernel import kernel_Z, kernel_hp_residuals, subspace_angle
from neumann.solver import solve_neumann, solve_with_load
from neumann.space import AxisBasis, GalerkinSpace, default_degree
from neumann.spectral_shift import kernel_identity_defect, spectral_shift
from tests.conftest import TWO_PHASE

ONE = np.eye(1)


def tables_for(space, panels=1):
    return BasisTables(space, space.quadrature(panels))


@pytest.fixture(scope="module")
def half_period_space():
    return GalerkinSpace.interval(0.0, np.pi, 8, 1)


class TestSpace:
    @pytest.mark.parametrize("p, degree, size", [(1, 2, 9), (2, 3, 10), (3, 5, 15)])
    def test_interval_sizes(self, p, degree, size):
        space = GalerkinSpace.interval(0.0, 1.0, 4, p)
        assert default_degree(p) == degree
        assert space.axes[0].degree == degree
        assert space.dof_count == size

    def test_vector_valued_dofs(self):
        assert GalerkinSpace.interval(0.0, 1.0, 4, 1, n=2).dof_count == 18

    def test_rectangle_is_bilinear(self):
        space = GalerkinSpace.rectangle([(0.0, 1.0), (0.0, 2.0)], [4, 3])
        assert space.dof_count == 5 * 4
        assert space.volume == pytest.approx(2.0)

    def test_partition_of_unity(self):
        for space in (GalerkinSpace.interval(0.0, 2.0, 5, 2),
                      GalerkinSpace.rectangle([(0.0, 1.0), (0.0, 1.0)], [3, 3])):
            assert space.partition_of_unity_defect() < 1e-13
            ones = np.ones(space.dof_count)
            points = np.array([[0.3] * space.d, [0.9] * space.d])
            np.testing.assert_allclose(space.evaluate(ones, points), 1.0, atol=1e-13)
            np.testing.assert_allclose(space.evaluate(ones, points, (1,) + (0,) * (space.d - 1)), 0.0, atol=1e-11)

    def test_invalid_axes(self):
        with pytest.raises(DomainError):
            AxisBasis(0.0, 1.0, 4, 2, 2)
        with pytest.raises(DomainError):
            AxisBasis(1.0, 0.0, 4, 2, 1)
        with pytest.raises(ShapeError):
            GalerkinSpace.build([(0, 1)] * 3, [2, 2, 2], 1)

    def test_coefficient_count_checked(self):
        space = GalerkinSpace.interval(0.0, 1.0, 2, 1)
        with pytest.raises(ShapeError):
            space.coefficient_tensor(np.ones(3))


class TestAssembly:
    def test_single_quadratic_element(self, gradient_1d):
        space = GalerkinSpace.interval(0.0, 0.5, 1, 1)
        tables = tables_for(space)
        S = stiffness_matrix(tables, ONE, gradient_1d).toarray()
        M = mass_matrix(tables).toarray()
        np.testing.assert_allclose(S[0], 2.0 * np.array([4 / 3, -2 / 3, -2 / 3]), atol=1e-13)
        np.testing.assert_allclose(M[0], 0.5 * np.array([1 / 5, 1 / 10, 1 / 30]), atol=1e-14)
        load = load_vector(tables, lambda points: np.ones((len(points), 1)))
        np.testing.assert_allclose(load, np.full(3, 0.5 / 3), atol=1e-14)

    def test_sobolev_gram_is_stiffness_plus_mass(self, gradient_1d):
        tables = tables_for(GalerkinSpace.interval(0.0, 1.0, 3, 1))
        G = sobolev_gram(tables).toarray()
        S = stiffness_matrix(tables, ONE, gradient_1d).toarray()
        M = mass_matrix(tables).toarray()
        np.testing.assert_allclose(G, S + M, atol=1e-12)

    def test_stiffness_is_hermitian(self, gradient_2d):
        tables = tables_for(GalerkinSpace.rectangle([(0.0, 1.0), (0.0, 1.0)], [3, 3]))
        S = stiffness_matrix(tables, np.array([[2.0, 0.5j], [-0.5j, 1.0]]), gradient_2d)
        assert abs(S - S.getH()).max() < 1e-14

    def test_panels_follow_the_period(self):
        space = GalerkinSpace.interval(0.0, 1.0, 4, 1)
        assert panels_for(space, 0.125, [1.0]) == 16
        assert panels_for(space, None, None) == 1

    def test_oscillation_must_be_resolved(self, gradient_1d, two_phase_g):
        space = GalerkinSpace.interval(0.0, 1.0, 2, 1)
        with pytest.raises(ResolutionError):
            assemble(space, two_phase_g, gradient_1d, eps=0.125, tables=tables_for(space))

    def test_oscillating_coefficient_needs_eps(self, gradient_1d, two_phase_g):
        with pytest.raises(ShapeError):
            stiffness_matrix(tables_for(GalerkinSpace.interval(0.0, 1.0, 2, 1)), two_phase_g, gradient_1d)


class TestKernel:
    def test_gradient_kernel_is_constants(self, half_period_space, gradient_1d):
        kernel = kernel_Z(half_period_space, gradient_1d)
        assert kernel.q == 1
        np.testing.assert_allclose(np.abs(kernel.basis[:, 0]), 1 / np.sqrt(np.pi), atol=1e-10)
        assert kernel.gram_defect() < 1e-12
        assert kernel.next_eigenvalue == pytest.approx(1.0, rel=1e-3)

    def test_projectors_split_the_space(self, half_period_space, gradient_1d, rng):
        kernel = kernel_Z(half_period_space, gradient_1d)
        u = rng.standard_normal(half_period_space.dof_count)
        np.testing.assert_allclose(kernel.project_Z(u) + kernel.project_H(u), u, atol=1e-12)
        np.testing.assert_allclose(kernel.project_Z(kernel.project_H(u)), 0.0, atol=1e-12)

    def test_second_order_kernel_is_affine(self, second_order_1d):
        space = GalerkinSpace.interval(0.0, 1.0, 4, 2)
        tables = tables_for(space)
        kernel = kernel_Z(space, second_order_1d, tables=tables)
        assert kernel.q == 2
        angle = subspace_angle(kernel, tables, [lambda x: np.ones((len(x), 1)), lambda x: x[:, :1]])
        assert angle < 1e-6
        assert np.all(kernel_hp_residuals(kernel, tables, second_order_1d) < 1e-4)

    def test_bilinear_gradient_kernel(self, gradient_2d):
        kernel = kernel_Z(GalerkinSpace.rectangle([(0.0, 1.0), (0.0, 1.0)], [4, 4]), gradient_2d)
        assert kernel.q == 1


class TestGarding:
    def test_gradient_constants(self, gradient_1d, rng):
        space = GalerkinSpace.interval(0.0, np.pi, 4, 1)
        k1, k2 = estimate_garding(space, gradient_1d, scan=5)
        assert k1 == pytest.approx(1.0, rel=1e-6)
        assert k2 == pytest.approx(1.0, rel=1e-6)
        pencil = GardingPencil(space, gradient_1d)
        for _ in range(8):
            assert pencil.satisfied_by(rng.standard_normal(space.dof_count), k1, k2)

    def test_doubled_symbol_quarters_k1(self, gradient_1d):
        space = GalerkinSpace.interval(0.0, np.pi, 4, 1)
        doubled = gradient_1d.scaled(2.0)
        for k2 in (1.0, 1.5, 3.0):
            assert garding_k1(space, doubled, k2) == pytest.approx(garding_k1(space, gradient_1d, k2) / 4.0, rel=1e-8)
        k1, k2 = estimate_garding(space, doubled, scan=5)
        assert k1 == pytest.approx(0.25, rel=1e-6)
        assert k2 == pytest.approx(1.0, rel=1e-6)

    def test_regularity_constant(self):
        assert regularity_constant(1.0, 1.0, 1.0) == pytest.approx(np.sqrt(3.0))

    def test_lower_bound_for_first_nonzero_eigenvalue(self, half_period_space, gradient_1d):
        bound = c_flat_lower_bound(half_period_space, gradient_1d, 1.0)
        assert bound == pytest.approx(0.5, rel=1e-3)
        kernel = kernel_Z(half_period_space, gradient_1d)
        assert bound <= kernel.next_eigenvalue


class TestExtension:
    def test_reflection_moments(self):
        lambdas, weights = reflection_weights(4)
        for j in range(4):
            assert np.sum(weights * (-lambdas) ** j) == pytest.approx(1.0)

    def test_reflection_reproduces_polynomials_below_order_2p(self):
        P = ExtensionOperator([(0.0, 1.0)], 2)
        assert len(P.weights) == 4

        def cubic(x):
            return x ** 3 - 2.0 * x ** 2 + x - 0.5

        outside = np.array([-0.05, -0.02, 1.02, 1.05])
        values = P.extended_values(cubic, [outside], with_cutoff=False)
        np.testing.assert_allclose(values[:, 0].real, cubic(outside), atol=1e-10)

    def test_smoothstep(self):
        values = smoothstep(np.array([-1.0, 0.0, 0.5, 1.0, 2.0]), 2)
        np.testing.assert_allclose(values, [0.0, 0.0, 0.5, 1.0, 1.0], atol=1e-14)

    def test_extension_keeps_values_and_matches_at_faces(self):
        P = ExtensionOperator([(0.0, 1.0)], 1)
        inside = np.linspace(0.0, 1.0, 7)
        values = P.extended_values(lambda x: np.cos(x), [inside])
        np.testing.assert_allclose(values[:, 0], np.cos(inside), atol=1e-14)
        outside = P.extended_values(lambda x: np.cos(x), [np.array([-1e-4, 1.0 + 1e-4])])
        np.testing.assert_allclose(outside[:, 0].real, np.cos([0.0, 1.0]), atol=1e-7)

    def test_extension_vanishes_at_the_seam(self):
        P = ExtensionOperator([(0.0, 1.0)], 1)
        field = P.extend(lambda x: np.ones((len(x), 1)), (64,))
        assert field.lattice.cell_volume == pytest.approx(2.0)
        assert abs(field.values[0, 0, 0]) < 1e-14

    def test_collar_limits(self):
        with pytest.raises(ExtensionError):
            ExtensionOperator([(0.0, 1.0)], 1, collar=0.1)
        with pytest.raises(ExtensionError):
            ExtensionOperator([(0.0, 1.0)], 1).extend(lambda x: x, (63,))

    def test_probe_norm(self):
        probe = TrigProbe([(0.0, 1.0)], [0.0], [0.0])
        assert probe.box_norm(0, box_rule([(0.0, 1.0)])) == pytest.approx(1.0)

    def test_measured_norms_cover_every_order(self):
        P = ExtensionOperator([(0.0, 1.0)], 1)
        norms = P.measure_norms((64,))
        assert sorted(norms) == [0, 1, 2]
        assert all(np.isfinite(value) and value >= 0.9 for value in norms.values())


class TestSolver:
    def test_constant_solution(self, half_period_space, gradient_1d):
        tables = tables_for(half_period_space)
        S = stiffness_matrix(tables, ONE, gradient_1d)
        M = mass_matrix(tables)
        solution = solve_neumann(S, M, -1.0, np.ones(half_period_space.dof_count))
        np.testing.assert_allclose(solution.coeffs, 1.0, atol=1e-10)
        assert solution.residual < 1e-12

    def test_shift_on_kernel_rejected(self, half_period_space, gradient_1d):
        tables = tables_for(half_period_space)
        S = stiffness_matrix(tables, ONE, gradient_1d)
        M = mass_matrix(tables)
        with pytest.raises(SpectrumError):
            solve_neumann(S, M, 0.0, np.ones(half_period_space.dof_count))

    def test_load_shape_checked(self, half_period_space, gradient_1d):
        tables = tables_for(half_period_space)
        S = stiffness_matrix(tables, ONE, gradient_1d)
        with pytest.raises(ShapeError):
            solve_with_load(S, mass_matrix(tables), -1.0, np.ones(3))


class TestSpectralShift:
    def test_unit_coefficient_on_half_period(self, half_period_space, gradient_1d):
        tables = tables_for(half_period_space)
        S = stiffness_matrix(tables, ONE, gradient_1d)
        M = mass_matrix(tables)
        kernel = kernel_Z(half_period_space, gradient_1d, tables=tables)
        shift = spectral_shift(S, S, M, kernel)
        assert shift.q == 1
        assert shift.c_flat == pytest.approx(0.9, rel=1e-3)
        assert shift.summary()["margin"] == 0.9
        assert kernel_identity_defect(S, M, kernel, -2.0) < 1e-10

    def test_oscillating_pencil_keeps_kernel(self, gradient_1d):
        g = build_coefficient(TWO_PHASE, [1.0], 128, 1)
        space = GalerkinSpace.interval(0.0, 1.0, 64, 1)
        tables = tables_for(space, panels=2)
        S_eps = stiffness_matrix(tables, g, gradient_1d, eps=0.25)
        S_eff = stiffness_matrix(tables, np.array([[1.6]]), gradient_1d)
        M = mass_matrix(tables)
        shift = spectral_shift(S_eps, S_eff, M, kernel_Z(space, gradient_1d, tables=tables))
        assert shift.lambda_small_eps[0] < 1e-8
        assert 0 < shift.c_flat < min(shift.lambda_small_eps[1], shift.lambda_small_eff[1])
