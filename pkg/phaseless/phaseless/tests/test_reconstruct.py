import json
import math
import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from ..errors import InvalidInput, NumericalFailure
from ..grid import ComplexPlaneData, Grid3, IntensityData, PlaneGrid, RealField3, WavenumberPartition
from ..propagate import complement, propagate_to_boundary
from ..reconstruct import (AlgorithmSettings, Geometry, IterationLog, IterState, assemble_and_solve_q,
                           boundary_vector, compute_c, init_tail, locate_maxima, log_gradient, q_boundary, run,
                           run_phased, stage, update_v_gradient)

GRID = Grid3((13, 13, 13), (-1, 1, -1, 1, -1, 0.5))
PARTITION = WavenumberPartition.from_band(4.0, 5.0, 3)
PLANE = PlaneGrid(5.0, 1.0, (13, 13))


def vacuum_data():
    k = PARTITION.k_values
    return ComplexPlaneData(PLANE, k, np.stack([np.full(PLANE.counts, np.exp(1j * kk * PLANE.z)) for kk in k]))


class GradientTests(SimpleTestCase):
    def test_log_gradient_of_plane_wave(self):
        x3 = np.broadcast_to(GRID.axis(2), GRID.shape)
        g1, g2, g3 = log_gradient(np.exp(2.5j * x3), GRID)
        np.testing.assert_allclose(g1, 0, atol=1e-12)
        np.testing.assert_allclose(g2, 0, atol=1e-12)
        np.testing.assert_allclose(g3, 2.5j, atol=1e-12)

    def test_boundary_vector_of_plane_wave(self):
        k, eps = 5.0, GRID.spacings[0]
        top = GRID.upper[2]
        p = np.full(GRID.shape[:2], np.exp(1j * k * top))
        p1 = (np.exp(1j * k * (top + eps)) - p) / eps
        vector = boundary_vector(p, p1, k, GRID, eps)
        mask = GRID.boundary_mask()
        np.testing.assert_allclose(vector[0][mask], 0, atol=1e-12)
        np.testing.assert_allclose(vector[2][mask], 1j * k, atol=1e-12)

    def test_tail_of_vacuum(self):
        vector = tuple(np.where(GRID.boundary_mask(), v, 0) for v in (0.0, 0.0, 5j))
        tail, grad_q0 = init_tail(vector, 5.0, GRID)
        np.testing.assert_allclose(tail.grad_V[2], 5j, atol=1e-10)
        np.testing.assert_allclose(grad_q0[2], 1j, atol=1e-10)
        self.assertTrue(all(r.converged for r in tail.reports))


class IterationStepTests(SimpleTestCase):
    def test_accumulator(self):
        ones = tuple(np.ones(GRID.shape, dtype=complex) for _ in range(3))
        state = IterState(ones, ones, 0.5, keep_terms=True)
        for _ in range(4):
            state.accumulate(ones)
        np.testing.assert_allclose(state.grad_Q[0], 2.5)
        np.testing.assert_allclose(state.grad_Q_outer[0], 2.0)
        self.assertLess(state.accumulator_mismatch(), 1e-14)
        self.assertIsNone(IterState(ones, ones, 0.5).accumulator_mismatch())

    def test_vacuum_v_gradient(self):
        h = PARTITION.h
        k_bar = PARTITION.k_bar
        zero = np.zeros(GRID.shape, dtype=complex)
        for n in (1, 2, 3):
            grad_q = (zero, zero, zero + 1j)
            grad_Q = (zero, zero, zero + 1j * h * (n - 1))
            grad_V = (zero, zero, zero + 1j * k_bar)
            grad_v = update_v_gradient(grad_q, grad_Q, grad_V, h)
            np.testing.assert_allclose(grad_v[2], 1j * PARTITION.k_values[n])

    def test_coefficient_of_plane_wave(self):
        zero = np.zeros(GRID.shape, dtype=complex)
        update = compute_c((zero, zero, zero + 3j), 3.0, GRID)
        np.testing.assert_allclose(update.c, 1.0)
        np.testing.assert_allclose(update.c_raw, 1.0)
        self.assertEqual(update.imag_max, 0.0)

    def test_coefficient_clamps(self):
        zero = np.zeros(GRID.shape, dtype=complex)
        low = compute_c((zero, zero, zero + 1.5j), 3.0, GRID)
        np.testing.assert_allclose(low.c, 1.0)
        self.assertEqual(low.clamped_fraction, 1.0)
        high = compute_c((zero, zero, zero + 9j), 3.0, GRID, c_max=6.0)
        np.testing.assert_allclose(high.c, 6.0)

    def test_coefficient_of_manufactured_v(self):
        # v = i k x3 + 0.01 sin(x1): the divergence is the only discretized term
        k = 3.0
        errors = []
        for count in (13, 25):
            grid = Grid3((count, 5, 5), (-1, 1, -1, 1, -1, 0.5))
            x1 = grid.meshgrid()[0]
            grad_v = (0.01 * np.cos(x1) + 0j, np.zeros(grid.shape, dtype=complex), np.full(grid.shape, 1j * k))
            exact = 1.0 + (0.01 * np.sin(x1) - 1e-4 * np.cos(x1) ** 2) / k ** 2
            update = compute_c(grad_v, k, grid)
            errors.append(float(np.max(np.abs(update.c_raw - exact))))
        self.assertLess(errors[0], 1e-4)
        self.assertGreaterEqual(errors[0] / errors[1], 3.5)

    def test_q_boundary_of_vacuum(self):
        boundary = propagate_to_boundary(vacuum_data(), GRID)
        complemented = complement(boundary)
        mask = GRID.boundary_mask()
        x3 = np.broadcast_to(GRID.axis(2), GRID.shape)
        for n in (0, 1, 3):
            q = q_boundary(complemented, n, PARTITION)
            np.testing.assert_allclose(q[mask], 1j * x3[mask], atol=1e-9)


class EllipticStepTests(SimpleTestCase):
    def setUp(self):
        self.x3 = np.broadcast_to(GRID.axis(2), GRID.shape)
        self.boundary = np.where(GRID.boundary_mask(), 1j * self.x3, 0)

    def plane_wave_state(self):
        zero = np.zeros(GRID.shape, dtype=complex)
        return IterState((zero, zero, zero + 1j), (zero, zero, zero + 1j * PARTITION.k_bar), PARTITION.h)

    def test_vacuum_solution_is_i_x3(self):
        state = self.plane_wave_state()
        for n in (1, 2, 3):
            q, grad_q, report = assemble_and_solve_q(state, PARTITION.k_values[n], self.boundary, GRID)
            np.testing.assert_allclose(q.values, 1j * self.x3, atol=1e-6)
            np.testing.assert_allclose(grad_q[2], 1j, atol=1e-6)
            self.assertTrue(report.converged)
            state.accumulate(grad_q)

    def test_mirror_symmetric_inputs(self):
        x1, x2, x3 = GRID.meshgrid()
        bump = 0.1 * np.exp(-(x1 ** 2 + x2 ** 2 + x3 ** 2))
        grad_V = (x1 * bump + 0j, np.zeros(GRID.shape, dtype=complex), 1j * PARTITION.k_bar + bump)
        state = IterState(tuple(g / PARTITION.k_bar for g in grad_V), grad_V, PARTITION.h)
        q, _, _ = assemble_and_solve_q(state, PARTITION.k_values[1], self.boundary, GRID)
        scale = float(np.max(np.abs(q.values)))
        np.testing.assert_allclose(q.values, q.values[::-1], atol=1e-10 * scale)


class MaximaTests(SimpleTestCase):
    def test_two_peaks(self):
        x1, x2, x3 = GRID.meshgrid()
        c = 1.0 + np.exp(-((x1 + 0.5) ** 2 + x2 ** 2 + x3 ** 2) / 0.05) \
            + 0.8 * np.exp(-((x1 - 0.5) ** 2 + x2 ** 2 + x3 ** 2) / 0.05)
        maxima = locate_maxima(RealField3(GRID, c))
        self.assertEqual(len(maxima), 2)
        self.assertLess(math.dist(maxima[0][0], (-0.5, 0.0, 0.0)), 0.2)
        self.assertLess(math.dist(maxima[1][0], (0.5, 0.0, 0.0)), 0.2)
        self.assertEqual(locate_maxima(RealField3(GRID, np.ones(GRID.shape))), [])


class SettingsAndStageTests(SimpleTestCase):
    def test_partition_checks(self):
        settings = AlgorithmSettings()
        with self.assertRaises(InvalidInput):
            settings.check_partition(WavenumberPartition.from_band(4.0, 5.0, 2))
        with self.assertRaises(InvalidInput):
            AlgorithmSettings(window_start=5).check_partition(PARTITION)
        with self.assertRaises(InvalidInput):
            AlgorithmSettings(c_max=1.0)

    def test_stage_tags_failures(self):
        with self.assertRaises(NumericalFailure) as raised:
            with stage('iterate'):
                raise FloatingPointError('overflow')
        self.assertEqual(raised.exception.stage, 'iterate')
        self.assertEqual(raised.exception.exit_code, 3)
        with self.assertRaises(InvalidInput):
            with stage('iterate'):
                raise InvalidInput('bad')

    def test_iteration_log(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'iterations.jsonl')
            with IterationLog(path) as log:
                log.record(n=1, i=2, value=0.5)
                log.record(n=1, relative_change=0.1)
            with open(path) as fd:
                lines = fd.read().splitlines()
        self.assertEqual(lines[0], '{"i": 2, "n": 1, "value": 0.5}')
        self.assertEqual(json.loads(lines[1])['relative_change'], 0.1)


class VacuumReconstructionTests(SimpleTestCase):
    def test_vacuum_is_a_fixed_point(self):
        log = IterationLog()
        settings = AlgorithmSettings(verify_accumulator=True)
        result = run_phased(vacuum_data(), Geometry(GRID, PARTITION), settings, log)
        self.assertLessEqual(float(np.max(np.abs(result.c.values - 1.0))), 1e-3)
        self.assertAlmostEqual(result.n_comp_rel, 1.0, delta=1e-3)
        self.assertAlmostEqual(result.n_comp, 1.5, delta=1.5e-3)
        self.assertEqual(result.n_star, 3)
        self.assertEqual(len(result.history), 3)
        self.assertEqual(len([e for e in log.entries if 'i' in e]), 3 * 3)
        self.assertEqual(result.maxima, [])

    def test_vacuum_coefficient_is_exact(self):
        log = IterationLog()
        run_phased(vacuum_data(), Geometry(GRID, PARTITION), AlgorithmSettings(), log)
        inner = [e for e in log.entries if 'i' in e]
        self.assertEqual(len(inner), 9)
        for entry in inner:
            self.assertAlmostEqual(entry['c_raw_min'], 1.0, delta=1e-9)
            self.assertAlmostEqual(entry['c_raw_max'], 1.0, delta=1e-9)
            self.assertEqual(entry['c_clamped_fraction'], 0.0)

    def test_repeated_runs_agree(self):
        x1, x2 = PLANE.meshgrid()
        data = vacuum_data()
        perturbed = ComplexPlaneData(PLANE, data.k_values, data.values * (1.0 + 1e-3 * np.exp(-(x1 ** 2 + x2 ** 2))))
        first = run_phased(perturbed, Geometry(GRID, PARTITION))
        second = run_phased(perturbed, Geometry(GRID, PARTITION))
        np.testing.assert_allclose(first.history, second.history, rtol=1e-12, atol=0)
        self.assertEqual(first.n_star, second.n_star)
        np.testing.assert_array_equal(first.c.values, second.c.values)

    def test_epsilon_beyond_the_log_branch(self):
        with self.assertRaises(InvalidInput):
            run_phased(vacuum_data(), Geometry(GRID, PARTITION), AlgorithmSettings(epsilon=1.0))

    def test_from_intensity_interpolates(self):
        measured = IntensityData(PLANE, (5.0, 4.0), np.ones((2,) + PLANE.counts))
        result = run(measured, Geometry(GRID, PARTITION))
        self.assertLessEqual(float(np.max(np.abs(result.c.values - 1.0))), 1e-3)
        summary = result.summary()
        self.assertEqual([h['n'] for h in summary['history']], [1, 2, 3])
