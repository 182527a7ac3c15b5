import numpy as np
import pytest

from blaschke_transfer import (
    BlaschkeParam,
    NoSuchEigenvalueError,
    StructureViolationError,
    TransferMatrix,
    assemble,
    convergence_study,
    eigenfunction,
    eigenvalues_dense,
    eigenvalues_triangular,
    match_spectra,
    predicted_spectrum,
)
from conftest import pairing_error


class TestPrediction:
    def test_real_case_multiplicities(self):
        pred = predicted_spectrum(BlaschkeParam(0.5), 3)
        assert pred.entries == ((1 + 0j, 1), (0.5 + 0j, 2), (0.25 + 0j, 2), (0.125 + 0j, 2))

    def test_doubling_case(self):
        pred = predicted_spectrum(BlaschkeParam(0), 5)
        assert pred.entries == ((1 + 0j, 1),)
        assert pred.includes_zero

    def test_complex_case(self):
        lam = 0.3 + 0.4j
        pred = predicted_spectrum(BlaschkeParam(lam), 2)
        values = sorted(pred.expanded(), key=lambda z: (abs(z), z.imag))
        expected = sorted(
            [1, lam, np.conj(lam), lam ** 2, np.conj(lam) ** 2],
            key=lambda z: (abs(z), complex(z).imag),
        )
        assert np.max(np.abs(np.array(values) - np.array(expected))) < 1e-15
        assert all(m == 1 for _, m in pred.entries[1:])

    def test_rejects_zero_depth(self):
        with pytest.raises(ValueError):
            predicted_spectrum(BlaschkeParam(0.4), 0)


class TestTriangular:
    def test_real_diagonal_read_off(self):
        m = assemble(BlaschkeParam(0.5), 3, method="fft")
        values = eigenvalues_triangular(m)
        assert np.max(np.abs(np.array(values) - [0.125, 0.25, 0.5, 1, 0.5, 0.25, 0.125])) < 1e-13

    def test_doubling_read_off(self):
        values = eigenvalues_triangular(assemble(BlaschkeParam(0), 3, method="fft"))
        assert np.max(np.abs(np.array(values) - [0, 0, 0, 1, 0, 0, 0])) < 1e-14

    def test_complex_diagonal(self):
        lam = 0.3 + 0.4j
        values = eigenvalues_triangular(assemble(BlaschkeParam(lam), 2, method="fft"))
        expected = [lam ** 2, lam, 1, np.conj(lam), np.conj(lam) ** 2]
        assert np.max(np.abs(np.array(values) - expected)) < 1e-13

    def test_structure_precondition(self):
        m = assemble(BlaschkeParam(0.4), 3, method="fft")
        entries = m.entries.copy()
        entries[0, 0] = 0.9  # corrupt a diagonal power
        bad = TransferMatrix(order=3, param=m.param, assembly_method="fft", entries=entries)
        with pytest.raises(StructureViolationError):
            eigenvalues_triangular(bad)


class TestDense:
    def test_agrees_with_read_off(self):
        m = assemble(BlaschkeParam(0.5), 3, method="fft")
        dense = eigenvalues_dense(m, tol=1e-8)
        assert pairing_error(eigenvalues_triangular(m), dense) < 1e-10

    def test_doubling_multiset(self):
        dense = eigenvalues_dense(assemble(BlaschkeParam(0), 4, method="fft"))
        assert sum(abs(v - 1) < 1e-12 for v in dense) == 1
        assert sum(abs(v) < 1e-12 for v in dense) == 8

    def test_large_modulus_with_loose_tolerance(self):
        m = assemble(BlaschkeParam(0.8), 10, method="fft")
        dense = eigenvalues_dense(m, tol=1e-6)
        assert pairing_error(eigenvalues_triangular(m), dense) < 1e-6

    def test_desk_scale_bound(self):
        m = assemble(BlaschkeParam(0.4), 3, method="fft")
        object.__setattr__(m, "order", 70)  # simulate an oversized window
        with pytest.raises(ValueError):
            eigenvalues_dense(m)


class TestMatchSpectra:
    def test_exact_values_pair_perfectly(self):
        pred = predicted_spectrum(BlaschkeParam(0.5), 4)
        report = match_spectra(pred.expanded(), pred, 1e-9)
        assert report.passed
        assert report.max_pair_error == 0.0

    def test_pipeline_on_solvable_case(self):
        p = BlaschkeParam(0.5)
        m = assemble(p, 8, method="quadrature")
        report = match_spectra(
            eigenvalues_triangular(m), predicted_spectrum(p, 8), 1e-9
        )
        assert report.passed
        assert report.max_pair_error < 1e-9

    def test_missing_eigenvalue_fails(self):
        p = BlaschkeParam(0.5)
        pred = predicted_spectrum(p, 3)
        computed = [v for v in pred.expanded() if abs(v - 0.5) > 1e-12]
        report = match_spectra(computed, pred, 1e-9)
        assert not report.passed
        assert report.unmatched_predicted

    def test_zero_cluster_absorbs_noise(self):
        pred = predicted_spectrum(BlaschkeParam(0), 3)
        computed = [1.0, 1e-14, -2e-15, 1e-13j]
        report = match_spectra(computed, pred, 1e-9)
        assert report.passed
        assert len(report.zero_cluster) == 3


class TestEigenfunction:
    def test_invariant_density(self, grid_param):
        m = assemble(grid_param, 8, method="fft")
        ef = eigenfunction(m, 1.0)
        assert ef.anchor == 0
        support = np.nonzero(np.abs(ef.coeffs) > 1e-12)[0] - 8
        assert list(support) == [0]
        assert ef.residual < 1e-12

    def test_first_power_copies(self):
        m = assemble(BlaschkeParam(0.4), 8, method="fft")
        first = eigenfunction(m, 0.4, copy=0)
        second = eigenfunction(m, 0.4, copy=1)
        assert first.anchor == -1 and second.anchor == 1
        assert first.residual < 1e-10 and second.residual < 1e-10
        # the two copies are the single-label eigenvectors at -1 and +1
        assert abs(abs(first.coeffs[8 - 1]) - 1.0) < 1e-12
        assert abs(abs(second.coeffs[8 + 1]) - 1.0) < 1e-12

    def test_second_power_support(self):
        m = assemble(BlaschkeParam(0.4), 8, method="quadrature")
        ef = eigenfunction(m, 0.16, copy=0)
        assert ef.anchor == -2
        support = set(np.nonzero(np.abs(ef.coeffs) > 1e-13)[0] - 8)
        assert support == {-2, -1}
        assert ef.residual < 1e-10

    def test_complex_parameter_distinct_anchors(self):
        lam = 0.3 + 0.4j
        m = assemble(BlaschkeParam(lam), 8, method="fft")
        a = eigenfunction(m, lam)
        b = eigenfunction(m, np.conj(lam))
        assert a.anchor == -1 and b.anchor == 1
        assert a.residual < 1e-10 and b.residual < 1e-10

    def test_unknown_eigenvalue_raises(self):
        m = assemble(BlaschkeParam(0.4), 8, method="fft")
        with pytest.raises(NoSuchEigenvalueError):
            eigenfunction(m, 0.123456)
        with pytest.raises(NoSuchEigenvalueError):
            eigenfunction(m, 0.4, copy=2)


class TestConvergence:
    def test_nesting_makes_differences_vanish(self):
        rows = convergence_study(BlaschkeParam(0.5), (4, 8, 12), 1e-10)
        assert rows[0].max_diff_from_prev is None
        for row in rows[1:]:
            assert row.max_diff_from_prev < 1e-10
            assert row.within_tol

    def test_doubling_table(self):
        rows = convergence_study(BlaschkeParam(0), (3, 5), 1e-12)
        for row in rows:
            values = sorted(row.eigenvalues, key=abs, reverse=True)
            assert abs(values[0] - 1) < 1e-13
            assert all(abs(v) < 1e-13 for v in values[1:])

    def test_large_modulus_with_runtimes(self):
        rows = convergence_study(BlaschkeParam(0.8), (8, 16), 1e-8)
        assert rows[1].max_diff_from_prev < 1e-8
        assert all(row.runtime_s >= 0.0 for row in rows)

    def test_rejects_unsorted_windows(self):
        with pytest.raises(ValueError):
            convergence_study(BlaschkeParam(0.4), (8, 4), 1e-8)
