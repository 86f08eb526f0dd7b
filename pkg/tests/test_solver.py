import numpy as np
import pytest

from voxvie.errors import SizeLimitError
from voxvie.solver import SolveReport, dense_pinv_matrix, gmres, spectrum


def random_system(rng, n, diag_boost=3.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    a += diag_boost * np.sqrt(n) * np.eye(n)
    b = rng.normal(size=n) + 1j * rng.normal(size=n)
    return a, b


class TestGmres:
    def test_identity_converges_in_one(self, rng):
        b = rng.normal(size=20) + 0j
        x, rep = gmres(lambda v: v, b, tol=1e-10)
        assert rep.iterations == 1
        assert rep.converged
        assert np.allclose(x, b)

    def test_matches_direct_solve(self, rng):
        a, b = random_system(rng, 50)
        x, rep = gmres(lambda v: a @ v, b, tol=1e-9, maxit=100)
        xd = np.linalg.solve(a, b)
        assert rep.converged
        assert np.linalg.norm(x - xd) / np.linalg.norm(xd) < 1e-8

    def test_exact_inverse_preconditioner(self, rng):
        a, b = random_system(rng, 40)
        a_inv = np.linalg.inv(a)
        x, rep = gmres(
            lambda v: a @ v, b, apply_pinv=lambda v: a_inv @ v, tol=1e-10, maxit=10
        )
        assert rep.converged and rep.iterations <= 2

    def test_zero_rhs(self):
        x, rep = gmres(lambda v: v, np.zeros(5, dtype=complex), tol=1e-6)
        assert rep.converged
        assert rep.iterations == 1
        assert np.all(x == 0)
        assert rep.residuals[0] == 1.0 and rep.residuals[-1] == 0.0

    def test_residual_history_invariants(self, rng):
        a, b = random_system(rng, 60, diag_boost=1.0)
        x, rep = gmres(lambda v: a @ v, b, tol=1e-8, maxit=200)
        hist = np.asarray(rep.residuals)
        assert hist[0] == 1.0
        assert len(hist) == rep.iterations + 1
        assert np.all(np.diff(hist) <= 1e-14)  # non-increasing
        if rep.converged:
            assert hist[-1] <= 1e-8

    def test_true_residual_matches_estimate(self, rng):
        a, b = random_system(rng, 50)
        x, rep = gmres(lambda v: a @ v, b, tol=1e-8, maxit=100)
        explicit = np.linalg.norm(b - a @ x) / np.linalg.norm(b)
        assert rep.true_residual == pytest.approx(explicit, rel=1e-10)
        assert abs(rep.true_residual - rep.residuals[-1]) < 1e-10

    def test_preconditioned_residual_is_true_residual(self, rng):
        # right preconditioning reports the unpreconditioned residual
        a, b = random_system(rng, 40)
        p = np.diag(1.0 / np.diag(a))
        x, rep = gmres(lambda v: a @ v, b, apply_pinv=lambda v: p @ v, tol=1e-9, maxit=100)
        explicit = np.linalg.norm(b - a @ x) / np.linalg.norm(b)
        assert abs(rep.residuals[-1] - explicit) < 1e-9

    def test_solution_invariant_under_preconditioning(self, rng):
        a, b = random_system(rng, 50)
        tol = 1e-7
        x_plain, r1 = gmres(lambda v: a @ v, b, tol=tol, maxit=200)
        p = np.linalg.inv(a + 0.1 * np.eye(50))
        x_prec, r2 = gmres(
            lambda v: a @ v, b, apply_pinv=lambda v: p @ v, tol=tol, maxit=200
        )
        assert r1.converged and r2.converged
        rel = np.linalg.norm(x_plain - x_prec) / np.linalg.norm(x_plain)
        assert rel < 10 * tol

    def test_deterministic_reports(self, rng):
        a, b = random_system(rng, 45, diag_boost=1.5)
        _, r1 = gmres(lambda v: a @ v, b, tol=1e-7, maxit=120)
        _, r2 = gmres(lambda v: a @ v, b, tol=1e-7, maxit=120)
        assert r1.iterations == r2.iterations
        assert r1.residuals == r2.residuals

    def test_maxit_exhaustion_reports_not_converged(self, rng):
        a, b = random_system(rng, 50, diag_boost=0.0)
        x, rep = gmres(lambda v: a @ v, b, tol=1e-14, maxit=5)
        assert not rep.converged
        assert rep.iterations == 5

    def test_restarted_still_converges(self, rng):
        a, b = random_system(rng, 50)
        x, rep = gmres(lambda v: a @ v, b, tol=1e-8, maxit=400, restart=10)
        assert rep.converged
        xd = np.linalg.solve(a, b)
        assert np.linalg.norm(x - xd) / np.linalg.norm(xd) < 1e-6

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            gmres(lambda v: v, np.ones(3), tol=0.0)
        with pytest.raises(ValueError):
            gmres(lambda v: v, np.ones(3), maxit=0)

    def test_report_serializable(self, rng):
        import json

        a, b = random_system(rng, 10)
        _, rep = gmres(lambda v: a @ v, b, tol=1e-6, maxit=50)
        json.dumps(rep.to_dict())


class TestSpectrum:
    def test_identity_all_ones(self):
        ev = spectrum(np.eye(12))
        assert np.allclose(ev, 1.0)

    def test_diagonal_matrix(self, rng):
        d = rng.normal(size=15) + 1j * rng.normal(size=15)
        ev = spectrum(np.diag(d))
        assert np.allclose(np.sort_complex(ev), np.sort_complex(d))

    def test_preconditioned_product(self, rng):
        a = rng.normal(size=(10, 10)) + 2 * np.eye(10)
        p = np.linalg.inv(a)
        ev = spectrum(a, p)
        assert np.allclose(ev, 1.0, atol=1e-10)

    def test_size_guard(self):
        with pytest.raises(SizeLimitError):
            spectrum(np.zeros((3001, 3001)))
        with pytest.raises(SizeLimitError):
            dense_pinv_matrix(None, 5000)
