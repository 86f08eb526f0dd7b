"""Right-preconditioned full GMRES and a dense spectrum probe.

The solver iterates on A P^{-1} u = b and returns x = P^{-1} u, so the
recorded residual history is always the true relative residual of the
original system. Orthogonalization is modified Gram-Schmidt with a single
reorthogonalization pass when cancellation is detected.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from voxvie.errors import BreakdownError, SizeLimitError

SPECTRUM_GUARD = 3000


@dataclass
class SolveReport:
    """Iteration count, residual history, and timing of one linear solve."""

    iterations: int
    residuals: list[float]
    converged: bool
    solve_seconds: float = 0.0
    build_seconds: float = 0.0
    true_residual: float = float("nan")
    memory: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "relative_residuals": list(self.residuals),
            "solve_seconds": self.solve_seconds,
            "build_seconds": self.build_seconds,
            "true_residual": self.true_residual,
            "memory": dict(self.memory),
        }


def _gmres_cycle(apply_op, r0, beta, bnorm, tol, m, residuals):
    """One Arnoldi/Givens cycle on the (preconditioned) operator.

    Returns (u, iterations, converged, lucky) with u the cycle correction in
    the preconditioned variable.
    """
    basis = [r0 / beta]
    r_cols: list[np.ndarray] = []  # rotated upper-triangular columns
    cs: list[complex] = []
    sn: list[complex] = []
    g = [beta + 0.0j]
    converged = False
    lucky = False
    j = 0
    while j < m:
        # copy: the operator may return its argument (e.g. identity), and
        # the MGS update below works in place
        w = np.array(apply_op(basis[j]), dtype=np.complex128)
        norm_before = np.linalg.norm(w)
        h = np.empty(j + 2, dtype=np.complex128)
        for i in range(j + 1):
            h[i] = np.vdot(basis[i], w)
            w -= h[i] * basis[i]
        # DGKS criterion: one reorthogonalization pass on heavy cancellation
        if np.linalg.norm(w) < 0.7071 * norm_before:
            for i in range(j + 1):
                corr = np.vdot(basis[i], w)
                h[i] += corr
                w -= corr * basis[i]
        h[j + 1] = np.linalg.norm(w)
        lucky = h[j + 1].real <= 1e-14 * max(norm_before.real, 1e-300)
        if not lucky:
            basis.append(w / h[j + 1])
        for i in range(j):
            hi = h[i]
            h[i] = np.conj(cs[i]) * hi + np.conj(sn[i]) * h[i + 1]
            h[i + 1] = -sn[i] * hi + cs[i] * h[i + 1]
        denom = np.hypot(abs(h[j]), abs(h[j + 1]))
        if denom == 0.0:
            raise BreakdownError(
                f"GMRES stalled at iteration {len(residuals)}: zero Hessenberg "
                f"column with relative residual {residuals[-1]:.3e} above tol {tol:.3e}"
            )
        c, s = h[j] / denom, h[j + 1] / denom
        cs.append(c)
        sn.append(s)
        h[j] = np.conj(c) * h[j] + np.conj(s) * h[j + 1]
        r_cols.append(h[: j + 1].copy())
        g.append(-s * g[j])
        g[j] = np.conj(c) * g[j]
        j += 1
        est = abs(g[j]) / bnorm
        residuals.append(float(est))
        if est <= tol or lucky:
            converged = est <= tol
            if lucky and not converged:
                raise BreakdownError(
                    f"Arnoldi breakdown at iteration {len(residuals) - 1} with "
                    f"relative residual {est:.3e} above tol {tol:.3e}"
                )
            break
    r_mat = np.zeros((j, j), dtype=np.complex128)
    for col, vals in enumerate(r_cols):
        r_mat[: col + 1, col] = vals
    y = np.linalg.solve(r_mat, np.asarray(g[:j]))
    u = np.stack(basis[:j], axis=1) @ y
    return u, j, converged


def gmres(
    apply_a,
    b: np.ndarray,
    *,
    apply_pinv=None,
    tol: float = 1e-4,
    maxit: int = 2000,
    restart: int | None = None,
) -> tuple[np.ndarray, SolveReport]:
    """Solve A x = b with full (non-restarted) GMRES from a zero initial guess.

    apply_a and apply_pinv are callables on flat complex vectors; with
    apply_pinv given the iteration runs on the right-preconditioned system
    A P^{-1} u = b and returns x = P^{-1} u. The residual history is
    normalized, starts at 1.0, and gains one entry per iteration. Setting
    restart enables classical restarted GMRES(m).
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if maxit < 1:
        raise ValueError("maxit must be >= 1")
    b = np.asarray(b, dtype=np.complex128).reshape(-1)
    t0 = time.perf_counter()
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        report = SolveReport(
            iterations=1,
            residuals=[1.0, 0.0],
            converged=True,
            solve_seconds=time.perf_counter() - t0,
            true_residual=0.0,
        )
        return np.zeros_like(b), report

    pinv = apply_pinv if apply_pinv is not None else None
    op = apply_a if pinv is None else (lambda v: apply_a(pinv(v)))

    x = np.zeros_like(b)
    residuals = [1.0]
    total = 0
    converged = False
    while total < maxit and not converged:
        r0 = b - apply_a(x) if total else b.copy()
        beta = np.linalg.norm(r0)
        if beta / bnorm <= tol:
            converged = True
            break
        m = maxit - total if restart is None else min(restart, maxit - total)
        u, used, converged = _gmres_cycle(op, r0, beta, bnorm, tol, m, residuals)
        total += used
        x = x + (u if pinv is None else pinv(u))

    true_res = float(np.linalg.norm(b - apply_a(x)) / bnorm)
    report = SolveReport(
        iterations=int(total),
        residuals=residuals,
        converged=bool(converged),
        solve_seconds=time.perf_counter() - t0,
        true_residual=true_res,
    )
    return x, report


def spectrum(dense_a: np.ndarray, dense_pinv: np.ndarray | None = None) -> np.ndarray:
    """Eigenvalues of A, or of the right-preconditioned A P^{-1}."""
    a = np.asarray(dense_a)
    if a.shape[0] > SPECTRUM_GUARD:
        raise SizeLimitError(
            f"spectrum refused: size {a.shape[0]} exceeds guard {SPECTRUM_GUARD}"
        )
    if dense_pinv is not None:
        a = a @ dense_pinv
    return np.linalg.eigvals(a)


def dense_pinv_matrix(prec, n: int) -> np.ndarray:
    """Dense P^{-1} by applying a preconditioner to the identity (small n)."""
    if n > SPECTRUM_GUARD:
        raise SizeLimitError(f"dense inverse refused: {n} exceeds {SPECTRUM_GUARD}")
    return prec.apply(np.eye(n, dtype=np.complex128))
