"""Dense numerical kernels.

Spectra and Hurwitz margins, the continuous algebraic Riccati equation,
positive-definite Lyapunov weights, Kronecker assembly of the reduced
coupled dynamics, and a fixed-step fourth-order integrator. Everything
here is plain float64 linear algebra at desk scale; determinism matters
more than asymptotic speed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

__all__ = [
    "HURWITZ_EPS",
    "Spectrum",
    "RiccatiSolution",
    "IntegrationResult",
    "StabilizabilityError",
    "RiccatiError",
    "LyapunovError",
    "spectrum",
    "hurwitz_margin",
    "unstabilizable_mode",
    "solve_care",
    "solve_lyapunov_weight",
    "assemble_reduced_dynamics",
    "integrate_rk4",
]

# Margins at or below this count as "not Hurwitz"; raw margins are always
# reported alongside the verdict so the threshold stays auditable.
HURWITZ_EPS = 1e-9


class StabilizabilityError(ValueError):
    """A system pair has an unstable mode the input cannot reach."""


class RiccatiError(RuntimeError):
    """The Riccati solve failed numerically."""


class LyapunovError(ValueError):
    """The Lyapunov weight problem is infeasible or ill-posed."""


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues of a square matrix, sorted by (real, imaginary)."""

    eigenvalues: np.ndarray
    max_real: float
    min_real: float


def spectrum(m) -> Spectrum:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    if m.size == 0:
        return Spectrum(np.empty(0, dtype=complex), -np.inf, np.inf)
    vals = np.sort_complex(np.linalg.eigvals(m))
    reals = vals.real
    return Spectrum(vals, float(reals.max()), float(reals.min()))


def hurwitz_margin(m, eps: float = HURWITZ_EPS) -> tuple[bool, float]:
    """Stability margin of a matrix: the distance of its rightmost
    eigenvalue from the imaginary axis. Empty matrices are vacuously
    Hurwitz with infinite margin."""
    spec = spectrum(m)
    margin = -spec.max_real
    return margin > eps, float(margin)


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    """Stabilizing solution of the unit-cost Riccati equation.

    P solves  P A + A^T P - P B B^T P = -I  with P symmetric positive
    definite, and K = -B^T P makes A + B K Hurwitz. ``residual`` is the
    Frobenius norm of the equation defect.
    """

    P: np.ndarray
    K: np.ndarray
    residual: float


def _care_residual(a, b, p) -> np.ndarray:
    return p @ a + a.T @ p - p @ b @ b.T @ p + np.eye(a.shape[0])


def unstabilizable_mode(a, b) -> complex | None:
    """Eigenvalue-pencil stabilizability test.

    Returns an eigenvalue of A in the closed right half plane that the
    input matrix cannot reach (the one with the most rank-deficient
    pencil), or None when the pair is stabilizable.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.shape[0]
    scale = max(1.0, float(np.linalg.norm(a)), float(np.linalg.norm(b)))
    worst: complex | None = None
    worst_smin = np.inf
    for lam in np.linalg.eigvals(a):
        if lam.real < -HURWITZ_EPS:
            continue
        pencil = np.hstack([a - lam * np.eye(n), b]).astype(complex)
        smin = float(np.linalg.svd(pencil, compute_uv=False)[-1])
        if smin <= 1e-8 * scale and smin < worst_smin:
            worst, worst_smin = complex(lam), smin
    return worst


def _check_stabilizable(a: np.ndarray, b: np.ndarray) -> None:
    mode = unstabilizable_mode(a, b)
    if mode is not None:
        raise StabilizabilityError(f"mode {mode:.6g} is unstable and unreachable")


def solve_care(a, b) -> RiccatiSolution:
    """Solve the unit-cost continuous algebraic Riccati equation.

    Uses the stable invariant subspace of the Hamiltonian matrix
    [[A, -B B^T], [-I, -A^T]] via an ordered real Schur decomposition,
    followed by Newton refinement when the residual warrants it.

    Raises:
        StabilizabilityError: when some unstable mode of A is not
            reachable through B.
        RiccatiError: when the Hamiltonian has eigenvalues too close to
            the imaginary axis or the subspace solve is ill-conditioned.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"A must be square, got {a.shape}")
    if b.ndim != 2 or b.shape[0] != a.shape[0]:
        raise ValueError(f"B must be {a.shape[0]} x m, got {b.shape}")
    n = a.shape[0]
    _check_stabilizable(a, b)

    bbt = b @ b.T
    ham = np.block([[a, -bbt], [-np.eye(n), -a.T]])
    _, z, sdim = scipy.linalg.schur(ham, output="real", sort="lhp")
    if sdim != n:
        ham_eigs = np.linalg.eigvals(ham)
        closest = float(np.min(np.abs(ham_eigs.real)))
        raise RiccatiError(
            f"stable subspace has dimension {sdim}, expected {n}; "
            f"Hamiltonian spectrum is {closest:.3g} from the imaginary axis"
        )
    u1 = z[:n, :n]
    u2 = z[n:, :n]
    cond = np.linalg.cond(u1)
    if not np.isfinite(cond) or cond > 1e12:
        raise RiccatiError(f"invariant subspace basis is ill-conditioned (cond={cond:.3g})")
    p = np.linalg.solve(u1.T, u2.T).T
    p = 0.5 * (p + p.T)

    # Newton steps squeeze out subspace roundoff; each solves a Lyapunov
    # equation in the current closed loop.
    norm_scale = max(1.0, float(np.linalg.norm(p)))
    for _ in range(5):
        res = _care_residual(a, b, p)
        if float(np.linalg.norm(res)) <= 1e-10 * norm_scale:
            break
        acl = a - bbt @ p
        delta = scipy.linalg.solve_continuous_lyapunov(acl.T, -res)
        p = p + 0.5 * (delta + delta.T)
        norm_scale = max(1.0, float(np.linalg.norm(p)))

    residual = float(np.linalg.norm(_care_residual(a, b, p)))
    if residual > 1e-8 * norm_scale:
        raise RiccatiError(f"residual {residual:.3g} exceeds tolerance after refinement")
    eigs = np.linalg.eigvalsh(p)
    if eigs[0] <= 0.0:
        raise RiccatiError(f"solution is not positive definite (min eigenvalue {eigs[0]:.3g})")
    closed_ok, closed_margin = hurwitz_margin(a - bbt @ p)
    if not closed_ok:
        raise RiccatiError(f"closed loop is not Hurwitz (margin {closed_margin:.3g})")
    return RiccatiSolution(P=p, K=-b.T @ p, residual=residual)


def solve_lyapunov_weight(m, rhs=None) -> np.ndarray:
    """Find symmetric positive definite W with  W M + M^T W = Q.

    Feasible whenever every eigenvalue of M has positive real part; Q
    defaults to the identity and must be symmetric positive definite.

    Raises:
        LyapunovError: naming the offending eigenvalue when the spectrum
            condition fails, or on a bad right-hand side.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got {m.shape}")
    k = m.shape[0]
    if k == 0:
        return np.empty((0, 0))
    if rhs is None:
        q = np.eye(k)
    else:
        q = np.asarray(rhs, dtype=float)
        if q.shape != (k, k):
            raise LyapunovError(f"right-hand side must be {k} x {k}, got {q.shape}")
        if float(np.linalg.norm(q - q.T)) > 1e-10 * max(1.0, float(np.linalg.norm(q))):
            raise LyapunovError("right-hand side must be symmetric")
        if np.linalg.eigvalsh(q)[0] <= 0.0:
            raise LyapunovError("right-hand side must be positive definite")

    eigs = np.linalg.eigvals(m)
    worst = eigs[np.argmin(eigs.real)]
    if worst.real <= 0.0:
        raise LyapunovError(
            f"eigenvalue {worst:.6g} does not have positive real part; no weight exists"
        )

    w = scipy.linalg.solve_continuous_lyapunov(m.T, q)
    w = 0.5 * (w + w.T)
    defect = float(np.linalg.norm(w @ m + m.T @ w - q))
    if defect > 1e-8 * float(np.linalg.norm(q)):
        raise LyapunovError(f"solve defect {defect:.3g} exceeds tolerance")
    if np.linalg.eigvalsh(w)[0] <= 0.0:
        raise LyapunovError("computed weight is not positive definite")
    return w


def assemble_reduced_dynamics(
    a_mats: Sequence[np.ndarray],
    sizes: Sequence[int],
    reduced: np.ndarray,
    c: float,
) -> np.ndarray:
    """Assemble blockdiag{I_(size_i - 1) (x) A_i} - c * (reduced (x) I_n).

    Clusters of size one contribute nothing; with all clusters singleton
    the result is the 0-by-0 matrix (trivially stable).
    """
    a_mats = [np.asarray(m, dtype=float) for m in a_mats]
    if len(a_mats) != len(sizes):
        raise ValueError(f"{len(a_mats)} system matrices for {len(sizes)} clusters")
    n = a_mats[0].shape[0]
    for m in a_mats:
        if m.shape != (n, n):
            raise ValueError("system matrices must share one square dimension")
    dim = sum(s - 1 for s in sizes)
    reduced = np.asarray(reduced, dtype=float)
    if reduced.shape != (dim, dim):
        raise ValueError(f"reduced matrix must be {dim} x {dim}, got {reduced.shape}")
    if dim == 0:
        return np.empty((0, 0))

    blocks = [np.kron(np.eye(s - 1), m) for m, s in zip(a_mats, sizes) if s > 1]
    a_hat = scipy.linalg.block_diag(*blocks)
    return a_hat - c * np.kron(reduced, np.eye(n))


@dataclass(frozen=True, eq=False)
class IntegrationResult:
    """Fixed-step trajectory sampled at every step.

    When the state stops being finite the trajectory is truncated at the
    last finite sample and ``diverged`` is set.
    """

    t: np.ndarray
    states: np.ndarray
    diverged: bool


def integrate_rk4(
    f: Callable[[float, np.ndarray], np.ndarray],
    x0,
    h: float,
    horizon: float,
) -> IntegrationResult:
    """Classical fourth-order Runge-Kutta with a fixed step."""
    if h <= 0.0:
        raise ValueError(f"step must be positive, got {h}")
    if horizon < 0.0:
        raise ValueError(f"horizon must be nonnegative, got {horizon}")
    x0 = np.asarray(x0, dtype=float).ravel()
    steps = int(round(horizon / h))
    t = np.arange(steps + 1) * h
    out = np.empty((steps + 1, x0.size))
    out[0] = x0
    x = x0.copy()
    for k in range(steps):
        tk = t[k]
        k1 = f(tk, x)
        k2 = f(tk + 0.5 * h, x + 0.5 * h * k1)
        k3 = f(tk + 0.5 * h, x + 0.5 * h * k2)
        k4 = f(tk + h, x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            return IntegrationResult(t=t[: k + 1], states=out[: k + 1], diverged=True)
        out[k + 1] = x
    return IntegrationResult(t=t, states=out, diverged=False)
