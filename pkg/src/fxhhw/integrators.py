"""Time integration for the semi-discrete system V'(tau) = A(tau) V(tau).

Constant-coefficient systems use the Arnoldi/Krylov action of the matrix
exponential; time-dependent ones use an explicit modified midpoint stepper
(two internal substeps plus the smoothing combination per global step, which
keeps the leapfrog parasitic mode damped while preserving second order).
Spectral diagnostics report the largest real part of A and the largest
eigenvalue of its symmetric part, the quantity the stability criterion uses.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InstabilityError, InvalidArgumentError, KrylovConvergenceError

DENSE_EIG_CUTOFF = 1000


@dataclass
class KrylovConfig:
    """Arnoldi settings: subspace size, residual tolerance, breakdown threshold.

    ``substeps > 1`` evaluates exp(tau A) as the exact composition
    (exp(tau A / k))^k, each application running its own Arnoldi build with
    the same residual gate; this keeps the subspace small for strongly stiff
    operators without ever returning an unconverged result.
    """

    dim: int | None = None  # None -> min(100, N)
    tol: float = 1e-9
    breakdown_tol: float | None = None  # None -> 1e-14 * ||A||_1
    tau: float = 1.0
    check_every: int = 10
    substeps: int = 1

    def __post_init__(self):
        if self.dim is not None and self.dim < 1:
            raise InvalidArgumentError(f"subspace dimension must be >= 1, got {self.dim}")
        if self.substeps < 1:
            raise InvalidArgumentError(f"substeps must be >= 1, got {self.substeps}")


def _as_csr(A):
    if sp.issparse(A):
        return A.tocsr()
    return sp.csr_matrix(np.asarray(A, dtype=float))


def krylov_expm_action(A, v0, cfg: KrylovConfig | None = None):
    """Approximate exp(tau*A) @ v0 with an Arnoldi-projected exponential.

    Builds an orthonormal basis of span{v0, A v0, ..., A^(Y-1) v0} by modified
    Gram-Schmidt, then returns beta * V_Y exp(H_Y) e1.  Early breakdown
    (h_{j+1,j} below threshold) truncates the basis and yields the exact
    action.  If the subspace cap is reached while the residual estimate still
    exceeds the tolerance, raises instead of returning silently.
    """
    cfg = cfg or KrylovConfig()
    A = _as_csr(A)
    n = A.shape[0]
    v0 = np.asarray(v0, dtype=float).reshape(-1)
    if v0.shape[0] != n:
        raise InvalidArgumentError("dimension mismatch between A and v0")
    beta = float(np.linalg.norm(v0))
    if beta == 0.0:
        raise InvalidArgumentError("initial vector must be nonzero")
    scale = cfg.tau / cfg.substeps
    if scale != 1.0:
        A = (A * scale).tocsr()
    if cfg.substeps > 1:
        w = v0
        inner = KrylovConfig(dim=cfg.dim, tol=cfg.tol, breakdown_tol=cfg.breakdown_tol,
                             tau=1.0, check_every=cfg.check_every, substeps=1)
        for _ in range(cfg.substeps):
            w = krylov_expm_action(A, w, inner)
        return w

    dim = cfg.dim if cfg.dim is not None else min(100, n)
    if dim > n:
        warnings.warn(f"Krylov dimension {dim} exceeds N={n}; clamped", stacklevel=2)
        dim = n
    btol = cfg.breakdown_tol
    if btol is None:
        btol = 1e-14 * float(spla.norm(A, 1)) if A.nnz else 0.0

    # Basis vectors stored as contiguous rows; Gram-Schmidt with one
    # re-orthogonalization pass (numerically equivalent to the modified
    # Gram-Schmidt loop, but BLAS-2 throughout).
    V = np.empty((dim + 1, n))
    H = np.zeros((dim + 1, dim))
    V[0] = v0 / beta
    used = dim
    residual = np.inf
    happy = False
    for j in range(dim):
        w = A @ V[j]
        Q = V[: j + 1]
        h = Q @ w
        w -= Q.T @ h
        corr = Q @ w
        w -= Q.T @ corr
        H[: j + 1, j] = h + corr
        hnext = float(np.linalg.norm(w))
        H[j + 1, j] = hnext
        if hnext <= btol:
            used = j + 1
            happy = True
            residual = 0.0
            break
        V[j + 1] = w / hnext
        if (j + 1) % cfg.check_every == 0 or j == dim - 1:
            expH = scipy.linalg.expm(H[: j + 1, : j + 1])
            residual = beta * hnext * abs(expH[j, 0])
            if residual <= cfg.tol * max(1.0, beta):
                used = j + 1
                break
    else:
        used = dim

    expH = scipy.linalg.expm(H[:used, :used])
    if not happy and residual > cfg.tol * max(1.0, beta):
        raise KrylovConvergenceError(
            f"Krylov subspace of dimension {used} left residual estimate "
            f"{residual:.3e} above tolerance {cfg.tol:.1e}; increase dim",
            residual=residual,
            dim=used,
        )
    return beta * (V[:used].T @ expH[:, 0])


@dataclass
class MidpointConfig:
    """Fixed-step midpoint settings; steps * delta_tau must equal the horizon."""

    delta_tau: float
    steps: int

    def __post_init__(self):
        if not self.delta_tau > 0:
            raise InvalidArgumentError(f"delta_tau must be positive, got {self.delta_tau}")
        if self.steps < 1:
            raise InvalidArgumentError(f"steps must be >= 1, got {self.steps}")

    @classmethod
    def from_horizon(cls, horizon, delta_tau):
        steps = int(round(horizon / delta_tau))
        if steps < 1 or abs(steps * delta_tau - horizon) > 1e-9 * max(1.0, horizon):
            raise InvalidArgumentError(
                f"delta_tau {delta_tau} does not divide the horizon {horizon}"
            )
        return cls(delta_tau=horizon / steps, steps=steps)

    @property
    def horizon(self):
        return self.delta_tau * self.steps


def _matvec_fn(A):
    if hasattr(A, "matvec") and hasattr(A, "is_time_dependent"):
        return lambda tau, x: A.matvec(x, tau=tau)
    if callable(A) and not (sp.issparse(A) or isinstance(A, np.ndarray)):
        return lambda tau, x: A(tau) @ x
    M = _as_csr(A)
    return lambda tau, x: M @ x

def modified_midpoint_solve(A, v0, cfg: MidpointConfig, divergence_factor=1e6):
    """March V' = A(tau) V to the horizon with the explicit modified midpoint.

    Each global step of size delta_tau runs the scheme
        Z0 = V,  Z1 = Z0 + dt A(t) Z0,  Z2 = Z0 + 2 dt A(t+dt) Z1,
        V  = (Z2 + Z1 + dt A(t+2dt) Z2) / 2,     dt = delta_tau / 2,
    i.e. the midpoint sequence with the smoothing combination applied per
    step.  Second order in delta_tau; aborts with the growth diagnostic if
    the iterate norm exceeds ``divergence_factor`` times its initial value.

    ``A`` may be an :class:`~fxhhw.operators.AssembledOperator`, a constant
    matrix, or a callable ``tau -> matrix``.
    """
    mv = _matvec_fn(A)
    v = np.asarray(v0, dtype=float).reshape(-1).copy()
    norm0 = float(np.linalg.norm(v))
    limit = divergence_factor * max(norm0, 1e-300)
    dt = 0.5 * cfg.delta_tau
    for step in range(cfg.steps):
        t0 = step * cfg.delta_tau
        z1 = v + dt * mv(t0, v)
        z2 = v + 2.0 * dt * mv(t0 + dt, z1)
        v = 0.5 * (z2 + z1 + dt * mv(t0 + 2.0 * dt, z2))
        nv = float(np.linalg.norm(v))
        if not np.isfinite(nv) or nv > limit:
            raise InstabilityError(
                f"modified midpoint diverged at step {step + 1}/{cfg.steps} "
                f"(growth {nv / max(norm0, 1e-300):.3e}); reduce delta_tau or "
                "check the operator's spectral bound",
                step=step + 1,
                growth=nv / max(norm0, 1e-300),
            )
    return v


@dataclass
class SpectralReport:
    """Spectral diagnostics of the assembled operator.

    ``re_lambda_max`` is the real part of the dominant (largest-magnitude)
    eigenvalue, the quantity a power/Arnoldi iteration on A produces and the
    one whose magnitude tracks grid refinement.  ``rightmost_re`` is the
    largest real part (the actual decay/growth bound; dense problems only by
    default).  ``sym_lambda_max`` is the top eigenvalue of (A + A*)/2, the
    logarithmic-norm quantity of the uniform-stability criterion; for these
    operators it is typically slightly positive because the degenerate
    variance boundary leaves pure-advection rows whose symmetric part is
    indefinite, even when every eigenvalue of A itself has negative real
    part.
    """

    re_lambda_max: float | None
    sym_lambda_max: float
    rightmost_re: float | None
    iterations: int
    converged: bool


def estimate_lambda_max(A, tau=0.0, free_only=True, maxiter=8000):
    """Spectral diagnostics for an operator or matrix; see SpectralReport.

    For operators with pinned boundary rows the diagnostics apply to the
    free dynamics block, which excludes the structural zero eigenvalues of
    the pinned rows.
    """
    if hasattr(A, "free_matrix"):
        M = A.free_matrix(tau) if free_only else A.matrix(tau)
    else:
        M = _as_csr(A)
    n = M.shape[0]

    if n <= DENSE_EIG_CUTOFF:
        dense = M.toarray()
        ev = np.linalg.eigvals(dense)
        sym_max = float(np.linalg.eigvalsh(0.5 * (dense + dense.T))[-1])
        dom = float(ev[np.argmax(np.abs(ev))].real)
        return SpectralReport(dom, sym_max, float(ev.real.max()), n, True)

    converged = True
    dom = None
    try:
        vals = spla.eigs(M, k=1, which="LM", maxiter=maxiter,
                         ncv=min(n - 1, 40), tol=1e-7, return_eigenvectors=False)
        dom = float(vals[np.argmax(np.abs(vals))].real)
    except (spla.ArpackNoConvergence, spla.ArpackError):
        converged = False

    # Two-phase shifted Lanczos for the symmetric part: the dominant (most
    # negative) end converges quickly; shifting by it makes the wanted end
    # the dominant one.
    S = (0.5 * (M + M.T)).tocsr()
    ncv = min(n - 1, 48)
    try:
        lam_lo = float(
            spla.eigsh(S, k=1, which="SA", maxiter=maxiter, ncv=ncv, tol=1e-7,
                       return_eigenvectors=False)[0]
        )
        shifted = (S - lam_lo * sp.identity(n, format="csr")).tocsr()
        lam_span = float(
            spla.eigsh(shifted, k=1, which="LM", maxiter=maxiter, ncv=ncv, tol=1e-7,
                       return_eigenvectors=False)[0]
        )
        sym_max = lam_lo + lam_span
    except spla.ArpackNoConvergence as err:
        converged = False
        vals = getattr(err, "eigenvalues", None)
        sym_max = float(vals[0]) if vals is not None and len(vals) else np.nan
    return SpectralReport(dom, sym_max, None, ncv, converged)
