"""Thick-restart Lanczos with full reorthogonalization for the lowest eigenpairs."""

import logging

import numpy as np

logger = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    """Raised when an iterative eigensolver stops before all pairs converge."""

    def __init__(self, message, converged=None):
        super().__init__(message)
        self.converged = converged


def _orthogonalize(basis, w):
    # two passes of classical Gram-Schmidt ("twice is enough")
    for _ in range(2):
        w -= basis.T @ (basis @ w)
    return w


def lanczos_smallest(
    matvec,
    n,
    n_eig,
    *,
    tol=1e-10,
    max_iter=20000,
    basis_size=None,
    seed=0,
    norm_hint=None,
    max_breakdowns=3,
):
    """Lowest `n_eig` eigenpairs of a symmetric operator given only `matvec`.

    Parameters
    ----------
    matvec : callable
        ``v -> A @ v`` for a real symmetric ``A`` of size ``n``.
    n_eig : int
        Number of smallest eigenpairs wanted.
    tol : float
        Convergence threshold on ``||A y - theta y||_2`` for unit-norm Ritz
        vectors ``y``.
    max_iter : int
        Cap on the total number of matvecs.
    basis_size : int, optional
        Largest Krylov basis kept in memory between restarts.
    seed : int
        Seed of the pseudo-random start vector.

    Returns
    -------
    values : ndarray of shape (n_eig,)
    vectors : ndarray of shape (n, n_eig)
        Unit-norm Ritz vectors.
    info : dict
        ``matvecs``, ``restarts`` and ``breakdowns`` counters.
    """
    if not 1 <= n_eig <= n:
        raise ValueError(f"n_eig must be in [1, {n}], got {n_eig}")
    if basis_size is None:
        basis_size = max(2 * n_eig + 40, 160)
    m = min(n, max(basis_size, n_eig + 2))
    keep_target = min(m - 1, n_eig + max((m - n_eig) // 2, 1))

    rng = np.random.default_rng(seed)
    V = np.zeros((m + 1, n))
    v0 = rng.standard_normal(n)
    V[0] = v0 / np.linalg.norm(v0)

    T = np.zeros((m, m))
    k = 0  # number of locked Ritz vectors at the head of V
    matvecs = restarts = breakdowns = 0
    scale = norm_hint if norm_hint is not None else 1.0
    converged = np.zeros(n_eig, dtype=bool)

    while True:
        beta = 0.0
        for j in range(k, m):
            w = matvec(V[j])
            matvecs += 1
            alpha = float(V[j] @ w)
            T[j, j] = alpha
            w = _orthogonalize(V[: j + 1], w)
            beta = float(np.linalg.norm(w))
            if norm_hint is None:
                scale = max(scale, abs(alpha))
            if j + 1 == n:
                # Krylov space exhausted the whole vector space
                beta = 0.0
                V[j + 1] = 0.0
                break
            if beta <= 1e-13 * scale:
                breakdowns += 1
                if breakdowns > max_breakdowns:
                    raise ConvergenceError(
                        f"Lanczos broke down {breakdowns} times", converged=converged
                    )
                logger.debug("Lanczos breakdown at step %d; injecting new direction", j)
                fresh = np.random.default_rng(seed + breakdowns).standard_normal(n)
                fresh = _orthogonalize(V[: j + 1], fresh)
                V[j + 1] = fresh / np.linalg.norm(fresh)
                if j + 1 < m:
                    T[j, j + 1] = T[j + 1, j] = 0.0
                beta = 0.0
                continue
            V[j + 1] = w / beta
            if j + 1 < m:
                T[j, j + 1] = T[j + 1, j] = beta

        dim = min(m, n)
        theta, Y = np.linalg.eigh(T[:dim, :dim])
        resid = np.abs(beta * Y[dim - 1, :])
        converged = resid[:n_eig] <= tol
        if converged.all():
            break
        if matvecs >= max_iter:
            raise ConvergenceError(
                f"Lanczos did not converge within {max_iter} matvecs "
                f"({int(converged.sum())}/{n_eig} pairs converged)",
                converged=converged,
            )

        # thick restart: keep the lowest Ritz vectors plus the residual direction
        k = keep_target
        restarts += 1
        V[:k] = Y[:, :k].T @ V[:dim]
        V[k] = V[dim]
        T[:] = 0.0
        T[np.arange(k), np.arange(k)] = theta[:k]
        T[:k, k] = T[k, :k] = beta * Y[dim - 1, :k]
        logger.debug(
            "restart %d after %d matvecs, %d/%d converged, worst residual %.3e",
            restarts,
            matvecs,
            int(converged.sum()),
            n_eig,
            resid[:n_eig].max(),
        )

    vectors = (Y[:, :n_eig].T @ V[:dim]).T
    info = {"matvecs": matvecs, "restarts": restarts, "breakdowns": breakdowns}
    return theta[:n_eig].copy(), vectors, info
