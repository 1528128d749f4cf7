"""Dense SVD baseline: decomposition, energy coverage, and user profiles.

The ratings matrix is densified with zeros for unrated cells and decomposed
with LAPACK's stable dense SVD.  Correctness is pinned by invariants
(orthonormal factor columns, reconstruction to tolerance, descending
singular values) rather than by the choice of algorithm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD: ``U @ diag(sigma) @ V.T`` reconstructs the input.

    U is m x r and V is n x r with orthonormal columns, r = min(m, n);
    sigma is descending and nonnegative, trailing zeros retained.
    """

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray


def svd(matrix) -> SvdResult:
    """Thin SVD with a deterministic sign convention.

    Each column of U is flipped (together with the matching column of V)
    so that its entry of largest magnitude is nonnegative; singular vector
    signs are otherwise arbitrary, which would make golden tests flaky.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("expected a nonempty 2-D matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")

    u, sigma, vt = np.linalg.svd(a, full_matrices=False)
    v = vt.T
    for col in range(u.shape[1]):
        anchor = np.argmax(np.abs(u[:, col]))
        if u[anchor, col] < 0:
            u[:, col] = -u[:, col]
            v[:, col] = -v[:, col]
    u.flags.writeable = False
    sigma.flags.writeable = False
    v.flags.writeable = False
    return SvdResult(U=u, sigma=sigma, V=v)


def energy_coverage(sigma, k: int) -> float:
    """Fraction of squared singular-value mass in the first k values.

    Defined as 1.0 for an all-zero spectrum (nothing is lost at any k).
    """
    s = np.asarray(sigma, dtype=float)
    if not 0 <= k <= s.size:
        raise ValueError(f"k={k} outside [0, {s.size}]")
    total = float(np.sum(s * s))
    if total == 0.0:
        return 1.0
    return float(np.sum(s[:k] * s[:k])) / total


def factors_for_coverage(sigma, p: float) -> int:
    """Smallest k whose energy coverage reaches p."""
    if not 0 < p <= 1:
        raise ValueError("coverage fraction must be in (0, 1]")
    s = np.asarray(sigma, dtype=float)
    total = float(np.sum(s * s))
    if total == 0.0:
        return 0
    cumulative = np.cumsum(s * s)
    k = int(np.searchsorted(cumulative, p * total, side="left")) + 1
    return min(k, s.size)


def user_profiles(res: SvdResult, k: int, weighting: str = "plain") -> np.ndarray:
    """First k left singular vectors per user, optionally scaled by sigma.

    ``weighting`` is "plain" (U columns as-is) or "sigma" (each column
    multiplied by its singular value).
    """
    if not 0 <= k <= res.U.shape[1]:
        raise ValueError(f"k={k} outside [0, {res.U.shape[1]}]")
    if weighting not in ("plain", "sigma"):
        raise ValueError(f"unknown weighting {weighting!r}")
    profiles = res.U[:, :k].copy()
    if weighting == "sigma":
        profiles *= res.sigma[:k]
    return profiles
