"""Shared numerical kernels.

Standard normal distribution functions, a symmetric eigensolver with a
descending-eigenvalue convention, Mahalanobis distances, the implicit
M-scale solver used by S-estimators, and reproducible direction sampling
on the unit sphere.

Everything here is pure: no global state, no hidden RNGs.  Randomness is
always threaded through an explicit :class:`RngStream`, which is a value
(seed plus stream path) rather than a mutable generator, so replicates can
be evaluated from any number of workers in any order and still reproduce
bit-identical draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

__all__ = [
    "SQRT2",
    "RngStream",
    "SpdMatrix",
    "std_normal_cdf",
    "std_normal_quantile",
    "sym_eigen",
    "mahalanobis_sq",
    "m_scale",
    "unit_directions",
]

SQRT2 = math.sqrt(2.0)

# Relative tolerance below which the smallest eigenvalue is treated as zero
# (singular scatter matrix).
_SINGULAR_RTOL = 1e-12


def std_normal_cdf(x):
    """Standard normal CDF, accurate to full double precision.

    Uses ``erfc`` so the lower tail does not lose accuracy to cancellation;
    the absolute error is below 1e-15 everywhere.  Saturates at 0/1 for
    extreme arguments instead of raising.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return 0.5 * math.erfc(-float(x) / SQRT2)
    return 0.5 * _erfc_vec(-x / SQRT2)


_erfc_vec = np.vectorize(math.erfc, otypes=[float])


def std_normal_quantile(q):
    """Inverse standard normal CDF.

    Raises ``ValueError`` outside the open interval (0, 1).  The rational
    approximation in ``scipy.special.ndtri`` round-trips through
    :func:`std_normal_cdf` to better than 1e-12 over (1e-10, 1 - 1e-10).
    """
    qa = np.asarray(q, dtype=float)
    if np.any(~np.isfinite(qa)) or np.any(qa <= 0.0) or np.any(qa >= 1.0):
        raise ValueError(f"quantile argument must lie in (0, 1), got {q!r}")
    out = ndtri(qa)
    if out.ndim == 0:
        return float(out)
    return out


def sym_eigen(m, check=True):
    """Eigendecomposition of a symmetric matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues sorted in
    descending order and eigenvectors as the corresponding columns.

    Parameters
    ----------
    m : (p, p) array_like
        Symmetric matrix.
    check : bool
        Reject input whose asymmetry exceeds a small relative tolerance.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if check:
        scale = max(1.0, float(np.max(np.abs(a))))
        if float(np.max(np.abs(a - a.T))) > 1e-8 * scale:
            raise ValueError("matrix is not symmetric")
    vals, vecs = np.linalg.eigh(0.5 * (a + a.T))
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


@dataclass(frozen=True)
class SpdMatrix:
    """Symmetric positive-definite matrix with cached eigendecomposition.

    ``eigenvalues`` are descending; ``eigenvectors`` holds the matching
    orthonormal columns.  Construct through :meth:`from_matrix`, which
    enforces symmetry and positive definiteness.
    """

    entries: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_matrix(cls, m) -> "SpdMatrix":
        a = np.asarray(m, dtype=float)
        vals, vecs = sym_eigen(a)
        if vals[-1] <= 0.0:
            raise ValueError(
                f"matrix is not positive definite (smallest eigenvalue {vals[-1]:g})"
            )
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        vals.setflags(write=False)
        vecs.setflags(write=False)
        return cls(entries=a, eigenvalues=vals, eigenvectors=vecs)

    @classmethod
    def from_diagonal(cls, diag) -> "SpdMatrix":
        return cls.from_matrix(np.diag(np.asarray(diag, dtype=float)))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def inverse_quadratic(self, z):
        """``z' Sigma^{-1} z`` for rows of ``z``, via the eigenbasis."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        y = z @ self.eigenvectors
        return np.sum(y * y / self.eigenvalues, axis=1)

    def is_singular(self, rtol: float = _SINGULAR_RTOL) -> bool:
        return bool(self.eigenvalues[-1] <= rtol * max(self.eigenvalues[0], 1.0))


def mahalanobis_sq(x, mu, sigma):
    """Squared Mahalanobis distance ``(x - mu)' Sigma^{-1} (x - mu)``.

    ``sigma`` may be an :class:`SpdMatrix` or a plain symmetric PD array.
    Accepts a single vector or a stack of row vectors; near-singular
    ``sigma`` is rejected.
    """
    if not isinstance(sigma, SpdMatrix):
        sigma = SpdMatrix.from_matrix(sigma)
    if sigma.is_singular():
        raise ValueError("scatter matrix is numerically singular")
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    single = x.ndim == 1
    d = sigma.inverse_quadratic(np.atleast_2d(x) - mu)
    d = np.maximum(d, 0.0)
    return float(d[0]) if single else d


def m_scale(d, rho, delta, rtol=1e-12, max_iter=200):
    """Solve ``mean(rho(d_i / s)) = delta`` for the scale ``s > 0``.

    ``rho`` must be nondecreasing with ``rho(0) = 0`` and ``sup rho = 1``;
    ``d`` holds nonnegative residual magnitudes (S-estimators of scatter
    pass squared Mahalanobis distances).  Solved by monotone bracketing and
    bisection; the mean-rho residual of the result is below 1e-10.

    Raises ``ValueError`` when no root exists, i.e. the fraction of zero
    residuals is at least ``1 - delta``.
    """
    d = np.asarray(d, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise ValueError("d must be a nonempty 1-d array")
    if np.any(d < 0.0) or np.any(~np.isfinite(d)):
        raise ValueError("residuals must be finite and nonnegative")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    n = d.size
    nonzero = d[d > 0.0]
    if nonzero.size / n <= delta:
        raise ValueError(
            "m_scale has no root: fraction of zero residuals >= 1 - delta"
        )

    def f(s):
        return float(np.mean(rho(d / s))) - delta

    # Bracket by doubling outward from the median positive residual.
    s_lo = s_hi = float(np.median(nonzero))
    if s_lo <= 0.0:
        s_lo = s_hi = float(np.mean(nonzero))
    for _ in range(200):
        if f(s_lo) > 0.0:
            break
        s_lo *= 0.5
    for _ in range(200):
        if f(s_hi) < 0.0:
            break
        s_hi *= 2.0
    if not (f(s_lo) > 0.0 > f(s_hi)):
        raise ValueError("m_scale failed to bracket a root")
    for _ in range(max_iter):
        s_mid = 0.5 * (s_lo + s_hi)
        if f(s_mid) > 0.0:
            s_lo = s_mid
        else:
            s_hi = s_mid
        if (s_hi - s_lo) <= rtol * s_hi:
            break
    return 0.5 * (s_lo + s_hi)


@dataclass(frozen=True)
class RngStream:
    """Value-semantics random stream: a seed plus a stream path.

    Backed by the counter-based Philox generator, so identical
    ``(seed, path)`` pairs reproduce identical draw sequences regardless of
    process, thread schedule, or call order.  Derive independent
    sub-streams with :meth:`child`.
    """

    seed: int
    path: tuple = field(default=())

    def child(self, *key: int) -> "RngStream":
        return RngStream(self.seed, self.path + tuple(int(k) & 0xFFFFFFFF for k in key))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed) & (2**64 - 1),
                                    spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))


def unit_directions(count, p, rng):
    """Sample ``count`` i.i.d. uniform directions on the unit sphere in R^p.

    Normalized standard Gaussian vectors; deterministic for a fixed
    :class:`RngStream`.  Returns a ``(count, p)`` array whose rows have unit
    Euclidean norm.
    """
    if count < 1 or p < 1:
        raise ValueError("count and p must be >= 1")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    g = gen.standard_normal((count, p))
    norms = np.linalg.norm(g, axis=1)
    # A zero draw has probability 0; replace defensively.
    bad = norms < 1e-300
    if np.any(bad):
        g[bad] = 1.0
        norms = np.linalg.norm(g, axis=1)
    return g / norms[:, None]
