"""Location-scatter estimator suite for the contamination benchmark.

Eight estimators, each a pure function of the dataset (and an explicit
random stream where subsampling is involved): the sample covariance
benchmark and seven robust alternatives (minimum volume ellipsoid, minimum
covariance determinant, bisquare S, Rocke S, SHR-based MM, Stahel-Donoho,
and the deepest-scatter estimator with estimated location).

All robust estimators are calibrated to target the identity matrix at the
standard Gaussian model: subset-based methods carry chi-square consistency
factors, M-scales are divided by the corresponding Gaussian scale constant,
and the depth estimator divides out its quantile calibration.  Subset and
direction selection is index-based, so matched-seed runs are exactly
translation equivariant.

The canonical algorithms are implemented directly with documented defaults
(500 elemental starts for MVE/MCD, 20 concentration steps, 200 iterations at
1e-9 tolerance for the iterative estimators, 1000 p directions plus pair
differences for Stahel-Donoho).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats
from scipy.integrate import quad

from .deepest import SearchConfig, deepest_scatter, tukey_median
from .depth import as_dataset
from .numerics import RngStream, m_scale, unit_directions

__all__ = [
    "ESTIMATOR_IDS",
    "EstimatorResult",
    "rho_bisquare",
    "weight_bisquare",
    "rho_shr",
    "weight_shr",
    "shr_mid_polynomial",
    "rocke_gamma",
    "rho_rocke",
    "weight_rocke",
    "scov",
    "mve",
    "mcd",
    "s_bisquare",
    "rocke",
    "mm",
    "stahel_donoho",
    "mdepth_estimator",
    "run_estimator",
]

ESTIMATOR_IDS = ("SCOV", "MVE", "MCD", "SE", "ROCKE", "MM", "SD", "MDEPTH")

_SQRT_BETA = 0.6744897501960817      # Phi^{-1}(3/4)
_BETA = _SQRT_BETA * _SQRT_BETA

_MAX_ITER = 200
_ITER_TOL = 1e-9


@dataclass
class EstimatorResult:
    estimator_id: str
    location: np.ndarray
    scatter: np.ndarray
    iterations: int = 0
    converged: bool = True
    singular: bool = False
    extras: dict = field(default_factory=dict)


def _is_singular(cov):
    vals = np.linalg.eigvalsh(0.5 * (cov + cov.T))
    return bool(vals[0] <= 1e-12 * max(1.0, vals[-1]))


# ---------------------------------------------------------------------------
# rho / weight functions (arguments are squared-distance ratios)
# ---------------------------------------------------------------------------

def rho_bisquare(t):
    t = np.asarray(t, dtype=float)
    return np.where(t >= 1.0, 1.0, 1.0 - (1.0 - np.minimum(t, 1.0)) ** 3)


def weight_bisquare(t):
    t = np.asarray(t, dtype=float)
    return np.where(t >= 1.0, 0.0, 3.0 * (1.0 - np.minimum(t, 1.0)) ** 2)


_SHR_TOP = 6.494


def shr_mid_polynomial(d):
    """Quartic bridge of the smoothed-hard-rejection rho on 4 < d <= 9."""
    d = np.asarray(d, dtype=float)
    return 3.534 - 1.944 * d + 0.864 * d ** 2 - 0.104 * d ** 3 + 0.004 * d ** 4


def rho_shr(d):
    d = np.asarray(d, dtype=float)
    out = np.where(d <= 4.0, d, np.where(d <= 9.0, shr_mid_polynomial(d), _SHR_TOP))
    return out / _SHR_TOP


def weight_shr(d):
    d = np.asarray(d, dtype=float)
    mid = -1.944 + 1.728 * d - 0.312 * d ** 2 + 0.016 * d ** 3
    out = np.where(d <= 4.0, 1.0, np.where(d <= 9.0, mid, 0.0))
    return out / _SHR_TOP


def rocke_gamma(p, alpha=0.1):
    """Band half-width of the translated biflat weight."""
    return min(1.0, stats.chi2.ppf(1.0 - alpha, p) / p - 1.0)


def weight_rocke(t, gamma):
    t = np.asarray(t, dtype=float)
    inside = (t > 1.0 - gamma) & (t < 1.0 + gamma)
    w = 1.0 - ((t - 1.0) / gamma) ** 2
    return np.where(inside, np.maximum(w, 0.0), 0.0)


def rho_rocke(t, gamma):
    """Normalized integral of the biflat weight: 0 below the band, 1 above,
    and rho(1) = 1/2 by symmetry."""
    t = np.asarray(t, dtype=float)
    lo = 1.0 - gamma
    z = np.clip(t, lo, 1.0 + gamma)
    area = (z - lo) - ((z - 1.0) ** 3 + gamma ** 3) / (3.0 * gamma ** 2)
    out = np.clip(area / (4.0 * gamma / 3.0), 0.0, 1.0)
    return np.where(t <= lo, 0.0, np.where(t >= 1.0 + gamma, 1.0, out))


# ---------------------------------------------------------------------------
# Gaussian consistency constants
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _bisquare_scale_constant(p, delta=0.5):
    """s solving E rho_bisquare(chi2_p / s) = delta, via partial moments."""
    def mean_rho(s):
        f2 = stats.chi2.cdf(s, p + 2)
        f4 = stats.chi2.cdf(s, p + 4)
        f6 = stats.chi2.cdf(s, p + 6)
        tail = 1.0 - stats.chi2.cdf(s, p)
        m1 = p * f2
        m2 = p * (p + 2) * f4
        m3 = p * (p + 2) * (p + 4) * f6
        return 3 * m1 / s - 3 * m2 / s ** 2 + m3 / s ** 3 + tail

    lo, hi = 1e-6, 10.0 * p
    while mean_rho(hi) > delta:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mean_rho(mid) > delta:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@lru_cache(maxsize=None)
def _rocke_scale_constant(p, alpha=0.1, delta=0.5):
    """s solving E rho_rocke(chi2_p / s) = delta (numeric quadrature)."""
    gamma = rocke_gamma(p, alpha)

    def mean_rho(s):
        val, _ = quad(lambda d: rho_rocke(d / s, gamma) * stats.chi2.pdf(d, p),
                      0.0, s * (1.0 + gamma), limit=200)
        val += 1.0 - stats.chi2.cdf(s * (1.0 + gamma), p)
        return val

    lo, hi = 1e-6, 10.0 * p
    while mean_rho(hi) > delta:
        hi *= 2.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mean_rho(mid) > delta:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _mm_tuning_constant(p):
    from ._mm_constants import MM_TUNING

    if p in MM_TUNING:
        return MM_TUNING[p]
    keys = sorted(MM_TUNING)
    if p < keys[0]:
        return MM_TUNING[keys[0]]
    if p > keys[-1]:
        # Tail growth is close to linear in p.
        k0, k1 = keys[-2], keys[-1]
        slope = (MM_TUNING[k1] - MM_TUNING[k0]) / (k1 - k0)
        return MM_TUNING[k1] + slope * (p - k1)
    lo = max(k for k in keys if k <= p)
    hi = min(k for k in keys if k >= p)
    if lo == hi:
        return MM_TUNING[lo]
    w = (p - lo) / (hi - lo)
    return (1 - w) * MM_TUNING[lo] + w * MM_TUNING[hi]


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _chol_gate(cov, rtol=1e-7):
    """Cholesky factor of a trustworthy SPD matrix, else None."""
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        return None
    diag = np.diag(chol)
    if diag.min() <= rtol * diag.max():
        return None
    return chol


def _mahal_sq(x, mu, cov):
    z = x - mu
    try:
        sol = np.linalg.solve(cov, z.T)
    except np.linalg.LinAlgError:
        return None
    return np.maximum(np.einsum("ij,ji->i", z, sol), 0.0)


def _median_distance_rescale(x, mu, cov):
    """Rescale so the median squared distance matches the chi-square median.

    The standard data-driven finite-sample correction for subset-based
    estimators: under the clean Gaussian model the factor is close to 1,
    while an imploded estimate (e.g. under central point-mass contamination)
    is inflated back to a consistent scale.  Breakdown point 1/2.
    """
    d = _mahal_sq(x, mu, cov)
    if d is None:
        return cov
    p = cov.shape[0]
    factor = float(np.median(d)) / stats.chi2.ppf(0.5, p)
    if np.isfinite(factor) and factor > 0.0:
        return cov * factor
    return cov


def _chi2_reweight(x, mu, cov, passes=2, coverage=0.975):
    """Hard-rejection reweighting at the chi-square coverage cutoff.

    Each pass recomputes the trimmed mean and covariance from the points
    inside the cutoff, restores Gaussian consistency, and re-anchors the
    scale on the median distance; a second pass lets the shape recover from
    a distorted raw subset estimate.
    """
    n, p = x.shape
    cutoff = stats.chi2.ppf(coverage, p)
    factor = stats.chi2.cdf(cutoff, p + 2) / coverage
    for _ in range(passes):
        d = _mahal_sq(x, mu, cov)
        if d is None:
            break
        keep = d <= cutoff
        if keep.sum() <= p + 1:
            break
        mu_new = x[keep].mean(axis=0)
        z = x[keep] - mu_new
        cov_new = (z.T @ z / keep.sum()) / factor
        cov_new = _median_distance_rescale(x, mu_new, cov_new)
        if _chol_gate(cov_new) is None:
            break
        mu, cov = mu_new, cov_new
    return mu, cov


def _weighted_moments(x, w):
    sw = float(w.sum())
    mu = (w[:, None] * x).sum(axis=0) / sw
    z = x - mu
    cov = (w[:, None] * z).T @ z / sw
    return mu, 0.5 * (cov + cov.T)


def _unit_det(cov):
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0.0 or not np.isfinite(logdet):
        return None
    p = cov.shape[0]
    return cov / np.exp(logdet / p)


# ---------------------------------------------------------------------------
# 1. Sample covariance
# ---------------------------------------------------------------------------

def scov(data):
    """Sample mean and 1/n covariance; rank deficiency is flagged, not fatal."""
    x = as_dataset(data)
    n, p = x.shape
    if n < 2:
        raise ValueError("need at least two observations")
    mu = x.mean(axis=0)
    z = x - mu
    cov = z.T @ z / n
    cov = 0.5 * (cov + cov.T)
    return EstimatorResult("SCOV", mu, cov, iterations=0, converged=True,
                           singular=_is_singular(cov))


# ---------------------------------------------------------------------------
# 2. Minimum volume ellipsoid
# ---------------------------------------------------------------------------

def mve(data, subsets=500, rng=None):
    """Best of ``subsets`` elemental ellipsoids inflated to cover h points.

    Each random (p+1)-subset defines a center and shape; the candidate
    volume is det(shape) * (h-th smallest shape distance)^p.  The winner is
    rescaled so that the covering radius matches the chi-square quantile at
    coverage level h/n, which makes the estimator consistent at the
    Gaussian model.
    """
    x = as_dataset(data)
    n, p = x.shape
    if n <= p + 1:
        raise ValueError("need n > p + 1")
    rng = rng if rng is not None else RngStream(0)
    gen = rng.generator()
    h = (n + p + 1) // 2
    c2 = stats.chi2.ppf(h / n, p)

    def coverage(mu, cov):
        chol = _chol_gate(cov)
        if chol is None:
            return None
        logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
        d = _mahal_sq(x, mu, cov)
        if d is None:
            return None
        m2 = float(np.partition(d, h - 1)[h - 1])
        if m2 <= 0.0:
            return None
        return logdet + p * np.log(m2), m2, d

    cands = []
    for _ in range(subsets):
        idx = gen.choice(n, size=p + 1, replace=False)
        sub = x[idx]
        mu = sub.mean(axis=0)
        z = sub - mu
        cov = z.T @ z / (p + 1)
        got = coverage(mu, cov)
        if got is None:
            continue
        cands.append((got[0], got[1], mu, cov, got[2]))
    if not cands:
        raise ValueError("all elemental subsets were degenerate")
    cands.sort(key=lambda c: c[0])

    # Concentration refinement of the best candidates: recenter on the h
    # covered points while the covering volume keeps shrinking.
    best = None
    for logvol, m2, mu, cov, d in cands[:10]:
        for _ in range(10):
            keep = np.argpartition(d, h - 1)[:h]
            mu_new = x[keep].mean(axis=0)
            z = x[keep] - mu_new
            cov_new = z.T @ z / h
            got = coverage(mu_new, cov_new)
            if got is None or got[0] >= logvol - 1e-12:
                break
            logvol, m2, d = got
            mu, cov = mu_new, cov_new
        if best is None or logvol < best[0]:
            best = (logvol, mu, cov * (m2 / c2))
    _, mu, cov = best
    cov = _median_distance_rescale(x, mu, cov)
    mu, cov = _chi2_reweight(x, mu, cov)
    return EstimatorResult("MVE", mu, 0.5 * (cov + cov.T), iterations=subsets,
                           converged=True, singular=_is_singular(cov),
                           extras={"h": h})


# ---------------------------------------------------------------------------
# 3. Minimum covariance determinant (fast-MCD)
# ---------------------------------------------------------------------------

def mcd(data, subsets=500, csteps=20, rng=None):
    """Fast-MCD: random elemental starts refined by concentration steps.

    Each step keeps the h observations with smallest Mahalanobis distance
    and recomputes mean and covariance; the determinant never increases.
    The h-subset covariance is rescaled by the standard chi-square
    consistency factor for coverage h/n.
    """
    x = as_dataset(data)
    n, p = x.shape
    if n <= p + 1:
        raise ValueError("need n > p + 1")
    rng = rng if rng is not None else RngStream(0)
    gen = rng.generator()
    h = (n + p + 1) // 2

    best = None
    for _ in range(subsets):
        size = p + 1
        idx = gen.choice(n, size=size, replace=False)
        mu = x[idx].mean(axis=0)
        z = x[idx] - mu
        cov = z.T @ z / size
        # Grow degenerate starts until the covariance is trustworthy.
        while _chol_gate(cov) is None and size < min(n, 4 * (p + 1)):
            size += p
            idx = gen.choice(n, size=min(size, n), replace=False)
            mu = x[idx].mean(axis=0)
            z = x[idx] - mu
            cov = z.T @ z / len(idx)
        if _chol_gate(cov) is None:
            continue
        old_det = np.inf
        trace = []
        it = 0
        for it in range(csteps):
            d = _mahal_sq(x, mu, cov)
            if d is None:
                break
            keep = np.argpartition(d, h - 1)[:h]
            mu = x[keep].mean(axis=0)
            z = x[keep] - mu
            cov = z.T @ z / h
            chol = _chol_gate(cov)
            if chol is None:
                break
            det = 2.0 * float(np.sum(np.log(np.diag(chol))))
            trace.append(det)
            if det >= old_det - 1e-12:
                old_det = min(det, old_det)
                break
            old_det = det
        if not np.isfinite(old_det) or old_det == np.inf:
            continue
        if best is None or old_det < best[0]:
            best = (old_det, mu, cov, it + 1, trace)
    if best is None:
        raise ValueError("all MCD starts were degenerate")
    _, mu, cov, iters, det_trace = best
    alpha = h / n
    factor = stats.chi2.cdf(stats.chi2.ppf(alpha, p), p + 2) / alpha
    cov = cov / factor
    cov = _median_distance_rescale(x, mu, cov)
    mu, cov = _chi2_reweight(x, mu, cov)
    return EstimatorResult("MCD", mu, 0.5 * (cov + cov.T), iterations=iters,
                           converged=True, singular=_is_singular(cov),
                           extras={"h": h, "logdet_trace": det_trace})


# ---------------------------------------------------------------------------
# 4/5. S-estimators (bisquare and Rocke weights)
# ---------------------------------------------------------------------------

def _s_iterations(x, mu, shape, rho, weight_fn, scale_constant, est_id,
                  normalize_argument=False):
    """Shared fixed-point loop for S-type estimators.

    ``shape`` has unit determinant throughout; the M-scale of squared
    distances is tracked and must not increase across accepted iterations.
    """
    n, p = x.shape
    s_prev = np.inf
    mu_best, shape_best, s_best = mu, shape, None
    converged = False
    scale_trace = []
    it = 0
    for it in range(_MAX_ITER):
        d = _mahal_sq(x, mu, shape)
        if d is None:
            break
        try:
            s = m_scale(d, rho, 0.5)
        except ValueError:
            break
        if s_best is None or s < s_best:
            mu_best, shape_best, s_best = mu, shape, s
        if abs(s - s_prev) <= _ITER_TOL * s:
            scale_trace.append(s)
            converged = True
            break
        if s > s_prev * (1.0 + 1e-12):
            # Fixed point overshoot: keep the best iterate, do not accept.
            converged = True
            break
        scale_trace.append(s)
        s_prev = s
        t = d / s
        w = weight_fn(t)
        if w.sum() <= 0.0 or np.count_nonzero(w) <= p:
            break
        mu_new, cov = _weighted_moments(x, w)
        shape_new = _unit_det(cov)
        if shape_new is None:
            break
        mu, shape = mu_new, shape_new
    if s_best is None:
        raise ValueError(f"{est_id}: scale iteration collapsed")
    cov = (s_best / scale_constant) * shape_best
    return EstimatorResult(est_id, mu_best, 0.5 * (cov + cov.T),
                           iterations=it + 1, converged=converged,
                           singular=_is_singular(cov),
                           extras={"m_scale": s_best,
                                   "scale_constant": scale_constant,
                                   "scale_trace": scale_trace})


def s_bisquare(data, delta=0.5, rng=None, subsets=500):
    """Bisquare S-estimator of multivariate location and scatter.

    Iterative reweighting from an MVE start; the bisquare rho acts on
    squared-distance ratios and delta = 1/2 gives maximal breakdown.  The
    final scatter is the unit-determinant shape times the M-scale, divided
    by the Gaussian scale constant so the estimator targets the true
    covariance at the normal model.
    """
    x = as_dataset(data)
    n, p = x.shape
    if n <= 2 * p:
        raise ValueError("need n > 2p")
    rng = rng if rng is not None else RngStream(0)
    start = mve(x, subsets=subsets, rng=rng.child(1))
    shape = _unit_det(start.scatter)
    if shape is None:
        raise ValueError("degenerate MVE start")
    if delta != 0.5:
        raise ValueError("only delta = 1/2 is calibrated")
    return _s_iterations(x, start.location, shape, rho_bisquare,
                         weight_bisquare, _bisquare_scale_constant(p, delta),
                         "SE")


def rocke(data, alpha=0.1, rng=None, subsets=500):
    """Rocke's S-estimator with the translated biflat weight.

    Same fixed-point scheme as the bisquare S-estimator, with weights
    supported on the band (1 - gamma, 1 + gamma) around the normalized
    squared distance 1; the M-scale equation with the integrated-biflat rho
    anchors the median distance ratio at 1.
    """
    x = as_dataset(data)
    n, p = x.shape
    if n <= 2 * p:
        raise ValueError("need n > 2p")
    rng = rng if rng is not None else RngStream(0)
    gamma = rocke_gamma(p, alpha)
    start = mve(x, subsets=subsets, rng=rng.child(1))
    shape = _unit_det(start.scatter)
    if shape is None:
        raise ValueError("degenerate MVE start")
    res = _s_iterations(x, start.location, shape,
                        lambda t: rho_rocke(t, gamma),
                        lambda t: weight_rocke(t, gamma),
                        _rocke_scale_constant(p, alpha), "ROCKE")
    res.extras["gamma"] = gamma
    return res


# ---------------------------------------------------------------------------
# 6. MM-estimator with the SHR rho
# ---------------------------------------------------------------------------

def _mm_refine(x, mu, shape, sigma0):
    """SHR shape refinement at fixed cutoff scale; objective never rises."""
    p = x.shape[1]

    def objective(m, sh):
        d = _mahal_sq(x, m, sh)
        if d is None:
            return None, None
        return float(np.mean(rho_shr(d / sigma0))), d

    obj, d = objective(mu, shape)
    if obj is None:
        raise ValueError("degenerate MM start")
    converged = False
    obj_trace = [obj]
    it = 0
    for it in range(_MAX_ITER):
        w = weight_shr(d / sigma0)
        if w.sum() <= 0.0 or np.count_nonzero(w) <= p:
            break
        mu_new, cov = _weighted_moments(x, w)
        shape_new = _unit_det(cov)
        if shape_new is None:
            break
        obj_new, d_new = objective(mu_new, shape_new)
        if obj_new is None or obj_new > obj * (1.0 + 1e-12):
            converged = True
            break
        delta_rel = abs(obj - obj_new) / max(obj, 1e-300)
        mu, shape, obj, d = mu_new, shape_new, obj_new, d_new
        obj_trace.append(obj)
        if delta_rel <= _ITER_TOL:
            converged = True
            break
    return mu, shape, obj, it + 1, converged, obj_trace


def mm(data, rng=None, subsets=500):
    """MM-estimator: S-bisquare start, then SHR shape refinement.

    The smoothed-hard-rejection rho is applied to squared distances divided
    by c * S0, where S0 is the S-step scale and c is the per-dimension
    tuning constant calibrated (once, by seeded simulation) for 95
    percent Gaussian efficiency.  The objective never increases across
    accepted iterations, and the final scatter is S0 times the refined
    unit-determinant shape.
    """
    x = as_dataset(data)
    n, p = x.shape
    if n <= 2 * p:
        raise ValueError("need n > 2p")
    rng = rng if rng is not None else RngStream(0)
    s_res = s_bisquare(x, rng=rng.child(1), subsets=subsets)
    sign, logdet = np.linalg.slogdet(s_res.scatter)
    if sign <= 0.0 or not np.isfinite(logdet):
        raise ValueError("degenerate S-start scale")
    s0 = float(np.exp(logdet / p))
    c = _mm_tuning_constant(p)
    mu, shape, obj, iters, converged, obj_trace = _mm_refine(
        x, s_res.location, _unit_det(s_res.scatter), c * s0)
    cov = s0 * shape
    return EstimatorResult("MM", mu, 0.5 * (cov + cov.T), iterations=iters,
                           converged=converged, singular=_is_singular(cov),
                           extras={"tuning": c, "s_scale": s0,
                                   "objective": obj,
                                   "objective_trace": obj_trace})


# ---------------------------------------------------------------------------
# 7. Stahel-Donoho
# ---------------------------------------------------------------------------

def stahel_donoho(data, dirs=None, rng=None):
    """Stahel-Donoho projection-pursuit estimator.

    Outlyingness is the worst standardized projection over sampled
    directions (1000 per dimension, plus all pair differences for
    n <= 100), with median location and quartile-calibrated MAD scale.
    Weights are the squared-cutoff Huber type min(1, (c/t)^2) with
    c = sqrt(chi2_{p, 0.95}); the same weights feed the location and the
    scatter.
    """
    x = as_dataset(data)
    n, p = x.shape
    if n <= 2 * p:
        raise ValueError("need n > 2p")
    rng = rng if rng is not None else RngStream(0)
    count = 1000 * p if dirs is None else int(dirs)
    u = [unit_directions(count, p, rng.child(1))]
    if n <= 100:
        diffs = x[:, None, :] - x[None, :, :]
        iu = np.triu_indices(n, k=1)
        d = diffs[iu]
        nrm = np.linalg.norm(d, axis=1)
        keep = nrm > 1e-12 * max(1.0, nrm.max(initial=0.0))
        if np.any(keep):
            u.append(d[keep] / nrm[keep][:, None])
    u = np.vstack(u)

    proj = x @ u.T                                     # (n, K)
    med = np.median(proj, axis=0)
    mad = np.median(np.abs(proj - med), axis=0) / _SQRT_BETA
    ok = mad > 1e-12 * np.maximum(1.0, np.abs(med))
    if not np.any(ok):
        raise ValueError("every projection direction has zero scale")
    t = np.max(np.abs(proj[:, ok] - med[ok]) / mad[ok], axis=1)
    c = np.sqrt(stats.chi2.ppf(0.95, p))
    w = np.where(t <= c, 1.0, (c / np.maximum(t, c)) ** 2)
    mu, cov = _weighted_moments(x, w)
    return EstimatorResult("SD", mu, cov, iterations=1, converged=True,
                           singular=_is_singular(cov),
                           extras={"directions": int(u.shape[0]),
                                   "cutoff": float(c),
                                   "outlyingness": t, "weights": w})


# ---------------------------------------------------------------------------
# 8. Deepest estimator
# ---------------------------------------------------------------------------

def mdepth_estimator(data, cfg=None, rng=None):
    """Deepest location (halfspace) and deepest scatter around it.

    The raw deepest scatter targets the squared normal third quartile times
    the covariance; that calibration constant is divided out so the clean
    Gaussian model is matched, and is recorded in the diagnostics.
    """
    x = as_dataset(data)
    n, p = x.shape
    if n < p + 1:
        raise ValueError("need n >= p + 1")
    if cfg is None:
        rng = rng if rng is not None else RngStream(0)
        cfg = SearchConfig(rng=rng)
    theta = tukey_median(x, cfg)
    gamma, info = deepest_scatter(x, theta, cfg, return_info=True)
    cov = gamma.entries / _BETA
    return EstimatorResult("MDEPTH", theta, cov, iterations=len(info["trace"]),
                           converged=True, singular=_is_singular(cov),
                           extras={"normalization": _BETA,
                                   "depth": info["depth"]})


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

def run_estimator(estimator_id, data, rng):
    """Uniform dispatch used by the simulation engine."""
    eid = estimator_id.upper()
    if eid == "SCOV":
        return scov(data)
    if eid == "MVE":
        return mve(data, rng=rng)
    if eid == "MCD":
        return mcd(data, rng=rng)
    if eid == "SE":
        return s_bisquare(data, rng=rng)
    if eid == "ROCKE":
        return rocke(data, rng=rng)
    if eid == "MM":
        return mm(data, rng=rng)
    if eid == "SD":
        return stahel_donoho(data, rng=rng)
    if eid == "MDEPTH":
        return mdepth_estimator(data, rng=rng)
    raise KeyError(f"unknown estimator id {estimator_id!r}; "
                   f"known: {ESTIMATOR_IDS}")
