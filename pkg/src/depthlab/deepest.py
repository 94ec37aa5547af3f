"""Maximizers of the depth functions: deepest location, scatter, regression,
and location-scale fits of a dataset.

Exact enumeration is used wherever the empirical objective is piecewise
constant over a known finite candidate set (univariate medians, the joint
location-scale fit); elsewhere a deterministic seeded ascent over data-driven
candidates with shrinking perturbations is used.  Accepted steps never
decrease the (sampled or exact) depth, so the returned fit is always at
least as deep as the initialization.

Ties are broken deterministically: first by depth, then by the documented
secondary keys (smallest scale, closeness to the coordinatewise median,
candidate order).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .depth import as_dataset, ls_depth2, regression_depth, tukey_depth
from .numerics import RngStream, SpdMatrix, unit_directions

__all__ = [
    "SearchConfig",
    "tukey_median",
    "deepest_scatter",
    "deepest_locscale1",
    "deepest_locscale2",
    "deepest_regression",
    "lower_median",
]


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the stochastic depth-ascent searches."""

    direction_count: int = 500          # sampled directions per dimension
    restarts: int = 8
    max_iterations: int = 100
    step_shrink: float = 0.5
    tolerance: float = 1e-3
    rng: RngStream = field(default_factory=lambda: RngStream(2024))

    def __post_init__(self):
        if min(self.direction_count, self.restarts, self.max_iterations) < 1:
            raise ValueError("counts must be >= 1")
        if not 0.0 < self.step_shrink < 1.0:
            raise ValueError("step_shrink must lie in (0, 1)")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")


def lower_median(values):
    """Lower-middle order statistic; equals the usual median for odd n."""
    v = np.sort(np.asarray(values, dtype=float))
    return float(v[(v.size - 1) // 2])


# ---------------------------------------------------------------------------
# Halfspace-deepest location
# ---------------------------------------------------------------------------

class _ProjectionDepth:
    """Sampled halfspace depth of many candidate points via sorted projections."""

    def __init__(self, x, dirs):
        self.u = np.asarray(dirs, dtype=float)
        self.n = x.shape[0]
        self.proj = np.sort(x @ self.u.T, axis=0)      # (n, K)

    def depths(self, thetas):
        t = np.atleast_2d(thetas) @ self.u.T           # (C, K)
        out = np.empty(t.shape[0])
        below = np.empty_like(t, dtype=np.int64)
        above = np.empty_like(t, dtype=np.int64)
        for k in range(self.u.shape[0]):
            col = self.proj[:, k]
            tol = 1e-12 * max(1.0, abs(col[0]), abs(col[-1]))
            below[:, k] = np.searchsorted(col, t[:, k] + tol, side="right")
            above[:, k] = self.n - np.searchsorted(col, t[:, k] - tol, side="left")
        np.minimum(below, above, out=below)
        out[:] = below.min(axis=1) / self.n
        return out


def tukey_median(data, cfg=None):
    """Deepest location: maximizer of the halfspace depth over candidates.

    p = 1 returns the exact sample median (lower-middle convention for even
    n).  Otherwise the search starts from the coordinatewise median and
    ascends through data points, pairwise midpoints (small n), and shrinking
    Gaussian perturbations; the exact p = 2 depth is used when affordable.
    """
    x = as_dataset(data)
    n, p = x.shape
    cfg = cfg or SearchConfig()
    if p == 1:
        return np.array([lower_median(x[:, 0])])

    exact = p == 2 and n <= 400
    if exact:
        def depth_many(cands):
            return np.array([tukey_depth(c, x, exact=True) for c in cands])
    else:
        pool = [unit_directions(cfg.direction_count * p, p, cfg.rng.child(11))]
        med0 = np.median(x, axis=0)
        z = x - med0
        nrm = np.linalg.norm(z, axis=1)
        keep = nrm > 1e-12 * max(1.0, nrm.max(initial=0.0))
        if np.any(keep):
            zk = z[keep]
            if zk.shape[0] > 500:
                zk = zk[np.linspace(0, zk.shape[0] - 1, 500).astype(int)]
            pool.append(zk / np.linalg.norm(zk, axis=1)[:, None])
        evaluator = _ProjectionDepth(x, np.vstack(pool))

        def depth_many(cands):
            return evaluator.depths(np.asarray(cands))

    cands = [np.median(x, axis=0), x.mean(axis=0)]
    cands.extend(x[i] for i in range(min(n, 200)))
    if n <= 60:
        for i in range(n):
            for j in range(i + 1, n):
                cands.append(0.5 * (x[i] + x[j]))
    cands = np.array(cands)
    vals = depth_many(cands)
    best_idx = int(np.argmax(vals))
    best, best_val = cands[best_idx].copy(), float(vals[best_idx])

    scale = np.median(np.abs(x - np.median(x, axis=0)), axis=0)
    scale = np.where(scale > 0, scale, np.std(x, axis=0))
    scale = np.where(scale > 0, scale, 1.0)
    gen = cfg.rng.child(12).generator()
    step = 1.0
    for _ in range(cfg.max_iterations):
        props = best[None, :] + step * scale[None, :] * gen.standard_normal((24, p))
        vals = depth_many(props)
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best, best_val = props[j].copy(), float(vals[j])
        else:
            step *= cfg.step_shrink
            if step < cfg.tolerance:
                break
    return best


# ---------------------------------------------------------------------------
# Deepest scatter
# ---------------------------------------------------------------------------

def _scatter_pool(xc, gamma0, cfg):
    """Direction pool in the metric of the start matrix.

    Sampling through the start's Cholesky factor keeps matched-seed runs
    equivariant under diagonal rescalings of the data.
    """
    n, p = xc.shape
    if p == 1:
        return np.array([[1.0]])
    l0 = np.linalg.cholesky(gamma0.entries)
    g = unit_directions(cfg.direction_count * p, p, cfg.rng.child(21))
    u = np.linalg.solve(l0.T, g.T).T
    u /= np.linalg.norm(u, axis=1)[:, None]
    pools = [u, np.eye(p)]
    w = np.linalg.solve(gamma0.entries, xc.T).T
    nrm = np.linalg.norm(w, axis=1)
    keep = nrm > 1e-12 * max(1.0, nrm.max(initial=0.0))
    w = w[keep]
    if w.shape[0] > 500:
        w = w[np.linspace(0, w.shape[0] - 1, 500).astype(int)]
    if w.shape[0]:
        pools.append(w / np.linalg.norm(w, axis=1)[:, None])
    return np.vstack(pools)


def deepest_scatter(data, center, cfg=None, return_info=False):
    """Deepest scatter matrix around a known ``center``.

    Starts from the diagonal of squared coordinatewise median absolute
    deviations (consistent, up to the depth calibration constant, with the
    covariance at the Gaussian model) and ascends the sampled scatter depth
    by rank-one rescaling along the currently worst direction, accepting
    only depth-non-decreasing steps.  The raw maximizer targets
    ``[Phi^{-1}(3/4)]^2 Sigma`` at the Gaussian model; callers wanting
    ``Sigma`` itself divide by that constant.
    """
    x = as_dataset(data)
    n, p = x.shape
    cfg = cfg or SearchConfig()
    center = np.asarray(center, dtype=float)
    if center.shape != (p,):
        raise ValueError("center has wrong dimension")
    xc = x - center
    if np.linalg.matrix_rank(xc) < p:
        raise ValueError("data lie in a lower-dimensional subspace; "
                         "scatter depth is unbounded toward singular matrices")
    mad = np.median(np.abs(xc), axis=0)
    if np.any(mad <= 0.0):
        raise ValueError("a coordinate has zero median absolute deviation; "
                         "deepest scatter is not identified")
    gamma = np.diag(mad * mad)
    gamma0 = SpdMatrix.from_matrix(gamma)

    u = _scatter_pool(xc, gamma0, cfg)
    proj_sq = (xc @ u.T) ** 2                           # (n, K)
    sorted_sq = np.sort(proj_sq, axis=0)
    targets = sorted_sq[(n - 1) // 2, :]                # per-direction balance point

    n_tail = min(32, u.shape[0])

    def eval_depth(g):
        t = np.einsum("kj,jl,kl->k", u, g, u)
        tol = 1e-12 * np.maximum(1.0, t)
        below = np.sum(proj_sq <= t[None, :] + tol[None, :], axis=0)
        above = np.sum(proj_sq >= t[None, :] - tol[None, :], axis=0)
        per_dir = np.minimum(below, above) / n
        order = np.argsort(per_dir)
        # Lexicographic score: overall depth first, then the mean over the
        # worst directions, then the grand mean, so repairing some of many
        # tied-worst directions still counts as progress.
        score = (float(per_dir[order[0]]),
                 float(per_dir[order[:n_tail]].mean()),
                 float(per_dir.mean()))
        return score, order, t

    score, order, t = eval_depth(gamma)
    trace = [score[0]]
    for _ in range(cfg.max_iterations):
        improved = False
        for k in order[:5]:
            q = t[k]
            ratio = targets[k] / q if q > 0 else 2.0
            if ratio == 1.0:
                continue
            w = gamma @ u[k]
            delta_dir = np.outer(w, w) / q
            eta = 1.0
            while eta >= cfg.tolerance:
                delta = np.clip(eta * (ratio - 1.0), -0.95, 9.0)
                cand = gamma + delta * delta_dir
                cand_score, cand_order, cand_t = eval_depth(cand)
                if cand_score > score:
                    gamma = cand
                    score, order, t = cand_score, cand_order, cand_t
                    improved = True
                    break
                eta *= cfg.step_shrink
            if improved:
                break
        trace.append(score[0])
        if not improved:
            break
    depth = score[0]
    result = SpdMatrix.from_matrix(gamma)
    if return_info:
        info = {"depth": depth, "trace": trace, "start": gamma0,
                "directions": u.shape[0]}
        return result, info
    return result


# ---------------------------------------------------------------------------
# Location-scale
# ---------------------------------------------------------------------------

def deepest_locscale1(data):
    """Separate-depth deepest location-scale fit: (median, MAD).

    Lower-middle convention for even n.  Raises when the MAD is zero
    (more than half the points coincide).
    """
    x = as_dataset(data)
    if x.shape[1] != 1 or x.shape[0] < 2:
        raise ValueError("requires univariate data with n >= 2")
    y = x[:, 0]
    mu = lower_median(y)
    sigma = lower_median(np.abs(y - mu))
    if sigma <= 0.0:
        raise ValueError("MAD is zero; scale is not identified")
    return mu, sigma


def deepest_locscale2(data, cfg=None):
    """Joint-depth deepest location-scale fit by exact enumeration.

    The empirical objective is piecewise constant: candidate locations are
    the data values and midpoints of consecutive distinct values, and for
    each location the four cell counts change only where sigma crosses some
    |x_i - mu|.  Ties are broken by smallest sigma, then smallest distance
    of mu to the sample median, then smallest mu.
    """
    x = as_dataset(data)
    if x.shape[1] != 1 or x.shape[0] < 4:
        raise ValueError("requires univariate data with n >= 4")
    y = np.sort(x[:, 0])
    n = y.size
    med = lower_median(y)
    distinct = np.unique(y)
    mus = np.concatenate([distinct, 0.5 * (distinct[:-1] + distinct[1:])])
    span = max(1.0, float(distinct[-1] - distinct[0]))
    tol = 1e-12 * span

    best = (np.inf, np.inf, np.inf, np.inf)  # (-depth, sigma, |mu - med|, mu)
    best_fit = None
    for mu in mus:
        z = np.unique(np.abs(y - mu))
        z = z[z > tol]
        if z.size == 0:
            continue
        lo = mu - z
        hi = mu + z
        r_mu = np.searchsorted(y, mu + tol, side="right")
        l_mu = np.searchsorted(y, mu - tol, side="left")
        c1 = r_mu - np.searchsorted(y, lo - tol, side="left")
        c2 = np.searchsorted(y, hi + tol, side="right") - l_mu
        c3 = np.searchsorted(y, lo + tol, side="right")
        c4 = n - np.searchsorted(y, hi - tol, side="left")
        depth = np.minimum(np.minimum(c1, c2), np.minimum(c3, c4)) / n
        j = int(np.lexsort((z, -depth))[0])   # max depth, then min sigma
        key = (-depth[j], z[j], abs(mu - med), mu)
        if key < best:
            best = key
            best_fit = (float(mu), float(z[j]))
    if best_fit is None:
        raise ValueError("no admissible scale candidate (degenerate data)")
    # Exactness guard: the enumerated value must match the closed form.
    assert abs(ls_depth2(best_fit[0], best_fit[1], x) + best[0]) < 1e-12
    return best_fit


# ---------------------------------------------------------------------------
# Deepest regression (single response)
# ---------------------------------------------------------------------------

def deepest_regression(x, y, cfg=None):
    """Deepest regression fit for a single response.

    Candidates are exact fits through p-subsets of observations plus
    shrinking perturbations around the incumbent; the depth of each
    candidate is exact for p <= 2 and direction-sampled otherwise.
    """
    x = as_dataset(x)
    yv = np.asarray(y, dtype=float).reshape(-1)
    n, p = x.shape
    if yv.shape[0] != n:
        raise ValueError("x and y must have the same number of rows")
    if n < p:
        raise ValueError("need at least p observations")
    if np.linalg.matrix_rank(x) < p:
        raise ValueError("degenerate design: covariates lie in a hyperplane through 0")
    cfg = cfg or SearchConfig()

    dirs = None
    if p > 2:
        dirs = unit_directions(cfg.direction_count * p, p, cfg.rng.child(31))

    def depth_of(beta):
        return regression_depth(beta, x, yv, dirs=dirs, exact=(p <= 2))

    cands = [np.linalg.lstsq(x, yv, rcond=None)[0]]
    gen = cfg.rng.child(32).generator()
    if p == 1:
        nz = np.abs(x[:, 0]) > 1e-12
        cands.extend(np.array([yv[i] / x[i, 0]]) for i in np.where(nz)[0][:400])
    else:
        max_subsets = 300 if n <= 60 else 1000
        if p == 2 and n <= 60:
            pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        else:
            pairs = [tuple(gen.choice(n, size=p, replace=False))
                     for _ in range(max_subsets)]
        for idx in pairs:
            a = x[list(idx)]
            b = yv[list(idx)]
            try:
                sol = np.linalg.solve(a, b)
            except np.linalg.LinAlgError:
                continue
            if np.all(np.isfinite(sol)):
                cands.append(sol)

    vals = [depth_of(c) for c in cands]
    best_idx = int(np.argmax(vals))
    best, best_val = np.asarray(cands[best_idx], float).copy(), vals[best_idx]
    if best_val >= 1.0:
        return best

    scale = max(np.linalg.norm(best), 1.0)
    step = 0.5
    for _ in range(cfg.max_iterations):
        props = best[None, :] + step * scale * gen.standard_normal((16, p))
        pvals = [depth_of(c) for c in props]
        j = int(np.argmax(pvals))
        if pvals[j] > best_val:
            best, best_val = props[j].copy(), pvals[j]
        else:
            step *= cfg.step_shrink
            if step < cfg.tolerance:
                break
    return best
