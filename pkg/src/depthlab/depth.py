"""Depth functions for location, scatter, regression, and location-scale fits.

Empirical depths are computed against a dataset (rows = observations).  For
p <= 2 the Tukey and regression depths have an exact combinatorial mode that
enumerates every combinatorially distinct halfspace; in higher dimension the
infimum over the sphere is approximated by seeded direction sampling, which
always upper-bounds the exact value.

Tie handling follows the non-strict inequalities of the definitions: points
sitting exactly on a boundary are counted on both sides.  Comparisons use a
tiny scale-aware tolerance so that affinely transformed integer datasets
keep their combinatorial structure in floating point.

The analytic depths (`scatter_depth_gaussian`, `scatter_depth_pointmass`)
evaluate a candidate scatter matrix against the standard Gaussian model,
optionally contaminated by a point mass at ``r * e``.
"""

from __future__ import annotations

import numpy as np

from .numerics import RngStream, SpdMatrix, std_normal_cdf, unit_directions

__all__ = [
    "as_dataset",
    "read_dataset",
    "build_directions",
    "tukey_depth_1d",
    "tukey_depth",
    "scatter_depth",
    "scatter_depth_gaussian",
    "scatter_depth_pointmass",
    "regression_depth",
    "mvreg_depth",
    "mvreg_depth_residual",
    "default_mvreg_candidates",
    "residual_competitor_grid",
    "ls_depth1",
    "ls_depth2",
]

_TIE_RTOL = 1e-12


def as_dataset(data):
    """Coerce to a finite (n, p) float array; 1-d input becomes one column."""
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError(f"dataset must be a nonempty 2-d array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("dataset contains non-finite values")
    return x


def read_dataset(path):
    """Load a CSV dataset, one observation per row.

    A single leading non-numeric header line is skipped.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"empty dataset file: {path}")

    def parse(ln):
        return [float(tok) for tok in ln.replace(",", " ").split()]

    try:
        parse(lines[0])
        start = 0
    except ValueError:
        start = 1
    if start == len(lines):
        raise ValueError(f"no numeric rows in dataset file: {path}")
    rows = [parse(ln) for ln in lines[start:]]
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"ragged rows in dataset file: {path}")
    return as_dataset(np.array(rows))


def build_directions(data, center=None, rng=None, per_dim=500, data_dirs=True,
                     max_data_dirs=500):
    """Direction pool for sampled depths: seeded Gaussians plus data directions.

    Defaults follow the artifact convention of ``500 * p`` sampled unit
    vectors augmented with the (normalized) centered observations.
    """
    x = as_dataset(data)
    n, p = x.shape
    rng = rng if rng is not None else RngStream(0)
    dirs = [unit_directions(per_dim * p, p, rng)]
    if data_dirs:
        c = np.zeros(p) if center is None else np.asarray(center, dtype=float)
        z = x - c
        norms = np.linalg.norm(z, axis=1)
        keep = norms > 1e-12 * max(1.0, norms.max(initial=0.0))
        z = z[keep]
        if z.shape[0] > max_data_dirs:
            idx = np.linspace(0, z.shape[0] - 1, max_data_dirs).astype(int)
            z = z[idx]
        if z.shape[0]:
            dirs.append(z / np.linalg.norm(z, axis=1)[:, None])
    return np.vstack(dirs)


# ---------------------------------------------------------------------------
# Tukey (halfspace) depth
# ---------------------------------------------------------------------------

def tukey_depth_1d(theta, data):
    """Exact univariate halfspace depth min(#{x <= t}, #{x >= t}) / n."""
    x = as_dataset(data)
    if x.shape[1] != 1:
        raise ValueError("tukey_depth_1d requires univariate data")
    x = x[:, 0]
    t = float(theta)
    n = x.size
    return min(np.sum(x <= t), np.sum(x >= t)) / n


def _candidate_angles(angles):
    """Critical normal angles plus the midpoints of every open arc."""
    crit = np.concatenate([angles + 0.5 * np.pi, angles - 0.5 * np.pi])
    crit = np.sort(np.mod(crit, 2.0 * np.pi))
    crit = np.unique(crit)
    if crit.size == 0:
        return np.array([0.0])
    nxt = np.roll(crit, -1).copy()
    nxt[-1] += 2.0 * np.pi
    mids = 0.5 * (crit + nxt)
    return np.concatenate([crit, mids])


def _tukey_exact_2d(theta, x):
    z = x - theta
    norms = np.linalg.norm(z, axis=1)
    scale = max(1.0, norms.max(initial=0.0))
    at_theta = norms <= _TIE_RTOL * scale
    zz = z[~at_theta]
    n = x.shape[0]
    n_zero = int(np.sum(at_theta))
    if zz.shape[0] == 0:
        return 1.0
    cand = _candidate_angles(np.arctan2(zz[:, 1], zz[:, 0]))
    u = np.stack([np.cos(cand), np.sin(cand)], axis=1)
    proj = zz @ u.T                      # (n_nz, n_cand)
    tol = _TIE_RTOL * np.linalg.norm(zz, axis=1)[:, None]
    counts = np.sum(proj <= tol, axis=0) + n_zero
    return float(counts.min()) / n


def tukey_depth(theta, data, dirs=None, exact=None):
    """Halfspace depth of ``theta``: inf over directions of P(u'X <= u'theta).

    For p <= 2 (and ``exact`` not set to False) the exact combinatorial
    infimum is returned; otherwise the minimum over the supplied direction
    pool, with each direction evaluated along both u and -u.
    """
    x = as_dataset(data)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    n, p = x.shape
    if theta.shape != (p,):
        raise ValueError("theta dimension does not match data")
    if p == 1:
        return tukey_depth_1d(theta[0], x)
    if exact is None:
        exact = p == 2 and dirs is None
    if exact:
        if p != 2:
            raise ValueError("exact halfspace depth implemented for p <= 2 only")
        return _tukey_exact_2d(theta, x)
    if dirs is None or len(dirs) == 0:
        raise ValueError("sampled halfspace depth needs a nonempty direction pool")
    u = np.asarray(dirs, dtype=float)
    proj = x @ u.T
    pt = theta @ u.T
    tol = _TIE_RTOL * np.maximum(1.0, np.abs(proj).max(axis=0))
    below = np.sum(proj <= pt + tol, axis=0)
    above = np.sum(proj >= pt - tol, axis=0)
    return float(min(below.min(), above.min())) / n


# ---------------------------------------------------------------------------
# Scatter depth
# ---------------------------------------------------------------------------

def _as_spd(gamma):
    return gamma if isinstance(gamma, SpdMatrix) else SpdMatrix.from_matrix(gamma)


def scatter_depth(gamma, data, center=None, dirs=None):
    """Empirical scatter depth of ``gamma`` around ``center``.

    min over directions of min( #{(u'(x-c))^2 <= u'Gu}, #{... >= ...} ) / n;
    boundary points count on both sides.
    """
    gamma = _as_spd(gamma)
    x = as_dataset(data)
    n, p = x.shape
    if gamma.dim != p:
        raise ValueError("scatter dimension does not match data")
    c = np.zeros(p) if center is None else np.asarray(center, dtype=float)
    if dirs is None:
        if p == 1:
            dirs = np.array([[1.0]])
        else:
            raise ValueError("scatter_depth needs a direction pool for p >= 2")
    u = np.asarray(dirs, dtype=float)
    proj = (x - c) @ u.T
    sq = proj * proj
    t = np.einsum("ij,jk,ik->i", u, gamma.entries, u)
    tol = _TIE_RTOL * np.maximum(1.0, np.maximum(sq.max(axis=0), t))
    below = np.sum(sq <= t + tol, axis=0)
    above = np.sum(sq >= t - tol, axis=0)
    return float(np.minimum(below, above).min()) / n


def scatter_depth_gaussian(gamma):
    """Scatter depth of ``gamma`` under the standard Gaussian model.

    Only the extreme eigenvalues matter:
    min( 2*Phi(sqrt(l_p)) - 1, 2*(1 - Phi(sqrt(l_1))) ).
    """
    gamma = _as_spd(gamma)
    l1 = gamma.eigenvalues[0]
    lp = gamma.eigenvalues[-1]
    return min(2.0 * std_normal_cdf(np.sqrt(lp)) - 1.0,
               2.0 * (1.0 - std_normal_cdf(np.sqrt(l1))))


def _g_of_quad(q):
    """Central mass 2*Phi(sqrt(q)) - 1 for a claimed directional variance q."""
    return 2.0 * std_normal_cdf(np.sqrt(np.maximum(q, 0.0))) - 1.0


def _pointmass_depth_aligned(lam, eps, r, p):
    """Analytic point-mass depth when the contamination direction is the top
    eigenvector.  ``lam`` holds the descending eigenvalues."""
    l1 = lam[0]
    lp = lam[-1]
    g1 = _g_of_quad(l1)
    gp = _g_of_quad(lp)
    r2 = r * r
    gap = r2 - l1
    if abs(gap) <= 1e-10 * max(l1, r2):
        # The top eigenvector lies exactly on the boundary quadric: the point
        # mass supports both sides there.
        terms = [(1 - eps) * g1 + eps, (1 - eps) * (1 - g1) + eps]
        if p >= 2:
            terms += [(1 - eps) * gp + eps, (1 - eps) * (1 - g1)]
        return min(terms)
    if gap < 0.0:
        # Point mass inside the claimed spread along every direction.
        if p == 1:
            return min((1 - eps) * g1 + eps, (1 - eps) * (1 - g1))
        return min((1 - eps) * gp + eps, (1 - eps) * (1 - g1))
    # r^2 > l1.
    if p == 1:
        return min((1 - eps) * g1, (1 - eps) * (1 - g1) + eps)
    l2 = lam[1]
    c_min = r2 * lp / (r2 + lp - l1)
    c_max = r2 * l2 / (r2 + l2 - l1)
    g_min = _g_of_quad(c_min)
    g_max = _g_of_quad(c_max)
    return min((1 - eps) * (1 - g1) + eps,
               (1 - eps) * gp + eps,
               (1 - eps) * g_min,
               (1 - eps) * (1 - g_max))


def _slerp(a, b, t):
    v = (1.0 - t) * a + t * b
    nrm = np.linalg.norm(v)
    if nrm < 1e-300:
        return a
    return v / nrm


def _pointmass_depth_search(gamma, eps, r, e, rng=None, n_samples=8000,
                            refine=60):
    """Numeric infimum of the point-mass depth for a general direction ``e``.

    Critical points lie at eigenvectors or on the boundary quadric
    {v' G v = r^2 (v'e)^2}; the search samples the sphere, takes one-sided
    limits onto the quadric along great-circle bisection, and polishes with
    random restarts.
    """
    G = gamma.entries
    p = gamma.dim
    rng = rng if rng is not None else RngStream(1234)
    pool = [unit_directions(n_samples, p, rng),
            gamma.eigenvectors.T, -gamma.eigenvectors.T,
            e[None, :], -e[None, :]]
    v = np.vstack(pool)

    def values(vv):
        q = np.einsum("ij,jk,ik->i", vv, G, vv)
        pe = (vv @ e) ** 2 * r * r
        g = _g_of_quad(q)
        s = q - pe
        scale = np.maximum(1.0, np.maximum(q, pe))
        on_f = np.abs(s) <= 1e-12 * scale
        in_b = (s < 0) & ~on_f
        b1 = (1 - eps) * g + eps * (~in_b)          # point mass in <= branch iff q >= pe
        b2 = (1 - eps) * (1 - g) + eps * ((s <= 0) | on_f)
        return np.minimum(b1, b2), s, g

    m, s, g = values(v)
    best = float(m.min())

    # One-sided limits onto the quadric: bisect arcs between B- and A-side
    # samples; approaching from B the <=-branch drops the point mass, and
    # approaching from A the >=-branch does.
    b_idx = np.where(s < 0)[0]
    a_idx = np.where(s > 0)[0]
    gen = rng.child(7).generator()
    if b_idx.size and a_idx.size:
        pairs = min(200, b_idx.size * a_idx.size)
        bi = gen.choice(b_idx, size=pairs)
        ai = gen.choice(a_idx, size=pairs)
        for i, j in zip(bi, ai):
            lo, hi = v[i], v[j]
            for _ in range(60):
                mid = _slerp(lo, hi, 0.5)
                sm = mid @ G @ mid - r * r * (mid @ e) ** 2
                if sm < 0:
                    lo = mid
                else:
                    hi = mid
            vf = _slerp(lo, hi, 0.5)
            gf = _g_of_quad(vf @ G @ vf)
            best = min(best,
                       (1 - eps) * gf,              # limit from inside B
                       (1 - eps) * (1 - gf))        # limit from inside A
    # Local polish around the incumbent.
    order = np.argsort(m)[:refine]
    for k in order:
        cur = v[k]
        val = m[k]
        step = 0.3
        for _ in range(80):
            cand = cur[None, :] + step * gen.standard_normal((16, p))
            cand /= np.linalg.norm(cand, axis=1)[:, None]
            mv, _, _ = values(cand)
            j = int(np.argmin(mv))
            if mv[j] < val:
                val = float(mv[j])
                cur = cand[j]
            else:
                step *= 0.5
                if step < 1e-6:
                    break
        best = min(best, val)
    return best


def scatter_depth_pointmass(gamma, epsilon, r, e, rng=None):
    """Depth of ``gamma`` under (1-eps) N(0, I) + eps * delta_{r e}.

    Exact closed form when ``e`` coincides with the top eigenvector of
    ``gamma`` (up to sign); otherwise a constrained search over the sphere,
    whose critical points are eigenvectors or points of the boundary quadric.
    """
    gamma = _as_spd(gamma)
    e = np.asarray(e, dtype=float)
    if e.shape != (gamma.dim,):
        raise ValueError("contamination direction has wrong dimension")
    nrm = np.linalg.norm(e)
    if not np.isfinite(nrm) or abs(nrm - 1.0) > 1e-9:
        raise ValueError("contamination direction must be a unit vector")
    if not (np.isfinite(r) and r > 0.0):
        raise ValueError("contamination radius must be positive")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("epsilon must lie in [0, 1)")
    if epsilon == 0.0:
        return scatter_depth_gaussian(gamma)
    v1 = gamma.eigenvectors[:, 0]
    if abs(abs(float(v1 @ e)) - 1.0) <= 1e-9:
        return float(_pointmass_depth_aligned(gamma.eigenvalues, epsilon, r,
                                              gamma.dim))
    return float(_pointmass_depth_search(gamma, epsilon, r, e, rng=rng))


# ---------------------------------------------------------------------------
# Regression depth
# ---------------------------------------------------------------------------

def _check_regression(x, y):
    x = as_dataset(x)
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if y.shape[0] != x.shape[0]:
        raise ValueError("x and y must have the same number of rows")
    if not np.all(np.isfinite(y)):
        raise ValueError("responses contain non-finite values")
    return x, y


def _sign_fraction(scores, tol):
    return np.sum(scores >= -tol, axis=0)


def regression_depth(beta, x, y, dirs=None, exact=None):
    """Univariate-response regression depth of the fit ``beta``.

    inf over nonzero u of P( (u'x_i) * (y_i - beta'x_i) >= 0 ); exact
    enumeration for p <= 2, sampled directions otherwise.
    """
    x, y = _check_regression(x, y)
    if y.shape[1] != 1:
        raise ValueError("regression_depth expects a single response column")
    y = y[:, 0]
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    n, p = x.shape
    resid = y - x @ beta
    tol_r = _TIE_RTOL * max(1.0, np.abs(resid).max(initial=0.0))
    resid = np.where(np.abs(resid) <= tol_r, 0.0, resid)
    if exact is None:
        exact = p <= 2 and dirs is None
    if exact and p == 1:
        s = x[:, 0] * resid
        tol = _TIE_RTOL * max(1.0, np.abs(s).max(initial=0.0))
        return min(np.sum(s >= -tol), np.sum(-s >= -tol)) / n
    if exact and p == 2:
        norms = np.linalg.norm(x, axis=1)
        scale = max(1.0, norms.max(initial=0.0))
        nz = norms > _TIE_RTOL * scale
        cand = _candidate_angles(np.arctan2(x[nz, 1], x[nz, 0]))
        u = np.stack([np.cos(cand), np.sin(cand)], axis=1)
        xu = x @ u.T
        tol = _TIE_RTOL * norms[:, None]
        xu = np.where(np.abs(xu) <= tol, 0.0, xu)
        scores = xu * resid[:, None]
        counts = _sign_fraction(scores, 0.0)
        return float(counts.min()) / n
    if exact:
        raise ValueError("exact regression depth implemented for p <= 2 only")
    if dirs is None or len(dirs) == 0:
        raise ValueError("sampled regression depth needs a direction pool")
    u = np.asarray(dirs, dtype=float)
    xu = x @ u.T
    tol = _TIE_RTOL * np.maximum(1.0, np.abs(xu).max(axis=0))
    xu = np.where(np.abs(xu) <= tol, 0.0, xu)
    scores = xu * resid[:, None]
    counts = np.minimum(_sign_fraction(scores, 0.0),
                        _sign_fraction(-scores, 0.0))
    return float(counts.min()) / n


def default_mvreg_candidates(x, y, b, rng, per_cell=200):
    """Competitor directions for multivariate regression depth.

    ``per_cell * p * m`` Gaussian matrices normalized to unit Frobenius norm
    plus the rank-one data-driven candidates x_j (y_j - B'x_j)'.
    """
    x, y = _check_regression(x, y)
    p, m = x.shape[1], y.shape[1]
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    count = per_cell * p * m
    mats = gen.standard_normal((count, p, m))
    norms = np.linalg.norm(mats.reshape(count, -1), axis=1)
    mats /= np.maximum(norms, 1e-300)[:, None, None]
    cands = [mats]
    resid = y - x @ np.asarray(b, dtype=float).reshape(p, m)
    data_u = x[:, :, None] * resid[:, None, :]
    nrm = np.linalg.norm(data_u.reshape(x.shape[0], -1), axis=1)
    keep = nrm > 1e-12 * max(1.0, nrm.max(initial=0.0))
    if np.any(keep):
        cands.append(data_u[keep] / nrm[keep][:, None, None])
    return np.concatenate(cands, axis=0)


def mvreg_depth(b, x, y, u_samples):
    """Multivariate regression depth: inf over U of P(<U'x, y - B'x> >= 0)."""
    x, y = _check_regression(x, y)
    p, m = x.shape[1], y.shape[1]
    b = np.asarray(b, dtype=float).reshape(p, m)
    u = np.asarray(u_samples, dtype=float)
    if u.ndim != 3 or u.shape[1:] != (p, m) or u.shape[0] == 0:
        raise ValueError("u_samples must be a nonempty stack of (p, m) matrices")
    if np.any(np.linalg.norm(u.reshape(u.shape[0], -1), axis=1) == 0.0):
        raise ValueError("u_samples must not contain the zero matrix")
    resid = y - x @ b
    # scores[i, k] = <U_k' x_i, resid_i>
    scores = np.einsum("ip,kpm,im->ik", x, u, resid)
    tol = _TIE_RTOL * np.maximum(1.0, np.abs(scores).max(axis=0))
    counts = np.sum(scores >= -tol, axis=0)
    return float(counts.min()) / x.shape[0]


def residual_competitor_grid():
    """Step sizes for the residual-smallness competitors B - t V / 2."""
    return 2.0 ** np.arange(-10, 4)


def mvreg_depth_residual(b, x, y, u_samples, t_grid=None):
    """Residual-smallness form of multivariate regression depth.

    inf over competitors U of P( ||y - B'x|| <= ||y - U'x|| ), with
    competitors B - t V / 2 over the sampled directions V and a geometric
    grid of t > 0.  Converges to :func:`mvreg_depth` from above as the grid
    refines toward t = 0.
    """
    x, y = _check_regression(x, y)
    p, m = x.shape[1], y.shape[1]
    b = np.asarray(b, dtype=float).reshape(p, m)
    v = np.asarray(u_samples, dtype=float)
    if v.ndim != 3 or v.shape[1:] != (p, m) or v.shape[0] == 0:
        raise ValueError("u_samples must be a nonempty stack of (p, m) matrices")
    t_grid = residual_competitor_grid() if t_grid is None else np.asarray(t_grid, float)
    resid = y - x @ b                                   # (n, m)
    base = np.sum(resid * resid, axis=1)
    # ||y - U'x||^2 with U = B - tV/2 equals ||r + (t/2) V'x||^2.
    vx = np.einsum("ip,kpm->kim", x, v)                 # (K, n, m)
    cross = np.einsum("im,kim->ki", resid, vx)          # <r_i, V_k'x_i>
    sq = np.sum(vx * vx, axis=2)                        # ||V_k'x_i||^2
    best = 1.0
    n = x.shape[0]
    tol = _TIE_RTOL * max(1.0, float(base.max(initial=0.0)))
    for t in t_grid:
        rhs = base + t * cross + 0.25 * t * t * sq
        counts = np.sum(base <= rhs + tol, axis=1)
        best = min(best, float(counts.min()) / n)
    return best


# ---------------------------------------------------------------------------
# Location-scale depths (univariate)
# ---------------------------------------------------------------------------

def _univariate(data):
    x = as_dataset(data)
    if x.shape[1] != 1:
        raise ValueError("location-scale depth requires univariate data")
    return x[:, 0]


def _ls_tol(y, mu, sigma):
    return _TIE_RTOL * max(1.0, abs(mu) + sigma, float(np.abs(y).max(initial=0.0)))


def ls_depth1(mu, sigma, data):
    """Separate-parameters location-scale depth (closed empirical form).

    min over the location pair {P(y <= mu), P(y >= mu)} and the scale pair
    {P(|y - mu| <= sigma), P(|y - mu| >= sigma)}.
    """
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    y = _univariate(data)
    n = y.size
    tol = _ls_tol(y, mu, sigma)
    z = np.abs(y - mu)
    loc = min(np.sum(y <= mu + tol), np.sum(y >= mu - tol))
    sca = min(np.sum(z <= sigma + tol), np.sum(z >= sigma - tol))
    return min(loc, sca) / n


def ls_depth2(mu, sigma, data):
    """Joint location-scale depth (closed empirical form).

    min of the four cell probabilities P(mu-sigma <= y <= mu),
    P(mu <= y <= mu+sigma), P(y <= mu-sigma), P(y >= mu+sigma); boundary
    points count in both adjacent cells.
    """
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    y = _univariate(data)
    n = y.size
    tol = _ls_tol(y, mu, sigma)
    lo, hi = mu - sigma, mu + sigma
    cells = (
        np.sum((y >= lo - tol) & (y <= mu + tol)),
        np.sum((y >= mu - tol) & (y <= hi + tol)),
        np.sum(y <= lo + tol),
        np.sum(y >= hi - tol),
    )
    return min(cells) / n
