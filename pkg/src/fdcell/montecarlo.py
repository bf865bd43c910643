"""Deterministic parallel Monte Carlo estimators for outage, cdf, and rates.

Trials are processed in fixed chunks of 8192.  Every chunk owns independent
labeled random substreams keyed by (seed, chunk index, label) — one label
for geometry, one for full-duplex fading, one for half-duplex fading — so

- results are bit-identical for any worker count (each chunk's draws depend
  only on its key, and partial sums are reduced in chunk order with exact
  summation), and
- gain estimation pairs full-duplex and half-duplex rates through common
  random numbers: the same topology per trial index, independent fading.

Empty topologies (zero Poisson users) count as outage-1 / rate-0 trials and
are reported through ``empty_trials``.  At the paper's density the empty
probability is e^-125.66, i.e. unobservable; the convention only matters in
sparse sanity checks.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import UnstableEstimateError, ValidationError
from .geometry import RngStream, ul_distance_to_ap
from .model import (
    FadingDraw,
    HdCondition,
    Selection,
    TopologySample,
    dl_sinr,
    hd_instant_rates,
    ul_sinr,
    validate_scenario,
)

CHUNK = 8192  # trials per chunk; fixed so chunk boundaries never move

# substream labels (label 0 is reserved for geometry.sample_topology)
_LBL_GEOM = 1
_LBL_FADE_FD = 2
_LBL_FADE_HD = 3


class Link(enum.Enum):
    """Which link an outage / cdf estimate targets."""

    DL = "dl"
    UL = "ul"


class RateMode(enum.Enum):
    """Duplexing mode for rate estimation."""

    FD = "fd"
    HD_RC = "hd_rc"
    HD_AC = "hd_ac"


@dataclass(frozen=True)
class EstimateWithCI:
    """Monte Carlo estimate with its standard error."""

    mean: float
    std_err: float      # sample standard deviation / sqrt(trials)
    trials: int
    empty_trials: int   # trials whose Poisson draw had zero DL users


def _chunk_layout(n):
    return [(idx, min(CHUNK, n - idx * CHUNK))
            for idx in range((n + CHUNK - 1) // CHUNK)]


def _map_chunks(worker, layout, threads):
    if threads <= 1:
        return [worker(idx, m) for idx, m in layout]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda args: worker(*args), layout))


def _moments(partials, n):
    """Reduce per-chunk (sum, sumsq) partials into (mean, std_err)."""
    total = math.fsum(p[0] for p in partials)
    total_sq = math.fsum(p[1] for p in partials)
    mean = total / n
    if n > 1:
        var = max(total_sq - n * mean * mean, 0.0) / (n - 1)
    else:
        var = 0.0
    return mean, math.sqrt(var / n)


@dataclass(frozen=True)
class _GeomChunk:
    r_sel: np.ndarray     # selected DL distance per trial (nan when empty)
    dist_ul: np.ndarray   # UL-to-AP distance per trial (nan when empty)
    nonempty: np.ndarray  # bool mask over the chunk
    n_empty: int


def _draw_geometry(s, seed, chunk_idx, m):
    """Vectorized topology draw for one chunk.

    Draw order (fixed): Poisson counts, all radii (r = R sqrt(u)), pairing
    angles theta, then the RUS pick.  NUS and RUS therefore share identical
    topologies for equal seeds.
    """
    g = RngStream(seed, chunk_idx).generator(_LBL_GEOM)
    counts = g.poisson(s.lambda_d * math.pi * s.r_cell ** 2, m)
    total = int(counts.sum())
    radii = s.r_cell * np.sqrt(g.random(total))
    theta = 2.0 * math.pi * g.random(m)
    nonempty = counts > 0
    starts = np.cumsum(counts) - counts
    r_sel = np.full(m, np.nan)
    if total > 0:
        if s.selection is Selection.NUS:
            r_sel[nonempty] = np.minimum.reduceat(radii, starts[nonempty])
        else:
            pick = g.integers(0, counts[nonempty])
            r_sel[nonempty] = radii[starts[nonempty] + pick]
    dist_ul = ul_distance_to_ap(r_sel, s.d_pair, theta)
    return _GeomChunk(r_sel=r_sel, dist_ul=dist_ul, nonempty=nonempty,
                      n_empty=int(m - np.count_nonzero(nonempty)))


def _masked_topology(s, geom):
    mask = geom.nonempty
    return TopologySample(dl_points=np.zeros((0, 2)),
                          r_sel=geom.r_sel[mask], theta=None,
                          dist_ul_ap=geom.dist_ul[mask],
                          dist_ul_dl=s.d_pair, empty=False)


def _draw_fading_fd(s, seed, chunk_idx, m):
    """Full-duplex fading for one chunk (order: g_ad, g_ud, g_ua, g_li)."""
    g = RngStream(seed, chunk_idx).generator(_LBL_FADE_FD)
    return FadingDraw(g_ad=g.standard_exponential(m),
                      g_ud=g.standard_exponential(m),
                      g_ua=g.standard_exponential(m),
                      g_li=s.sigma_li * g.standard_exponential(m),
                      g_ad_vec2=None, g_ua_vec2=None)


def _draw_fading_hd(seed, chunk_idx, m):
    """Half-duplex fading (order: g_ad, g_ua, g_ad_vec2, g_ua_vec2)."""
    g = RngStream(seed, chunk_idx).generator(_LBL_FADE_HD)
    return FadingDraw(g_ad=g.standard_exponential(m), g_ud=0.0,
                      g_ua=g.standard_exponential(m), g_li=0.0,
                      g_ad_vec2=g.standard_exponential((m, 2)).sum(axis=1),
                      g_ua_vec2=g.standard_exponential((m, 2)).sum(axis=1))


def _subset_fading(f, mask):
    take = lambda x: x[mask] if isinstance(x, np.ndarray) else x
    return FadingDraw(g_ad=take(f.g_ad), g_ud=take(f.g_ud),
                      g_ua=take(f.g_ua), g_li=take(f.g_li),
                      g_ad_vec2=take(f.g_ad_vec2), g_ua_vec2=take(f.g_ua_vec2))


def _chunk_sinr(s, link, seed, chunk_idx, m):
    """(SINR values for nonempty trials, number of empty trials)."""
    geom = _draw_geometry(s, seed, chunk_idx, m)
    fade = _subset_fading(_draw_fading_fd(s, seed, chunk_idx, m), geom.nonempty)
    t = _masked_topology(s, geom)
    if not t.r_sel.size:
        return np.empty(0), geom.n_empty
    sinr = dl_sinr(s, t, fade) if link is Link.DL else ul_sinr(s, t, fade)
    return np.atleast_1d(sinr), geom.n_empty


def _fd_rates(s, geom, seed, chunk_idx):
    """(dl, ul) full-duplex rate arrays over a chunk; zeros at empty slots."""
    m = geom.nonempty.size
    fade = _subset_fading(_draw_fading_fd(s, seed, chunk_idx, m), geom.nonempty)
    t = _masked_topology(s, geom)
    dl = np.zeros(m)
    ul = np.zeros(m)
    if t.r_sel.size:
        dl[geom.nonempty] = np.log2(1.0 + dl_sinr(s, t, fade))
        ul[geom.nonempty] = np.log2(1.0 + ul_sinr(s, t, fade))
    return dl, ul


def _hd_rates(s, condition, geom, seed, chunk_idx):
    """(dl, ul) half-duplex rate arrays over a chunk; zeros at empty slots."""
    m = geom.nonempty.size
    fade = _subset_fading(_draw_fading_hd(seed, chunk_idx, m), geom.nonempty)
    t = _masked_topology(s, geom)
    dl = np.zeros(m)
    ul = np.zeros(m)
    if t.r_sel.size:
        dl[geom.nonempty], ul[geom.nonempty] = hd_instant_rates(
            s, t, fade, condition)
    return dl, ul


def _check_trials(n):
    if not isinstance(n, int) or n < 1:
        raise ValidationError("n must be an integer >= 1, got %r" % (n,))


def estimate_outage(s, gamma_th, link, n, seed, *, threads=1):
    """P(link SINR < gamma_th) over ``n`` trials; empties count as outage."""
    s = validate_scenario(s)
    link = Link(link) if not isinstance(link, Link) else link
    _check_trials(n)
    if not (gamma_th >= 0.0):
        raise ValidationError("gamma_th must be >= 0, got %r" % (gamma_th,))

    def worker(idx, m):
        sinr, n_empty = _chunk_sinr(s, link, seed, idx, m)
        k = float(np.count_nonzero(sinr < gamma_th) + n_empty)
        return (k, k, n_empty)  # indicator: sum of squares == sum

    parts = _map_chunks(worker, _chunk_layout(n), threads)
    mean, std_err = _moments(parts, n)
    return EstimateWithCI(mean=mean, std_err=std_err, trials=n,
                          empty_trials=int(sum(p[2] for p in parts)))


def estimate_cdf_curve(s, z_grid, link, n, seed, *, threads=1):
    """Empirical SINR cdf on a grid, one pass over shared trials.

    Returns a list of (z, EstimateWithCI).  All grid points are estimated
    from the same trials, so neighboring estimates are strongly correlated;
    the per-point std_err is still the marginal binomial one.
    """
    s = validate_scenario(s)
    link = Link(link) if not isinstance(link, Link) else link
    _check_trials(n)
    z_grid = [float(z) for z in z_grid]
    if not z_grid:
        raise ValidationError("z_grid must be nonempty")
    if any(b <= a for a, b in zip(z_grid, z_grid[1:])):
        raise ValidationError("z_grid must be strictly increasing")

    def worker(idx, m):
        sinr, n_empty = _chunk_sinr(s, link, seed, idx, m)
        sinr = np.sort(sinr)
        below = np.searchsorted(sinr, z_grid, side="left")
        counts = [float(b + (n_empty if z > 0.0 else 0))
                  for b, z in zip(below, z_grid)]
        return (counts, n_empty)

    parts = _map_chunks(worker, _chunk_layout(n), threads)
    n_empty = int(sum(p[1] for p in parts))
    curve = []
    for j, z in enumerate(z_grid):
        k = math.fsum(p[0][j] for p in parts)
        mean, std_err = _moments([(k, k)], n)
        curve.append((z, EstimateWithCI(mean=mean, std_err=std_err, trials=n,
                                        empty_trials=n_empty)))
    return curve


def estimate_rates(s, mode, n, seed, *, threads=1):
    """Ergodic (dl, ul, sum) rates in bit/s/Hz for one duplexing mode."""
    s = validate_scenario(s)
    mode = RateMode(mode) if not isinstance(mode, RateMode) else mode
    _check_trials(n)

    def worker(idx, m):
        geom = _draw_geometry(s, seed, idx, m)
        if mode is RateMode.FD:
            dl, ul = _fd_rates(s, geom, seed, idx)
        else:
            cond = HdCondition.RC if mode is RateMode.HD_RC else HdCondition.AC
            dl, ul = _hd_rates(s, cond, geom, seed, idx)
        tot = dl + ul
        return (float(dl.sum()), float(np.square(dl).sum()),
                float(ul.sum()), float(np.square(ul).sum()),
                float(tot.sum()), float(np.square(tot).sum()),
                geom.n_empty)

    parts = _map_chunks(worker, _chunk_layout(n), threads)
    n_empty = int(sum(p[6] for p in parts))
    out = []
    for j in (0, 2, 4):
        mean, std_err = _moments([(p[j], p[j + 1]) for p in parts], n)
        out.append(EstimateWithCI(mean=mean, std_err=std_err, trials=n,
                                  empty_trials=n_empty))
    return tuple(out)


def estimate_gain(s, condition, n, seed, *, threads=1):
    """Sum-rate gain (R_FD - R_HD)/R_FD with common-random-number pairing.

    The same per-trial topology feeds both modes (shared geometry stream);
    fading is independent across modes.  The standard error follows from
    the delta method on the paired means, using the sample covariance.
    Raises :class:`UnstableEstimateError` when the FD sum-rate estimate is
    within 3 standard errors of zero (the ratio is then meaningless).
    """
    s = validate_scenario(s)
    condition = HdCondition(condition) if not isinstance(condition, HdCondition) else condition
    _check_trials(n)

    def worker(idx, m):
        geom = _draw_geometry(s, seed, idx, m)
        dl_fd, ul_fd = _fd_rates(s, geom, seed, idx)
        dl_hd, ul_hd = _hd_rates(s, condition, geom, seed, idx)
        x = dl_fd + ul_fd
        y = dl_hd + ul_hd
        return (float(x.sum()), float(np.square(x).sum()),
                float(y.sum()), float(np.square(y).sum()),
                float((x * y).sum()), geom.n_empty)

    parts = _map_chunks(worker, _chunk_layout(n), threads)
    n_empty = int(sum(p[5] for p in parts))
    x_mean, x_se = _moments([(p[0], p[1]) for p in parts], n)
    y_mean, y_se = _moments([(p[2], p[3]) for p in parts], n)
    if not (x_mean > 3.0 * x_se) or x_mean <= 0.0:
        raise UnstableEstimateError(
            "FD sum-rate estimate %.3g +/- %.3g is within 3 SE of zero; "
            "gain ratio is unstable" % (x_mean, x_se))
    sum_xy = math.fsum(p[4] for p in parts)
    if n > 1:
        cov_xy = (sum_xy - n * x_mean * y_mean) / (n - 1)
    else:
        cov_xy = 0.0
    gain = 1.0 - y_mean / x_mean
    # delta method on g(X, Y) = 1 - Y/X at the sample means
    var_gain = ((y_mean ** 2 / x_mean ** 4) * x_se ** 2
                + y_se ** 2 / x_mean ** 2
                - 2.0 * (y_mean / x_mean ** 3) * cov_xy / n)
    std_err = math.sqrt(max(var_gain, 0.0))
    return EstimateWithCI(mean=gain, std_err=std_err, trials=n,
                          empty_trials=n_empty)


def sample_fading(s, rng):
    """One :class:`FadingDraw` for scenario ``s`` from stream ``rng``.

    Draw order: g_ad, g_ud, g_ua, g_li, g_ad_vec2, g_ua_vec2.
    """
    g = rng.generator()
    return FadingDraw(g_ad=float(g.standard_exponential()),
                      g_ud=float(g.standard_exponential()),
                      g_ua=float(g.standard_exponential()),
                      g_li=s.sigma_li * float(g.standard_exponential()),
                      g_ad_vec2=float(g.standard_exponential(2).sum()),
                      g_ua_vec2=float(g.standard_exponential(2).sum()))
