"""Poisson topologies in the cell disk and the bipolar uplink placement.

Downlink users form a homogeneous Poisson point process of density
``lambda_d`` inside the disk of radius ``r_cell`` around the access point.
One of them is selected for service (nearest user or a uniformly random
one), and the paired uplink user sits at fixed distance ``d_pair`` from the
selected user at a uniform angle theta, so its distance to the AP is

    sqrt(r^2 + d^2 - 2 r d cos(theta)).

The nearest-user distance has pdf 2 pi lambda r exp(-lambda pi r^2).

Reproducibility: every trial owns an :class:`RngStream` keyed by
``(master_seed, stream_index)``.  Streams are derived through a splittable
counter-based construction (SeedSequence-keyed Philox), so the draw sequence
depends only on the key, never on which worker runs the trial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import Selection, TopologySample

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Key of one independent random stream: (master seed, trial counter)."""

    master_seed: int   # 64-bit master seed shared by a whole run
    stream_index: int  # trial counter; each index is an independent stream

    def generator(self, label=0):
        """A fresh Generator for this key (optionally sub-labeled)."""
        seed = np.random.SeedSequence(
            (self.master_seed & _MASK64, self.stream_index & _MASK64,
             int(label) & _MASK64))
        return np.random.Generator(np.random.Philox(seed))


def sample_topology(s, rng):
    """Draw one :class:`TopologySample` for scenario ``s``.

    Draw order (fixed; part of the determinism contract): user count
    N ~ Poisson(lambda_d pi r_cell^2), then N radii via r = r_cell sqrt(u),
    N position angles, the selection pick for RUS, and finally the pairing
    angle theta.  N = 0 yields ``empty=True`` with distances left unset.
    """
    g = rng.generator()
    n = int(g.poisson(s.lambda_d * math.pi * s.r_cell ** 2))
    if n == 0:
        return TopologySample(dl_points=np.zeros((0, 2)), r_sel=None,
                              theta=None, dist_ul_ap=None, dist_ul_dl=None,
                              empty=True)
    radii = s.r_cell * np.sqrt(g.random(n))
    angles = 2.0 * math.pi * g.random(n)
    points = np.column_stack((radii * np.cos(angles), radii * np.sin(angles)))
    if s.selection is Selection.NUS:
        idx = int(np.argmin(radii))
    else:
        idx = int(g.integers(n))
    r_sel = float(radii[idx])
    theta = 2.0 * math.pi * float(g.random())
    return TopologySample(dl_points=points, r_sel=r_sel, theta=theta,
                          dist_ul_ap=ul_distance_to_ap(r_sel, s.d_pair, theta),
                          dist_ul_dl=float(s.d_pair), empty=False)


def nearest_distance_pdf(r, lambda_d):
    """pdf of the nearest-user distance: 2 pi lambda r exp(-lambda pi r^2)."""
    if lambda_d <= 0.0:
        raise DomainError("nearest_distance_pdf: lambda_d must be > 0")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0):
        raise DomainError("nearest_distance_pdf: r must be >= 0")
    lam_pi = lambda_d * math.pi
    return (2.0 * lam_pi * r * np.exp(-lam_pi * r * r))[()]


def ul_distance_to_ap(r, d, theta):
    """UL-user-to-AP distance sqrt(r^2 + d^2 - 2 r d cos(theta)).

    Evaluated as sqrt((r-d)^2 + 4 r d sin^2(theta/2)), which is exact at the
    collinear configurations and never goes negative under the root.
    """
    r = np.asarray(r, dtype=float)
    d = np.asarray(d, dtype=float)
    half = np.sin(np.asarray(theta, dtype=float) / 2.0)
    return np.sqrt((r - d) ** 2 + 4.0 * r * d * half * half)[()]
