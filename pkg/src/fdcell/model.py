"""Scenario configuration and the per-realization SINR / rate formulas.

One cell: a full-duplex access point at the origin serves a downlink user
drawn from a Poisson field inside a disk of radius ``r_cell`` while a single
uplink user transmits from distance ``d_pair`` away from that downlink user.
Everything both engines (Monte Carlo and analytic) need to agree on lives
here: unit conventions, power bookkeeping, and the instantaneous link
formulas

    SINR_DL = P_AP g_AD r^-alpha / (P_U g_UD d^-alpha + noise)
    SINR_UL = P_U g_UA dist_UA^-alpha / (P_AP g_LI + noise)

with Rayleigh fading (exponential channel powers) and residual loopback
interference g_LI of mean ``sigma_li`` after cancellation.

Power convention: ``p_ap_db`` / ``p_ul_db`` are transmit SNRs in dB over the
noise floor, i.e. the noise power is 1 in the same units whenever
``noise > 0``.  Setting ``noise = 0`` switches both engines into
interference-limited mode.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, ValidationError


class Selection(enum.Enum):
    """How the served downlink user is chosen from the Poisson draw."""

    NUS = "nus"  # nearest user
    RUS = "rus"  # uniformly random user


class HdPowerPolicy(enum.Enum):
    """How half-duplex slot powers relate to the full-duplex powers."""

    ENERGY = "energy"  # P/delta, P/(1-delta): same energy per frame
    POWER = "power"    # powers unchanged: same instantaneous power


class HdCondition(enum.Enum):
    """Half-duplex baseline flavor."""

    RC = "rc"  # RF-chain conserved: one antenna per direction
    AC = "ac"  # antenna conserved: both antennas beamform / combine


def _coerce_enum(kind, value):
    if isinstance(value, kind):
        return value
    if isinstance(value, str):
        try:
            return kind(value.strip().lower())
        except ValueError:
            pass
    allowed = ", ".join(m.value for m in kind)
    raise ValidationError(
        "%s must be one of {%s}, got %r" % (kind.__name__, allowed, value)
    )


@dataclass(frozen=True)
class ScenarioConfig:
    """Full parameterization of one cell scenario.

    Construction converts the dB fields to linear scale (cached as
    ``p_ap`` / ``p_ul`` / ``gamma_th``) but performs no bound checking;
    call :func:`validate_scenario` to enforce the model invariants.
    """

    lambda_d: float = 1e-3      # DL user density [users / m^2]
    r_cell: float = 200.0       # cell radius [m]
    d_pair: float = 25.0        # UL-to-DL pairing distance [m]
    alpha: float = 2.0          # path-loss exponent (>= 2)
    p_ap_db: float = 25.0       # AP transmit SNR [dB over noise]
    p_ul_db: float = 25.0       # UL user transmit SNR [dB over noise]
    sigma_li: float = 0.1       # residual loopback interference variance (linear)
    noise: float = 1.0          # noise power (linear); 0 = interference-limited
    delta: float = 0.5          # HD downlink time fraction, open interval (0,1)
    selection: Selection = Selection.NUS                    # DL user choice
    hd_power_policy: HdPowerPolicy = HdPowerPolicy.ENERGY   # HD power rule
    gamma_th_db: float = 0.0    # outage SINR threshold [dB]

    # linear-scale views of the dB fields, filled in automatically
    p_ap: float = field(init=False, repr=False, default=0.0)
    p_ul: float = field(init=False, repr=False, default=0.0)
    gamma_th: float = field(init=False, repr=False, default=0.0)

    def __post_init__(self):
        object.__setattr__(self, "selection",
                           _coerce_enum(Selection, self.selection))
        object.__setattr__(self, "hd_power_policy",
                           _coerce_enum(HdPowerPolicy, self.hd_power_policy))
        object.__setattr__(self, "p_ap", 10.0 ** (self.p_ap_db / 10.0))
        object.__setattr__(self, "p_ul", 10.0 ** (self.p_ul_db / 10.0))
        object.__setattr__(self, "gamma_th", 10.0 ** (self.gamma_th_db / 10.0))


@dataclass(frozen=True)
class TopologySample:
    """One spatial realization of the cell."""

    dl_points: np.ndarray       # (N, 2) planar DL user positions
    r_sel: float | None         # AP -> selected DL user distance [m]
    theta: float | None         # UL pairing angle [rad, in [0, 2pi))
    dist_ul_ap: float | None    # UL user -> AP distance [m]
    dist_ul_dl: float | None    # UL -> DL user distance (= d_pair) [m]
    empty: bool                 # True when the Poisson draw had zero users


@dataclass(frozen=True)
class FadingDraw:
    """One set of channel power realizations (all unit conventions linear).

    ``g_ad`` / ``g_ud`` / ``g_ua`` are unit-mean exponentials, ``g_li`` is
    exponential with mean ``sigma_li``, and the ``*_vec2`` fields are
    two-branch vector norms (sum of two unit-mean exponentials) used by the
    antenna-conserved half-duplex baseline.  Fields may be scalars or
    equal-shape arrays.
    """

    g_ad: float | np.ndarray        # AP -> DL channel power |h_AD|^2
    g_ud: float | np.ndarray        # UL -> DL cross-channel power |h_UD|^2
    g_ua: float | np.ndarray        # UL -> AP channel power |h_UA|^2
    g_li: float | np.ndarray        # residual loopback power |h_AA|^2
    g_ad_vec2: float | np.ndarray   # two-branch MRT norm ||h_AD||^2
    g_ua_vec2: float | np.ndarray   # two-branch MRC norm ||h_UA||^2


_BOUNDS_MSG = {
    "lambda_d": "lambda_d must satisfy lambda_d > 0",
    "r_cell": "r_cell must satisfy r_cell > 0",
    "d_pair": "d_pair must satisfy d_pair >= 0",
    "alpha": "alpha must satisfy alpha >= 2",
    "sigma_li": "sigma_li must satisfy sigma_li >= 0",
    "noise": "noise must satisfy noise >= 0",
    "delta": "delta must satisfy 0 < delta < 1",
}


def validate_scenario(raw):
    """Check every model invariant on ``raw`` and return a normalized copy.

    Raises :class:`ValidationError` naming the offending field and bound.
    """
    if not isinstance(raw, ScenarioConfig):
        raise ValidationError("expected a ScenarioConfig, got %r" % (raw,))
    for name in ("lambda_d", "r_cell", "d_pair", "alpha", "p_ap_db",
                 "p_ul_db", "sigma_li", "noise", "delta", "gamma_th_db"):
        value = getattr(raw, name)
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValidationError("%s must be a real number, got %r"
                                  % (name, value))
        if not math.isfinite(value):
            raise ValidationError("%s must be finite, got %r" % (name, value))
    checks = [
        ("lambda_d", raw.lambda_d > 0.0),
        ("r_cell", raw.r_cell > 0.0),
        ("d_pair", raw.d_pair >= 0.0),
        ("alpha", raw.alpha >= 2.0),
        ("sigma_li", raw.sigma_li >= 0.0),
        ("noise", raw.noise >= 0.0),
        ("delta", 0.0 < raw.delta < 1.0),
    ]
    for name, ok in checks:
        if not ok:
            raise ValidationError("%s=%r out of bounds: %s"
                                  % (name, getattr(raw, name), _BOUNDS_MSG[name]))
    # Re-running __post_init__ via replace() refreshes the linear caches and
    # re-coerces the enum fields, so the returned copy is fully normalized.
    return replace(raw)


# ---------------------------------------------------------------------------
# Scenario files: flat `key = value` text, one key per line, `#` comments.
# ---------------------------------------------------------------------------

_FLOAT_FIELDS = frozenset({
    "lambda_d", "r_cell", "d_pair", "alpha", "p_ap_db", "p_ul_db",
    "sigma_li", "noise", "delta", "gamma_th_db",
})
_ENUM_FIELDS = {"selection": Selection, "hd_power_policy": HdPowerPolicy}


def parse_scenario_text(text, source="<string>"):
    """Parse scenario text into a validated :class:`ScenarioConfig`.

    Keys are exactly the ScenarioConfig field names; unknown keys, repeated
    keys, and malformed values are reported with their line number.
    """
    kwargs = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError("%s:%d: expected `key = value`, got %r"
                                  % (source, lineno, raw_line.strip()))
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in kwargs:
            raise ValidationError("%s:%d: duplicate key %r"
                                  % (source, lineno, key))
        if key in _FLOAT_FIELDS:
            try:
                kwargs[key] = float(value)
            except ValueError:
                raise ValidationError("%s:%d: %s must be a number, got %r"
                                      % (source, lineno, key, value)) from None
        elif key in _ENUM_FIELDS:
            try:
                kwargs[key] = _coerce_enum(_ENUM_FIELDS[key], value)
            except ValidationError as exc:
                raise ValidationError("%s:%d: %s" % (source, lineno, exc)) from None
        else:
            raise ValidationError("%s:%d: unknown key %r"
                                  % (source, lineno, key))
    return validate_scenario(ScenarioConfig(**kwargs))


def load_scenario(path):
    """Read a scenario file from disk (see :func:`parse_scenario_text`)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_scenario_text(text, source=str(path))


# ---------------------------------------------------------------------------
# Per-realization link formulas.  All accept scalars or equal-shape arrays in
# the fading / distance slots and return matching shapes.
# ---------------------------------------------------------------------------

def path_loss(distance, alpha):
    """Singular path loss distance^-alpha.

    Raises :class:`DomainError` for non-positive distances; the model is
    singular at 0 and the caller must guard.
    """
    dist = np.asarray(distance, dtype=float)
    if np.any(dist <= 0.0):
        raise DomainError("path_loss: distance must be > 0 (singular model)")
    return (dist ** (-float(alpha)))[()]


def _ratio(num, den):
    # IEEE-style ratio: x/0 -> inf for x > 0 (guaranteed success in
    # interference-limited mode), 0/0 -> 0 (zero signal dominates).
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0),
                       np.where(num > 0.0, np.inf, 0.0))
    return out[()]


def dl_sinr(s, t, f):
    """Downlink SINR at the selected DL user.

    P_AP g_AD r^-alpha over (P_U g_UD d^-alpha + noise); with noise = 0 and
    zero interference the IEEE infinity sentinel is returned (guaranteed
    success), never an exception.
    """
    if t.empty:
        raise DomainError("dl_sinr: empty topology has no served user")
    r = np.asarray(t.r_sel, dtype=float)
    if np.any(r <= 0.0):
        raise DomainError("dl_sinr: r_sel must be > 0")
    signal = s.p_ap * np.asarray(f.g_ad, dtype=float) * r ** (-s.alpha)
    if s.d_pair > 0.0:
        interf = s.p_ul * np.asarray(f.g_ud, dtype=float) * s.d_pair ** (-s.alpha)
    else:
        # co-located pair: singular interference unless the UL leg is silent
        g_ud = np.asarray(f.g_ud, dtype=float)
        interf = np.where(s.p_ul * g_ud > 0.0, np.inf, 0.0)
    return _ratio(signal, interf + s.noise)


def ul_sinr(s, t, f):
    """Uplink SINR at the AP: P_U g_UA dist^-alpha over (P_AP g_LI + noise)."""
    if t.empty:
        raise DomainError("ul_sinr: empty topology has no served user")
    dist = np.asarray(t.dist_ul_ap, dtype=float)
    if np.any(dist <= 0.0):
        raise DomainError("ul_sinr: dist_ul_ap must be > 0")
    signal = s.p_ul * np.asarray(f.g_ua, dtype=float) * dist ** (-s.alpha)
    return _ratio(signal, s.p_ap * np.asarray(f.g_li, dtype=float) + s.noise)


def hd_powers(s):
    """(P_AP, P_U) actually radiated in the half-duplex slots.

    ENERGY scales to P/delta and P/(1-delta) so each frame burns the same
    energy as full duplex; POWER leaves the instantaneous powers unchanged.
    """
    if s.hd_power_policy is HdPowerPolicy.ENERGY:
        return s.p_ap / s.delta, s.p_ul / (1.0 - s.delta)
    return s.p_ap, s.p_ul


def hd_instant_rates(s, t, f, condition=HdCondition.RC):
    """Instantaneous half-duplex (DL, UL) rates in bit/s/Hz.

    The frame is split delta : 1-delta between downlink and uplink, so
    neither slot sees interference.  RC uses one antenna per direction; AC
    beamforms with both antennas on DL (half power per branch, vector
    channel norm) and maximum-ratio-combines both on UL.
    """
    condition = _coerce_enum(HdCondition, condition)
    if t.empty:
        raise DomainError("hd_instant_rates: empty topology has no served user")
    r = np.asarray(t.r_sel, dtype=float)
    u = np.asarray(t.dist_ul_ap, dtype=float)
    if np.any(r <= 0.0) or np.any(u <= 0.0):
        raise DomainError("hd_instant_rates: distances must be > 0")
    p_ap_hd, p_ul_hd = hd_powers(s)
    if condition is HdCondition.RC:
        g_dl, g_ul = f.g_ad, f.g_ua
    else:
        g_dl, g_ul = f.g_ad_vec2, f.g_ua_vec2
        p_ap_hd = p_ap_hd / 2.0
    g_dl = np.asarray(g_dl, dtype=float)
    g_ul = np.asarray(g_ul, dtype=float)
    snr_dl = _ratio(p_ap_hd * g_dl * r ** (-s.alpha), s.noise)
    snr_ul = _ratio(p_ul_hd * g_ul * u ** (-s.alpha), s.noise)
    dl = s.delta * np.log2(1.0 + snr_dl)
    ul = (1.0 - s.delta) * np.log2(1.0 + snr_ul)
    return dl[()], ul[()]
