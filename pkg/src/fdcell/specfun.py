"""Numerical building blocks: adaptive quadrature, alternating series, and
the handful of special-function patterns the rate/outage expressions need.

Everything is plain float in, float out, stateless and reentrant.  The two
workhorse entry points return a :class:`SeriesEval` carrying an error
estimate, an effort counter and (when something went wrong) a flag; the
special-function wrappers return bare floats evaluated well below the
tolerances at which they are consumed.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy import special as _sp

from .errors import DomainError

__all__ = [
    "EvalPath",
    "SeriesEval",
    "FLAG_NO_CONVERGENCE",
    "FLAG_NONMONOTONE",
    "quad_adaptive",
    "alternating_series_sum",
    "gauss_2f1_unit",
    "appell_f1",
    "rate_kernel_g",
    "parabolic_d_m1",
    "exp_integral_ei",
    "erfc",
]

FLAG_NO_CONVERGENCE = "NO_CONVERGENCE"
FLAG_NONMONOTONE = "NONMONOTONE"

DEFAULT_QUAD_TOL = 1e-8      # relative-or-absolute mixed tolerance
DEFAULT_SERIES_TOL = 1e-10
DEFAULT_BUDGET = 2000        # subdivision budget for adaptive quadrature
DEFAULT_KMAX = 400

_EPS = np.finfo(float).eps


class EvalPath(Enum):
    """Which of the two evaluation routes produced a number."""

    SERIES = "series"
    INTEGRAL = "integral"


@dataclass(frozen=True)
class SeriesEval:
    """A numeric result with an honest error estimate attached.

    ``flag`` is None on success, or one of ``FLAG_NO_CONVERGENCE`` /
    ``FLAG_NONMONOTONE`` when the estimate should not be trusted at the
    requested tolerance (the best value found is still returned).
    """

    value: float
    err_estimate: float
    effort: int
    path: EvalPath
    flag: Optional[str] = None

    def __post_init__(self):
        if not (self.err_estimate >= 0.0):
            raise ValueError("err_estimate must be non-negative")

    @property
    def converged(self) -> bool:
        return self.flag is None


# ---------------------------------------------------------------------------
# adaptive Gauss-Kronrod quadrature
# ---------------------------------------------------------------------------

# 15-point Kronrod nodes on [-1, 1]; the embedded 7-point Gauss rule lives on
# the odd-indexed nodes.
_XGK = np.array([
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
])


def _panel_eval(fvec, lo: float, hi: float):
    """Kronrod-15 estimate and rescaled error on one panel.

    The raw |K15 - G7| difference underestimates on panels that look smooth
    to both rules but are under-resolved, so the QUADPACK rescaling against
    the panel's variation, resasc * min(1, (200*raw/resasc)^1.5), is taken
    as well and the larger of the two kept (the rescaled form is never
    allowed to *shrink* the estimate: when both rules agree by accident it
    would claim convergence that never happened).  The result is floored at
    the roundoff level of the absolute integral.
    """
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    fx = fvec(mid + half * _XGK)
    ik = half * float(fx @ _WGK)
    ig = half * float(fx[1::2] @ _WG)
    if not math.isfinite(ik):
        # a non-finite node poisons the panel; force further refinement
        return 0.0, math.inf
    raw = abs(ik - ig)
    resabs = half * float(np.abs(fx) @ _WGK)
    resasc = half * float(np.abs(fx - ik / (hi - lo)) @ _WGK)
    err = raw
    if resasc > 0.0 and raw > 0.0:
        err = max(raw, resasc * min(1.0, (200.0 * raw / resasc) ** 1.5))
    return ik, max(err, 50.0 * _EPS * resabs)


def _ensure_vectorized(f: Callable) -> Callable:
    """Return a callable that accepts an ndarray of abscissae."""
    probe = np.array([0.3141592653589793, 0.6535897932384626])
    try:
        out = np.asarray(f(probe), dtype=float)
        if out.shape == probe.shape:
            return f
    except Exception:
        pass
    return np.vectorize(f, otypes=[float])


def quad_adaptive(f: Callable, a: float, b: float,
                  tol: float = DEFAULT_QUAD_TOL, *,
                  budget: int = DEFAULT_BUDGET) -> SeriesEval:
    """Adaptively integrate ``f`` over [a, b] to err <= tol*max(1, |I|).

    The integrand may be written for scalars or for ndarrays (the latter is
    detected and preferred).  ``b = inf`` is folded onto [0, 1) through
    y = t/(1-t); ``a = -inf`` with finite ``b`` is handled by reflection.
    Integrable endpoint singularities are refined toward; if the subdivision
    budget runs out first the best estimate is returned flagged
    ``NO_CONVERGENCE`` with its (too large) error estimate.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    if math.isinf(a) and math.isinf(b):
        raise DomainError("doubly infinite ranges are not supported")

    fvec = _ensure_vectorized(f)
    if math.isinf(b):
        base, lo, hi = fvec, float(a), None

        def fvec(t, _f=base, _a=lo):  # y = a + t/(1-t)
            onemt = 1.0 - t
            return _f(_a + t / onemt) / (onemt * onemt)

        a, b = 0.0, 1.0
    elif math.isinf(a):
        base, hi = fvec, float(b)

        def fvec(t, _f=base, _b=hi):  # reflect onto [0, inf)
            onemt = 1.0 - t
            return _f(_b - t / onemt) / (onemt * onemt)

        a, b = 0.0, 1.0
    if a == b:
        return SeriesEval(0.0, 0.0, 0, EvalPath.INTEGRAL)

    val, err = _panel_eval(fvec, a, b)
    effort = 1
    heap = [(-err, 0, a, b, val, err)]
    frozen_val = 0.0   # panels too narrow to split further
    frozen_err = 0.0
    seq = 1
    splits = 0
    flag = None

    while True:
        total = frozen_val + math.fsum(item[4] for item in heap)
        err_tot = frozen_err + math.fsum(item[5] for item in heap)
        if err_tot <= tol * max(1.0, abs(total)):
            break
        if splits >= budget or not heap:
            flag = FLAG_NO_CONVERGENCE
            break
        _, _, lo, hi, pval, perr = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            # width at the floating-point floor; keep its contribution as is
            frozen_val += pval
            frozen_err += perr
            continue
        v1, e1 = _panel_eval(fvec, lo, mid)
        v2, e2 = _panel_eval(fvec, mid, hi)
        effort += 2
        splits += 1
        heapq.heappush(heap, (-e1, seq, lo, mid, v1, e1))
        heapq.heappush(heap, (-e2, seq + 1, mid, hi, v2, e2))
        seq += 2

    total = frozen_val + math.fsum(item[4] for item in heap)
    err_tot = frozen_err + math.fsum(item[5] for item in heap)
    if not math.isfinite(err_tot):
        err_tot = math.inf
        flag = FLAG_NO_CONVERGENCE
    return SeriesEval(total, err_tot, effort, EvalPath.INTEGRAL, flag)


def _quad_relative(f: Callable, a: float, b: float, tol: float,
                   budget: int = DEFAULT_BUDGET) -> SeriesEval:
    """quad_adaptive refined to a *relative* tolerance for small integrals.

    quad_adaptive stops at err <= tol*max(1, |I|), which is an absolute bound
    whenever |I| < 1.  For positive integrands (no cancellation) a second pass
    with the tolerance rescaled by the first estimate recovers err <= tol*|I|
    down to tiny magnitudes.
    """
    first = quad_adaptive(f, a, b, tol, budget=budget)
    scale = abs(first.value)
    if scale >= 1.0 or scale < 1e-280 or not first.converged:
        return first
    second = quad_adaptive(f, a, b, tol * scale, budget=budget)
    return SeriesEval(second.value, second.err_estimate,
                      first.effort + second.effort, second.path, second.flag)


# ---------------------------------------------------------------------------
# alternating series
# ---------------------------------------------------------------------------

def alternating_series_sum(term: Callable[[int], float],
                           tol: float = DEFAULT_SERIES_TOL,
                           k_max: int = DEFAULT_KMAX) -> SeriesEval:
    """Sum term(0) + term(1) + ... until |term| < tol*|partial sum|.

    The error estimate is the magnitude of the first omitted term (a valid
    tail bound once the terms alternate with decreasing magnitude).  Three
    failure modes are flagged ``NONMONOTONE``: a term that is not finite
    (the finite partial sum is returned with an infinite error), magnitudes
    still growing at k_max, and intermediate terms so much larger than the
    sum that roundoff has destroyed the requested precision (the
    catastrophic-cancellation regime; see the integral paths for what to
    use instead).
    """
    if tol <= 0 or k_max < 1:
        raise DomainError("tol must be positive and k_max >= 1")
    total = 0.0
    max_mag = 0.0
    prev_mag = math.inf
    mag = math.inf
    omitted = None
    effort = 0
    for k in range(k_max + 1):
        t = float(term(k))
        if not math.isfinite(t):
            # summing it would poison the total and defeat the stopping rule
            return SeriesEval(total, math.inf, k + 1, EvalPath.SERIES,
                              FLAG_NONMONOTONE)
        prev_mag, mag = mag, abs(t)
        if k > 0 and mag <= tol * max(abs(total), 1e-300):
            omitted = mag
            break
        total += t
        max_mag = max(max_mag, mag)
        effort = k + 1

    flag = None
    if omitted is None:
        # ran out of terms before the stopping rule fired
        omitted = mag
        flag = FLAG_NONMONOTONE if mag > prev_mag else FLAG_NO_CONVERGENCE
    roundoff_floor = max_mag * _EPS
    err = omitted
    if roundoff_floor > 1e-6 * max(abs(total), 1e-300):
        flag = FLAG_NONMONOTONE
        err = max(err, roundoff_floor)
    return SeriesEval(total, err, effort, EvalPath.SERIES, flag)


# ---------------------------------------------------------------------------
# special-function patterns
# ---------------------------------------------------------------------------

def gauss_2f1_unit(a: float, x: float, tol: float = 1e-11) -> float:
    """2F1(1, a; a+1; -x) for a > 0, x >= 0.

    Evaluated from the Euler integral a * int_0^1 t^(a-1)/(1+x t) dt after
    the substitution t = u^(1/a), which removes the endpoint singularity:
    the integrand becomes 1/(1 + x*u^(1/a)), bounded on [0, 1].
    """
    if not (a > 0.0) or not (x >= 0.0) or not math.isfinite(a) or not math.isfinite(x):
        raise DomainError(f"gauss_2f1_unit needs a > 0 and x >= 0, got a={a}, x={x}")
    if x == 0.0:
        return 1.0
    inv_a = 1.0 / a

    def integrand(u):
        return 1.0 / (1.0 + x * u ** inv_a)

    return _quad_relative(integrand, 0.0, 1.0, tol).value


def appell_f1(a: float, b1: float, b2: float, c: float,
              x: float, y: float, tol: float = 1e-11) -> float:
    """Appell F1(a; b1, b2; c; x, y) for c > a > 0 and x, y < 1.

    Evaluated from the Euler single integral
    Gamma(c)/(Gamma(a)Gamma(c-a)) * int_0^1 t^(a-1) (1-t)^(c-a-1)
    (1-x t)^(-b1) (1-y t)^(-b2) dt, valid on the whole x, y < 1 half-planes
    (the double power series would diverge for |x| or |y| >= 1).  The two
    integrable endpoint singularities are removed exactly by substituting
    t = u^(1/a) on [0, 1/2] and 1-t = v^(1/(c-a)) on [1/2, 1].
    """
    vals = (a, b1, b2, c, x, y)
    if not all(math.isfinite(v) for v in vals):
        raise DomainError(f"appell_f1 arguments must be finite, got {vals}")
    if not (c > a > 0.0) or x >= 1.0 or y >= 1.0:
        raise DomainError(
            "appell_f1 domain is c > a > 0 with x < 1 and y < 1; got "
            f"a={a}, c={c}, x={x}, y={y}"
        )
    beta = c - a

    def smooth(t):
        return (1.0 - x * t) ** (-b1) * (1.0 - y * t) ** (-b2)

    inv_a = 1.0 / a
    inv_b = 1.0 / beta

    def left(u):  # t = u^(1/a) in [0, 1/2]
        t = u ** inv_a
        return smooth(t) * (1.0 - t) ** (beta - 1.0)

    def right(v):  # t = 1 - v^(1/beta) in [1/2, 1]
        t = 1.0 - v ** inv_b
        return smooth(t) * t ** (a - 1.0)

    li = _quad_relative(left, 0.0, 0.5 ** a, tol).value / a
    ri = _quad_relative(right, 0.0, 0.5 ** beta, tol).value / beta
    pref = math.exp(math.lgamma(c) - math.lgamma(a) - math.lgamma(beta))
    return pref * (li + ri)


def rate_kernel_g(a: float, c: float, tol: float = 1e-10) -> SeriesEval:
    """int_0^inf 2F1(1, a; a+1; -c*y)/(1+y) dy for a > 0, c > 0.

    Writing the 2F1 as its Euler integral and swapping the two integrals
    (both integrands are positive, so Fubini applies) collapses the inner
    y-integral to a closed form:

        int_0^inf dy / ((1+y)(1+B y))  =  ln(B)/(B-1),   B = c * u^(1/a),

    leaving a single smooth u-integral on (0, 1] with only a logarithmic
    endpoint at u = 0.  B is formed in log space so extreme (a, c) cannot
    underflow to log(0).
    """
    if not (a > 0.0 and c > 0.0) or not math.isfinite(a) or not math.isfinite(c):
        raise DomainError(f"rate_kernel_g needs a > 0 and c > 0, got a={a}, c={c}")
    log_c = math.log(c)
    inv_a = 1.0 / a

    def integrand(u):
        log_b = log_c + np.log(u) * inv_a
        bb = np.exp(log_b)
        w = bb - 1.0
        small = np.abs(w) < 1e-4
        ws = np.where(small, w, 1.0)
        series = 1.0 - ws / 2.0 + ws * ws / 3.0 - ws ** 3 / 4.0
        wd = np.where(small, 1.0, w)
        return np.where(small, series, log_b / wd)

    return _quad_relative(integrand, 0.0, 1.0, tol)


def parabolic_d_m1(x: float) -> float:
    """Parabolic cylinder function D_{-1}(x) for x >= 0.

    D_{-1}(x) = e^(x^2/4) sqrt(pi/2) erfc(x/sqrt(2)); evaluated in the
    cancellation-free scaled form sqrt(pi/2) e^(-x^2/4) erfcx(x/sqrt(2)),
    which neither overflows nor underflows until the true value does.
    """
    if not (x >= 0.0) or not math.isfinite(x):
        raise DomainError(f"parabolic_d_m1 needs x >= 0, got {x}")
    return math.sqrt(math.pi / 2.0) * math.exp(-0.25 * x * x) * float(
        _sp.erfcx(x / math.sqrt(2.0))
    )


def exp_integral_ei(x: float) -> float:
    """Principal-value exponential integral Ei(x), x != 0."""
    if x == 0.0 or math.isnan(x):
        raise DomainError("Ei has a logarithmic singularity at x = 0")
    return float(_sp.expi(x))


def erfc(x: float) -> float:
    """Complementary error function (thin stdlib wrapper kept for the
    package's public numeric surface)."""
    return math.erfc(x)
