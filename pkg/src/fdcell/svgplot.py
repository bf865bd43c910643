"""Minimal self-contained SVG line charts.

Writes standalone ``.svg`` files -- axes, ticks, polylines, legend -- with no
plotting dependency.  Output is byte-deterministic for fixed inputs: floats
are formatted to fixed precision and series are drawn in the order given.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

__all__ = ["Series", "write_chart"]

# line colors recycled in order (Okabe-Ito palette, readable on white)
_PALETTE = ("#0072b2", "#d55e00", "#009e73", "#cc79a7",
            "#e69f00", "#56b4e9", "#f0e442", "#000000")

_W, _H = 640, 440                 # canvas size in px
_ML, _MR, _MT, _MB = 72, 16, 34, 48   # margins: left, right, top, bottom


@dataclass(frozen=True)
class Series:
    """One polyline: points in data coordinates plus a legend label."""

    label: str
    x: Sequence[float]
    y: Sequence[float]
    dashed: bool = False

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ValueError("x and y must have equal length")


def _px(v: float) -> str:
    return "%.2f" % v


def _nice_step(span: float) -> float:
    """Round a raw tick spacing up onto the 1-2-5 ladder."""
    raw = span / 5.0
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if mult * mag >= raw:
            return mult * mag
    return 10.0 * mag


def _lin_ticks(lo: float, hi: float) -> List[float]:
    if not (hi > lo):
        return [lo]
    step = _nice_step(hi - lo)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _log_ticks(lo: float, hi: float) -> List[float]:
    ticks = [10.0 ** k for k in range(math.floor(math.log10(lo)),
                                      math.ceil(math.log10(hi)) + 1)]
    return [t for t in ticks if lo / 1.001 <= t <= hi * 1.001]


def _tick_label(v: float) -> str:
    if v == 0.0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return "%.0e" % v
    return ("%g" % v)


def _data_bounds(series: Sequence[Series],
                 log_y: bool) -> Tuple[float, float, float, float]:
    xs = [float(v) for s in series for v in s.x if math.isfinite(v)]
    ys = [float(v) for s in series for v in s.y
          if math.isfinite(v) and (not log_y or v > 0.0)]
    if not xs or not ys:
        raise ValueError("no finite data points to plot")
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if log_y:
        if y1 == y0:
            y0, y1 = y0 / 2.0, y1 * 2.0
    else:
        pad = 0.05 * (y1 - y0) if y1 > y0 else max(0.5, abs(y0) * 0.1)
        y0, y1 = y0 - pad, y1 + pad
    return x0, x1, y0, y1


def write_chart(path, series: Sequence[Series], *, title: str = "",
                x_label: str = "", y_label: str = "",
                log_y: bool = False) -> None:
    """Render ``series`` as polylines into a standalone SVG file.

    ``log_y`` switches the vertical axis to decades (points with y <= 0 are
    dropped from the drawing -- useful for outage curves).
    """
    if not series:
        raise ValueError("need at least one series")
    x0, x1, y0, y1 = _data_bounds(series, log_y)
    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def sx(x: float) -> float:
        return _ML + (x - x0) / (x1 - x0) * pw

    def sy(y: float) -> float:
        if log_y:
            f = (math.log10(y) - math.log10(y0)) / (math.log10(y1) - math.log10(y0))
        else:
            f = (y - y0) / (y1 - y0)
        return _MT + (1.0 - f) * ph

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
           'viewBox="0 0 %d %d" font-family="sans-serif">' % (_W, _H, _W, _H),
           '<rect width="%d" height="%d" fill="white"/>' % (_W, _H)]
    if title:
        out.append('<text x="%s" y="20" font-size="14" text-anchor="middle">'
                   '%s</text>' % (_px(_ML + pw / 2.0), escape(title)))

    ticks_y = _log_ticks(y0, y1) if log_y else _lin_ticks(y0, y1)
    for t in ticks_y:
        py = sy(t)
        out.append('<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="#dddddd"/>'
                   % (_px(_ML), _px(py), _px(_ML + pw), _px(py)))
        out.append('<text x="%s" y="%s" font-size="11" text-anchor="end">'
                   '%s</text>' % (_px(_ML - 6), _px(py + 4),
                                  escape(_tick_label(t))))
    for t in _lin_ticks(x0, x1):
        px = sx(t)
        out.append('<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="#dddddd"/>'
                   % (_px(px), _px(_MT), _px(px), _px(_MT + ph)))
        out.append('<text x="%s" y="%s" font-size="11" text-anchor="middle">'
                   '%s</text>' % (_px(px), _px(_MT + ph + 16),
                                  escape(_tick_label(t))))

    # axes frame
    out.append('<rect x="%s" y="%s" width="%s" height="%s" fill="none" '
               'stroke="black"/>' % (_px(_ML), _px(_MT), _px(pw), _px(ph)))
    if x_label:
        out.append('<text x="%s" y="%s" font-size="12" text-anchor="middle">'
                   '%s</text>' % (_px(_ML + pw / 2.0), _px(_H - 10),
                                  escape(x_label)))
    if y_label:
        out.append('<text x="16" y="%s" font-size="12" text-anchor="middle" '
                   'transform="rotate(-90 16 %s)">%s</text>'
                   % (_px(_MT + ph / 2.0), _px(_MT + ph / 2.0),
                      escape(y_label)))

    for i, s in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = ["%s,%s" % (_px(sx(float(x))), _px(sy(float(y))))
               for x, y in zip(s.x, s.y)
               if math.isfinite(x) and math.isfinite(y)
               and (not log_y or y > 0.0)]
        dash = ' stroke-dasharray="7,4"' if s.dashed else ""
        if pts:
            out.append('<polyline points="%s" fill="none" stroke="%s" '
                       'stroke-width="1.8"%s/>' % (" ".join(pts), color, dash))
        # legend entry, stacked in the upper-right corner of the plot area
        ly = _MT + 14 + 16 * i
        out.append('<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="%s" '
                   'stroke-width="1.8"%s/>' % (_px(_ML + pw - 150), _px(ly),
                                               _px(_ML + pw - 122), _px(ly),
                                               color, dash))
        out.append('<text x="%s" y="%s" font-size="11">%s</text>'
                   % (_px(_ML + pw - 116), _px(ly + 4), escape(s.label)))

    out.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")
