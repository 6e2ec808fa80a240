"""Minimal static SVG of an event-study figure: OLS estimates with their
confidence intervals for every period, posterior means with credible sets
for the post periods."""

import numpy as np

from .gaussian import normal_quantile

W, H, PAD = 640, 360, 48


def event_study_svg(es, summary, level=0.95) -> str:
    z = normal_quantile((1.0 + level) / 2.0)
    periods = np.array(es.periods, dtype=float)
    sd = np.sqrt(np.diag(es.sigma))
    ols_lo, ols_hi = es.beta - z * sd, es.beta + z * sd
    iv = summary.intervals
    lows = [ols_lo.min(), 0.0] + ([iv.lower.min()] if iv is not None else [])
    highs = [ols_hi.max(), 0.0] + ([iv.upper.max()] if iv is not None else [])
    y0, y1 = min(lows), max(highs)
    if y1 <= y0:
        y1 = y0 + 1.0
    x0, x1 = periods.min() - 1, periods.max() + 1

    def sx(p):
        return PAD + (p - x0) / (x1 - x0) * (W - 2 * PAD)

    def sy(v):
        return H - PAD - (v - y0) / (y1 - y0) * (H - 2 * PAD)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<line x1="{PAD}" y1="{sy(0):.2f}" x2="{W - PAD}" y2="{sy(0):.2f}" stroke="#999" stroke-dasharray="4 3"/>',
        f'<line x1="{sx(0):.2f}" y1="{PAD}" x2="{sx(0):.2f}" y2="{H - PAD}" stroke="#ccc"/>',
    ]
    for p, b, lo, hi in zip(periods, es.beta, ols_lo, ols_hi):
        x = sx(p) - 5
        out.append(f'<line x1="{x:.2f}" y1="{sy(lo):.2f}" x2="{x:.2f}" y2="{sy(hi):.2f}" stroke="#1f77b4"/>')
        out.append(f'<circle cx="{x:.2f}" cy="{sy(b):.2f}" r="3" fill="#1f77b4"/>')
    if iv is not None:
        for p, m, lo, hi in zip(es.post_periods, summary.tau_mean, iv.lower, iv.upper):
            x = sx(p) + 5
            out.append(f'<line x1="{x:.2f}" y1="{sy(lo):.2f}" x2="{x:.2f}" y2="{sy(hi):.2f}" stroke="#d62728"/>')
            out.append(f'<rect x="{x - 3:.2f}" y="{sy(m) - 3:.2f}" width="6" height="6" fill="#d62728"/>')
    for p in es.periods:
        out.append(f'<text x="{sx(p):.2f}" y="{H - PAD + 16}" font-size="11" text-anchor="middle">{p}</text>')
    out.append(f'<text x="{PAD}" y="{PAD - 16}" font-size="12">OLS estimate / CI (blue), posterior mean / CS (red)</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
