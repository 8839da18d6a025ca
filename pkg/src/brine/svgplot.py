"""Minimal hand-rolled SVG output: text-based, diffable, no display deps."""

from __future__ import annotations


def _scale(vals, lo, hi, out_lo, out_hi):
    span = (hi - lo) or 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in vals]


def phase_diagram_svg(rows, path, width: int = 640, height: int = 480) -> None:
    """Plot h_pm(c) with the phase-separation band shaded.

    rows: sequence of (c, h_minus, h_plus), c ascending.
    """
    cs = [r[0] for r in rows]
    hm = [r[1] for r in rows]
    hp = [r[2] for r in rows]
    pad = 60
    c_lo, c_hi = min(cs), max(cs)
    h_lo = min(hm) * 1.05 if min(hm) < 0 else -0.01
    h_hi = max(0.0, max(hp)) + 0.02 * abs(h_lo)
    xs = _scale(cs, c_lo, c_hi, pad, width - pad)
    ym = _scale(hm, h_lo, h_hi, height - pad, pad)
    yp = _scale(hp, h_lo, h_hi, height - pad, pad)

    def pts(x, y):
        return " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(x, y))

    band = pts(xs, yp) + " " + pts(xs[::-1], ym[::-1])
    y0 = _scale([0.0], h_lo, h_hi, height - pad, pad)[0]
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<polygon points="{band}" fill="#9ecae1" fill-opacity="0.6" '
        'stroke="none"/>',
        f'<polyline points="{pts(xs, yp)}" fill="none" stroke="#08519c" '
        'stroke-width="2"/>',
        f'<polyline points="{pts(xs, ym)}" fill="none" stroke="#a50f15" '
        'stroke-width="2"/>',
        f'<line x1="{pad}" y1="{y0:.2f}" x2="{width - pad}" y2="{y0:.2f}" '
        'stroke="#888" stroke-dasharray="4 3"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" '
        'stroke="black"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" '
        f'y2="{height - pad}" stroke="black"/>',
        f'<text x="{width // 2}" y="{height - 20}" text-anchor="middle" '
        'font-family="sans-serif" font-size="14">salt concentration c</text>',
        f'<text x="18" y="{height // 2}" text-anchor="middle" '
        'font-family="sans-serif" font-size="14" '
        f'transform="rotate(-90 18 {height // 2})">field h</text>',
        f'<text x="{width - pad}" y="{pad - 10}" text-anchor="end" '
        'font-family="sans-serif" font-size="12">'
        'band: phase separation; above: liquid; below: ice</text>',
        "</svg>",
    ]
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
