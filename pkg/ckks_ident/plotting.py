"""
Trajectory Plot
===============

Renders |theta_hat_k - theta| against k (log-scaled k axis) as a PNG with
Pillow. One polyline per trajectory.
"""

import logging
import math
from io import BytesIO
from typing import Any, Dict, Mapping, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

COLORS = [(31, 119, 180), (214, 39, 40), (44, 160, 44), (255, 127, 14), (148, 103, 189)]

MARGIN_LEFT = 70
MARGIN_RIGHT = 20
MARGIN_TOP = 30
MARGIN_BOTTOM = 50


def _points(errors: np.ndarray, x_max: float, y_max: float, width: int, height: int) -> list:
    plot_w = width - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = height - MARGIN_TOP - MARGIN_BOTTOM
    k = np.arange(len(errors))
    x = MARGIN_LEFT + plot_w * np.log10(k + 1) / x_max
    y = MARGIN_TOP + plot_h * (1 - errors / y_max)
    # Thin long trajectories to about one point per pixel column
    stride = max(1, len(errors) // (4 * plot_w))
    idx = np.unique(np.concatenate([np.arange(0, len(errors), stride), [len(errors) - 1]]))
    return list(zip(x[idx].tolist(), y[idx].tolist()))


def render_error_plot(series: Mapping[str, Sequence[float]], path: Optional[str] = None,
                      width: int = 800, height: int = 500, title: str = "Estimation error") -> Dict[str, Any]:
    """Draw each error trajectory; write PNG to path, or return the bytes when path is None."""
    try:
        from PIL import Image, ImageDraw
    except ImportError:
        return {'success': False, 'error': 'PIL/Pillow required for plotting'}

    curves = {name: np.asarray(v, dtype=np.float64) for name, v in series.items() if len(v)}
    if not curves:
        return {'success': False, 'error': 'No data to plot'}

    longest = max(len(v) for v in curves.values())
    x_max = max(math.log10(longest), 1.0)
    finite = np.concatenate([v[np.isfinite(v)] for v in curves.values()])
    y_max = float(np.max(finite)) * 1.05 if finite.size and np.max(finite) > 0 else 1.0

    img = Image.new('RGB', (width, height), 'white')
    draw = ImageDraw.Draw(img)
    x0, y0 = MARGIN_LEFT, height - MARGIN_BOTTOM
    x1, y1 = width - MARGIN_RIGHT, MARGIN_TOP
    draw.rectangle([x0, y1, x1, y0], outline='black')

    for decade in range(int(x_max) + 1):
        x = x0 + (x1 - x0) * decade / x_max
        draw.line([(x, y0), (x, y0 + 5)], fill='black')
        draw.text((x - 10, y0 + 8), f"1e{decade}", fill='black')
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = y0 - (y0 - y1) * frac
        draw.line([(x0 - 5, y), (x0, y)], fill='black')
        draw.text((5, y - 6), f"{y_max * frac:.3g}", fill='black')
    draw.text((x0 + (x1 - x0) // 2 - 40, height - 20), "k + 1 (log)", fill='black')
    draw.text((x0, 8), title, fill='black')

    for i, (name, errors) in enumerate(curves.items()):
        color = COLORS[i % len(COLORS)]
        pts = _points(np.nan_to_num(errors, nan=y_max, posinf=y_max), x_max, y_max, width, height)
        if len(pts) > 1:
            draw.line(pts, fill=color, width=2)
        draw.text((x1 - 150, y1 + 10 + 14 * i), name, fill=color)

    if path is None:
        buf = BytesIO()
        img.save(buf, format='PNG')
        return {'success': True, 'png': buf.getvalue()}
    try:
        img.save(path, format='PNG')
    except OSError as e:
        return {'success': False, 'error': str(e)}
    logger.info(f"Wrote plot {path}")
    return {'success': True, 'path': str(path)}
