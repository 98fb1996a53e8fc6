"""Deterministic SVG scatter plots of fitted projections.

Each projected point has a lambda vector over the three fitted vertices;
the plot places it at (lambda_2 - lambda_1, lambda_3 - lambda_1), which is
invariant under the common shift that tropical scaling allows. Coloring
follows the figure conventions: one color per projected tree topology with
rare topologies drawn black, or one color per sample group for mixture
datasets. The SVG is assembled by hand so identical inputs give identical
bytes.
"""

from dataclasses import dataclass

import numpy as np

from .ultrametrics import leaf_count_for, topology_from_vector

MODES = ("by-topology", "by-group", "lower-percentile-black")

PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
]
NEUTRAL = "#4682b4"


@dataclass
class RenderSpec:
    width: int = 800
    height: int = 600
    mode: str = "by-topology"
    percentile: float = 5.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not 0 < self.percentile < 100:
            raise ValueError("percentile must be in (0, 100)")


def plane_coordinates(lambdas) -> np.ndarray:
    """(lambda_2 - lambda_1, lambda_3 - lambda_1) rows for s = 3 fits."""
    lam = np.asarray(lambdas, dtype=np.float64)
    if lam.ndim != 2 or lam.shape[1] != 3:
        raise ValueError("render requires 3 vertices")
    return np.column_stack([lam[:, 1] - lam[:, 0], lam[:, 2] - lam[:, 0]])


def _topology_keys(projections, labels):
    m = leaf_count_for(np.asarray(projections).shape[1])
    keys = []
    for row in np.asarray(projections):
        topo = topology_from_vector(row, m, check=False)
        keys.append(topo.shape_newick(labels))
    return keys


def _point_colors(projections, labels, group_labels, spec: RenderSpec):
    """Per-point colors plus the legend rows (text, color, count)."""
    n = len(np.asarray(projections))
    if spec.mode == "by-group":
        if group_labels is None:
            raise ValueError("by-group coloring needs group labels")
        groups = sorted(set(group_labels))
        color_of = {g: PALETTE[i % len(PALETTE)] for i, g in enumerate(groups)}
        colors = [color_of[g] for g in group_labels]
        legend = [
            (f"group {g}", color_of[g], sum(1 for x in group_labels if x == g))
            for g in groups
        ]
        return colors, legend

    keys = _topology_keys(projections, labels)
    counts = {}
    for key in keys:
        counts[key] = counts.get(key, 0) + 1
    rare = {key for key, c in counts.items() if 100.0 * c / n <= spec.percentile}
    ranked = sorted(counts, key=lambda k: (-counts[k], k))
    color_of = {}
    next_color = 0
    for key in ranked:
        if key in rare:
            color_of[key] = "#000000"
        elif spec.mode == "lower-percentile-black":
            color_of[key] = NEUTRAL
        else:
            color_of[key] = PALETTE[next_color % len(PALETTE)]
            next_color += 1
    colors = [color_of[k] for k in keys]
    legend = [(key, color_of[key], counts[key]) for key in ranked]
    return colors, legend


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_svg(
    lambdas,
    projections,
    spec: RenderSpec,
    labels=None,
    group_labels=None,
) -> str:
    """Scatter SVG of the projected sample; see the module docstring."""
    coords = plane_coordinates(lambdas)
    colors, legend = _point_colors(projections, labels, group_labels, spec)

    margin = 40.0
    w, h = float(spec.width), float(spec.height)
    lo = coords.min(axis=0)
    hi = coords.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)

    def px(xy):
        x = margin + (xy[0] - lo[0]) / span[0] * (w - 2 * margin)
        y = h - margin - (xy[1] - lo[1]) / span[1] * (h - 2 * margin)
        return x, y

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" '
        f'height="{spec.height}" viewBox="0 0 {spec.width} {spec.height}">',
        f'<rect x="0" y="0" width="{spec.width}" height="{spec.height}" '
        'fill="white" stroke="#cccccc"/>',
    ]
    for xy, color in zip(coords, colors):
        x, y = px(xy)
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="{color}" fill-opacity="0.8"/>')
    for i, (text, color, count) in enumerate(legend):
        y = 16.0 + 16.0 * i
        parts.append(f'<rect x="8" y="{y - 9:.2f}" width="10" height="10" fill="{color}"/>')
        parts.append(
            f'<text x="22" y="{y:.2f}" font-family="monospace" font-size="11">'
            f"{_escape(text)} ({count})</text>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
