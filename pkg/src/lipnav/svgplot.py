"""Static SVG rendering of an episode log."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

from .logio import LoadedLog

STANCE_COLORS = {"right": "#d62728", "left": "#1f77b4"}


class _Canvas:
    def __init__(self, bounds, width=800, margin=30):
        xmin, ymin, xmax, ymax = bounds
        self.xmin, self.ymax = xmin, ymax
        self.scale = (width - 2 * margin) / max(xmax - xmin, ymax - ymin)
        self.margin = margin
        self.width = width
        self.height = int(2 * margin + (ymax - ymin) * self.scale)
        self.items: list[str] = []

    def pt(self, x, y) -> tuple[float, float]:
        return (
            round(self.margin + (x - self.xmin) * self.scale, 2),
            round(self.margin + (self.ymax - y) * self.scale, 2),
        )

    def polygon(self, verts, **style):
        pts = " ".join("%s,%s" % self.pt(x, y) for x, y in verts)
        self.items.append(f'<polygon points="{pts}" {_style(style)}/>')

    def polyline(self, verts, **style):
        pts = " ".join("%s,%s" % self.pt(x, y) for x, y in verts)
        self.items.append(f'<polyline points="{pts}" fill="none" {_style(style)}/>')

    def circle(self, x, y, r_m=None, r_px=None, **style):
        cx, cy = self.pt(x, y)
        r = r_px if r_px is not None else r_m * self.scale
        self.items.append(f'<circle cx="{cx}" cy="{cy}" r="{round(r, 2)}" {_style(style)}/>')

    def line(self, a, b, **style):
        (x1, y1), (x2, y2) = self.pt(*a), self.pt(*b)
        self.items.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" {_style(style)}/>')

    def text(self, x, y, s, **style):
        px, py = self.pt(x, y)
        self.items.append(f'<text x="{px}" y="{py}" {_style(style)}>{escape(s)}</text>')

    def render(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect width="100%" height="100%" fill="white"/>\n'
        )
        return head + "\n".join(self.items) + "\n</svg>\n"


def _style(style: dict) -> str:
    return " ".join(f'{k.replace("_", "-")}="{v}"' for k, v in style.items())


def render_svg(log: LoadedLog, snapshots: int = 4, goal_tolerance: float = 0.3) -> str:
    w = log.world
    xs = [w.bounds[0], w.bounds[2]] + [s[1][0] for s in log.ticks]
    ys = [w.bounds[1], w.bounds[3]] + [s[1][2] for s in log.ticks]
    bounds = (min(xs) - 0.5, min(ys) - 0.5, max(xs) + 0.5, max(ys) + 0.5)
    cv = _Canvas(bounds)

    for poly in w.inflated:
        cv.polygon(poly.vertices, fill="none", stroke="#888888", stroke_dasharray="4 3", stroke_width=1)
    for i, poly in enumerate(w.obstacles):
        cv.polygon(poly.vertices, fill="#bbbbbb", stroke="#444444", stroke_width=1, **{"class": "obstacle"})

    # active half-space boundaries at evenly spaced replans
    if log.replans and snapshots > 0:
        picks = sorted({round(i * (len(log.replans) - 1) / max(1, snapshots - 1)) for i in range(snapshots)})
        for j in picks:
            rp = log.replans[j]
            for _, ex, ey, cx, cy in rp["halfspaces"]:
                tx, ty = -ey, ex
                a = (cx - 1.5 * tx, cy - 1.5 * ty)
                b = (cx + 1.5 * tx, cy + 1.5 * ty)
                cv.line(a, b, stroke="#e6a700", stroke_width=1.5, **{"class": "halfspace"})
                cv.line((cx, cy), (cx + 0.3 * ex, cy + 0.3 * ey), stroke="#e6a700", stroke_width=1)
            cv.circle(rp["x0"][0], rp["x0"][2], r_px=3, fill="#e6a700")

    if log.rrt_path:
        cv.polyline(log.rrt_path, stroke="#2ca02c", stroke_dasharray="6 4", stroke_width=1.5)
        for p in log.rrt_path[1:-1]:
            cv.circle(p[0], p[1], r_px=4, fill="none", stroke="#2ca02c", **{"class": "subgoal"})

    if log.ticks:
        path = [(s[1][0], s[1][2]) for s in log.ticks]
        cv.polyline(path, stroke="black", stroke_width=1.5, **{"class": "com-path"})
    for st in log.steps:
        fx, fy = st["foot"]
        cv.circle(fx, fy, r_px=3, fill=STANCE_COLORS.get(st["stance"], "gray"), **{"class": "footstep"})

    cv.circle(w.start.x, w.start.y, r_px=5, fill="black")
    cv.circle(w.goal.x, w.goal.y, r_m=goal_tolerance, fill="none", stroke="#2ca02c", stroke_width=2, **{"class": "goal"})

    viol = log.outcome.get("violation") if log.outcome else None
    if viol:
        x, y = viol
        d = 0.25
        cv.line((x - d, y - d), (x + d, y + d), stroke="red", stroke_width=3, **{"class": "violation"})
        cv.line((x - d, y + d), (x + d, y - d), stroke="red", stroke_width=3, **{"class": "violation"})

    label = f"{log.mode}: {log.outcome.get('outcome', '?')} in {log.outcome.get('steps', '?')} steps"
    cv.text(bounds[0] + 0.2, bounds[3] - 0.3, label, font_size=14, font_family="sans-serif")
    return cv.render()


def write_svg(log: LoadedLog, path: str | Path, **kwargs) -> None:
    Path(path).write_text(render_svg(log, **kwargs))
