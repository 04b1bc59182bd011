from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from jinja2 import Environment, FileSystemLoader, select_autoescape

from ..sim.trajectory import Trajectory

# Points kept for the inline residual chart
CHART_POINTS = 400


class RunReportGenerator:
    """Renders a self-contained HTML page for one closed-loop run."""

    def __init__(self, template_dir: str = "templates", template_name: str = "run_report.html"):
        """
        Initialize the HTML report generator.

        Args:
            template_dir: Directory containing Jinja2 templates
            template_name: Page template inside template_dir
        """
        self.template_dir = Path(template_dir)
        self.template_name = template_name

        self.jinja_env = Environment(
            loader=FileSystemLoader(str(self.template_dir)),
            autoescape=select_autoescape(['html', 'xml'])
        )
        self.jinja_env.filters['num'] = self._format_number

    @staticmethod
    def _format_number(value: Optional[float], digits: int = 6) -> str:
        if value is None:
            return "n/a"
        if isinstance(value, (int, np.integer)):
            return str(value)
        return f"{value:.{digits}g}"

    @staticmethod
    def _chart_points(traj: Trajectory, width: int = 800, height: int = 240) -> str:
        """SVG polyline of log10 ||theta_hat - theta*|| against time."""
        try:
            residual = np.linalg.norm(traj.theta_tilde(), axis=1)
        except ValueError:
            return ""
        t = traj.to_seconds()
        if len(t) < 2 or t[-1] <= t[0]:
            return ""
        stride = max(1, len(t) // CHART_POINTS)
        t, residual = t[::stride], residual[::stride]
        log_r = np.log10(np.maximum(residual, 1e-300))
        lo, hi = float(np.min(log_r)), float(np.max(log_r))
        span = hi - lo if hi > lo else 1.0
        xs = (t - t[0]) / (t[-1] - t[0]) * width
        ys = height - (log_r - lo) / span * height
        return " ".join(f"{x:.1f},{y:.1f}" for x, y in zip(xs, ys))

    def _prepare_context(self, summary, traj: Trajectory) -> Dict[str, Any]:
        data = summary.to_dict()
        players: List[Dict[str, Any]] = []
        for k in range(2):
            players.append({
                "index": k + 1,
                "final_theta_hat": data["final_theta_hat"][k],
                "nash": data["nash_equilibrium"][k] if data["nash_equilibrium"] else None,
                "nash_payoff": data["nash_payoff"][k] if data["nash_payoff"] else None,
                "reference_payoff": data["reference_payoff"][k] if data["reference_payoff"] else None,
                "events": data["event_counts"][k],
                "min_gap": data["min_gap"][k],
                "mean_gap": data["mean_gap"][k],
                "overshoot": data["trigger_overshoot"][k],
            })
        return {
            "summary": data,
            "players": players,
            "stability": data.get("stability"),
            "chart_points": self._chart_points(traj),
            "samples": len(traj),
        }

    def generate_html(self, summary, traj: Trajectory) -> str:
        """
        Generate the complete HTML page.

        Args:
            summary: RunSummary of the run
            traj: The recorded trajectory

        Returns:
            HTML string with embedded styles and chart
        """
        template = self.jinja_env.get_template(self.template_name)
        return template.render(**self._prepare_context(summary, traj))

    def save_html(self, summary, traj: Trajectory, output_path: str = "output/run/report.html") -> Path:
        """
        Save the generated HTML to a file.

        Raises:
            OSError: If the file cannot be written
        """
        output_file = Path(output_path)
        output_file.parent.mkdir(parents=True, exist_ok=True)
        with open(output_file, 'w', encoding='utf-8') as f:
            f.write(self.generate_html(summary, traj))
        return output_file
