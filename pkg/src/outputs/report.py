from __future__ import annotations

import base64
import logging
import os
from io import BytesIO
from pathlib import Path
from typing import Dict, List, Optional

import matplotlib
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import plotly.graph_objects as go
from plotly.subplots import make_subplots

from config import settings
from src.engine.simulator import RunTrace
from src.types import RunSummary

matplotlib.use("Agg")

logger = logging.getLogger(__name__)


# ---------- Small helpers ----------
def _format_num(val: float | None) -> str:
    if val is None or pd.isna(val):
        return "—"
    if val != 0 and (abs(val) < 1e-3 or abs(val) >= 1e4):
        return f"{val:.3e}"
    return f"{val:.4f}"


def _format_time(val: float | None) -> str:
    if val is None or pd.isna(val):
        return "—"
    return f"{val:g}"


def _sparkline_b64(psi: np.ndarray) -> str:
    if psi is None or len(psi) == 0:
        return ""
    fig, ax = plt.subplots(figsize=(3, 0.9))
    ax.plot(np.arange(len(psi)), psi, color="#2a9d4b", linewidth=1.25)
    if np.all(psi > 0):
        ax.set_yscale("log")
    ax.axis("off")
    buffer = BytesIO()
    fig.savefig(buffer, format="png", bbox_inches="tight", pad_inches=0)
    plt.close(fig)
    buffer.seek(0)
    return base64.b64encode(buffer.read()).decode("ascii")


def output_paths(name: str, digest: str, out_dir: Path) -> Dict[str, Path]:
    keys = {"name": name, "digest": digest}
    return {
        "trace": out_dir / settings.TRACE_FILE_TEMPLATE.format(**keys),
        "removed": out_dir / settings.REMOVED_FILE_TEMPLATE.format(**keys),
        "gnuplot": out_dir / settings.GNUPLOT_FILE_TEMPLATE.format(**keys),
        "chart": out_dir / settings.CHART_FILE_TEMPLATE.format(**keys),
    }


# ---------- Per-run trace files ----------
def trace_frame(trace: RunTrace) -> pd.DataFrame:
    df = pd.DataFrame(trace.values, columns=[f"node_{i}" for i in range(trace.n)])
    df.insert(0, "t", trace.times)
    df["psi"] = trace.psi
    df["m"] = trace.m
    df["M"] = trace.M
    return df


def removed_frame(trace: RunTrace) -> pd.DataFrame:
    rows = [
        {"t": t, "node": node, "removed_ids": " ".join(str(j) for j in removed)}
        for t, node, removed in trace.removed_log
    ]
    return pd.DataFrame(rows, columns=["t", "node", "removed_ids"])


def write_trace_csv(trace: RunTrace, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    trace_frame(trace).to_csv(path, index=False, float_format="%.17g")


def write_removed_csv(trace: RunTrace, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    removed_frame(trace).to_csv(path, index=False)


def gnuplot_script(trace: RunTrace, csv_path: Path, title: str) -> str:
    lines = [
        "set datafile separator ','",
        "set key outside right",
        f"set title '{title}'",
        "set xlabel '{}'".format("round" if trace.mode == "discrete" else "t"),
        "set ylabel 'value'",
    ]
    series = []
    for i in range(trace.n):
        dash = "dt 2" if i in trace.adversaries else "dt 1"
        series.append(f"'{csv_path.name}' using 1:{i + 2} with lines {dash} title 'node {i}'")
    lines.append("plot " + ", \\\n     ".join(series))
    return "\n".join(lines) + "\n"


def write_gnuplot_script(trace: RunTrace, csv_path: Path, path: Path, title: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(gnuplot_script(trace, csv_path, title), encoding="utf-8")


# ---------- Plotly exports ----------
def _plot_trace(trace: RunTrace, title: str) -> go.Figure:
    fig = make_subplots(rows=2, cols=1, shared_xaxes=True, vertical_spacing=0.08, row_heights=[0.7, 0.3])
    shown = range(min(trace.n, settings.PLOTLY_MAX_NODES))
    for i in shown:
        adversary = i in trace.adversaries
        fig.add_trace(
            go.Scatter(
                x=trace.times,
                y=trace.values[:, i],
                mode="lines",
                name=f"node {i}" + (" (adv)" if adversary else ""),
                line={"dash": "dash" if adversary else "solid", "width": 2 if adversary else 1.25},
            ),
            row=1,
            col=1,
        )
    fig.add_trace(go.Scatter(x=trace.times, y=trace.psi, mode="lines", name="Psi", line={"color": "#444"}),
                  row=2, col=1)
    lo, hi = trace.safety_interval
    for bound in (lo, hi):
        fig.add_hline(y=bound, line_dash="dot", line_color="#999", row=1, col=1)
    if np.all(trace.psi > 0):
        fig.update_yaxes(type="log", row=2, col=1)
    fig.update_layout(title=title, showlegend=trace.n <= 20)
    return fig


def write_trace_chart(trace: RunTrace, path: Path, title: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    _plot_trace(trace, title).write_html(path, include_plotlyjs="cdn")


def write_run_outputs(trace: RunTrace, name: str, digest: str, out_dir: Path) -> Dict[str, Path]:
    paths = output_paths(name, digest, out_dir)
    write_trace_csv(trace, paths["trace"])
    write_removed_csv(trace, paths["removed"])
    write_gnuplot_script(trace, paths["trace"], paths["gnuplot"], f"{name} [{trace.protocol}]")
    write_trace_chart(trace, paths["chart"], f"{name}: {trace.protocol}, {trace.verdict.value}")
    logger.info("Wrote trace -> %s", paths["trace"])
    return paths


def load_trace_psi(path: Path) -> Optional[np.ndarray]:
    try:
        return pd.read_csv(path, usecols=["psi"])["psi"].to_numpy()
    except Exception as exc:  # noqa: BLE001
        logger.warning("Failed to read %s: %s", path, exc)
        return None


# ---------- Console and tabular exports ----------
def summarize_to_console(rows: List[RunSummary], top_n: int = settings.TOP_N_DEFAULT) -> None:
    print("Runs:")
    print(f"{'Name':24} {'Protocol':12} {'Verdict':16} {'Steps':>7} {'Psi final':>11} {'L':>9}")
    for row in rows[:top_n]:
        verdict = "error" if row.error else row.verdict
        print(
            f"{row.name[:24]:24} {row.protocol:12} {verdict:16} {row.steps:7d} "
            f"{_format_num(row.psi_final):>11} {_format_num(row.consensus_value):>9}"
        )
    if len(rows) > top_n:
        print(f"... {len(rows) - top_n} more")


def summary_frame(rows: List[RunSummary]) -> pd.DataFrame:
    columns = list(RunSummary.__dataclass_fields__)
    return pd.DataFrame([r.as_row() for r in rows], columns=columns)


def export_tabular(rows: List[RunSummary], csv_path: Path, json_path: Path) -> None:
    df = summary_frame(rows)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    json_path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(csv_path, index=False)
    df.to_json(json_path, orient="records", indent=2)
    logger.info("Wrote %s and %s", csv_path, json_path)


# ---------- Summary HTML ----------
def _row_class(row: RunSummary) -> str:
    if row.error:
        return "failed"
    return {"consensus": "consensus", "stalled": "stalled"}.get(row.verdict, "unsafe")


def export_summary_html(rows: List[RunSummary], path: Path) -> None:
    rows_html = []
    for row in rows:
        psi = load_trace_psi(Path(row.trace_path)) if row.trace_path else None
        spark = _sparkline_b64(psi) if psi is not None else ""
        chart = os.path.relpath(row.chart_path, path.parent) if row.chart_path else ""
        if spark and chart:
            spark_cell = f"<a href='{chart}' target='_blank'><img class='spark' src='data:image/png;base64,{spark}' alt='psi' /></a>"
        elif spark:
            spark_cell = f"<img class='spark' src='data:image/png;base64,{spark}' alt='psi' />"
        else:
            spark_cell = "—"
        rows_html.append(
            f"""
            <tr class="{_row_class(row)}">
                <td>{row.name}</td>
                <td>{row.protocol}</td>
                <td>{row.mode}</td>
                <td>{row.error or row.verdict}</td>
                <td class="num">{row.n}</td>
                <td class="num">{row.adversaries}</td>
                <td class="num">{row.steps}</td>
                <td class="num">{_format_num(row.psi0)}</td>
                <td class="num">{_format_num(row.psi_final)}</td>
                <td class="num">{_format_num(row.consensus_value)}</td>
                <td class="num">{_format_time(row.time_to_consensus)}</td>
                <td class="num">{row.safety_violations}</td>
                <td>{spark_cell}</td>
            </tr>
            """
        )

    html = f"""<!doctype html>
<html>
<head>
  <meta charset="utf-8" />
  <title>Resilient consensus runs</title>
  <style>
    body {{ font-family: Arial, sans-serif; padding: 16px; color: #111; }}
    h1 {{ margin: 0 0 12px 0; }}
    table {{ border-collapse: collapse; width: 100%; }}
    th, td {{ padding: 8px 10px; border-bottom: 1px solid #e5e5e5; text-align: left; }}
    th.sortable {{ cursor: pointer; }}
    tr.consensus {{ background: #f8fffa; }}
    tr.stalled {{ background: #fffbea; }}
    tr.unsafe, tr.failed {{ background: #fff1f0; }}
    .num {{ text-align: right; font-variant-numeric: tabular-nums; }}
    .spark {{ height: 40px; width: 120px; }}
  </style>
</head>
<body>
  <h1>Resilient consensus runs</h1>
  <table id="runs">
    <thead>
      <tr>
        <th class="sortable" data-col="0">Name</th>
        <th class="sortable" data-col="1">Protocol</th>
        <th class="sortable" data-col="2">Mode</th>
        <th class="sortable" data-col="3">Verdict</th>
        <th class="sortable" data-col="4" data-type="num">n</th>
        <th class="sortable" data-col="5" data-type="num">Adversaries</th>
        <th class="sortable" data-col="6" data-type="num">Steps</th>
        <th class="sortable" data-col="7" data-type="num">Psi[0]</th>
        <th class="sortable" data-col="8" data-type="num">Psi final</th>
        <th class="sortable" data-col="9" data-type="num">L</th>
        <th class="sortable" data-col="10" data-type="num">Time to consensus</th>
        <th class="sortable" data-col="11" data-type="num">Safety violations</th>
        <th>Psi</th>
      </tr>
    </thead>
    <tbody>
      {''.join(rows_html)}
    </tbody>
  </table>
  <script>
    const table = document.getElementById('runs').getElementsByTagName('tbody')[0];
    let sortState = {{ col: -1, dir: 1 }};
    document.querySelectorAll('th.sortable').forEach(h => {{
      h.addEventListener('click', () => {{
        const col = parseInt(h.dataset.col, 10);
        const numeric = h.dataset.type === 'num';
        sortState = sortState.col === col ? {{ col, dir: -sortState.dir }} : {{ col, dir: 1 }};
        const rows = Array.from(table.rows);
        rows.sort((a, b) => {{
          let av = a.cells[col].innerText, bv = b.cells[col].innerText;
          if (numeric) {{ av = parseFloat(av) || 0; bv = parseFloat(bv) || 0; }}
          if (av < bv) return -sortState.dir;
          if (av > bv) return sortState.dir;
          return 0;
        }});
        rows.forEach(r => table.appendChild(r));
      }});
    }});
  </script>
</body>
</html>
"""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(html, encoding="utf-8")
    logger.info("Wrote summary HTML -> %s", path)
