"""Static panels from the simulation CSVs.

Input is the two result schemas the simulation CLI writes (scenario1.csv,
scenario2.csv); nothing here imports the simulation package. Plotted points
are exactly the CSV rows, and every reference line sits at a value read from
the CSV, never recomputed. Rendering is sequential and deterministic: a
fixed svg hashsalt and no embedded timestamps, so re-rendering the same CSV
gives identical bytes.
"""

from __future__ import annotations

import csv
import enum
import html
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

SCENARIO1_COLUMNS = [
    "dist",
    "gamma",
    "C",
    "m",
    "p",
    "alpha",
    "procedure",
    "replicates",
    "risk_mean",
    "risk_se",
    "risk_ratio",
    "p2_mean",
    "p2_se",
    "alpha_inf",
    "alpha_log",
    "beta_star_inf",
]

SCENARIO2_COLUMNS = [
    "dist",
    "gamma",
    "C",
    "m",
    "p",
    "procedure",
    "replicates",
    "mp_mean",
    "mp_se",
    "p1_mean",
    "p1_se",
    "p2_mean",
    "p2_se",
]

_SVG_SALT = "abos-figures"


class PanelKind(enum.Enum):
    RISK_RATIO = "risk-ratio"
    P2_VS_ALPHA = "p2-vs-alpha"
    RATES_VS_P = "rates-vs-p"

    @property
    def source(self) -> str:
        """Basename of the CSV this panel kind reads."""
        if self is PanelKind.RATES_VS_P:
            return "scenario2.csv"
        return "scenario1.csv"

    @property
    def columns(self) -> list[str]:
        if self is PanelKind.RATES_VS_P:
            return SCENARIO2_COLUMNS
        return SCENARIO1_COLUMNS


@dataclass(frozen=True)
class CellFilter:
    """One simulation cell: a (dist, gamma, C, m) combination."""

    dist: str
    gamma: float
    c: float
    m: int

    def label(self) -> str:
        return f"{self.dist} gamma={self.gamma:g} C={self.c:g} m={self.m}"

    def matches(self, row: dict[str, str]) -> bool:
        return (
            row["dist"] == self.dist
            and float(row["gamma"]) == self.gamma
            and float(row["C"]) == self.c
            and int(row["m"]) == self.m
        )


@dataclass(frozen=True)
class PanelSpec:
    csv_path: Path
    kind: PanelKind
    cell: CellFilter
    out_path: Path
    # reference-line toggles: alpha_inf dashed, alpha_log dotted,
    # beta_star_inf solid (scenario-1 panels only)
    show_alpha_inf: bool = True
    show_alpha_log: bool = True
    show_beta_star: bool = True


@dataclass(frozen=True)
class PanelResult:
    """What render_panel drew: the file plus the exact plotted data.

    series maps a label to (x, y) tuples taken verbatim from the CSV rows;
    reference_lines maps a name to the value it was drawn at (abscissas for
    vertical lines, the ordinate for the oracle-p2 horizontal, and slope 1.0
    for the mp-equals-p diagonal on rate panels).
    """

    path: Path
    kind: PanelKind
    cell: CellFilter
    series: dict[str, tuple[tuple[float, ...], tuple[float, ...]]] = field(hash=False)
    reference_lines: dict[str, float] = field(hash=False)


def _read_rows(csv_path: Path, expected: list[str]) -> list[dict[str, str]]:
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != expected:
            got = reader.fieldnames or []
            missing = [c for c in expected if c not in got]
            extra = [c for c in got if c not in expected]
            raise ValueError(
                f"{csv_path} does not match the expected schema"
                f" (missing columns: {missing or 'none'},"
                f" unexpected columns: {extra or 'none'})"
            )
        return list(reader)


def _cell_rows(
    rows: list[dict[str, str]], cell: CellFilter, csv_path: Path
) -> list[dict[str, str]]:
    picked = [row for row in rows if cell.matches(row)]
    if not picked:
        raise ValueError(f"filter matches no rows in {csv_path}: {cell.label()}")
    return picked


def _constant(rows: list[dict[str, str]], column: str) -> float:
    values = {row[column] for row in rows}
    if len(values) != 1:
        raise ValueError(f"column {column!r} is not constant within the cell")
    return float(values.pop())


def _series_by_procedure(
    rows: list[dict[str, str]], x_col: str, y_col: str
) -> dict[str, tuple[tuple[float, ...], tuple[float, ...]]]:
    grouped: dict[str, tuple[list[float], list[float]]] = {}
    for row in rows:
        xs, ys = grouped.setdefault(row["procedure"], ([], []))
        xs.append(float(row[x_col]))
        ys.append(float(row[y_col]))
    return {label: (tuple(xs), tuple(ys)) for label, (xs, ys) in grouped.items()}


def _draw_vertical_refs(ax, spec: PanelSpec, rows) -> dict[str, float]:
    refs: dict[str, float] = {}
    wanted = (
        ("alpha_inf", spec.show_alpha_inf, "--"),
        ("alpha_log", spec.show_alpha_log, ":"),
        ("beta_star_inf", spec.show_beta_star, "-"),
    )
    for column, enabled, style in wanted:
        if not enabled:
            continue
        value = _constant(rows, column)
        ax.axvline(value, linestyle=style, color="0.35", linewidth=1.0)
        refs[column] = value
    return refs


def render_panel(spec: PanelSpec) -> PanelResult:
    """Render one panel to spec.out_path and report what was drawn."""
    rows = _read_rows(spec.csv_path, spec.kind.columns)
    cell_rows = _cell_rows(rows, spec.cell, spec.csv_path)

    fig, ax = plt.subplots(figsize=(4.8, 3.6), layout="constrained")
    try:
        if spec.kind is PanelKind.RISK_RATIO:
            series = _series_by_procedure(cell_rows, "alpha", "risk_ratio")
            for label, (xs, ys) in series.items():
                ax.plot(xs, ys, marker="o", markersize=3, linewidth=1.0, label=label)
            refs = _draw_vertical_refs(ax, spec, cell_rows)
            ax.set_xscale("log")
            ax.set_xlabel("alpha")
            ax.set_ylabel("risk relative to oracle")
        elif spec.kind is PanelKind.P2_VS_ALPHA:
            series = _series_by_procedure(cell_rows, "alpha", "p2_mean")
            for label, (xs, ys) in series.items():
                if label == "oracle":
                    continue
                ax.plot(xs, ys, marker="o", markersize=3, linewidth=1.0, label=label)
            refs = _draw_vertical_refs(ax, spec, cell_rows)
            if "oracle" in series:
                # the oracle's miss rate does not depend on alpha; draw its
                # (constant) value as the horizontal benchmark
                oracle_rows = [r for r in cell_rows if r["procedure"] == "oracle"]
                oracle_p2 = _constant(oracle_rows, "p2_mean")
                ax.axhline(oracle_p2, linestyle="--", color="0.2", linewidth=1.0)
                refs["oracle_p2"] = oracle_p2
            ax.set_xscale("log")
            ax.set_xlabel("alpha")
            ax.set_ylabel("miss rate")
        else:
            series = {}
            markers = {"mp_mean": "o", "p1_mean": "s", "p2_mean": "^"}
            names = {"mp_mean": "MP", "p1_mean": "P1", "p2_mean": "P2"}
            for column in ("mp_mean", "p1_mean", "p2_mean"):
                for proc, (xs, ys) in _series_by_procedure(
                    cell_rows, "p", column
                ).items():
                    label = f"{proc}:{names[column]}"
                    series[label] = (xs, ys)
                    ax.plot(
                        xs,
                        ys,
                        marker=markers[column],
                        markersize=3,
                        linewidth=1.0,
                        label=label,
                    )
            diagonal = sorted({float(row["p"]) for row in cell_rows})
            ax.plot(diagonal, diagonal, color="0.6", linewidth=0.8)
            refs = {"mp_equals_p_slope": 1.0}
            ax.set_xscale("log")
            ax.set_xlabel("signal fraction p")
            ax.set_ylabel("rate")

        ax.set_title(spec.cell.label(), fontsize=9)
        ax.legend(fontsize=7)
        spec.out_path.parent.mkdir(parents=True, exist_ok=True)
        metadata = None
        if spec.out_path.suffix in (".svg", ".pdf"):
            metadata = {"Date": None}
        with matplotlib.rc_context({"svg.hashsalt": _SVG_SALT}):
            fig.savefig(spec.out_path, metadata=metadata)
    finally:
        plt.close(fig)
    return PanelResult(spec.out_path, spec.kind, spec.cell, series, refs)


def _discover_cells(rows: list[dict[str, str]]) -> list[CellFilter]:
    seen: dict[tuple, CellFilter] = {}
    for row in rows:
        key = (row["dist"], float(row["gamma"]), float(row["C"]), int(row["m"]))
        if key not in seen:
            seen[key] = CellFilter(*key)
    return list(seen.values())


def _cell_passes(cell: CellFilter, restrict: dict) -> bool:
    checks = {"dist": cell.dist, "gamma": cell.gamma, "C": cell.c, "m": cell.m}
    return all(checks[key] == value for key, value in restrict.items())


def _panel_filename(kind: PanelKind, cell: CellFilter) -> str:
    return (
        f"{kind.value}-{cell.dist}-gamma{cell.gamma:g}-C{cell.c:g}-m{cell.m}.svg"
    )


def _write_index(out_dir: Path, results: list[PanelResult]) -> Path:
    parts = [
        "<!doctype html>",
        '<html><head><meta charset="utf-8"><title>abos panels</title>',
        "<style>body{font-family:sans-serif;margin:1.5em}"
        " table{border-collapse:collapse}"
        " td,th{border:1px solid #bbb;padding:6px;vertical-align:top}"
        " img{width:340px}</style>",
        "</head><body>",
        "<h1>Simulation panels</h1>",
    ]
    for kind in PanelKind:
        of_kind = [r for r in results if r.kind is kind]
        if not of_kind:
            continue
        gammas = sorted({r.cell.gamma for r in of_kind})
        cs = sorted({r.cell.c for r in of_kind})
        parts.append(f"<h2>{html.escape(kind.value)}</h2>")
        parts.append("<table>")
        header = "".join(f"<th>C={c:g}</th>" for c in cs)
        parts.append(f"<tr><th></th>{header}</tr>")
        for gamma in gammas:
            row_cells = [f"<th>gamma={gamma:g}</th>"]
            for c in cs:
                here = [
                    r for r in of_kind if r.cell.gamma == gamma and r.cell.c == c
                ]
                imgs = "".join(
                    f'<a href="{html.escape(r.path.name)}">'
                    f'<img src="{html.escape(r.path.name)}" alt="{html.escape(r.cell.label())}"></a>'
                    for r in here
                )
                row_cells.append(f"<td>{imgs or '&mdash;'}</td>")
            parts.append("<tr>" + "".join(row_cells) + "</tr>")
        parts.append("</table>")
    parts.append("<h2>All files</h2><ul>")
    for result in results:
        name = html.escape(result.path.name)
        parts.append(f'<li><a href="{name}">{name}</a></li>')
    parts.append("</ul></body></html>")
    index_path = out_dir / "index.html"
    index_path.write_text("\n".join(parts) + "\n")
    return index_path


def render_all(
    in_dir: Path | str,
    out_dir: Path | str,
    kinds: tuple[PanelKind, ...] | None = None,
    cell_filter: dict | None = None,
) -> list[PanelResult]:
    """Render every (cell, kind) panel found in in_dir's CSVs, plus an index.

    kinds restricts the panel kinds, cell_filter (keys among dist, gamma, C,
    m) restricts the cells. Raises FileNotFoundError naming the CSVs a
    requested kind needs but in_dir lacks; raises ValueError when the filter
    selects nothing.
    """
    in_dir = Path(in_dir)
    out_dir = Path(out_dir)
    kinds = tuple(kinds) if kinds else tuple(PanelKind)

    missing = sorted(
        {kind.source for kind in kinds if not (in_dir / kind.source).is_file()}
    )
    if missing:
        raise FileNotFoundError(
            f"missing expected inputs in {in_dir}: {', '.join(missing)}"
        )

    out_dir.mkdir(parents=True, exist_ok=True)
    results: list[PanelResult] = []
    for kind in kinds:
        csv_path = in_dir / kind.source
        cells = _discover_cells(_read_rows(csv_path, kind.columns))
        if cell_filter:
            cells = [cell for cell in cells if _cell_passes(cell, cell_filter)]
        for cell in cells:
            spec = PanelSpec(
                csv_path=csv_path,
                kind=kind,
                cell=cell,
                out_path=out_dir / _panel_filename(kind, cell),
            )
            results.append(render_panel(spec))
    if not results:
        raise ValueError(f"filter matches no rows in {in_dir}: {cell_filter}")
    _write_index(out_dir, results)
    return results
