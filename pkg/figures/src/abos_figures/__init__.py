"""Static panel rendering for simulation result CSVs."""

from .panels import (
    SCENARIO1_COLUMNS,
    SCENARIO2_COLUMNS,
    CellFilter,
    PanelKind,
    PanelResult,
    PanelSpec,
    render_all,
    render_panel,
)

__all__ = [
    "SCENARIO1_COLUMNS",
    "SCENARIO2_COLUMNS",
    "CellFilter",
    "PanelKind",
    "PanelResult",
    "PanelSpec",
    "render_all",
    "render_panel",
]

__version__ = "0.1.0"
