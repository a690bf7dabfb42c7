"""Offline rendering of equibail CSV outputs (infusion panels, convergence curves)."""

from .csvdata import (EXPERIMENT_COLUMNS, INFUSION_COLUMNS, SchemaError,
                      load_experiment_rows, load_infusion_grid)
from .figures import (FigureSpec, InfusionGeometry, build_convergence_figure,
                      build_infusion_figure, infer_infusion_geometry,
                      render_convergence, render_infusion_figure)

__version__ = "0.1.0"
