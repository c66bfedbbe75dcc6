"""Figure rendering for leadopt CSV outputs.

Strictly downstream of the CSV files: nothing here recomputes any
optimization quantity.  Three plot kinds are supported:

curves           best-worker f vs step, one labeled curve per method
                 (mc-bench `*_curves.csv` schema)
trajectory       2-D worker paths over a contour of the sinc surface
                 (sinc-demo `*_trajectory.csv` schema)
leader_timeline  leader worker id vs total steps
                 (run `*_trace.csv` schema)
"""

from .render import PlotSpec, SchemaError, load_rows, render

__all__ = ["PlotSpec", "SchemaError", "load_rows", "render"]
