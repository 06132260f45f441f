"""Periodic gridded Euler fields, frame fields, line tracing and monitors."""
from .diagnostics import COLUMNS, DiagnosticSeries, bkm_monitor, chip_monitor, collinearity_angle, dhy_record
from .frames import (
    FrameFields,
    FrameParticle,
    FrameRun,
    euler_frame_run,
    frame_fields,
    frame_fields_from_arrays,
    lagrangian_frame_run,
)
from .grid import (
    GriddedVelocity,
    Wavenumbers,
    abc_field,
    curl,
    energy,
    enstrophy,
    from_flow,
    make_initial,
    pressure_hessian,
    spectral_divergence,
    strain,
    taylor_green_2d,
    taylor_green_3d,
)
from .io import load_snapshot, save_snapshot
from .lines import VortexLine, dhy_diagnostics, trace_vortex_line
from .sampling import EvolvingSampler, FieldSampler, sample
from .solver import euler_step, evolve

__all__ = [
    "COLUMNS",
    "DiagnosticSeries",
    "EvolvingSampler",
    "FieldSampler",
    "FrameFields",
    "FrameParticle",
    "FrameRun",
    "GriddedVelocity",
    "VortexLine",
    "Wavenumbers",
    "abc_field",
    "bkm_monitor",
    "chip_monitor",
    "collinearity_angle",
    "curl",
    "dhy_diagnostics",
    "dhy_record",
    "energy",
    "enstrophy",
    "euler_frame_run",
    "euler_step",
    "evolve",
    "frame_fields",
    "frame_fields_from_arrays",
    "from_flow",
    "lagrangian_frame_run",
    "load_snapshot",
    "make_initial",
    "pressure_hessian",
    "sample",
    "save_snapshot",
    "spectral_divergence",
    "strain",
    "taylor_green_2d",
    "taylor_green_3d",
    "trace_vortex_line",
]
