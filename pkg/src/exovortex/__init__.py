"""Boundary integral methods for two-dimensional vortex flow past a smooth obstacle.

Two reconstructions of the boundary correction are provided: a vortex sheet
(``vortex``) and a single-layer charge density (``charge``, optionally with a
rank-one ``lambda`` correction).  Submodules are imported lazily so that the
command line can set thread counts before numpy loads.
"""

__version__ = "0.1.0"

_EXPORTS = {
    "CurveSpec": "geometry", "BoundaryCurve": "geometry", "build_curve": "geometry",
    "BoundaryMesh": "mesh", "uniform_mesh": "mesh", "perturbed_mesh": "mesh", "validate_mesh": "mesh",
    "KernelMatrices": "kernels", "assemble": "kernels",
    "Blob": "fields", "VorticityField": "fields", "HStarSpec": "fields", "BoundaryDensity": "fields",
    "build_system": "vortex_solver", "solve": "vortex_solver",
    "LambdaSpec": "charge_solver", "build_charge_system": "charge_solver", "solve_charge": "charge_solver",
    "DiskExactSolution": "oracle", "exact_disk_velocity": "oracle",
    "make_state": "dynamics", "run": "dynamics",
}

__all__ = sorted(_EXPORTS) + ["__version__"]


def __getattr__(name):
    if name in _EXPORTS:
        import importlib

        return getattr(importlib.import_module(f".{_EXPORTS[name]}", __name__), name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
