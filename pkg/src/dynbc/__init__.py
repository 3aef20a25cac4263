"""Bulk-surface splitting schemes for wave equations with kinetic and
acoustic dynamic boundary conditions on the unit disc."""

from .assembly import ACOUSTIC, KINETIC, BilinearParams, BlockSystem, build_block_system
from .harness import StudyConfig, StudyResult, run_study
from .mesh import Mesh, generate_disc_mesh, mesh_width

__version__ = "0.1.0"

__all__ = [
    "ACOUSTIC",
    "KINETIC",
    "BilinearParams",
    "BlockSystem",
    "Mesh",
    "StudyConfig",
    "StudyResult",
    "build_block_system",
    "generate_disc_mesh",
    "mesh_width",
    "run_study",
    "__version__",
]
