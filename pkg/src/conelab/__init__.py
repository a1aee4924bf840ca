"""conelab: statistical dimension, conic intrinsic volumes, and
phase-transition experiments for random convex programs."""

__version__ = "0.1.0"

from .numerics import RngStream
from .cones import (
    Circular,
    Orthant,
    PolarOf,
    Product,
    PsdSym,
    SecondOrder,
    Subspace,
    ambient_dimension,
    dist_to_cone,
    project,
)
from .statdim import (
    StatDimEstimate,
    psi_l1,
    psi_s1,
    statdim_closed_form,
    statdim_monte_carlo,
)
from .kinematics import IntrinsicVolumes, kinematic_predict

__all__ = [
    "__version__",
    "RngStream",
    "Subspace",
    "Orthant",
    "SecondOrder",
    "Circular",
    "PsdSym",
    "Product",
    "PolarOf",
    "ambient_dimension",
    "project",
    "dist_to_cone",
    "StatDimEstimate",
    "statdim_closed_form",
    "statdim_monte_carlo",
    "psi_l1",
    "psi_s1",
    "IntrinsicVolumes",
    "kinematic_predict",
]
