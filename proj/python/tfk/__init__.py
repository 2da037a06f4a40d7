"""Tensor field networks: rotation-equivariant point-cloud models."""

from ._tfk import (
    Model,
    TfkError,
    clebsch_gordan,
    kabsch_align,
    k_nearest,
    lj_forces,
    random_rotation,
    read_structure,
    refinement_field,
    real_spherical_harmonics,
    run_command,
    verify,
    wigner_matrix,
    write_structure,
)

__all__ = [
    "Model",
    "TfkError",
    "clebsch_gordan",
    "kabsch_align",
    "k_nearest",
    "lj_forces",
    "random_rotation",
    "read_structure",
    "refinement_field",
    "real_spherical_harmonics",
    "run_command",
    "verify",
    "wigner_matrix",
    "write_structure",
]
