"""Zig-zag matrix algebra and closed-form metrics for solvable quasi-Hermitian models."""

from .core import (
    Orientation,
    ZzmMatrix,
    build,
    identity,
    sandwich_diag,
    sandwich_diag_squared,
    to_dense,
    transpose,
    zzm_inverse,
    zzm_multiply,
    zzm_power,
)
from .metric import (
    DysonFactor,
    MetricDecomposition,
    MetricParams,
    ketket_matrix,
    metric_banded,
    metric_closed_form,
    metric_family_sweep,
    metric_from_sum,
    positive_definiteness,
    quasi_hermiticity_residual,
    reconstruct_hermitian,
)
from .models import ModelInstance, generate, load, save
from .spectral import (
    EigenSystem,
    Normalization,
    adjacent_gap,
    eigen_residual,
    eigenvalues,
    eigenvectors_lemma_xy,
    eigenvectors_unit_diagonal,
    normalization_map,
)

__version__ = "0.1.0"
