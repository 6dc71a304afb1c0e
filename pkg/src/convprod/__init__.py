"""Convolution products of measures on Z: variation norms, dyadic blocks and
empirical checks of square-function inequalities on cyclic shifts."""

__version__ = "0.1.0"

from .errors import ConvProdError, PreconditionFailed
from .measures import (
    LatticeMeasure,
    MeasureFamily,
    convolve,
    family_from_spec,
    holding_family,
    lazy_walk,
    lazy_walk_family,
    new_measure,
    reflect,
    symmetrize,
)
from .seqnorms import BlockSpec, NormResult, oscillation_norm, variation_norm
from .spectral import TorusGrid, char_fun, gaussian_decay

__all__ = [
    "BlockSpec", "ConvProdError", "LatticeMeasure", "MeasureFamily", "NormResult",
    "PreconditionFailed", "TorusGrid", "char_fun", "convolve", "family_from_spec",
    "gaussian_decay", "holding_family", "lazy_walk", "lazy_walk_family", "new_measure",
    "oscillation_norm", "reflect", "symmetrize", "variation_norm",
]
