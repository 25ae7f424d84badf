"""Python bindings for the csekit C++ core."""

from ._csekit import (
    CsekitError,
    ToyEncoder,
    alignment,
    combined_loss,
    hierarchical_triplet,
    info_nce,
    mer,
    mock_generate,
    rfd,
    rfd_from_csv,
    spearman,
    uniformity,
)

__all__ = [
    "CsekitError",
    "ToyEncoder",
    "alignment",
    "combined_loss",
    "hierarchical_triplet",
    "info_nce",
    "mer",
    "mock_generate",
    "rfd",
    "rfd_from_csv",
    "spearman",
    "uniformity",
]
