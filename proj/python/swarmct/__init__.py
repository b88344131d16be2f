"""Sparse-view CT reconstruction with sinogram-domain diffusion priors.

The heavy lifting lives in the compiled `_core` extension; this package
re-exports its surface.
"""

from ._core import (  # noqa: F401
    ArgumentError,
    ConfigError,
    IoError,
    NumericError,
    ScoreModel,
    __version__,
    add_noise,
    apply_mask,
    disk_phantom,
    dwt2,
    evaluate_metrics,
    extract_hf,
    fbp,
    forward_project,
    generate_mask,
    idwt2,
    load_score_model,
    random_ellipses,
    reconstruct,
    shepp_logan,
    subsample_zeroed,
    train_shd,
    train_srm,
    uniform_kept_indices,
)

__all__ = [
    "ArgumentError",
    "ConfigError",
    "IoError",
    "NumericError",
    "ScoreModel",
    "__version__",
    "add_noise",
    "apply_mask",
    "disk_phantom",
    "dwt2",
    "evaluate_metrics",
    "extract_hf",
    "fbp",
    "forward_project",
    "generate_mask",
    "idwt2",
    "load_score_model",
    "random_ellipses",
    "reconstruct",
    "shepp_logan",
    "subsample_zeroed",
    "train_shd",
    "train_srm",
    "uniform_kept_indices",
]
