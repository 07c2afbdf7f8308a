"""Adaptive coordinate-based regression (ACR) loss for face alignment."""

from ._core import (  # noqa: F401
    AcrError,
    ShapeModel,
    acr_grad_elem,
    acr_loss_batch,
    acr_loss_elem,
    clamp_params,
    delta,
    evaluate,
    fit_shape_model,
    fraction_for_epoch,
    hardness_weights,
    l2_loss_batch,
    mean_point_error,
    normalization_factor,
    parse_pts,
    project,
    smooth_face,
    template_face_68,
)

__version__ = "0.1.0"
