"""Eigensystems, their continuation along paths and the parallel transport gauge"""

from openff.adiabatic.spectral._spectral import (
    Projector,
    SpectralFrame,
    complex_frame,
    continue_along,
    continue_frame,
    eigen_frame,
    frame_at,
    gauge_transport,
    grid_projectors,
    projector_derivative,
    projector_derivative_estimate,
    spectral_projector,
)

__all__ = [
    "Projector",
    "SpectralFrame",
    "complex_frame",
    "continue_along",
    "continue_frame",
    "eigen_frame",
    "frame_at",
    "gauge_transport",
    "grid_projectors",
    "projector_derivative",
    "projector_derivative_estimate",
    "spectral_projector",
]
