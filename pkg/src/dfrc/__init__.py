"""Joint radar-communication transmit beamforming for a shared antenna array."""

from .array import ArrayGeometry, BeamSpec, DomainError, angle_grid, beam_pattern, steering_vector
from .design import (Channel, DesignConfig, DesignOutcome, DesignStatus, Precoder, radar_only,
                     sdr_beamform, zf_beamform)
from .objective import build_radar_loss, eval_loss

__all__ = [
    "ArrayGeometry", "BeamSpec", "Channel", "DesignConfig", "DesignOutcome", "DesignStatus",
    "DomainError", "Precoder", "angle_grid", "beam_pattern", "build_radar_loss", "eval_loss",
    "radar_only", "sdr_beamform", "steering_vector", "zf_beamform",
]
