"""CP-OFDM and OQAM-OFDM WiFi physical-layer simulator."""
from .params import ConfigError, FrameGeometry, Scheme, SystemConfig, frame_geometry, n_symbols

__all__ = ["ConfigError", "FrameGeometry", "Scheme", "SystemConfig", "frame_geometry", "n_symbols"]
__version__ = "0.1.0"
