"""Depth-stylized dense tube rendering with CPU worker parallelism.

The pipeline: polylines are depth-sorted globally across workers, ranks drive
visual-variable mappings (tube size, color, value, alpha), tubes are swept and
tessellated, each worker rasterizes its share off-screen, and tiles are depth-
composited into the final frame.  Rendering is deterministic: the same scene
and camera produce byte-identical images for any worker count.
"""

from .camera import Camera, frame_bounds, trackball_rotate
from .geometry import (Dataset, DatasetFormatError, Polyline,
                       generate_synthetic_bundle, load_dataset, save_dataset)
from .raster import FrameTile
from .runtime.engine import Engine, EngineConfig, EngineError, FrameStats
from .stylemap import MappingSpec, VertexStyle
from .tubegen import TubeMesh, tessellate_tube

__version__ = "0.1.0"

__all__ = [
    "Camera",
    "Dataset",
    "DatasetFormatError",
    "Engine",
    "EngineConfig",
    "EngineError",
    "FrameStats",
    "FrameTile",
    "MappingSpec",
    "Polyline",
    "TubeMesh",
    "VertexStyle",
    "frame_bounds",
    "generate_synthetic_bundle",
    "load_dataset",
    "save_dataset",
    "tessellate_tube",
    "trackball_rotate",
    "__version__",
]
