"""Adaptive edge/green frame preprocessing for CNN lane detectors.

Each frame is bilateral-filtered, Canny edge-detected and re-packed so the
edge map replaces the red and blue planes. The Canny high threshold is
tuned frame to frame by a small fuzzy controller that watches how many
Hough lines show up inside a triangular road ROI.
"""

from .config import dump_config, load_config
from .edges import canny
from .evaluation import LaneRecord, evaluate_clip, read_lane_file, write_lane_file
from .filtering import BilateralParams, bilateral_filter
from .fuzzy import FuzzySystem, TunerState, fis_delta, tune
from .geometry import HoughParams, TriangleROI, hough_count, roi_mask
from .imaging import to_grayscale
from .pipeline import ChannelSpec, FrameTrace, PipelineConfig, process_clip, process_frame
from .synth import SceneSpec, generate_clip

__all__ = [
    "BilateralParams", "ChannelSpec", "FrameTrace", "FuzzySystem", "HoughParams", "LaneRecord",
    "PipelineConfig", "SceneSpec", "TriangleROI", "TunerState", "bilateral_filter", "canny",
    "dump_config", "evaluate_clip", "fis_delta", "generate_clip", "hough_count", "load_config",
    "process_clip", "process_frame", "read_lane_file", "roi_mask", "to_grayscale", "tune",
    "write_lane_file",
]
__version__ = "0.1.0"
