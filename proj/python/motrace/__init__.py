"""Frame-pair motion analysis for video of moving structures."""

from ._core import (
    DEFAULT_FPS,
    Error,
    analyze_pair,
    apply_homography,
    default_params,
    detect_features,
    estimate_homography,
    filter_by_threshold,
    frame_file_name,
    frame_timestamp,
    generate_pair,
    make_demo_scene,
    read_frame,
    threshold_sweep,
    track_features,
    warp_image,
    write_frame,
)

__all__ = [
    "DEFAULT_FPS",
    "Error",
    "analyze_pair",
    "apply_homography",
    "default_params",
    "detect_features",
    "estimate_homography",
    "filter_by_threshold",
    "frame_file_name",
    "frame_timestamp",
    "generate_pair",
    "make_demo_scene",
    "read_frame",
    "threshold_sweep",
    "track_features",
    "warp_image",
    "write_frame",
]
