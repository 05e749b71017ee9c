"""Frame-to-tensor preprocessing: image codecs, integral images, Haar-cascade
face detection, face cropping, and scale/rotation augmentation."""

from .image import (
    ImageBuffer,
    decode_image,
    decode_ppm,
    decode_bmp,
    encode_ppm,
    encode_bmp,
    to_grayscale,
)
from .integral import IntegralImage
from .cascade import (
    BoundingBox,
    CascadeModel,
    CascadeStage,
    FeatureRect,
    WeakClassifier,
    detect_faces,
    evaluate_window,
    group_hits,
    parse_cascade_xml,
    stage_sums,
)
from .transform import (
    ANGLE_RANGE_DEG,
    NET_SIZE,
    SCALE_RANGE,
    augment,
    augment_batch,
    crop_resize,
    draw_augment_params,
    scale_rotate,
)

__all__ = [
    "ImageBuffer",
    "decode_image",
    "decode_ppm",
    "decode_bmp",
    "encode_ppm",
    "encode_bmp",
    "to_grayscale",
    "IntegralImage",
    "BoundingBox",
    "CascadeModel",
    "CascadeStage",
    "FeatureRect",
    "WeakClassifier",
    "detect_faces",
    "evaluate_window",
    "group_hits",
    "parse_cascade_xml",
    "stage_sums",
    "ANGLE_RANGE_DEG",
    "NET_SIZE",
    "SCALE_RANGE",
    "augment",
    "augment_batch",
    "crop_resize",
    "draw_augment_params",
    "scale_rotate",
]
