"""Constants for the structedge library."""

from typing import Final

# Model file framing
MODEL_MAGIC: Final[bytes] = b"SEDF"
MODEL_VERSION: Final[int] = 1

# Linear RGB -> CIE-XYZ (D65) rows, applied to r, g, b columns.
RGB_TO_XYZ: Final[tuple[tuple[float, float, float], ...]] = (
    (0.430574, 0.341550, 0.178325),
    (0.222015, 0.706655, 0.071330),
    (0.020183, 0.129553, 0.939180),
)

# D65 white point chromaticity
LUV_WHITE_U: Final[float] = 0.197833
LUV_WHITE_V: Final[float] = 0.468331

# Affine rescale of L*, u*, v* into [0, 1]:  c' = (c + offset) * LUV_SCALE
LUV_SCALE: Final[float] = 1.0 / 270.0
LUV_U_OFFSET: Final[float] = 88.0
LUV_V_OFFSET: Final[float] = 134.0

# Gradient normalization: M / (blur(M) + GRADIENT_NORM_EPS)
GRADIENT_NORM_EPS: Final[float] = 0.01

# NMS orientation estimate
NMS_ORIENT_BLUR_RADIUS: Final[int] = 2
NMS_ORIENT_EPS: Final[float] = 1e-5

# Gain below this is treated as zero when deciding whether to split
MIN_SPLIT_GAIN: Final[float] = 1e-12

# PCA power iteration
PCA_MAX_ITER: Final[int] = 100
PCA_TOL: Final[float] = 1e-9
PCA_VARIANCE_EPS: Final[float] = 1e-12

# K-means discretizer
KMEANS_MAX_ITER: Final[int] = 20

# Synthetic corpus
SYNTH_NOISE_SIGMA: Final[float] = 0.02
SYNTH_MIN_SEGMENTS: Final[int] = 2
SYNTH_MAX_SEGMENTS: Final[int] = 8
SYNTH_ILLUMINATION: Final[float] = 0.15
SYNTH_MIN_COLOR_GAP: Final[float] = 0.2

# Environment
THREADS_ENV_VAR: Final[str] = "STRUCTEDGE_THREADS"

# Dataset layout
IMAGES_DIR: Final[str] = "images"
GROUNDTRUTH_DIR: Final[str] = "groundtruth"

# Variant labels as reported by the detect command
VARIANT_LABELS: Final[dict[tuple[bool, bool], str]] = {
    (False, False): "SE",
    (False, True): "SE+SH",
    (True, False): "SE+MS",
    (True, True): "SE+MS+SH",
}

# Model inspection output
SEPARATOR_LENGTH: Final[int] = 72
DETAIL_SEPARATOR_LENGTH: Final[int] = 48
