"""relight: personalized low-light image enhancement.

Decomposes images into illumination and reflectance, extracts intelligible
brightness / chromaticity / noise correlations against user-chosen reference
images, and steers three small trained networks with them.  See the CLI
(`relight --help`) and the HTTP service (`relight serve`).
"""
from .correlation import CorrelationSet, extract
from .image import load_image, save_image
from .metrics import evaluate
from .pipeline import ControlParams, EnhanceRequest, EnhancerNets, enhance, load_enhancer
from .retinex import decompose, recompose

__version__ = "0.1.0"

__all__ = [
    "CorrelationSet", "extract", "load_image", "save_image", "evaluate",
    "ControlParams", "EnhanceRequest", "EnhancerNets", "enhance",
    "load_enhancer", "decompose", "recompose", "__version__",
]
