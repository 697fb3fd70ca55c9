"""trithumb: sub-200-byte thumbnail compression with Delaunay triangle meshes."""

from .bitstream import deserialize, serialize, size_bytes
from .codec import (
    CompressedMesh,
    EncoderConfig,
    decode,
    encode,
    init_mesh,
    init_palette,
    mse,
    propose_move,
)
from .features import FeatureStack, build_features, export_features, import_features
from .geometry import Triangulation, delaunay_triangulate, incircle, orient, vertex_star
from .metrics import QualityReport, gaussian_blur, psnr, ssim
from .raster import barycentric, read_image, render, render_region, vertex_to_pixel, write_image

__all__ = [
    "CompressedMesh", "EncoderConfig", "FeatureStack", "QualityReport",
    "Triangulation", "barycentric", "build_features", "decode",
    "delaunay_triangulate", "deserialize", "encode", "export_features",
    "gaussian_blur", "import_features", "incircle", "init_mesh",
    "init_palette", "mse", "orient", "propose_move", "psnr", "read_image",
    "render", "render_region", "serialize", "size_bytes", "ssim",
    "vertex_star", "vertex_to_pixel", "write_image",
]
