"""strainlab: speckle synthesis, digital image correlation, log-strain
fields, Ogden/J2 material models and a hexahedral FEM reference solver,
wired into one comparison pipeline."""

__version__ = "0.1.0"

from .errors import StrainlabError
from .grids import Grid2D
from .images import GrayImage, bicubic_sample, load_image, save_image
from .kinematics import log_strain, polar_decompose

__all__ = [
    "__version__",
    "StrainlabError",
    "Grid2D",
    "GrayImage",
    "bicubic_sample",
    "load_image",
    "save_image",
    "log_strain",
    "polar_decompose",
]
