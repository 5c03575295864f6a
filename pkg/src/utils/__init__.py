# Utility functions
from .errors import NWidthError, ValidationError, DimensionMismatchError, PointsFormatError, NumericalError, DegenerateFitError
from .metrics import as_points, euclidean_distances, inner_products
from .config import load_config, save_config, ensure_results_dir, get_default_config, RunConfig
