# src/algorithms/__init__.py

from .base import Kernel
from .kernels import KernelFamily, Activation, KernelSpec, build_kernel, eval_kernel, eval_gram, canonical_distance, distance_matrix
from .domains import PointSet, generate_cantor, generate_sierpinski_carpet, generate_menger, generate_weierstrass, generate_lorenz, sample_sphere, load_points, save_points
from .greedy_widths import GreedyRun, Cover, greedy_widths, residual_at, greedy_cover, net_radius, explicit_inverse_widths, uncertainty_bars
from .spectral import Spectrum, SandwichReport, gram_eigenvalues, ismagilov_lower_bounds, sandwich_report
from .dimension_fit import FitMethod, RansacParams, SlopeFit, fit_loglog, effective_dimension, metric_dimension, reference_dimensions
from .krr_experiment import KrrModel, RiskCurve, fit_krr, fit_constrained_krr, predict, excess_risk_experiment, predicted_risk_slope

__all__ = [
    'Kernel', 'KernelFamily', 'Activation', 'KernelSpec', 'build_kernel', 'eval_kernel', 'eval_gram',
    'canonical_distance', 'distance_matrix',
    'PointSet', 'generate_cantor', 'generate_sierpinski_carpet', 'generate_menger', 'generate_weierstrass',
    'generate_lorenz', 'sample_sphere', 'load_points', 'save_points',
    'GreedyRun', 'Cover', 'greedy_widths', 'residual_at', 'greedy_cover', 'net_radius',
    'explicit_inverse_widths', 'uncertainty_bars',
    'Spectrum', 'SandwichReport', 'gram_eigenvalues', 'ismagilov_lower_bounds', 'sandwich_report',
    'FitMethod', 'RansacParams', 'SlopeFit', 'fit_loglog', 'effective_dimension', 'metric_dimension',
    'reference_dimensions',
    'KrrModel', 'RiskCurve', 'fit_krr', 'fit_constrained_krr', 'predict', 'excess_risk_experiment',
    'predicted_risk_slope',
]
