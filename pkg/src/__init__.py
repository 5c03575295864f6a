# nwidth: Kolmogorov n-widths and kernel dimensions of point sets

from .algorithms.kernels import KernelSpec
from .algorithms.greedy_widths import greedy_widths
from .utils.config import VERSION

__version__ = VERSION
