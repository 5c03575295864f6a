import matplotlib.pyplot as plt
import numpy as np


def _finish(save_path, show):
    plt.grid(True, alpha=0.3, which='both')
    plt.tight_layout()

    if save_path:
        plt.savefig(save_path)

    if show:
        plt.show()
    else:
        plt.close()


def plot_width_curve(widths, fit=None, bars=None, lower_bounds=None, title=None, show=True, save_path=None):
    """
    Plot -log w_t against log t.

    Args:
        widths: Widths w_0, w_1, ...
        fit: Optional SlopeFit, drawn over its window
        bars: Optional (lower, upper) arrays from uncertainty_bars
        lower_bounds: Optional eigenvalue-tail lower bounds wL_0, wL_1, ...
        title: Optional title for the plot
        show: Whether to show the plot
        save_path: Optional path to save the plot
    """
    widths = np.asarray(widths, dtype=np.float64)
    t = np.arange(1, len(widths))
    w = widths[1:]
    keep = w > 0

    plt.figure(figsize=(8, 6))
    plt.plot(np.log(t[keep]), -np.log(w[keep]), 'b.', markersize=3, label='greedy upper bound')

    if bars is not None:
        lower, upper = (np.asarray(b)[1:] for b in bars)
        plt.fill_between(np.log(t[keep]), lower[keep], upper[keep], color='b', alpha=0.15,
                         label='net uncertainty')

    if lower_bounds is not None:
        wl = np.asarray(lower_bounds, dtype=np.float64)[1:len(widths)]
        tl = np.arange(1, len(wl) + 1)
        ok = wl > 0
        plt.plot(np.log(tl[ok]), -np.log(wl[ok]), 'g.', markersize=3, label='eigenvalue lower bound')

    if fit is not None:
        lo, hi = fit.window
        xs = np.log(np.array([max(lo, 1), hi], dtype=np.float64))
        plt.plot(xs, fit.slope * xs + fit.intercept, 'r-',
                 label=f'{fit.method.value} slope {fit.slope:.4f}')

    plt.title(title if title else 'Width decay')
    plt.xlabel('log t')
    plt.ylabel('-log w_t')
    plt.legend()
    _finish(save_path, show)


def plot_bounds_comparison(upper, lower, title=None, show=True, save_path=None):
    """
    Plot greedy upper bounds and eigenvalue-tail lower bounds on log-log axes.

    Args:
        upper: Greedy widths
        lower: Lower bounds wL_n
        title: Optional title for the plot
        show: Whether to show the plot
        save_path: Optional path to save the plot
    """
    plt.figure(figsize=(8, 6))
    for values, style, label in ((upper, 'b-', 'upper (greedy)'), (lower, 'g-', 'lower (eigenvalue tail)')):
        values = np.asarray(values, dtype=np.float64)
        n = np.arange(1, len(values))
        keep = values[1:] > 0
        plt.loglog(n[keep], values[1:][keep], style, label=label)

    plt.title(title if title else 'Upper vs lower bounds')
    plt.xlabel('n')
    plt.ylabel('w_n')
    plt.legend()
    _finish(save_path, show)


def plot_risk_curve(curve, fit=None, predicted_slope=None, title=None, show=True, save_path=None):
    """
    Scatter log mean excess risk against log n.

    Args:
        curve: RiskCurve
        fit: Optional SlopeFit of the curve
        predicted_slope: Optional exponent drawn through the first point
        title: Optional title for the plot
        show: Whether to show the plot
        save_path: Optional path to save the plot
    """
    ns, means = curve.ns, curve.means
    keep = means > 0
    x, y = np.log(ns[keep]), np.log(means[keep])

    plt.figure(figsize=(8, 6))
    plt.plot(x, y, 'ko', label='mean excess risk')

    if fit is not None:
        plt.plot(x, fit.slope * x + fit.intercept, 'r-', label=f'fitted slope {fit.slope:.3f}')
    if predicted_slope is not None and len(x):
        plt.plot(x, y[0] + predicted_slope * (x - x[0]), 'g--', label=f'predicted slope {predicted_slope:.3f}')

    plt.title(title if title else 'Excess risk decay')
    plt.xlabel('log n')
    plt.ylabel('log excess risk')
    plt.legend()
    _finish(save_path, show)
