"""
Command line interface: 'nwidth <command> [options]'.

Commands: gen, widths, cover, spectrum, dim, krr, verify. Curves are written
as CSV and reports as JSON, each with a provenance header. Exit status is 0 on
success, 1 on a failed check or any nwidth error, 2 on a usage error.
"""

import argparse
import logging
import math
import sys

import numpy as np

from .algorithms.dimension_fit import (FitMethod, RansacParams, estimate_effective_dimension,
                                       estimate_metric_dimension, fit_loglog, parse_window,
                                       reference_dimensions)
from .algorithms.domains import (generate_cantor, generate_lorenz, generate_menger,
                                 generate_sierpinski_carpet, generate_weierstrass, load_points,
                                 sample_sphere, save_points)
from .algorithms.greedy_widths import greedy_cover, greedy_widths, net_radius, uncertainty_bars
from .algorithms.krr_experiment import (RISK_COLUMNS, excess_risk_experiment, implied_effective_dimension,
                                        predicted_risk_slope, risk_curve_slope)
from .algorithms.kernels import KernelSpec
from .algorithms.spectral import gram_eigenvalues, ismagilov_lower_bounds
from .algorithms.verification import PRESETS, run_invariant_suite
from .utils.config import VERSION, RunConfig, load_config, resolve_threads
from .utils.errors import DegenerateFitError, NWidthError, ValidationError
from .utils.io import read_table, write_json, write_plot_data, write_table

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
GENERATORS = ("cantor", "carpet", "menger", "weierstrass", "lorenz", "sphere")


def configure_logging(verbosity):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def _pick(value, default):
    return default if value is None else value


def _summary_stream(out):
    return sys.stderr if out in (None, "-") else sys.stdout


def _kernel(args, config):
    return KernelSpec.from_text(_pick(args.kernel, config["kernel"]["spec"]))


def _run_config(args, threads, **options):
    return RunConfig(command=args.command, options=options, seed=int(_pick(getattr(args, "seed", None), 0)),
                     threads=threads, out=args.out)


# ---------------------------------------------------------------- commands

def cmd_gen(args, config, threads):
    domains = config["domains"]
    seed = _pick(args.seed, config["runtime"]["seed"])
    options = {"generator": args.generator}

    if args.generator in ("cantor", "carpet", "menger"):
        if args.level is None:
            raise ValidationError(f"gen {args.generator} needs --level")
        make = {"cantor": generate_cantor, "carpet": generate_sierpinski_carpet, "menger": generate_menger}
        points = make[args.generator](args.level)
        options["level"] = args.level
    elif args.generator == "weierstrass":
        num = _pick(args.num_points, domains["weierstrass"]["num_points"])
        b = _pick(args.b, domains["weierstrass"]["b"])
        points = generate_weierstrass(num, a=args.a, b=b)
        options.update(num_points=num, a=args.a, b=b)
    elif args.generator == "lorenz":
        lorenz = domains["lorenz"]
        num = _pick(args.num_points, lorenz["num_points"])
        dt = _pick(args.dt, lorenz["dt"])
        burn_in = _pick(args.burn_in, lorenz["burn_in"])
        points = generate_lorenz(num, dt=dt, burn_in=burn_in)
        options.update(num_points=num, dt=dt, burn_in=burn_in)
    else:
        num = _pick(args.num_points, domains["sphere"]["num_points"])
        d = _pick(args.d, domains["sphere"]["d"])
        points = sample_sphere(num, d, seed)
        options.update(num_points=num, d=d)

    run_config = RunConfig(args.command, options, int(seed), threads, args.out)
    save_points(points, args.out, run_config)
    logger.info("generated %d points (%s)", len(points), points.label)
    return 0


def cmd_widths(args, config, threads):
    spec = _kernel(args, config)
    points = load_points(args.points)
    T = args.T if args.T is not None else min(config["widths"]["T"], len(points))
    pivot_tol = _pick(args.pivot_tol, config["widths"]["pivot_tol"])
    run = greedy_widths(spec, points, T, pivot_tol)

    comments = []
    eps = None
    if run.truncated_at is not None:
        comments.append(f"truncated_at={run.truncated_at}")
    if args.ambient:
        ambient = load_points(args.ambient)
        eps = net_radius(spec, ambient, np.arange(len(points)), reference=points)
        comments.append(f"net_radius={eps!r}")

    run_config = _run_config(args, threads, kernel=spec.to_text(), points=args.points, T=T,
                             pivot_tol=pivot_tol, ambient=args.ambient)
    t = np.arange(len(run))
    write_table(args.out, ("t", "w_t", "selected_index"),
                np.column_stack([t, run.widths, run.selected]), run_config, comments)

    if args.plot_data:
        keep = (t > 0) & (run.widths > 0)
        write_plot_data(args.plot_data, np.log(t[keep]), -np.log(run.widths[keep]), ("log_t", "-log_w"))
    if args.plot:
        from .utils.visualization import plot_width_curve
        try:
            fit = estimate_effective_dimension(run).fit
        except (DegenerateFitError, ValidationError):
            fit = None
        bars = uncertainty_bars(run.widths, eps) if eps is not None else None
        plot_width_curve(run.widths, fit=fit, bars=bars, title=f"{spec} on {points.label}",
                         show=False, save_path=args.plot)
    return 0


def cmd_cover(args, config, threads):
    spec = _kernel(args, config)
    points = load_points(args.points)
    cover = greedy_cover(spec, points, args.eps, args.max_centers)
    ns, radii = cover.curve()

    run_config = _run_config(args, threads, kernel=spec.to_text(), points=args.points, eps=args.eps,
                             max_centers=args.max_centers)
    write_table(args.out, ("n", "eps_n", "center_index"), np.column_stack([ns, radii, cover.centers]),
                run_config, [f"radius={cover.radius!r}"])
    print(f"{len(cover.centers)} centers, radius {cover.radius:.6g}", file=_summary_stream(args.out))
    return 0


def cmd_spectrum(args, config, threads):
    spec = _kernel(args, config)
    points = load_points(args.points)
    seed = _pick(args.seed, config["runtime"]["seed"])
    if args.sample:
        points = points.sample(args.sample, seed)
    spectrum = gram_eigenvalues(spec, points)
    M = len(spectrum)
    n_max = M - 1 if args.nmax is None else args.nmax
    lower = ismagilov_lower_bounds(spectrum, n_max)

    run_config = _run_config(args, threads, kernel=spec.to_text(), points=args.points, nmax=n_max,
                             sample=args.sample)
    i = np.arange(1, n_max + 1)
    comments = [f"trace={spectrum.trace!r}", f"negatives_clipped={spectrum.negatives_clipped}"]
    write_table(args.out, ("i", "lambda_i", "wL_i"),
                np.column_stack([i, spectrum.eigenvalues[i - 1], lower[1:]]), run_config, comments)

    if args.plot_data:
        keep = lower[1:] > 0
        write_plot_data(args.plot_data, np.log(i[keep]), -np.log(lower[1:][keep]), ("log_n", "-log_wL"))
    if args.plot:
        from .utils.visualization import plot_bounds_comparison
        if args.widths:
            columns, data = read_table(args.widths)
            upper = data[:, _column(columns, "w_t", args.widths)]
        else:
            upper = greedy_widths(spec, points, min(n_max + 1, M)).widths
        plot_bounds_comparison(upper, lower, title=f"{spec} on {points.label}", show=False, save_path=args.plot)
    return 0


def _column(columns, name, path):
    try:
        return columns.index(name)
    except ValueError:
        raise ValidationError(f"{path}: no {name!r} column (found {', '.join(columns)})") from None


def cmd_dim(args, config, threads):
    fit_config = config["fit"]
    method = FitMethod(_pick(args.method, fit_config["method"]))
    params = RansacParams(_pick(args.iterations, fit_config["iterations"]),
                          _pick(args.threshold, fit_config["residual_threshold"]))
    seed = _pick(args.seed, fit_config["seed"])
    window = parse_window(args.window) if args.window else None

    if args.cover:
        columns, data = read_table(args.cover)
        curve = (data[:, _column(columns, "n", args.cover)], data[:, _column(columns, "eps_n", args.cover)])
        estimate = estimate_metric_dimension(curve, window, method, params, seed)
        report = {"quantity": "d_rho", **estimate.as_dict()}
    else:
        columns, data = read_table(args.widths)
        if "mean_excess" in columns:
            ns = data[:, _column(columns, "n", args.widths)]
            means = data[:, _column(columns, "mean_excess", args.widths)]
            fit = fit_loglog(ns, means, window, method, params, seed)
            report = {"quantity": "risk_slope", **fit.as_dict(),
                      "dimension": implied_effective_dimension(fit.slope)}
        else:
            widths = data[:, _column(columns, "w_t", args.widths)]
            estimate = estimate_effective_dimension(widths, window, method, params, seed)
            report = {"quantity": "d_K", **estimate.as_dict()}

    run_config = _run_config(args, threads, widths=args.widths, cover=args.cover, window=args.window,
                             method=method.value, iterations=params.iterations,
                             threshold=params.residual_threshold, seed=seed)
    write_json(args.out, _finite(report), run_config)
    return 0


def _finite(report):
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in report.items()}


def cmd_krr(args, config, threads):
    krr = config["krr"]
    spec = _kernel(args, config)
    d = _pick(args.d, krr["d"])
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else krr["sizes"]
    options = dict(
        trials=_pick(args.trials, krr["trials"]),
        n_test=_pick(args.ntest, krr["n_test"]),
        noise_amp=_pick(args.noise, krr["noise_amp"]),
        seed=_pick(args.seed, config["runtime"]["seed"]),
        iters=_pick(args.iters, krr["bisection_iters"]),
        norm_tol=_pick(args.norm_tol, krr["norm_tol"]),
        lambda_min=_pick(args.lambda_min, krr["lambda_min"]),
        lambda_max=_pick(args.lambda_max, krr["lambda_max"]),
    )
    curve = excess_risk_experiment(spec, d, sizes, threads=threads, **options)

    run_config = RunConfig(args.command, dict(kernel=spec.to_text(), d=d, sizes=sizes, **options),
                           int(options["seed"]), threads, args.out)
    comments = []
    try:
        fit = risk_curve_slope(curve)
        comments.append(f"fitted_slope={fit.slope!r}")
    except DegenerateFitError:
        fit = None
    reference = reference_dimensions(spec, d)
    predicted = predicted_risk_slope(reference[1]) if reference else None
    if predicted is not None:
        comments.append(f"predicted_slope={predicted!r}")
    write_table(args.out, RISK_COLUMNS, curve.as_array(), run_config, comments)

    stream = _summary_stream(args.out)
    if fit is not None:
        print(f"fitted slope {fit.slope:.4f}", file=stream)
    if predicted is not None:
        print(f"predicted slope {predicted:.4f}", file=stream)
    if args.plot_data:
        keep = curve.means > 0
        write_plot_data(args.plot_data, np.log(curve.ns[keep]), np.log(curve.means[keep]), ("log_n", "log_risk"))
    if args.plot:
        from .utils.visualization import plot_risk_curve
        plot_risk_curve(curve, fit, predicted, title=f"{spec}, d={d}", show=False, save_path=args.plot)
    return 0


def cmd_verify(args, config, threads):
    seed = _pick(args.seed, config["runtime"]["seed"])
    results = run_invariant_suite(args.preset, seed=seed)
    passed = all(r.passed for r in results)
    for result in results:
        print(result)
    print(f"{args.preset}: {'PASS' if passed else 'FAIL'}")
    if args.out:
        run_config = RunConfig(args.command, {"preset": args.preset}, int(seed), threads, args.out)
        write_json(args.out, {"preset": args.preset, "passed": passed,
                              "checks": [r.as_dict() for r in results]}, run_config)
    return 0 if passed else 1


# ---------------------------------------------------------------- parser

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file merged over the defaults")
    common.add_argument("--threads", type=int,
                        help="KRR trial workers, 0 = one per CPU (env NWIDTH_THREADS); "
                             "BLAS threads follow OMP_NUM_THREADS")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logs")

    parser = argparse.ArgumentParser(prog="nwidth",
                                     description="Kolmogorov n-widths and kernel dimensions of point sets")
    parser.add_argument("--version", action="version", version=f"nwidth {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("gen", parents=[common], help="generate a point set")
    p.add_argument("generator", choices=GENERATORS)
    p.add_argument("--level", type=int)
    p.add_argument("--num-points", type=int)
    p.add_argument("--a", type=float, help="Weierstrass amplitude ratio")
    p.add_argument("--b", type=int, help="Weierstrass frequency ratio")
    p.add_argument("--dt", type=float)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--d", type=int, help="sphere ambient dimension")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="-")
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("widths", parents=[common], help="greedy n-width upper bounds")
    p.add_argument("--kernel")
    p.add_argument("--points", required=True)
    p.add_argument("-T", type=int, dest="T")
    p.add_argument("--pivot-tol", type=float)
    p.add_argument("--ambient", help="superset the points are a net of; adds the net radius")
    p.add_argument("--plot")
    p.add_argument("--plot-data")
    p.add_argument("--out", default="-")
    p.set_defaults(handler=cmd_widths)

    p = sub.add_parser("cover", parents=[common], help="farthest-point cover in the kernel metric")
    p.add_argument("--kernel")
    p.add_argument("--points", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--max-centers", type=int)
    p.add_argument("--out", default="-")
    p.set_defaults(handler=cmd_cover)

    p = sub.add_parser("spectrum", parents=[common], help="Gram eigenvalues and tail lower bounds")
    p.add_argument("--kernel")
    p.add_argument("--points", required=True)
    p.add_argument("--nmax", type=int)
    p.add_argument("--sample", type=int, help="use this many points drawn without replacement")
    p.add_argument("--seed", type=int)
    p.add_argument("--widths", help="width CSV to plot against the lower bounds")
    p.add_argument("--plot")
    p.add_argument("--plot-data")
    p.add_argument("--out", default="-")
    p.set_defaults(handler=cmd_spectrum)

    p = sub.add_parser("dim", parents=[common], help="dimension from a width, cover or risk curve")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--widths")
    source.add_argument("--cover")
    p.add_argument("--window", help="inclusive range A:B")
    p.add_argument("--method", choices=[m.value for m in FitMethod])
    p.add_argument("--iterations", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="-")
    p.set_defaults(handler=cmd_dim)

    p = sub.add_parser("krr", parents=[common], help="excess risk of constrained kernel ridge regression")
    p.add_argument("--kernel")
    p.add_argument("--d", type=int)
    p.add_argument("--sizes", help="comma-separated training sizes")
    p.add_argument("--trials", type=int)
    p.add_argument("--ntest", type=int)
    p.add_argument("--noise", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--iters", type=int)
    p.add_argument("--norm-tol", type=float)
    p.add_argument("--lambda-min", type=float)
    p.add_argument("--lambda-max", type=float)
    p.add_argument("--plot")
    p.add_argument("--plot-data")
    p.add_argument("--out", default="-")
    p.set_defaults(handler=cmd_krr)

    p = sub.add_parser("verify", parents=[common], help="run the invariant suite on a preset")
    p.add_argument("--preset", required=True, choices=sorted(PRESETS))
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_verify)

    return parser


def run(argv=None):
    """
    Execute one command.

    Returns:
        Exit status: 0 success, 1 failed check or nwidth error, 2 usage error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    configure_logging(args.verbose)
    try:
        config = load_config(args.config)
        threads = resolve_threads(args.threads, config)
        return args.handler(args, config, threads)
    except NWidthError as e:
        print(f"nwidth: error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"nwidth: error: {e}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
