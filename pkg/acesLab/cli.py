"""The aces-lab command line: circuit generation, design optimisation and
transfer, simulation with estimation, merit prediction, scaling studies
and toy model curves. Every command writes its outputs to a directory
and finishes by writing a RunManifest listing them.

Exit codes: 0 on success, 2 for usage errors, 3 for numerical failures
and 4 for I/O errors or malformed input files."""
import argparse
import contextlib
import csv
import hashlib
import json
import logging
import os
import sys
import tempfile
import time

import numpy as np
from scipy import linalg as scipy_linalg
from sklearn.linear_model import LinearRegression
from sklearn.preprocessing import PolynomialFeatures

from . import __version__
from .aces_pipeline import ACESPipeline
from .circuits.circuit_classes import Circuit
from .circuits.circuit_generators import build_circuit
from .noise_toolkit.noise_model import NoiseModel
from .noise_toolkit.noise_generators import build_noise_model
from .design_toolkit.experimental_design import (ExperimentalDesign,
        transfer_design, load_reference_design)
from .scoring_toolkit.merit_calcs import merit, lognormal_ensemble_merit
from .scoring_toolkit.toy_model import toy_optimal
from .optimization_toolkit.tuple_set_optimizer import save_history
from .fitting_toolkit.eigenvalue_estimation import estimate_circuit_eigenvalues
from .fitting_toolkit.noise_recovery import circuit_eigenvalue_residuals, save_residuals
from .exceptions import RankDeficiencyError, SizeGuardError, InputFileError
from .constants import constants


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

THREADS_ENV_VAR = "ACES_LAB_THREADS"

#Number of points at which the predicted NRMSE distribution is written.
DISTRIBUTION_GRID_POINTS = 200



class RunManifest():
    """Records what a command did: its configuration, inputs, seed,
    outputs and the wall-clock time of each stage.

    Attributes:
        command (str): The command name.
        config (dict): The parsed arguments.
        config_hash (str): The SHA-256 hash of the configuration.
        inputs (list): Input file paths.
        seed (int): The seed used, if any.
        outputs (list): Output file paths, each checked to exist when
            the manifest is written.
        timings (dict): Seconds spent in each stage.
        results (dict): Headline numbers, e.g. the figure of merit.
    """

    def __init__(self, command:str, config:dict, seed:int = None):
        self.command = command
        self.config = {k:v for k, v in config.items() if k != "handler"}
        encoded = json.dumps(self.config, sort_keys=True, default=str)
        self.config_hash = hashlib.sha256(encoded.encode("utf-8")).hexdigest()
        self.seed = seed
        self.inputs = []
        self.outputs = []
        self.timings = {}
        self.results = {}

    @contextlib.contextmanager
    def stage(self, name:str):
        """Times a stage of the command."""
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + \
                    time.perf_counter() - start

    def add_input(self, filepath:str):
        if filepath is not None:
            self.inputs.append(os.path.abspath(filepath))

    def add_output(self, filepath:str):
        self.outputs.append(os.path.abspath(filepath))

    def to_dict(self) -> dict:
        return {"format":"run_manifest", "version":constants.FORMAT_VERSION,
                "acesLab_version":__version__, "command":self.command,
                "config":self.config, "config_hash":self.config_hash,
                "inputs":self.inputs, "seed":self.seed, "outputs":self.outputs,
                "timings":self.timings, "results":self.results}

    def write(self, out_dir:str) -> str:
        """Writes manifest.json atomically, after checking every listed
        output exists.

        Raises:
            OSError: If an output is missing or the write fails.
        """
        missing = [f for f in self.outputs if not os.path.exists(f)]
        if len(missing) > 0:
            raise OSError(f"Expected outputs were not written: {missing}")
        filepath = os.path.join(out_dir, "manifest.json")
        fdesc, tmp_path = tempfile.mkstemp(dir=out_dir, prefix=".manifest", suffix=".tmp")
        try:
            with os.fdopen(fdesc, "w", encoding="utf-8") as fhandle:
                json.dump(self.to_dict(), fhandle, indent=1, default=str)
            os.replace(tmp_path, filepath)
        except BaseException:
            if os.path.exists(tmp_path):
                os.remove(tmp_path)
            raise
        return filepath



def resolve_threads(threads:int = None) -> int:
    """The number of worker threads: the flag if given, then the
    ACES_LAB_THREADS environment variable, then the number of cores.

    Raises:
        ValueError: If the number is not a positive integer.
    """
    if threads is None:
        env_value = os.environ.get(THREADS_ENV_VAR)
        if env_value is None or env_value.strip() == "":
            return os.cpu_count() or 1
        try:
            threads = int(env_value)
        except ValueError as err:
            raise ValueError(f"{THREADS_ENV_VAR} must be an integer.") from err
    if threads < 1:
        raise ValueError("The number of threads must be at least 1.")
    return threads


def _float_list(text:str) -> list:
    return [float(v) for v in text.split(",") if v.strip() != ""]


def _int_list(text:str) -> list:
    return [int(v) for v in text.split(",") if v.strip() != ""]


def _out_path(args, filename:str) -> str:
    return os.path.join(args.out, filename)


def _noise_params(args) -> dict:
    return {"r1":args.r1, "r2":args.r2, "rm":args.rm, "sigma_tot_sq":args.sigma_tot_sq}


def _read_input(manifest:RunManifest, filepath:str, loader):
    """Records an input file and loads it with loader(filepath). A file
    that is not valid JSON, or lacks a required field, raises an
    InputFileError."""
    manifest.add_input(filepath)
    try:
        return loader(filepath)
    except (json.JSONDecodeError, KeyError) as err:
        raise InputFileError(f"Malformed input file {filepath}: {err!r}") from err


def _load_noise(args, circuit, manifest:RunManifest) -> NoiseModel:
    """The noise model from a JSON file if given, else generated."""
    if args.noise_model is not None:
        return _read_input(manifest, args.noise_model,
                lambda path: NoiseModel.load(circuit, path))
    return build_noise_model(circuit, args.noise, _noise_params(args), args.noise_seed)


def _load_circuit(args, manifest:RunManifest) -> Circuit:
    if getattr(args, "circuit", None) is not None:
        return _read_input(manifest, args.circuit, Circuit.load)
    return build_circuit(args.kind, args.distance)


def _load_design(args, manifest:RunManifest) -> ExperimentalDesign:
    """The design from a JSON file, or the bundled reference design at
    args.distance; a design file is transferred to args.distance if
    that is given and differs."""
    if args.design is None:
        if args.distance is None:
            raise ValueError("--distance is required with the reference design.")
        return load_reference_design(args.distance)
    design = _read_input(manifest, args.design, ExperimentalDesign.load)
    if args.distance is not None and \
            args.distance != design.circuit.metadata.get("distance"):
        target = build_circuit(design.circuit.metadata.get("family"), args.distance)
        design = transfer_design(design, target)
    return design


def _save_json(data:dict, filepath:str):
    with open(filepath, "w", encoding="utf-8") as fhandle:
        json.dump(data, fhandle, indent=1)


def _write_rows(filepath:str, header:list, rows:list):
    with open(filepath, "w", newline="", encoding="utf-8") as fhandle:
        writer = csv.writer(fhandle)
        writer.writerow(header)
        writer.writerows(rows)


def quadratic_fit(xvalues, yvalues) -> tuple:
    """Fits y = c0 + c1 x + c2 x^2 by least squares.

    Returns:
        coefs (np.ndarray): c0, c1, c2.
        relative_residuals (np.ndarray): |fit - y| / |y| at each point.
    """
    xvalues = np.asarray(xvalues, dtype=np.float64).reshape(-1, 1)
    yvalues = np.asarray(yvalues, dtype=np.float64)
    if xvalues.shape[0] < 3:
        raise ValueError("At least three points are needed for a quadratic fit.")
    features = PolynomialFeatures(degree=2, include_bias=False).fit_transform(xvalues)
    model = LinearRegression().fit(features, yvalues)
    coefs = np.array([model.intercept_, model.coef_[0], model.coef_[1]])
    fitted = model.predict(features)
    return coefs, np.abs(fitted - yvalues) / np.abs(yvalues)


def log_log_slope(xvalues, yvalues) -> float:
    """The slope of log10 y against log10 x."""
    model = LinearRegression().fit(np.log10(np.asarray(xvalues)).reshape(-1, 1),
            np.log10(np.asarray(yvalues)))
    return float(model.coef_[0])


def cmd_circuit(args, manifest:RunManifest):
    with manifest.stage("build"):
        circuit = build_circuit(args.kind, args.distance)
    filepath = _out_path(args, "circuit.json")
    circuit.save(filepath)
    manifest.add_output(filepath)
    manifest.results = circuit.summary()
    logger.info("Circuit: n = %d, %d layers, %d unique layers, N = %d",
            circuit.n, circuit.num_layers, circuit.num_unique,
            circuit.gate_eigenvalue_count())


def cmd_optimise(args, manifest:RunManifest):
    circuit = _load_circuit(args, manifest)
    noise = _load_noise(args, circuit, manifest)
    optimiser_params = {"seed":args.seed}
    if args.max_steps is not None:
        optimiser_params["max_steps"] = args.max_steps
    if args.n_ex is not None:
        optimiser_params["n_ex"] = args.n_ex
    if args.l_set is not None:
        optimiser_params["l_set"] = args.l_set
    pipeline = ACESPipeline(estimator_kind=args.estimator,
            optimiser_params=optimiser_params, verbose=args.verbose,
            circuit=circuit, noise=noise)
    with manifest.stage("basic_merit"):
        basic_merit = pipeline.predict().merit
    logger.info("Basic design figure of merit: %.6g", basic_merit)
    with manifest.stage("optimise"):
        if args.weights_only:
            final_merit = pipeline.optimise_shot_weights()
        else:
            final_merit = pipeline.optimise_design()
    logger.info("Optimised design figure of merit: %.6g (ratio %.4g)", final_merit,
            basic_merit / final_merit)

    design_path, history_path = _out_path(args, "design.json"), _out_path(args, "history.csv")
    pipeline.design.save(design_path)
    save_history(pipeline.history, history_path)
    manifest.add_output(design_path)
    manifest.add_output(history_path)
    manifest.results = {"basic_merit":basic_merit, "final_merit":final_merit,
            "merit_ratio":basic_merit / final_merit,
            "design":pipeline.design.summary(),
            "optimiser":pipeline.optimiser_config.to_dict()}


def cmd_transfer(args, manifest:RunManifest):
    if args.design is None:
        design = load_reference_design(args.target_distance)
    else:
        design = _read_input(manifest, args.design, ExperimentalDesign.load)
        target = build_circuit(design.circuit.metadata.get("family"),
                args.target_distance)
        with manifest.stage("transfer"):
            design = transfer_design(design, target)
    filepath = _out_path(args, "design.json")
    design.save(filepath)
    manifest.add_output(filepath)
    manifest.results = design.summary()
    logger.info("Transferred design: %d tuples, %d experiments, %d rows, %d columns",
            len(design.tuples), design.num_experiments(), design.num_rows,
            design.num_cols)


def cmd_run(args, manifest:RunManifest):
    if args.budget <= 0:
        raise ValueError("The measurement budget must be positive.")
    design = _load_design(args, manifest)
    noise = _load_noise(args, design.circuit, manifest)
    pipeline = ACESPipeline(verbose=args.verbose, num_threads=args.threads,
            circuit=design.circuit, noise=noise, design=design)

    with manifest.stage("predict"):
        predicted = merit(design, noise, "GLS" if args.method == "FGLS" else args.method)
    with manifest.stage("simulate"):
        dataset = pipeline.simulate(args.budget, args.seed, args.mode)
    with manifest.stage("estimate"):
        estimates_report = pipeline.estimate(dataset, args.method)

    paths = {"dataset":_out_path(args, "dataset.json"),
            "report":_out_path(args, "report.json"),
            "distributions":_out_path(args, "distributions.csv"),
            "metrics":_out_path(args, "metrics.csv"),
            "residuals":_out_path(args, "residuals.csv")}
    dataset.save(paths["dataset"])
    estimates_report.save(paths["report"])
    estimates_report.save_distributions(paths["distributions"])
    estimates_report.save_metrics(paths["metrics"])
    save_residuals(circuit_eigenvalue_residuals(design,
        estimate_circuit_eigenvalues(dataset, design), noise), paths["residuals"])
    for path in paths.values():
        manifest.add_output(path)
    manifest.add_output(paths["dataset"] + ".counts.bin")

    nrmse = estimates_report.metrics["nrmse"]
    logger.info("NRMSE %.6g; predicted %.6g +/- %.3g", nrmse, predicted.merit,
            predicted.merit_sd)
    manifest.results = {"nrmse":nrmse, "predicted_merit":predicted.merit,
            "predicted_sd":predicted.merit_sd, "method_used":estimates_report.method,
            "type_median_tvd":estimates_report.metrics["type_median_tvd"],
            "lost_shots":dataset.metadata.get("lost")}


def cmd_scaling(args, manifest:RunManifest):
    distances = _int_list(args.distances)
    if len(distances) == 0:
        raise ValueError("At least one distance is required.")
    if args.design is None:
        base_design = load_reference_design(distances[0])
    else:
        base_design = _read_input(manifest, args.design, ExperimentalDesign.load)
    family = base_design.circuit.metadata.get("family")
    params = _noise_params(args)
    seeds = list(range(args.noise_seed, args.noise_seed + args.ensemble))

    rows, fit_data = [], {"d":[], "N":[], "trace_sigma":[], "trace_sigma_sq":[]}
    for distance in distances:
        with manifest.stage(f"d={distance}"):
            circuit = build_circuit(family, distance)
            design = transfer_design(base_design, circuit)
            num_eigs = circuit.gate_eigenvalue_count()
            if args.noise in ("depolarising", "both"):
                noise = build_noise_model(circuit, "depolarising", params)
                report = merit(design, noise, args.estimator)
                rows.append((distance, circuit.n, num_eigs, "depolarising", report.merit,
                    0.0, report.merit_sd, report.trace_sigma, report.trace_sigma_sq))
                for key, value in (("d", distance), ("N", num_eigs),
                        ("trace_sigma", report.trace_sigma),
                        ("trace_sigma_sq", report.trace_sigma_sq)):
                    fit_data[key].append(value)
            if args.noise in ("lognormal", "both"):
                mean_merit, sd_merit, mean_sd = lognormal_ensemble_merit(design,
                        seeds, params, args.estimator)
                rows.append((distance, circuit.n, num_eigs, "lognormal", mean_merit,
                    sd_merit, mean_sd, "", ""))
        logger.info("d = %d complete", distance)

    table_path = _out_path(args, "scaling.csv")
    _write_rows(table_path, ["d", "n", "N", "noise", "merit", "merit_ensemble_sd",
        "sqrt_variance", "trace_sigma", "trace_sigma_sq"], rows)
    manifest.add_output(table_path)

    if len(fit_data["d"]) >= 3:
        fit_rows = []
        for quantity in ("N", "trace_sigma", "trace_sigma_sq"):
            coefs, residuals = quadratic_fit(fit_data["d"], fit_data[quantity])
            fit_rows.append((quantity, float(coefs[0]), float(coefs[1]),
                float(coefs[2]), float(residuals.max())))
            logger.info("%s ~ %.6g + %.6g d + %.6g d^2, max relative residual %.3g",
                    quantity, *coefs, residuals.max())
        fit_path = _out_path(args, "quadratic_fits.csv")
        _write_rows(fit_path, ["quantity", "c0", "c1", "c2", "max_relative_residual"],
                fit_rows)
        manifest.add_output(fit_path)
        manifest.results["fits"] = {r[0]:list(r[1:]) for r in fit_rows}
    elif args.noise != "lognormal":
        logger.warning("Fewer than three distances; no quadratic fits written.")


def cmd_merit(args, manifest:RunManifest):
    design = _load_design(args, manifest)
    noise = _load_noise(args, design.circuit, manifest)
    time_accounting = not args.sample_optimised
    with manifest.stage("merit"):
        report = merit(design, noise, args.estimator, time_accounting)
    output = report.to_dict()
    logger.info("Figure of merit %.6g, sd %.4g", report.merit, report.merit_sd)

    if args.distribution != "none":
        pipeline = ACESPipeline(estimator_kind=args.estimator, verbose=args.verbose,
                circuit=design.circuit, noise=noise, design=design)
        with manifest.stage("distribution"):
            distribution = pipeline.error_distribution(args.distribution, args.draws,
                    args.seed, time_accounting)
            low, high = distribution.quantile(0.001), distribution.quantile(0.999)
            grid = np.linspace(low, high, DISTRIBUTION_GRID_POINTS)
            dist_rows = [(float(r), distribution.cdf(r), float(distribution.pdf(r)))
                    for r in grid]
        output["distribution"] = distribution.to_dict()
        dist_path = _out_path(args, "distribution.csv")
        _write_rows(dist_path, ["r", "cdf", "pdf"], dist_rows)
        manifest.add_output(dist_path)

    filepath = _out_path(args, "merit.json")
    _save_json(output, filepath)
    manifest.add_output(filepath)
    manifest.results = {"merit":report.merit, "sd":report.merit_sd}


def cmd_toy(args, manifest:RunManifest):
    lambdas = _float_list(args.lambdas)
    if len(lambdas) == 0:
        raise ValueError("At least one gate eigenvalue is required.")
    rows = []
    with manifest.stage("toy"):
        for lam in lambdas:
            phi_t, gamma_t, merit_t = toy_optimal(lam, args.lam_m, args.tau, True)
            phi_s, gamma_s, merit_s = toy_optimal(lam, args.lam_m, args.tau, False)
            rows.append((lam, 1 - lam, phi_t, gamma_t, merit_t, phi_t * (1 - lam),
                phi_s, gamma_s, merit_s))
    filepath = _out_path(args, "toy.csv")
    _write_rows(filepath, ["lambda", "one_minus_lambda", "phi_time", "gamma_time",
        "merit_time", "phi_time_scaled", "phi_sample", "gamma_sample",
        "merit_sample"], rows)
    manifest.add_output(filepath)
    if len(lambdas) > 1:
        infidelities = [r[1] for r in rows]
        manifest.results = {
                "time_merit_slope":log_log_slope(infidelities, [r[4] for r in rows]),
                "sample_merit_slope":log_log_slope(infidelities, [r[8] for r in rows])}
        logger.info("log-log slopes: time-optimised %.4f, sample-optimised %.4f",
                manifest.results["time_merit_slope"],
                manifest.results["sample_merit_slope"])


def _add_noise_args(parser):
    group = parser.add_argument_group("noise")
    group.add_argument("--noise", choices=["depolarising", "lognormal"],
            default="depolarising", help="The noise model generator.")
    group.add_argument("--noise-model", default=None,
            help="A noise model JSON file; overrides --noise.")
    group.add_argument("--r1", type=float, default=constants.DEFAULT_R1,
            help="Single-qubit gate infidelity.")
    group.add_argument("--r2", type=float, default=constants.DEFAULT_R2,
            help="Two-qubit gate infidelity.")
    group.add_argument("--rm", type=float, default=constants.DEFAULT_RM,
            help="Measurement infidelity.")
    group.add_argument("--sigma-tot-sq", type=float,
            default=constants.DEFAULT_SIGMA_TOT_SQ,
            help="Total log-variance of the log-normal noise.")
    group.add_argument("--noise-seed", type=int, default=0,
            help="Seed of the log-normal noise model.")


def _add_design_args(parser):
    parser.add_argument("--design", default=None,
            help="A design JSON file; the bundled reference design if omitted.")
    parser.add_argument("--distance", type=int, default=None,
            help="The code distance to transfer the design to.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aces-lab",
            description="Design, simulate and analyse ACES noise characterisation "
            "experiments on surface code syndrome extraction circuits.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true",
            help="Debug logging and library progress output.")
    verbosity.add_argument("--quiet", action="store_true", help="Only log warnings.")
    parser.add_argument("--threads", type=int, default=None,
            help=f"Worker threads; falls back to {THREADS_ENV_VAR}, then the core count.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    sub = subparsers.add_parser("circuit", help="Generate a syndrome extraction circuit.")
    sub.add_argument("--kind", choices=["rotated", "unrotated"], default="rotated")
    sub.add_argument("--distance", type=int, required=True)
    sub.add_argument("--out", required=True, help="Output directory.")
    sub.set_defaults(handler=cmd_circuit)

    sub = subparsers.add_parser("optimise", help="Optimise an experimental design.")
    sub.add_argument("--circuit", default=None, help="A circuit JSON file.")
    sub.add_argument("--kind", choices=["rotated", "unrotated"], default="rotated")
    sub.add_argument("--distance", type=int, default=3)
    sub.add_argument("--estimator", choices=["OLS", "WLS", "GLS"], default="GLS")
    sub.add_argument("--seed", type=int, default=constants.default_optimiser_params["seed"])
    sub.add_argument("--max-steps", type=int, default=None)
    sub.add_argument("--n-ex", type=int, default=None, help="Number of excursions.")
    sub.add_argument("--l-set", type=int, default=None, help="Target tuple set size.")
    sub.add_argument("--weights-only", action="store_true",
            help="Only optimise the shot weights of the basic design.")
    sub.add_argument("--out", required=True, help="Output directory.")
    _add_noise_args(sub)
    sub.set_defaults(handler=cmd_optimise)

    sub = subparsers.add_parser("transfer", help="Transfer a design to another distance.")
    sub.add_argument("--design", default=None,
            help="A design JSON file; the bundled reference design if omitted.")
    sub.add_argument("--target-distance", type=int, required=True)
    sub.add_argument("--out", required=True, help="Output directory.")
    sub.set_defaults(handler=cmd_transfer)

    sub = subparsers.add_parser("run", help="Simulate a design and estimate the noise.")
    _add_design_args(sub)
    sub.add_argument("--budget", type=float, required=True,
            help="The measurement budget S.")
    sub.add_argument("--seed", type=int, required=True)
    sub.add_argument("--method", choices=["OLS", "WLS", "FGLS"], default="WLS")
    sub.add_argument("--mode", choices=["frame", "independent"], default="frame")
    sub.add_argument("--out", required=True, help="Output directory.")
    _add_noise_args(sub)
    sub.set_defaults(handler=cmd_run)

    sub = subparsers.add_parser("scaling", help="Figure of merit against distance.")
    sub.add_argument("--design", default=None,
            help="A design JSON file; the bundled reference design if omitted.")
    sub.add_argument("--distances", default="3,5,7,9",
            help="Comma-separated code distances.")
    sub.add_argument("--noise", choices=["depolarising", "lognormal", "both"],
            default="both")
    sub.add_argument("--ensemble", type=int, default=5,
            help="Number of log-normal noise models per distance.")
    sub.add_argument("--noise-seed", type=int, default=0,
            help="First seed of the log-normal ensemble.")
    sub.add_argument("--r1", type=float, default=constants.DEFAULT_R1)
    sub.add_argument("--r2", type=float, default=constants.DEFAULT_R2)
    sub.add_argument("--rm", type=float, default=constants.DEFAULT_RM)
    sub.add_argument("--sigma-tot-sq", type=float, default=constants.DEFAULT_SIGMA_TOT_SQ)
    sub.add_argument("--estimator", choices=["OLS", "WLS", "GLS"], default="GLS")
    sub.add_argument("--out", required=True, help="Output directory.")
    sub.set_defaults(handler=cmd_scaling)

    sub = subparsers.add_parser("merit", help="Predict the performance of a design.")
    _add_design_args(sub)
    sub.add_argument("--estimator", choices=["OLS", "WLS", "GLS"], default="GLS")
    sub.add_argument("--sample-optimised", action="store_true",
            help="Ignore experiment durations, so that S' = S.")
    sub.add_argument("--distribution", choices=["none", "monte_carlo", "imhof"],
            default="none", help="Also write the predicted NRMSE distribution.")
    sub.add_argument("--draws", type=int, default=constants.MIN_DISTRIBUTION_DRAWS)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", required=True, help="Output directory.")
    _add_noise_args(sub)
    sub.set_defaults(handler=cmd_merit)

    sub = subparsers.add_parser("toy", help="Toy model optimal repetition curves.")
    sub.add_argument("--lambdas", default="0.99,0.995,0.999,0.9995,0.9999",
            help="Comma-separated gate eigenvalues.")
    sub.add_argument("--lam-m", type=float, default=constants.TOY_LAMBDA_M)
    sub.add_argument("--tau", type=float, default=constants.TOY_TAU)
    sub.add_argument("--out", required=True, help="Output directory.")
    sub.set_defaults(handler=cmd_toy)
    return parser


def configure_logging(args):
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)


def main(argv = None) -> int:
    """Runs the command line and returns its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_OK if err.code in (0, None) else EXIT_USAGE
    configure_logging(args)
    manifest = RunManifest(args.command, vars(args), getattr(args, "seed", None))

    try:
        args.threads = resolve_threads(args.threads)
        os.makedirs(args.out, exist_ok=True)
        args.handler(args, manifest)
        manifest.write(args.out)
    except (RankDeficiencyError, SizeGuardError, np.linalg.LinAlgError,
            scipy_linalg.LinAlgError, FloatingPointError) as err:
        logger.error("Numerical failure: %s", err)
        return EXIT_NUMERICAL
    except ValueError as err:
        logger.error("Invalid arguments: %s", err)
        return EXIT_USAGE
    except OSError as err:
        logger.error("I/O error: %s", err)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
