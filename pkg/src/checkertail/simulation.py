"""Monte Carlo harness: bias, MSE, coverage and interval length of tail estimators.

For every cell ``(n, alpha, beta)`` of the grid and every replication the
harness draws a dataset from the model, estimates the tail dependence
coefficient with the raw and the checkerboard estimator, builds a multiplier
bootstrap interval for each, and aggregates against the model's true value.

Seeding
-------
Replication ``r`` of cell ``c`` draws its data from
``SeedSequence(seed, spawn_key=(c, r, 0))`` and its multipliers from the
stream rooted at ``SeedSequence(seed, spawn_key=(c, r, 1))``.  Records are
sorted by ``(c, r)`` before aggregation, so tables do not depend on the
number of workers.

Config files
------------
INI files with an ``[experiment]`` section and an optional ``[model]``
section holding the model parameters::

    [experiment]
    schema = 1
    model = clayton
    n = 500, 1000, 2000
    pairs = 0.6:0.75, 0.8:0.85, 0.9:0.95
    rho = 1
    side = lower
    B = 500
    reps = 1000
    level = 0.9
    seed = 12345
    workers = 1
    output = results.csv
    timing = true

    [model]
    theta = 1

Only ``schema`` and ``model`` are required.  The ``CHECKERTAIL_OUTPUT_DIR``
environment variable, when set, overrides the directory of ``output``.
"""

import configparser
import csv
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .bootstrap import BootstrapDistribution, MultiplierLaw, bootstrap_values, confidence_interval
from .checkerboard import LazyCheckerboard
from .copula_models import make_model
from .empirical import EmpiricalCopula, rank_sample
from .tail import SIDES, tail_copula
from .tuning import check_exponents, plan

SCHEMA_VERSION = 1
COLUMNS = (
    "model",
    "n",
    "alpha",
    "beta",
    "estimator",
    "bias",
    "mse",
    "coverage",
    "ci_length",
    "reps",
    "seconds",
)
ESTIMATORS = ("Raw", "Checkerboard")
OUTPUT_DIR_ENV = "CHECKERTAIL_OUTPUT_DIR"

DEFAULT_N = (500, 1000, 2000)
DEFAULT_PAIRS = ((0.6, 0.75), (0.8, 0.85), (0.9, 0.95))


class ConfigError(ValueError):
    """Malformed or unsupported experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Monte Carlo design.

    Parameters
    ----------
    model : str
        Model name understood by :func:`~checkertail.copula_models.make_model`.
    model_params : dict
    n_values : tuple of int
    pairs : tuple of (alpha, beta)
    rho : float
        Second-order exponent used to validate the exponent pairs.
    side : {"lower", "upper"}
    B : int
        Bootstrap replicates per dataset.
    reps : int
        Monte Carlo replications per cell.
    level : float
        Nominal interval coverage.
    seed : int
        Master seed.
    workers : int
        Worker processes; does not affect results.
    output : str or None
    timing : bool
        Record wall time; when False the ``seconds`` column is 0 so that
        output files are reproducible byte for byte.
    """

    model: str = "clayton"
    model_params: dict = field(default_factory=lambda: {"theta": 1.0})
    n_values: tuple = DEFAULT_N
    pairs: tuple = DEFAULT_PAIRS
    rho: float = 1.0
    side: str = "lower"
    B: int = 500
    reps: int = 1000
    level: float = 0.9
    seed: int = 0
    workers: int = 1
    output: str = None
    timing: bool = True

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(
            self, "pairs", tuple((float(a), float(b)) for a, b in self.pairs)
        )
        object.__setattr__(self, "model_params", dict(self.model_params))
        if self.side not in SIDES:
            raise ConfigError(f"side must be one of {SIDES}, got {self.side!r}.")
        if self.B < 2 or self.reps < 1 or self.workers < 1:
            raise ConfigError("B must be >= 2; reps and workers must be >= 1.")
        if not 0.0 < self.level < 1.0:
            raise ConfigError(f"level must lie in (0, 1), got {self.level!r}.")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer.")
        if not self.n_values or not self.pairs:
            raise ConfigError("At least one sample size and one exponent pair are required.")

    @property
    def cells(self):
        return [(n, a, b) for n in self.n_values for a, b in self.pairs]

    @property
    def label(self):
        args = ",".join(f"{k}={v:g}" for k, v in sorted(self.model_params.items()))
        return f"{self.model}({args})" if args else self.model

    def build_model(self):
        return make_model(self.model, **self.model_params)

    def digest(self):
        """SHA-256 of the fields that determine the results."""
        d = asdict(self)
        for key in ("workers", "output", "timing"):
            d.pop(key)
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def replace(self, **changes):
        d = asdict(self)
        d.update(changes)
        return ExperimentConfig(**d)


def _parse_list(text, convert):
    return tuple(convert(s.strip()) for s in text.replace(";", ",").split(",") if s.strip())


def _parse_pair(text):
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"expected alpha:beta, got {text!r}")
    return float(parts[0]), float(parts[1])


def parse_config(text, source="<string>"):
    """Parse an INI experiment config into an :class:`ExperimentConfig`."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if not parser.has_section("experiment"):
        raise ConfigError(f"{source}: missing [experiment] section.")
    sec = parser["experiment"]
    known = {
        "schema", "model", "n", "pairs", "rho", "side", "B", "reps",
        "level", "seed", "workers", "output", "timing",
    }
    unknown = set(sec) - known
    if unknown:
        raise ConfigError(f"{source}: unknown key(s) {sorted(unknown)} in [experiment].")
    schema = sec.get("schema")
    if schema is None:
        raise ConfigError(f"{source}: missing 'schema' key.")
    if schema.strip() != str(SCHEMA_VERSION):
        raise ConfigError(f"{source}: unsupported schema {schema!r}; expected {SCHEMA_VERSION}.")
    if "model" not in sec:
        raise ConfigError(f"{source}: missing 'model' key.")
    kwargs = {"model": sec["model"].strip()}
    try:
        if "n" in sec:
            kwargs["n_values"] = _parse_list(sec["n"], int)
        if "pairs" in sec:
            kwargs["pairs"] = _parse_list(sec["pairs"], _parse_pair)
        for key, convert in (("rho", float), ("B", int), ("reps", int), ("level", float),
                             ("seed", int), ("workers", int)):
            if key in sec:
                kwargs[key] = convert(sec[key])
        if "side" in sec:
            kwargs["side"] = sec["side"].strip()
        if "output" in sec:
            kwargs["output"] = sec["output"].strip()
        if "timing" in sec:
            kwargs["timing"] = sec.getboolean("timing")
        params = {}
        if parser.has_section("model"):
            params = {k: float(v) for k, v in parser["model"].items()}
        kwargs["model_params"] = params
        config = ExperimentConfig(**kwargs)
        config.build_model()
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return config


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc.strerror}") from None
    return parse_config(text, source=str(path))


def resolve_output(path):
    """Apply the output-directory override to ``path``."""
    if path is None:
        return None
    override = os.environ.get(OUTPUT_DIR_ENV)
    if override:
        return Path(override) / Path(path).name
    return Path(path)


def _stream(seed, *key):
    return np.random.SeedSequence(seed, spawn_key=key)


def run_replication(config, model, lam, cell_index, rep):
    """One dataset of one cell.

    Returns ``(cell_index, rep, seconds, rows)`` with one row
    ``(estimate, covered, ci_length, bootstrap_sd)`` per estimator in
    :data:`ESTIMATORS`.
    """
    start = time.perf_counter()
    n, alpha, beta = config.cells[cell_index]
    tuned = plan(n, alpha, beta, config.rho, warn=False)
    k, m = tuned.k, tuned.m
    X = model.sample(n, rng=np.random.default_rng(_stream(config.seed, cell_index, rep, 0)))
    copula = EmpiricalCopula(rank_sample(X))
    estimates = {
        "Raw": float(tail_copula(copula, n, k, 1.0, 1.0, config.side)),
        "Checkerboard": float(
            tail_copula(LazyCheckerboard(copula, m), n, k, 1.0, 1.0, config.side)
        ),
    }
    law = MultiplierLaw.exponential()
    values = bootstrap_values(
        copula.ranks, law, k, m, config.B, _stream(config.seed, cell_index, rep, 1), config.side
    )
    rows = []
    for name, key in zip(ESTIMATORS, ("raw", "checkerboard")):
        est = estimates[name]
        dist = BootstrapDistribution(law.scale * math.sqrt(k) * (values[key] - est), est, k)
        ci = confidence_interval(dist, est, k, config.level, clamp=True)
        rows.append((est, lam in ci, ci.length, float(np.std(dist.replicates, ddof=1))))
    return cell_index, rep, time.perf_counter() - start, rows


def _run_chunk(config, tasks):
    model = config.build_model()
    lam = model.tail_oracle(config.side).lam
    return [run_replication(config, model, lam, c, r) for c, r in tasks]


@dataclass
class ExperimentResult:
    """Aggregated records plus provenance.

    ``records`` is a list of dicts keyed by :data:`COLUMNS`.  ``estimates``
    and ``bootstrap_sd`` map ``(cell_index, estimator)`` to per-replication
    arrays in replication order: the point estimates and the standard
    deviations of the scaled bootstrap replicates.
    """

    records: list
    provenance: dict
    estimates: dict = field(default_factory=dict, repr=False)
    bootstrap_sd: dict = field(default_factory=dict, repr=False)


def _aggregate(config, lam, raw):
    raw = sorted(raw, key=lambda item: (item[0], item[1]))
    records, estimates, sds = [], {}, {}
    for c, (n, alpha, beta) in enumerate(config.cells):
        items = [item for item in raw if item[0] == c]
        seconds = sum(item[2] for item in items) if config.timing else 0.0
        for e, name in enumerate(ESTIMATORS):
            est = np.array([item[3][e][0] for item in items])
            covered = np.array([item[3][e][1] for item in items], dtype=np.float64)
            length = np.array([item[3][e][2] for item in items])
            err = est - lam
            estimates[(c, name)] = est
            sds[(c, name)] = np.array([item[3][e][3] for item in items])
            records.append(
                {
                    "model": config.label,
                    "n": n,
                    "alpha": alpha,
                    "beta": beta,
                    "estimator": name,
                    "bias": float(err.mean()),
                    "mse": float(np.mean(err**2)),
                    "coverage": float(covered.mean()),
                    "ci_length": float(length.mean()),
                    "reps": len(items),
                    "seconds": float(seconds),
                }
            )
    return records, estimates, sds


def run_experiment(config, workers=None, chunk_size=None):
    """Run the full Monte Carlo design.

    Parameters
    ----------
    config : ExperimentConfig
    workers : int, optional
        Overrides ``config.workers``.
    chunk_size : int, optional
        Replications per task sent to a worker process.

    Returns
    -------
    ExperimentResult

    Raises
    ------
    InfeasibleTuningError
        If any exponent pair violates the constraints for ``config.rho``.
    OracleUnavailableError
        If the model has no known tail dependence coefficient.
    """
    workers = config.workers if workers is None else workers
    for _, alpha, beta in config.cells:
        check_exponents(alpha, beta, config.rho)
    for n, alpha, beta in config.cells:
        plan(n, alpha, beta, config.rho, warn=False)
    model = config.build_model()
    lam = model.tail_oracle(config.side).lam

    tasks = [(c, r) for c in range(len(config.cells)) for r in range(config.reps)]
    if workers <= 1:
        raw = _run_chunk(config, tasks)
    else:
        size = chunk_size or max(1, min(25, len(tasks) // (4 * workers) or 1))
        chunks = [tasks[i : i + size] for i in range(0, len(tasks), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = [item for part in pool.map(_run_chunk, [config] * len(chunks), chunks)
                   for item in part]
    records, estimates, sds = _aggregate(config, lam, raw)
    provenance = {
        "schema": SCHEMA_VERSION,
        "config_hash": config.digest(),
        "seed": config.seed,
        "model": config.label,
        "lambda": lam,
        "side": config.side,
        "B": config.B,
        "level": config.level,
        "rho": config.rho,
    }
    return ExperimentResult(records, provenance, estimates, sds)


def _format(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{value:.6g}"


def _rounded(value):
    if isinstance(value, float):
        return float(f"{value:.6g}")
    return value


def format_csv(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for rec in records:
        writer.writerow([_format(rec[c]) for c in COLUMNS])
    return buf.getvalue()


def format_json(result):
    records = [{c: _rounded(rec[c]) for c in COLUMNS} for rec in result.records]
    payload = {"columns": list(COLUMNS), "records": records, "provenance": result.provenance}
    return json.dumps(payload, indent=2) + "\n"


def emit_results(result, path=None, format="csv"):
    """Write ``result`` as CSV or JSON.

    Floats carry 6 significant digits.  Returns the text written; with
    ``path=None`` nothing is written to disk.
    """
    if format == "csv":
        text = format_csv(result.records)
    elif format == "json":
        text = format_json(result)
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}.")
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return text


def read_results(path):
    """Load records written by :func:`emit_results` (CSV or JSON)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        payload = json.loads(text)
        return ExperimentResult(payload["records"], payload.get("provenance", {}))
    rows = list(csv.DictReader(io.StringIO(text)))
    records = []
    for row in rows:
        rec = {}
        for c in COLUMNS:
            if c in ("model", "estimator"):
                rec[c] = row[c]
            elif c in ("n", "reps"):
                rec[c] = int(row[c])
            else:
                rec[c] = float(row[c])
        records.append(rec)
    return ExperimentResult(records, {})
