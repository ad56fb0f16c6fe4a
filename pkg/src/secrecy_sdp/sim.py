"""Monte Carlo experiments over random channels.

A run is described by an :class:`ExperimentConfig`, usually loaded from
JSON::

    {"experiment": "sweep-k",
     "n_t": 10, "eve_antennas": 3,
     "sweep": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
     "k": 3, "power_db": 3.0, "rho_e_sq": 1.0,
     "alpha_b": 0.03, "alpha_e": 0.1,
     "trials": 100, "seed": 1, "methods": ["sdp", "projected-mrt"]}

``sweep`` holds the swept quantity for the chosen experiment:

=======================  ===========================  =====================
experiment               swept value                  rate reported
=======================  ===========================  =====================
``sweep-k``              number of Eves ``K``         nominal secrecy rate
``sweep-rho``            Eve channel variance         nominal secrecy rate
``sweep-power``          power budget in dB           nominal secrecy rate
``robust-sweep-alpha-e`` Eve uncertainty ratio        worst-case rate
``robust-sweep-power``   power budget in dB           worst-case rate
``robust-sweep-rho``     Eve channel variance         worst-case rate
=======================  ===========================  =====================

Every trial draws its channels once from its own stream ``(seed, trial)``
and reuses them across the sweep: ``sweep-k`` takes prefixes of one
``max(sweep)``-Eve draw, the variance sweeps rescale one unit-variance Eve
draw, and power sweeps keep the channel fixed.  Results therefore do not
depend on execution order, and a run is reproducible bit for bit.

The mean over trials includes zero-rate trials (for example projected-MRT
once the Eves span every transmit dimension).
"""

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import perfect, robust
from .channel import ChannelInstance, db_to_linear, make_rng, sample_channel, uncertainty_from_ratios
from .perfect import InternalInconsistencyError

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "TrialRecord",
    "ExperimentResult",
    "ConfigError",
    "ExperimentAborted",
    "run_experiment",
    "load_config",
    "write_csv",
    "EXPERIMENTS",
    "METHODS",
]

PERFECT_EXPERIMENTS = ("sweep-k", "sweep-rho", "sweep-power")
ROBUST_EXPERIMENTS = ("robust-sweep-alpha-e", "robust-sweep-power", "robust-sweep-rho")
EXPERIMENTS = PERFECT_EXPERIMENTS + ROBUST_EXPERIMENTS
METHODS = ("sdp", "projected-mrt", "plain-mrt", "robust-sdp", "one-eve")
MAX_FAIL_FRACTION = 0.10
NONNEG_TOL = -1e-9


class ConfigError(ValueError):
    pass


class ExperimentAborted(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    sweep: tuple
    n_t: int = 10
    eve_antennas: int = 3
    k: int = 3
    power_db: float = 3.0
    rho_e_sq: float = 1.0
    alpha_b: float = 0.03
    alpha_e: float = 0.1
    trials: int = 100
    seed: int = 0
    methods: tuple = ("sdp",)
    tol: float = perfect.DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "sweep", tuple(float(v) for v in self.sweep))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        if not self.sweep:
            raise ConfigError("sweep grid is empty")
        if not self.methods:
            raise ConfigError("no methods given")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("methods repeat")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.n_t < 1 or self.eve_antennas < 1 or self.k < 0:
            raise ConfigError("n_t and eve_antennas must be >= 1 and k >= 0")
        if self.rho_e_sq <= 0 or self.alpha_b < 0 or self.alpha_e < 0:
            raise ConfigError("rho_e_sq must be positive and uncertainty ratios nonnegative")
        if "robust-sdp" in self.methods and not self.robust:
            raise ConfigError("robust-sdp only makes sense in the robust-* experiments")
        if self.experiment == "sweep-k":
            if any(v < 0 or v != int(v) for v in self.sweep):
                raise ConfigError("sweep-k values must be nonnegative integers")
        if self.experiment in ("sweep-rho", "robust-sweep-rho") and any(v <= 0 for v in self.sweep):
            raise ConfigError("Eve channel variances must be positive")
        if self.experiment == "robust-sweep-alpha-e" and any(v < 0 for v in self.sweep):
            raise ConfigError("uncertainty ratios must be nonnegative")
        if "one-eve" in self.methods:
            ks = self.sweep if self.experiment == "sweep-k" else (self.k,)
            if any(int(v) != 1 for v in ks):
                raise ConfigError("one-eve needs exactly one Eve")

    @property
    def robust(self):
        return self.experiment in ROBUST_EXPERIMENTS

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config field(s): {', '.join(sorted(extra))}")
        for key in ("experiment", "sweep"):
            if key not in d:
                raise ConfigError(f"missing config field {key!r}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self):
        d = asdict(self)
        d["sweep"] = list(self.sweep)
        d["methods"] = list(self.methods)
        return d


def load_config(path):
    with open(path) as fh:
        text = fh.read()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return ExperimentConfig.from_dict(d)


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    sweep_value: float
    method: str
    mean_rate: float
    std_rate: float
    frac_nonneg: float
    trials: int
    failed: int = 0


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    sweep_value: float
    method: str
    rate: float
    status: str


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list
    records: list = field(default_factory=list)

    def rates(self, method, sweep_value):
        """Per-trial rates (``nan`` for failures) in trial order."""
        return np.array(
            [r.rate for r in self.records if r.method == method and r.sweep_value == sweep_value]
        )


# -- designs --------------------------------------------------------------------


def _perfect_design(method, instance, tol):
    if method == "sdp":
        return perfect.solve_srm(instance, tol=tol)
    if method == "projected-mrt":
        return perfect.projected_mrt(instance)
    if method == "plain-mrt":
        return perfect.plain_mrt(instance)
    if method == "one-eve":
        return perfect.one_eve_closed_form(instance.h, instance.eves[0], instance.power)
    raise ConfigError(f"method {method!r} is not a perfect-CSI design")


def _trial_channels(config, trial):
    """Base draw for one trial: Bob, and unit-variance Eves."""
    rng = make_rng(config.seed, trial)
    k = int(max(config.sweep)) if config.experiment == "sweep-k" else config.k
    return sample_channel(rng, config.n_t, [config.eve_antennas] * k, rho_e_sq=1.0, power=1.0)


def _scenario(config, base, value):
    """``(nominal instance, uncertainty spec or None)`` for one sweep value."""
    rho, power_db, alpha_e = config.rho_e_sq, config.power_db, config.alpha_e
    k = config.k
    exp = config.experiment
    if exp == "sweep-k":
        k = int(value)
    elif exp in ("sweep-rho", "robust-sweep-rho"):
        rho = value
    elif exp in ("sweep-power", "robust-sweep-power"):
        power_db = value
    elif exp == "robust-sweep-alpha-e":
        alpha_e = value
    eves = [np.sqrt(rho) * G for G in base.eves[:k]]
    nominal = ChannelInstance(base.h, eves, db_to_linear(power_db))
    if not config.robust:
        return nominal, None
    return nominal, uncertainty_from_ratios(nominal, config.alpha_b, alpha_e, rho_e_sq=rho)


def _run_trial(args):
    config, trial = args
    base = _trial_channels(config, trial)
    records = []
    cache = {}
    for value in config.sweep:
        nominal, spec = _scenario(config, base, value)
        for method in config.methods:
            try:
                if config.robust:
                    if method == "robust-sdp":
                        design = robust.solve_robust_srm(spec, tol=config.tol)
                    else:
                        # nominal designs do not depend on the radii, so a
                        # sweep over radii reuses them
                        key = method if config.experiment == "robust-sweep-alpha-e" else (method, value)
                        if key not in cache:
                            cache[key] = _perfect_design(method, nominal, config.tol)
                        design = cache[key]
                    if design.status != "optimal":
                        raise _TrialFailure(design.status)
                    if method == "robust-sdp":
                        rate = design.worst_case_rate
                    else:
                        rate = robust.worst_case_secrecy_rate(design.W, spec, tol=config.tol)
                else:
                    design = _perfect_design(method, nominal, config.tol)
                    if design.status != "optimal":
                        raise _TrialFailure(design.status)
                    rate = perfect.secrecy_rate(design.W, nominal)
                records.append(TrialRecord(trial, value, method, float(rate), "optimal"))
            except _TrialFailure as exc:
                records.append(TrialRecord(trial, value, method, float("nan"), str(exc)))
            except (InternalInconsistencyError, ValueError, np.linalg.LinAlgError) as exc:
                records.append(TrialRecord(trial, value, method, float("nan"), f"error: {exc}"))
    return records


class _TrialFailure(Exception):
    pass


def _aggregate(config, records):
    rows = []
    for value in config.sweep:
        for method in config.methods:
            cell = [r for r in records if r.sweep_value == value and r.method == method]
            ok = np.array([r.rate for r in cell if r.status == "optimal"])
            failed = len(cell) - ok.size
            if failed > MAX_FAIL_FRACTION * len(cell):
                raise ExperimentAborted(
                    f"{failed} of {len(cell)} trials failed for method {method!r} at sweep value {value}"
                )
            if ok.size == 0:
                mean = std = frac = float("nan")
            else:
                mean = float(np.mean(ok))
                std = float(np.std(ok, ddof=1)) if ok.size > 1 else 0.0
                frac = float(np.mean(ok >= NONNEG_TOL))
            rows.append(ResultRow(config.experiment, value, method, mean, std, frac, int(ok.size), failed))
    return rows


def run_experiment(config, out=None, workers=1, progress=None):
    """Run every trial of ``config`` and aggregate per (sweep value, method).

    Trials may run in ``workers`` processes; records are always gathered in
    trial order so the output does not depend on scheduling.  ``out``, when
    given, receives the CSV.  ``progress`` is called with the number of
    finished trials.
    """
    jobs = [(config, t) for t in range(config.trials)]
    records = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, recs in enumerate(pool.map(_run_trial, jobs)):
                records.extend(recs)
                if progress:
                    progress(i + 1)
    else:
        for i, job in enumerate(jobs):
            records.extend(_run_trial(job))
            if progress:
                progress(i + 1)
    rows = _aggregate(config, records)
    result = ExperimentResult(config, rows, records)
    if out is not None:
        write_csv(rows, out)
    return result


CSV_FIELDS = [f.name for f in fields(ResultRow)]


def _fmt(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def rows_to_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for row in rows:
        writer.writerow([_fmt(getattr(row, name)) for name in CSV_FIELDS])
    return buf.getvalue()


def write_csv(rows, path):
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        out = []
        for rec in reader:
            out.append(
                ResultRow(
                    rec["experiment"],
                    float(rec["sweep_value"]),
                    rec["method"],
                    float(rec["mean_rate"]),
                    float(rec["std_rate"]),
                    float(rec["frac_nonneg"]),
                    int(rec["trials"]),
                    int(rec.get("failed", 0)),
                )
            )
    return out
