"""Experiment harness: named experiment specs, builtin scenario catalog,
theory-vs-Monte-Carlo comparison reports, stability sweeps and CSV output.

The CSV schema is the package's data interface (one row per sample):

    n,msd_theory,msd_mc,msd_theory_db,msd_mc_db,mean_dev_norm

Floats are written with shortest round-trip formatting; absent values are
``nan``. Output is byte-identical for identical (spec, seed) regardless of
worker count.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from .design import DesignInput, dlms_stability_bound, dnlms_stability_bound
from .signals import (
    ConstantProfile,
    Gaussian,
    GaussianFifthPower,
    Laplacian,
    PlantModel,
    PulsedProfile,
    SinusoidalProfile,
    ThreePoint,
    Uniform,
    kurtosis_of,
    mean_power,
    period_of,
    two_sided_exponential,
)
from .simulation import NetworkConfig, NodeConfig, run_monte_carlo
from .theory import slow_factors, theory_trajectory

__all__ = [
    "ConfigError",
    "ExperimentSpec",
    "ComparisonReport",
    "ExperimentResult",
    "StabilityRow",
    "CSV_HEADER",
    "load_spec",
    "spec_from_dict",
    "resolve_spec",
    "builtin_specs",
    "default_horizon",
    "steady_window",
    "detect_ripple_period",
    "compare_curves",
    "run_experiment",
    "compare_stability",
    "write_csv",
    "read_csv",
    "default_workers",
]

CSV_HEADER = "n,msd_theory,msd_mc,msd_theory_db,msd_mc_db,mean_dev_norm"

HORIZON_CAP = 20_000
BURN_IN_DB = 3.0


class ConfigError(ValueError):
    """Experiment spec file failed validation; message names the field."""


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    network: NetworkConfig
    runs: int = 100
    horizon: int | None = None  # None: derived from the network
    master_seed: int = 12345
    theory_model: str = "general"  # general | slow | both
    out_prefix: str | None = None
    description: str = ""

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.horizon is not None and self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.theory_model not in ("general", "slow", "both"):
            raise ValueError(f"unknown theory model {self.theory_model!r}")


@dataclass
class ComparisonReport:
    """Theory-vs-Monte-Carlo agreement over a learning curve."""

    steady_state_gap_db: float
    max_transient_gap_db: float
    burn_in: int
    window: int
    ripple_period_detected: int | None
    theory_steady_db: float
    mc_steady_db: float
    diverged_theory: bool
    diverged_mc: bool

    @property
    def diverged(self):
        return self.diverged_theory or self.diverged_mc


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    horizon: int
    mc: object
    theory: dict          # model name -> trajectory dict
    report: ComparisonReport
    csv_path: str | None = None


@dataclass
class StabilityRow:
    multiplier: float
    predicted_stable: bool
    theory_diverged: bool
    mc_diverged: bool | None = None

    @property
    def agrees(self):
        return self.predicted_stable == (not self.theory_diverged)


# ---------------------------------------------------------------------------
# horizons and windows


def _period_lcm(network):
    periods = [period_of(node.profile) or 1 for node in network.nodes]
    return math.lcm(*periods), max(periods)


def default_horizon(network):
    """Transient length estimated from the slow model plus two periods of
    the slowest power profile, at least four ripple periods, capped."""
    lcm, slowest = _period_lcm(network)
    logs = []
    for n in range(min(lcm, 4096)):
        a, _ = slow_factors(network, n)
        logs.append(math.log(max(a, 1e-6)))
    decay = -float(np.mean(logs))
    if decay <= 1e-5:
        return HORIZON_CAP
    transient = int(math.ceil(14.0 / decay))
    return max(256, min(HORIZON_CAP, max(transient + 2 * slowest, 4 * lcm)))


def steady_window(network, horizon):
    """Steady-state averaging window: least common multiple of the nodal
    power periods, capped at a quarter of the horizon."""
    lcm, _ = _period_lcm(network)
    return max(1, min(lcm, horizon // 4))


# ---------------------------------------------------------------------------
# curve comparison


def _db(x):
    with np.errstate(divide="ignore", invalid="ignore"):
        return 10.0 * np.log10(x)


def detect_ripple_period(series):
    """Smallest lag at which the series repeats its values.

    Scores each lag by the mean squared difference between the linearly
    detrended series and its lagged copy, normalized by twice the variance
    (0 at an exact repeat, ~1 at unrelated lags; evaluated exactly through
    cumulative sums and one FFT). Repeat lags are local minima over lags
    2..size/2; prefer the smallest with residual below 0.002 (a value-level
    repeat), falling back to the smallest within 0.01 of the best. None for
    flat series or when the best local minimum still leaves over half the
    variance unexplained.
    """
    x = np.asarray(series, dtype=float)
    if x.size < 8 or not np.all(np.isfinite(x)):
        return None
    t = np.arange(x.size)
    slope, intercept = np.polyfit(t, x, 1)
    d = x - (slope * t + intercept)
    var2 = 2.0 * float(np.mean(d * d))
    scale = float(np.mean(np.abs(x))) or 1.0
    if math.sqrt(var2) <= 1e-9 * scale:
        return None
    size = x.size
    kmax = size // 2
    if kmax < 3:
        return None
    f = np.fft.rfft(d, 2 * size)
    prod = np.fft.irfft(f * np.conj(f))[: kmax + 1]  # sum_i d[i] d[i+k]
    k = np.arange(kmax + 1)
    n_k = (size - k).astype(float)
    csq = np.concatenate(([0.0], np.cumsum(d * d)))
    qlead = csq[size - k]          # sum of d^2 over [0, size-k)
    qtrail = csq[size] - csq[k]    # sum of d^2 over [k, size)
    diff = np.maximum(qlead + qtrail - 2.0 * prod, 0.0) / n_k / var2
    interior = diff[1:-1]
    local = np.nonzero((interior <= diff[:-2]) & (interior <= diff[2:]))[0] + 1
    local = local[local >= 2]
    if local.size == 0:
        return None
    best = float(diff[local].min())
    if best > 0.5:
        return None
    strong = local[diff[local] <= 0.002]
    if strong.size:
        return int(strong[0])
    return int(local[diff[local] <= best + 0.01][0])


def compare_curves(network, msd_theory, msd_mc, horizon,
                   diverged_theory=False, diverged_mc=False):
    """Build a ComparisonReport from matched learning curves.

    Burn-in is the first sample where the theory MSD is within 3 dB of its
    own steady-state level; gaps are per-sample |10 log10(mc/theory)|,
    averaged over the steady-state window and maximized after burn-in.
    """
    window = steady_window(network, horizon)
    th = np.maximum(np.asarray(msd_theory, dtype=float), 1e-300)
    mc = np.maximum(np.asarray(msd_mc, dtype=float), 1e-300)
    if diverged_theory or diverged_mc:
        return ComparisonReport(
            steady_state_gap_db=float("nan"), max_transient_gap_db=float("nan"),
            burn_in=0, window=window, ripple_period_detected=None,
            theory_steady_db=float(_db(th[-window:].mean())),
            mc_steady_db=float(_db(mc[-window:].mean())),
            diverged_theory=diverged_theory, diverged_mc=diverged_mc)

    tail = slice(len(th) - window, len(th))
    level = th[tail].mean()
    rel = np.abs(_db(th) - _db(level))
    inside = np.nonzero(rel <= BURN_IN_DB)[0]
    burn_in = int(inside[0]) if inside.size else len(th) - window

    gap = np.abs(_db(mc) - _db(th))
    ripple = detect_ripple_period(th[burn_in:])
    return ComparisonReport(
        steady_state_gap_db=float(gap[tail].mean()),
        max_transient_gap_db=float(gap[burn_in:].max()),
        burn_in=burn_in,
        window=window,
        ripple_period_detected=ripple,
        theory_steady_db=float(_db(th[tail].mean())),
        mc_steady_db=float(_db(mc[tail].mean())),
        diverged_theory=False,
        diverged_mc=False,
    )


# ---------------------------------------------------------------------------
# experiment driver


def default_workers():
    """Worker-count default, overridable through FCLMS_WORKERS."""
    try:
        return max(1, int(os.environ.get("FCLMS_WORKERS", "1")))
    except ValueError:
        return 1


def resolve_spec(name_or_path):
    """Builtin name or path to a spec file -> ExperimentSpec."""
    builtins = builtin_specs()
    if name_or_path in builtins:
        return builtins[name_or_path]
    path = Path(name_or_path)
    if path.exists():
        return load_spec(path)
    raise ConfigError(f"{name_or_path!r} is neither a builtin name nor a "
                      f"spec file; builtins: {', '.join(sorted(builtins))}")


def run_experiment(spec, runs=None, horizon=None, master_seed=None,
                   workers=None, out_prefix=None, theory_model=None,
                   with_mc=True):
    """Run theory and (optionally) Monte Carlo for a spec and compare.

    Keyword overrides take precedence over the spec's stored values. When
    ``out_prefix`` is given, writes ``<out_prefix>.csv``. The CSV theory
    column holds the general model when both models are requested.
    """
    runs = spec.runs if runs is None else runs
    hor = horizon if horizon is not None else spec.horizon
    if hor is None:
        hor = default_horizon(spec.network)
    seed = spec.master_seed if master_seed is None else master_seed
    model = spec.theory_model if theory_model is None else theory_model
    workers = default_workers() if workers is None else workers
    if out_prefix is None:
        out_prefix = spec.out_prefix

    models = ("general", "slow") if model == "both" else (model,)
    theory = {m: theory_trajectory(spec.network, hor, model=m) for m in models}
    primary = theory["general"] if "general" in theory else theory[models[0]]

    mc = None
    if with_mc:
        mc = run_monte_carlo(spec.network, runs=runs, horizon=hor,
                             master_seed=seed, workers=workers)
        report = compare_curves(spec.network, primary["msd"], mc.msd, hor,
                                diverged_theory=primary["diverged"],
                                diverged_mc=mc.any_diverged)
    else:
        report = compare_curves(spec.network, primary["msd"], primary["msd"],
                                hor, diverged_theory=primary["diverged"])

    csv_path = None
    if out_prefix is not None:
        csv_path = str(Path(f"{out_prefix}.csv"))
        n = np.arange(hor + 1)
        mc_msd = mc.msd if mc is not None else np.full(hor + 1, np.nan)
        dev = (mc_mean_dev_norm(mc) if mc is not None
               else primary["mean_dev_norm"])
        write_csv(csv_path, n, primary["msd"], mc_msd, dev)

    return ExperimentResult(spec=spec, horizon=hor, mc=mc, theory=theory,
                            report=report, csv_path=csv_path)


def mc_mean_dev_norm(mc):
    return np.linalg.norm(mc.mean_deviation, axis=1)


def compare_stability(spec, multipliers, base="isolated", runs=0,
                      horizon=30_000, master_seed=777):
    """Sweep step sizes as multiples of a stability bound and compare the
    closed-form prediction against the slow-model recursion (and optionally
    Monte Carlo).

    base "isolated": each node's normalized step is the multiplier times its
    own single-node bound. base "network": all nodes share the multiplier
    times the network-wide bound for the spec's fusion weights. DLMS node
    steps are de-normalized by each node's mean input power; DNLMS steps are
    used as-is (the algorithm normalizes internally). The prediction is
    exact for constant power profiles and uses time-averaged powers
    otherwise.
    """
    network = spec.network if isinstance(spec, ExperimentSpec) else spec
    n_taps = network.filter_length
    c = network.weights()
    psi = network.kurtoses()
    normalized = network.algorithm == "dnlms"
    if base == "network":
        d = DesignInput(n_nodes=network.n_nodes, filter_length=n_taps,
                        kurtoses=tuple(float(p) for p in psi),
                        weights=tuple(float(w) for w in c))
        bound = (dnlms_stability_bound(d) if normalized
                 else dlms_stability_bound(d))
        bounds = np.full(network.n_nodes, bound)
    elif base == "isolated":
        bounds = 2.0 / (n_taps + psi - 1.0)
        if normalized:
            bounds = n_taps * bounds
    else:
        raise ValueError(f"unknown base {base!r}")

    rows = []
    for mult in multipliers:
        nodes = []
        for node, b in zip(network.nodes, bounds):
            step = mult * b
            if not normalized:
                step /= mean_power(node.profile)
            nodes.append(replace(node, step=step))
        scaled = replace(network, nodes=tuple(nodes))
        lam = mult * bounds / (n_taps if normalized else 1.0)
        s1 = float(c @ lam)
        a_wss = 1.0 - 2.0 * s1 + float(
            (c ** 2 * lam ** 2) @ (psi + n_taps - 2.0)) + s1 * s1
        out = theory_trajectory(scaled, horizon, model="slow")
        mc_div = None
        if runs > 0:
            mc = run_monte_carlo(scaled, runs=runs,
                                 horizon=min(horizon, 4000),
                                 master_seed=master_seed)
            mc_div = mc.any_diverged
        rows.append(StabilityRow(multiplier=float(mult),
                                 predicted_stable=bool(a_wss < 1.0),
                                 theory_diverged=out["diverged"],
                                 mc_diverged=mc_div))
    return rows


# ---------------------------------------------------------------------------
# CSV


def write_csv(path, n, msd_theory, msd_mc, mean_dev_norm):
    cols = [np.asarray(msd_theory, dtype=float),
            np.asarray(msd_mc, dtype=float),
            np.asarray(mean_dev_norm, dtype=float)]
    n = np.asarray(n)
    if any(c.shape != n.shape for c in cols):
        raise ValueError("column length mismatch")
    th, mc, dev = cols
    th_db, mc_db = _db(th), _db(mc)
    lines = [CSV_HEADER]
    for i in range(n.size):
        lines.append(",".join((
            str(int(n[i])),
            repr(float(th[i])), repr(float(mc[i])),
            repr(float(th_db[i])), repr(float(mc_db[i])),
            repr(float(dev[i])),
        )))
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path):
    """Read a harness CSV back into a dict of float arrays keyed by column."""
    lines = Path(path).read_text().strip().split("\n")
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError(f"{path}: expected header {CSV_HEADER!r}")
    names = CSV_HEADER.split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    if any(len(r) != len(names) for r in rows):
        raise ConfigError(f"{path}: ragged rows")
    out = {}
    for k, name in enumerate(names):
        vals = [r[k] for r in rows]
        out[name] = (np.array([int(v) for v in vals]) if name == "n"
                     else np.array([float(v) for v in vals]))
    return out


# ---------------------------------------------------------------------------
# spec files


_DIST_NAMES = {
    "gaussian": Gaussian,
    "uniform": Uniform,
    "laplacian": Laplacian,
    "gaussian_fifth_power": GaussianFifthPower,
}


def _parse_dist(value, where):
    if isinstance(value, str):
        cls = _DIST_NAMES.get(value.lower())
        if cls is None:
            raise ConfigError(f"{where}: unknown distribution {value!r}")
        return cls()
    if isinstance(value, dict):
        kind = value.get("kind")
        if kind == "three_point":
            try:
                return ThreePoint(float(value["psi"]))
            except KeyError:
                raise ConfigError(f"{where}: three_point needs psi") from None
            except ValueError as e:
                raise ConfigError(f"{where}: {e}") from None
        if isinstance(kind, str) and kind.lower() in _DIST_NAMES:
            return _DIST_NAMES[kind.lower()]()
        raise ConfigError(f"{where}: unknown distribution kind {kind!r}")
    raise ConfigError(f"{where}: distribution must be a name or mapping")


def _parse_profile(value, where):
    if not isinstance(value, dict) or "kind" not in value:
        raise ConfigError(f"{where}: profile must be a mapping with a kind")
    kind = str(value["kind"]).lower()
    try:
        if kind == "sinusoidal":
            if "omega" in value:
                omega = float(value["omega"])
            elif "period" in value:
                omega = 2.0 * math.pi / float(value["period"])
            else:
                raise ConfigError(f"{where}: sinusoidal needs omega or period")
            return SinusoidalProfile(beta=float(value.get("beta", 1.0)),
                                     omega=omega)
        if kind == "pulsed":
            return PulsedProfile(p1=float(value["p1"]), p2=float(value["p2"]),
                                 period=int(value["period"]),
                                 duty=float(value["duty"]))
        if kind == "constant":
            return ConstantProfile(power=float(value["power"]))
    except ConfigError:
        raise
    except KeyError as e:
        raise ConfigError(f"{where}: missing profile field {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from None
    raise ConfigError(f"{where}: unknown profile kind {kind!r}")


def _get(data, key, where, cast=None, default=KeyError):
    if key not in data:
        if default is KeyError:
            raise ConfigError(f"{where}: missing required field {key!r}")
        return default
    value = data[key]
    if cast is None:
        return value
    try:
        return cast(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.{key}: cannot interpret {value!r}") from None


def spec_from_dict(data, name="experiment"):
    if not isinstance(data, dict):
        raise ConfigError("spec root must be a mapping")
    where = "spec"
    n_taps = _get(data, "filter_length", where, int)
    raw_nodes = _get(data, "nodes", where)
    if not isinstance(raw_nodes, list) or not raw_nodes:
        raise ConfigError("spec.nodes: need a non-empty list")
    nodes = []
    for i, nd in enumerate(raw_nodes):
        w = f"nodes[{i}]"
        if not isinstance(nd, dict):
            raise ConfigError(f"{w}: node must be a mapping")
        try:
            nodes.append(NodeConfig(
                weight=_get(nd, "weight", w, float),
                step=_get(nd, "step", w, float),
                noise_power=_get(nd, "noise_power", w, float),
                profile=_parse_profile(_get(nd, "profile", w), f"{w}.profile"),
                dist=_parse_dist(_get(nd, "distribution", w), f"{w}.distribution"),
            ))
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"{w}: {e}") from None

    raw_plant = _get(data, "plant", where)
    if not isinstance(raw_plant, dict):
        raise ConfigError("spec.plant: must be a mapping")
    sigma_q2 = _get(raw_plant, "sigma_q2", "plant", float)
    h0_raw = raw_plant.get("h0", {"kind": "two_sided_exponential", "decay": 0.5})
    if isinstance(h0_raw, list):
        h0 = tuple(float(v) for v in h0_raw)
    elif isinstance(h0_raw, dict) and h0_raw.get("kind") == "two_sided_exponential":
        h0 = tuple(two_sided_exponential(n_taps, float(h0_raw.get("decay", 0.5))))
    else:
        raise ConfigError("plant.h0: list of taps or "
                          "{kind: two_sided_exponential, decay: d}")
    try:
        plant = PlantModel(n_taps, sigma_q2, h0)
        network = NetworkConfig(
            nodes=tuple(nodes),
            filter_length=n_taps,
            plant=plant,
            algorithm=str(data.get("algorithm", "dlms")).lower(),
            strategy=str(data.get("strategy", "cta")).lower(),
            nlms_epsilon=_get(data, "nlms_epsilon", where, float, 0.0),
        )
        return ExperimentSpec(
            name=str(data.get("name", name)),
            network=network,
            runs=_get(data, "runs", where, int, 100),
            horizon=_get(data, "horizon", where, int, None)
            if data.get("horizon") is not None else None,
            master_seed=_get(data, "master_seed", where, int, 12345),
            theory_model=str(data.get("theory_model", "general")).lower(),
            out_prefix=(str(data["out_prefix"])
                        if data.get("out_prefix") is not None else None),
            description=str(data.get("description", "")),
        )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"spec: {e}") from None


def load_spec(path):
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from None
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse {path}: {e}") from None
    return spec_from_dict(data, name=path.stem)


# ---------------------------------------------------------------------------
# builtin catalog


def _standard_nodes(algorithm, dists, betas, noise=1e-6, step_scale=1.0):
    """Ten-node reference network: sinusoidal powers with octave-spaced
    frequencies, uniform fusion weights, steps at the isolated-node
    reference value scaled by ``step_scale``."""
    n_taps = 32
    nodes = []
    for j in range(10):
        psi = kurtosis_of(dists[j])
        if algorithm == "dlms":
            step = step_scale / (betas[j] * (n_taps + psi - 1.0))
        else:
            step = step_scale * n_taps / (n_taps + psi - 1.0)
        nodes.append(NodeConfig(
            weight=0.1,
            step=step,
            noise_power=noise,
            profile=SinusoidalProfile(beta=betas[j],
                                      omega=2.0 * math.pi / 2.0 ** (j + 1)),
            dist=dists[j],
        ))
    return nodes


def _standard_spec(name, algorithm, dists, betas, step_scale, seed,
                   description):
    n_taps = 32
    plant = PlantModel(n_taps, 64e-8 / n_taps, tuple(two_sided_exponential(n_taps)))
    network = NetworkConfig(
        nodes=tuple(_standard_nodes(algorithm, dists, betas,
                                    step_scale=step_scale)),
        filter_length=n_taps, plant=plant, algorithm=algorithm)
    return ExperimentSpec(name=name, network=network, runs=100,
                          master_seed=seed, description=description)


def builtin_specs():
    """Catalog of named reference experiments (10 nodes, 32 taps, sinusoidal
    powers, random-walk plant)."""
    uni = [Uniform()] * 10
    lap = [Laplacian()] * 10
    g5 = [GaussianFifthPower()] * 10
    mixed = [Uniform()] * 4 + [Laplacian()] * 3 + [GaussianFifthPower()] * 3
    ones = [1.0] * 10
    mixed_betas = [1.0] * 5 + [0.1] * 5

    specs = [
        _standard_spec("fig3a", "dlms", uni, ones, 1.0, 41003,
                       "uniform inputs, reference step"),
        _standard_spec("fig3b", "dlms", uni, ones, 4.0, 41004,
                       "uniform inputs, 4x reference step"),
        _standard_spec("fig4", "dlms", lap, ones, 1.0, 41005,
                       "laplacian inputs, reference step"),
        _standard_spec("fig5", "dlms", g5, ones, 1.0, 41006,
                       "fifth-power-gaussian inputs, reference step"),
        _standard_spec("fig6a", "dnlms", uni, ones, 1.0, 41007,
                       "normalized, uniform inputs, reference step"),
        _standard_spec("fig6b", "dnlms", uni, ones, 4.0, 41008,
                       "normalized, uniform inputs, 4x reference step"),
        _standard_spec("fig7", "dnlms", lap, ones, 1.0, 41009,
                       "normalized, laplacian inputs, reference step"),
        _standard_spec("fig8", "dnlms", g5, ones, 1.0, 41010,
                       "normalized, fifth-power-gaussian inputs"),
        _standard_spec("fig9", "dlms", mixed, mixed_betas, 1.0, 41011,
                       "mixed distributions and powers"),
        _standard_spec("fig10", "dnlms", mixed, mixed_betas, 1.0, 41012,
                       "normalized, mixed distributions and powers"),
    ]
    return {s.name: s for s in specs}
