"""Replicated end-to-end simulations and distributional diagnostics.

One replication samples a cloud, builds the threshold graph, assembles the
complex up to k_max, applies the downward-closed thinning, and records the
region-restricted face counts and Euler characteristic.  Replications are
independent work items seeded by hash(master_seed, index), so the results
are bit-identical for any worker count.  On top of the replication table sit
the normality diagnostics: z-score normalization (empirical or predicted),
the Kolmogorov-Smirnov distance to the standard normal, sample moments, and
the variance-ratio comparisons against the vertex count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtr

from .complexes import build_cech, build_rips, euler_characteristic, face_counts, soft_thin
from .constants import log_growth_quantity, unit_ball_volume
from .densities import Density, UniformBox, density_from_config
from .errors import ConfigurationError, DegenerateSampleError, InputError, MemoryGuardError
from .geometry import ALL_SPACE, RegionSpec, build_graph, region_from_config
from .point_process import sample_binomial, sample_poisson
from .rng import REPLICATION_STREAM, derive_seed

DEFAULT_FACE_CAP = 5e7


@dataclass(frozen=True)
class ExperimentConfig:
    model: str  # "rips" or "cech"
    process: str  # "binomial" or "poisson"
    n: float  # n for binomial, intensity for poisson
    d: int
    k_max: int
    replications: int
    master_seed: int
    statistic: tuple  # ("fk", k) or ("chi",)
    density: Density = None
    r: float | None = None
    r_exponent: float | None = None  # r^d = n^(-a)
    rho: tuple | None = None
    rho_exponents: tuple | None = None  # p_i = n^(-b_i)
    region: RegionSpec = ALL_SPACE
    max_predicted_faces: float = DEFAULT_FACE_CAP

    def __post_init__(self):
        if self.model not in ("rips", "cech"):
            raise ConfigurationError(f"model must be 'rips' or 'cech', got {self.model!r}")
        if self.process not in ("binomial", "poisson"):
            raise ConfigurationError(f"process must be 'binomial' or 'poisson', got {self.process!r}")
        if self.n < 1 or self.d < 1 or self.k_max < 0:
            raise ConfigurationError("require n >= 1, d >= 1, k_max >= 0")
        if self.replications < 2:
            raise ConfigurationError("require at least 2 replications")
        if (self.r is None) == (self.r_exponent is None):
            raise ConfigurationError("exactly one of r / r_exponent must be given")
        if self.rho is not None and self.rho_exponents is not None:
            raise ConfigurationError("give at most one of rho / rho_exponents")
        if self.statistic[0] == "fk":
            if len(self.statistic) != 2 or not 0 <= self.statistic[1] <= self.k_max:
                raise ConfigurationError("statistic ('fk', k) requires 0 <= k <= k_max")
        elif self.statistic[0] != "chi" or len(self.statistic) != 1:
            raise ConfigurationError("statistic must be ('fk', k) or ('chi',)")
        density = self.density
        if density is None:
            density = UniformBox(lo=[0.0] * self.d, hi=[1.0] * self.d)
            object.__setattr__(self, "density", density)
        if density.dimension != self.d:
            raise ConfigurationError(f"density dimension {density.dimension} != d={self.d}")
        if self.rho is not None:
            rho = tuple(float(p) for p in self.rho)
            if any(not 0.0 <= p <= 1.0 for p in rho):
                raise ConfigurationError("retention probabilities must lie in [0, 1]")
            object.__setattr__(self, "rho", rho)

    @property
    def radius(self) -> float:
        if self.r is not None:
            return float(self.r)
        return float(self.n ** (-self.r_exponent / self.d))

    @property
    def retention(self) -> tuple:
        if self.rho is not None:
            rho = self.rho
        elif self.rho_exponents is not None:
            rho = tuple(float(self.n ** (-b)) for b in self.rho_exponents)
        else:
            rho = (1.0,) * max(self.k_max, 1)
        if len(rho) < self.k_max:
            raise ConfigurationError(
                f"retention vector of length {len(rho)} too short for k_max={self.k_max}"
            )
        if any(not 0.0 <= p <= 1.0 for p in rho):
            raise ConfigurationError("retention probabilities must lie in [0, 1] after rule evaluation")
        return rho

    def to_config(self) -> dict:
        out = {
            "model": self.model,
            "process": self.process,
            "n": self.n,
            "d": self.d,
            "k_max": self.k_max,
            "replications": self.replications,
            "master_seed": self.master_seed,
            "statistic": {"kind": self.statistic[0]},
            "density": self.density.to_config(),
            "region": self.region.to_config(),
            "max_predicted_faces": self.max_predicted_faces,
        }
        if self.statistic[0] == "fk":
            out["statistic"]["k"] = self.statistic[1]
        if self.r is not None:
            out["r"] = self.r
        else:
            out["r_exponent"] = self.r_exponent
        if self.rho is not None:
            out["rho"] = list(self.rho)
        if self.rho_exponents is not None:
            out["rho_exponents"] = list(self.rho_exponents)
        return out


_CONFIG_KEYS = {
    "model", "process", "n", "d", "k_max", "replications", "master_seed",
    "statistic", "density", "region", "r", "r_exponent", "rho",
    "rho_exponents", "max_predicted_faces",
}
_REQUIRED_KEYS = {"model", "process", "n", "d", "k_max", "replications", "master_seed", "statistic"}


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Parse a JSON experiment description, rejecting unknown keys."""
    if not isinstance(raw, dict):
        raise ConfigurationError("experiment config must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    missing = _REQUIRED_KEYS - set(raw)
    if missing:
        raise ConfigurationError(f"missing config keys: {sorted(missing)}")
    stat_raw = raw["statistic"]
    if not isinstance(stat_raw, dict) or "kind" not in stat_raw:
        raise ConfigurationError("statistic must be an object with a 'kind'")
    if stat_raw["kind"] == "fk":
        if set(stat_raw) != {"kind", "k"}:
            raise ConfigurationError("statistic 'fk' takes exactly the field 'k'")
        statistic = ("fk", int(stat_raw["k"]))
    elif stat_raw["kind"] == "chi":
        if set(stat_raw) != {"kind"}:
            raise ConfigurationError("statistic 'chi' takes no extra fields")
        statistic = ("chi",)
    else:
        raise ConfigurationError(f"unknown statistic kind {stat_raw['kind']!r}")
    density = density_from_config(raw["density"]) if "density" in raw else None
    region = region_from_config(raw["region"]) if "region" in raw else ALL_SPACE
    return ExperimentConfig(
        model=raw["model"],
        process=raw["process"],
        n=float(raw["n"]),
        d=int(raw["d"]),
        k_max=int(raw["k_max"]),
        replications=int(raw["replications"]),
        master_seed=int(raw["master_seed"]),
        statistic=statistic,
        density=density,
        r=float(raw["r"]) if "r" in raw else None,
        r_exponent=float(raw["r_exponent"]) if "r_exponent" in raw else None,
        rho=tuple(raw["rho"]) if "rho" in raw else None,
        rho_exponents=tuple(raw["rho_exponents"]) if "rho_exponents" in raw else None,
        max_predicted_faces=float(raw.get("max_predicted_faces", DEFAULT_FACE_CAP)),
    )


@dataclass(frozen=True)
class ReplicationResult:
    index: int
    f: tuple  # region-restricted face counts by dimension
    chi: int
    n_points: int
    seconds: float

    def __post_init__(self):
        if self.chi != sum((-1) ** k * fk for k, fk in enumerate(self.f)):
            raise InputError("chi must equal the alternating sum of the face counts")


def predicted_face_bound(config: ExperimentConfig) -> float:
    """Crude upper bound on the expected total face count, for the memory guard.

    E[#(k+1)-cliques] <= n^{k+1} (theta_d r^d ||f||_inf)^k / (k+1)! with
    theta_d the unit-ball volume; evaluated in log space.
    """
    n = config.n + 6.0 * math.sqrt(config.n) if config.process == "poisson" else config.n
    r = config.radius
    log_unit = math.log(unit_ball_volume(config.d)) + config.d * math.log(r) + math.log(
        config.density.sup_norm
    )
    total = 0.0
    for k in range(config.k_max + 1):
        log_term = (k + 1) * math.log(n) + k * log_unit - math.lgamma(k + 2)
        total += math.exp(min(log_term, 700.0))
    return total


def replicate_once(config: ExperimentConfig, index: int) -> ReplicationResult:
    started = time.perf_counter()
    seed = derive_seed(config.master_seed, REPLICATION_STREAM, index)
    if config.process == "binomial":
        cloud = sample_binomial(int(config.n), config.density, seed)
    else:
        cloud = sample_poisson(config.n, config.density, seed)
    r = config.radius
    if config.model == "rips":
        complex_ = build_rips(build_graph(cloud, r, seed=seed), config.k_max)
    else:
        complex_ = build_cech(cloud, r, config.k_max)
    complex_ = soft_thin(complex_, config.retention, seed)
    counts = face_counts(complex_, config.region)
    return ReplicationResult(
        index=index,
        f=counts.f,
        chi=euler_characteristic(counts),
        n_points=len(cloud),
        seconds=time.perf_counter() - started,
    )


def run_experiment(config: ExperimentConfig, threads: int | None = None) -> list[ReplicationResult]:
    """All replications, parallel over a thread pool, sorted by index."""
    bound = predicted_face_bound(config)
    if bound > config.max_predicted_faces:
        raise MemoryGuardError(
            f"predicted face count {bound:.3g} exceeds cap {config.max_predicted_faces:.3g}; "
            "reduce n, r, or k_max, or raise max_predicted_faces"
        )
    indices = range(config.replications)
    if threads is not None and threads <= 1:
        results = [replicate_once(config, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda i: replicate_once(config, i), indices))
    return sorted(results, key=lambda res: res.index)


def statistic_samples(results: list[ReplicationResult], config: ExperimentConfig) -> np.ndarray:
    if config.statistic[0] == "fk":
        k = config.statistic[1]
        return np.asarray([res.f[k] for res in results], dtype=np.float64)
    return np.asarray([res.chi for res in results], dtype=np.float64)


def normalize(samples, mode: str = "empirical", mean: float | None = None,
              var: float | None = None) -> np.ndarray:
    """z-scores (x - center)/sqrt(scale), empirical moments or supplied ones."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size < 2:
        raise InputError("normalization requires at least 2 samples")
    if mode == "empirical":
        center = samples.mean()
        scale = samples.var()  # population normalization: z-scores have unit variance
        if scale == 0.0:
            raise DegenerateSampleError("all samples identical; empirical variance is zero")
    elif mode == "predicted":
        if mean is None or var is None or not var > 0:
            raise InputError("predicted mode requires mean and positive var")
        center, scale = mean, var
    else:
        raise InputError(f"unknown normalization mode {mode!r}")
    return (samples - center) / math.sqrt(scale)


def ks_statistic(z) -> float:
    """Sup distance between the empirical CDF of z and the standard normal CDF."""
    z = np.sort(np.asarray(z, dtype=np.float64))
    if z.size == 0:
        raise InputError("KS statistic of an empty sample is undefined")
    count = z.size
    cdf = ndtr(z)
    upper = np.arange(1, count + 1) / count - cdf
    lower = cdf - np.arange(0, count) / count
    return float(max(upper.max(), lower.max()))


def kolmogorov_threshold(count: int, level: float = 0.01) -> float:
    """Asymptotic critical value c(alpha)/sqrt(R); c(0.01) = 1.63."""
    critical = {0.10: 1.22, 0.05: 1.36, 0.01: 1.63}.get(level)
    if critical is None:
        raise InputError(f"no tabulated critical value for level {level}")
    return critical / math.sqrt(count)


def moment_diagnostics(z) -> dict:
    """Sample skewness, excess kurtosis, and the Jarque-Bera statistic."""
    z = np.asarray(z, dtype=np.float64)
    if z.size < 2:
        raise InputError("moment diagnostics require at least 2 samples")
    centered = z - z.mean()
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        raise DegenerateSampleError("all samples identical; moments are degenerate")
    skew = float(np.mean(centered**3) / m2**1.5)
    kurt = float(np.mean(centered**4) / m2**2 - 3.0)
    jb = z.size / 6.0 * (skew**2 + kurt**2 / 4.0)
    return {"skewness": skew, "excess_kurtosis": kurt, "jarque_bera": jb}


def variance_ratio_report(results: list[ReplicationResult], config: ExperimentConfig) -> dict:
    """Empirical covariance matrix of (f_0..f_kmax, chi) and variance ratios."""
    table = np.asarray([list(res.f) + [res.chi] for res in results], dtype=np.float64)
    cov = np.cov(table, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    var_f0 = cov[0, 0]
    chi_idx = table.shape[1] - 1

    def ratio(num: float) -> float:
        if num == 0.0:
            return 0.0
        return float(num / var_f0) if var_f0 > 0 else math.nan

    out = {
        "covariance": cov.tolist(),
        "var_f0": float(var_f0),
        "var_chi_over_var_f0": ratio(cov[chi_idx, chi_idx]),
    }
    for k in range(1, config.k_max + 1):
        out[f"var_f{k}_over_var_f0"] = ratio(cov[k, k])
        out[f"cov_f{k}_f0_over_var_f0"] = ratio(cov[k, 0])
    return out


@dataclass(frozen=True)
class CltReport:
    sample_size: int
    empirical_mean: float
    empirical_variance: float
    predicted_mean: float | None
    predicted_variance: float | None
    normalization: str
    z_scores: tuple = field(repr=False)
    ks_distance: float = 0.0
    skewness: float = 0.0
    excess_kurtosis: float = 0.0
    jarque_bera: float = 0.0
    variance_ratios: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "sample_size": self.sample_size,
            "empirical_mean": self.empirical_mean,
            "empirical_variance": self.empirical_variance,
            "predicted_mean": self.predicted_mean,
            "predicted_variance": self.predicted_variance,
            "normalization": self.normalization,
            "ks_distance": self.ks_distance,
            "skewness": self.skewness,
            "excess_kurtosis": self.excess_kurtosis,
            "jarque_bera": self.jarque_bera,
            "variance_ratios": self.variance_ratios,
            "z_scores": list(self.z_scores),
        }


def clt_report(results: list[ReplicationResult], config: ExperimentConfig,
               predicted_mean: float | None = None, predicted_variance: float | None = None,
               normalization: str = "empirical") -> CltReport:
    samples = statistic_samples(results, config)
    try:
        if normalization == "empirical":
            z = normalize(samples, "empirical")
        else:
            z = normalize(samples, "predicted", mean=predicted_mean, var=predicted_variance)
        moments = moment_diagnostics(z)
    except DegenerateSampleError:
        # constant statistic: report the degenerate sample instead of failing
        return CltReport(
            sample_size=len(samples),
            empirical_mean=float(samples.mean()),
            empirical_variance=0.0,
            predicted_mean=predicted_mean,
            predicted_variance=predicted_variance,
            normalization=normalization,
            z_scores=(),
            ks_distance=math.nan,
            skewness=math.nan,
            excess_kurtosis=math.nan,
            jarque_bera=math.nan,
            variance_ratios=variance_ratio_report(results, config),
        )
    return CltReport(
        sample_size=len(samples),
        empirical_mean=float(samples.mean()),
        empirical_variance=float(samples.var(ddof=1)),
        predicted_mean=predicted_mean,
        predicted_variance=predicted_variance,
        normalization=normalization,
        z_scores=tuple(float(v) for v in z),
        ks_distance=ks_statistic(z),
        skewness=moments["skewness"],
        excess_kurtosis=moments["excess_kurtosis"],
        jarque_bera=moments["jarque_bera"],
        variance_ratios=variance_ratio_report(results, config),
    )


def depoisson_compare(config: ExperimentConfig, threads: int | None = None) -> dict:
    """Run the same setup with a fixed-n and a Poisson vertex set, side by side.

    Both runs estimate the same asymptotic mean; the report carries each
    empirical mean, variance, and KS distance plus the mean difference in
    units of its joint standard error.
    """
    reports = {}
    samples = {}
    for process in ("binomial", "poisson"):
        cfg = replace(config, process=process)
        results = run_experiment(cfg, threads=threads)
        reports[process] = clt_report(results, cfg)
        samples[process] = statistic_samples(results, cfg)
    mean_diff = float(samples["binomial"].mean() - samples["poisson"].mean())
    joint_se = math.sqrt(
        samples["binomial"].var(ddof=1) / samples["binomial"].size
        + samples["poisson"].var(ddof=1) / samples["poisson"].size
    )
    return {
        "binomial": reports["binomial"],
        "poisson": reports["poisson"],
        "mean_difference": mean_diff,
        "joint_stderr": joint_se,
        "mean_difference_sigmas": mean_diff / joint_se if joint_se > 0 else math.inf,
    }
