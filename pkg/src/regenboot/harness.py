"""End-to-end experiments: CLT validation, tail/moment bound checks, coupling checks.

Every experiment is driven by an :class:`ExperimentConfig` (parsed from a JSON
file by the CLI) and a single master seed.  Sub-experiments derive disjoint
random streams via :meth:`SeedSpec.child`, and Monte Carlo replicates within a
sub-experiment use ``stream_id = replicate index``, so re-running any
experiment with the same config and seed reproduces its output files byte for
byte regardless of thread count.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .blocks import (
    block_statistics,
    extract_blocks,
    regeneration_diagnostics,
    return_times,
)
from .bootstrap import bootstrap_distribution
from .chains import (
    FiniteOrderKernel,
    GeometricMixtureKernel,
    Kernel,
    Observable,
    continuity_rate,
    delta_lower_bound,
    hypothesis_report,
    mixing_exponent,
)
from .errors import ConfigError, InsufficientReturnsError, ResourceCapError
from .markov import (
    canonical_from_kernel,
    canonical_from_trajectory,
    coupling_discrepancy_profile,
    markov_mean,
)
from .rng import SeedSpec
from .schedule import admissibility_window, block_count
from .simulate import default_burn_in, sample_infinite_order_trajectory, sample_markov_trajectory
from .stats import binomial_se, ks_distance, sample_skewness

# child-seed tags: one per purpose, so no two sub-experiments share a stream
TAG_TRAJECTORY = 1
TAG_BOOTSTRAP = 2
TAG_TAIL = 3
TAG_SCALING = 4
TAG_COUPLING = 5
TAG_ESTIMATION = 6

TRAJECTORY_CAP_DEFAULT = 2**31
VIOLATION_SE_MULTIPLIER = 4.0


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; the JSON schema is documented in the README."""

    kernel: dict
    observable: tuple
    k: int
    seed: int
    mode: str  # "markov" or "infinite"
    alpha: Optional[float] = None
    m: Optional[int] = None
    bootstrap_replicates: int = 2000
    replicates: int = 10000
    burn_in: Optional[int] = None
    lag_window: int = 50
    n: Optional[int] = None
    ks_threshold: float = 0.05
    trajectory_cap: int = TRAJECTORY_CAP_DEFAULT
    initial_length: Optional[int] = None
    estimation_length: int = 10**7
    t_grid: tuple = tuple(range(1, 11))
    moment_orders: tuple = (1, 2)
    m_grid: tuple = (100, 400, 1600)
    k_grid: tuple = (2, 4, 6)
    horizon: int = 16
    output_csv: Optional[str] = None
    output_json: Optional[str] = None
    threads: int = 1

    @staticmethod
    def from_dict(raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        known_kernel_keys = {"variant", "theta", "table", "order"}
        kernel = raw.get("kernel")
        if not isinstance(kernel, dict) or "variant" not in kernel:
            raise ConfigError("config needs a kernel object with a variant tag")
        if set(kernel) - known_kernel_keys:
            raise ConfigError(f"unknown kernel keys {sorted(set(kernel) - known_kernel_keys)}")
        observable = raw.get("observable")
        if not isinstance(observable, (list, tuple)) or len(observable) < 2:
            raise ConfigError("config needs an observable table with one value per symbol")
        try:
            k = int(raw["k"])
            seed = int(raw["seed"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"config needs integer k and seed: {exc}") from exc
        alpha = raw.get("alpha")
        m = raw.get("m")
        if (alpha is None) == (m is None):
            raise ConfigError("config needs exactly one of alpha or m")
        mode = raw.get("mode")
        if mode is None:
            mode = "markov" if kernel["variant"] == "finite_order" else "infinite"
        if mode not in ("markov", "infinite"):
            raise ConfigError(f"mode must be 'markov' or 'infinite', got {mode!r}")
        caps = raw.get("caps", {})
        if not isinstance(caps, dict):
            raise ConfigError("caps must be an object")
        output = raw.get("output", {})
        if not isinstance(output, dict):
            raise ConfigError("output must be an object")
        config = ExperimentConfig(
            kernel=dict(kernel),
            observable=tuple(float(v) for v in observable),
            k=k,
            seed=seed,
            mode=mode,
            alpha=None if alpha is None else float(alpha),
            m=None if m is None else int(m),
            bootstrap_replicates=int(raw.get("B", 2000)),
            replicates=int(raw.get("replicates", 10000)),
            burn_in=None if raw.get("burn_in") is None else int(raw["burn_in"]),
            lag_window=int(raw.get("lag_window", 50)),
            n=None if raw.get("n") is None else int(raw["n"]),
            ks_threshold=float(raw.get("ks_threshold", 0.05)),
            trajectory_cap=int(caps.get("trajectory", TRAJECTORY_CAP_DEFAULT)),
            initial_length=None if caps.get("initial_length") is None else int(caps["initial_length"]),
            estimation_length=int(caps.get("estimation_length", 10**7)),
            t_grid=tuple(int(t) for t in raw.get("t_grid", range(1, 11))),
            moment_orders=tuple(int(r) for r in raw.get("moment_orders", (1, 2))),
            m_grid=tuple(int(v) for v in raw.get("m_grid", (100, 400, 1600))),
            k_grid=tuple(int(v) for v in raw.get("k_grid", (2, 4, 6))),
            horizon=int(raw.get("horizon", 16)),
            output_csv=output.get("csv"),
            output_json=output.get("json"),
            threads=int(raw.get("threads", 1)),
        )
        config.validate()
        return config

    def validate(self) -> None:
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.bootstrap_replicates < 1 or self.replicates < 1:
            raise ConfigError("replicate counts must be >= 1")
        if self.m is not None and self.m < 1:
            raise ConfigError(f"m must be >= 1, got {self.m}")
        if self.alpha is not None and self.alpha <= 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if any(r > 4 for r in self.moment_orders):
            raise ConfigError("moment orders above 4 are not certified; use r <= 4")
        try:
            self.build_kernel()
            self.build_observable()
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid kernel or observable: {exc}") from exc
        if self.mode == "markov" and self.kernel["variant"] != "finite_order":
            raise ConfigError("markov mode needs a finite_order kernel (exact approximation)")

    def build_kernel(self) -> Kernel:
        variant = self.kernel["variant"]
        if variant == "finite_order":
            table = self.kernel.get("table")
            if table is None:
                raise ConfigError("finite_order kernel needs a table")
            rows = np.asarray(table, dtype=np.float64)
            order = int(self.kernel.get("order", 0))
            if order == 0:  # infer from the row count
                a = rows.shape[1]
                order = max(1, round(math.log(rows.shape[0], a)))
            return FiniteOrderKernel(order=order, table=rows)
        if variant == "geometric_mixture":
            if "theta" not in self.kernel or "table" not in self.kernel:
                raise ConfigError("geometric_mixture kernel needs theta and table")
            return GeometricMixtureKernel(theta=float(self.kernel["theta"]), base=self.kernel["table"])
        raise ConfigError(f"unknown kernel variant {variant!r}")

    def build_observable(self) -> Observable:
        f = Observable(self.observable)
        kernel = self.build_kernel()
        if len(self.observable) != kernel.alphabet_size:
            raise ConfigError("observable length must equal the alphabet size")
        return f

    def resolved_block_count(self) -> int:
        if self.m is not None:
            return self.m
        return block_count(self.alpha, self.k)

    def implied_alpha(self) -> float:
        if self.alpha is not None:
            return self.alpha
        return math.log(self.m) / self.k

    def echo(self) -> dict:
        out = asdict(self)
        out["observable"] = list(self.observable)
        for key in ("t_grid", "moment_orders", "m_grid", "k_grid"):
            out[key] = list(out[key])
        del out["threads"]  # execution metadata: must not change result bytes
        return out


# ---------------------------------------------------------------------------
# report


def _encode_float(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _decode_float(x):
    if x == "inf":
        return math.inf
    if x == "-inf":
        return -math.inf
    return x


def _encode(value):
    if isinstance(value, dict):
        return {k: _encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    return _encode_float(value)


def _decode(value):
    if isinstance(value, dict):
        return {k: _decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode(v) for v in value]
    return _decode_float(value)


@dataclass(frozen=True)
class ExperimentReport:
    """Everything needed to reproduce and judge one CLT experiment.

    ``wall_clock_seconds`` is measurement metadata: it is excluded from
    equality and from the serialized report so identical runs produce
    identical bytes.
    """

    config_echo: dict
    mode: str
    k: int
    m: int
    alpha: float
    window: dict
    hypothesis: dict
    trajectory_length: int
    statistics: dict
    ks_threshold: float
    ks_pass: bool
    diagnostics: dict
    seed: int
    wall_clock_seconds: float = field(default=0.0, compare=False)

    def to_json(self) -> str:
        payload = {
            "config": self.config_echo,
            "mode": self.mode,
            "k": self.k,
            "m": self.m,
            "alpha": self.alpha,
            "window": self.window,
            "hypothesis": self.hypothesis,
            "trajectory_length": self.trajectory_length,
            "statistics": self.statistics,
            "ks_threshold": self.ks_threshold,
            "ks_pass": self.ks_pass,
            "diagnostics": self.diagnostics,
            "seed": self.seed,
        }
        return json.dumps(_encode(payload), sort_keys=True, indent=2) + "\n"

    @staticmethod
    def from_json(text: str) -> "ExperimentReport":
        payload = _decode(json.loads(text))
        return ExperimentReport(
            config_echo=payload["config"],
            mode=payload["mode"],
            k=payload["k"],
            m=payload["m"],
            alpha=payload["alpha"],
            window=payload["window"],
            hypothesis=payload["hypothesis"],
            trajectory_length=payload["trajectory_length"],
            statistics=payload["statistics"],
            ks_threshold=payload["ks_threshold"],
            ks_pass=payload["ks_pass"],
            diagnostics=payload["diagnostics"],
            seed=payload["seed"],
        )


# ---------------------------------------------------------------------------
# trajectory growth


def grow_until_returns(sampler, k: int, m: int, initial_length: int, cap: int):
    """Regenerate deterministically with doubled length until m returns exist.

    ``sampler(n)`` must be a pure function of ``n`` (same seed each call).
    Returns ``(trajectory, return_times)`` or raises :class:`ResourceCapError`
    at the cap.
    """
    n = max(int(initial_length), k + 1)
    while True:
        trajectory = sampler(n)
        try:
            rt = return_times(trajectory, k, m)
            return trajectory, rt
        except InsufficientReturnsError:
            if n >= cap:
                raise ResourceCapError(
                    f"no {m} returns within the trajectory cap of {cap} symbols"
                )
            n = min(2 * n, cap)


def _default_initial_length(m: int, k: int, alphabet_size: int, cap: int) -> int:
    guess = 2 * m * alphabet_size ** min(k, 24)
    return int(min(max(4096, guess), cap))


def _decomposition_sampler(config: ExperimentConfig, seed: SeedSpec):
    """Sampler closure, exact mean (when known), and burn-in for the configured mode."""
    kernel = config.build_kernel()
    f = config.build_observable()
    if config.mode == "markov":
        approx = canonical_from_kernel(kernel, config.k)
        exact_mean = markov_mean(approx, f)

        def sampler(n: int):
            return sample_markov_trajectory(approx, n, seed)

        return sampler, exact_mean, kernel, f
    burn_in = config.burn_in if config.burn_in is not None else default_burn_in(kernel)

    def sampler(n: int):
        return sample_infinite_order_trajectory(kernel, n, burn_in, seed)

    return sampler, None, kernel, f


# ---------------------------------------------------------------------------
# experiments


def clt_experiment(config: ExperimentConfig) -> tuple:
    """Simulate, decompose into m blocks, bootstrap B statistics, compare to N(0,1).

    Markov mode samples the exact order-k approximation of the configured
    finite-order kernel (stationary start); infinite mode samples the chain
    itself after burn-in.  Returns ``(report, statistic_sample)``; raises
    :class:`DegenerateSampleError` when all blocks carry the same observable
    sum.
    """
    start = time.perf_counter()
    seed = SeedSpec(config.seed)
    m = config.resolved_block_count()
    sampler, exact_mean, kernel, f = _decomposition_sampler(config, seed.child(TAG_TRAJECTORY))
    initial = config.initial_length
    if initial is None:
        initial = _default_initial_length(m, config.k, kernel.alphabet_size, config.trajectory_cap)
    trajectory, rt = grow_until_returns(sampler, config.k, m, initial, config.trajectory_cap)
    blocks = extract_blocks(trajectory, rt)
    stats = block_statistics(blocks, f, mu=exact_mean)
    sample = bootstrap_distribution(
        blocks,
        stats.centered_sums,
        config.bootstrap_replicates,
        seed.child(TAG_BOOTSTRAP),
        f,
        threads=config.threads,
    )
    lindeberg, centering = regeneration_diagnostics(stats.centered_sums, stats.true_centered_sums)
    delta = delta_lower_bound(kernel)
    window = admissibility_window(delta, mixing_exponent(kernel), delta)
    alpha = config.implied_alpha()
    lag = min(config.lag_window, max(0, trajectory.size // 11 - 1))
    hypothesis = hypothesis_report(kernel, f, trajectory, lag_window=lag)
    distance = ks_distance(sample)
    report = ExperimentReport(
        config_echo=config.echo(),
        mode=config.mode,
        k=config.k,
        m=m,
        alpha=alpha,
        window={
            "lower": window.lower,
            "upper": window.upper,
            "strong_mixing_ok": window.strong_mixing_ok,
            "markov_lower": window.markov_lower,
            "contains_alpha": window.contains(alpha),
        },
        hypothesis={
            "delta": hypothesis.delta,
            "c": hypothesis.c,
            "sigma2_estimate": hypothesis.sigma2_estimate,
            "floor_ok": hypothesis.floor_ok,
            "mixing_ok": hypothesis.mixing_ok,
            "variance_ok": hypothesis.variance_ok,
        },
        trajectory_length=int(trajectory.size),
        statistics={
            "count": int(sample.size),
            "mean": float(sample.mean()),
            "sd": float(sample.std(ddof=1)),
            "skewness": sample_skewness(sample),
            "ks_distance": distance,
        },
        ks_threshold=config.ks_threshold,
        ks_pass=distance < config.ks_threshold,
        diagnostics={"lindeberg_ratio": lindeberg, "centering_ratio": centering},
        seed=config.seed,
        wall_clock_seconds=time.perf_counter() - start,
    )
    return report, sample


def _bound_row(label, empirical: float, se: float, bound: float) -> dict:
    return {
        "t": label,
        "empirical": empirical,
        "se": se,
        "bound": bound,
        "violation": empirical > bound + VIOLATION_SE_MULTIPLIER * se,
    }


def tail_and_moment_check(config: ExperimentConfig) -> dict:
    """Empirical block-length tail and moments against their closed-form bounds.

    Simulates one long run containing ``replicates`` excursion blocks of the
    initial k-string; block lengths are the tail/moment sample.  Tail rows
    compare P(D > t) with ``(1 - delta**k) ** floor(t/k)``; moment rows
    compare E(D**r) with ``r! * k**r * delta**(-k*r)``.  A violation flag
    fires only beyond 4 standard errors.
    """
    seed = SeedSpec(config.seed)
    m = config.replicates
    sampler, _, kernel, _f = _decomposition_sampler(config, seed.child(TAG_TAIL))
    if config.mode == "markov":
        delta = canonical_from_kernel(kernel, config.k).delta_k
    else:
        delta = delta_lower_bound(kernel)
    initial = config.initial_length
    if initial is None:
        initial = _default_initial_length(m, config.k, kernel.alphabet_size, config.trajectory_cap)
    trajectory, rt = grow_until_returns(sampler, config.k, m, initial, config.trajectory_cap)
    lengths = np.diff(rt).astype(np.float64)
    k = config.k
    tail_rows = []
    for t in config.t_grid:
        p_hat = float((lengths > t).mean())
        bound = (1.0 - delta**k) ** int(t // k)
        tail_rows.append(_bound_row(int(t), p_hat, binomial_se(p_hat, m), bound))
    moment_rows = []
    for r in config.moment_orders:
        powers = lengths**r
        est = float(powers.mean())
        se = float(powers.std(ddof=1) / math.sqrt(m))
        bound = math.factorial(r) * k**r * delta ** (-k * r)
        moment_rows.append(_bound_row(int(r), est, se, bound))
    return {
        "delta": delta,
        "k": k,
        "blocks": m,
        "tail_rows": tail_rows,
        "moment_rows": moment_rows,
        "any_violation": any(r["violation"] for r in tail_rows + moment_rows),
    }


def mean_scaling_check(config: ExperimentConfig) -> dict:
    """Scaled squared error of the segment-mean estimator along a block-count grid.

    For each m in the grid, ``replicates`` independent decompositions give a
    Monte Carlo estimate of ``m * E[(mu_hat - mu)**2]``; with an admissible
    schedule the row stays bounded (no upward trend).  Markov mode only, since
    it needs the exact stationary mean.
    """
    if config.mode != "markov":
        raise ConfigError("mean_scaling_check needs markov mode (exact mean available)")
    seed = SeedSpec(config.seed).child(TAG_SCALING)
    kernel = config.build_kernel()
    f = config.build_observable()
    approx = canonical_from_kernel(kernel, config.k)
    mu = markov_mean(approx, f)
    rows = []
    for j, m in enumerate(config.m_grid):
        errors = np.empty(config.replicates)
        initial = _default_initial_length(m, config.k, kernel.alphabet_size, config.trajectory_cap)
        for i in range(config.replicates):
            stream = seed.stream(j * 10**6 + i)

            def sampler(n: int, _stream=stream):
                return sample_markov_trajectory(approx, n, _stream)

            trajectory, rt = grow_until_returns(
                sampler, config.k, m, initial, config.trajectory_cap
            )
            blocks = extract_blocks(trajectory, rt)
            stats = block_statistics(blocks, f)
            errors[i] = (stats.segment_mean - mu) ** 2
        scaled = m * float(errors.mean())
        se = m * float(errors.std(ddof=1) / math.sqrt(config.replicates))
        rows.append({"m": int(m), "scaled_mse": scaled, "se": se})
    return {"mu": mu, "k": config.k, "rows": rows}


def coupling_check(config: ExperimentConfig) -> dict:
    """Coupling discrepancy rates against the continuity-rate bound along a k grid.

    Per k: the single-symbol disagreement rate of the maximal coupling between
    the chain and its order-k approximation (measured from a shared realized
    past) against ``min(1, |A|/2 * beta_k)``, plus the horizon-window any
    -discrepancy rate against ``horizon`` times that bound.  Finite-order
    sources use the exact approximation; geometric mixtures estimate it from a
    long trajectory.
    """
    seed = SeedSpec(config.seed)
    kernel = config.build_kernel()
    a = kernel.alphabet_size
    estimation_traj = None
    if isinstance(kernel, GeometricMixtureKernel):
        burn = config.burn_in if config.burn_in is not None else default_burn_in(kernel)
        estimation_traj = sample_infinite_order_trajectory(
            kernel, config.estimation_length, burn, seed.child(TAG_ESTIMATION)
        )
    burn_in = config.burn_in if config.burn_in is not None else default_burn_in(kernel)
    single_rows = []
    window_rows = []
    for k in config.k_grid:
        if estimation_traj is None:
            approx = canonical_from_kernel(kernel, k)
        else:
            approx = canonical_from_trajectory(estimation_traj, k, a)
        bound = min(1.0, 0.5 * a * continuity_rate(kernel, k))
        profile = coupling_discrepancy_profile(
            kernel,
            approx,
            n_steps=config.replicates,
            burn_in=max(burn_in, k),
            seed=seed.child(TAG_COUPLING).stream(k),
            horizon=config.horizon,
        )
        single_rows.append(
            _bound_row(int(k), profile["single_rate"], profile["single_se"], bound)
        )
        window_rows.append(
            _bound_row(
                int(k),
                profile["window_rate"],
                profile["window_se"],
                min(1.0, config.horizon * bound),
            )
        )
    return {
        "horizon": config.horizon,
        "steps": config.replicates,
        "single_rows": single_rows,
        "window_rows": window_rows,
        "any_violation": any(r["violation"] for r in single_rows + window_rows),
    }


# ---------------------------------------------------------------------------
# file output


def write_bound_rows_csv(path, rows) -> None:
    """Bound-check table: ``t,empirical,se,bound,violation``."""
    with open(path, "w", newline="") as fh:
        fh.write("t,empirical,se,bound,violation\n")
        for row in rows:
            fh.write(
                f"{row['t']},{float(row['empirical'])!r},{float(row['se'])!r},"
                f"{float(row['bound'])!r},{'true' if row['violation'] else 'false'}\n"
            )


def write_scaling_rows_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("m,scaled_mse,se\n")
        for row in rows:
            fh.write(f"{row['m']},{float(row['scaled_mse'])!r},{float(row['se'])!r}\n")


def write_trajectory_csv(path, trajectory) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("symbol\n")
        for s in trajectory:
            fh.write(f"{int(s)}\n")
