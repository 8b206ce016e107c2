"""Monte Carlo convolution of frequency and severity (loss distribution
approach) with 99.9% value-at-risk extraction.

Each trial draws an annual event count z from the frequency model,
draws z severities (in mEUR, after de-scaling), and sums them; the
capital is the percentile of the simulated annual losses, estimated by
linear interpolation between order statistics.

Reproducibility contract: trials are partitioned into fixed-size
chunks, each driven by its own counter-based Philox stream derived
from (seed, chunk index).  The annual-loss array therefore depends
only on (seed, trials) — never on the worker count or scheduling — and
the capital is bit-identical for 1 or many workers.

Convergence is judged by batch means: the annual losses are split into
``batch`` consecutive blocks, the percentile is taken per block, and
the run is flagged converged when the 95% half-width of the block
percentiles is below 1% of the capital.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dist import SeverityModel
from .fit import FitConfig, FitResult, fit_expn, scale_losses
from .tna import tna_test

__all__ = [
    "PoissonFreq",
    "NegativeBinomialFreq",
    "NormalApproxFreq",
    "FrequencyModel",
    "LdaConfig",
    "CapitalResult",
    "ModelComparison",
    "ComparisonRow",
    "annual_frequency",
    "run_lda",
    "compare_models",
    "percentile_vs_n",
    "parse_model_spec",
]

_TRIAL_CHUNK = 4096  # trials per RNG substream; fixed so results never depend on workers


@dataclass(frozen=True)
class PoissonFreq:
    """Annual event counts ~ Poisson(lam)."""

    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise ValueError(f"lam must be > 0, got {self.lam!r}")

    @property
    def mean(self) -> float:
        return self.lam

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.poisson(self.lam, size)


@dataclass(frozen=True)
class NegativeBinomialFreq:
    """Counts with variance = mean + mean^2 / dispersion (Poisson as dispersion -> inf)."""

    mean: float
    dispersion: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and self.mean > 0.0):
            raise ValueError(f"mean must be > 0, got {self.mean!r}")
        if not (math.isfinite(self.dispersion) and self.dispersion > 0.0):
            raise ValueError(f"dispersion must be > 0, got {self.dispersion!r}")

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        p = self.dispersion / (self.dispersion + self.mean)
        return rng.negative_binomial(self.dispersion, p, size)


@dataclass(frozen=True)
class NormalApproxFreq:
    """Large-lam Normal approximation; draws round half-up to nonnegative integers."""

    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise ValueError(f"lam must be > 0, got {self.lam!r}")

    @property
    def mean(self) -> float:
        return self.lam

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raw = rng.normal(self.lam, math.sqrt(self.lam), size)
        return np.maximum(np.floor(raw + 0.5), 0.0).astype(np.int64)


FrequencyModel = PoissonFreq | NegativeBinomialFreq | NormalApproxFreq


@dataclass(frozen=True)
class LdaConfig:
    """Simulation size, target percentile, seed, and batch-means blocks."""

    trials: int = 100_000
    percentile: float = 0.999
    seed: int = 0
    batch: int = 20

    def __post_init__(self):
        if self.trials < 1000:
            raise ValueError(f"trials must be >= 1000, got {self.trials}")
        if not (0.0 < self.percentile < 1.0):
            raise ValueError(f"percentile must lie in (0, 1), got {self.percentile}")
        if self.batch < 2:
            raise ValueError(f"batch must be >= 2, got {self.batch}")


@dataclass(frozen=True)
class CapitalResult:
    """Simulated capital (mEUR) with convergence diagnostics."""

    capital: float
    lam: float
    trials: int
    stderr_estimate: float
    converged: bool
    seed: int


def annual_frequency(loss_count: int, years: float) -> float:
    """Annual loss frequency: count divided by observation span."""
    if not (isinstance(loss_count, (int, np.integer)) and loss_count >= 1):
        raise ValueError(f"loss_count must be an integer >= 1, got {loss_count!r}")
    years = float(years)
    if not (math.isfinite(years) and years > 0.0):
        raise ValueError(f"years must be > 0, got {years!r}")
    return loss_count / years


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    # each chunk owns a disjoint 2^128 slice of the Philox counter space
    return np.random.Generator(np.random.Philox(key=seed, counter=chunk << 128))


def _simulate_chunk(severity: SeverityModel, freq, seed: int, chunk: int, size: int) -> np.ndarray:
    rng = _chunk_rng(seed, chunk)
    counts = np.asarray(freq.draw(rng, size), dtype=np.int64)
    total = int(counts.sum())
    draws = severity.sample(total, rng)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    with np.errstate(over="ignore"):  # overflow is caught by the isfinite guard
        sums = np.add.reduceat(np.concatenate((draws, [0.0])), starts)
    sums[counts == 0] = 0.0
    return sums


def _resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get("THINTAIL_THREADS", "1"))
    return max(1, workers)


def run_lda(
    severity: SeverityModel,
    freq: FrequencyModel,
    cfg: LdaConfig = LdaConfig(),
    workers: int | None = None,
) -> CapitalResult:
    """Simulate annual aggregate losses and return the capital percentile.

    ``workers`` threads split the fixed chunk grid; results are
    bit-identical for any worker count (default from THINTAIL_THREADS).
    """
    trials = int(cfg.trials)
    n_chunks = (trials + _TRIAL_CHUNK - 1) // _TRIAL_CHUNK
    sizes = [min(_TRIAL_CHUNK, trials - c * _TRIAL_CHUNK) for c in range(n_chunks)]
    annual = np.empty(trials, dtype=float)

    def fill(chunk: int):
        lo = chunk * _TRIAL_CHUNK
        annual[lo : lo + sizes[chunk]] = _simulate_chunk(
            severity, freq, cfg.seed, chunk, sizes[chunk]
        )

    n_workers = _resolve_workers(workers)
    if n_workers == 1:
        for chunk in range(n_chunks):
            fill(chunk)
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(fill, range(n_chunks)))

    if not np.isfinite(annual).all():
        raise RuntimeError("annual loss sums overflowed; check severity parameters")

    capital = float(np.quantile(annual, cfg.percentile))

    block_pcts = [
        float(np.quantile(block, cfg.percentile))
        for block in np.array_split(annual, cfg.batch)
    ]
    stderr = float(np.std(block_pcts, ddof=1) / math.sqrt(len(block_pcts)))
    half_width = 1.96 * stderr
    converged = half_width < 0.01 * capital if capital > 0.0 else True

    return CapitalResult(
        capital=capital,
        lam=float(freq.mean),
        trials=trials,
        stderr_estimate=stderr,
        converged=converged,
        seed=cfg.seed,
    )


# ---------------------------------------------------------------------------
# model comparison (count / sum / capital / area table)
# ---------------------------------------------------------------------------

def parse_model_spec(spec: str) -> tuple[str, int | None]:
    """Parse a model spec: 'exp4', 'normal', or 'expn:<power>'."""
    text = spec.strip().lower()
    if text == "exp4":
        return ("exp4", None)
    if text == "normal":
        return ("normal", None)
    if text.startswith("expn:"):
        try:
            n = int(text.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad power in model spec {spec!r}") from None
        if n < 1 or n % 2 != 0:
            raise ValueError(f"ExpN power must be a positive even integer, got {n}")
        return ("expn", n)
    raise ValueError(f"unknown model name {spec!r} (expected exp4, normal, or expn:<power>)")


@dataclass(frozen=True)
class ModelComparison:
    name: str
    capital: float
    tna_area: float
    model: SeverityModel
    fit: FitResult | None


@dataclass(frozen=True)
class ComparisonRow:
    label: str
    count: int
    total: float
    entries: list[ModelComparison]


def _fit_normal(losses) -> SeverityModel:
    """Moment-matched Normal on the mean-scaled axis (sample sd, ddof=1)."""
    from .dist import NormalParams

    scaled, mean = scale_losses(losses)
    sigma = float(np.std(scaled, ddof=1))
    return SeverityModel(params=NormalParams(mu=1.0, sigma=sigma), scaling_mean=mean)


def compare_models(
    losses,
    years: float,
    models,
    cfg: LdaConfig = LdaConfig(),
    label: str = "",
    workers: int | None = None,
) -> ComparisonRow:
    """Fit each requested model and put its capital beside count and sum.

    Exp4/ExpN scales come from the enclosed-area fit; the Normal
    baseline is moment matched.  All models run the same seed, so
    capitals are directly comparable.
    """
    arr = np.asarray(losses, dtype=float)
    if arr.size < 2:
        raise ValueError("need at least 2 losses to compare models")
    specs = [parse_model_spec(m) if isinstance(m, str) else m for m in models]
    if not specs:
        raise ValueError("model list must not be empty")

    lam = annual_frequency(arr.size, years)
    freq = PoissonFreq(lam)
    expn_count = sum(1 for family, _ in specs if family == "expn")
    entries: list[ModelComparison] = []
    for family, power in specs:
        if family == "exp4":
            fr = fit_expn(arr, FitConfig(n=4))
            model = fr.model
            area = fr.tna.area
            name = "exp4"
        elif family == "expn":
            fr = fit_expn(arr, FitConfig(n=power))
            model = fr.model
            area = fr.tna.area
            name = "expn" if expn_count == 1 else f"expn{power}"
        elif family == "normal":
            fr = None
            model = _fit_normal(arr)
            scaled, _ = scale_losses(arr)
            area = tna_test(scaled, SeverityModel(model.params, 1.0)).area
            name = "normal"
        else:
            raise ValueError(f"unknown model family {family!r}")
        capital = run_lda(model, freq, cfg, workers=workers).capital
        entries.append(
            ModelComparison(name=name, capital=capital, tna_area=area, model=model, fit=fr)
        )

    return ComparisonRow(
        label=label,
        count=int(arr.size),
        total=float(math.fsum(arr.tolist())),
        entries=entries,
    )


def percentile_vs_n(
    losses,
    years: float,
    n_values,
    cfg: LdaConfig = LdaConfig(),
    with_capital: bool = True,
    workers: int | None = None,
) -> list[tuple[int, float, float]]:
    """Severity 99.9th percentile (and capital) of the fitted ExpN per power n.

    Returns (n, q999, capital) tuples ordered by n; capital is NaN when
    ``with_capital`` is off.  Powers must be even and >= 2.
    """
    values = sorted(int(n) for n in n_values)
    if not values:
        raise ValueError("n_values must not be empty")
    for n in values:
        if n < 2 or n % 2 != 0:
            raise ValueError(f"powers must be even integers >= 2, got {n}")
    arr = np.asarray(losses, dtype=float)
    lam = annual_frequency(arr.size, years)
    freq = PoissonFreq(lam)

    rows: list[tuple[int, float, float]] = []
    for n in values:
        fr = fit_expn(arr, FitConfig(n=n))
        model = fr.model
        q999 = float(model.quantile(0.999))
        capital = (
            run_lda(model, freq, cfg, workers=workers).capital if with_capital else float("nan")
        )
        rows.append((n, q999, capital))
    return rows
