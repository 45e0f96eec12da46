"""Monte Carlo engine: per-event simulation loop and exact count accumulation.

Each event draws its hidden variables from a setting-independent stream,
propagates both photons to their polarizer planes, reduces the impact
points under each device's own setting, and draws the two outcomes as
independent Bernoulli trials — the factorized local model, event by event.

Events are processed in fixed-size chunks.  Every event owns a fixed
segment of a counter-based random stream keyed by (seed, run label), so
counts are bit-identical for any chunk schedule and any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import ConfigurationError, GeometryError
from .geometry import ArmGeometry, Lattice
from .hidden import SourceDistribution, sample_block
from .kernels import numpy_backend
from .models import DetectionModel
from .rng import event_uniforms, stream_key
from .stats import Estimate, binomial_estimate

CHUNK_EVENTS = 1 << 16

# per-event uniform slots consumed by the outcome draws (slots 0-4 feed the
# hidden-variable sampler; see bellmc.rng)
_SLOT_DEVICE_1 = 5
_SLOT_DEVICE_2 = 6


@dataclass(frozen=True)
class RunConfig:
    """One coincidence run: physics, settings, and sampling parameters.

    qm_reference=True replaces the two local models with the entangled
    photon-pair joint sampler (a nonlocal reference, not a hidden-variable
    model); the models must then be omitted.
    """

    distribution: SourceDistribution
    arms: ArmGeometry
    lattice: Lattice
    model_1: DetectionModel | None
    model_2: DetectionModel | None
    alpha: float
    beta: float
    n_events: int
    seed: int
    label: str = "run"
    workers: int = 1
    qm_reference: bool = False

    def __post_init__(self):
        if self.n_events < 1:
            raise ConfigurationError(f"run.events must be >= 1, got {self.n_events}")
        if self.workers < 1:
            raise ConfigurationError(f"run.workers must be >= 1, got {self.workers}")
        for name, value in (("alpha", self.alpha), ("beta", self.beta)):
            if not math.isfinite(value):
                raise ConfigurationError(f"setting {name} must be finite, got {value}")
        if self.qm_reference:
            if self.model_1 is not None or self.model_2 is not None:
                raise ConfigurationError(
                    "qm_reference runs take no detection models"
                )
        elif self.model_1 is None or self.model_2 is None:
            raise ConfigurationError("both devices need a detection model")

    def model_names(self) -> tuple[str, str]:
        if self.qm_reference:
            return ("qm-reference", "qm-reference")
        return (self.model_1.name, self.model_2.name)


@dataclass(frozen=True)
class CoincidenceResult:
    """Exact outcome counts for one run, with derived probability estimates."""

    n_events: int
    n1_plus: int
    n2_plus: int
    n_pp: int
    n_pm: int
    n_mp: int
    n_mm: int
    clamp_events: int
    seed: int
    label: str
    alpha: float
    beta: float
    model_1: str
    model_2: str

    def __post_init__(self):
        total = self.n_pp + self.n_pm + self.n_mp + self.n_mm
        if total != self.n_events:
            raise ValueError(
                f"outcome counts sum to {total}, expected {self.n_events}"
            )

    @property
    def p1(self) -> Estimate:
        """Device-1 singles (transmission) probability."""
        return binomial_estimate(self.n1_plus, self.n_events)

    @property
    def p2(self) -> Estimate:
        return binomial_estimate(self.n2_plus, self.n_events)

    @property
    def p_joint(self) -> Estimate:
        """Joint transmission (coincidence ++) probability."""
        return binomial_estimate(self.n_pp, self.n_events)

    @property
    def p_equal(self) -> Estimate:
        """Probability both devices give the same outcome."""
        return binomial_estimate(self.n_pp + self.n_mm, self.n_events)

    def counts(self) -> dict:
        """The exact-count section used in reports and reproducibility checks."""
        return {
            "events": self.n_events,
            "n1_plus": self.n1_plus,
            "n2_plus": self.n2_plus,
            "n_pp": self.n_pp,
            "n_pm": self.n_pm,
            "n_mp": self.n_mp,
            "n_mm": self.n_mm,
            "clamp_events": self.clamp_events,
        }


def _chunk_ranges(n: int) -> list[tuple[int, int]]:
    return [(start, min(start + CHUNK_EVENTS, n)) for start in range(0, n, CHUNK_EVENTS)]


def _count_chunk(config: RunConfig, key: int, start: int, stop: int) -> tuple:
    u = event_uniforms(key, start, stop)
    if config.qm_reference:
        return kernels.qm_counts(np.ascontiguousarray(u[:, _SLOT_DEVICE_1]),
                                 config.alpha, config.beta)
    block = sample_block(config.distribution, u)
    return kernels.pair_counts(
        block.lam,
        block.pos_x,
        block.pos_y,
        block.dir_x,
        block.dir_y,
        block.dir_z,
        np.ascontiguousarray(u[:, _SLOT_DEVICE_1]),
        np.ascontiguousarray(u[:, _SLOT_DEVICE_2]),
        config.arms.length_1,
        config.arms.length_2,
        config.lattice.period,
        config.lattice.rotation_center[0],
        config.lattice.rotation_center[1],
        config.alpha,
        config.beta,
        config.model_1.kernel_spec(),
        config.model_2.kernel_spec(),
    )


def run_coincidence(config: RunConfig) -> CoincidenceResult:
    """Simulate one setting pair and return exact outcome counts.

    Counts are independent of chunking and worker count: every event's
    randomness is fixed by (seed, label, event index) alone, and the
    integer accumulators commute.
    """
    key = stream_key(config.seed, config.label)
    ranges = _chunk_ranges(config.n_events)

    if config.workers > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            chunk_counts = list(
                pool.map(lambda r: _count_chunk(config, key, r[0], r[1]), ranges)
            )
    else:
        chunk_counts = [_count_chunk(config, key, start, stop) for start, stop in ranges]

    bad = [
        start + counts[7]
        for (start, _), counts in zip(ranges, chunk_counts)
        if counts[7] >= 0
    ]
    if bad:
        raise GeometryError(
            "event ray cannot reach a polarizer plane", event_index=min(bad)
        )

    totals = [0] * 7
    for counts in chunk_counts:
        for k in range(7):
            totals[k] += counts[k]
    names = config.model_names()
    return CoincidenceResult(
        n_events=config.n_events,
        n1_plus=totals[0],
        n2_plus=totals[1],
        n_pp=totals[2],
        n_pm=totals[3],
        n_mp=totals[4],
        n_mm=totals[5],
        clamp_events=totals[6],
        seed=config.seed,
        label=config.label,
        alpha=config.alpha,
        beta=config.beta,
        model_1=names[0],
        model_2=names[1],
    )


@dataclass(frozen=True)
class QuadResult:
    """Runs for all four setting pairs of a quad, plus dedicated singles runs.

    pair_ab .. pair_apbp cover (alpha, beta), (alpha, beta'), (alpha', beta),
    (alpha', beta').  The singles runs give P1 at alpha / alpha' and P2 at
    beta / beta' from streams disjoint from the pair runs.
    """

    alpha: float
    alpha_prime: float
    beta: float
    beta_prime: float
    pair_ab: CoincidenceResult
    pair_abp: CoincidenceResult
    pair_apb: CoincidenceResult
    pair_apbp: CoincidenceResult
    singles_1: tuple[CoincidenceResult, CoincidenceResult] = field(repr=False)
    singles_2: tuple[CoincidenceResult, CoincidenceResult] = field(repr=False)

    @property
    def pairs(self) -> tuple[CoincidenceResult, ...]:
        return (self.pair_ab, self.pair_abp, self.pair_apb, self.pair_apbp)

    @property
    def p1_alpha(self) -> Estimate:
        return self.singles_1[0].p1

    @property
    def p1_alpha_prime(self) -> Estimate:
        return self.singles_1[1].p1

    @property
    def p2_beta(self) -> Estimate:
        return self.singles_2[0].p2

    @property
    def p2_beta_prime(self) -> Estimate:
        return self.singles_2[1].p2


def run_quad(config: RunConfig, quad, n_per_pair: int | None = None) -> QuadResult:
    """Run all four setting pairs of a quad on disjoint substreams.

    quad supplies alpha, alpha_prime, beta, beta_prime attributes.  The
    config's own (alpha, beta) are ignored; its label prefixes the
    substream labels so repeated quads under one seed stay disjoint.
    """
    a = float(quad.alpha)
    ap = float(quad.alpha_prime)
    b = float(quad.beta)
    bp = float(quad.beta_prime)
    if a == ap or b == bp:
        raise ConfigurationError(
            "quad must contain four distinct setting pairs "
            f"(alpha={a}, alpha'={ap}, beta={b}, beta'={bp})"
        )
    n = config.n_events if n_per_pair is None else n_per_pair

    def pair_run(alpha: float, beta: float, tag: str) -> CoincidenceResult:
        sub = replace(
            config,
            alpha=alpha,
            beta=beta,
            n_events=n,
            label=f"{config.label}/{tag}",
        )
        return run_coincidence(sub)

    return QuadResult(
        alpha=a,
        alpha_prime=ap,
        beta=b,
        beta_prime=bp,
        pair_ab=pair_run(a, b, "pair/ab"),
        pair_abp=pair_run(a, bp, "pair/abp"),
        pair_apb=pair_run(ap, b, "pair/apb"),
        pair_apbp=pair_run(ap, bp, "pair/apbp"),
        singles_1=(
            pair_run(a, b, "singles/d1/a"),
            pair_run(ap, b, "singles/d1/ap"),
        ),
        singles_2=(
            pair_run(a, b, "singles/d2/b"),
            pair_run(a, bp, "singles/d2/bp"),
        ),
    )


def default_qm_config(n_events: int, seed: int, label: str = "qm", workers: int = 1) -> RunConfig:
    """RunConfig for the entangled-pair reference sampler.

    The geometry fields are irrelevant to the joint sampler but kept so the
    result records a complete configuration.
    """
    return RunConfig(
        distribution=SourceDistribution(kind="point", transverse_spread=0.0),
        arms=ArmGeometry(),
        lattice=Lattice(),
        model_1=None,
        model_2=None,
        alpha=0.0,
        beta=0.0,
        n_events=n_events,
        seed=seed,
        label=label,
        workers=workers,
        qm_reference=True,
    )


def run_qm_reference(quad, n_events: int, seed: int, workers: int = 1) -> QuadResult:
    """Entangled photon-pair reference statistics over a settings quad.

    The joint outcome of each event is drawn directly from the two-photon
    distribution P(++) = P(--) = cos^2(alpha-beta)/2; this is the nonlocal
    reference the local models are compared against.
    """
    return run_quad(default_qm_config(n_events, seed, workers=workers), quad)


@dataclass
class EventDetail:
    """Per-event diagnostic arrays for one run (always computed with numpy)."""

    lam: np.ndarray
    b1x: np.ndarray
    b1y: np.ndarray
    b2x: np.ndarray
    b2y: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    out1: np.ndarray
    out2: np.ndarray


def run_events(config: RunConfig, max_events: int = 1 << 22) -> EventDetail:
    """Replay a run and return its per-event states for diagnostics.

    Uses the same streams as run_coincidence, so the outcomes here are
    exactly the ones the counting kernels tallied.
    """
    if config.qm_reference:
        raise ConfigurationError("per-event detail applies to local-model runs only")
    if config.n_events > max_events:
        raise ConfigurationError(
            f"per-event detail capped at {max_events} events, got {config.n_events}"
        )
    key = stream_key(config.seed, config.label)
    u = event_uniforms(key, 0, config.n_events)
    block = sample_block(config.distribution, u)
    bad = np.nonzero(block.dir_z <= 0.0)[0]
    if bad.size:
        raise GeometryError(
            "event ray cannot reach a polarizer plane", event_index=int(bad[0])
        )
    tx = block.dir_x / block.dir_z
    ty = block.dir_y / block.dir_z
    h1x = block.pos_x + config.arms.length_1 * tx
    h1y = block.pos_y + config.arms.length_1 * ty
    h2x = block.pos_x - config.arms.length_2 * tx
    h2y = block.pos_y - config.arms.length_2 * ty
    cx, cy = config.lattice.rotation_center
    period = config.lattice.period
    b1x, b1y = numpy_backend.fold_arrays(h1x, h1y, config.alpha, period, cx, cy)
    b2x, b2y = numpy_backend.fold_arrays(h2x, h2y, config.beta, period, cx, cy)
    p1, _ = numpy_backend.eval_probs(config.model_1.kernel_spec(), block.lam, b1x, b1y, config.alpha)
    p2, _ = numpy_backend.eval_probs(config.model_2.kernel_spec(), block.lam, b2x, b2y, config.beta)
    out1 = u[:, _SLOT_DEVICE_1] < p1
    out2 = u[:, _SLOT_DEVICE_2] < p2
    return EventDetail(
        lam=block.lam,
        b1x=b1x,
        b1y=b1y,
        b2x=b2x,
        b2y=b2y,
        p1=p1,
        p2=p2,
        out1=out1,
        out2=out2,
    )
