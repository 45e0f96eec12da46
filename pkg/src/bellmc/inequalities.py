"""Bell-type inequality statistics and the associated diagnostic tests.

Builds CHSH and Clauser-Horn statistics (with propagated standard errors)
from coincidence runs, estimates the four-factor residual expression that
separates impact-dependent from impact-independent models, tests whether
reduced-impact distributions are setting-independent, and scans settings
quads for maximal statistics.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import chi2_contingency, ks_2samp

from . import oracle
from .engine import QuadResult, RunConfig, run_quad
from .errors import AnalysisError, ConfigurationError, StatisticsError
from .geometry import ArmGeometry, Lattice, bin_impacts, sample_impacts
from .hidden import SourceDistribution, sample_block
from .kernels import numpy_backend
from .rng import event_uniforms, stream_key
from .stats import Estimate, linear_combination

CHSH_BOUND = 2.0
CH_BOUND = 0.0
TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)

CH_CONVENTIONS = ("standard", "unprimed")
STATISTIC_CHOICES = ("s-joint", "s-equal", "s-corr", "ch-standard", "ch-unprimed")


@dataclass(frozen=True)
class SettingsQuad:
    """The four polarizer settings entering a CHSH-type statistic."""

    alpha: float
    alpha_prime: float
    beta: float
    beta_prime: float

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not math.isfinite(value):
                raise ConfigurationError(f"quad angle {name} must be finite, got {value}")

    def astuple(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.alpha_prime, self.beta, self.beta_prime)


@dataclass(frozen=True)
class StatisticResult:
    """One inequality statistic with its bound and violation z-score."""

    name: str
    statistic: Estimate
    bound: float

    @property
    def z(self) -> float:
        """(statistic - bound) / SE; positive means the bound is exceeded."""
        return self.statistic.z_against(self.bound)


def chsh(p1: Estimate, p2: Estimate, p3: Estimate, p4: Estimate,
         name: str = "chsh") -> StatisticResult:
    """S = p1 + p2 + p3 - p4 against the factorizable-model bound 2."""
    s = linear_combination([(1.0, p1), (1.0, p2), (1.0, p3), (-1.0, p4)])
    return StatisticResult(name=name, statistic=s, bound=CHSH_BOUND)


def ch_statistic(
    p_ab: Estimate,
    p_abp: Estimate,
    p_apb: Estimate,
    p_apbp: Estimate,
    p1_alpha: Estimate,
    p1_alpha_prime: Estimate,
    p2_beta: Estimate,
    convention: str = "standard",
) -> StatisticResult:
    """Clauser-Horn combination against the factorizable-model bound 0.

    p_ab - p_abp + p_apb + p_apbp - P1 - P2(beta), where the subtracted
    device-1 singles term is P1(alpha') in the standard convention and
    P1(alpha), the unprimed setting, in the unprimed convention.  The two
    agree exactly whenever the device-1 singles are setting-independent.
    """
    if convention not in CH_CONVENTIONS:
        raise ConfigurationError(
            f"unknown CH convention {convention!r}; expected one of {CH_CONVENTIONS}"
        )
    singles_1 = p1_alpha if convention == "unprimed" else p1_alpha_prime
    value = linear_combination(
        [
            (1.0, p_ab),
            (-1.0, p_abp),
            (1.0, p_apb),
            (1.0, p_apbp),
            (-1.0, singles_1),
            (-1.0, p2_beta),
        ]
    )
    return StatisticResult(name=f"ch-{convention}", statistic=value, bound=CH_BOUND)


@dataclass(frozen=True)
class InequalityReport:
    """All inequality statistics derived from one quad of runs."""

    quad: SettingsQuad
    model_1: str
    model_2: str
    n_per_pair: int
    s_joint: StatisticResult
    s_equal: StatisticResult
    s_corr: StatisticResult
    ch_standard: StatisticResult
    ch_unprimed: StatisticResult

    def all_statistics(self) -> tuple[StatisticResult, ...]:
        return (self.s_joint, self.s_equal, self.s_corr, self.ch_standard, self.ch_unprimed)


def inequality_report(result: QuadResult) -> InequalityReport:
    """Assemble every statistic from a QuadResult.

    The correlation form is defined as 2 * S_equal - 2 exactly, so its
    estimate and error are rescaled rather than recomputed.
    """
    runs = list(result.pairs) + list(result.singles_1) + list(result.singles_2)
    models = {(r.model_1, r.model_2) for r in runs}
    if len(models) != 1:
        raise AnalysisError(f"runs mix detection models: {sorted(models)}")
    counts = {r.n_events for r in result.pairs}
    if len(counts) != 1:
        raise AnalysisError(f"pair runs mix event counts: {sorted(counts)}")

    s_joint = chsh(*(r.p_joint for r in result.pairs), name="s-joint")
    s_equal = chsh(*(r.p_equal for r in result.pairs), name="s-equal")
    s_corr = StatisticResult(
        name="s-corr",
        statistic=2.0 * s_equal.statistic - 2.0,
        bound=CHSH_BOUND,
    )
    ch_args = (
        result.pair_ab.p_joint,
        result.pair_abp.p_joint,
        result.pair_apb.p_joint,
        result.pair_apbp.p_joint,
        result.p1_alpha,
        result.p1_alpha_prime,
        result.p2_beta,
    )
    model_1, model_2 = result.pair_ab.model_1, result.pair_ab.model_2
    return InequalityReport(
        quad=SettingsQuad(result.alpha, result.alpha_prime, result.beta, result.beta_prime),
        model_1=model_1,
        model_2=model_2,
        n_per_pair=result.pair_ab.n_events,
        s_joint=s_joint,
        s_equal=s_equal,
        s_corr=s_corr,
        ch_standard=ch_statistic(*ch_args, convention="standard"),
        ch_unprimed=ch_statistic(*ch_args, convention="unprimed"),
    )


# ---------------------------------------------------------------------------
# residual expression

@dataclass(frozen=True)
class ResidualResult:
    """Monte Carlo estimate of the four-factor residual expression."""

    estimate: Estimate
    n_events: int
    quad: SettingsQuad
    impact_dependent: bool


def bell_residual(
    config: RunConfig,
    quad,
    n_events: int | None = None,
    seed: int | None = None,
) -> ResidualResult:
    """Estimate the difference between the two four-factor integrals that
    Bell's rearrangement equates.

    Per event, both terms are evaluated on the same hidden variables
    (common random numbers): device-1 probabilities at the alpha-reduced
    impact under both alpha and alpha', device-2 probabilities under both
    beta and beta' — at the beta-reduced impact in term 1 and at the
    beta'-reduced impact in term 2.  For models that never read the impact
    parameter the two terms are identical numbers event by event, so the
    estimate is exactly zero, not merely small.
    """
    if config.qm_reference:
        raise ConfigurationError("the residual expression applies to local models only")
    squad = SettingsQuad(
        float(quad.alpha), float(quad.alpha_prime), float(quad.beta), float(quad.beta_prime)
    )
    n = config.n_events if n_events is None else n_events
    if n < 1:
        raise ConfigurationError(f"residual run needs at least 1 event, got {n}")
    run_seed = config.seed if seed is None else seed
    key = stream_key(run_seed, f"{config.label}/residual")

    spec_1 = config.model_1.kernel_spec()
    spec_2 = config.model_2.kernel_spec()
    cx, cy = config.lattice.rotation_center
    period = config.lattice.period

    total = 0.0
    total_sq = 0.0
    chunk = 1 << 16
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        u = event_uniforms(key, start, stop)
        block = sample_block(config.distribution, u)
        tx = block.dir_x / block.dir_z
        ty = block.dir_y / block.dir_z
        h1x = block.pos_x + config.arms.length_1 * tx
        h1y = block.pos_y + config.arms.length_1 * ty
        h2x = block.pos_x - config.arms.length_2 * tx
        h2y = block.pos_y - config.arms.length_2 * ty
        b1x, b1y = numpy_backend.fold_arrays(h1x, h1y, squad.alpha, period, cx, cy)
        b2x_b, b2y_b = numpy_backend.fold_arrays(h2x, h2y, squad.beta, period, cx, cy)
        b2x_p, b2y_p = numpy_backend.fold_arrays(h2x, h2y, squad.beta_prime, period, cx, cy)

        p1a, _ = numpy_backend.eval_probs(spec_1, block.lam, b1x, b1y, squad.alpha)
        p1ap, _ = numpy_backend.eval_probs(spec_1, block.lam, b1x, b1y, squad.alpha_prime)
        p2b_at_b, _ = numpy_backend.eval_probs(spec_2, block.lam, b2x_b, b2y_b, squad.beta)
        p2bp_at_b, _ = numpy_backend.eval_probs(spec_2, block.lam, b2x_b, b2y_b, squad.beta_prime)
        p2b_at_p, _ = numpy_backend.eval_probs(spec_2, block.lam, b2x_p, b2y_p, squad.beta)
        p2bp_at_p, _ = numpy_backend.eval_probs(spec_2, block.lam, b2x_p, b2y_p, squad.beta_prime)

        r = p1a * p2b_at_b * p1ap * p2bp_at_b - p1a * p2b_at_p * p1ap * p2bp_at_p
        total += float(np.sum(r))
        total_sq += float(np.sum(r * r))

    mean = total / n
    if n > 1:
        var = max(0.0, (total_sq - n * mean * mean) / (n - 1))
        se = math.sqrt(var / n)
    else:
        se = 0.0
    impact_dependent = (
        config.model_1.uses_impact_parameter or config.model_2.uses_impact_parameter
    )
    return ResidualResult(
        estimate=Estimate(mean, se),
        n_events=n,
        quad=squad,
        impact_dependent=impact_dependent,
    )


# ---------------------------------------------------------------------------
# setting-independence of reduced-impact distributions

@dataclass(frozen=True)
class SettingPairTest:
    """Two-sample comparison of reduced-impact distributions at two settings."""

    setting_a: float
    setting_b: float
    chi2_pvalue: float
    ks_x_pvalue: float
    ks_y_pvalue: float
    significance: float

    @property
    def indistinguishable(self) -> bool:
        return min(self.chi2_pvalue, self.ks_x_pvalue, self.ks_y_pvalue) >= self.significance


@dataclass(frozen=True)
class SettingIndependenceReport:
    """Pairwise distribution tests across a list of settings.

    passed means no pair of settings produced statistically distinguishable
    reduced-impact distributions: the precondition the textbook inequality
    derivations quietly assume.
    """

    settings: tuple[float, ...]
    n_per_setting: int
    bins: int
    significance: float
    pairs: tuple[SettingPairTest, ...]

    @property
    def passed(self) -> bool:
        return all(p.indistinguishable for p in self.pairs)


def _chi2_two_sample(counts_a: np.ndarray, counts_b: np.ndarray) -> float:
    table = np.vstack([counts_a, counts_b])
    keep = table.sum(axis=0) > 0
    table = table[:, keep]
    if table.shape[1] < 2:
        # all mass in one shared bin: the histograms are identical
        return 1.0
    return float(chi2_contingency(table).pvalue)


def setting_independence_test(
    distribution: SourceDistribution,
    arms: ArmGeometry,
    lattice: Lattice,
    settings,
    n: int,
    seed: int,
    bins: int = 16,
    significance: float = 0.001,
    device: int = 1,
) -> SettingIndependenceReport:
    """Test whether reduced-impact distributions depend on the setting.

    Each setting gets its own independently sampled batch of n events (so
    the two-sample tests see independent samples); every pair of settings
    is compared with a chi-square test on the 2-D cell histogram and
    KS tests on both coordinate marginals.
    """
    settings = tuple(float(s) for s in settings)
    if len(settings) < 2:
        raise ConfigurationError(
            f"setting-independence test needs at least 2 settings, got {len(settings)}"
        )
    if n < 1000:
        raise StatisticsError(
            f"setting-independence test needs at least 1000 events per setting, got {n}"
        )
    samples = []
    for i, gamma in enumerate(settings):
        bx, by = sample_impacts(
            distribution, arms, lattice, gamma, n, seed, label=f"cond/{i}", device=device
        )
        counts, _, _ = bin_impacts(bx, by, lattice, bins)
        samples.append((bx, by, counts.ravel()))

    pairs = []
    for i, j in itertools.combinations(range(len(settings)), 2):
        bx_i, by_i, counts_i = samples[i]
        bx_j, by_j, counts_j = samples[j]
        pairs.append(
            SettingPairTest(
                setting_a=settings[i],
                setting_b=settings[j],
                chi2_pvalue=_chi2_two_sample(counts_i, counts_j),
                ks_x_pvalue=float(ks_2samp(bx_i, bx_j).pvalue),
                ks_y_pvalue=float(ks_2samp(by_i, by_j).pvalue),
                significance=significance,
            )
        )
    return SettingIndependenceReport(
        settings=settings,
        n_per_setting=n,
        bins=bins,
        significance=significance,
        pairs=tuple(pairs),
    )


# ---------------------------------------------------------------------------
# settings scans

@dataclass(frozen=True)
class ScanRow:
    quad: tuple[float, float, float, float]
    value: float
    se: float


@dataclass(frozen=True)
class ScanResult:
    statistic: str
    mode: str
    grid_step: float
    budget: int
    evaluations: int
    best_quad: SettingsQuad
    best: StatisticResult
    rows: tuple[ScanRow, ...]


def statistic_from_quad(result: QuadResult, statistic: str) -> StatisticResult:
    """Extract one named statistic from a quad of runs."""
    report = inequality_report(result)
    return _pick_statistic(report, statistic)


def _pick_statistic(report: InequalityReport, statistic: str) -> StatisticResult:
    table = {
        "s-joint": report.s_joint,
        "s-equal": report.s_equal,
        "s-corr": report.s_corr,
        "ch-standard": report.ch_standard,
        "ch-unprimed": report.ch_unprimed,
    }
    if statistic not in table:
        raise ConfigurationError(
            f"unknown statistic {statistic!r}; expected one of {STATISTIC_CHOICES}"
        )
    return table[statistic]


def _statistic_from_probs(probs_fn, quad: SettingsQuad, statistic: str) -> StatisticResult:
    """Assemble a statistic from exact pair probabilities (zero SE)."""
    ab = probs_fn(quad.alpha, quad.beta)
    abp = probs_fn(quad.alpha, quad.beta_prime)
    apb = probs_fn(quad.alpha_prime, quad.beta)
    apbp = probs_fn(quad.alpha_prime, quad.beta_prime)

    def est(key, probs):
        return Estimate(probs[key], 0.0)

    if statistic == "s-joint":
        return chsh(est("joint", ab), est("joint", abp), est("joint", apb),
                    est("joint", apbp), name="s-joint")
    if statistic == "s-equal":
        return chsh(est("equal", ab), est("equal", abp), est("equal", apb),
                    est("equal", apbp), name="s-equal")
    if statistic == "s-corr":
        inner = chsh(est("equal", ab), est("equal", abp), est("equal", apb),
                     est("equal", apbp), name="s-equal")
        return StatisticResult("s-corr", 2.0 * inner.statistic - 2.0, CHSH_BOUND)
    if statistic in ("ch-standard", "ch-unprimed"):
        return ch_statistic(
            est("joint", ab),
            est("joint", abp),
            est("joint", apb),
            est("joint", apbp),
            est("p1", ab),
            est("p1", apb),
            est("p2", ab),
            convention=statistic.split("-", 1)[1],
        )
    raise ConfigurationError(
        f"unknown statistic {statistic!r}; expected one of {STATISTIC_CHOICES}"
    )


def maximize_settings(
    config: RunConfig,
    statistic: str = "s-equal",
    search: str = "grid",
    grid_step: float = math.pi / 16,
    budget: int | None = None,
    n_per_pair: int | None = None,
    exact: bool = False,
) -> ScanResult:
    """Search setting quads for the largest value of one statistic.

    The grid covers [0, pi) in each of the four angles with the given step
    (normalized so the grid tiles the period exactly) and is visited in
    lexicographic (alpha, alpha', beta, beta') order; quads with alpha =
    alpha' or beta = beta' are skipped as degenerate.  budget caps the
    number of statistic evaluations; search "coordinate-descent" spends any
    budget left after the grid on halving-step refinement around the best
    grid point.  Results are deterministic for fixed (config, budget).

    exact=True evaluates statistics from closed-form (entangled reference)
    or quadrature (b-independent models) pair probabilities instead of
    Monte Carlo runs.
    """
    if search not in ("grid", "coordinate-descent"):
        raise ConfigurationError(
            f"unknown search mode {search!r}; expected 'grid' or 'coordinate-descent'"
        )
    if statistic not in STATISTIC_CHOICES:
        raise ConfigurationError(
            f"unknown statistic {statistic!r}; expected one of {STATISTIC_CHOICES}"
        )
    if not (0.0 < grid_step <= math.pi / 2):
        raise ConfigurationError(f"grid step must lie in (0, pi/2], got {grid_step}")
    m = max(2, round(math.pi / grid_step))
    step = math.pi / m
    values = [i * step for i in range(m)]
    grid_quads = [
        q for q in itertools.product(values, repeat=4) if q[0] != q[1] and q[2] != q[3]
    ]
    if budget is None:
        budget = len(grid_quads)
    if budget < 1:
        raise ConfigurationError(f"scan budget must be >= 1, got {budget}")

    if exact:
        probs_fn = oracle.make_pair_prob_fn(
            model_1=config.model_1, model_2=config.model_2, qm=config.qm_reference
        )

        def evaluate(quad: SettingsQuad) -> StatisticResult:
            return _statistic_from_probs(probs_fn, quad, statistic)
    else:
        scan_index = itertools.count()

        def evaluate(quad: SettingsQuad) -> StatisticResult:
            sub = replace(config, label=f"{config.label}/scan/{next(scan_index)}")
            return statistic_from_quad(run_quad(sub, quad, n_per_pair), statistic)

    cache: dict[tuple[float, float, float, float], StatisticResult] = {}
    spent = 0

    def evaluate_cached(quad_tuple: tuple[float, float, float, float]):
        nonlocal spent
        hit = cache.get(quad_tuple)
        if hit is not None:
            return hit, False
        if spent >= budget:
            return None, False
        spent += 1
        result = evaluate(SettingsQuad(*quad_tuple))
        cache[quad_tuple] = result
        return result, True

    best_tuple = None
    best_result = None
    for quad_tuple in grid_quads:
        result, _ = evaluate_cached(quad_tuple)
        if result is None:
            break
        if best_result is None or result.statistic.value > best_result.statistic.value:
            best_tuple = quad_tuple
            best_result = result

    if search == "coordinate-descent" and best_tuple is not None:
        refine_step = 0.5 * step
        min_step = math.pi / 2048
        while refine_step >= min_step and spent < budget:
            moved = False
            for axis in range(4):
                for direction in (1.0, -1.0):
                    candidate = list(best_tuple)
                    candidate[axis] = candidate[axis] + direction * refine_step
                    cand = tuple(candidate)
                    if cand[0] == cand[1] or cand[2] == cand[3]:
                        continue
                    result, _ = evaluate_cached(cand)
                    if result is None:
                        break
                    if result.statistic.value > best_result.statistic.value:
                        best_tuple = cand
                        best_result = result
                        moved = True
                else:
                    continue
                break
            if not moved:
                refine_step *= 0.5

    rows = tuple(
        ScanRow(quad=t, value=r.statistic.value, se=r.statistic.se)
        for t, r in sorted(cache.items())
    )
    return ScanResult(
        statistic=statistic,
        mode="exact" if exact else "mc",
        grid_step=step,
        budget=budget,
        evaluations=spent,
        best_quad=SettingsQuad(*best_tuple),
        best=best_result,
        rows=rows,
    )
