"""Time-multiplexing engine: per-bin heralding, latest-bin storage, output stats.

One multiplexing period consists of ``n_bins`` pump pulses spaced ``tau_ns``
apart.  Each bin independently generates a thermal number of photon pairs;
its idler photons hit the trigger cascade and the bin heralds according to
the configured policy.  Only the latest heralded bin is stored: its signal
photons enter the delay loop and circulate ``n_bins - birth_bin`` cycles
(plus an optional fixed offset), losing ``loop_loss_per_cycle`` per cycle,
before the output shutter releases them.  Periods are independent.

The same protocol is implemented twice: an exact enumeration over birth bin
and pair number (``output_distribution_analytic``/``analyze``) and a
vectorised Monte Carlo (``simulate_trials``); agreement between the two is a
standing cross-check.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import photon_stats
from .detectors import (
    HeraldPolicy,
    MeasurementConfig,
    TriggerConfig,
    click_count_pmf,
    herald_prob_given_pairs,
)
from .estimators import (
    CountRates,
    estimate_g2_heralded,
    expected_counts,
)
from .photon_stats import PhotonNumberDistribution, min_k_max, thermal_pmf


class ConfigError(ValueError):
    """Raised when an experiment parameter is out of range."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Full parameter budget of the multiplexed source."""

    mu: float = 0.18
    n_bins: int = 40
    tau_ns: float = 10.0
    rep_rate_hz: float = 5e5
    trigger: TriggerConfig = field(default_factory=TriggerConfig)
    eta_signal_coupling: float = 0.88
    eta_predelay: float = 1.0
    loop_loss_per_cycle: float = 0.012
    eta_shutter_out: float = 1.0
    meas: MeasurementConfig = field(default_factory=MeasurementConfig)
    cycle_offset: int = 0
    k_max: int | None = None

    def __post_init__(self):
        if self.mu < 0:
            raise ConfigError(f"mu must be >= 0, got {self.mu}")
        if self.n_bins < 1:
            raise ConfigError(f"n_bins must be >= 1, got {self.n_bins}")
        if self.tau_ns <= 0:
            raise ConfigError(f"tau_ns must be > 0, got {self.tau_ns}")
        if self.rep_rate_hz <= 0:
            raise ConfigError(f"rep_rate_hz must be > 0, got {self.rep_rate_hz}")
        for name in ("eta_signal_coupling", "eta_predelay", "eta_shutter_out"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        if not 0.0 <= self.loop_loss_per_cycle < 1.0:
            raise ConfigError(
                f"loop_loss_per_cycle must lie in [0, 1), got {self.loop_loss_per_cycle}"
            )
        if self.cycle_offset < 0:
            raise ConfigError(f"cycle_offset must be >= 0, got {self.cycle_offset}")
        if self.k_max is not None and self.k_max < photon_stats.min_k_max(self.mu):
            raise ConfigError(
                f"k_max={self.k_max} leaves thermal tail mass above "
                f"{photon_stats.TAIL_TOLERANCE} for mu={self.mu}; "
                f"need at least {photon_stats.min_k_max(self.mu)}"
            )

    @property
    def resolved_k_max(self) -> int:
        return self.k_max if self.k_max is not None else min_k_max(self.mu)

    @property
    def eta_static(self) -> float:
        """Storage-independent signal-path transmission."""
        return self.eta_signal_coupling * self.eta_predelay * self.eta_shutter_out

    def path_efficiency(self, storage_cycles: int) -> float:
        """Signal transmission for a photon stored the given number of cycles."""
        return self.eta_static * (1.0 - self.loop_loss_per_cycle) ** (
            storage_cycles + self.cycle_offset
        )

    def pair_pmf(self) -> PhotonNumberDistribution:
        return thermal_pmf(self.mu, self.resolved_k_max)


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of a single multiplexing period."""

    heralded: bool
    birth_bin: int | None
    storage_cycles: int
    output_photons: int
    clicks_in_birth_bin: int

    def __post_init__(self):
        if self.heralded:
            if self.birth_bin is None:
                raise ConfigError("heralded trial must carry a birth bin")
        elif self.output_photons != 0:
            raise ConfigError("non-heralded trial cannot emit photons")


@dataclass(frozen=True)
class SimResult:
    """Figures of merit of the multiplexed output for one configuration.

    p_1/p_2 are per-period (unconditional) probabilities; g2_true is the
    moment-based autocorrelation of the herald-conditioned output, which is
    what stays constant as n_bins grows; g2_est applies the count-rate
    estimator to the (expected or sampled) detector counts.
    """

    p_h: float
    p_1: float
    p_2: float
    g2_true: float
    g2_est: float
    se_p_h: float = 0.0
    se_p_1: float = 0.0
    se_p_2: float = 0.0
    se_g2: float = 0.0
    n_trials: int = 0
    counts: CountRates | None = None


def per_bin_herald_prob(cfg: ExperimentConfig) -> float:
    """Probability that a single pump bin produces a heralding signal."""
    pk = cfg.pair_pmf()
    return float(
        sum(
            pk.probs[k] * herald_prob_given_pairs(k, cfg.trigger)
            for k in range(pk.k_max + 1)
        )
    )


def herald_conditional_pairs(cfg: ExperimentConfig) -> PhotonNumberDistribution:
    """Pair-number law in a bin conditioned on that bin heralding.

    The herald biases the pair number upward, so the joint weights
    p(k) P(herald | k) are used rather than the bare thermal law.
    """
    pk = cfg.pair_pmf()
    joint = np.array(
        [
            pk.probs[k] * herald_prob_given_pairs(k, cfg.trigger)
            for k in range(pk.k_max + 1)
        ]
    )
    total = joint.sum()
    if total <= 0.0:
        raise ConfigError("herald probability is zero; conditional law undefined")
    return PhotonNumberDistribution(joint / total)


def multiplexed_heralding_prob(p: float, n: int) -> float:
    """P_H = 1 - (1 - p)^n for n independently pumped bins."""
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"p must lie in [0, 1], got {p}")
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    return 1.0 - (1.0 - p) ** n


def loop_lifetime_cycles(loop_loss_per_cycle: float) -> float:
    """Smallest cycle count bringing loop survival to 1/e or below.

    Returns ``math.inf`` for a lossless loop.
    """
    if not 0.0 <= loop_loss_per_cycle < 1.0:
        raise ConfigError(
            f"loop_loss_per_cycle must lie in [0, 1), got {loop_loss_per_cycle}"
        )
    if loop_loss_per_cycle == 0.0:
        return math.inf
    return float(math.ceil(-1.0 / math.log1p(-loop_loss_per_cycle)))


def _storage_weights(p: float, n_bins: int) -> np.ndarray:
    """w[d] = P(latest heralded bin sits d cycles before the output bin)."""
    d = np.arange(n_bins)
    return p * (1.0 - p) ** d


def output_distribution_analytic(
    cfg: ExperimentConfig,
) -> tuple[float, PhotonNumberDistribution]:
    """Exact multiplexed-output photon-number law (unconditional).

    Sums over the latest heralded bin: weight p (1-p)^d for a bin d cycles
    before the output, herald-biased pair law thinned by the full signal
    path.  The non-heralded remainder contributes vacuum.
    """
    p_h, cond = conditional_output_analytic(cfg)
    probs = cond.probs * p_h
    probs[0] += 1.0 - p_h
    return p_h, PhotonNumberDistribution(probs)


def conditional_output_analytic(
    cfg: ExperimentConfig,
) -> tuple[float, PhotonNumberDistribution]:
    """(P_H, output distribution given that the period heralded)."""
    p = per_bin_herald_prob(cfg)
    if p <= 0.0:
        return 0.0, photon_stats.vacuum(cfg.resolved_k_max)
    pairs = herald_conditional_pairs(cfg)
    p_h = multiplexed_heralding_prob(p, cfg.n_bins)
    weights = _storage_weights(p, cfg.n_bins)
    acc = np.zeros(pairs.k_max + 1)
    for d, w in enumerate(weights):
        eta_d = cfg.path_efficiency(d)
        acc += w * (photon_stats.loss_matrix(eta_d, pairs.k_max) @ pairs.probs)
    return p_h, PhotonNumberDistribution(acc / acc.sum())


def analyze(cfg: ExperimentConfig) -> SimResult:
    """Analytic figures of merit (zero standard errors, expected counts)."""
    p_h, uncond = output_distribution_analytic(cfg)
    if p_h <= 0.0:
        return SimResult(
            p_h=0.0, p_1=0.0, p_2=0.0, g2_true=float("nan"), g2_est=float("nan"),
            counts=CountRates(0.0, 0.0, 0.0, 0.0, cfg.rep_rate_hz),
        )
    _, cond = conditional_output_analytic(cfg)
    _, g2_true = photon_stats.mean_and_g2(cond)
    counts = expected_counts(
        uncond, cfg.rep_rate_hz, cfg.meas.eta_effective, p_h=p_h
    )
    return SimResult(
        p_h=p_h,
        p_1=float(uncond.probs[1]),
        p_2=float(uncond.probs[2]),
        g2_true=g2_true,
        g2_est=estimate_g2_heralded(counts),
        counts=counts,
    )


@dataclass
class TrialTally:
    """Raw Monte Carlo sums; merging tallies is plain addition, so the
    result is independent of how trials were partitioned across workers."""

    n_trials: int = 0
    n_herald: int = 0
    n_m1: int = 0
    n_m2: int = 0
    sum_m: float = 0.0
    sum_f: float = 0.0
    sum_m2: float = 0.0
    sum_f2: float = 0.0
    sum_fm: float = 0.0
    n_click1: int = 0
    n_click2: int = 0
    n_coinc: int = 0

    def __add__(self, other: "TrialTally") -> "TrialTally":
        return TrialTally(
            *(getattr(self, f.name) + getattr(other, f.name) for f in _TALLY_FIELDS)
        )

    def add_outputs(self, heralded: int, m: np.ndarray, c1: np.ndarray, c2: np.ndarray):
        m = m.astype(np.float64)
        f = m * (m - 1.0)
        self.n_herald += heralded
        self.n_m1 += int((m == 1).sum())
        self.n_m2 += int((m == 2).sum())
        self.sum_m += float(m.sum())
        self.sum_f += float(f.sum())
        self.sum_m2 += float((m * m).sum())
        self.sum_f2 += float((f * f).sum())
        self.sum_fm += float((f * m).sum())
        self.n_click1 += int(c1.sum())
        self.n_click2 += int(c2.sum())
        self.n_coinc += int((c1 & c2).sum())


_TALLY_FIELDS = dataclasses.fields(TrialTally)


def _tally_to_result(tally: TrialTally, cfg: ExperimentConfig) -> SimResult:
    n = tally.n_trials
    r = cfg.rep_rate_hz
    p_h = tally.n_herald / n
    p_1 = tally.n_m1 / n
    p_2 = tally.n_m2 / n

    def binom_se(p):
        return math.sqrt(max(p * (1.0 - p), 0.0) / n)

    counts = CountRates(
        s1_hz=r * tally.n_click1 / n,
        s2_hz=r * tally.n_click2 / n,
        c_hz=r * tally.n_coinc / n,
        h_hz=r * tally.n_herald / n,
        r_hz=r,
    )
    if tally.n_herald > 0 and tally.sum_m > 0:
        nh = tally.n_herald
        mbar = tally.sum_m / nh
        fbar = tally.sum_f / nh
        g2 = fbar / mbar ** 2
        # delta method on g2 = F / M^2
        var_f = tally.sum_f2 / nh - fbar ** 2
        var_m = tally.sum_m2 / nh - mbar ** 2
        cov_fm = tally.sum_fm / nh - fbar * mbar
        gf = 1.0 / mbar ** 2
        gm = -2.0 * fbar / mbar ** 3
        var_g2 = (gf * gf * var_f + gm * gm * var_m + 2.0 * gf * gm * cov_fm) / nh
        se_g2 = math.sqrt(max(var_g2, 0.0))
    else:
        g2 = float("nan")
        se_g2 = float("nan")
    return SimResult(
        p_h=p_h,
        p_1=p_1,
        p_2=p_2,
        g2_true=g2,
        g2_est=estimate_g2_heralded(counts),
        se_p_h=binom_se(p_h),
        se_p_1=binom_se(p_1),
        se_p_2=binom_se(p_2),
        se_g2=se_g2,
        n_trials=n,
        counts=counts,
    )


def _click_cdf_rows(cfg: TriggerConfig, k_max: int) -> np.ndarray:
    """Cumulative click-count law per registered-photon count, dark included.

    Row d is the CDF of the clicked-detector count given d registered
    photons; registered photons already folded eta_idler * eta_det, so rows
    only encode routing occupancy plus dark clicks.
    """
    n = cfg.cascade_size
    base = TriggerConfig(
        cascade_size=n,
        eta_det=1.0,
        eta_idler=1.0,
        policy=cfg.policy,
        dark_count_prob_per_bin=cfg.dark_count_prob_per_bin,
    )
    rows = np.stack([click_count_pmf(d, base) for d in range(k_max + 1)])
    return np.cumsum(rows, axis=1)


def simulate_trials(
    cfg: ExperimentConfig,
    n_trials: int,
    seed: int,
    records: bool = False,
    method: str = "fast",
    chunk_size: int = 250_000,
) -> SimResult | tuple[SimResult, list[TrialRecord]]:
    """Monte Carlo over independent multiplexing periods.

    ``method="fast"`` samples, per bin, the registered idler-photon count
    directly (a thinned thermal law) and reconstructs the stored bin's pair
    number from its exact posterior; ``method="per_pair"`` draws every pair
    and its detection fate explicitly.  Both sample the same process; the
    slow route exists as an independence cross-check.  Fixed seed gives a
    bit-identical result.
    """
    if n_trials < 1:
        raise ConfigError(f"n_trials must be >= 1, got {n_trials}")
    if method not in ("fast", "per_pair"):
        raise ConfigError(f"unknown simulation method {method!r}")
    rng = np.random.default_rng(seed)
    tally = TrialTally()
    recs: list[TrialRecord] = []
    done = 0
    while done < n_trials:
        t = min(chunk_size, n_trials - done)
        tally = tally + _simulate_chunk(cfg, t, rng, method, recs if records else None)
        done += t
    result = _tally_to_result(tally, cfg)
    if records:
        return result, recs
    return result


def _simulate_chunk(
    cfg: ExperimentConfig,
    t: int,
    rng: np.random.Generator,
    method: str,
    recs: list[TrialRecord] | None,
) -> TrialTally:
    n = cfg.n_bins
    k_cap = cfg.resolved_k_max
    trig = cfg.trigger
    eta_t = trig.eta_trigger
    q = cfg.mu / (1.0 + cfg.mu)

    if method == "per_pair":
        ks = np.minimum(rng.geometric(1.0 / (1.0 + cfg.mu), size=(t, n)) - 1, k_cap)
        registered = rng.binomial(ks, eta_t)
    else:
        # registered count is itself thermal with mean mu * eta_trigger
        registered = np.minimum(
            rng.geometric(1.0 / (1.0 + cfg.mu * eta_t), size=(t, n)) - 1, k_cap
        )

    dark = trig.dark_count_prob_per_bin
    simple = dark == 0.0
    if simple and trig.policy is HeraldPolicy.ANY_CLICK:
        heralds = registered >= 1
    elif simple and trig.policy is HeraldPolicy.EXACTLY_ONE:
        # exactly one click <=> all registered photons share one detector
        nd = trig.cascade_size
        occupied = registered >= 1
        vals = registered[occupied]
        heralds = np.zeros_like(occupied)
        heralds[occupied] = rng.random(vals.size) < (1.0 / nd) ** (vals - 1)
    else:
        cdf = _click_cdf_rows(trig, k_cap)
        u = rng.random((t, n))
        clicks_all = (u[..., None] >= cdf[registered]).sum(axis=-1)
        if trig.policy is HeraldPolicy.ANY_CLICK:
            heralds = clicks_all >= 1
        else:
            heralds = clicks_all == 1
    clicks_known = None if simple else clicks_all

    heralded = heralds.any(axis=1)
    # latest heralded bin, counted as storage cycles before the output bin
    last_idx = n - 1 - np.argmax(heralds[:, ::-1], axis=1)
    rows = np.nonzero(heralded)[0]
    jstar = last_idx[rows]
    cycles = (n - 1 - jstar) + cfg.cycle_offset

    d_sel = registered[rows, jstar]
    if method == "per_pair":
        k_sel = ks[rows, jstar]
    else:
        # pair-number posterior given d registered: d + NegBinom(d+1, 1-x)
        x = q * (1.0 - eta_t)
        extra = rng.negative_binomial(d_sel + 1, 1.0 - x)
        k_sel = np.minimum(d_sel + extra, k_cap)

    eta_path = cfg.eta_static * (1.0 - cfg.loop_loss_per_cycle) ** cycles
    m_out = rng.binomial(k_sel, eta_path)

    arriving = rng.binomial(m_out, cfg.meas.eta_effective)
    to_det1 = rng.binomial(arriving, 0.5)
    click1 = to_det1 >= 1
    click2 = (arriving - to_det1) >= 1

    tally = TrialTally(n_trials=t)
    tally.add_outputs(int(heralded.sum()), m_out, click1, click2)

    if recs is not None:
        # click count of the stored bin, conditioned on it having heralded:
        # under any-click every registered photon clicks its detector, so the
        # unconditional draw given the registered count is already valid;
        # under exactly-one the herald pins the count to 1
        if clicks_known is not None:
            clicks_sel = clicks_known[rows, jstar]
        elif trig.policy is HeraldPolicy.EXACTLY_ONE:
            clicks_sel = np.ones(len(rows), dtype=np.int64)
        else:
            clicks_sel = _sample_click_counts(d_sel, trig, rng)
        by_row = {int(r): i for i, r in enumerate(rows)}
        for trial in range(t):
            i = by_row.get(trial)
            if i is None:
                recs.append(TrialRecord(False, None, 0, 0, 0))
            else:
                recs.append(
                    TrialRecord(
                        heralded=True,
                        birth_bin=int(jstar[i]) + 1,
                        storage_cycles=int(cycles[i]),
                        output_photons=int(m_out[i]),
                        clicks_in_birth_bin=int(clicks_sel[i]),
                    )
                )
    return tally


def _sample_click_counts(
    d_sel: np.ndarray, trig: TriggerConfig, rng: np.random.Generator
) -> np.ndarray:
    if len(d_sel) == 0:
        return d_sel
    cdf = _click_cdf_rows(trig, int(d_sel.max()))
    u = rng.random(len(d_sel))
    return (u[:, None] >= cdf[d_sel]).sum(axis=1)


def merge_results(cfg: ExperimentConfig, tallies: list[TrialTally]) -> SimResult:
    """Combine per-worker tallies; addition makes the merge order-free."""
    total = TrialTally()
    for t in tallies:
        total = total + t
    return _tally_to_result(total, cfg)


def calibrate_delay_product(
    template: ExperimentConfig,
    target_p1: float = 0.667,
    bracket: tuple[float, float] = (0.3, 1.0),
) -> float:
    """Solve for eta_predelay * eta_shutter_out reproducing a target P1.

    The two efficiencies are only ever used as a product, so the solver
    returns the product; callers store it in ``eta_predelay`` with
    ``eta_shutter_out`` left at 1.
    """
    from scipy.optimize import brentq

    def gap(c: float) -> float:
        cfg = replace(template, eta_predelay=c, eta_shutter_out=1.0)
        _, dist = output_distribution_analytic(cfg)
        return float(dist.probs[1]) - target_p1

    lo, hi = bracket
    return float(brentq(gap, lo, hi, xtol=1e-14))
