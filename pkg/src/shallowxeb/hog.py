"""Heavy-output-generation classifier as a two-coin betting game.

A sample is "heads" when its score exceeds the threshold ``z*``.  Coin A is
the sampler with the larger heads probability (the quantum device), coin B
the one with the smaller (the spoofer).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import binom

#: Below this many samples the head-count threshold comes from exact binomial tails.
NORMAL_APPROX_MIN_M = 25

HOUSE_POLICIES = ("uniform", "always-A", "always-B", "adversarial")


@dataclass(frozen=True)
class CoinModel:
    p_heads: float
    label: str = ""

    def __post_init__(self):
        if not 0.0 <= self.p_heads <= 1.0:
            raise ValueError(f"p_heads must lie in [0, 1], got {self.p_heads!r}")

    def mean(self, m: int) -> float:
        return m * self.p_heads

    def std(self, m: int) -> float:
        return math.sqrt(m * self.p_heads * (1.0 - self.p_heads))


@dataclass(frozen=True)
class BettingStrategy:
    """Play the sensible strategy (heads -> A) with probability ``x``, else guess ``fallback`` blindly.

    ``ev_if_a`` / ``ev_if_b`` are the expected payoffs when the house hands
    us coin A or B; ``expected_value`` is the smaller of the two.
    """

    kind: str
    x: float
    expected_value: float
    ev_if_a: float
    ev_if_b: float
    fallback: str = "B"
    delta: Optional[float] = None
    pure_ev_a: Optional[float] = None
    pure_ev_b: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.x <= 1.0:
            raise ValueError(f"mixing probability must lie in [0, 1], got {self.x!r}")


def _check_order(p_a: float, p_b: float) -> None:
    if not (0.0 <= p_b < p_a <= 1.0):
        raise ValueError(f"need 0 <= p_B < p_A <= 1, got p_A={p_a!r}, p_B={p_b!r}")


def _payoffs(x: float, fallback: str, p_a: float, p_b: float) -> tuple[float, float]:
    sens_a, sens_b = 2 * p_a - 1, 1 - 2 * p_b
    blind_a, blind_b = (-1.0, 1.0) if fallback == "B" else (1.0, -1.0)
    return x * sens_a + (1 - x) * blind_a, x * sens_b + (1 - x) * blind_b


def mixed_strategy(p_a: float, p_b: float) -> BettingStrategy:
    """Minimax strategy when both heads probabilities are known.

    With ``p_A + p_B >= 1`` (in particular ``p_A > p_B >= 1/2``) the hedge is
    a blind guess of B, ``x = 1/(p_A+p_B)``.  Otherwise the reflected game
    ``(1-p_B, 1-p_A)`` applies and the hedge is a blind guess of A.
    """
    _check_order(p_a, p_b)
    if p_a + p_b >= 1.0:
        x, fallback = 1.0 / (p_a + p_b), "B"
    else:
        x, fallback = 1.0 / (2.0 - p_a - p_b), "A"
    ev_a, ev_b = _payoffs(x, fallback, p_a, p_b)
    kind = "pure" if x == 1.0 else "mixed"
    return BettingStrategy(
        kind, x, min(ev_a, ev_b), ev_a, ev_b, fallback,
        pure_ev_a=2 * p_a - 1, pure_ev_b=1 - 2 * p_b,
    )


def robust_strategy(p_b: float, delta: float, p_a: Optional[float] = None) -> BettingStrategy:
    """Strategy that only assumes ``p_A >= p_B + delta``.

    ``x = 1/(2 p_B + delta)`` guarantees at least ``delta/(2 p_B + delta)``.
    ``p_a`` (the true value, if known) only fills in ``ev_if_a``.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if p_b < 0 or p_b + delta > 1.0:
        raise ValueError("need 0 <= p_B and p_B + delta <= 1")
    x = min(1.0, 1.0 / (2 * p_b + delta))
    worst_a = p_b + delta
    ev_a_floor, ev_b = _payoffs(x, "B", worst_a, p_b)
    ev_a = _payoffs(x, "B", p_a, p_b)[0] if p_a is not None else ev_a_floor
    return BettingStrategy("robust", x, min(ev_a_floor, ev_b), ev_a, ev_b, "B", delta=delta)


def _binomial_threshold(m: int, p_a: float, p_b: float) -> float:
    h = np.arange(0, m)
    correct_a = binom.sf(h, m, p_a)
    correct_b = binom.cdf(h, m, p_b)
    diff = np.abs(correct_a - correct_b)
    # break ties in favour of the larger worst-case accuracy
    best = np.lexsort((-np.minimum(correct_a, correct_b), diff))[0]
    return float(h[best])


def heads_threshold(m: int, p_a: float, p_b: float) -> float:
    """Head count ``h*`` equalising ``P(h > h*|A)`` and ``P(h <= h*|B)``.

    Large ``m`` uses the Gaussian solution
    ``h* = m (p_A s_B + p_B s_A)/(s_A + s_B)`` with ``s = sqrt(m p (1-p))``.
    Small ``m``, or a degenerate coin with ``p`` in ``{0, 1}``, uses an exact
    search over integer thresholds.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    _check_order(p_a, p_b)
    s_a = CoinModel(p_a).std(m)
    s_b = CoinModel(p_b).std(m)
    if m < NORMAL_APPROX_MIN_M or s_a == 0.0 or s_b == 0.0:
        return _binomial_threshold(m, p_a, p_b)
    return m * (p_a * s_b + p_b * s_a) / (s_a + s_b)


def separation(p_a: float, p_b: float) -> float:
    """``(p_A - p_B) / (sqrt(p_A(1-p_A)) + sqrt(p_B(1-p_B)))``."""
    denom = math.sqrt(p_a * (1 - p_a)) + math.sqrt(p_b * (1 - p_b))
    return math.inf if denom == 0 else (p_a - p_b) / denom


def normal_cdf(y: float) -> float:
    return 0.5 * (1.0 + math.erf(y / math.sqrt(2.0)))


def success_probability(m: int, p_a: float, p_b: float) -> float:
    """Large-``m`` probability of naming the coin correctly: ``Phi(sqrt(m) x)``."""
    _check_order(p_a, p_b)
    x = separation(p_a, p_b)
    return 1.0 if math.isinf(x) else normal_cdf(math.sqrt(m) * x)


def exact_success_probabilities(m: int, p_a: float, p_b: float, h_star: Optional[float] = None):
    """Exact binomial ``(P(h > h*|A), P(h <= h*|B))``."""
    if h_star is None:
        h_star = heads_threshold(m, p_a, p_b)
    k = math.floor(h_star)
    return float(binom.sf(k, m, p_a)), float(binom.cdf(k, m, p_b))


@dataclass(frozen=True)
class HogDecision:
    m: int
    h: int
    h_star: float
    verdict: str
    predicted_success: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def decide(h: int, m: int, p_a: float, p_b: float) -> HogDecision:
    if not 0 <= h <= m:
        raise ValueError("head count must satisfy 0 <= h <= m")
    h_star = heads_threshold(m, p_a, p_b)
    verdict = "A" if h > h_star else "B"
    return HogDecision(m, int(h), h_star, verdict, success_probability(m, p_a, p_b))


def classify(scores: Sequence[float], z_star: float, p_a: float, p_b: float) -> HogDecision:
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise ValueError("need at least one score")
    h = int(np.count_nonzero(scores > z_star))
    return decide(h, scores.size, p_a, p_b)


@dataclass(frozen=True)
class BettingOutcome:
    mean: float
    stderr: float
    accuracy: float
    rounds: int


def simulate_betting(
    p_a: float,
    p_b: float,
    strategy: Optional[BettingStrategy],
    rounds: int,
    rng: np.random.Generator,
    house: str = "uniform",
) -> BettingOutcome:
    """Monte-Carlo play of the one-flip game.

    ``strategy=None`` is a blind coin-toss guess.  ``house`` picks the coin:
    uniformly, always A, always B, or ``adversarial`` (whichever coin has the
    lower expected payoff for this strategy).
    """
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    if house not in HOUSE_POLICIES:
        raise ValueError(f"unknown house policy {house!r}; choose from {HOUSE_POLICIES}")
    if house == "uniform":
        coin_is_a = rng.random(rounds) < 0.5
    elif house == "always-A":
        coin_is_a = np.ones(rounds, dtype=bool)
    elif house == "always-B":
        coin_is_a = np.zeros(rounds, dtype=bool)
    else:
        if strategy is None:
            coin_is_a = np.zeros(rounds, dtype=bool)
        else:
            ev_a, ev_b = _payoffs(strategy.x, strategy.fallback, p_a, p_b)
            coin_is_a = np.full(rounds, ev_a < ev_b)

    heads = rng.random(rounds) < np.where(coin_is_a, p_a, p_b)
    if strategy is None:
        guess_a = rng.random(rounds) < 0.5
    else:
        sensible = rng.random(rounds) < strategy.x
        guess_a = np.where(sensible, heads, strategy.fallback == "A")
    correct = guess_a == coin_is_a
    payoff = np.where(correct, 1.0, -1.0)
    return BettingOutcome(
        float(payoff.mean()),
        float(payoff.std(ddof=1) / math.sqrt(rounds)) if rounds > 1 else math.inf,
        float(correct.mean()),
        rounds,
    )
