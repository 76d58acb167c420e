"""Analytical dimensioning of the signature parameters (K, L).

Given the expected batch size N out of a population T, the preamble count M,
a goodput target and the channel detection performance, this module walks the
closed-form chain: target false-positive rate, idle-cell probability,
false-positive probability of an idle signature, weight that minimizes it,
and the frame length required to meet the target -- then solves the coupled
(K, L) relation as a fixed point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

from .ormac import ChannelParams

LN2 = math.log(2.0)


class InfeasibleTargetError(ValueError):
    """No frame length can meet the requested false-positive target."""


class FixedPointDivergence(RuntimeError):
    """The (K, L) iteration did not settle within the iteration cap."""

    def __init__(self, message: str, trace: List[int]):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class DimensioningInput:
    N: float
    T: int
    M: int
    G_hat: float
    channel: ChannelParams = ChannelParams(0.99, 1e-3)

    def __post_init__(self) -> None:
        if not 0 < self.N <= self.T:
            raise ValueError(f"need 0 < N <= T, got N={self.N}, T={self.T}")
        if not 0 < self.G_hat <= 1:
            raise ValueError(f"need 0 < G_hat <= 1, got {self.G_hat}")
        if self.M < 1:
            raise ValueError("need M >= 1")
        if self.N <= self.M * LN2:
            raise ValueError(
                f"dimensioning assumes N > M ln2 = {self.M * LN2:.2f}, got N={self.N}"
            )


@dataclass(frozen=True)
class DimensioningResult:
    K: int
    L_hat: int
    p_fa_target: float
    p_fa_predicted: float
    G_predicted: float
    iterations: int
    trace: List[int] = field(default_factory=list)


def target_false_positive(N: float, T: int, G_hat: float) -> float:
    """False-positive rate that makes the expected goodput exactly G_hat."""
    if not 0 < N < T:
        raise ValueError(f"need 0 < N < T, got N={N}, T={T}")
    if not 0 < G_hat <= 1:
        raise ValueError(f"need 0 < G_hat <= 1, got {G_hat}")
    return N * (1.0 - G_hat) / ((T - N) * G_hat)


def idle_probability(K: int, L: int, M: int, N: float) -> float:
    """Probability that a given cell is activated by none of N contenders."""
    if K > L * M:
        raise ValueError("K cannot exceed the L*M cell count")
    if K == L * M:
        return 1.0 if N == 0 else 0.0
    # log-domain: N can be large enough for direct powering to underflow
    return math.exp(N * math.log1p(-K / (L * M)))


def false_positive_probability(
    K: int, L: int, M: int, N: float, channel: ChannelParams
) -> float:
    """Probability that an idle signature is perceived as active.

    All K cells of the idle signature must appear activated: each is either
    genuinely occupied and detected (p_d) or idle and falsely detected (p_f).
    """
    if K == 0:
        return 1.0
    p_idle = idle_probability(K, L, M, N)
    per_cell = channel.p_d + (channel.p_f - channel.p_d) * p_idle
    if per_cell <= 0.0:
        return 0.0
    return math.exp(K * math.log(per_cell))


def k_min(L: int, M: int, N: float) -> float:
    """Real-valued weight minimizing the false-positive rate, capped at L.

    The cap reflects that a device activates at most one preamble per RAO;
    callers round the result up.
    """
    if L < 1 or M < 1 or N < 1:
        raise ValueError("need L, M, N >= 1")
    return L * min(1.0, (M / N) * LN2)


def required_length(
    K: int, M: int, N: float, p_fa_target: float, channel: ChannelParams
) -> float:
    """Real-valued frame length achieving ``p_fa_target`` at weight K."""
    if K < 1:
        raise ValueError("need K >= 1")
    root = p_fa_target ** (1.0 / K)
    if not channel.p_f < root < channel.p_d:
        raise InfeasibleTargetError(
            f"need p_f < p_fa^(1/K) < p_d, got {channel.p_f} vs "
            f"{root:.6g} vs {channel.p_d} (K={K}, target={p_fa_target:.6g})"
        )
    ratio = (root - channel.p_d) / (channel.p_f - channel.p_d)
    inner = math.exp(math.log(ratio) / N)
    return (K / M) / (1.0 - inner)


def analytic_goodput(N: float, T: int, p_fa: float) -> float:
    """Expected goodput N / (N + p_fa * (T - N)); lies in [N/T, 1]."""
    if not 0 <= N <= T:
        raise ValueError(f"need 0 <= N <= T, got N={N}, T={T}")
    if N == 0:
        return 0.0 if p_fa > 0 else 1.0
    return N / (N + p_fa * (T - N))


MAX_FIXED_POINT_ITERATIONS = 100


def dimension(inp: DimensioningInput) -> DimensioningResult:
    """Solve the coupled (K, L) fixed point for the operating point.

    Starts from the ideal-channel length L0 = ceil(N ln(1/p_fa) / (M ln2^2))
    and iterates L -> ceil(required_length(ceil(k_min(L)), ...)) until L
    repeats.  A revisited non-adjacent L value means oscillation, which is
    reported with the visited trace rather than silently truncated.
    """
    p_fa_hat = target_false_positive(inp.N, inp.T, inp.G_hat)
    if p_fa_hat <= 0.0:
        raise InfeasibleTargetError(
            f"target goodput {inp.G_hat} allows no false positives; "
            "unreachable with a noisy channel"
        )
    L = max(1, math.ceil(inp.N * math.log(1.0 / p_fa_hat) / (inp.M * LN2**2)))
    trace = [L]
    visited = {L}
    for iteration in range(1, MAX_FIXED_POINT_ITERATIONS + 1):
        K = math.ceil(k_min(L, inp.M, inp.N))
        # single-preamble signatures have no preamble list to exhaust
        K = min(K, L) if inp.M == 1 else min(K, inp.M, L)
        L_next = math.ceil(required_length(K, inp.M, inp.N, p_fa_hat, inp.channel))
        if L_next == L:
            p_fa_pred = false_positive_probability(K, L, inp.M, inp.N, inp.channel)
            return DimensioningResult(
                K=K,
                L_hat=L,
                p_fa_target=p_fa_hat,
                p_fa_predicted=p_fa_pred,
                G_predicted=analytic_goodput(inp.N, inp.T, p_fa_pred),
                iterations=iteration,
                trace=trace,
            )
        if L_next in visited:
            trace.append(L_next)
            raise FixedPointDivergence(
                f"fixed-point iteration cycles through L values {trace}", trace
            )
        visited.add(L_next)
        trace.append(L_next)
        L = L_next
    raise FixedPointDivergence(
        f"no fixed point within {MAX_FIXED_POINT_ITERATIONS} iterations: {trace}", trace
    )
