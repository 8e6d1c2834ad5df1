"""Closed-form reference quantities: mapped hoppings, gap, zero-energy localization length."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import xlogy

from .lattice import ModelError, ModelSpec, NonreciprocalForm, Variant

# upper end of the disorder window searched for delocalization points
W_SEARCH_MAX = 10.0
_SERIES_CUTOFF = 1e-4


@dataclass(frozen=True)
class MappedParams:
    t_intra_eff: float
    t_inter_eff: float
    valid: bool


def mapped_params(spec: ModelSpec) -> MappedParams:
    """Hermitian-equivalent (intracell, intercell) hoppings of an open chain.

    Nonreciprocal chain: the diagonal similarity with r^2 = t_r / t_l gives
    t' sqrt(1 + gamma) for the linear form (sqrt(t' (t' + f)) in general).
    Gain/loss chain: sqrt(t^2 - Gamma^2/4) intracell, t' intercell. The
    mapping is flagged invalid where it does not yield a Hermitian chain.
    """
    if spec.variant is Variant.NONRECIPROCAL:
        t_right = spec.t_prime + spec.nonreciprocal_shift()
        product = spec.t_prime * t_right
        if spec.nonreciprocal_form is NonreciprocalForm.LINEAR:
            valid = spec.gamma > -1
        else:
            valid = product > 0
        valid = valid and spec.W2 == 0
        inter = math.copysign(math.sqrt(abs(product)), spec.t_prime) if product > 0 else math.nan
        return MappedParams(spec.t, inter, bool(valid and math.isfinite(inter)))
    if spec.variant is Variant.GAIN_LOSS:
        radicand = spec.t**2 - spec.Gamma**2 / 4
        valid = radicand > 0
        return MappedParams(math.sqrt(max(radicand, 0.0)), spec.t_prime, bool(valid))
    raise ModelError(f"no Hermitian mapping exists for the {spec.variant.value} chain")


def bulk_gap_formula(spec: ModelSpec) -> float:
    """E_g = 2 |t_inter_eff - t_intra_eff|."""
    mp = mapped_params(spec)
    if not mp.valid:
        raise ModelError("mapping is invalid for these parameters")
    return 2.0 * abs(mp.t_inter_eff - mp.t_intra_eff)


def _log_term(a: float, w: float) -> float:
    """(a/2w + 1/2) ln|2a + 2w| - (a/2w - 1/2) ln|2a - 2w|, continuous at w = 0.

    Equals <ln|a + w omega|> + 1 + ln 2 for omega uniform on [-1, 1]. Small w
    uses the series ln|2a| + 1 - sum_k u^2k / (2k (2k+1)), u = w/a.
    """
    if w == 0 or (a != 0 and abs(w) < _SERIES_CUTOFF * abs(a)):
        u2 = (w / a) ** 2
        series = u2 / 6 + u2**2 / 20 + u2**3 / 42
        return math.log(abs(2 * a)) + 1.0 - series
    return (xlogy(a + w, abs(2 * a + 2 * w)) - xlogy(a - w, abs(2 * a - 2 * w))) / (2 * w)


def inverse_localization_length(t_inter: float, W1: float, W2: float, t: float = 1.0) -> float:
    """Lambda^-1 at E = 0 for a Hermitian chiral chain with hoppings t + W1 w and t_inter + W2 w'.

    Log-domain form of the closed-form ensemble average; W1, W2 -> 0 and
    W1 = t are handled by continuous extension.
    """
    a = t_inter / t
    return abs(_log_term(a, W2 / t) - _log_term(1.0, W1 / t))


def localization_length(t_prime: float, gamma: float, W1: float, W2: float = 0.0, t: float = 1.0) -> float:
    """Inverse zero-energy localization length of the open nonreciprocal chain."""
    if gamma <= -1:
        raise ModelError("need gamma > -1")
    return inverse_localization_length(t_prime * math.sqrt(1.0 + gamma), W1, W2, t)


def localization_length_w2zero(t_prime: float, gamma: float, W: float, t: float = 1.0) -> float:
    """The W2 = 0 form: |ln[2 e t' sqrt(1+gamma) |2-2W|^(1/2W - 1/2) / |2+2W|^(1/2W + 1/2)]|."""
    tt = t_prime * math.sqrt(1.0 + gamma) / t
    w = W / t
    log_arg = math.log(2.0 * tt) + 1.0 - _log_term(1.0, w)
    return abs(log_arg)


def _signed_log_ratio(t_inter: float, W: float) -> float:
    return _log_term(t_inter, 0.0) - _log_term(1.0, W)


def critical_disorder(t_prime: float, gamma: float, w_max: float = W_SEARCH_MAX, n_scan: int = 4000) -> list[float]:
    """Disorder strengths W in (0, w_max] where Lambda^-1 (W1 = W, W2 = 0) vanishes.

    Sign changes of the signed log-argument are bracketed on a uniform scan,
    then refined to 1e-10.
    """
    tt = t_prime * math.sqrt(1.0 + gamma)
    grid = np.linspace(w_max / n_scan, w_max, n_scan)
    vals = np.array([_signed_log_ratio(tt, w) for w in grid])
    roots = []
    for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
        roots.append(float(brentq(lambda w: _signed_log_ratio(tt, w), grid[i], grid[i + 1], xtol=1e-10)))
    roots.extend(float(grid[i]) for i in np.flatnonzero(vals == 0))
    return sorted(roots)


def pt_threshold(t: float) -> float:
    """|Gamma| at which PT symmetry of the clean open gain/loss chain breaks."""
    if t <= 0:
        raise ValueError("t must be positive")
    return 2.0 * t
