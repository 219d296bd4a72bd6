"""Channel and compute model plus the scalar power solvers.

Powers are in watts, rates in bits/s, clock rates in cycles/s.  The composite
channel factor ``snr_gain`` is gamma/(N0*B) in 1/W, so the uplink rate at power
``p`` is ``bandwidth * log2(1 + snr_gain * p)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

from .errors import ExceedsCapError, InfeasibleRegionError, OffloadError

LN2 = math.log(2.0)
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PlatformProfile:
    f_local: float
    f_remote: float
    p_local: float
    p_rf: float
    p_rx: float
    c_dl: float
    bandwidth: float
    snr_gain: float
    dl_bandwidth: float | None = None
    p_max: float = 10.0
    p_min: float = 0.0

    def __post_init__(self):
        if self.dl_bandwidth is None:
            object.__setattr__(self, "dl_bandwidth", self.bandwidth)
        positive = ("f_local", "f_remote", "p_local", "c_dl", "bandwidth", "snr_gain", "dl_bandwidth", "p_max")
        for name in positive:
            if not getattr(self, name) > 0:
                raise OffloadError(f"profile field {name} must be > 0")
        for name in ("p_rf", "p_rx", "p_min"):
            if not getattr(self, name) >= 0:
                raise OffloadError(f"profile field {name} must be >= 0")
        if not self.p_min < self.p_max:
            raise OffloadError("profile requires p_min < p_max")

    @classmethod
    def from_db(cls, snr_gain_db: float, **kw) -> "PlatformProfile":
        return cls(snr_gain=10.0 ** (snr_gain_db / 10.0), **kw)

    @property
    def snr_gain_db(self) -> float:
        return 10.0 * math.log10(self.snr_gain)


@dataclass(frozen=True)
class ConcurrencyProfile:
    n_ul: int = 1
    n_dl: int = 1
    n_l: int = 1
    n_r: int = 1

    def __post_init__(self):
        for name in ("n_ul", "n_dl", "n_l", "n_r"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise OffloadError(f"concurrency {name} must be an integer >= 1")

    @classmethod
    def uniform(cls, n: int) -> "ConcurrencyProfile":
        return cls(n, n, n, n)


SERIAL_CONC = ConcurrencyProfile()


class ParallelRates(NamedTuple):
    ul: float
    dl: float
    f_l: float
    f_r: float


class PowerSolution(NamedTuple):
    power: float
    degenerate: bool = False


def uplink_capacity(p: float, prof: PlatformProfile) -> float:
    if p < 0:
        raise OffloadError(f"negative power {p}")
    return prof.bandwidth * math.log2(1.0 + prof.snr_gain * p)


def ul_rate(p: float, prof: PlatformProfile, conc: ConcurrencyProfile = SERIAL_CONC) -> float:
    """Per-stream uplink rate when the band is split into ``n_ul`` equal parts."""
    return uplink_capacity(conc.n_ul * p, prof) / conc.n_ul


def dl_rate(prof: PlatformProfile, conc: ConcurrencyProfile = SERIAL_CONC) -> float:
    n = conc.n_dl
    if n == 1:
        return prof.c_dl
    # log2(1 + (2^x - 1) n) = x + log2(n - (n - 1) 2^-x), overflow-free for large x
    x = prof.c_dl / prof.dl_bandwidth
    return prof.dl_bandwidth * (x + math.log2(n - (n - 1) * 2.0 ** (-x))) / n


def parallel_rates(p: float, prof: PlatformProfile, conc: ConcurrencyProfile) -> ParallelRates:
    return ParallelRates(
        ul=ul_rate(p, prof, conc),
        dl=dl_rate(prof, conc),
        f_l=prof.f_local / conc.n_l,
        f_r=prof.f_remote / conc.n_r,
    )


def transmit_energy(p: float, bits: float, c: float, prof: PlatformProfile,
                    conc: ConcurrencyProfile = SERIAL_CONC) -> float:
    """``(p + c) * bits / rate(p)``, with the p -> 0 limit taken when c == 0."""
    if p <= 0.0:
        return bits * LN2 / (prof.bandwidth * prof.snr_gain) if c == 0.0 else math.inf
    return (p + c) * bits / ul_rate(p, prof, conc)


def golden_section_min(f: Callable[[float], float], a: float, b: float,
                       tol: float = 1e-9, max_iter: int = 200) -> float:
    """Minimize a unimodal ``f`` on [a, b]; the endpoints are also checked."""
    lo, hi = a, b
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + GOLDEN * (hi - lo)
            fd = f(d)
    best = c if fc <= fd else d
    fbest = min(fc, fd)
    for x in (a, b):
        fx = f(x)
        if fx < fbest:
            best, fbest = x, fx
    return best


def optimal_ratio_power(prof: PlatformProfile, c: float,
                        conc: ConcurrencyProfile = SERIAL_CONC) -> PowerSolution:
    """Minimizer of ``(p + c) / rate(p)`` over [p_min, p_max].

    The ratio is quasiconvex in ``p``, so golden-section search finds the
    unique minimizer.  With ``c == 0`` the ratio is increasing and the
    infimum sits at ``p -> 0``; if ``p_min == 0`` that point transmits
    nothing, which is reported through ``degenerate``.
    """
    if c < 0:
        raise OffloadError(f"negative ratio offset {c}")
    if c == 0.0:
        return PowerSolution(prof.p_min, prof.p_min == 0.0)

    def ratio(p):
        r = ul_rate(p, prof, conc)
        return (p + c) / r if r > 0 else math.inf

    return PowerSolution(golden_section_min(ratio, prof.p_min, prof.p_max))


def optimal_serial_power(prof: PlatformProfile, lam: float) -> PowerSolution:
    """Energy-plus-weighted-latency optimal uplink power, common to all edges."""
    if lam < 0:
        raise OffloadError(f"negative lambda {lam}")
    return optimal_ratio_power(prof, prof.p_rf + lam)


def clip_power(p: float, lo: float, hi: float) -> float:
    return min(max(p, lo), hi)


def optimal_power_in_interval(bits: float, lo: float, hi: float, c: float,
                              prof: PlatformProfile,
                              conc: ConcurrencyProfile = SERIAL_CONC,
                              unconstrained: float | None = None) -> tuple[float, float]:
    """Minimize ``(p + c) * bits / rate(p)`` over ``[lo, hi]`` clipped to the power box.

    Quasiconvexity makes the constrained minimizer the unconstrained one
    clipped into the interval; callers that already know the unconstrained
    minimizer can pass it to skip the search.
    """
    if not (0 <= lo < hi):
        raise OffloadError(f"bad interval [{lo}, {hi}]")
    a, b = max(lo, prof.p_min), min(hi, prof.p_max)
    if a > b:
        raise InfeasibleRegionError(f"interval [{lo}, {hi}] empty after clipping to power limits")
    if unconstrained is None:
        unconstrained = optimal_ratio_power(prof, c, conc).power
    p = clip_power(unconstrained, a, b)
    return p, transmit_energy(p, bits, c, prof, conc)


def required_power(bits: float, duration: float, prof: PlatformProfile,
                   conc: ConcurrencyProfile = SERIAL_CONC) -> float:
    """Power whose per-stream rate moves ``bits`` in exactly ``duration`` (no cap)."""
    if duration <= 0:
        raise OffloadError(f"non-positive duration {duration}")
    expo = conc.n_ul * bits / (prof.bandwidth * duration)
    if expo > 1000.0:
        return math.inf
    return math.expm1(expo * LN2) / (prof.snr_gain * conc.n_ul)


def power_for_duration(bits: float, duration: float, prof: PlatformProfile,
                       conc: ConcurrencyProfile = SERIAL_CONC) -> float:
    p = required_power(bits, duration, prof, conc)
    if p > prof.p_max:
        raise ExceedsCapError(f"{bits} bits in {duration} s needs {p} W > p_max={prof.p_max} W")
    return p
