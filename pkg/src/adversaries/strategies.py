from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

from config import settings
from src.errors import ConfigError


class AdversaryStrategy:
    """A malicious node's broadcast law: one value per time step, shared by all out-neighbours."""

    kind: str = ""

    def value(self, t: float, history: Sequence[float], dt: float) -> float:
        raise NotImplementedError

    def max_slope(self) -> float:
        """Bound on |dv/dt|; finite for every shipped strategy."""
        raise NotImplementedError

    def tokens(self) -> List[str]:
        raise NotImplementedError


def _num(v: float) -> str:
    return repr(float(v))


@dataclass(frozen=True)
class Constant(AdversaryStrategy):
    v: float
    kind = "constant"

    def value(self, t, history, dt):
        return float(self.v)

    def max_slope(self):
        return 0.0

    def tokens(self):
        return [self.kind, _num(self.v)]


@dataclass(frozen=True)
class Ramp(AdversaryStrategy):
    v0: float
    slope: float
    clamp: Optional[float] = None
    kind = "ramp"

    def __post_init__(self) -> None:
        if not math.isfinite(self.slope):
            raise ConfigError(f"ramp slope must be finite, got {self.slope}")

    def value(self, t, history, dt):
        v = self.v0 + self.slope * t
        if self.clamp is None:
            return float(v)
        return float(min(v, self.clamp) if self.slope >= 0 else max(v, self.clamp))

    def max_slope(self):
        return abs(self.slope)

    def tokens(self):
        out = [self.kind, _num(self.v0), _num(self.slope)]
        if self.clamp is not None:
            out += ["clamp", _num(self.clamp)]
        return out


@dataclass(frozen=True)
class Sine(AdversaryStrategy):
    center: float
    amplitude: float
    period: float
    kind = "sine"

    def __post_init__(self) -> None:
        if not self.period > 0:
            raise ConfigError(f"sine period must be positive, got {self.period}")

    def value(self, t, history, dt):
        return float(self.center + self.amplitude * math.sin(2 * math.pi * t / self.period))

    def max_slope(self):
        return abs(self.amplitude) * 2 * math.pi / self.period

    def tokens(self):
        return [self.kind, _num(self.center), _num(self.amplitude), "period", _num(self.period)]


@dataclass(frozen=True)
class Pull(AdversaryStrategy):
    """Move the previous value toward ``target`` by at most ``rate`` per unit time (or round)."""

    target: float
    rate: float = settings.DEFAULT_PULL_RATE
    kind = "pull"

    def __post_init__(self) -> None:
        if not (self.rate >= 0 and math.isfinite(self.rate)):
            raise ConfigError(f"pull rate must be a non-negative number, got {self.rate}")

    def value(self, t, history, dt):
        prev = float(history[-1]) if len(history) else float(self.target)
        gap = self.target - prev
        move = min(abs(gap), self.rate * dt)
        return prev + math.copysign(move, gap)

    def max_slope(self):
        return self.rate

    def tokens(self):
        return [self.kind, _num(self.target), "rate", _num(self.rate)]


def adversary_value(strategy: AdversaryStrategy, t: float, own_history: Sequence[float], dt: float = 1.0) -> float:
    return strategy.value(t, own_history, dt)


# ---------- Scenario-text codec ----------
def _keyword(tokens: Sequence[str], key: str) -> Optional[float]:
    if key not in tokens:
        return None
    idx = list(tokens).index(key)
    if idx + 1 >= len(tokens):
        raise ConfigError(f"'{key}' needs a value")
    return float(tokens[idx + 1])


def _parse_constant(args: Sequence[str]) -> AdversaryStrategy:
    return Constant(float(args[0]))


def _parse_ramp(args: Sequence[str]) -> AdversaryStrategy:
    return Ramp(float(args[0]), float(args[1]), _keyword(args[2:], "clamp"))


def _parse_sine(args: Sequence[str]) -> AdversaryStrategy:
    period = _keyword(args[2:], "period")
    if period is None:
        period = float(args[2])
    return Sine(float(args[0]), float(args[1]), period)


def _parse_pull(args: Sequence[str]) -> AdversaryStrategy:
    rate = _keyword(args[1:], "rate")
    return Pull(float(args[0]), settings.DEFAULT_PULL_RATE if rate is None else rate)


STRATEGIES: Dict[str, Callable[[Sequence[str]], AdversaryStrategy]] = {
    "constant": _parse_constant,
    "ramp": _parse_ramp,
    "sine": _parse_sine,
    "pull": _parse_pull,
}


def parse_strategy(tokens: Sequence[str]) -> AdversaryStrategy:
    if not tokens:
        raise ConfigError("missing adversary strategy")
    kind, args = tokens[0], list(tokens[1:])
    parser = STRATEGIES.get(kind)
    if parser is None:
        raise ConfigError(f"unknown strategy {kind!r}; expected one of {sorted(STRATEGIES)}")
    try:
        return parser(args)
    except (IndexError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad arguments for {kind}: {' '.join(args)!r}") from None


def format_strategy(strategy: AdversaryStrategy) -> str:
    return " ".join(strategy.tokens())
