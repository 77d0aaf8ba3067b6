"""Deterministic synthetic plant logs with scripted actuator attacks.

Channel kinds:
  pump    binary square wave, on for round(period * duty) samples per cycle
  backup  constant 0, runs only when attacked
  valve   tertiary, cycles through an explicit symbol:length pattern
          (0 closed, 1 in transit, 2 open); the pattern sum is the period
  level   continuous triangle wave base..base+amplitude, never attackable

Attacks overwrite a [start, start+duration) span on one or more target
channels (force_on -> 1, force_off -> 0, force_open -> 2) and set the
per-sample attack flag there. Optional per-channel bit-flip noise applies
to discrete channels only, after attacks, from a substream seeded by
(seed, channel index) so channel order in the file is the only thing
that fixes the draw.

Spec files are INI: a [run] section with n, seed, and optional pipeline
defaults (window, threshold, ...), one [channel:NAME] section per
channel, one [attack:ID] section per attack with
action = NAME:force_off, NAME:force_on.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .dataio import ProcessLog
from .detection import ATTACK_CATEGORIES, AttackInterval
from .distances import CONTINUOUS, DISCRETE, Channel
from .errors import SpecError

PUMP = "pump"
BACKUP = "backup"
VALVE = "valve"
LEVEL = "level"
CHANNEL_KINDS = (PUMP, BACKUP, VALVE, LEVEL)

FORCE_ON = "force_on"
FORCE_OFF = "force_off"
FORCE_OPEN = "force_open"
ACTIONS = (FORCE_ON, FORCE_OFF, FORCE_OPEN)

_ACTION_VALUE = {FORCE_ON: 1.0, FORCE_OFF: 0.0, FORCE_OPEN: 2.0}

BUNDLED_SPECS = ("interval1", "interval2", "interval3")


@dataclass
class ChannelSpec:
    name: str
    kind: str
    period: int = 0
    duty: float = 0.5
    # valve only: list of (symbol, run length) pairs
    pattern: tuple[tuple[int, int], ...] = ()
    base: float = 0.0
    amplitude: float = 1.0
    noise: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in CHANNEL_KINDS:
            raise SpecError(
                f"channel {self.name!r}: unknown kind {self.kind!r}, "
                f"expected one of {CHANNEL_KINDS}"
            )
        if self.kind == VALVE:
            if not self.pattern:
                raise SpecError(f"channel {self.name!r}: valve needs a pattern")
            for sym, length in self.pattern:
                if sym not in (0, 1, 2):
                    raise SpecError(
                        f"channel {self.name!r}: pattern symbol {sym} not in 0..2"
                    )
                if length < 1:
                    raise SpecError(
                        f"channel {self.name!r}: pattern length {length} < 1"
                    )
            self.period = sum(length for _, length in self.pattern)
        elif self.kind in (PUMP, LEVEL):
            if self.period < 2:
                raise SpecError(
                    f"channel {self.name!r}: period {self.period} must be >= 2"
                )
        if self.kind == PUMP and not 0.0 < self.duty < 1.0:
            raise SpecError(
                f"channel {self.name!r}: duty {self.duty} must be in (0, 1)"
            )
        if self.kind == LEVEL:
            if self.amplitude <= 0:
                raise SpecError(
                    f"channel {self.name!r}: amplitude {self.amplitude} must be > 0"
                )
            if self.noise != 0.0:
                raise SpecError(
                    f"channel {self.name!r}: level channels do not take noise"
                )
        if not 0.0 <= self.noise < 1.0:
            raise SpecError(
                f"channel {self.name!r}: noise {self.noise} must be in [0, 1)"
            )

    @property
    def alphabet_size(self) -> int:
        return 3 if self.kind == VALVE else 2


@dataclass
class AttackSpec:
    start: int
    duration: int
    # (channel name, action) per targeted channel
    actions: tuple[tuple[str, str], ...]
    category: str = "SSSP"
    affects_process: bool = True

    def __post_init__(self) -> None:
        if self.start < 0 or self.duration < 1:
            raise SpecError(
                f"attack at {self.start}: duration {self.duration} must be >= 1 "
                f"and start nonnegative"
            )
        if not self.actions:
            raise SpecError(f"attack at {self.start}: no actions")
        for name, action in self.actions:
            if action not in ACTIONS:
                raise SpecError(
                    f"attack at {self.start}: unknown action {action!r} on {name!r}"
                )
        if self.category not in ATTACK_CATEGORIES:
            raise SpecError(
                f"attack at {self.start}: unknown category {self.category!r}"
            )

    @property
    def end(self) -> int:
        return self.start + self.duration - 1

    @property
    def targets(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.actions)


@dataclass
class SynthSpec:
    n: int
    seed: int = 0
    channels: tuple[ChannelSpec, ...] = ()
    attacks: tuple[AttackSpec, ...] = ()
    # extra [run] keys from a spec file (window, threshold, ...), raw strings
    run: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n < 0:
            raise SpecError(f"n {self.n} is negative")
        self.channels = tuple(self.channels)
        self.attacks = tuple(self.attacks)
        names = [c.name for c in self.channels]
        if len(set(names)) != len(names):
            dup = sorted({x for x in names if names.count(x) > 1})
            raise SpecError(f"duplicate channel names {dup}")
        by_name = {c.name: c for c in self.channels}
        for a in self.attacks:
            if a.start + a.duration > self.n:
                raise SpecError(
                    f"attack [{a.start}, {a.end}] runs past the log (n={self.n})"
                )
            for name, action in a.actions:
                if name not in by_name:
                    raise SpecError(
                        f"attack at {a.start} targets unknown channel {name!r}"
                    )
                ch = by_name[name]
                if ch.kind == LEVEL:
                    raise SpecError(
                        f"attack at {a.start}: level channel {name!r} is not attackable"
                    )
                if action == FORCE_OPEN and ch.kind != VALVE:
                    raise SpecError(
                        f"attack at {a.start}: force_open needs a valve, "
                        f"{name!r} is a {ch.kind}"
                    )


def _baseline(spec: ChannelSpec, n: int) -> np.ndarray:
    t = np.arange(n)
    if spec.kind == PUMP:
        on_len = int(round(spec.period * spec.duty))
        return ((t % spec.period) < on_len).astype(np.float64)
    if spec.kind == BACKUP:
        return np.zeros(n, dtype=np.float64)
    if spec.kind == VALVE:
        cycle = np.concatenate(
            [np.full(length, sym, dtype=np.float64) for sym, length in spec.pattern]
        )
        return np.tile(cycle, -(-n // spec.period))[:n] if n else cycle[:0]
    # triangle wave: linear rise over the first half period, fall over the second
    phase = t % spec.period
    half = spec.period / 2.0
    frac = np.where(phase < half, phase / half, (spec.period - phase) / half)
    return spec.base + spec.amplitude * frac


def generate(spec: SynthSpec) -> ProcessLog:
    """Render the spec to a log; same spec always gives the same bytes."""
    values = {c.name: _baseline(c, spec.n) for c in spec.channels}
    labels = np.zeros(spec.n, dtype=bool)
    for a in spec.attacks:
        span = slice(a.start, a.start + a.duration)
        for name, action in a.actions:
            values[name][span] = _ACTION_VALUE[action]
        labels[span] = True
    for idx, c in enumerate(spec.channels):
        if c.noise == 0.0 or c.kind == LEVEL:
            continue
        rng = np.random.default_rng([spec.seed, idx])
        flip = rng.random(spec.n) < c.noise
        offsets = rng.integers(1, c.alphabet_size, size=spec.n)
        v = values[c.name]
        v[flip] = (v[flip] + offsets[flip]) % c.alphabet_size
    channels = {
        c.name: Channel(
            c.name,
            values[c.name],
            kind=CONTINUOUS if c.kind == LEVEL else DISCRETE,
        )
        for c in spec.channels
    }
    return ProcessLog(
        timestamps=np.arange(spec.n, dtype=np.int64),
        channels=channels,
        labels=labels,
    )


def attack_intervals(spec: SynthSpec) -> list[AttackInterval]:
    """Ground truth rows matching what generate() injected."""
    return [
        AttackInterval(
            start=a.start,
            end=a.end,
            targets=a.targets,
            category=a.category,
            affects_process=a.affects_process,
        )
        for a in spec.attacks
    ]


# ------------------------------------------------------------- spec files

def _parse_pattern(text: str, where: str) -> tuple[tuple[int, int], ...]:
    pairs = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        sym, _, length = part.partition(":")
        try:
            pairs.append((int(sym), int(length)))
        except ValueError:
            raise SpecError(
                f"{where}: bad pattern entry {part!r}, expected symbol:length"
            ) from None
    if not pairs:
        raise SpecError(f"{where}: empty pattern")
    return tuple(pairs)


def _parse_actions(text: str, where: str) -> tuple[tuple[str, str], ...]:
    actions = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        name, sep, action = part.partition(":")
        if not sep or not name.strip() or not action.strip():
            raise SpecError(
                f"{where}: bad action {part!r}, expected CHANNEL:force_xxx"
            )
        actions.append((name.strip(), action.strip()))
    if not actions:
        raise SpecError(f"{where}: empty action list")
    return tuple(actions)


def _get_typed(section, key: str, conv, default, where: str):
    if key not in section:
        return default
    raw = section[key]
    try:
        if conv is bool:
            token = raw.strip().lower()
            if token in ("true", "1", "yes"):
                return True
            if token in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        return conv(raw)
    except ValueError:
        raise SpecError(f"{where}: bad value {raw!r} for {key}") from None


def parse_spec(text: str, source: str = "<spec>") -> SynthSpec:
    # ':' stays out of the delimiters so pattern/action values survive
    cp = configparser.ConfigParser(delimiters=("=",), interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise SpecError(f"{source}: {exc}") from None
    if "run" not in cp:
        raise SpecError(f"{source}: missing [run] section")
    run = dict(cp["run"])
    n = _get_typed(cp["run"], "n", int, None, f"{source} [run]")
    if n is None:
        raise SpecError(f"{source} [run]: n is required")
    seed = _get_typed(cp["run"], "seed", int, 0, f"{source} [run]")
    run.pop("n", None)
    run.pop("seed", None)

    channels = []
    attacks = []
    for section in cp.sections():
        if section == "run":
            continue
        kind_tag, _, name = section.partition(":")
        where = f"{source} [{section}]"
        sec = cp[section]
        if kind_tag == "channel":
            if not name:
                raise SpecError(f"{where}: channel section needs a name")
            known = {"kind", "period", "duty", "pattern", "base", "amplitude", "noise"}
            extra = set(sec) - known
            if extra:
                raise SpecError(f"{where}: unknown keys {sorted(extra)}")
            if "kind" not in sec:
                raise SpecError(f"{where}: kind is required")
            channels.append(
                ChannelSpec(
                    name=name,
                    kind=sec["kind"].strip(),
                    period=_get_typed(sec, "period", int, 0, where),
                    duty=_get_typed(sec, "duty", float, 0.5, where),
                    pattern=(
                        _parse_pattern(sec["pattern"], where)
                        if "pattern" in sec
                        else ()
                    ),
                    base=_get_typed(sec, "base", float, 0.0, where),
                    amplitude=_get_typed(sec, "amplitude", float, 1.0, where),
                    noise=_get_typed(sec, "noise", float, 0.0, where),
                )
            )
        elif kind_tag == "attack":
            known = {"start", "duration", "action", "category", "affects_process"}
            extra = set(sec) - known
            if extra:
                raise SpecError(f"{where}: unknown keys {sorted(extra)}")
            for key in ("start", "duration", "action"):
                if key not in sec:
                    raise SpecError(f"{where}: {key} is required")
            attacks.append(
                AttackSpec(
                    start=_get_typed(sec, "start", int, 0, where),
                    duration=_get_typed(sec, "duration", int, 1, where),
                    actions=_parse_actions(sec["action"], where),
                    category=sec.get("category", "SSSP").strip(),
                    affects_process=_get_typed(
                        sec, "affects_process", bool, True, where
                    ),
                )
            )
        else:
            raise SpecError(
                f"{where}: unknown section type, expected [run], "
                f"[channel:NAME], or [attack:ID]"
            )
    if not channels:
        raise SpecError(f"{source}: no channel sections")
    return SynthSpec(n=n, seed=seed, channels=tuple(channels),
                     attacks=tuple(attacks), run=run)


def load_spec(path) -> SynthSpec:
    with open(path) as fh:
        return parse_spec(fh.read(), source=str(path))


def bundled_spec_text(name: str) -> str:
    """Text of a packaged interval spec ('interval1' or 'interval1.spec')."""
    stem = name[:-5] if name.endswith(".spec") else name
    if stem not in BUNDLED_SPECS:
        raise SpecError(
            f"no bundled spec {name!r}; have {', '.join(BUNDLED_SPECS)}"
        )
    return (
        resources.files("procmp").joinpath(f"specs/{stem}.spec").read_text()
    )


def load_bundled_spec(name: str) -> SynthSpec:
    stem = name[:-5] if name.endswith(".spec") else name
    return parse_spec(bundled_spec_text(stem), source=f"{stem}.spec")
