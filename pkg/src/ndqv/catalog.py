"""Named constructors for every target, strategy, and protocol shipped here.

The command line and the invariant checker both resolve names through this
module, so a selector like ``two_qubit_three`` means the same object
everywhere. GHZ families accept sizes inline, e.g. ``ghz4`` or ``ghz3_group``.
"""
from __future__ import annotations

import re

from . import circuits as circ
from . import sequential as seq
from . import states, strategies
from .sequential import SequentialProtocol
from .strategies import Strategy

_THETA_FAMILIES = {
    "two_qubit_three",
    "two_qubit_four",
    "adaptive_two",
    "adaptive_three",
}

_FIXED_STRATEGIES = {
    "bell": strategies.bell_minimal,
    "bell_group": strategies.bell_stabilizer_group,
}

_GHZ_PATTERN = re.compile(r"^ghz(\d+)(_group)?$")


def strategy_names() -> list[str]:
    """Canonical selector spellings, GHZ families abbreviated."""
    return [
        "bell",
        "bell_group",
        "two_qubit_three",
        "two_qubit_four",
        "adaptive_two",
        "adaptive_three",
        "ghz<n>",
        "ghz<n>_group",
    ]


def needs_theta(name: str) -> bool:
    return name in _THETA_FAMILIES


def build_strategy(name: str, theta: float | None = None) -> Strategy:
    """Resolve a selector to its strategy, validating the theta requirement."""
    if name in _FIXED_STRATEGIES:
        if theta is not None:
            raise ValueError(f"{name} does not take theta")
        return _FIXED_STRATEGIES[name]()
    if name in _THETA_FAMILIES:
        if theta is None:
            raise ValueError(f"{name} requires theta")
        builder = getattr(strategies, name)
        return builder(theta)
    m = _GHZ_PATTERN.match(name)
    if m:
        if theta is not None:
            raise ValueError(f"{name} does not take theta")
        n = int(m.group(1))
        spec = strategies.ghz_generator_spec(n)
        if m.group(2):
            return strategies.stabilizer_full_group(spec)
        return strategies.stabilizer_generators(spec)
    raise ValueError(f"unknown strategy {name!r}")


def sequential_bell() -> SequentialProtocol:
    strat = strategies.bell_minimal()
    protocol = seq.compose_sequential(
        strat.target,
        [s.projector for s in strat.settings],
        labels=[s.label for s in strat.settings],
        label="bell_sequential",
    )
    protocol.circuits = circ.compile_bell()
    return protocol


def sequential_two_qubit(theta: float, variant: str = "toffoli") -> SequentialProtocol:
    strat = strategies.two_qubit_three(theta)
    protocol = seq.compose_sequential(
        strat.target,
        [s.projector for s in strat.settings],
        labels=[s.label for s in strat.settings],
        label=f"two_qubit_sequential_{variant}",
        theta=theta,
    )
    protocol.circuits = circ.compile_two_qubit(theta, variant)
    return protocol


def sequential_ghz3() -> SequentialProtocol:
    spec = states.StabilizerGroupSpec(("+XXX", "+ZIZ", "+ZZI"))
    strat = strategies.stabilizer_generators(spec)
    protocol = seq.compose_sequential(
        strat.target,
        [s.projector for s in strat.settings],
        labels=[s.label for s in strat.settings],
        label="ghz3_sequential",
    )
    protocol.circuits = circ.compile_ghz3()
    return protocol


def sequential_adaptive(theta: float) -> SequentialProtocol:
    strat = strategies.adaptive_two(theta)
    protocol = seq.compose_sequential(
        strat.target,
        [s.projector for s in strat.settings],
        labels=[s.label for s in strat.settings],
        label="adaptive_sequential",
        theta=theta,
    )
    parity = circ.compile_bell()[0]
    protocol.circuits = [parity, circ.compile_adaptive(theta)]
    return protocol


def sequential_ghz(n: int) -> SequentialProtocol:
    """Generator checks in sequence; compiled circuits exist only for n = 3."""
    if n == 3:
        return sequential_ghz3()
    spec = strategies.ghz_generator_spec(n)
    strat = strategies.stabilizer_generators(spec)
    return seq.compose_sequential(
        strat.target,
        [s.projector for s in strat.settings],
        labels=[s.label for s in strat.settings],
        label=f"ghz{n}_sequential",
    )


def build_sequential(
    name: str, theta: float | None = None, variant: str = "toffoli"
) -> SequentialProtocol:
    """Resolve a selector to its sequential protocol (circuits attached when compiled)."""
    if name == "bell":
        if theta is not None:
            raise ValueError("bell does not take theta")
        return sequential_bell()
    if name == "two_qubit_three":
        if theta is None:
            raise ValueError("two_qubit_three requires theta")
        return sequential_two_qubit(theta, variant)
    if name == "adaptive_two":
        if theta is None:
            raise ValueError("adaptive_two requires theta")
        return sequential_adaptive(theta)
    m = _GHZ_PATTERN.match(name)
    if m and not m.group(2):
        if theta is not None:
            raise ValueError(f"{name} does not take theta")
        return sequential_ghz(int(m.group(1)))
    raise ValueError(f"no sequential protocol for {name!r}")


def has_sequential(name: str) -> bool:
    if name in ("bell", "two_qubit_three", "adaptive_two"):
        return True
    m = _GHZ_PATTERN.match(name)
    return bool(m and not m.group(2))
