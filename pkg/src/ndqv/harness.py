"""Monte Carlo acceptance-test harness.

A run draws source copies, pushes each through the chosen protocol on the
chosen backend, and reports pass statistics together with the confidence
bounds they support. Runs are reproducible: the same ExperimentSpec always
yields the same report because every random decision reads a fixed
counter-indexed slot (see rng.uniform_table).

Slot layout per copy: slot 0 selects the source ensemble member (consumed
only for depolarizing noise but always reserved), then each measurement
setting owns its event slots in protocol order. Matrix-backend settings use
one slot each; circuit-backend settings use one slot per recorded event,
so a branching circuit uses two.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import circuits as circ
from . import rng as rngmod
from . import sequential as seq
from .sequential import SequentialProtocol
from .states import NoiseSpec, perturbed_state
from .strategies import Strategy, spectral_gap

Z_95 = 1.959963984540054

MODES = ("stop_on_fail", "count_frequency")
BACKENDS = ("matrix", "circuit")


@dataclass
class ExperimentSpec:
    """One reproducible experiment: protocol, backend, source noise, budget."""

    protocol: Strategy | SequentialProtocol
    noise: NoiseSpec
    n_copies: int
    seed: int
    backend: str = "matrix"
    mode: str = "stop_on_fail"

    def __post_init__(self) -> None:
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.n_copies < 1:
            raise ValueError("n_copies must be at least 1")


@dataclass
class RunReport:
    """Outcome of one experiment, in fixed field order for serialization."""

    protocol_label: str
    protocol_kind: str
    backend: str
    mode: str
    noise_kind: str
    epsilon: float
    seed: int
    nu: float
    n_requested: int
    n_run: int
    n_pass: int
    frequency: float
    per_setting_attempts: list[int]
    per_setting_passes: list[int]
    delta_exponential: float | None
    delta_chernoff: float | None
    fidelity_estimate: dict | None
    verdict: str
    schema: int = 1


def confidence_exponential(epsilon: float, nu: float, n: int) -> float:
    """All-pass significance level (1 - epsilon*nu)^n."""
    x = nu * epsilon
    if not 0.0 < x < 1.0:
        raise ValueError("epsilon*nu must lie in (0, 1)")
    if n < 0:
        raise ValueError("n must be nonnegative")
    return (1.0 - x) ** n


def bernoulli_divergence(x: float, y: float) -> float:
    """KL divergence D(x || y) between Bernoulli(x) and Bernoulli(y), nats."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if not 0.0 < y < 1.0:
        raise ValueError("y must lie in (0, 1)")
    total = 0.0
    if x > 0.0:
        total += x * math.log(x / y)
    if x < 1.0:
        total += (1.0 - x) * math.log((1.0 - x) / (1.0 - y))
    return total


def confidence_chernoff(
    f: float, epsilon: float, nu: float, n: int
) -> float | None:
    """Tail bound exp(-n D(f || 1 - epsilon*nu)); None when f is inconclusive.

    A pass frequency at or below the noisy-source expectation 1 - epsilon*nu
    supports no confidence claim, so the bound only exists above it.
    """
    if not 0.0 <= f <= 1.0:
        raise ValueError("f must lie in [0, 1]")
    x = nu * epsilon
    if not 0.0 < x < 1.0:
        raise ValueError("epsilon*nu must lie in (0, 1)")
    if n < 1:
        raise ValueError("n must be positive")
    threshold = 1.0 - x
    if f <= threshold:
        return None
    return math.exp(-n * bernoulli_divergence(f, threshold))


def wilson_interval(
    successes: int, trials: int, z: float = Z_95
) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    p = successes / trials
    zz = z * z
    denom = 1.0 + zz / trials
    center = (p + zz / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + zz / (4.0 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def estimate_fidelity(report: RunReport) -> tuple[float, float, float]:
    """Point estimate and Wilson 95% interval for source fidelity.

    Valid only for sequential protocols run in count_frequency mode, where
    the all-stage pass probability of each copy equals its fidelity with
    the target.
    """
    if report.protocol_kind != "sequential":
        raise ValueError("fidelity estimation needs a sequential protocol")
    if report.mode != "count_frequency":
        raise ValueError("fidelity estimation needs count_frequency mode")
    if report.n_run < 1:
        raise ValueError("no copies were run")
    low, high = wilson_interval(report.n_pass, report.n_run)
    return (report.n_pass / report.n_run, low, high)


def _protocol_kind(protocol) -> str:
    if isinstance(protocol, Strategy):
        return "strategy"
    if isinstance(protocol, SequentialProtocol):
        return "sequential"
    raise TypeError(f"unsupported protocol type {type(protocol).__name__}")


def _protocol_nu_witness(protocol) -> tuple[float, np.ndarray]:
    if isinstance(protocol, Strategy):
        report = spectral_gap(protocol)
    else:
        report = seq.protocol_gap(protocol)
    return report.nu, report.witness


def _source_ensemble(
    protocol, noise: NoiseSpec, witness: np.ndarray
) -> list[tuple[float, np.ndarray]]:
    """Weighted pure decomposition of the source state."""
    target = protocol.target
    if noise.kind == "depolarizing":
        dim = target.dim
        members = [(1.0 - noise.epsilon, target.vector.copy())]
        eye = np.eye(dim, dtype=complex)
        members += [(noise.epsilon / dim, eye[:, k].copy()) for k in range(dim)]
        return members
    vec = perturbed_state(target, noise, witness=witness)
    return [(1.0, vec)]


def _strategy_member_probs(strategy: Strategy, members) -> np.ndarray:
    """probs[m, j] = acceptance probability of setting j on member m."""
    probs = np.empty((len(members), len(strategy.settings)))
    for m_idx, (_, vec) in enumerate(members):
        for j, setting in enumerate(strategy.settings):
            p = float(np.real(np.vdot(vec, setting.projector @ vec)))
            probs[m_idx, j] = min(max(p, 0.0), 1.0)
    return probs


def _sequential_member_probs(protocol: SequentialProtocol, members) -> np.ndarray:
    """probs[m, i] = conditional pass probability of stage i for member m.

    Valid because a pure source makes every post-pass state deterministic,
    so each stage reduces to a single Bernoulli threshold.
    """
    e0 = np.array([1.0, 0.0], dtype=complex)
    probs = np.empty((len(members), len(protocol.settings)))
    for m_idx, (_, vec) in enumerate(members):
        cur = vec
        for i, setting in enumerate(protocol.settings):
            w = setting.m_pass @ np.kron(cur, e0)
            block = w.reshape(-1, 2)[:, 0]
            p = float(np.real(np.vdot(block, block)))
            p = min(max(p, 0.0), 1.0)
            probs[m_idx, i] = p
            cur = block / math.sqrt(p) if p > 1e-14 else block
    return probs


def _member_column(noise: NoiseSpec, weights, u_col: np.ndarray) -> np.ndarray:
    """Map slot-0 uniforms to ensemble member indices (searchsorted on cdf)."""
    if noise.kind != "depolarizing":
        return np.zeros(len(u_col), dtype=np.intp)
    cdf = np.cumsum(np.asarray(weights))
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, u_col, side="right")
    return np.minimum(idx, len(weights) - 1)


def _circuit_event_slots(circuit: circ.Circuit) -> int:
    """Uniform slots one execution of this circuit may consume."""
    if circuit.pass_rule == "reject_all_zero":
        return 1
    own = sum(1 for g in circuit.gates if g.kind == "MZ")
    if circuit.branches is None:
        return own
    return own + max(_circuit_event_slots(b) for b in circuit.branches.values())


def _system_state_after(circuit: circ.Circuit, out: np.ndarray) -> np.ndarray:
    """Extract the system factor from a passed circuit output.

    Requires the output to be a system (x) ancilla product with the ancillas
    in a single basis state, which holds for every compiled protocol circuit.
    """
    d_sys = 1 << circuit.n_system
    d_anc = 1 << circuit.n_ancilla
    table = out.reshape(d_sys, d_anc)
    col_norms = np.sum(np.abs(table) ** 2, axis=0)
    j = int(np.argmax(col_norms))
    if col_norms[j] < 1.0 - 1e-9:
        raise ValueError("ancillas not in a basis state after pass")
    sys_vec = table[:, j]
    return sys_vec / math.sqrt(float(col_norms[j]))


def _counts_from_bits(bits: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-stage reach/pass counts given the (copies, stages) pass-bit matrix."""
    through = np.logical_and.accumulate(bits, axis=1)
    reach = np.ones_like(bits)
    reach[:, 1:] = through[:, :-1]
    attempts = reach.sum(axis=0)
    passes = (reach & bits).sum(axis=0)
    return through[:, -1], attempts, passes


def _run_matrix(spec: ExperimentSpec, members, slots: int):
    protocol = spec.protocol
    kind = _protocol_kind(protocol)
    n = spec.n_copies
    table = rngmod.uniform_table(spec.seed, n, slots)
    weights = [w for w, _ in members]
    member_idx = _member_column(spec.noise, weights, table[:, 0])

    if kind == "strategy":
        probs = _strategy_member_probs(protocol, members)
        mu = np.array([float(s.weight) for s in protocol.settings])
        cdf = np.cumsum(mu)
        cdf[-1] = 1.0
        setting_idx = np.minimum(
            np.searchsorted(cdf, table[:, 1], side="right"), len(mu) - 1
        )
        passed = table[:, 2] < probs[member_idx, setting_idx]
        if spec.mode == "stop_on_fail":
            fails = np.nonzero(~passed)[0]
            n_run = int(fails[0]) + 1 if fails.size else n
            passed = passed[:n_run]
            setting_idx = setting_idx[:n_run]
        else:
            n_run = n
        l = len(protocol.settings)
        attempts = np.bincount(setting_idx, minlength=l)
        passes = np.bincount(setting_idx[passed], minlength=l)
        return n_run, int(passed.sum()), attempts.tolist(), passes.tolist()

    probs = _sequential_member_probs(protocol, members)
    bits = table[:, 1:] < probs[member_idx, :]
    copy_ok, attempts, passes = _counts_from_bits(bits)
    if spec.mode == "stop_on_fail":
        fails = np.nonzero(~copy_ok)[0]
        n_run = int(fails[0]) + 1 if fails.size else n
        copy_ok, attempts, passes = _counts_from_bits(bits[:n_run])
    else:
        n_run = n
    return n_run, int(copy_ok.sum()), attempts.tolist(), passes.tolist()


def _run_circuit(spec: ExperimentSpec, members, slots: int, slot_spans):
    protocol = spec.protocol
    n = spec.n_copies
    table = rngmod.uniform_table(spec.seed, n, slots)
    weights = [w for w, _ in members]
    member_idx = _member_column(spec.noise, weights, table[:, 0])

    l = len(protocol.circuits)
    attempts = [0] * l
    passes = [0] * l
    n_run = 0
    n_pass = 0
    for c in range(n):
        n_run += 1
        state = members[int(member_idx[c])][1]
        copy_ok = True
        cursor = 1
        for i, circuit in enumerate(protocol.circuits):
            span = slot_spans[i]
            if not copy_ok:
                break
            attempts[i] += 1
            full = circ.fresh_input(circuit, state)
            out, record = circ.apply(
                circuit, full, uniforms=table[c, cursor : cursor + span]
            )
            cursor += span
            if record.passed:
                passes[i] += 1
                state = _system_state_after(circuit, out)
            else:
                copy_ok = False
        if copy_ok:
            n_pass += 1
        elif spec.mode == "stop_on_fail":
            break
    return n_run, n_pass, attempts, passes


def run_experiment(spec: ExperimentSpec) -> RunReport:
    """Execute one experiment and assemble its report."""
    protocol = spec.protocol
    kind = _protocol_kind(protocol)
    if spec.backend == "circuit":
        if kind != "sequential":
            raise ValueError("circuit backend needs a sequential protocol")
        if not protocol.circuits:
            raise ValueError("protocol has no compiled circuits")
        if len(protocol.circuits) != len(protocol.settings):
            raise ValueError("circuit count does not match setting count")

    nu, witness = _protocol_nu_witness(protocol)
    members = _source_ensemble(protocol, spec.noise, witness)

    if spec.backend == "matrix":
        n_settings = len(protocol.settings)
        slots = 1 + (2 if kind == "strategy" else n_settings)
        n_run, n_pass, attempts, passes = _run_matrix(spec, members, slots)
    else:
        slot_spans = [_circuit_event_slots(c) for c in protocol.circuits]
        slots = 1 + sum(slot_spans)
        n_run, n_pass, attempts, passes = _run_circuit(spec, members, slots, slot_spans)

    frequency = n_pass / n_run
    x = nu * spec.noise.epsilon
    delta_exp = None
    delta_chern = None
    if 0.0 < x < 1.0:
        if n_pass == n_run:
            delta_exp = confidence_exponential(spec.noise.epsilon, nu, n_run)
        if spec.mode == "count_frequency":
            delta_chern = confidence_chernoff(frequency, spec.noise.epsilon, nu, n_run)

    if spec.mode == "stop_on_fail":
        verdict = "pass" if n_pass == spec.n_copies else "fail"
    elif 0.0 < x < 1.0:
        verdict = "pass" if frequency > 1.0 - x else "fail"
    else:
        verdict = "pass" if n_pass == n_run else "fail"

    report = RunReport(
        protocol_label=protocol.label,
        protocol_kind=kind,
        backend=spec.backend,
        mode=spec.mode,
        noise_kind=spec.noise.kind,
        epsilon=spec.noise.epsilon,
        seed=spec.seed,
        nu=nu,
        n_requested=spec.n_copies,
        n_run=n_run,
        n_pass=n_pass,
        frequency=frequency,
        per_setting_attempts=attempts,
        per_setting_passes=passes,
        delta_exponential=delta_exp,
        delta_chernoff=delta_chern,
        fidelity_estimate=None,
        verdict=verdict,
    )
    if kind == "sequential" and spec.mode == "count_frequency":
        f_hat, low, high = estimate_fidelity(report)
        report.fidelity_estimate = {"f_hat": f_hat, "ci_low": low, "ci_high": high}
    return report


_CSV_FIELDS = (
    "schema",
    "protocol_label",
    "protocol_kind",
    "backend",
    "mode",
    "noise_kind",
    "epsilon",
    "seed",
    "nu",
    "n_requested",
    "n_run",
    "n_pass",
    "frequency",
    "delta_exponential",
    "delta_chernoff",
    "f_hat",
    "ci_low",
    "ci_high",
    "verdict",
    "per_setting_attempts",
    "per_setting_passes",
)


def report_to_dict(report: RunReport) -> dict:
    return {
        "schema": report.schema,
        "protocol_label": report.protocol_label,
        "protocol_kind": report.protocol_kind,
        "backend": report.backend,
        "mode": report.mode,
        "noise_kind": report.noise_kind,
        "epsilon": report.epsilon,
        "seed": report.seed,
        "nu": report.nu,
        "n_requested": report.n_requested,
        "n_run": report.n_run,
        "n_pass": report.n_pass,
        "frequency": report.frequency,
        "per_setting_attempts": list(report.per_setting_attempts),
        "per_setting_passes": list(report.per_setting_passes),
        "delta_exponential": report.delta_exponential,
        "delta_chernoff": report.delta_chernoff,
        "fidelity_estimate": report.fidelity_estimate,
        "verdict": report.verdict,
    }


def report_to_json(report: RunReport) -> str:
    return json.dumps(report_to_dict(report), sort_keys=True, indent=2) + "\n"


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.17g" % value
    if isinstance(value, (list, tuple)):
        return ";".join(str(v) for v in value)
    return str(value)


def report_csv_header() -> str:
    return ",".join(_CSV_FIELDS)


def report_to_csv_line(report: RunReport) -> str:
    fid = report.fidelity_estimate or {}
    row = {
        **report_to_dict(report),
        "f_hat": fid.get("f_hat"),
        "ci_low": fid.get("ci_low"),
        "ci_high": fid.get("ci_high"),
    }
    return ",".join(_csv_cell(row[name]) for name in _CSV_FIELDS)


def report_to_csv(report: RunReport) -> str:
    return report_csv_header() + "\n" + report_to_csv_line(report) + "\n"
