"""Composite gate procedures: parity detector, entanglers, and the CNOT.

Feed-forward corrections are applied immediately after the measurement that
conditions them.  Each gate carries a declarative :class:`FeedForwardPlan`
covering both outcomes of every measurement, and the executed actions are
recorded on the returned :class:`GateTrace`.

Odd-outcome corrections
-----------------------
The parity measurement leaves the odd branch as
``c0 d1 e^{i phi(x)} |HV> + c1 d0 e^{-i phi(x)} |VH>``.  The phase undo is the
single-qubit gate ``diag(e^{-i phi}, e^{i phi})`` on the gate's first qubit,
which removes both measurement-dependent phases at once; a bit flip then maps
the odd support onto the even one.

For the diagonal-basis entangler used inside the CNOT the flip must act on
the gate's *first* qubit (the shared ancilla), and when that qubit is
entangled with a spectator in the ``c0|HH> + c1|VV>`` form, one residual
correction remains that no operation local to the two gated qubits can
perform: a sign change ``V -> -V`` on the spectator.  The CNOT controller
applies it to the control qubit whenever the second homodyne classifies odd;
with it, both measurement branches land on the same state exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .measurement import HomodyneRecord, qnd_photon_measure, sample_and_collapse
from .optics import (
    apply_cross_kerr,
    apply_single_qubit,
    bit_flip,
    build_parity_coupling_pair,
    diagonal_basis_change,
    diagonal_gate,
    sign_flip,
)
from .states import HybridState, ProbeMode, merge_and_prune

_SQRT_HALF = 1.0 / math.sqrt(2.0)

#: amplitude pair of the CNOT ancilla, (|H> + |V>)/sqrt(2)
ANCILLA_PLUS = (_SQRT_HALF, _SQRT_HALF)

_ANCILLA_TOL = 1e-9


@dataclass(frozen=True)
class FeedForwardRule:
    """Conditional actions for one outcome of one measurement.

    ``actions`` are symbolic, e.g. ``("undo-phase:0", "flip:1")``; qubit
    numbers refer to the gate's argument order, not absolute indices.
    """

    measurement: str
    outcome: str
    actions: tuple[str, ...]


@dataclass(frozen=True)
class FeedForwardPlan:
    rules: tuple[FeedForwardRule, ...]

    def actions_for(self, measurement: str, outcome: str) -> tuple[str, ...]:
        for rule in self.rules:
            if rule.measurement == measurement and rule.outcome == outcome:
                return rule.actions
        raise ValidationError(
            f"plan has no rule for {measurement}={outcome}; plans must be exhaustive"
        )

    def outcomes_covered(self, measurement: str) -> set[str]:
        return {r.outcome for r in self.rules if r.measurement == measurement}


def entangler_plan() -> FeedForwardPlan:
    return FeedForwardPlan(
        (
            FeedForwardRule("homodyne", "even", ()),
            FeedForwardRule("homodyne", "odd", ("undo-phase:0", "flip:1")),
        )
    )


def entangler_45_plan() -> FeedForwardPlan:
    # actions are applied inside the rotated (diagonal) frame
    return FeedForwardPlan(
        (
            FeedForwardRule("homodyne", "even", ()),
            FeedForwardRule("homodyne", "odd", ("undo-phase:0", "flip:0")),
        )
    )


def cnot_plan() -> FeedForwardPlan:
    """Controller-level rules on top of the two entanglers' own plans."""
    return FeedForwardPlan(
        (
            FeedForwardRule("homodyne-45", "even", ()),
            FeedForwardRule("homodyne-45", "odd", ("sign-flip:control",)),
            FeedForwardRule("photon", "H", ()),
            FeedForwardRule("photon", "V", ("flip:target",)),
        )
    )


@dataclass(frozen=True)
class GateTrace:
    """Measurement records and corrections from one gate execution."""

    records: tuple[HomodyneRecord, ...]
    photon_outcomes: tuple[tuple[int, str], ...] = ()
    corrections: tuple[str, ...] = ()
    ancilla_consumed: int = 0


def parity_gate(
    state: HybridState,
    qubit_a: int,
    qubit_b: int,
    probe: ProbeMode,
    basis: str,
    rng: np.random.Generator,
    force_x: float | None = None,
) -> tuple[HomodyneRecord, HybridState]:
    """Two-qubit polarization parity measurement via a shared probe.

    Activates the probe, applies the +theta/-theta kicks, measures the X
    quadrature and collapses.  ``basis='diagonal'`` conjugates the circuit by
    the diagonal-basis change on both qubits.  No feed-forward is applied;
    the odd branch keeps its measurement-dependent phases.
    """
    state.require_qubit(qubit_a)
    state.require_qubit(qubit_b)
    if qubit_a == qubit_b:
        raise ValidationError("parity gate needs two distinct qubits")
    rotate = basis == "diagonal"
    if not rotate and basis != "computational":
        raise ValidationError(f"unknown parity basis {basis!r}")

    state = state.activate_probe(probe)
    probe_index = len(state.probes) - 1
    if rotate:
        state = apply_single_qubit(state, diagonal_basis_change(qubit_a))
        state = apply_single_qubit(state, diagonal_basis_change(qubit_b))
    for coupling in build_parity_coupling_pair(qubit_a, qubit_b, probe_index, basis):
        state = apply_cross_kerr(state, coupling)
    record, state = sample_and_collapse(state, probe_index, rng, force_x=force_x)
    if rotate:
        # the probe is already measured, so leaving the rotated frame after
        # the collapse is equivalent to leaving it before
        state = apply_single_qubit(state, diagonal_basis_change(qubit_a))
        state = apply_single_qubit(state, diagonal_basis_change(qubit_b))
        state = merge_and_prune(state)
    return record, state


def _undo_phase(state: HybridState, qubit: int, phi: float) -> HybridState:
    # diag(e^{-i phi}, e^{i phi}) removes e^{+i phi} from (H, V)-ordered odd
    # branches and e^{-i phi} from (V, H)-ordered ones in a single gate
    return apply_single_qubit(state, diagonal_gate(qubit, -phi, phi))


def _entangler_core(
    state: HybridState,
    qubit_a: int,
    qubit_b: int,
    probe: ProbeMode,
    rng: np.random.Generator,
    force_x: float | None,
    plan: FeedForwardPlan,
) -> tuple[HomodyneRecord, HybridState, tuple[str, ...]]:
    """Computational-basis parity gate plus its conditional corrections."""
    record, state = parity_gate(state, qubit_a, qubit_b, probe, "computational", rng, force_x)
    applied = []
    for action in plan.actions_for("homodyne", record.parity):
        kind, _, slot = action.partition(":")
        qubit = (qubit_a, qubit_b)[int(slot)]
        if kind == "undo-phase":
            state = _undo_phase(state, qubit, record.phi)
        elif kind == "flip":
            state = apply_single_qubit(state, bit_flip(qubit))
        else:
            raise ValidationError(f"unknown feed-forward action {action!r}")
        applied.append(f"{kind}:q{qubit}")
    return record, merge_and_prune(state), tuple(applied)


def entangler(
    state: HybridState,
    qubit_a: int,
    qubit_b: int,
    probe: ProbeMode,
    basis: str,
    rng: np.random.Generator,
    force_x: float | None = None,
) -> tuple[GateTrace, HybridState]:
    """Parity gate plus feed-forward: the output support is the even-parity
    form (``HH``/``VV``, or ``DD``/``DbarDbar`` for ``basis='diagonal'``) for
    both measurement outcomes.

    On odd outcomes the measured-phase undo acts on ``qubit_a`` and the bit
    flip on ``qubit_b``; in the diagonal basis the whole procedure is
    conjugated by the basis change.
    """
    rotate = basis == "diagonal"
    if not rotate and basis != "computational":
        raise ValidationError(f"unknown parity basis {basis!r}")
    if rotate:
        state = apply_single_qubit(state, diagonal_basis_change(qubit_a))
        state = apply_single_qubit(state, diagonal_basis_change(qubit_b))
    record, state, applied = _entangler_core(
        state, qubit_a, qubit_b, probe, rng, force_x, entangler_plan()
    )
    if rotate:
        state = apply_single_qubit(state, diagonal_basis_change(qubit_a))
        state = apply_single_qubit(state, diagonal_basis_change(qubit_b))
        state = merge_and_prune(state)
    return GateTrace(records=(record,), corrections=applied), state


def entangler_45(
    state: HybridState,
    qubit_a: int,
    qubit_b: int,
    probe: ProbeMode,
    rng: np.random.Generator,
    force_x: float | None = None,
) -> tuple[GateTrace, HybridState]:
    """Entangling gate in the diagonal basis, wired for the CNOT.

    The odd-outcome corrections are the measured-phase undo and a bit flip on
    ``qubit_a`` (both inside the rotated frame; the flip is the sign change
    ``V -> -V`` on ``qubit_a`` seen from the computational frame).  When
    ``qubit_a`` is entangled with a spectator qubit, the spectator sign flip
    described in the module docstring is still owed by the caller; see
    :func:`cnot`.
    """
    state = apply_single_qubit(state, diagonal_basis_change(qubit_a))
    state = apply_single_qubit(state, diagonal_basis_change(qubit_b))
    record, state, applied = _entangler_core(
        state, qubit_a, qubit_b, probe, rng, force_x, entangler_45_plan()
    )
    state = apply_single_qubit(state, diagonal_basis_change(qubit_a))
    state = apply_single_qubit(state, diagonal_basis_change(qubit_b))
    return GateTrace(records=(record,), corrections=applied), merge_and_prune(state)


def _check_ancilla_plus(state: HybridState, ancilla: int) -> None:
    """The ancilla must factor out as (|H> + |V>)/sqrt(2)."""
    groups: dict[tuple, dict[str, complex]] = {}
    for b in state.branches:
        rest = (b.basis[:ancilla] + b.basis[ancilla + 1 :], b.phases)
        groups.setdefault(rest, {})[b.basis[ancilla]] = b.amplitude
    for amps in groups.values():
        h, v = amps.get("H", 0j), amps.get("V", 0j)
        if abs(h - v) > _ANCILLA_TOL:
            raise ValidationError(
                "ancilla is not prepared as (|H> + |V>)/sqrt(2); "
                "recycle it with recycle_ancilla first"
            )


def cnot(
    state: HybridState,
    control: int,
    ancilla: int,
    target: int,
    probes: tuple[ProbeMode, ProbeMode],
    rng: np.random.Generator,
    force_x1: float | None = None,
    force_x2: float | None = None,
    force_photon: str | None = None,
) -> tuple[GateTrace, HybridState]:
    """Near-deterministic CNOT from control onto target, using one ancilla.

    Sequence: computational entangler on (control, ancilla), diagonal-basis
    entangler on (ancilla, target), controller sign flip on the control when
    the second homodyne classifies odd, then a QND polarization readout of
    the ancilla with a target bit flip on outcome V.  The ancilla photon is
    measured, not consumed: it ends in the recorded basis state and can be
    recycled for the next gate.
    """
    if len({control, ancilla, target}) != 3:
        raise ValidationError("control, ancilla and target must be distinct")
    for q in (control, ancilla, target):
        state.require_qubit(q)
    _check_ancilla_plus(state, ancilla)
    plan = cnot_plan()
    corrections: list[str] = []

    trace1, state = entangler(state, control, ancilla, probes[0], "computational", rng, force_x1)
    corrections += list(trace1.corrections)

    trace2, state = entangler_45(state, ancilla, target, probes[1], rng, force_x2)
    corrections += list(trace2.corrections)
    for action in plan.actions_for("homodyne-45", trace2.records[0].parity):
        assert action == "sign-flip:control"
        state = apply_single_qubit(state, sign_flip(control))
        corrections.append(f"sign-flip:q{control}")

    outcome, state = qnd_photon_measure(state, ancilla, rng, force_outcome=force_photon)
    for action in plan.actions_for("photon", outcome):
        assert action == "flip:target"
        state = apply_single_qubit(state, bit_flip(target))
        corrections.append(f"flip:q{target}")

    trace = GateTrace(
        records=trace1.records + trace2.records,
        photon_outcomes=((ancilla, outcome),),
        corrections=tuple(corrections),
        ancilla_consumed=0,
    )
    return trace, merge_and_prune(state)


def recycle_ancilla(state: HybridState, ancilla: int, outcome: str) -> HybridState:
    """Return a measured-out ancilla to (|H> + |V>)/sqrt(2) for reuse.

    ``outcome`` is the ancilla's recorded post-CNOT polarization.
    """
    if outcome == "V":
        state = apply_single_qubit(state, bit_flip(ancilla))
    elif outcome != "H":
        raise ValidationError("ancilla outcome must be 'H' or 'V'")
    return apply_single_qubit(state, diagonal_basis_change(ancilla))
