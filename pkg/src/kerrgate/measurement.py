"""Homodyne X-quadrature measurement of a probe and QND polarization readout.

Quadrature convention
---------------------
The measured quadrature is ``x = a + a^dagger``: a coherent state ``|beta>``
has position wavefunction

    <x|beta> = (2 pi)^(-1/4) * exp(-x^2/4 + beta x - beta^2/2 - |beta|^2/2),

i.e. a Gaussian of variance 1 centred on ``2 Re beta``.  For real ``beta``
this is exactly ``exp(-(x - 2 beta)^2 / 4) / (2 pi)^(1/4)``.

Correction phase
----------------
Under this convention a branch attached to ``alpha e^{i theta}`` acquires,
relative to the ``alpha`` branch, the measurement-dependent phase

    phi(x) = alpha x sin(theta) - (alpha^2 / 2) sin(2 theta)   (mod 2 pi).

Note the ``alpha^2/2`` in the x-independent offset: a commonly quoted form of
this phase carries ``alpha^2 sin(2 theta)`` instead, which is inconsistent
with the kernel normalization above.  The feed-forward corrections in the
gates module always use the kernel-derived value, so they undo exactly the
phases the collapse produced; the discrepancy is a fixed offset and is
documented here rather than silently reconciled.

Every stochastic operation takes an explicit ``numpy.random.Generator``;
identical generators give identical outcomes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import ValidationError
from .states import (
    Branch,
    HybridState,
    coherent_overlap,
    merge_and_prune,
    norm_squared,
    renormalized,
)

_TWO_PI = 2.0 * math.pi
#: (2 pi)^(-1/4), the kernel peak value
KERNEL_PEAK = _TWO_PI ** -0.25

#: minimum grid resolution for the fallback inverse-CDF sampler
GRID_POINTS = 4096
#: half-width (in units of the unit standard deviation) around each peak
GRID_PADDING = 8.0


def kernel_value(x: float, beta: complex) -> complex:
    """Position-space amplitude <x|beta> of a coherent state.

    Evaluated as ``exp(-(x - 2 Re beta)^2 / 4) * exp(i Im beta (x - Re beta))``
    times the peak constant; this rearrangement of the defining exponent is
    exact and avoids catastrophic cancellation for large |beta|.
    """
    beta = complex(beta)
    a, b = beta.real, beta.imag
    mag = math.exp(-0.25 * (x - 2.0 * a) ** 2)
    if b == 0.0:
        return KERNEL_PEAK * mag
    return KERNEL_PEAK * mag * complex(math.cos(b * (x - a)), math.sin(b * (x - a)))


def kernel_phase(x: float, beta: complex) -> float:
    """Phase of <x|beta> in radians, unwrapped (not reduced mod 2 pi)."""
    beta = complex(beta)
    return beta.imag * (x - beta.real)


@dataclass(frozen=True)
class HomodyneRecord:
    """Outcome of one probe quadrature measurement.

    ``parity`` is the threshold classification (even iff ``x > x0``) and
    ``phi`` the kernel-derived correction phase at the measured ``x``,
    reduced mod 2 pi.
    """

    x: float
    x0: float
    parity: Literal["even", "odd"]
    phi: float


SamplingStrategy = Literal["exact-mixture", "grid-inverse-cdf"]


def _basis_groups(state: HybridState) -> dict[tuple[str, ...], list[Branch]]:
    groups: dict[tuple[str, ...], list[Branch]] = {}
    for b in state.branches:
        groups.setdefault(b.basis, []).append(b)
    return groups


def _other_probe_overlap(state: HybridState, probe_index: int, b: Branch, bp: Branch) -> complex:
    ov = 1.0 + 0j
    for p, probe in enumerate(state.probes):
        if p == probe_index:
            continue
        ov *= coherent_overlap(probe.label(bp.phases[p]), probe.label(b.phases[p]))
    return ov


def outcome_density(state: HybridState, probe_index: int) -> Callable[[np.ndarray], np.ndarray]:
    """Exact probability density of the X outcome when measuring one probe.

    Same-basis branches interfere coherently (weighted by the overlap of any
    other, unmeasured probes); distinct basis strings add incoherently.  The
    returned callable accepts scalars or arrays and integrates to the state's
    squared norm (1 for normalized states).
    """
    probe = state.require_probe(probe_index)
    groups = list(_basis_groups(state).values())
    # per group: amplitudes, labels, and the x-independent Gram matrix of the
    # other probes' overlaps
    prepared = []
    for group in groups:
        amps = np.array([b.amplitude for b in group])
        labels = np.array([probe.label(b.phases[probe_index]) for b in group])
        gram = np.array(
            [[_other_probe_overlap(state, probe_index, b, bp) for bp in group] for b in group]
        )
        prepared.append((amps, labels, gram))

    def density(x):
        scalar = np.isscalar(x) or np.ndim(x) == 0
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(xs)
        for amps, labels, gram in prepared:
            # v[i] = amp_i * <x|label_i>, wavefunction of each branch at x
            re = labels.real[:, None]
            im = labels.imag[:, None]
            v = (
                amps[:, None]
                * KERNEL_PEAK
                * np.exp(-0.25 * (xs[None, :] - 2.0 * re) ** 2)
                * np.exp(1j * im * (xs[None, :] - re))
            )
            out += np.real(np.einsum("ix,ij,jx->x", v, gram, v.conj()))
        return float(out[0]) if scalar else out

    return density


def sampling_strategy(state: HybridState, probe_index: int) -> SamplingStrategy:
    """Pick how to draw an X sample for this state.

    ``exact-mixture`` applies when every basis string appears in exactly one
    branch (true for every circuit built here): the density is then literally
    a mixture of unit-variance Gaussians, one per branch.  Otherwise a dense
    inverse-CDF grid is used.
    """
    state.require_probe(probe_index)
    seen = set()
    for b in state.branches:
        if b.basis in seen:
            return "grid-inverse-cdf"
        seen.add(b.basis)
    return "exact-mixture"


def sample_quadrature(
    state: HybridState,
    probe_index: int,
    rng: np.random.Generator,
    n: int = 1,
    strategy: SamplingStrategy | None = None,
) -> np.ndarray:
    """Draw ``n`` independent X samples from the outcome density."""
    probe = state.require_probe(probe_index)
    if strategy is None:
        strategy = sampling_strategy(state, probe_index)
    means = np.array([2.0 * probe.label(b.phases[probe_index]).real for b in state.branches])
    if strategy == "exact-mixture":
        weights = np.array([abs(b.amplitude) ** 2 for b in state.branches])
        weights = weights / weights.sum()
        picks = rng.choice(len(weights), size=n, p=weights)
        return means[picks] + rng.standard_normal(n)
    if strategy != "grid-inverse-cdf":
        raise ValidationError(f"unknown sampling strategy {strategy!r}")
    lo = means.min() - GRID_PADDING
    hi = means.max() + GRID_PADDING
    grid = np.linspace(lo, hi, GRID_POINTS)
    p = outcome_density(state, probe_index)(grid)
    cdf = np.concatenate([[0.0], np.cumsum((p[1:] + p[:-1]) * 0.5 * np.diff(grid))])
    cdf /= cdf[-1]
    return np.interp(rng.random(n), cdf, grid)


def sample_and_collapse(
    state: HybridState,
    probe_index: int,
    rng: np.random.Generator,
    force_x: float | None = None,
) -> tuple[HomodyneRecord, HybridState]:
    """Measure one probe's X quadrature and collapse the state.

    Each branch amplitude is multiplied by its label's kernel value at the
    measured ``x``; the probe leaves the active registry and the state is
    renormalized.  ``force_x`` bypasses sampling (tests use it to pin the
    measurement record); the collapse itself is identical either way.
    """
    probe = state.require_probe(probe_index)
    if force_x is None:
        x = float(sample_quadrature(state, probe_index, rng, 1)[0])
    else:
        x = float(force_x)
    x0 = probe.alpha * (1.0 + math.cos(probe.theta))
    parity = "even" if x > x0 else "odd"
    phi = (
        kernel_phase(x, probe.label(1)) - kernel_phase(x, probe.label(0))
    ) % _TWO_PI
    record = HomodyneRecord(x=x, x0=x0, parity=parity, phi=phi)

    weighted = [
        Branch(b.amplitude * kernel_value(x, probe.label(b.phases[probe_index])), b.basis, b.phases)
        for b in state.branches
    ]
    collapsed = HybridState.from_branches(
        state.n_qubits, weighted, state.probes, state.pruned_mass
    ).drop_probe(probe_index)
    if norm_squared(collapsed) <= 0.0:
        raise ValidationError(f"collapse at x={x} leaves a zero-norm state")
    return record, merge_and_prune(renormalized(collapsed))


def qnd_photon_measure(
    state: HybridState,
    qubit_index: int,
    rng: np.random.Generator,
    force_outcome: str | None = None,
) -> tuple[str, HybridState]:
    """Nondestructive {H, V} measurement of one qubit by the Born rule.

    The photon stays in the state (the qubit is projected, not removed).
    """
    state.require_qubit(qubit_index)
    total = norm_squared(state)
    projected_v = HybridState(
        state.n_qubits,
        tuple(b for b in state.branches if b.basis[qubit_index] == "V"),
        state.probes,
        state.pruned_mass,
    )
    p_v = norm_squared(projected_v) / total
    if force_outcome is None:
        outcome = "V" if rng.random() < p_v else "H"
    else:
        if force_outcome not in ("H", "V"):
            raise ValidationError("forced outcome must be 'H' or 'V'")
        outcome = force_outcome
    kept = tuple(b for b in state.branches if b.basis[qubit_index] == outcome)
    if not kept:
        raise ValidationError(f"forced outcome {outcome!r} has zero probability")
    collapsed = HybridState(state.n_qubits, kept, state.probes, state.pruned_mass)
    return outcome, renormalized(collapsed)
