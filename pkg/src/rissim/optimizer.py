"""Two-state configuration search maximizing power at a target position.

The objective is |sum_m Gamma_m g_m|^2 with g_m the propagation phasor of
element m toward the target. optimize_config runs deterministic coordinate
ascent from several starts: every uniform configuration plus greedy
alignments against a sweep of reference phases (each element independently
picks the state maximizing Re(Gamma * g_m * exp(-j phi0))). The best
converged candidate wins; single-start ascent from the zero-phase greedy
alignment alone gets stuck more than 0.5 dB short of the optimum on a few
percent of instances.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError
from .geom import RisLayout, Vec3
from .linkbudget import ReflectionCoefficient, RisConfig, Scenario, element_phasor_matrix

# Powered-off elements still reflect structurally. Uniform magnitude
# calibrated so the default switched-off setup peaks near -80 dBm on the
# default measurement grid; overridable per scenario.
OFF_STRUCTURAL_MAGNITUDE = 0.157
OFF_STRUCTURAL_PHASE_DEG = 0.0

_REFERENCE_PHASES = 8
_MAX_PASSES = 10


@dataclass(frozen=True)
class ReflectionAlphabet:
    """Named finite set of realizable reflection coefficients."""

    name: str
    states: tuple[ReflectionCoefficient, ...]

    def __post_init__(self):
        if len(self.states) < 1:
            raise ValidationError("alphabet needs at least one state")
        if len(set(self.states)) != len(self.states):
            raise ValidationError("alphabet states must be distinct")

    def index_of(self, coeff: ReflectionCoefficient) -> int:
        try:
            return self.states.index(coeff)
        except ValueError:
            raise ValidationError(
                f"({coeff.magnitude}, {coeff.phase_deg} deg) is not a state of alphabet "
                f"{self.name!r}"
            ) from None


REFLECTIVE = ReflectionAlphabet(
    "reflective",
    (ReflectionCoefficient(0.3, -15.0), ReflectionCoefficient(0.3, 165.0)),
)
ACTIVE = ReflectionAlphabet(
    "active",
    (ReflectionCoefficient(1.25, 0.0), ReflectionCoefficient(0.0, 0.0)),
)
OFF_STRUCTURAL = ReflectionAlphabet(
    "off_structural",
    (ReflectionCoefficient(OFF_STRUCTURAL_MAGNITUDE, OFF_STRUCTURAL_PHASE_DEG),),
)

BUILTIN_ALPHABETS = {a.name: a for a in (REFLECTIVE, ACTIVE, OFF_STRUCTURAL)}


def uniform_config(
    layout: RisLayout, state: ReflectionCoefficient, alphabet_name: str = "uniform"
) -> RisConfig:
    """All elements set to the same state."""
    return RisConfig((state,) * len(layout), alphabet_name)


def _objective(state_complex: list[complex], g: np.ndarray, idx: np.ndarray) -> float:
    coeffs = np.array([state_complex[k] for k in idx])
    s = np.sum(coeffs * g)
    return float(s.real * s.real + s.imag * s.imag)


def _greedy_start(sg: list[list[complex]], phi0: float) -> np.ndarray:
    """Per-element argmax of Re(state * g_m * exp(-j phi0)); ties pick lower index."""
    rot = complex(math.cos(-phi0), math.sin(-phi0))
    m_count = len(sg[0])
    idx = np.zeros(m_count, dtype=np.intp)
    for m in range(m_count):
        best_k, best_re = 0, (sg[0][m] * rot).real
        for k in range(1, len(sg)):
            re = (sg[k][m] * rot).real
            if re > best_re:
                best_k, best_re = k, re
        idx[m] = best_k
    return idx


def _ascend(
    sg: list[list[complex]], start: np.ndarray, max_passes: int
) -> tuple[np.ndarray, bool, list[float]]:
    """Coordinate ascent over element states, fixed element order.

    A state change is accepted only when it strictly increases |total|^2, so
    the per-pass objective sequence is non-decreasing. Returns the final
    indices, whether a full pass made no change, and the objective after each
    pass.
    """
    n_states = len(sg)
    m_count = len(sg[0])
    idx = start.copy()
    total = sum(sg[idx[m]][m] for m in range(m_count))
    pass_objectives: list[float] = []
    converged = False
    for _ in range(max_passes):
        changed = False
        for m in range(m_count):
            base = total - sg[idx[m]][m]
            best_k = idx[m]
            cand = base + sg[best_k][m]
            best_val = cand.real * cand.real + cand.imag * cand.imag
            for k in range(n_states):
                if k == idx[m]:
                    continue
                cand = base + sg[k][m]
                val = cand.real * cand.real + cand.imag * cand.imag
                if val > best_val:
                    best_k, best_val = k, val
            if best_k != idx[m]:
                idx[m] = best_k
                total = base + sg[best_k][m]
                changed = True
        obj = total.real * total.real + total.imag * total.imag
        assert not pass_objectives or obj >= pass_objectives[-1] * (1.0 - 1e-12)
        pass_objectives.append(obj)
        if not changed:
            converged = True
            break
    return idx, converged, pass_objectives


def optimize_config(
    scenario: Scenario,
    target: Vec3,
    alphabet: ReflectionAlphabet,
    max_passes: int = _MAX_PASSES,
    reference_phases: int = _REFERENCE_PHASES,
) -> RisConfig:
    """Pick each element's state to maximize power at the target position.

    Deterministic: fixed start order (uniform configurations in state order,
    then greedy alignments over reference_phases phase offsets), fixed
    element sweep order, strict-improvement-only moves, ties keep the earlier
    candidate. The result is a coordinate-wise local maximum at least as good
    as every uniform configuration.
    """
    g = element_phasor_matrix(scenario, target.as_array()[None, :])[0]
    states = [c.as_complex for c in alphabet.states]
    sg = [[s * gm for gm in g] for s in states]

    starts = [np.full(len(g), k, dtype=np.intp) for k in range(len(states))]
    starts += [
        _greedy_start(sg, 2.0 * math.pi * i / reference_phases)
        for i in range(reference_phases)
    ]

    best_idx: np.ndarray | None = None
    best_obj = -1.0
    for start in starts:
        idx, converged, _ = _ascend(sg, start, max_passes)
        if not converged:
            continue
        obj = _objective(states, g, idx)
        if obj > best_obj:
            best_obj, best_idx = obj, idx
    if best_idx is None:
        raise ConvergenceError(
            f"no coordinate-ascent start converged within {max_passes} passes"
        )
    for k in range(len(states)):
        if best_obj < _objective(states, g, np.full(len(g), k, dtype=np.intp)) * (1.0 - 1e-12):
            raise ConvergenceError("search returned a config worse than a uniform config")
    return RisConfig(tuple(alphabet.states[k] for k in best_idx), alphabet.name)


def brute_force_config(
    scenario: Scenario,
    target: Vec3,
    alphabet: ReflectionAlphabet,
    max_search: int = 2**20,
) -> RisConfig:
    """Globally optimal configuration by exhaustive enumeration.

    Guarded to |alphabet|^M <= max_search. Ties resolve to the
    lexicographically smallest state-index vector (enumeration order).
    """
    m_count = len(scenario.layout)
    n_states = len(alphabet.states)
    if n_states**m_count > max_search:
        raise ValidationError(
            f"search space {n_states}^{m_count} exceeds the {max_search} guard"
        )
    g = element_phasor_matrix(scenario, target.as_array()[None, :])[0]
    states = np.array([c.as_complex for c in alphabet.states])

    best_obj = -1.0
    best_combo: tuple[int, ...] | None = None
    chunk: list[tuple[int, ...]] = []

    def flush(chunk):
        nonlocal best_obj, best_combo
        idx = np.array(chunk, dtype=np.intp)
        sums = np.sum(states[idx] * g[None, :], axis=-1)
        objs = sums.real**2 + sums.imag**2
        k = int(np.argmax(objs))
        if objs[k] > best_obj:  # strict: earlier (lex smaller) combos win ties
            best_obj = float(objs[k])
            best_combo = chunk[k]

    for combo in itertools.product(range(n_states), repeat=m_count):
        chunk.append(combo)
        if len(chunk) == 8192:
            flush(chunk)
            chunk = []
    if chunk:
        flush(chunk)
    assert best_combo is not None
    return RisConfig(tuple(alphabet.states[k] for k in best_combo), alphabet.name)
