"""Coherent per-element received-power model and thermal noise floor.

Received power at a user position b for surface elements at u_m with complex
reflection coefficients Gamma_m:

    P = P_tx * G_bs * G_ue * (d_y * d_z)^2 / (16 pi^2)
        * | sum_m Gamma_m * sqrt(F_m) * exp(-j 2 pi (|a-u_m|+|b-u_m|)/lambda)
            / (|a-u_m| * |b-u_m|) |^2

where a is the base-station position and F_m the combined normalized antenna
pattern of the four hops (BS toward element, element receive, element
re-radiate, UE toward element). Each pattern factor is a cos^q power pattern
normalized to 1 at boresight; the element factors are clamped to zero behind
the surface plane. Gains enter only through the prefactor, never through the
pattern factors.

Boresight conventions: the BS antenna points at the surface center, the UE
antenna points along +z, each element along the surface normal +x.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import GeometryError, ValidationError
from .geom import RisLayout, Vec3

SPEED_OF_LIGHT = 299792458.0  # m/s
BOLTZMANN = 1.380649e-23  # J/K

# Powers below this are reported as the sentinel itself, keeping grids finite.
BELOW_FLOOR_DBM = -250.0
_BELOW_FLOOR_MW = 10.0 ** (BELOW_FLOOR_DBM / 10.0)


def is_below_floor(dbm: float) -> bool:
    return dbm <= BELOW_FLOOR_DBM


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_mw_to_dbm(p_mw: float) -> float:
    """dBm of a linear milliwatt power, clamped at the below-floor sentinel."""
    if p_mw <= _BELOW_FLOOR_MW:
        return BELOW_FLOOR_DBM
    # np.log10 keeps scalar and vectorized conversions bit-identical
    return float(10.0 * np.log10(p_mw))


def _wrap_phase_deg(phase: float) -> float:
    wrapped = (phase + 180.0) % 360.0 - 180.0
    return 180.0 if wrapped == -180.0 else wrapped


@dataclass(frozen=True)
class AntennaPattern:
    """Normalized cos^q power pattern with the antenna's dBi gain kept aside.

    exponent == 0 means isotropic. The pattern value is 1 at boresight and
    clamps to 0 beyond 90 degrees off boresight for exponent > 0.
    """

    gain_dbi: float
    exponent: float

    def __post_init__(self):
        if not (math.isfinite(self.exponent) and self.exponent >= 0.0):
            raise ValidationError(f"pattern exponent must be >= 0, got {self.exponent}")
        if not math.isfinite(self.gain_dbi):
            raise ValidationError("gain must be finite")

    def value_at(self, cos_angle):
        """Pattern value for the cosine of the off-boresight angle."""
        if self.exponent == 0.0:
            return np.ones_like(np.asarray(cos_angle, dtype=float))
        return np.clip(np.asarray(cos_angle, dtype=float), 0.0, None) ** self.exponent


@dataclass(frozen=True)
class ReflectionCoefficient:
    """Complex element response: magnitude and phase in degrees (-180, 180].

    Magnitude 0 means the element is off; its phase is stored as 0.
    """

    magnitude: float
    phase_deg: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.magnitude) and self.magnitude >= 0.0):
            raise ValidationError(f"magnitude must be finite and >= 0, got {self.magnitude}")
        if not math.isfinite(self.phase_deg):
            raise ValidationError("phase must be finite")
        phase = 0.0 if self.magnitude == 0.0 else _wrap_phase_deg(self.phase_deg)
        object.__setattr__(self, "phase_deg", phase)

    @property
    def as_complex(self) -> complex:
        return self.magnitude * complex(
            math.cos(math.radians(self.phase_deg)), math.sin(math.radians(self.phase_deg))
        )


@dataclass(frozen=True)
class RisConfig:
    """One reflection coefficient per element plus the alphabet it came from.

    alphabet_name is a label; membership is enforced where configs are built
    from a named alphabet (optimizers, file loaders), not on every use.
    """

    coefficients: tuple[ReflectionCoefficient, ...]
    alphabet_name: str

    def __len__(self) -> int:
        return len(self.coefficients)

    @cached_property
    def as_complex_array(self) -> np.ndarray:
        arr = np.array([c.as_complex for c in self.coefficients])
        arr.flags.writeable = False
        return arr


@dataclass(frozen=True)
class Scenario:
    """Full static experiment description.

    The element pattern is used twice per element (receive and re-radiate).
    Its gain_dbi field is unused: the element aperture enters the link budget
    through the (d_y * d_z)^2 prefactor.
    """

    frequency_hz: float
    tx_power_dbm: float
    bs_position: Vec3
    bs_pattern: AntennaPattern
    ue_pattern: AntennaPattern
    element_pattern: AntennaPattern
    layout: RisLayout

    def __post_init__(self):
        if not (math.isfinite(self.frequency_hz) and self.frequency_hz > 0.0):
            raise ValidationError(f"frequency must be > 0, got {self.frequency_hz}")
        if not math.isfinite(self.tx_power_dbm):
            raise ValidationError("tx power must be finite")
        if self.bs_position.x == 0.0:
            raise ValidationError("base station must not lie in the surface plane (x == 0)")


def wavelength(scenario: Scenario) -> float:
    return SPEED_OF_LIGHT / scenario.frequency_hz


def prefactor_mw(scenario: Scenario) -> float:
    """Link-budget prefactor in milliwatts: P_tx * G_bs * G_ue * (d_y d_z)^2 / (16 pi^2)."""
    return (
        db_to_linear(scenario.tx_power_dbm)
        * db_to_linear(scenario.bs_pattern.gain_dbi)
        * db_to_linear(scenario.ue_pattern.gain_dbi)
        * (scenario.layout.d_y * scenario.layout.d_z) ** 2
        / (16.0 * math.pi**2)
    )


@lru_cache(maxsize=64)
def _bs_side(scenario: Scenario):
    """Per-element quantities that do not depend on the user position."""
    u = scenario.layout.positions
    a = scenario.bs_position.as_array()
    to_el = u - a[None, :]
    d1 = np.sqrt(np.sum(to_el * to_el, axis=-1))
    if np.any(d1 == 0.0):
        raise GeometryError("base station coincides with an element center")
    boresight = -a / np.linalg.norm(a)  # BS antenna aimed at the surface center
    cos_bs = (to_el @ boresight) / d1
    f_bs = scenario.bs_pattern.value_at(cos_bs)
    cos_in = a[0] / d1  # element x is 0, so (a - u) . x_hat == a_x
    f_in = np.where(cos_in <= 0.0, 0.0, scenario.element_pattern.value_at(cos_in))
    amp = np.sqrt(f_bs * f_in) / d1
    d1.flags.writeable = False
    amp.flags.writeable = False
    return d1, amp


def element_phasor_matrix(scenario: Scenario, positions: np.ndarray) -> np.ndarray:
    """(N, M) complex phasors sqrt(F)*exp(-j2pi(d1+d2)/lambda)/(d1*d2).

    positions: (N, 3) user positions in meters. Raises GeometryError when a
    position coincides with an element center.
    """
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 3:
        raise ValidationError(f"positions must be (N, 3), got {pos.shape}")
    u = scenario.layout.positions
    d1, amp_bs = _bs_side(scenario)

    dv = pos[:, None, :] - u[None, :, :]  # element -> user, per position
    d2 = np.sqrt(np.sum(dv * dv, axis=-1))
    if np.any(d2 == 0.0):
        n, m = np.argwhere(d2 == 0.0)[0]
        raise GeometryError(
            f"user position {tuple(pos[n])} coincides with element {m} center"
        )
    cos_out = dv[..., 0] / d2
    f_out = np.where(cos_out <= 0.0, 0.0, scenario.element_pattern.value_at(cos_out))
    cos_ue = -dv[..., 2] / d2  # UE antenna boresight is +z
    f_ue = scenario.ue_pattern.value_at(cos_ue)

    lam = wavelength(scenario)
    amp = amp_bs[None, :] * np.sqrt(f_out * f_ue) / d2
    return amp * np.exp(-2j * np.pi * (d1[None, :] + d2) / lam)


def element_phasor(scenario: Scenario, m: int, ue_position: Vec3) -> complex:
    """Single-element propagation phasor (reflection coefficient factored out)."""
    if not 0 <= m < len(scenario.layout):
        raise ValidationError(f"element index {m} out of range")
    row = element_phasor_matrix(scenario, ue_position.as_array()[None, :])[0]
    return complex(row[m])


def combined_pattern(scenario: Scenario, m: int, ue_position: Vec3) -> float:
    """Product of the four normalized pattern factors for element m, in [0, 1]."""
    if not 0 <= m < len(scenario.layout):
        raise ValidationError(f"element index {m} out of range")
    u = scenario.layout.positions[m]
    a = scenario.bs_position.as_array()
    b = ue_position.as_array()

    to_el = u - a
    d1 = np.linalg.norm(to_el)
    if d1 == 0.0:
        raise GeometryError("base station coincides with the element center")
    cos_bs = float(to_el @ (-a / np.linalg.norm(a))) / d1
    f_bs = float(scenario.bs_pattern.value_at(cos_bs))

    cos_in = a[0] / d1
    f_in = 0.0 if cos_in <= 0.0 else float(scenario.element_pattern.value_at(cos_in))

    dv = b - u
    d2 = np.linalg.norm(dv)
    if d2 == 0.0:
        raise GeometryError("user position coincides with the element center")
    cos_out = dv[0] / d2
    f_out = 0.0 if cos_out <= 0.0 else float(scenario.element_pattern.value_at(cos_out))
    cos_ue = -dv[2] / d2
    f_ue = float(scenario.ue_pattern.value_at(cos_ue))
    return f_bs * f_in * f_out * f_ue


def coherent_sums(scenario: Scenario, config: RisConfig, positions: np.ndarray) -> np.ndarray:
    """(N,) complex element sums sum_m Gamma_m g_m at each position."""
    if len(config) != len(scenario.layout):
        raise ValidationError(
            f"configuration has {len(config)} coefficients for {len(scenario.layout)} elements"
        )
    phasors = element_phasor_matrix(scenario, positions)
    return np.sum(phasors * config.as_complex_array[None, :], axis=-1)


def received_power(scenario: Scenario, config: RisConfig, ue_position: Vec3) -> float:
    """Received power in dBm at a user position; deterministic, noise-free."""
    s = coherent_sums(scenario, config, ue_position.as_array()[None, :])[0]
    p_mw = prefactor_mw(scenario) * (s.real * s.real + s.imag * s.imag)
    return linear_mw_to_dbm(float(p_mw))


def noise_floor(
    temperature_k: float, bandwidth_hz: float, averages: int, noise_figure_db: float
) -> float:
    """Thermal noise floor in dBm after coherent averaging.

    10*log10(k*T*B / (1 mW * Q)) + NF, with Q the number of averaged records.
    """
    if not temperature_k > 0.0:
        raise ValidationError(f"temperature must be > 0, got {temperature_k}")
    if not bandwidth_hz > 0.0:
        raise ValidationError(f"bandwidth must be > 0, got {bandwidth_hz}")
    if averages < 1:
        raise ValidationError(f"averages must be >= 1, got {averages}")
    if not math.isfinite(noise_figure_db):
        raise ValidationError("noise figure must be finite")
    return 10.0 * math.log10(BOLTZMANN * temperature_k * bandwidth_hz / (1e-3 * averages)) + noise_figure_db


def config_fingerprint(config: RisConfig) -> str:
    """Short stable hash of a configuration (alphabet label + coefficients)."""
    text = config.alphabet_name + "|" + ";".join(
        f"{c.magnitude!r},{c.phase_deg!r}" for c in config.coefficients
    )
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def scenario_fingerprint(scenario: Scenario) -> str:
    """Short stable hash of the physical scenario."""
    parts = [
        repr(scenario.frequency_hz),
        repr(scenario.tx_power_dbm),
        repr((scenario.bs_position.x, scenario.bs_position.y, scenario.bs_position.z)),
        repr((scenario.bs_pattern.gain_dbi, scenario.bs_pattern.exponent)),
        repr((scenario.ue_pattern.gain_dbi, scenario.ue_pattern.exponent)),
        repr((scenario.element_pattern.gain_dbi, scenario.element_pattern.exponent)),
        repr((scenario.layout.pitch, scenario.layout.d_y, scenario.layout.d_z)),
        ";".join(f"{e.y!r},{e.z!r}" for e in scenario.layout.elements),
    ]
    return hashlib.sha256("|".join(parts).encode()).hexdigest()[:12]
