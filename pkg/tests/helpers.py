"""Shared builders for randomized test scenarios."""
import numpy as np

from rissim.geom import RisLayout, Vec3
from rissim.linkbudget import AntennaPattern, Scenario


def make_random_scenario(rng: np.random.Generator, m_count: int):
    """Random in-plane layout with random endpoints in front of the surface.

    Returns (scenario, target) with the target a Vec3. Element pattern uses
    the default exponent 1; BS/UE patterns are isotropic so geometry alone
    drives the phasors.
    """
    yz = rng.uniform(-0.05, 0.05, (m_count, 2))
    elements = tuple(Vec3(0.0, float(y), float(z)) for y, z in yz)
    layout = RisLayout(elements, pitch=1e-3, d_y=6.6e-3, d_z=6.6e-3, rings=0)
    bs = Vec3(float(rng.uniform(0.5, 3.0)), float(rng.uniform(-2, 2)), float(rng.uniform(-1, 1)))
    target = Vec3(float(rng.uniform(0.3, 2.5)), float(rng.uniform(-2, 2)), float(rng.uniform(-1, 1)))
    scenario = Scenario(
        frequency_hz=23.8e9,
        tx_power_dbm=10.0,
        bs_position=bs,
        bs_pattern=AntennaPattern(19.0, 0.0),
        ue_pattern=AntennaPattern(3.2, 0.0),
        element_pattern=AntennaPattern(0.0, 1.0),
        layout=layout,
    )
    return scenario, target


def linear_mean_dbm(values_dbm) -> float:
    """dB value of the arithmetic mean of linear powers."""
    linear = 10.0 ** (np.asarray(values_dbm, dtype=float) / 10.0)
    return float(10.0 * np.log10(np.mean(linear)))
