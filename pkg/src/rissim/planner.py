"""Half-power focus region on the user plane and reconfiguration scheduling.

A focused beam illuminates an ellipse on the horizontal user plane: the
azimuth semi-axis comes from the horizontal beamwidth alpha,

    rho_a = |b| * tan(alpha / 2),

and the radial semi-axis from intersecting the vertical beamwidth beta with
the plane at depression angle theta below the surface center,

    rho_r = 1/2 * ( (h_s - h_u) / tan(theta - beta/2)
                  - (h_s - h_u) / tan(theta + beta/2) ).

A mobile user stays served while inside the current ellipse; plan_updates
walks a trajectory and emits a reconfiguration event whenever the user exits
it, re-measuring the beamwidths for every new configuration since they depend
on the chosen element states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, ValidationError
from .geom import SphericalCoord, Vec3, cartesian_to_spherical, spherical_to_cartesian
from .linkbudget import RisConfig, Scenario, config_fingerprint
from .optimizer import ReflectionAlphabet, optimize_config
from .sweep import hpbw

_TIME_STEP_S = 1e-3


@dataclass(frozen=True)
class FocusEllipse:
    """Half-power footprint around a target point on the user plane.

    orientation is the horizontal unit vector from the surface origin's
    ground projection toward the center; rho_r is the semi-axis along it and
    rho_a the semi-axis across it.
    """

    center: Vec3
    rho_a: float
    rho_r: float
    orientation: Vec3

    def __post_init__(self):
        if not (self.rho_a > 0.0 and self.rho_r > 0.0):
            raise ValidationError("ellipse semi-axes must be > 0")

    def contains(self, point: Vec3) -> bool:
        dx, dy = point.x - self.center.x, point.y - self.center.y
        ur_x, ur_y = self.orientation.x, self.orientation.y
        d_radial = dx * ur_x + dy * ur_y
        d_azimuth = -dx * ur_y + dy * ur_x
        return (d_azimuth / self.rho_a) ** 2 + (d_radial / self.rho_r) ** 2 <= 1.0


@dataclass(frozen=True)
class Trajectory:
    """Piecewise-linear path on the user plane, traversed at constant speed."""

    waypoints: tuple[Vec3, ...]
    speed_mps: float

    def __post_init__(self):
        if len(self.waypoints) < 2:
            raise ValidationError("trajectory needs at least two waypoints")
        if not self.speed_mps > 0.0:
            raise ValidationError("speed must be > 0")
        z0 = self.waypoints[0].z
        if any(abs(w.z - z0) > 1e-9 for w in self.waypoints):
            raise ValidationError("waypoints must lie on one horizontal plane")


@dataclass(frozen=True)
class UpdateEvent:
    t_s: float
    position: Vec3
    config_hash: str
    rho_a: float
    rho_r: float


@dataclass(frozen=True)
class UpdateSchedule:
    """Reconfiguration events along a trajectory; first event at t = 0.

    mean_interval_s is None when fewer than two events were emitted.
    """

    events: tuple[UpdateEvent, ...]
    mean_interval_s: float | None


def rho_radial(h_surface: float, h_user: float, theta_ue_deg: float, beta_deg: float) -> float:
    """Radial half-power semi-axis from the vertical beamwidth beta.

    Evaluated with the magnitude of the user's depression angle so both
    tangent arguments stay positive; they must lie inside (0, 90) degrees.
    """
    if not beta_deg > 0.0:
        raise GeometryError(f"beamwidth must be > 0, got {beta_deg}")
    height = h_surface - h_user
    if not height > 0.0:
        raise GeometryError("surface must sit above the user plane")
    theta = abs(theta_ue_deg)
    lo = theta - beta_deg / 2.0
    hi = theta + beta_deg / 2.0
    if lo <= 0.0 or hi >= 90.0:
        raise GeometryError(
            f"half-power cone [{lo}, {hi}] deg does not intersect the plane cleanly"
        )
    return 0.5 * (height / math.tan(math.radians(lo)) - height / math.tan(math.radians(hi)))


def rho_azimuth(range_m: float, alpha_deg: float) -> float:
    """Azimuth half-power semi-axis: range * tan(alpha / 2)."""
    if not range_m > 0.0:
        raise GeometryError(f"range must be > 0, got {range_m}")
    if not 0.0 < alpha_deg < 180.0:
        raise GeometryError(f"beamwidth {alpha_deg} outside (0, 180) deg")
    return range_m * math.tan(math.radians(alpha_deg / 2.0))


def update_interval(rho_m: float, speed_mps: float) -> float:
    """Time to traverse one half-power semi-axis at the given speed."""
    if not speed_mps > 0.0:
        raise ValidationError(f"speed must be > 0, got {speed_mps}")
    return rho_m / speed_mps


def focus_ellipse(
    scenario: Scenario, config: RisConfig, target: SphericalCoord
) -> FocusEllipse:
    """Measure both beamwidths for the given configuration and build the ellipse."""
    alpha = hpbw(scenario, config, target, "azimuth")
    beta = hpbw(scenario, config, target, "elevation")
    center = spherical_to_cartesian(target)
    horizontal = math.hypot(center.x, center.y)
    if horizontal == 0.0:
        raise GeometryError("target sits on the surface axis; no radial direction")
    orientation = Vec3(center.x / horizontal, center.y / horizontal, 0.0)
    return FocusEllipse(
        center=center,
        rho_a=rho_azimuth(target.r, alpha),
        rho_r=rho_radial(0.0, center.z, abs(target.elevation_deg), beta),
        orientation=orientation,
    )


def _polyline(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    pts = np.array([[w.x, w.y, w.z] for w in traj.waypoints])
    seg = np.diff(pts, axis=0)
    lengths = np.sqrt(np.sum(seg * seg, axis=-1))
    cumulative = np.concatenate([[0.0], np.cumsum(lengths)])
    return pts, cumulative


def _position_at(pts: np.ndarray, cumulative: np.ndarray, s: float) -> Vec3:
    total = cumulative[-1]
    s = min(max(s, 0.0), total)
    k = int(np.searchsorted(cumulative, s, side="right")) - 1
    k = min(k, len(cumulative) - 2)
    seg_len = cumulative[k + 1] - cumulative[k]
    if seg_len == 0.0:
        return Vec3.from_array(pts[k])
    frac = (s - cumulative[k]) / seg_len
    return Vec3.from_array(pts[k] + frac * (pts[k + 1] - pts[k]))


def plan_updates(
    scenario: Scenario,
    trajectory: Trajectory,
    alphabet: ReflectionAlphabet,
    time_step_s: float = _TIME_STEP_S,
) -> UpdateSchedule:
    """Event-driven reconfiguration schedule for a moving user.

    At t = 0 the surface is optimized for the start point and its focus
    ellipse computed; a new event fires at the first sampled instant (1 ms
    resolution) the user leaves the current ellipse. Event positions lie on
    the trajectory polyline exactly.
    """
    if not time_step_s > 0.0:
        raise ValidationError("time step must be > 0")
    pts, cumulative = _polyline(trajectory)
    total_time = cumulative[-1] / trajectory.speed_mps

    def reconfigure(t: float, position: Vec3) -> tuple[UpdateEvent, FocusEllipse]:
        config = optimize_config(scenario, position, alphabet)
        ellipse = focus_ellipse(scenario, config, cartesian_to_spherical(position))
        event = UpdateEvent(
            t_s=t,
            position=position,
            config_hash=config_fingerprint(config),
            rho_a=ellipse.rho_a,
            rho_r=ellipse.rho_r,
        )
        return event, ellipse

    start = _position_at(pts, cumulative, 0.0)
    event, ellipse = reconfigure(0.0, start)
    events = [event]

    steps = int(math.floor(total_time / time_step_s + 1e-9))
    for k in range(1, steps + 1):
        t = k * time_step_s
        position = _position_at(pts, cumulative, t * trajectory.speed_mps)
        if not ellipse.contains(position):
            event, ellipse = reconfigure(t, position)
            events.append(event)

    if len(events) >= 2:
        mean = (events[-1].t_s - events[0].t_s) / (len(events) - 1)
    else:
        mean = None
    return UpdateSchedule(tuple(events), mean)
