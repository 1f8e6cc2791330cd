"""Deterministic synthetic driving logs.

The generator simulates a host vehicle driving straight in the middle lane of
a three-lane road while scripted surrounding vehicles follow free-flow, cut-in
or braking-lead manoeuvres. The host's longitudinal acceleration follows a
first-order lag toward a target deceleration proportional to the current scene
severity, so clustering the logged acceleration recovers the driver's response
levels.

Severity rises as a vehicle in the host lane gets closer than the driver's
threat distance, and rises further when another vehicle occupies the
neighbouring lanes beside the host (no escape room).
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from riskgraph.ingest.exceptions import ScenarioSpecError
from riskgraph.ingest.log_models import (
    TRACK_DY_MAX,
    TRACK_DY_MIN,
    DriverLogRecord,
    TrackObservation,
)

logger = logging.getLogger(__name__)

MANEUVERS: tuple[str, ...] = ("free", "cut_in", "brake")
MIN_SPACING = 6.0
"""Minimum longitudinal spacing in metres between vehicles spawned together."""

HOST_LANE = 2


@dataclass(frozen=True)
class VehicleScript:
    """Scripted behaviour of one surrounding vehicle.

    Attributes:
        track_id: Identifier reported in the log
        lane: Lane index 1..3 at spawn (1 = leftmost, host drives in 2)
        dy0: Longitudinal gap to the host at spawn in metres
        dv: Speed relative to the host at spawn in m/s
        spawn: Time the vehicle appears in seconds
        vanish: Time the vehicle disappears, or None to stay until the end
        maneuver: One of "free", "cut_in", "brake"
        maneuver_start: Time the manoeuvre begins
        target_lane: Destination lane of a cut-in
        maneuver_duration: Lane-change or braking duration in seconds
        decel: Deceleration magnitude of a braking lead in m/s²
    """

    track_id: int
    lane: int
    dy0: float
    dv: float = 0.0
    spawn: float = 0.0
    vanish: float | None = None
    maneuver: str = "free"
    maneuver_start: float = 0.0
    target_lane: int | None = None
    maneuver_duration: float = 3.0
    decel: float = 3.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "track_id": self.track_id,
            "lane": self.lane,
            "dy0": self.dy0,
            "dv": self.dv,
            "spawn": self.spawn,
            "vanish": self.vanish,
            "maneuver": self.maneuver,
            "maneuver_start": self.maneuver_start,
            "target_lane": self.target_lane,
            "maneuver_duration": self.maneuver_duration,
            "decel": self.decel,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> VehicleScript:
        return cls(**dict(data))


@dataclass(frozen=True)
class DriverProfile:
    """How a particular driver reacts to scene severity.

    Attributes:
        driver_id: Label of the driver
        max_decel: Deceleration in m/s² requested at severity 1
        lag: Time constant of the first-order acceleration response in seconds
        threat_distance: Gap in metres below which an in-lane vehicle is a threat
        crowding_gain: Severity added when a vehicle sits beside the host
        release_speed: Opening speed in m/s above which a vehicle stops being a
            threat
        cruise_gain: Proportional gain pulling speed toward cruise, 1/s
        max_recovery: Largest acceleration magnitude used to track the cruise
            speed, m/s²
    """

    driver_id: str = "A"
    max_decel: float = 6.0
    lag: float = 0.3
    threat_distance: float = 40.0
    crowding_gain: float = 0.3
    release_speed: float = 3.0
    cruise_gain: float = 0.5
    max_recovery: float = 1.2

    def to_dict(self) -> dict[str, Any]:
        return {
            "driver_id": self.driver_id,
            "max_decel": self.max_decel,
            "lag": self.lag,
            "threat_distance": self.threat_distance,
            "crowding_gain": self.crowding_gain,
            "release_speed": self.release_speed,
            "cruise_gain": self.cruise_gain,
            "max_recovery": self.max_recovery,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> DriverProfile:
        return cls(**dict(data))


@dataclass(frozen=True)
class NoiseSpec:
    """Standard deviations of the measurement noise added to each channel."""

    ax: float = 0.05
    ay: float = 0.03
    steer: float = 0.002
    lateral_speed: float = 0.01
    lane: float = 0.02
    track: float = 0.05

    def to_dict(self) -> dict[str, Any]:
        return {
            "ax": self.ax,
            "ay": self.ay,
            "steer": self.steer,
            "lateral_speed": self.lateral_speed,
            "lane": self.lane,
            "track": self.track,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> NoiseSpec:
        return cls(**dict(data))


@dataclass(frozen=True)
class ScenarioSpec:
    """A complete scripted drive.

    Attributes:
        duration: Length of the drive in seconds
        host_speed: Initial and cruise speed of the host in m/s
        speed_profile: Optional (time, cruise speed) breakpoints, linearly
            interpolated, overriding the constant cruise speed
        vehicles: Scripts of the surrounding vehicles
        driver: Response profile of the host driver
        lane_count: Number of lanes; only 3 is supported
        lane_width: Lane width in metres
        sample_rate: Sampling rate in Hz
        noise: Measurement noise levels
    """

    duration: float
    host_speed: float = 15.0
    speed_profile: tuple[tuple[float, float], ...] = ()
    vehicles: tuple[VehicleScript, ...] = ()
    driver: DriverProfile = field(default_factory=DriverProfile)
    lane_count: int = 3
    lane_width: float = 3.5
    sample_rate: float = 25.0
    noise: NoiseSpec = field(default_factory=NoiseSpec)

    def to_dict(self) -> dict[str, Any]:
        return {
            "duration": self.duration,
            "host_speed": self.host_speed,
            "speed_profile": [list(p) for p in self.speed_profile],
            "vehicles": [v.to_dict() for v in self.vehicles],
            "driver": self.driver.to_dict(),
            "lane_count": self.lane_count,
            "lane_width": self.lane_width,
            "sample_rate": self.sample_rate,
            "noise": self.noise.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> ScenarioSpec:
        """Builds a scenario from its JSON form.

        Raises:
            ScenarioSpecError: If a key is unknown or a value has the wrong shape
        """
        try:
            kwargs = dict(data)
            kwargs["speed_profile"] = tuple(
                (float(t), float(v)) for t, v in data.get("speed_profile", ())
            )
            kwargs["vehicles"] = tuple(
                VehicleScript.from_dict(v) for v in data.get("vehicles", ())
            )
            kwargs["driver"] = DriverProfile.from_dict(data.get("driver", {}))
            kwargs["noise"] = NoiseSpec.from_dict(data.get("noise", {}))
            return cls(**kwargs)
        except (TypeError, ValueError) as e:
            raise ScenarioSpecError(
                f"Malformed scenario description: {e}\n"
                f"Suggestion: compare the file with resources/demo_scenario.json"
            ) from e


@dataclass(frozen=True)
class SuiteSpec:
    """A long drive made of periodic cut-in episodes.

    Each episode holds one cut-in from a neighbouring lane whose lane-boundary
    crossing falls in the middle of an extraction window, a far free-flow
    vehicle, optionally a third vehicle beside the host on the other side and
    optionally a vehicle approaching from behind.

    A calm episode raises the cruise speed for its first half. The host
    accelerates while the cut-in happens well beyond any threat distance and the
    cut-in vehicle pulls away, so the driver has no reason to brake.

    Attributes:
        episodes: Number of cut-in episodes
        period: Episode length in seconds; a multiple of ``window``
        window: Extraction window length in seconds
        host_speed: Cruise speed of the host in m/s
        gap_modes: Typical gaps in metres at the moment of the cut-in
        gap_spread: Standard deviation of the gap around its mode
        third_vehicle_rate: Probability that a vehicle sits beside the host
        rear_vehicle_rate: Probability of a vehicle approaching from behind
        lane_change_duration: Duration of each cut-in in seconds
        calm_rate: Probability that an episode is calm
        calm_boost: Cruise speed increase in m/s during a calm episode
        driver: Response profile of the host driver
        noise: Measurement noise levels
    """

    episodes: int
    period: float = 10.0
    window: float = 2.0
    host_speed: float = 15.0
    gap_modes: tuple[float, ...] = (8.0, 20.0, 32.0)
    gap_spread: float = 1.0
    third_vehicle_rate: float = 0.5
    rear_vehicle_rate: float = 0.3
    lane_change_duration: float = 3.0
    calm_rate: float = 0.3
    calm_boost: float = 6.0
    driver: DriverProfile = field(default_factory=DriverProfile)
    noise: NoiseSpec = field(default_factory=NoiseSpec)

    def to_dict(self) -> dict[str, Any]:
        return {
            "episodes": self.episodes,
            "period": self.period,
            "window": self.window,
            "host_speed": self.host_speed,
            "gap_modes": list(self.gap_modes),
            "gap_spread": self.gap_spread,
            "third_vehicle_rate": self.third_vehicle_rate,
            "rear_vehicle_rate": self.rear_vehicle_rate,
            "lane_change_duration": self.lane_change_duration,
            "calm_rate": self.calm_rate,
            "calm_boost": self.calm_boost,
            "driver": self.driver.to_dict(),
            "noise": self.noise.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SuiteSpec:
        try:
            kwargs = dict(data)
            kwargs["gap_modes"] = tuple(float(g) for g in data.get("gap_modes", ()))
            if not kwargs["gap_modes"]:
                del kwargs["gap_modes"]
            kwargs["driver"] = DriverProfile.from_dict(data.get("driver", {}))
            kwargs["noise"] = NoiseSpec.from_dict(data.get("noise", {}))
            return cls(**kwargs)
        except (TypeError, ValueError) as e:
            raise ScenarioSpecError(f"Malformed suite description: {e}") from e


def lane_center(lane: int, lane_width: float) -> float:
    """Lateral position of a lane centre in the host frame."""
    return (lane - HOST_LANE) * lane_width


def lane_lines(lane_width: float) -> tuple[float, float, float, float]:
    """Lateral positions of the four lane lines of a three-lane road."""
    return (-1.5 * lane_width, -0.5 * lane_width, 0.5 * lane_width, 1.5 * lane_width)


def validate_scenario(spec: ScenarioSpec) -> None:
    """Checks that a scenario can be realised.

    Raises:
        ScenarioSpecError: If any vehicle or parameter is infeasible
    """
    problems: list[str] = []
    if spec.lane_count != 3:
        problems.append(f"lane_count must be 3, got {spec.lane_count}")
    if spec.duration <= 0 or spec.sample_rate <= 0:
        problems.append("duration and sample_rate must be positive")
    if spec.lane_width <= 0 or spec.host_speed < 0:
        problems.append("lane_width must be positive and host_speed non-negative")
    driver = spec.driver
    if driver.lag <= 0 or driver.threat_distance <= 0 or driver.max_decel < 0:
        problems.append(f"driver {driver.driver_id!r} has a non-positive parameter")

    ids = [v.track_id for v in spec.vehicles]
    if len(ids) != len(set(ids)):
        problems.append("track_id values must be unique")

    for v in spec.vehicles:
        name = f"vehicle {v.track_id}"
        if v.lane not in (1, 2, 3):
            problems.append(f"{name} starts in lane {v.lane}, outside the 3 lanes")
        if v.maneuver not in MANEUVERS:
            problems.append(f"{name} has unknown manoeuvre {v.maneuver!r}")
        if v.maneuver == "cut_in":
            if v.target_lane not in (1, 2, 3):
                problems.append(f"{name} cuts into lane {v.target_lane}, outside")
            elif abs(v.target_lane - v.lane) != 1:
                problems.append(f"{name} cut-in must move to an adjacent lane")
        if v.maneuver_duration <= 0:
            problems.append(f"{name} needs a positive maneuver_duration")
        if not TRACK_DY_MIN <= v.dy0 <= TRACK_DY_MAX:
            problems.append(f"{name} spawns at dy0={v.dy0}, outside the sensed range")
        if v.vanish is not None and v.vanish <= v.spawn:
            problems.append(f"{name} vanishes before it spawns")
        if v.lane == HOST_LANE and abs(v.dy0) < MIN_SPACING:
            problems.append(f"{name} spawns overlapping the host")

    for i, a in enumerate(spec.vehicles):
        for b in spec.vehicles[i + 1 :]:
            same_slot = a.lane == b.lane and math.isclose(a.spawn, b.spawn)
            if same_slot and abs(a.dy0 - b.dy0) < MIN_SPACING:
                problems.append(
                    f"vehicles {a.track_id} and {b.track_id} spawn overlapping "
                    f"in lane {a.lane}"
                )

    if problems:
        raise ScenarioSpecError(
            "Infeasible scenario:\n"
            + "\n".join(f"  - {p}" for p in problems)
            + "\nSuggestion: keep vehicles inside lanes 1-3 and at least "
            f"{MIN_SPACING} m apart at spawn"
        )


@dataclass
class _Vehicle:
    script: VehicleScript
    s: float
    speed: float


def _lateral(
    script: VehicleScript, t: float, lane_width: float
) -> tuple[float, float]:
    """Lateral position and velocity of a vehicle at time t."""
    c0 = lane_center(script.lane, lane_width)
    if script.maneuver != "cut_in" or script.target_lane is None:
        return c0, 0.0
    c1 = lane_center(script.target_lane, lane_width)
    p = (t - script.maneuver_start) / script.maneuver_duration
    if p <= 0.0:
        return c0, 0.0
    if p >= 1.0:
        return c1, 0.0
    x = c0 + (c1 - c0) * (1.0 - math.cos(math.pi * p)) / 2.0
    vx = (c1 - c0) * math.pi / (2.0 * script.maneuver_duration) * math.sin(math.pi * p)
    return x, vx


def _cruise_speed(spec: ScenarioSpec, t: float) -> float:
    if not spec.speed_profile:
        return spec.host_speed
    times = [p[0] for p in spec.speed_profile]
    speeds = [p[1] for p in spec.speed_profile]
    return float(np.interp(t, times, speeds))


def scene_severity(
    positions: Sequence[tuple[float, float, float]],
    driver: DriverProfile,
    lane_width: float,
) -> float:
    """Severity in [0, 1] of a scene from the host's point of view.

    Args:
        positions: (dx, dy, dvy) of every surrounding vehicle
        driver: Profile supplying the threat distance, release speed and
            crowding gain
        lane_width: Lane width in metres

    Returns:
        Proximity of the nearest closing in-lane vehicle, raised by the
        crowding gain when a vehicle sits beside the host
    """
    half = lane_width / 2.0
    base = 0.0
    for dx, dy, dvy in positions:
        if abs(dx) < half and dy >= 0.0 and dvy <= driver.release_speed:
            base = max(base, min(1.0, max(0.0, 1.0 - dy / driver.threat_distance)))
    if base <= 0.0:
        return 0.0
    crowded = any(
        half <= abs(dx) < 3.0 * half and -5.0 <= dy <= 15.0 for dx, dy, _ in positions
    )
    return min(1.0, base + driver.crowding_gain) if crowded else base


def generate_synthetic(spec: ScenarioSpec, seed: int) -> list[DriverLogRecord]:
    """Generate a deterministic synthetic log for a scenario.

    Args:
        spec: Scripted drive
        seed: Seed of the measurement noise

    Returns:
        Records sampled at ``spec.sample_rate`` satisfying every log invariant

    Raises:
        ScenarioSpecError: If the scenario is infeasible

    Example:
        >>> spec = ScenarioSpec(duration=10.0)
        >>> records = generate_synthetic(spec, seed=0)
        >>> all(not r.tracks for r in records)
        True
    """
    validate_scenario(spec)
    rng = np.random.default_rng(seed)
    driver = spec.driver
    noise = spec.noise
    dt = 1.0 / spec.sample_rate
    steps = int(math.floor(spec.duration * spec.sample_rate + 1e-9)) + 1
    lines = lane_lines(spec.lane_width)

    host_speed = spec.host_speed
    host_s = 0.0
    ax = 0.0
    alive: dict[int, _Vehicle] = {}
    spawned: set[int] = set()
    records: list[DriverLogRecord] = []

    for k in range(steps):
        t = k * dt
        for script in spec.vehicles:
            ended = script.vanish is not None and t >= script.vanish
            if script.track_id in alive and ended:
                del alive[script.track_id]
            elif script.track_id not in spawned and t >= script.spawn and not ended:
                alive[script.track_id] = _Vehicle(
                    script, host_s + script.dy0, host_speed + script.dv
                )
                spawned.add(script.track_id)

        relative: list[tuple[int, float, float, float, float]] = []
        for track_id in sorted(alive):
            vehicle = alive[track_id]
            x, lateral_speed = _lateral(vehicle.script, t, spec.lane_width)
            relative.append(
                (
                    track_id,
                    x,
                    vehicle.s - host_s,
                    lateral_speed,
                    vehicle.speed - host_speed,
                )
            )

        severity = scene_severity(
            [(dx, dy, dvy) for _, dx, dy, _, dvy in relative], driver, spec.lane_width
        )
        if severity > 0.0:
            target = -driver.max_decel * severity
        else:
            shortfall = _cruise_speed(spec, t) - host_speed
            target = float(
                np.clip(
                    driver.cruise_gain * shortfall,
                    -driver.max_recovery,
                    driver.max_recovery,
                )
            )

        tracks: list[TrackObservation] = []
        for track_id, dx, dy, dvx, dvy in relative:
            if not TRACK_DY_MIN <= dy <= TRACK_DY_MAX:
                continue
            tracks.append(
                TrackObservation(
                    track_id=track_id,
                    dx=dx + float(rng.normal(0.0, noise.track)),
                    dy=float(
                        np.clip(
                            dy + rng.normal(0.0, noise.track),
                            TRACK_DY_MIN,
                            TRACK_DY_MAX,
                        )
                    ),
                    dvx=dvx,
                    dvy=dvy,
                )
            )
        in_lane = [
            (dy, track_id)
            for track_id, dx, dy, _, _ in relative
            if abs(dx) < spec.lane_width / 2.0 and 0.0 <= dy <= TRACK_DY_MAX
        ]
        cipv = min(in_lane)[1] if in_lane else None

        offsets = tuple(

            sorted(line + float(rng.normal(0.0, noise.lane)) for line in lines)

        )
        braking = ax < -0.2
        records.append(
            DriverLogRecord(
                timestamp=round(t, 6),
                ax=ax + float(rng.normal(0.0, noise.ax)),
                ay=float(rng.normal(0.0, noise.ay)),
                steer=float(rng.normal(0.0, noise.steer)),
                brake=(
                    min(1.0, -ax / driver.max_decel)
                    if braking and driver.max_decel
                    else 0.0
                ),
                throttle=0.0 if braking else min(1.0, max(0.0, 0.15 + ax / 3.0)),
                vx=host_speed,
                vy=float(rng.normal(0.0, noise.lateral_speed)),
                lane_offsets=offsets,
                tracks=tuple(tracks),
                cipv_id=cipv,
            )
        )

        ax += (target - ax) * min(1.0, dt / driver.lag)
        host_speed = max(0.0, host_speed + ax * dt)
        host_s += host_speed * dt
        for vehicle in alive.values():
            script = vehicle.script
            if script.maneuver == "brake":
                elapsed = t - script.maneuver_start
                if 0.0 <= elapsed < script.maneuver_duration:
                    vehicle.speed = max(0.0, vehicle.speed - script.decel * dt)
            vehicle.s += vehicle.speed * dt

    logger.debug(
        "Generated %d records with %d scripted vehicles",
        len(records),
        len(spec.vehicles),
    )
    return records


def build_suite(suite: SuiteSpec, seed: int) -> ScenarioSpec:
    """Expand a cut-in suite into an explicit scenario.

    The lane-boundary crossing of each cut-in is placed at the centre of the
    second extraction window of its episode, so a window-based extractor sees
    exactly one lane change per episode.

    Args:
        suite: Suite description
        seed: Seed of the random episode layout

    Returns:
        ScenarioSpec with ``suite.episodes`` scripted cut-ins

    Raises:
        ScenarioSpecError: If the suite parameters are inconsistent
    """
    ratio = suite.period / suite.window
    if suite.episodes < 1 or abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 3:
        raise ScenarioSpecError(
            f"Suite needs at least one episode and a period that is a multiple of "
            f"at least three windows (period={suite.period}, window={suite.window})."
        )
    if suite.lane_change_duration / 2.0 + 0.2 > 1.5 * suite.window:
        raise ScenarioSpecError(
            "Lane change is too long to finish its approach inside the first "
            "window of an episode."
        )
    if not 0.0 <= suite.calm_rate <= 1.0 or suite.calm_boost <= 0.0:
        raise ScenarioSpecError(
            f"calm_rate must lie in [0, 1] and calm_boost must be positive "
            f"(calm_rate={suite.calm_rate}, calm_boost={suite.calm_boost})."
        )
    rng = np.random.default_rng(seed)
    lane_width = 3.5
    vehicles: list[VehicleScript] = []
    profile: list[tuple[float, float]] = []
    for episode in range(suite.episodes):
        t0 = episode * suite.period
        spawn = t0 + 0.2
        vanish = t0 + suite.period - 0.2
        crossing = t0 + 1.5 * suite.window
        start = crossing - suite.lane_change_duration / 2.0
        calm = bool(rng.random() < suite.calm_rate)
        origin = int(rng.choice([1, 3]))
        other = 4 - origin

        if calm:
            boosted = suite.host_speed + suite.calm_boost
            half = t0 + suite.period / 2.0
            profile += [
                (t0, suite.host_speed),
                (t0 + 0.2, boosted),
                (half, boosted),
                (half + 0.2, suite.host_speed),
            ]
            gap = float(rng.uniform(60.0, 75.0))
            dv = suite.calm_boost + float(rng.uniform(2.0, 4.0))
        else:
            mode = float(rng.choice(suite.gap_modes))
            spread = float(rng.normal(0.0, suite.gap_spread))
            gap = max(MIN_SPACING + 0.5, mode + spread)
            dv = float(rng.uniform(-0.5, 0.5))
        base_id = 10 * (episode + 1)
        vehicles.append(
            VehicleScript(
                track_id=base_id + 1,
                lane=origin,
                dy0=gap - dv * (crossing - spawn),
                dv=dv,
                spawn=spawn,
                vanish=vanish,
                maneuver="cut_in",
                maneuver_start=start,
                target_lane=HOST_LANE,
                maneuver_duration=suite.lane_change_duration,
            )
        )
        # Far vehicle of a calm episode: beside the host lane at the boosted speed.
        if calm:
            far = VehicleScript(
                track_id=base_id + 2,
                lane=other,
                dy0=float(rng.uniform(30.0, 50.0)),
                dv=suite.calm_boost + float(rng.uniform(-0.5, 0.5)),
                spawn=spawn,
                vanish=vanish,
            )
        else:
            far = VehicleScript(
                track_id=base_id + 2,
                lane=int(rng.integers(1, 4)),
                dy0=float(rng.uniform(55.0, 90.0)),
                dv=float(rng.uniform(-0.5, 0.5)),
                spawn=spawn,
                vanish=vanish,
            )
        vehicles.append(far)
        if rng.random() < suite.third_vehicle_rate:
            vehicles.append(
                VehicleScript(
                    track_id=base_id + 3,
                    lane=other,
                    dy0=float(rng.uniform(0.0, 12.0)),
                    spawn=spawn,
                    vanish=vanish,
                )
            )
        if rng.random() < suite.rear_vehicle_rate:
            vehicles.append(
                VehicleScript(
                    track_id=base_id + 4,
                    lane=origin,
                    dy0=float(rng.uniform(-25.0, -12.0)),
                    spawn=spawn,
                    vanish=vanish,
                )
            )

    return ScenarioSpec(
        duration=suite.episodes * suite.period - 0.04,
        host_speed=suite.host_speed,
        speed_profile=tuple(profile),
        vehicles=tuple(vehicles),
        driver=suite.driver,
        lane_width=lane_width,
        noise=suite.noise,
    )
