import logging
import math

import numpy as np

from models.dataset import RunDataset
from models.engine import (
    MAX_ACTUAL_SPEED, SIM_UNITS, SPEED_CEILING, SPEED_FLOOR, FlightProfile, SimulatedRun
)
from models.errors import ArgumentError, ConfigurationError, UsageError

logger = logging.getLogger(__name__)

PROFILE_KINDS = ('default', 'unit_step', 'ascending', 'descending', 'eccentric')

# descending then ascending staircase, 2.5-3 s plateaus
DEFAULT_SCHEDULE = (
    (0.0, 0.95), (2.5, 0.85), (5.0, 0.70), (7.5, 0.55), (10.0, 0.40),
    (13.0, 0.30), (15.5, 0.50), (18.0, 0.65), (20.5, 0.80), (23.0, 0.95)
)
DEFAULT_DURATION = 26.0

STAIRCASE_SPEEDS = (0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 1.0)
STAIRCASE_PLATEAU = 3.0

ECCENTRIC_PLATEAUS = 14
ECCENTRIC_MIN_SPAN = 0.8 * (SPEED_CEILING - SPEED_FLOOR)


class EngineSimService:
    """Surrogate closed-loop turbine simulator.

    A first-order spool driven by a PI speed controller that sets the
    fuel-to-air ratio; thrust and EGT are quadratic output maps with
    additive Gaussian sensor noise.
    """

    def default_profile(self):
        """Notional flight profile: near full throttle, down to near idle, back up to full"""
        return FlightProfile(DEFAULT_SCHEDULE, duration=DEFAULT_DURATION, kind='default')

    def profile_library(self, kind, seed=0):
        """
        Build one of the engine test profiles

        Args:
            kind: 'unit_step', 'ascending', 'descending' or 'eccentric' ('default' is accepted too)
            seed: Seed for the eccentric plateau sequence

        Returns:
            FlightProfile
        """
        if kind == 'default':
            return self.default_profile()

        if kind == 'unit_step':
            return FlightProfile(((0.0, SPEED_FLOOR), (2.0, SPEED_CEILING)), duration=10.0, kind=kind)

        if kind in ('ascending', 'descending'):
            speeds = STAIRCASE_SPEEDS if kind == 'ascending' else STAIRCASE_SPEEDS[::-1]
            segments = tuple((i * STAIRCASE_PLATEAU, v) for i, v in enumerate(speeds))
            return FlightProfile(segments, duration=len(speeds) * STAIRCASE_PLATEAU, kind=kind)

        if kind == 'eccentric':
            return self._eccentric_profile(seed)

        raise UsageError(f"unknown profile kind '{kind}'; expected one of {', '.join(PROFILE_KINDS)}")

    def _eccentric_profile(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(100):
            speeds = np.round(rng.uniform(SPEED_FLOOR, SPEED_CEILING, ECCENTRIC_PLATEAUS), 3)
            holds = np.round(rng.uniform(1.0, 2.5, ECCENTRIC_PLATEAUS), 3)
            if np.ptp(speeds) >= ECCENTRIC_MIN_SPAN:
                break
        else:
            speeds[np.argmin(speeds)] = SPEED_FLOOR
            speeds[np.argmax(speeds)] = SPEED_CEILING

        starts = np.concatenate([[0.0], np.cumsum(holds)[:-1]])
        segments = tuple(zip(starts.tolist(), speeds.tolist()))
        return FlightProfile(segments, duration=float(np.sum(holds)), kind='eccentric')

    def simulate(self, profile, params, duration=None):
        """
        Run the closed-loop surrogate over a flight profile

        Args:
            profile: FlightProfile driving the requested speed
            params: EngineParams
            duration: Seconds to simulate (defaults to the profile's duration)

        Returns:
            SimulatedRun with floor(duration/dt)+1 samples
        """
        duration = profile.duration if duration is None else duration
        if duration is None:
            raise ArgumentError('duration is required for a profile without a nominal duration')
        if not math.isfinite(duration) or duration < params.dt:
            raise UsageError(f'duration must be >= dt ({params.dt} s), got {duration}')

        n = int(math.floor(duration / params.dt + 1e-9)) + 1
        time = np.arange(n) * params.dt
        requested = profile.requested_at(time)

        actual = np.empty(n)
        far = np.empty(n)
        a = requested[0] if params.initial_speed is None else params.initial_speed
        # start in equilibrium for the initial speed
        integral = (a / params.c_fuel) / params.ki if params.ki > 0 else 0.0
        gain = params.dt / params.tau_spool

        for i in range(n):
            actual[i] = a
            error = requested[i] - a
            candidate = integral + error * params.dt
            command = params.kp * error + params.ki * candidate
            if params.far_min <= command <= params.far_max:
                integral = candidate
            # anti-windup: integral frozen while the command is clamped
            far[i] = min(max(command, params.far_min), params.far_max)
            a = a + gain * (params.c_fuel * far[i] - a)

        if np.any(actual > MAX_ACTUAL_SPEED) or np.any(actual < 0):
            raise ConfigurationError('c_fuel', f'actual speed left [0, {MAX_ACTUAL_SPEED}]; check c_fuel * far_max')

        rng = np.random.default_rng(params.seed)
        a2, a1, a0 = params.thrust_coeffs
        b_far, b_n2, b0 = params.egt_coeffs
        thrust = a2 * actual ** 2 + a1 * actual + a0
        egt = b_far * far + b_n2 * actual ** 2 + b0
        if params.noise_sigma > 0:
            thrust = thrust + rng.normal(0.0, params.noise_sigma * a2, n)
            egt = egt + rng.normal(0.0, params.noise_sigma * abs(b0), n)

        logger.info("Simulated %d samples (%s profile, dt=%g s, seed=%d)", n, profile.kind, params.dt, params.seed)
        return SimulatedRun(
            time=time,
            requested_speed=requested,
            actual_speed=actual,
            thrust=thrust,
            egt=egt,
            far=far,
            params=params,
            profile=profile,
            meta={'profile': profile.kind, 'seed': params.seed, 'noise_sigma': params.noise_sigma}
        )

    def to_dataset(self, run, run_id='sim'):
        """Wrap a simulated run as an aligned RunDataset at 1/dt samples per second"""
        return RunDataset(
            run_id=run_id,
            rate=1.0 / run.params.dt,
            channels=run.columns(),
            units=dict(SIM_UNITS),
            meta=dict(run.meta, run_id=run_id)
        )
