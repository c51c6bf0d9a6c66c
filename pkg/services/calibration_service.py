import logging

import numpy as np

from models.calibration import CalibrationFit, CalibrationPoint
from models.errors import ArgumentError, RankDeficiencyError

logger = logging.getLogger(__name__)


class CalibrationService:
    """Load-cell voltage-to-thrust calibration by ordinary least squares"""

    def average_readings(self, readings):
        """
        Collapse raw readings into one calibration point per applied load

        Args:
            readings: Iterable of (applied_force, voltage) pairs; repeated forces are averaged

        Returns:
            List of CalibrationPoint in first-appearance order of each force
        """
        grouped = {}
        for force, voltage in readings:
            grouped.setdefault(float(force), []).append(float(voltage))
        return [CalibrationPoint(force, float(np.mean(volts)), len(volts)) for force, volts in grouped.items()]

    def fit_calibration(self, points):
        """
        Regress applied force on mean voltage

        Args:
            points: CalibrationPoint list (typically 13: six loads in tension, six in compression, zero load)

        Returns:
            CalibrationFit with slope [N/V], intercept [N] and the mean squared residual [N^2]
        """
        points = list(points)
        if len(points) < 2:
            raise ArgumentError(f'calibration needs at least 2 points, got {len(points)}')

        volts = np.array([p.mean_voltage for p in points])
        force = np.array([p.applied_force for p in points])
        v_mean, f_mean = volts.mean(), force.mean()
        sxx = np.sum((volts - v_mean) ** 2)
        if sxx == 0.0:
            raise RankDeficiencyError('all calibration voltages are identical; the slope is undetermined')

        slope = float(np.sum((volts - v_mean) * (force - f_mean)) / sxx)
        intercept = float(f_mean - slope * v_mean)
        residuals = force - (slope * volts + intercept)
        mse = float(np.mean(residuals ** 2))

        logger.info("Calibration fit on %d points: slope=%.6g N/V, intercept=%.6g N, mse=%.3g N^2",
                    len(points), slope, intercept, mse)
        return CalibrationFit(slope, intercept, mse, len(points))

    def apply_calibration(self, fit, voltages):
        """Convert voltages to thrust in newtons"""
        return fit.slope * np.asarray(voltages, dtype=float) + fit.intercept

    def slope_standard_error(self, points, sigma=None):
        """
        Analytic standard error of the OLS slope

        Args:
            points: CalibrationPoint list used for the fit
            sigma: Known force-noise standard deviation; estimated from residuals when omitted
        """
        volts = np.array([p.mean_voltage for p in points])
        sxx = np.sum((volts - volts.mean()) ** 2)
        if sigma is None:
            fit = self.fit_calibration(points)
            if len(points) < 3:
                return 0.0
            sigma = np.sqrt(fit.mse * len(points) / (len(points) - 2))
        return float(sigma / np.sqrt(sxx))
