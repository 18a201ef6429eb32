"""
Event-driven simulation of the switched converter.

Each phase is an affine LTI system x' = A x + b. Segments are propagated
exactly with the matrix exponential of the augmented matrix [[A, b], [0, 0]].
Trailing-edge modulation: the switch turns on at every clock and latches off
at the first instant the control signal y = c.x + d falls to the ramp
h(t) = V_l + V_m (t - nT)/T.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq

from fsikit.core.config import settings
from fsikit.core.exceptions import DomainError, UnsupportedTopologyError
from fsikit.schemas.converter import ConverterConfig, Scheme, Topology, VoltageLoop
from fsikit.schemas.results import Classification, ConverterState, OperatingPoint, SimTrace
from fsikit.services.loopgain_service import LoopGainService

logger = logging.getLogger(__name__)

# Switching sequence within one period.
OFF_AT_CLOCK, SWITCHED, SATURATED = 0, 1, 2


def _augment(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = len(b)
    m = np.zeros((n + 1, n + 1))
    m[:n, :n] = a
    m[:n, n] = b
    return m


@dataclass
class CycleResult:
    x_end: np.ndarray
    duty: float
    sequence: int
    dcm: bool = False
    times: List[float] = field(default_factory=list)
    states: List[np.ndarray] = field(default_factory=list)
    switch: List[int] = field(default_factory=list)


class SwitchedModel:
    """Piecewise-affine model of one converter and its controller."""

    def __init__(self, cfg: ConverterConfig, point: Optional[OperatingPoint] = None):
        if cfg.voltage_loop is not VoltageLoop.OPEN and (
            cfg.topology is not Topology.BUCK or cfg.scheme is not Scheme.PCMC
        ):
            raise UnsupportedTopologyError("Closed voltage loop simulation covers the PCMC buck only")
        self.cfg = cfg
        self.point = point or LoopGainService.operating_point(cfg)
        self.period = cfg.T
        self._build()
        self._on_scan = expm(self.m_on * self.period / settings.EVENT_SCAN_POINTS)

    def _build(self) -> None:
        cfg = self.cfg
        labels = ["i_L", "v_C"]
        if cfg.scheme is Scheme.ACMC_TYPE2:
            labels += ["x_c1", "x_c2"]
        elif cfg.scheme is Scheme.ACMC_PI:
            labels += ["x_c1"]
        if cfg.voltage_loop is VoltageLoop.PI:
            labels += ["x_v1"]
        elif cfg.voltage_loop is VoltageLoop.TYPE2:
            labels += ["x_v1", "x_v2"]
        self.labels = labels
        n = self.n = len(labels)
        idx = {name: i for i, name in enumerate(labels)}

        rho, R_c, L, C = cfg.rho, cfg.R_c, cfg.L, cfg.C
        g_load = 1.0 / (cfg.R + cfg.R_c)
        feeding = np.zeros(n)
        feeding[0], feeding[1] = rho * R_c, rho
        isolated = np.zeros(n)
        isolated[1] = rho

        def stage(switch_on: bool) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
            a, b = np.zeros((n, n)), np.zeros(n)
            if cfg.topology is not Topology.BUCK and switch_on:
                a[0, :], b[0] = 0.0, cfg.v_s / L
                a[1, 1] = -g_load / C
                return a, b, isolated
            a[0, :] = -feeding / L
            if cfg.topology is Topology.BUCK:
                b[0] = cfg.v_s / L if switch_on else 0.0
            elif cfg.topology is Topology.BOOST:
                b[0] = cfg.v_s / L
            a[1, 0], a[1, 1] = rho / C, -g_load / C
            return a, b, feeding

        a_on, b_on, self.vo_on = stage(True)
        a_off, b_off, self.vo_off = stage(False)

        # Control voltage v_c = vc_row.x + vc_const.
        vc_row, vc_const = np.zeros(n), self.point.v_c
        loop = cfg.voltage_loop
        ctrl_a, ctrl_b = np.zeros((n, n)), np.zeros(n)
        if loop is not VoltageLoop.OPEN:
            v_r = cfg.v_r
            if loop is VoltageLoop.PROPORTIONAL:
                vc_row, vc_const = -cfg.k_p * feeding, cfg.k_p * v_r
            else:
                k, wz = cfg.vl_K_c, cfg.vl_omega_z
                i1 = idx["x_v1"]
                ctrl_a[i1] = -k * feeding
                ctrl_b[i1] = k * v_r
                vc_row = np.zeros(n)
                vc_row[i1] = 1.0
                if loop is VoltageLoop.PI:
                    vc_row = vc_row - (k / wz) * feeding
                    vc_const = (k / wz) * v_r + v_r
                else:
                    wp = cfg.vl_omega_p
                    i2 = idx["x_v2"]
                    ctrl_a[i2] = -k * (wp / wz - 1.0) * feeding
                    ctrl_a[i2, i2] += -wp
                    ctrl_b[i2] = k * (wp / wz - 1.0) * v_r
                    vc_row[i2] = 1.0
                    vc_const = v_r

        # Current error e = e_row.x + e_const.
        e_row = vc_row.copy()
        e_row[0] -= cfg.R_s
        e_const = vc_const

        if cfg.scheme is Scheme.PCMC:
            c, d = e_row, e_const
        else:
            kc, wz = cfg.K_c, cfg.omega_z
            i1 = idx["x_c1"]
            ctrl_a[i1] = kc * e_row
            ctrl_b[i1] = kc * e_const
            c = vc_row.copy()
            c[i1] += 1.0
            d = vc_const
            if cfg.scheme is Scheme.ACMC_TYPE2:
                wp = cfg.omega_p
                i2 = idx["x_c2"]
                ctrl_a[i2] = kc * (wp / wz - 1.0) * e_row
                ctrl_a[i2, i2] += -wp
                ctrl_b[i2] = kc * (wp / wz - 1.0) * e_const
                c[i2] += 1.0
            else:
                c = c + (kc / wz) * e_row
                d = d + (kc / wz) * e_const

        self.a_on, self.b_on = a_on + ctrl_a, b_on + ctrl_b
        self.a_off, self.b_off = a_off + ctrl_a, b_off + ctrl_b
        self.c, self.d = c, d
        self.m_on = _augment(self.a_on, self.b_on)
        self.m_off = _augment(self.a_off, self.b_off)

    def matrices(self, switch_on: bool) -> Tuple[np.ndarray, np.ndarray]:
        return (self.a_on, self.b_on) if switch_on else (self.a_off, self.b_off)

    def ramp(self, tau: float) -> float:
        return self.cfg.V_l + self.cfg.V_m * tau / self.period

    def control(self, x: np.ndarray) -> float:
        return float(self.c @ x + self.d)

    def output_voltage(self, x: np.ndarray, switch_on: bool) -> float:
        return float((self.vo_on if switch_on else self.vo_off) @ x)

    def state_scale(self) -> np.ndarray:
        """Per-state magnitude used for tolerances and finite-difference steps."""
        pt = self.point
        scale = np.full(self.n, max(self.cfg.V_m, abs(pt.v_c)))
        scale[0] = max(abs(pt.inductor_current), abs(pt.m1 * pt.duty * self.period))
        scale[1] = max(abs(pt.capacitor_voltage), self.cfg.V_m)
        return scale

    def initial_state(self, perturbation: Optional[float] = None) -> np.ndarray:
        """Operating-point estimate at the clock instant, inductor current perturbed."""
        cfg, pt = self.cfg, self.point
        eps = settings.INITIAL_PERTURBATION if perturbation is None else perturbation
        x = np.zeros(self.n)
        x[0] = pt.valley_current * (1.0 + eps)
        x[1] = pt.capacitor_voltage
        idx = {name: i for i, name in enumerate(self.labels)}
        v_c, d = pt.v_c, pt.duty
        trip = self.ramp(d * self.period)
        if cfg.scheme is Scheme.ACMC_TYPE2:
            x[idx["x_c1"]] = trip - v_c
        elif cfg.scheme is Scheme.ACMC_PI:
            peak = pt.inductor_current + pt.m1 * d * self.period / 2.0
            x[idx["x_c1"]] = trip - v_c - cfg.K_c / cfg.omega_z * (v_c - cfg.R_s * peak)
        if cfg.voltage_loop is VoltageLoop.PI:
            x[idx["x_v1"]] = v_c - cfg.v_r - cfg.vl_K_c / cfg.vl_omega_z * (cfg.v_r - pt.v_o)
        elif cfg.voltage_loop is VoltageLoop.TYPE2:
            x[idx["x_v1"]] = v_c - cfg.v_r
        return x

    def state_vector(self, state: Union[ConverterState, np.ndarray]) -> np.ndarray:
        if isinstance(state, ConverterState):
            x = np.array([state.i_L, state.v_C, *state.x_c], dtype=float)
        else:
            x = np.asarray(state, dtype=float).copy()
        if x.shape != (self.n,):
            raise DomainError(f"State needs {self.n} entries ({', '.join(self.labels)})", field="x0")
        return x

    def cycle(self, x: np.ndarray, sample_times: Optional[np.ndarray] = None) -> CycleResult:
        """Advance one clock period from state x."""
        T = self.period
        z0 = np.append(x, 1.0)
        c_aug = np.append(self.c, self.d)

        def trip(z: np.ndarray, tau: float) -> float:
            return float(c_aug @ z) - self.ramp(tau)

        if x[0] <= 0.0:
            return CycleResult(x_end=x.copy(), duty=0.0, sequence=OFF_AT_CLOCK, dcm=True)

        dt = T / settings.EVENT_SCAN_POINTS
        if trip(z0, 0.0) <= 0.0:
            tau_off, z_off, sequence = 0.0, z0, OFF_AT_CLOCK
        else:
            tau_off, z_off, sequence = T, None, SATURATED
            zk = z0
            for k in range(settings.EVENT_SCAN_POINTS):
                zn = self._on_scan @ zk
                if trip(zn, (k + 1) * dt) <= 0.0:
                    t0, zs = k * dt, zk
                    delta = brentq(
                        lambda s: trip(expm(self.m_on * s) @ zs, t0 + s),
                        0.0, dt, xtol=settings.EVENT_XTOL * T,
                    )
                    tau_off, z_off, sequence = t0 + delta, expm(self.m_on * delta) @ zs, SWITCHED
                    break
                zk = zn
            if z_off is None:
                z_off = zk

        z_end, dcm = z_off, False
        remaining = T - tau_off
        if remaining > 0.0:
            steps = settings.OFF_SCAN_POINTS
            step = expm(self.m_off * remaining / steps)
            for _ in range(steps):
                z_end = step @ z_end
                if z_end[0] <= 0.0:
                    dcm = True
                    break

        result = CycleResult(x_end=z_end[:-1].copy(), duty=tau_off / T, sequence=sequence, dcm=dcm)
        if sample_times is not None:
            for tau in sample_times:
                on = tau < tau_off
                z = expm(self.m_on * tau) @ z0 if on else expm(self.m_off * (tau - tau_off)) @ z_off
                result.times.append(float(tau))
                result.states.append(z[:-1])
                result.switch.append(int(on))
        return result


def _alternation_fit(d1: np.ndarray, floor: float) -> Tuple[float, float]:
    """Per-period multiplier of |x[n+1] - x[n]| from a least-squares fit of its log, and the fit's rms residual."""
    log_d = np.log(np.maximum(d1, floor * 1e-6))
    n = np.arange(len(log_d), dtype=float)
    slope, intercept = np.polyfit(n, log_d, 1)
    rms = float(np.sqrt(np.mean((log_d - (slope * n + intercept)) ** 2)))
    return float(np.exp(slope)), rms


def _rk4_step(a: np.ndarray, b: np.ndarray, x: np.ndarray, h: float) -> np.ndarray:
    k1 = a @ x + b
    k2 = a @ (x + 0.5 * h * k1) + b
    k3 = a @ (x + 0.5 * h * k2) + b
    k4 = a @ (x + h * k3) + b
    return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _rk4_affine_map(a: np.ndarray, b: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """One classical RK4 step of x' = A x + b written as x -> P x + q."""
    n = len(b)
    ha = h * a
    eye = np.eye(n)
    ha2 = ha @ ha
    ha3 = ha2 @ ha
    p = eye + ha + ha2 / 2.0 + ha3 / 6.0 + ha3 @ ha / 24.0
    q = h * (eye + ha / 2.0 + ha2 / 6.0 + ha3 / 24.0) @ b
    return p, q


class SwitchSimService:
    """Switched-model simulation and trace classification."""

    @staticmethod
    def state_matrices(cfg: ConverterConfig, switch_on: bool) -> Tuple[np.ndarray, np.ndarray]:
        """Affine system (A, b) of one switching phase, compensator states appended."""
        return SwitchedModel(cfg).matrices(switch_on)

    @staticmethod
    def simulate(
        cfg: ConverterConfig,
        n_periods: int,
        x0: Optional[Union[ConverterState, np.ndarray]] = None,
        samples_per_period: Optional[int] = None,
        settle_periods: Optional[int] = None,
        window_periods: Optional[int] = None,
        model: Optional[SwitchedModel] = None,
    ) -> SimTrace:
        """
        Simulate n_periods clock periods.

        Stops early when the inductor current reaches zero (classification DCM).
        """
        if n_periods < 1:
            raise DomainError("n_periods must be at least 1", field="n_periods")
        model = model or SwitchedModel(cfg)
        T = model.period
        spp = samples_per_period or settings.SAMPLES_PER_PERIOD
        grid = np.arange(spp) * T / spp
        x = model.initial_state() if x0 is None else model.state_vector(x0)

        times, phases, states, switch, clock, duties = [], [], [], [], [], []
        dcm = False
        for n in range(n_periods):
            res = model.cycle(x, sample_times=grid)
            times.extend(n * T + t for t in res.times)
            phases.extend(res.times)
            states.extend(res.states)
            switch.extend(res.switch)
            clock.append(res.x_end)
            duties.append(res.duty)
            if res.dcm:
                logger.warning("Inductor current reached zero in period %d; stopping", n)
                dcm = True
                break
            x = res.x_end

        states_arr = np.array(states)
        switch_arr = np.array(switch, dtype=int)
        times_arr = np.array(times)
        y = states_arr @ model.c + model.d
        h = cfg.V_l + cfg.V_m * np.array(phases) / T
        v_o = np.where(switch_arr == 1, states_arr @ model.vo_on, states_arr @ model.vo_off)
        clock_arr = np.array(clock)
        duty_arr = np.array(duties)
        if dcm:
            classification = Classification.DCM
        else:
            classification = SwitchSimService.classify_trace(clock_arr, settle_periods, window_periods)
        return SimTrace(
            state_labels=model.labels, period=T, times=times_arr, states=states_arr, switch=switch_arr,
            v_o=v_o, y=y, h=h, clock_states=clock_arr, duty_sequence=duty_arr,
            classification=classification, dcm=dcm,
        )

    @staticmethod
    def classify_trace(
        clock_states: np.ndarray, settle_periods: Optional[int] = None, window_periods: Optional[int] = None
    ) -> Classification:
        """
        Classify the clock samples that follow the settling interval.

        PERIOD1 when consecutive samples agree, or when their alternation
        shrinks across the window (quartile means, or a clean geometric fit
        with multiplier below 1); SUBHARMONIC when x[n+2] ~ x[n] while
        x[n+1] differs by more than ten times that.
        """
        settle = settings.SETTLE_PERIODS if settle_periods is None else settle_periods
        window = settings.WINDOW_PERIODS if window_periods is None else window_periods
        x = np.asarray(clock_states, dtype=float)
        if x.ndim != 2 or len(x) < settle + window or window < 4:
            return Classification.UNCLASSIFIED
        x = x[settle:settle + window]
        scale = np.max(np.abs(x), axis=0)
        y = x / np.where(scale > 0, scale, 1.0)
        d1 = np.linalg.norm(y[1:] - y[:-1], axis=1)
        d2 = np.linalg.norm(y[2:] - y[:-2], axis=1)
        tol = settings.CLASSIFY_EPS_ABS + settings.CLASSIFY_EPS_REL * np.max(np.linalg.norm(y, axis=1))
        if d1.max() < tol:
            return Classification.PERIOD1
        q = max(len(d1) // 4, 1)
        if d1[-q:].mean() < settings.CLASSIFY_DECAY_RATIO * d1[:q].mean():
            return Classification.PERIOD1
        multiplier, rms = _alternation_fit(d1, tol)
        if multiplier < 1.0 - settings.CLASSIFY_MULTIPLIER_TOL and rms < settings.CLASSIFY_FIT_RMS:
            return Classification.PERIOD1
        if d1.max() > 10.0 * max(d2.max(), tol):
            return Classification.SUBHARMONIC
        return Classification.UNCLASSIFIED

    @staticmethod
    def rk4_crosscheck(
        cfg: ConverterConfig,
        n_periods: int,
        steps_per_period: int = 10000,
        x0: Optional[Union[ConverterState, np.ndarray]] = None,
        settle_periods: Optional[int] = None,
        window_periods: Optional[int] = None,
    ) -> SimTrace:
        """
        Fixed-step RK4 integration with the same switching rule; events by step bisection.

        The trace holds clock instants only: y, h and switch are the values a new
        period starts from.
        """
        if steps_per_period < 1000:
            raise DomainError("steps_per_period must be at least 1000", field="steps_per_period")
        model = SwitchedModel(cfg)
        T = model.period
        h = T / steps_per_period
        p_on, q_on = _rk4_affine_map(model.a_on, model.b_on, h)
        p_off, q_off = _rk4_affine_map(model.a_off, model.b_off, h)
        x = model.initial_state() if x0 is None else model.state_vector(x0)

        def trip(xx: np.ndarray, tau: float) -> float:
            return model.control(xx) - model.ramp(tau)

        clock, duties, dcm = [], [], False
        for n in range(n_periods):
            if trip(x, 0.0) <= 0.0:
                tau_off = 0.0
            else:
                tau_off = T
                for k in range(steps_per_period):
                    xn = p_on @ x + q_on
                    if trip(xn, (k + 1) * h) <= 0.0:
                        lo, hi = 0.0, h
                        while hi - lo > settings.EVENT_XTOL * T:
                            mid = 0.5 * (lo + hi)
                            if trip(_rk4_step(model.a_on, model.b_on, x, mid), k * h + mid) > 0.0:
                                lo = mid
                            else:
                                hi = mid
                        x = _rk4_step(model.a_on, model.b_on, x, hi)
                        tau_off = k * h + hi
                        break
                    x = xn
            remaining = T - tau_off
            full = int(math.floor(remaining / h))
            for _ in range(full):
                x = p_off @ x + q_off
                if x[0] <= 0.0:
                    dcm = True
                    break
            if not dcm and remaining - full * h > 0.0:
                x = _rk4_step(model.a_off, model.b_off, x, remaining - full * h)
            clock.append(x.copy())
            duties.append(tau_off / T)
            if dcm or x[0] <= 0.0:
                dcm = True
                break

        clock_arr = np.array(clock)
        times = (np.arange(len(clock)) + 1) * T
        y = clock_arr @ model.c + model.d
        ramp = np.full(len(clock), model.ramp(0.0))
        classification = (
            Classification.DCM if dcm
            else SwitchSimService.classify_trace(clock_arr, settle_periods, window_periods)
        )
        return SimTrace(
            state_labels=model.labels, period=T, times=times, states=clock_arr,
            switch=(y > ramp).astype(int), v_o=clock_arr @ model.vo_off, y=y, h=ramp,
            clock_states=clock_arr, duty_sequence=np.array(duties), classification=classification, dcm=dcm,
        )
