"""Run metrics: settling, effort, unwinding and boundary-layer behaviour."""

import math
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import trapezoid

from app.control.adapt import min_eigenvalue
from app.control.laws import s_delta
from app.core.quat import rotation_angle
from app.schemas.results import Metrics, RunLog
from app.utils.logger import app_logger

_TINY = 1e-9


def error_norm(log: RunLog) -> NDArray:
    """‖q⃗_e‖ per logged row."""
    return np.linalg.norm(log.q_e[:, 1:], axis=1)


def settling_index(log: RunLog, threshold: float) -> Optional[int]:
    """Row from which the error stays below ``threshold``; None if never."""
    above = np.nonzero(error_norm(log) >= threshold)[0]
    if above.size == 0:
        return 0
    last = int(above[-1])
    if last == log.rows - 1:
        return None
    return last + 1


def unwinding_ratio(log: RunLog, end: Optional[int] = None) -> float:
    """Rotation traveled over the geodesic distance closed, up to row ``end``.

    A ratio of 1 means the error rotated straight to its target along the short
    way. Runs that close no distance report 1.0 at rest and +inf otherwise.
    """
    end = log.rows - 1 if end is None else end
    if log.traveled is not None:
        traveled = float(log.traveled[end] - log.traveled[0])
    else:
        rel = np.linalg.norm(log.omega[: end + 1] - log.omega_d[: end + 1], axis=1)
        traveled = float(trapezoid(rel, log.t[: end + 1])) if end > 0 else 0.0
    angles = rotation_angle(log.q_e)
    closed = float(angles[0] - angles[end])
    if closed <= _TINY:
        return 1.0 if traveled <= _TINY else math.inf
    return traveled / closed


def detect_manifold_switch(log: RunLog, gate: Optional[float] = None) -> int:
    """Branch changes of a continuous error quaternion while ‖q⃗_e‖ > gate.

    Representation slips (q_e jumping to −q_e) are not counted.
    """
    if log.rows < 2:
        return 0
    gate = log.scenario.switch_gate if gate is None else gate
    changed = log.branch[1:] != log.branch[:-1]
    continuous = np.einsum("ij,ij->i", log.q_e[1:], log.q_e[:-1]) > 0.0
    outside = error_norm(log)[1:] > gate
    return int(np.count_nonzero(changed & continuous & outside))


def max_torque_jump(log: RunLog, t_start: float = -math.inf, t_end: float = math.inf) -> float:
    """Largest ‖M_b(k) − M_b(k−1)‖ between consecutive rows inside a time window."""
    if log.rows < 2:
        return 0.0
    jumps = np.linalg.norm(np.diff(log.torque, axis=0), axis=1)
    window = (log.t[1:] >= t_start) & (log.t[1:] <= t_end)
    return float(jumps[window].max()) if window.any() else 0.0


def compute_metrics(log: RunLog) -> Metrics:
    """Summarize a run log."""
    if log.rows == 0:
        raise ValueError("Cannot compute metrics of an empty log")

    sc = log.scenario
    t = log.t
    nv = error_norm(log)

    settle = settling_index(log, sc.settling_threshold)
    settling_time = math.inf if settle is None else float(t[settle])

    tail = t >= t[0] + 0.8 * (t[-1] - t[0])
    steady_state_max_s = float(np.abs(log.s[tail]).max())

    effort = np.linalg.norm(log.torque, axis=1)
    integral_effort = float(trapezoid(effort, t)) if log.rows > 1 else 0.0

    phi = np.asarray(sc.gains.Phi, dtype=float)
    inside = np.all(np.abs(log.s) <= phi + 1e-12, axis=1)
    hits = np.nonzero(inside)[0]
    if hits.size:
        hit_time = float(t[hits[0]])
        exits = int(np.count_nonzero(~inside[hits[0]:]))
    else:
        hit_time = math.inf
        exits = 0
    delta = np.abs(s_delta(log.s, phi)).max(axis=1)

    if log.a_hat is not None:
        min_eig = min(min_eigenvalue(a) for a in log.a_hat)
    else:
        min_eig = math.nan

    metrics = Metrics(
        name=sc.name,
        controller=sc.controller,
        sliding=sc.sliding.kind,
        settling_time=settling_time,
        steady_state_max_s=steady_state_max_s,
        peak_effort=float(effort.max()),
        integral_effort=integral_effort,
        unwinding_ratio=unwinding_ratio(log, settle),
        manifold_switches=detect_manifold_switch(log),
        boundary_layer_hit_time=hit_time,
        boundary_layer_exits=exits,
        s_delta_peak=float(delta.max()),
        s_delta_final=float(delta[-1]),
        final_error=float(nv[-1]),
        min_estimate_eig=min_eig,
        gain_deficit_steps=log.gain_deficit_steps,
    )
    app_logger.info(
        f"Metrics for '{sc.name}': settling={metrics.settling_time:.4g}s, "
        f"peak effort={metrics.peak_effort:.4g}, unwinding={metrics.unwinding_ratio:.4g}, "
        f"switches={metrics.manifold_switches}"
    )
    return metrics
