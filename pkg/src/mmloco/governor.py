"""Reference governor: filters desired kinematic references into applied
references that respect the ground-friction pyramid.

The applied reference x_w chases the desired reference x_r through three
superposed velocity terms: direct attraction, motion in the nullspace of the
violated-constraint gradients (along the constraint surface), and motion
along the normal of the most-violated constraint.  The gains switch on the
signs of min(h_w) and min(h_r); overlapping switch conditions are kept as
given and the terms simply superpose.

Constraint rows produced by ``friction_constraints`` are normalized by the
robot weight m*g, so "constraint units" are dimensionless force fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from mmloco.rom import kinematics as kin
from mmloco.rom.dynamics import RobotState, ground_reaction_batch
from mmloco.rom.params import GroundModel, RobotParams, ServoLimits

ACTIVE_TOL = 1e-4
RANK_TOL = 1e-8
FD_STEP = 1e-6


@dataclass
class GovernorState:
    x_w: np.ndarray
    x_r: np.ndarray
    P: np.ndarray = None
    alpha_r: float = 20.0
    alpha_t: float = 20.0
    alpha_n: float = 10.0

    def __post_init__(self):
        self.x_w = np.asarray(self.x_w, dtype=float).copy()
        self.x_r = np.asarray(self.x_r, dtype=float).copy()
        if self.x_w.shape != self.x_r.shape:
            raise ValueError("x_w and x_r must have the same dimension")
        n = self.x_w.size
        if self.P is None:
            self.P = np.eye(n)
        self.P = np.asarray(self.P, dtype=float)
        if self.P.shape != (n, n):
            raise ValueError("P has wrong shape")
        if not np.allclose(self.P, self.P.T) or np.any(np.linalg.eigvalsh(self.P) <= 0):
            raise ValueError("P must be symmetric positive definite")
        if min(self.alpha_r, self.alpha_t, self.alpha_n) <= 0:
            raise ValueError("rate gains must be positive")

    def copy(self) -> "GovernorState":
        g = GovernorState(self.x_w.copy(), self.x_r.copy(), self.P.copy(),
                          self.alpha_r, self.alpha_t, self.alpha_n)
        return g


@dataclass
class ConstraintEval:
    """Constraint values at x_w and x_r plus gradients at x_w.

    Empty (m = 0) evaluations mean "no active constraint source", e.g. an
    airborne robot with no stance feet.
    """

    h_w: np.ndarray
    h_r: np.ndarray
    grad_w: np.ndarray  # (m, n)

    def __post_init__(self):
        self.h_w = np.atleast_1d(np.asarray(self.h_w, dtype=float))
        self.h_r = np.atleast_1d(np.asarray(self.h_r, dtype=float))
        self.grad_w = np.asarray(self.grad_w, dtype=float)
        if self.grad_w.ndim != 2 or self.grad_w.shape[0] != self.h_w.size:
            raise ValueError("grad_w rows must match h_w entries")


def lyapunov_value(gov: GovernorState) -> float:
    """V = (x_r - x_w)^T P (x_r - x_w)."""
    e = gov.x_r - gov.x_w
    return float(e @ gov.P @ e)


def _nullspace(C: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis of null(C); full identity basis when C is empty."""
    if C.size == 0:
        return np.eye(n)
    _, sv, vt = np.linalg.svd(C, full_matrices=True)
    rank = int(np.sum(sv > RANK_TOL * sv[0])) if sv.size else 0
    return vt[rank:].T


def update(gov: GovernorState, c: ConstraintEval, dt: float) -> GovernorState:
    """One explicit-Euler step of the update law x_w += dt (v_r + v_t + v_n)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = gov.x_w.size
    if c.grad_w.size and c.grad_w.shape[1] != n:
        raise ValueError("constraint gradient dimension mismatch")
    e = gov.x_r - gov.x_w

    min_hw = float(c.h_w.min()) if c.h_w.size else np.inf
    min_hr = float(c.h_r.min()) if c.h_r.size else np.inf

    a_r = gov.alpha_r if (min_hw >= 0 or min_hr >= 0) else 0.0
    a_t = gov.alpha_t if (min_hw >= 0 or min_hr < 0) else 0.0
    if min_hw <= min_hr < 0:
        a_n = gov.alpha_n
    elif min_hr < min_hw < 0:
        a_n = -gov.alpha_n
    else:
        a_n = 0.0

    v = a_r * e
    if a_t != 0.0:
        violated = c.h_r < 0 if c.h_r.size else np.zeros(0, dtype=bool)
        C = c.grad_w[violated] if c.grad_w.size else np.zeros((0, n))
        N = _nullspace(C, n)
        v = v + a_t * (N @ (N.T @ e))
    if a_n != 0.0:
        # normal of the most-violated constraint, P-normalized
        h_min = np.minimum(c.h_w, c.h_r)
        idx = int(np.argmin(h_min))
        r = c.grad_w[idx]
        nrm = float(np.sqrt(r @ gov.P @ r))
        if nrm > 0:
            r = r / nrm
            v = v + a_n * r * float(r @ e)

    out = gov.copy()
    out.x_w = gov.x_w + dt * v
    return out


def govern(gov: GovernorState, eval_fn, dt: float,
           max_step: float = 2e-4, max_substeps: int = 64) -> GovernorState:
    """Advance x_w over one control interval with adaptive substepping.

    ``eval_fn(x_w) -> ConstraintEval`` re-evaluates constraints as x_w moves.
    Substeps are sized so no component of x_w moves more than ``max_step``
    per substep, bounding the constraint overshoot of the explicit Euler
    realization; the total applied-reference rate is saturated accordingly.
    """
    remaining = dt
    cur = gov
    for _ in range(max_substeps):
        if remaining <= 0:
            break
        c = eval_fn(cur.x_w)
        # probe the unconstrained rate to size the substep
        trial = update(cur, c, remaining)
        move = float(np.max(np.abs(trial.x_w - cur.x_w)))
        if move <= max_step:
            cur = trial
            break
        sub = remaining * (max_step / move)
        cur = update(cur, c, sub)
        remaining -= sub
    return cur


# ---------------------------------------------------------------------------
# friction-pyramid constraints on the ROM
# ---------------------------------------------------------------------------

def _stance_mask(state: RobotState, params: RobotParams, surface_z: np.ndarray,
                 tol: float = 5e-4) -> np.ndarray:
    R = kin.rotation_matrix(state.body.theta_b)
    feet = state.body.p_b + kin.foot_positions_body(
        state.legs.qk, params.hip_offsets) @ R.T
    return feet[:, 2] <= surface_z + tol


def _grf_for_reference(state: RobotState, X: np.ndarray, params: RobotParams,
                       model: GroundModel, servo: ServoLimits,
                       surface_z: np.ndarray) -> np.ndarray:
    """Predicted per-foot GRF for a batch of foot-position references.

    X has shape (B, 12): per-leg foot positions in the body frame.  The servo
    is modeled as first-order tracking at ``servo.tracking_rate``, so the
    commanded foot velocity is the body-induced motion plus the tracking
    correction toward the reference.  Returns (B, 4, 3) forces.
    """
    b = state.body
    R = kin.rotation_matrix(b.theta_b)
    om = kin.euler_rate_matrix(b.theta_b) @ b.omega_b
    s_cur = kin.foot_positions_body(state.legs.qk, params.hip_offsets)

    Xb = X.reshape(-1, 4, 3)
    pos = b.p_b + Xb @ R.T
    vel_b = np.cross(om, Xb) + servo.tracking_rate * (Xb - s_cur)
    vel = b.v_b + vel_b @ R.T
    B = Xb.shape[0]
    f = ground_reaction_batch(pos.reshape(-1, 3), vel.reshape(-1, 3), model,
                              np.tile(surface_z, B))
    return f.reshape(B, 4, 3)


def _h_batch(state: RobotState, X: np.ndarray, params: RobotParams,
             model: GroundModel, servo: ServoLimits, surface_z: np.ndarray,
             stance: np.ndarray) -> np.ndarray:
    """Pyramid margins for a batch of references: rows per stance foot are
    [mu_c u_z - |u_x|, mu_c u_z - |u_y|, u_z] / (m g)."""
    f = _grf_for_reference(state, X, params, model, servo, surface_z)
    f = f[:, stance, :]
    scale = 1.0 / (params.m * params.g)
    hx = (model.mu_c * f[:, :, 2] - np.abs(f[:, :, 0])) * scale
    hy = (model.mu_c * f[:, :, 2] - np.abs(f[:, :, 1])) * scale
    hz = f[:, :, 2] * scale
    return np.stack([hx, hy, hz], axis=2).reshape(X.shape[0], -1)


def friction_constraints(state: RobotState, x: np.ndarray,
                         model: GroundModel,
                         params: RobotParams | None = None,
                         servo: ServoLimits | None = None,
                         surface_z: np.ndarray | None = None,
                         x_r: np.ndarray | None = None,
                         gradients: bool = True) -> ConstraintEval:
    """Evaluate friction-pyramid margins at reference ``x`` (h_w) and, when
    given, at the desired reference ``x_r`` (h_r), with central-difference
    gradients at ``x``.  Airborne robots yield an empty evaluation.

    ``gradients=False`` skips the 2n finite-difference probes and returns
    zero gradient rows; callers on a fast path use it to test feasibility
    before paying for the full evaluation.
    """
    params = params or RobotParams()
    servo = servo or ServoLimits()
    x = np.asarray(x, dtype=float).ravel()
    if surface_z is None:
        surface_z = np.zeros(4)
    stance = _stance_mask(state, params, surface_z)
    n = x.size
    if not np.any(stance):
        return ConstraintEval(np.zeros(0), np.zeros(0), np.zeros((0, n)))

    # batch: x, x_r, and the 2n central-difference probes
    probes = [x]
    if x_r is not None:
        probes.append(np.asarray(x_r, dtype=float).ravel())
    base = len(probes)
    if gradients:
        eye = np.eye(n) * FD_STEP
        probes.extend(x + eye)
        probes.extend(x - eye)
    H = _h_batch(state, np.array(probes), params, model, servo, surface_z,
                 stance)
    h_w = H[0]
    h_r = H[1] if x_r is not None else h_w.copy()
    if gradients:
        grad = (H[base:base + n] - H[base + n:]).T / (2 * FD_STEP)
    else:
        grad = np.zeros((h_w.size, n))
    return ConstraintEval(h_w, h_r, grad)
