"""Generator dynamic models and their algebraic network interface.

Two models are provided.  The classical model holds a constant voltage
magnitude behind the d-axis transient reactance and integrates rotor angle
and speed; the two-axis (fourth-order) model adds the q- and d-axis transient
voltages with their open-circuit time constants.  Rotor speed is the
per-unit deviation from synchronous speed, zero at equilibrium.

State vectors are flat float arrays in block layout:

* classical:    ``[delta_1..m, omega_1..m]``
* fourth-order: ``[delta_1..m, omega_1..m, e_q_prime_1..m, e_d_prime_1..m]``

The network enters through the internal-bus matrix ``y`` (see `netred`),
which maps stacked internal-voltage xy pairs to stacked terminal-current xy
pairs.  Both derivative evaluations are pure functions: no caching, no
mutation of inputs, safe for concurrent use.
"""

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .netred import SourceImpedance, impedance_arrays

# Default synchronous speed: 60 Hz system.
OMEGA_S_60HZ = 2.0 * np.pi * 60.0
OMEGA_S_50HZ = 2.0 * np.pi * 50.0


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


@dataclass(frozen=True)
class ClassicalGenParams:
    """Constants of one classical-model machine.

    ``p_m`` and ``e_q_prime`` may be left unset when they are to be computed
    from an operating point by the initializer.
    """

    h: float
    d: float
    r_a: float
    x_d_prime: float
    p_m: float | None = None
    e_q_prime: float | None = None
    name: str = ""

    def __post_init__(self):
        _require(self.h > 0, f"h must be > 0, got {self.h}")
        _require(self.d >= 0, f"d must be >= 0, got {self.d}")
        _require(self.r_a >= 0, f"r_a must be >= 0, got {self.r_a}")
        _require(self.x_d_prime > 0, f"x_d_prime must be > 0, got {self.x_d_prime}")
        if self.e_q_prime is not None:
            _require(self.e_q_prime > 0, f"e_q_prime must be > 0, got {self.e_q_prime}")

    @property
    def impedance(self) -> SourceImpedance:
        # Classical machines present equal reactances on both axes.
        return SourceImpedance(self.r_a, self.x_d_prime, self.x_d_prime)


@dataclass(frozen=True)
class FourthOrderGenParams:
    """Constants of one two-axis machine.

    ``p_m`` and ``e_fq`` may be left unset when they are to be computed from
    an operating point by the initializer.
    """

    h: float
    d: float
    r_a: float
    x_d: float
    x_q: float
    x_d_prime: float
    x_q_prime: float
    t_d0_prime: float
    t_q0_prime: float
    p_m: float | None = None
    e_fq: float | None = None
    name: str = ""

    def __post_init__(self):
        _require(self.h > 0, f"h must be > 0, got {self.h}")
        _require(self.d >= 0, f"d must be >= 0, got {self.d}")
        _require(self.r_a >= 0, f"r_a must be >= 0, got {self.r_a}")
        _require(self.t_d0_prime > 0, f"t_d0_prime must be > 0, got {self.t_d0_prime}")
        _require(self.t_q0_prime > 0, f"t_q0_prime must be > 0, got {self.t_q0_prime}")
        _require(self.x_d_prime > 0, f"x_d_prime must be > 0, got {self.x_d_prime}")
        _require(self.x_q_prime > 0, f"x_q_prime must be > 0, got {self.x_q_prime}")
        _require(
            self.x_d >= self.x_d_prime,
            f"x_d ({self.x_d}) must be >= x_d_prime ({self.x_d_prime})",
        )
        _require(
            self.x_q >= self.x_q_prime,
            f"x_q ({self.x_q}) must be >= x_q_prime ({self.x_q_prime})",
        )

    @property
    def impedance(self) -> SourceImpedance:
        return SourceImpedance(self.r_a, self.x_d_prime, self.x_q_prime)


class ClassicalPack(NamedTuple):
    """Vectorized classical parameters (one array entry per machine)."""

    h: np.ndarray
    d: np.ndarray
    r_a: np.ndarray
    x_d_prime: np.ndarray
    p_m: np.ndarray
    e_q_prime: np.ndarray


class FourthOrderPack(NamedTuple):
    """Vectorized two-axis parameters (one array entry per machine)."""

    h: np.ndarray
    d: np.ndarray
    r_a: np.ndarray
    x_d: np.ndarray
    x_q: np.ndarray
    x_d_prime: np.ndarray
    x_q_prime: np.ndarray
    t_d0_prime: np.ndarray
    t_q0_prime: np.ndarray
    p_m: np.ndarray
    e_fq: np.ndarray


def pack_classical(gens: Sequence[ClassicalGenParams]) -> ClassicalPack:
    for i, g in enumerate(gens):
        if g.p_m is None or g.e_q_prime is None:
            raise ValueError(
                f"generator {g.name or i + 1}: p_m and e_q_prime must be set "
                "(initialize from an operating point first)"
            )
    arr = lambda f: np.array([f(g) for g in gens], dtype=float)  # noqa: E731
    return ClassicalPack(
        h=arr(lambda g: g.h),
        d=arr(lambda g: g.d),
        r_a=arr(lambda g: g.r_a),
        x_d_prime=arr(lambda g: g.x_d_prime),
        p_m=arr(lambda g: g.p_m),
        e_q_prime=arr(lambda g: g.e_q_prime),
    )


def pack_fourth(gens: Sequence[FourthOrderGenParams]) -> FourthOrderPack:
    for i, g in enumerate(gens):
        if g.p_m is None or g.e_fq is None:
            raise ValueError(
                f"generator {g.name or i + 1}: p_m and e_fq must be set "
                "(initialize from an operating point first)"
            )
    arr = lambda f: np.array([f(g) for g in gens], dtype=float)  # noqa: E731
    return FourthOrderPack(
        h=arr(lambda g: g.h),
        d=arr(lambda g: g.d),
        r_a=arr(lambda g: g.r_a),
        x_d=arr(lambda g: g.x_d),
        x_q=arr(lambda g: g.x_q),
        x_d_prime=arr(lambda g: g.x_d_prime),
        x_q_prime=arr(lambda g: g.x_q_prime),
        t_d0_prime=arr(lambda g: g.t_d0_prime),
        t_q0_prime=arr(lambda g: g.t_q0_prime),
        p_m=arr(lambda g: g.p_m),
        e_fq=arr(lambda g: g.e_fq),
    )


@dataclass
class NetworkSolution:
    """Algebraic quantities of one network evaluation (arrays of length m).

    ``e_int_*`` are the internal voltages in the network xy frame, ``i_*``
    the terminal currents in both frames, ``v_*`` the terminal voltages in
    both frames, and ``p_e`` the electric power per machine.
    """

    e_int_x: np.ndarray
    e_int_y: np.ndarray
    i_x: np.ndarray
    i_y: np.ndarray
    i_d: np.ndarray
    i_q: np.ndarray
    v_x: np.ndarray
    v_y: np.ndarray
    v_d: np.ndarray
    v_q: np.ndarray
    p_e: np.ndarray


def dq_from_xy(delta, x, y):
    """Rotate network-frame components into the rotor dq frame.

    d = sin(delta) x - cos(delta) y,  q = cos(delta) x + sin(delta) y.
    Inverse of `xy_from_dq`; works elementwise on arrays.
    """
    s, c = np.sin(delta), np.cos(delta)
    return s * x - c * y, c * x + s * y


def xy_from_dq(delta, d, q):
    """Rotate rotor dq components back into the network xy frame."""
    s, c = np.sin(delta), np.cos(delta)
    return s * d + c * q, -c * d + s * q


def _stack_pairs(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = np.empty(2 * x.size)
    out[0::2] = x
    out[1::2] = y
    return out


def _classical_net(deltas, e_q_primes, y, r_a, x_d_prime) -> NetworkSolution:
    s, c = np.sin(deltas), np.cos(deltas)
    ex = e_q_primes * c
    ey = e_q_primes * s
    cur = y @ _stack_pairs(ex, ey)
    ix, iy = cur[0::2], cur[1::2]
    vx = ex - (r_a * ix - x_d_prime * iy)
    vy = ey - (x_d_prime * ix + r_a * iy)
    pe = vx * ix + vy * iy
    i_d = s * ix - c * iy
    i_q = c * ix + s * iy
    v_d = s * vx - c * vy
    v_q = c * vx + s * vy
    return NetworkSolution(ex, ey, ix, iy, i_d, i_q, vx, vy, v_d, v_q, pe)


def _fourth_net(deltas, e_q_primes, e_d_primes, y, r_a, x_d_prime, x_q_prime) -> NetworkSolution:
    s, c = np.sin(deltas), np.cos(deltas)
    ex = s * e_d_primes + c * e_q_primes
    ey = -c * e_d_primes + s * e_q_primes
    cur = y @ _stack_pairs(ex, ey)
    ix, iy = cur[0::2], cur[1::2]
    i_d = s * ix - c * iy
    i_q = c * ix + s * iy
    # Terminal voltage is formed in the rotor frame, where the impedance drop
    # carries x_q_prime and x_d_prime on different axes.
    v_d = e_d_primes - (r_a * i_d - x_q_prime * i_q)
    v_q = e_q_primes - (x_d_prime * i_d + r_a * i_q)
    pe = v_d * i_d + v_q * i_q
    vx = s * v_d + c * v_q
    vy = -c * v_d + s * v_q
    return NetworkSolution(ex, ey, ix, iy, i_d, i_q, vx, vy, v_d, v_q, pe)


def classical_network_solution(
    deltas: np.ndarray,
    e_q_primes: np.ndarray,
    y: np.ndarray,
    impedances: Sequence[SourceImpedance],
) -> NetworkSolution:
    """Solve the classical algebraic interface for given rotor angles.

    Order of evaluation: rotate the internal voltages into the network frame,
    multiply by the internal-bus matrix for the terminal currents, subtract
    the stator impedance drop for the terminal voltages, then form the
    electric power per machine.
    """
    deltas = np.asarray(deltas, dtype=float)
    e_q_primes = np.asarray(e_q_primes, dtype=float)
    m = deltas.size
    if e_q_primes.size != m:
        raise ValueError(f"expected {m} internal voltages, got {e_q_primes.size}")
    if len(impedances) != m:
        raise ValueError(f"expected {m} impedances, got {len(impedances)}")
    y = np.asarray(y, dtype=float)
    if y.shape != (2 * m, 2 * m):
        raise ValueError(f"internal-bus matrix must be {2*m}x{2*m}, got {y.shape}")
    r_a, xdp, _ = impedance_arrays(impedances)
    return _classical_net(deltas, e_q_primes, y, r_a, xdp)


def fourth_order_network_solution(
    state: np.ndarray,
    y: np.ndarray,
    impedances: Sequence[SourceImpedance],
) -> NetworkSolution:
    """Solve the two-axis algebraic interface at the given state.

    The caller must supply ``y`` evaluated at the state's rotor angles
    whenever any machine has unequal d/q transient reactances; a stale matrix
    silently yields wrong currents and power.
    """
    m = len(impedances)
    state = np.asarray(state, dtype=float)
    if state.size != 4 * m:
        raise ValueError(f"expected state of length {4*m}, got {state.size}")
    y = np.asarray(y, dtype=float)
    if y.shape != (2 * m, 2 * m):
        raise ValueError(f"internal-bus matrix must be {2*m}x{2*m}, got {y.shape}")
    r_a, xdp, xqp = impedance_arrays(impedances)
    return _fourth_net(state[:m], state[2 * m : 3 * m], state[3 * m :], y, r_a, xdp, xqp)


def classical_derivatives(
    state: np.ndarray,
    params: Sequence[ClassicalGenParams] | ClassicalPack,
    y: np.ndarray,
    omega_s: float = OMEGA_S_60HZ,
) -> np.ndarray:
    """Time derivative of the classical state [delta, omega]."""
    pk = params if isinstance(params, ClassicalPack) else pack_classical(params)
    m = pk.h.size
    state = np.asarray(state, dtype=float)
    if state.size != 2 * m:
        raise ValueError(f"expected state of length {2*m}, got {state.size}")
    deltas, omegas = state[:m], state[m:]
    sol = _classical_net(deltas, pk.e_q_prime, y, pk.r_a, pk.x_d_prime)
    return np.concatenate(
        [omega_s * omegas, (pk.p_m - sol.p_e - pk.d * omegas) / (2.0 * pk.h)]
    )


def fourth_order_derivatives(
    state: np.ndarray,
    params: Sequence[FourthOrderGenParams] | FourthOrderPack,
    y: np.ndarray,
    omega_s: float = OMEGA_S_60HZ,
) -> np.ndarray:
    """Time derivative of the two-axis state [delta, omega, e_q', e_d']."""
    pk = params if isinstance(params, FourthOrderPack) else pack_fourth(params)
    m = pk.h.size
    state = np.asarray(state, dtype=float)
    if state.size != 4 * m:
        raise ValueError(f"expected state of length {4*m}, got {state.size}")
    deltas, omegas = state[:m], state[m : 2 * m]
    eqp, edp = state[2 * m : 3 * m], state[3 * m :]
    sol = _fourth_net(deltas, eqp, edp, y, pk.r_a, pk.x_d_prime, pk.x_q_prime)
    return np.concatenate(
        [
            omega_s * omegas,
            (pk.p_m - sol.p_e - pk.d * omegas) / (2.0 * pk.h),
            (pk.e_fq - (pk.x_d - pk.x_d_prime) * sol.i_d - eqp) / pk.t_d0_prime,
            ((pk.x_q - pk.x_q_prime) * sol.i_q - edp) / pk.t_q0_prime,
        ]
    )
