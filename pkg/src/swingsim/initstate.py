"""Steady-state initialization from a solved operating point.

Given each machine's terminal voltage and current phasors (a power-flow
solution; this package never solves power flow), compute the initial rotor
angle, internal voltages and the constant inputs (mechanical power, field
voltage) that make the operating point a fixed point of the dynamic model.
"""

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .genmodel import ClassicalGenParams, FourthOrderGenParams, dq_from_xy


@dataclass(frozen=True)
class OperatingPoint:
    """Terminal conditions of one machine: voltage and current phasors (pu)."""

    v_t: complex
    i_t: complex

    def __post_init__(self):
        if not (np.isfinite(self.v_t) and np.isfinite(self.i_t)):
            raise ValueError("operating point entries must be finite")
        if abs(self.v_t) == 0:
            raise ValueError("terminal voltage magnitude must be > 0")


def init_classical(op: OperatingPoint, r_a: float, x_d_prime: float):
    """Initial (delta0, e_q_prime, p_m) of a classical machine.

    The internal phasor sits behind the stator impedance: its angle is the
    rotor angle and its magnitude the constant internal voltage.  p_m carries
    the stator loss term so it equals the air-gap power; with r_a = 0 it is
    exactly the terminal power.
    """
    e_int = op.v_t + (r_a + 1j * x_d_prime) * op.i_t
    if abs(e_int) == 0:
        raise ValueError("internal voltage magnitude is zero; cannot place the rotor")
    delta0 = float(np.angle(e_int))
    e_q_prime = float(abs(e_int))
    p_m = float((op.v_t * np.conj(op.i_t)).real + r_a * abs(op.i_t) ** 2)
    return delta0, e_q_prime, p_m


def init_fourth_order(op: OperatingPoint, params: FourthOrderGenParams):
    """Initial (delta0, e_q_prime0, e_d_prime0, e_fq, p_m) of a two-axis machine.

    The rotor is located by the q-axis phasor v + (r_a + j x_q) i; the dq
    decomposition of the terminal conditions then gives internal voltages and
    the field voltage that zero both transient-voltage derivatives.
    """
    locating = op.v_t + (params.r_a + 1j * params.x_q) * op.i_t
    if abs(locating) == 0:
        raise ValueError("q-axis locating phasor is zero; cannot place the rotor")
    delta0 = float(np.angle(locating))
    v_d, v_q = dq_from_xy(delta0, op.v_t.real, op.v_t.imag)
    i_d, i_q = dq_from_xy(delta0, op.i_t.real, op.i_t.imag)
    e_d_prime0 = float(v_d + params.r_a * i_d - params.x_q_prime * i_q)
    e_q_prime0 = float(v_q + params.r_a * i_q + params.x_d_prime * i_d)
    e_fq = float(e_q_prime0 + (params.x_d - params.x_d_prime) * i_d)
    p_m = float(v_d * i_d + v_q * i_q)
    return delta0, e_q_prime0, e_d_prime0, e_fq, p_m


def initialize_classical(
    ops: Sequence[OperatingPoint], gens: Sequence[ClassicalGenParams]
):
    """Initialize a whole classical system.

    Returns the initial state vector [delta, omega] and the generator list
    with p_m and e_q_prime filled in.
    """
    if len(ops) != len(gens):
        raise ValueError(f"{len(gens)} generators but {len(ops)} operating points")
    deltas, completed = [], []
    for op, gen in zip(ops, gens):
        delta0, e_q_prime, p_m = init_classical(op, gen.r_a, gen.x_d_prime)
        deltas.append(delta0)
        completed.append(replace(gen, p_m=p_m, e_q_prime=e_q_prime))
    state0 = np.concatenate([np.array(deltas), np.zeros(len(gens))])
    return state0, completed


def initialize_fourth(
    ops: Sequence[OperatingPoint], gens: Sequence[FourthOrderGenParams]
):
    """Initialize a whole two-axis system.

    Returns the initial state vector [delta, omega, e_q', e_d'] and the
    generator list with p_m and e_fq filled in.
    """
    if len(ops) != len(gens):
        raise ValueError(f"{len(gens)} generators but {len(ops)} operating points")
    deltas, eqps, edps, completed = [], [], [], []
    for op, gen in zip(ops, gens):
        delta0, eqp0, edp0, e_fq, p_m = init_fourth_order(op, gen)
        deltas.append(delta0)
        eqps.append(eqp0)
        edps.append(edp0)
        completed.append(replace(gen, p_m=p_m, e_fq=e_fq))
    m = len(gens)
    state0 = np.concatenate(
        [np.array(deltas), np.zeros(m), np.array(eqps), np.array(edps)]
    )
    return state0, completed
