"""Shared fixtures: IEEE 9-bus (WSCC 3-machine) benchmark data.

Matrices and per-unit machine data follow the standard 100 MVA / 60 Hz base
(Anderson & Fouad).  The terminal-bus matrix YT9 already contains the
constant-impedance loads and step-up transformers, reduced to the three
generator terminals; Y9_* are internal-bus matrices for the pre-fault,
fault-on (three-phase fault near bus 7) and post-fault (line 5-7 dropped)
networks.
"""

from pathlib import Path

import numpy as np
import pytest

from swingsim import ClassicalGenParams, FourthOrderGenParams

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

# Terminal-bus reduced admittance of the 9-bus network, loads folded in.
YT9 = np.array(
    [
        [1.1051 - 4.6957j, 0.0965 + 2.2570j, 0.0046 + 2.2748j],
        [0.0965 + 2.2570j, 0.7355 - 5.1143j, 0.1230 + 2.8257j],
        [0.0046 + 2.2748j, 0.1230 + 2.8257j, 0.7214 - 5.0231j],
    ]
)

# Internal-bus matrix of the pre-fault network, classical impedances.
Y9_PRE = np.array(
    [
        [0.8455, 2.9883, 0.2871, -1.5129, 0.2096, -1.2256],
        [-2.9883, 0.8455, 1.5129, 0.2871, 1.2256, 0.2096],
        [0.2871, -1.5129, 0.4200, 2.7239, 0.2133, -1.0879],
        [1.5129, 0.2871, -2.7239, 0.4200, 1.0879, 0.2133],
        [0.2096, -1.2256, 0.2133, -1.0879, 0.2770, 2.3681],
        [1.2256, 0.2096, 1.0879, 0.2133, -2.3681, 0.2770],
    ]
)

Y9_FAULT_ON = np.array(
    [
        [0.6568, 3.8160, 0.0, 0.0, 0.0701, -0.6306],
        [-3.8160, 0.6568, 0.0, 0.0, 0.6306, 0.0701],
        [0.0, 0.0, 0.0, 5.4855, 0.0, 0.0],
        [0.0, 0.0, -5.4855, 0.0, 0.0, 0.0],
        [0.0701, -0.6306, 0.0, 0.0, 0.1740, 2.7959],
        [0.6306, 0.0701, 0.0, 0.0, -2.7959, 0.1740],
    ]
)

Y9_POST_FAULT = np.array(
    [
        [1.1386, 2.2966, 0.1290, -0.7063, 0.1824, -1.0637],
        [-2.2966, 1.1386, 0.7063, 0.1290, 1.0637, 0.1824],
        [0.1290, -0.7063, 0.3744, 2.0151, 0.1921, -1.2067],
        [0.7063, 0.1290, -2.0151, 0.3744, 1.2067, 0.1921],
        [0.1824, -1.0637, 0.1921, -1.2067, 0.2691, 2.3516],
        [1.0637, 0.1824, 1.2067, 0.1921, -2.3516, 0.2691],
    ]
)

# Source-impedance block matrices for the classical and two-axis data sets.
T2_CLASSICAL = np.array(
    [
        [0.0, -0.0608, 0.0, 0.0, 0.0, 0.0],
        [0.0608, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -0.1198, 0.0, 0.0],
        [0.0, 0.0, 0.1198, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, -0.1813],
        [0.0, 0.0, 0.0, 0.0, 0.1813, 0.0],
    ]
)

T2_FOURTH = np.array(
    [
        [0.0, -0.0969, 0.0, 0.0, 0.0, 0.0],
        [0.0608, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -0.1969, 0.0, 0.0],
        [0.0, 0.0, 0.1198, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, -0.2500],
        [0.0, 0.0, 0.0, 0.0, 0.1813, 0.0],
    ]
)

# Classical data set: machine constants and steady-state solution.
H9 = np.array([23.64, 6.40, 3.01])
D9_CLASSICAL = np.array([23.64, 6.40, 3.01])
XDP9 = np.array([0.0608, 0.1198, 0.1813])
PM9 = np.array([0.7164, 1.6300, 0.8500])
EQP9 = np.array([1.0566, 1.0502, 1.0170])
DELTA9_CLASSICAL = np.array([0.0396, 0.3444, 0.2298])
I9_X = np.array([0.6889, 1.5799, 0.8179])
I9_Y = np.array([-0.2600, 0.1924, 0.1730])
ID9_CLASSICAL = np.array([0.2871, 0.3523, 0.0178])
IQ9_CLASSICAL = np.array([0.6780, 1.5521, 0.8358])

# Two-axis data set.  X_q of unit 2 is 0.8645 on the common base (Anderson &
# Fouad); the steady-state rows below are consistent only with that value.
XD9 = np.array([0.1460, 0.8958, 1.3125])
XQ9 = np.array([0.0969, 0.8645, 1.2578])
XQP9 = np.array([0.0969, 0.1969, 0.2500])
TD0P9 = np.array([8.96, 6.00, 5.89])
TQ0P9 = np.array([0.600, 0.535, 0.600])
D9_FOURTH = np.zeros(3)
DELTA9_FOURTH = np.array([0.0626, 1.0664, 0.9449])
EQP9_FOURTH = np.array([1.0564, 0.7882, 0.7679])
EDP9_FOURTH = np.array([0.0, 0.6222, 0.6242])
EFQ9 = np.array([1.0821, 1.7893, 1.4030])
ID9_FOURTH = np.array([0.3026, 1.2901, 0.5615])
IQ9_FOURTH = np.array([0.6712, 0.9320, 0.6194])

# Equal-reactance variant: X_q_prime set to X_d_prime, new d-axis voltages.
EDP9_EQUAL_XQ = np.array([0.0242, 0.6941, 0.6668])

OMEGA_S = 2.0 * np.pi * 60.0
FIVE_CYCLES = 5.0 / 60.0


def classical_gens():
    return [
        ClassicalGenParams(
            h=H9[i],
            d=D9_CLASSICAL[i],
            r_a=0.0,
            x_d_prime=XDP9[i],
            p_m=PM9[i],
            e_q_prime=EQP9[i],
            name=f"G{i + 1}",
        )
        for i in range(3)
    ]


def fourth_gens(x_q_prime=None, p_m=PM9, e_fq=EFQ9):
    xqp = XQP9 if x_q_prime is None else x_q_prime
    return [
        FourthOrderGenParams(
            h=H9[i],
            d=D9_FOURTH[i],
            r_a=0.0,
            x_d=XD9[i],
            x_q=XQ9[i],
            x_d_prime=XDP9[i],
            x_q_prime=xqp[i],
            t_d0_prime=TD0P9[i],
            t_q0_prime=TQ0P9[i],
            p_m=None if p_m is None else p_m[i],
            e_fq=None if e_fq is None else e_fq[i],
            name=f"G{i + 1}",
        )
        for i in range(3)
    ]


@pytest.fixture
def wscc9_classical():
    return classical_gens()


@pytest.fixture
def wscc9_fourth():
    return fourth_gens()


@pytest.fixture
def wscc9_fourth_equal_xq():
    return fourth_gens(x_q_prime=XDP9)


@pytest.fixture
def classical_state0():
    return np.concatenate([DELTA9_CLASSICAL, np.zeros(3)])


@pytest.fixture
def fourth_state0():
    return np.concatenate([DELTA9_FOURTH, np.zeros(3), EQP9_FOURTH, EDP9_FOURTH])
