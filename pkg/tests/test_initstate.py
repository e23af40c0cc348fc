"""Steady-state initialization and its round-trip identities."""

import numpy as np
import pytest

from conftest import (
    DELTA9_CLASSICAL,
    DELTA9_FOURTH,
    EDP9_EQUAL_XQ,
    EDP9_FOURTH,
    EFQ9,
    EQP9,
    EQP9_FOURTH,
    I9_X,
    I9_Y,
    OMEGA_S,
    PM9,
    XDP9,
    fourth_gens,
)

from swingsim import (
    OperatingPoint,
    dq_from_xy,
    expand_real_blocks,
    fourth_order_derivatives,
    init_classical,
    init_fourth_order,
    initialize_classical,
    initialize_fourth,
    xy_from_dq,
)
from conftest import classical_gens


def reconstruct_classical_terminal(delta, e_q_prime, i_t, r_a, x_d_prime):
    """Terminal voltage from a classical state and its terminal current."""
    e_int = e_q_prime * np.exp(1j * delta)
    return e_int - (r_a + 1j * x_d_prime) * i_t


def reconstruct_fourth_terminal(delta, eqp, edp, i_t, gen):
    """Terminal voltage from a two-axis state and its terminal current."""
    i_d, i_q = dq_from_xy(delta, i_t.real, i_t.imag)
    v_d = edp - (gen.r_a * i_d - gen.x_q_prime * i_q)
    v_q = eqp - (gen.x_d_prime * i_d + gen.r_a * i_q)
    v_x, v_y = xy_from_dq(delta, v_d, v_q)
    return v_x + 1j * v_y


class TestInitClassical:
    def test_open_circuit(self):
        op = OperatingPoint(v_t=1.02 * np.exp(0.3j), i_t=0j)
        delta0, eqp, p_m = init_classical(op, r_a=0.0, x_d_prime=0.2)
        assert abs(delta0 - 0.3) < 1e-15
        assert abs(eqp - 1.02) < 1e-15
        assert p_m == 0.0

    @pytest.mark.parametrize("unit", range(3))
    def test_bench_round_trip(self, unit):
        i_t = complex(I9_X[unit], I9_Y[unit])
        v_t = reconstruct_classical_terminal(
            DELTA9_CLASSICAL[unit], EQP9[unit], i_t, 0.0, XDP9[unit]
        )
        delta0, eqp, p_m = init_classical(OperatingPoint(v_t, i_t), 0.0, XDP9[unit])
        assert abs(delta0 - DELTA9_CLASSICAL[unit]) < 1e-6
        assert abs(eqp - EQP9[unit]) < 1e-6
        assert abs(p_m - PM9[unit]) < 2e-3

    def test_reconstruction_identity_random(self):
        rng = np.random.default_rng(8)
        for _ in range(30):
            v = rng.uniform(0.9, 1.1) * np.exp(1j * rng.uniform(-0.5, 0.5))
            i = rng.normal(scale=0.8) + 1j * rng.normal(scale=0.8)
            r_a = rng.uniform(0.0, 0.05)
            xdp = rng.uniform(0.05, 0.4)
            delta0, eqp, _ = init_classical(OperatingPoint(v, i), r_a, xdp)
            v2 = reconstruct_classical_terminal(delta0, eqp, i, r_a, xdp)
            assert abs(v2 - v) < 1e-10

    def test_zero_internal_voltage_rejected(self):
        op = OperatingPoint(v_t=1.0 + 0j, i_t=1j / 0.2)
        with pytest.raises(ValueError, match="internal voltage"):
            init_classical(op, r_a=0.0, x_d_prime=0.2)


class TestInitFourthOrder:
    def test_open_circuit_round_machine(self):
        gen = fourth_gens(p_m=None, e_fq=None)[0]
        gen = type(gen)(
            h=gen.h, d=gen.d, r_a=0.0, x_d=0.3, x_q=0.3, x_d_prime=0.3,
            x_q_prime=0.3, t_d0_prime=gen.t_d0_prime, t_q0_prime=gen.t_q0_prime,
        )
        op = OperatingPoint(v_t=0.98 * np.exp(0.25j), i_t=0j)
        delta0, eqp0, edp0, e_fq, p_m = init_fourth_order(op, gen)
        assert abs(delta0 - 0.25) < 1e-15
        assert abs(eqp0 - 0.98) < 1e-15
        assert abs(edp0) < 1e-15
        assert abs(e_fq - 0.98) < 1e-15
        assert p_m == 0.0

    @pytest.mark.parametrize("unit", range(3))
    def test_bench_round_trip(self, unit):
        gen = fourth_gens()[unit]
        i_t = complex(I9_X[unit], I9_Y[unit])
        v_t = reconstruct_fourth_terminal(
            DELTA9_FOURTH[unit], EQP9_FOURTH[unit], EDP9_FOURTH[unit], i_t, gen
        )
        delta0, eqp0, edp0, e_fq, p_m = init_fourth_order(OperatingPoint(v_t, i_t), gen)
        # Bench state rows carry four decimals, so recovery is limited to ~1e-5.
        assert abs(delta0 - DELTA9_FOURTH[unit]) < 1e-4
        assert abs(eqp0 - EQP9_FOURTH[unit]) < 1e-4
        assert abs(edp0 - EDP9_FOURTH[unit]) < 1e-4
        assert abs(e_fq - EFQ9[unit]) < 2e-3
        assert abs(p_m - PM9[unit]) < 2e-3

    @pytest.mark.parametrize("unit", range(3))
    def test_equal_reactance_variant_d_axis_voltage(self, unit):
        gen = fourth_gens(x_q_prime=XDP9)[unit]
        base = fourth_gens()[unit]
        i_t = complex(I9_X[unit], I9_Y[unit])
        # Same operating point as the unequal-reactance system.
        v_t = reconstruct_fourth_terminal(
            DELTA9_FOURTH[unit], EQP9_FOURTH[unit], EDP9_FOURTH[unit], i_t, base
        )
        _, _, edp0, _, _ = init_fourth_order(OperatingPoint(v_t, i_t), gen)
        assert abs(edp0 - EDP9_EQUAL_XQ[unit]) < 2e-3

    def test_reconstruction_identity_random(self):
        rng = np.random.default_rng(17)
        for _ in range(30):
            xdp = rng.uniform(0.1, 0.4)
            xqp = rng.uniform(0.1, 0.4)
            gen = fourth_gens(p_m=None, e_fq=None)[0]
            gen = type(gen)(
                h=3.0, d=0.0, r_a=rng.uniform(0.0, 0.05),
                x_d=xdp + rng.uniform(0.0, 1.0), x_q=xqp + rng.uniform(0.0, 1.0),
                x_d_prime=xdp, x_q_prime=xqp, t_d0_prime=6.0, t_q0_prime=0.5,
            )
            v = rng.uniform(0.9, 1.1) * np.exp(1j * rng.uniform(-0.5, 0.5))
            i = rng.normal(scale=0.8) + 1j * rng.normal(scale=0.8)
            op = OperatingPoint(v, i)
            delta0, eqp0, edp0, _, _ = init_fourth_order(op, gen)
            v2 = reconstruct_fourth_terminal(delta0, eqp0, edp0, i, gen)
            assert abs(v2 - v) < 1e-10

    def test_fixed_point_with_consistent_network(self):
        """A single machine with a matched network sits exactly still."""
        rng = np.random.default_rng(23)
        for _ in range(10):
            xdp = rng.uniform(0.1, 0.4)
            xqp = rng.uniform(0.1, 0.4)
            gen_t = fourth_gens(p_m=None, e_fq=None)[0]
            gen = type(gen_t)(
                h=4.0, d=1.0, r_a=rng.uniform(0.0, 0.05),
                x_d=xdp + rng.uniform(0.1, 1.0), x_q=xqp + rng.uniform(0.1, 1.0),
                x_d_prime=xdp, x_q_prime=xqp, t_d0_prime=7.0, t_q0_prime=0.4,
            )
            v = rng.uniform(0.95, 1.05) * np.exp(1j * rng.uniform(-0.3, 0.3))
            i = (0.3 + rng.uniform(0.0, 0.7)) * np.exp(1j * rng.uniform(-0.4, 0.4))
            op = OperatingPoint(v, i)
            state0, (done,) = initialize_fourth([op], [gen])
            delta0 = state0[0]
            ex, ey = xy_from_dq(delta0, state0[3], state0[2])
            e_int = complex(ex, ey)
            # One-generator network that reproduces the terminal current.
            y = expand_real_blocks(np.array([[i / e_int]]))
            dx = fourth_order_derivatives(state0, [done], y, OMEGA_S)
            assert np.abs(dx[2:]).max() < 1e-10

    def test_zero_locating_phasor_rejected(self):
        gen = fourth_gens(p_m=None, e_fq=None)[0]
        op = OperatingPoint(v_t=1.0 + 0j, i_t=1j / gen.x_q)
        with pytest.raises(ValueError, match="locating phasor"):
            init_fourth_order(op, gen)


class TestSystemInitializers:
    def test_classical_fills_constants(self):
        from swingsim import ClassicalGenParams

        gens = [
            ClassicalGenParams(h=h, d=d, r_a=0.0, x_d_prime=x)
            for h, d, x in zip((23.64, 6.4, 3.01), (1.0, 1.0, 1.0), XDP9)
        ]
        i_t = I9_X + 1j * I9_Y
        ops = [
            OperatingPoint(
                reconstruct_classical_terminal(
                    DELTA9_CLASSICAL[k], EQP9[k], i_t[k], 0.0, XDP9[k]
                ),
                i_t[k],
            )
            for k in range(3)
        ]
        state0, done = initialize_classical(ops, gens)
        assert np.abs(state0[:3] - DELTA9_CLASSICAL).max() < 1e-6
        assert np.all(state0[3:] == 0.0)
        assert np.abs(np.array([g.p_m for g in done]) - PM9).max() < 2e-3
        assert np.abs(np.array([g.e_q_prime for g in done]) - EQP9).max() < 1e-6

    def test_length_mismatch(self):
        gens = classical_gens()
        with pytest.raises(ValueError, match="operating points"):
            initialize_classical([OperatingPoint(1.0 + 0j, 0j)], gens)
