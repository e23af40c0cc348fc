"""Admittance algebra for reduced multi-machine network models.

A solved network enters as a complex bus admittance matrix.  Eliminating every
bus except the generator terminals (Kron reduction) gives the terminal-bus
matrix ``Y_t``; expanding each complex entry ``G + jB`` into the real 2x2
block ``[[G, -B], [B, G]]`` gives ``Y_r``, which acts on stacked ``(x, y)``
pairs in the synchronously rotating network frame.  Folding in each machine's
source impedance and rotor-angle rotation yields the internal-bus matrix ``Y``
that maps internal voltages directly to terminal currents.  When every
machine has equal d- and q-axis transient reactances the rotations cancel and
``Y`` collapses to a constant matrix that never needs re-evaluation.

Everything here is dense: the systems of interest are tens of nodes at most,
so direct factorization beats any sparse machinery.  All values are per-unit
on a common base; node indices in the public API are 1-based, matching the
usual bus-numbering convention of network data.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SingularMatrixError

# Condition-number estimate above which a solve is treated as singular.
COND_LIMIT = 1e12


@dataclass(frozen=True)
class SourceImpedance:
    """Per-generator stator impedance seen by the network reduction.

    For classical-model machines set ``x_q_prime`` equal to ``x_d_prime`` so
    the impedance block commutes with the rotor rotation.
    """

    r_a: float
    x_d_prime: float
    x_q_prime: float

    def __post_init__(self):
        # Zero reactance is admitted so purely resistive blocks stay
        # expressible; machine parameter types enforce strict positivity.
        if not (self.x_d_prime >= 0):
            raise ValueError(f"x_d_prime must be >= 0, got {self.x_d_prime}")
        if not (self.x_q_prime >= 0):
            raise ValueError(f"x_q_prime must be >= 0, got {self.x_q_prime}")
        if not (self.r_a >= 0):
            raise ValueError(f"r_a must be >= 0, got {self.r_a}")


def impedance_arrays(impedances: Sequence[SourceImpedance]):
    """Unpack a SourceImpedance sequence into (r_a, x_d_prime, x_q_prime) arrays."""
    r_a = np.array([z.r_a for z in impedances], dtype=float)
    xdp = np.array([z.x_d_prime for z in impedances], dtype=float)
    xqp = np.array([z.x_q_prime for z in impedances], dtype=float)
    return r_a, xdp, xqp


def _check_cond(a: np.ndarray, what: str) -> None:
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMatrixError(what, float(cond))


def build_y_bus(branches, shunts, n_nodes: int) -> np.ndarray:
    """Assemble the complex bus admittance matrix from branch and shunt data.

    Parameters
    ----------
    branches : iterable of (from_node, to_node, series_admittance)
        Series elements between two buses; nodes are 1-based.
    shunts : iterable of (node, shunt_admittance)
        Bus-to-ground elements (constant-impedance loads, line charging, ...).
    n_nodes : int
        Total bus count.

    The diagonal entry of bus i is the sum of all admittances incident to it;
    the off-diagonal entry (i, j) is minus the total series admittance between
    i and j.
    """
    if n_nodes < 1:
        raise ValueError(f"n_nodes must be >= 1, got {n_nodes}")
    y = np.zeros((n_nodes, n_nodes), dtype=complex)
    for i, j, adm in branches:
        if i == j:
            raise ValueError(f"branch {i}-{j} connects a node to itself")
        for node in (i, j):
            if not (1 <= node <= n_nodes):
                raise ValueError(f"branch {i}-{j}: node {node} out of range 1..{n_nodes}")
        adm = complex(adm)
        if not np.isfinite(adm):
            raise ValueError(f"branch {i}-{j}: admittance {adm} is not finite")
        a, b = i - 1, j - 1
        y[a, a] += adm
        y[b, b] += adm
        y[a, b] -= adm
        y[b, a] -= adm
    for node, adm in shunts:
        if not (1 <= node <= n_nodes):
            raise ValueError(f"shunt at node {node} out of range 1..{n_nodes}")
        adm = complex(adm)
        if not np.isfinite(adm):
            raise ValueError(f"shunt at node {node}: admittance {adm} is not finite")
        y[node - 1, node - 1] += adm
    return y


def load_shunt(p: float, q: float, v_mag: float) -> complex:
    """Constant-impedance equivalent of a P + jQ load at voltage magnitude |V|."""
    if not (v_mag > 0):
        raise ValueError(f"load conversion needs |V| > 0, got {v_mag}")
    return (p - 1j * q) / v_mag**2


def kron_reduce(y_bus: np.ndarray, retained: Sequence[int]) -> np.ndarray:
    """Eliminate all zero-injection nodes, keeping `retained` (1-based, ordered).

    The result maps retained-node voltages to retained-node injections exactly
    as the full system does when every eliminated node carries zero injection.
    """
    y_bus = np.asarray(y_bus)
    n = y_bus.shape[0]
    if y_bus.ndim != 2 or y_bus.shape[1] != n:
        raise ValueError(f"y_bus must be square, got shape {y_bus.shape}")
    retained = list(retained)
    if not retained:
        raise ValueError("retained node set is empty")
    if len(set(retained)) != len(retained):
        raise ValueError(f"retained nodes contain duplicates: {retained}")
    for node in retained:
        if not (1 <= node <= n):
            raise ValueError(f"retained node {node} out of range 1..{n}")
    keep = [node - 1 for node in retained]
    elim = [k for k in range(n) if k not in set(keep)]
    if not elim:
        return y_bus[np.ix_(keep, keep)].copy()
    y_nn = y_bus[np.ix_(elim, elim)]
    y_nm = y_bus[np.ix_(elim, keep)]
    y_mn = y_bus[np.ix_(keep, elim)]
    y_mm = y_bus[np.ix_(keep, keep)]
    _check_cond(y_nn, "eliminated-node block")
    return y_mm - y_mn @ np.linalg.solve(y_nn, y_nm)


def expand_real_blocks(y_t: np.ndarray) -> np.ndarray:
    """Expand an m x m complex matrix to its 2m x 2m real-block form.

    Entry G + jB becomes the block [[G, -B], [B, G]], so the expanded matrix
    acts on stacked (x, y) component pairs exactly as the complex matrix acts
    on phasors.
    """
    y_t = np.asarray(y_t)
    if y_t.ndim != 2 or y_t.shape[0] != y_t.shape[1]:
        raise ValueError(f"y_t must be square, got shape {y_t.shape}")
    g, b = y_t.real, y_t.imag
    m = y_t.shape[0]
    out = np.zeros((2 * m, 2 * m))
    out[0::2, 0::2] = g
    out[0::2, 1::2] = -b
    out[1::2, 0::2] = b
    out[1::2, 1::2] = g
    return out


def block_structure_residual(a: np.ndarray) -> float:
    """Max deviation of a 2m x 2m matrix from exact [[G, -B], [B, G]] block form."""
    a = np.asarray(a, dtype=float)
    d1 = np.abs(a[0::2, 0::2] - a[1::2, 1::2]).max()
    d2 = np.abs(a[0::2, 1::2] + a[1::2, 0::2]).max()
    return float(max(d1, d2))


def build_t1(deltas: Sequence[float]) -> np.ndarray:
    """Block-diagonal rotor-rotation matrix; block k maps xy pairs to dq pairs.

    Each block [[sin d, -cos d], [cos d, sin d]] is orthogonal.
    """
    deltas = np.asarray(deltas, dtype=float)
    if not np.all(np.isfinite(deltas)):
        raise ValueError("rotor angles must be finite")
    m = deltas.size
    s, c = np.sin(deltas), np.cos(deltas)
    out = np.zeros((2 * m, 2 * m))
    idx = np.arange(m)
    out[2 * idx, 2 * idx] = s
    out[2 * idx, 2 * idx + 1] = -c
    out[2 * idx + 1, 2 * idx] = c
    out[2 * idx + 1, 2 * idx + 1] = s
    return out


def build_t2(impedances: Sequence[SourceImpedance]) -> np.ndarray:
    """Block-diagonal source-impedance matrix; block k is [[Ra, -Xq'], [Xd', Ra]]."""
    r_a, xdp, xqp = impedance_arrays(impedances)
    m = r_a.size
    out = np.zeros((2 * m, 2 * m))
    idx = np.arange(m)
    out[2 * idx, 2 * idx] = r_a
    out[2 * idx, 2 * idx + 1] = -xqp
    out[2 * idx + 1, 2 * idx] = xdp
    out[2 * idx + 1, 2 * idx + 1] = r_a
    return out


def invert_y_r(y_r: np.ndarray) -> np.ndarray:
    """Checked inverse of the terminal-bus real-block matrix.

    Callers that evaluate the internal-bus matrix repeatedly for the same
    network stage should invert once and pass the result to
    `internal_bus_admittance` via `y_r_inv`.
    """
    y_r = np.asarray(y_r, dtype=float)
    _check_cond(y_r, "terminal-bus matrix Y_r")
    return np.linalg.inv(y_r)


def internal_bus_admittance(
    y_r: np.ndarray | None,
    t1: np.ndarray,
    t2: np.ndarray,
    *,
    y_r_inv: np.ndarray | None = None,
) -> np.ndarray:
    """Internal-bus admittance Y = (T1 Yr^-1 + T2 T1)^-1 T1.

    Passing a precomputed `y_r_inv` skips the inversion, leaving one 2m x 2m
    solve per call; that is the intended path when the matrix must be
    re-evaluated at every rotor-angle update.
    """
    if y_r_inv is None:
        if y_r is None:
            raise ValueError("either y_r or y_r_inv must be given")
        y_r_inv = invert_y_r(y_r)
    a = t1 @ y_r_inv + t2 @ t1
    _check_cond(a, "rotation-impedance chain (T1 Yr^-1 + T2 T1)")
    return np.linalg.solve(a, t1)


def constant_internal_admittance(
    y_r: np.ndarray | None,
    t2: np.ndarray,
    *,
    y_r_inv: np.ndarray | None = None,
) -> np.ndarray:
    """Angle-independent internal-bus matrix Y = (Yr^-1 + T2)^-1.

    Valid only when every source-impedance block commutes with the rotor
    rotations, i.e. x_d_prime == x_q_prime for every generator; rejected
    otherwise because the rotations then fail to cancel.
    """
    t2 = np.asarray(t2, dtype=float)
    m2 = t2.shape[0]
    for k in range(0, m2, 2):
        z = t2[k : k + 2, k : k + 2]
        if z[0, 0] != z[1, 1] or z[0, 1] != -z[1, 0]:
            raise ValueError(
                "source-impedance blocks do not commute with the rotor rotations "
                f"(T2*T1 != T1*T2): generator {k // 2 + 1} has "
                f"x_d_prime = {z[1, 0]} but x_q_prime = {-z[0, 1]}"
            )
    if y_r_inv is None:
        if y_r is None:
            raise ValueError("either y_r or y_r_inv must be given")
        y_r_inv = invert_y_r(y_r)
    a = y_r_inv + t2
    _check_cond(a, "impedance-augmented inverse (Yr^-1 + T2)")
    return np.linalg.inv(a)


def format_real_matrix(a: np.ndarray, precision: int = 4) -> str:
    """Fixed-point text layout, aligned columns, one row per line."""
    a = np.asarray(a, dtype=float)
    cells = [[f"{v:.{precision}f}" for v in row] for row in a]
    width = max(len(c) for row in cells for c in row)
    return "\n".join("  ".join(c.rjust(width) for c in row) for row in cells)


def format_complex_matrix(a: np.ndarray, precision: int = 4) -> str:
    """Fixed-point complex layout with entries like ``1.1051-4.6957i``."""
    a = np.asarray(a, dtype=complex)
    cells = [
        [f"{v.real:.{precision}f}{v.imag:+.{precision}f}i" for v in row] for row in a
    ]
    width = max(len(c) for row in cells for c in row)
    return "\n".join("  ".join(c.rjust(width) for c in row) for row in cells)
