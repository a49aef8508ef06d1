"""Dense statevector evolution and exact sampling."""

from __future__ import annotations

import math
from typing import Optional, Union

import numba
import numpy as np

from .circuit import Circuit

#: Default register size limit; 24 qubits is 256 MiB of complex128 amplitudes.
MAX_QUBITS = 24


class RegisterTooLarge(MemoryError):
    pass


@numba.njit(cache=True, nogil=True)
def _apply_gates(psi, n, pairs, mats, start, stop):
    quarter = psi.shape[0] >> 2
    for g in range(start, stop):
        pi = n - 1 - pairs[g, 0]
        pj = n - 1 - pairs[g, 1]
        lo = min(pi, pj)
        hi = max(pi, pj)
        lo_mask = (1 << lo) - 1
        hi_mask = (1 << hi) - 1
        bi = 1 << pi
        bj = 1 << pj
        u = mats[g]
        for k in range(quarter):
            t = ((k >> lo) << (lo + 1)) | (k & lo_mask)
            t = ((t >> hi) << (hi + 1)) | (t & hi_mask)
            i1 = t | bj
            i2 = t | bi
            i3 = t | bi | bj
            a0 = psi[t]
            a1 = psi[i1]
            a2 = psi[i2]
            a3 = psi[i3]
            psi[t] = u[0, 0] * a0 + u[0, 1] * a1 + u[0, 2] * a2 + u[0, 3] * a3
            psi[i1] = u[1, 0] * a0 + u[1, 1] * a1 + u[1, 2] * a2 + u[1, 3] * a3
            psi[i2] = u[2, 0] * a0 + u[2, 1] * a1 + u[2, 2] * a2 + u[2, 3] * a3
            psi[i3] = u[3, 0] * a0 + u[3, 1] * a1 + u[3, 2] * a2 + u[3, 3] * a3


def check_register(n: int, max_qubits: Optional[int] = None) -> None:
    cap = MAX_QUBITS if max_qubits is None else max_qubits
    if n > cap:
        raise RegisterTooLarge(
            f"{n} qubits needs {16 * 2 ** n / 2 ** 30:.1f} GiB; cap is {cap} qubits"
        )


def zero_state(n: int, max_qubits: Optional[int] = None) -> np.ndarray:
    check_register(n, max_qubits)
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[0] = 1.0
    return psi


def apply_gates(psi: np.ndarray, circuit: Circuit, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
    """Apply gates ``start:stop`` of ``circuit`` to ``psi`` in place."""
    stop = circuit.num_gates if stop is None else stop
    if circuit.n < 2 or stop <= start:
        return psi
    _apply_gates(psi, circuit.n, circuit.pairs, circuit.unitaries, start, stop)
    return psi


def evolve(circuit: Circuit, state: Optional[np.ndarray] = None, max_qubits: Optional[int] = None) -> np.ndarray:
    """``U |0^n>`` (or ``U |state>``, copied first)."""
    psi = zero_state(circuit.n, max_qubits) if state is None else np.array(state, dtype=np.complex128)
    return apply_gates(psi, circuit)


def parse_bitstring(bits: Union[int, str], n: int) -> int:
    """Basis index of a bitstring; strings are read with qubit 0 first."""
    if isinstance(bits, str):
        if len(bits) != n or set(bits) - {"0", "1"}:
            raise ValueError(f"expected a length-{n} bitstring, got {bits!r}")
        return int(bits, 2)
    idx = int(bits)
    if not 0 <= idx < (1 << n):
        raise ValueError(f"bitstring index {idx} out of range for {n} qubits")
    return idx


def output_probability(circuit: Circuit, bitstring: Union[int, str], state: Optional[np.ndarray] = None) -> float:
    psi = evolve(circuit) if state is None else state
    return float(abs(psi[parse_bitstring(bitstring, circuit.n)]) ** 2)


def probabilities(state: np.ndarray) -> np.ndarray:
    return state.real ** 2 + state.imag ** 2


def _invert_cdf(p: np.ndarray, u: float) -> tuple[int, float]:
    """Index ``k`` with ``cum[k-1] <= u*total < cum[k]`` and the rescaled residual uniform."""
    cum = np.cumsum(p)
    target = u * cum[-1]
    k = int(np.searchsorted(cum, target, side="right"))
    k = min(k, len(p) - 1)
    while p[k] == 0.0 and k > 0:
        k -= 1
    lower = cum[k - 1] if k > 0 else 0.0
    residual = (target - lower) / p[k] if p[k] > 0 else 0.0
    return k, min(max(residual, 0.0), math.nextafter(1.0, 0.0))


def sample_index(p: np.ndarray, u: float) -> int:
    return _invert_cdf(p, u)[0]


def sample_bitstring(state: np.ndarray, rng: np.random.Generator) -> int:
    """Draw a basis index from ``|amplitude|^2`` with one uniform variate."""
    return sample_index(probabilities(state), rng.random())


def sample_product(block_probs: list[np.ndarray], block_sizes: list[int], u: float) -> int:
    """Inverse-CDF sample of a product distribution over contiguous blocks.

    Blocks are ordered from the most significant qubits down.  Using the
    residual of each block's inversion as the next block's uniform reproduces
    the lexicographic inverse CDF of the full product vector from the same
    ``u``.
    """
    idx = 0
    for p, m in zip(block_probs, block_sizes):
        k, u = _invert_cdf(p, u)
        idx = (idx << m) | k
    return idx


def neg_log_probability(amplitude: complex) -> float:
    """``-log |amplitude|^2`` computed from ``|amplitude|`` so tiny values stay finite."""
    mag = abs(amplitude)
    if mag == 0.0:
        return math.inf
    q = mag * mag
    if q >= 1e-300:
        return -math.log(q)
    return -2.0 * float(np.log(np.longdouble(mag)))
