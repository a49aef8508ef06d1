"""Small-``n`` integrator for the continuous-time Brownian circuit ensemble.

Each step of length ``dt`` applies ``exp(-i theta P)`` for every Pauli pair
``P = sigma^alpha_j sigma^beta_k`` (``j < k``), in a fixed order, with
``theta = J^{alpha beta}_{jk} dt`` and couplings of variance ``J/(n dt)``.
The splitting error per step is ``O(dt^2)``.  Many disorder realisations are
evolved together as rows of one array.
"""

from __future__ import annotations

import itertools
import math
from typing import Optional, Sequence

import numpy as np

MAX_BROWNIAN_QUBITS = 12
MAX_DT_J = 1e-2
NORM_TOLERANCE = 1e-6


class NormDriftError(RuntimeError):
    pass


def pauli_pair_terms(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gather indices and phases so that ``(P psi)[y] = phase[y] * psi[src[y]]``.

    Returns arrays of shape ``(9 n (n-1)/2, 2**n)``.
    """
    dim = 1 << n
    idx = np.arange(dim)
    sources, phases = [], []
    for j, k in itertools.combinations(range(n), 2):
        for alpha in range(3):
            for beta in range(3):
                mask = 0
                phase_of_source = np.ones(dim, dtype=np.complex128)
                for qubit, pauli in ((j, alpha), (k, beta)):
                    shift = n - 1 - qubit
                    bit = (idx >> shift) & 1
                    if pauli in (0, 1):
                        mask |= 1 << shift
                    if pauli == 1:
                        phase_of_source *= np.where(bit == 0, 1j, -1j)
                    elif pauli == 2:
                        phase_of_source *= np.where(bit == 0, 1.0, -1.0)
                src = idx ^ mask
                sources.append(src)
                phases.append(phase_of_source[src])
    return np.array(sources), np.array(phases)


def brownian_evolve(
    n: int,
    beta_j: float,
    dt: float,
    rng: np.random.Generator,
    draws: int = 1,
    coupling: float = 1.0,
    snapshots: Optional[Sequence[float]] = None,
):
    """Evolve ``draws`` independent Brownian circuits from ``|0^n>``.

    Runs ``ceil(beta_j / (coupling * dt))`` steps and returns the final states,
    shape ``(draws, 2**n)``.  With ``snapshots`` (values of ``beta J``), also
    returns ``{beta_j: states}`` captured at the nearest step; the same
    disorder realisations are shared by every snapshot.
    """
    if n > MAX_BROWNIAN_QUBITS:
        raise ValueError(f"Brownian integrator is limited to {MAX_BROWNIAN_QUBITS} qubits")
    if n < 2:
        raise ValueError("need at least two qubits")
    if dt * coupling > MAX_DT_J:
        raise ValueError(f"dt*J = {dt * coupling:g} exceeds {MAX_DT_J:g}")
    steps = math.ceil(beta_j / (coupling * dt) - 1e-9) if beta_j > 0 else 0
    marks = {}
    for b in snapshots or ():
        marks.setdefault(int(round(b / (coupling * dt))), []).append(b)
    steps = max([steps, *marks.keys()])

    psi = np.zeros((draws, 1 << n), dtype=np.complex128)
    psi[:, 0] = 1.0
    taken = {b: psi.copy() for b in marks.get(0, [])}
    if steps:
        sources, phases = pauli_pair_terms(n)
        scale = math.sqrt(coupling * dt / n)
    for step in range(1, steps + 1):
        theta = rng.normal(0.0, scale, size=(len(sources), draws))
        cos_t, sin_t = np.cos(theta), np.sin(theta)
        for t in range(len(sources)):
            psi = cos_t[t][:, None] * psi - 1j * sin_t[t][:, None] * (phases[t] * psi[:, sources[t]])
        if step in marks:
            for b in marks[step]:
                taken[b] = psi.copy()
    drift = float(np.max(np.abs(np.sum(np.abs(psi) ** 2, axis=1) - 1.0)))
    if drift > NORM_TOLERANCE:
        raise NormDriftError(f"norm drift {drift:.3g} after {steps} steps; reduce dt={dt:g}")
    return (psi, taken) if snapshots is not None else psi


def brownian_unitary(n: int, beta_j: float, dt: float, rng: np.random.Generator, coupling: float = 1.0) -> np.ndarray:
    """State ``U|0^n>`` for one Brownian circuit of depth ``beta J``."""
    return brownian_evolve(n, beta_j, dt, rng, draws=1, coupling=coupling)[0]


def return_scores(states: np.ndarray) -> np.ndarray:
    """``z = d |<0|U|0>|^2`` per row."""
    return states.shape[1] * np.abs(states[:, 0]) ** 2


def ks_to_exponential(z: np.ndarray) -> float:
    from scipy.stats import kstest

    return float(kstest(np.asarray(z).ravel(), "expon").statistic)
