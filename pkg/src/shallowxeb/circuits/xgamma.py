"""One draw of ``X_gamma = -log q_U(x)`` with ``x`` sampled from a noisy realisation of ``U``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import NoiseModel, apply_pauli_codes, draw_circuit, draw_pauli_codes
from .statevector import apply_gates, neg_log_probability, sample_bitstring, zero_state

SAMPLE_COLUMNS = ("sampler", "n", "depth", "gamma", "seed", "bitstring", "q", "neg_log_q", "z")


@dataclass(frozen=True)
class SampleRecord:
    sampler: str
    n: int
    depth: int
    gamma: float
    circuit_seed: int
    noise_seed: int
    bitstring: int
    q: float
    neg_log_q: float
    z: float
    underflow: bool = False

    @property
    def bitstring_hex(self) -> str:
        return format(self.bitstring, "0{}x".format(max(1, math.ceil(self.n / 4))))

    def row(self) -> list[str]:
        return [
            self.sampler, str(self.n), str(self.depth), repr(float(self.gamma)),
            str(self.circuit_seed), self.bitstring_hex,
            repr(float(self.q)), repr(float(self.neg_log_q)), repr(float(self.z)),
        ]


def derive_seeds(rng: np.random.Generator) -> tuple[int, int]:
    """Circuit and noise seeds for one draw; each record can be replayed from them."""
    s = rng.integers(0, 2 ** 63, size=2)
    return int(s[0]), int(s[1])


def make_record(sampler, n, depth, gamma, circuit_seed, noise_seed, x, amplitude) -> SampleRecord:
    q = float(abs(amplitude) ** 2)
    nlq = neg_log_probability(amplitude)
    return SampleRecord(
        sampler, n, depth, float(gamma), circuit_seed, noise_seed, int(x),
        q, nlq, q * 2.0 ** n, underflow=(q < 1e-300),
    )


def draw_xgamma_sample(
    n: int,
    depth: int,
    gamma: float,
    topology: str,
    rng: np.random.Generator,
    sampler: str = "noisy",
) -> SampleRecord:
    """Fresh ``U``, one noisy realisation ``V``, ``x ~ |<x|V|0>|^2``, record ``q_U(x)``.

    ``U`` and ``V`` agree up to the first gate that received a Pauli, so that
    prefix is evolved once and the state is forked there.
    """
    circuit_seed, noise_seed = derive_seeds(rng)
    u_circ = draw_circuit(n, depth, topology, np.random.default_rng(circuit_seed), seed=circuit_seed)
    noise_rng = np.random.default_rng(noise_seed)
    noise = NoiseModel(gamma, n)
    psi = zero_state(n)
    if gamma > 0:
        codes = draw_pauli_codes(u_circ.num_gates, noise, noise_rng)
        hit = np.nonzero(codes.any(axis=1))[0]
    else:
        hit = ()
    if len(hit) == 0:
        apply_gates(psi, u_circ)
        x = sample_bitstring(psi, noise_rng)
    else:
        first = int(hit[0])
        v_circ = apply_pauli_codes(u_circ, codes)
        apply_gates(psi, u_circ, 0, first)
        phi = psi.copy()
        apply_gates(psi, u_circ, first)
        apply_gates(phi, v_circ, first)
        x = sample_bitstring(phi, noise_rng)
    return make_record(sampler, n, depth, gamma, circuit_seed, noise_seed, x, psi[x])
