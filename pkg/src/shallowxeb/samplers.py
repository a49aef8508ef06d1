"""Bitstring sources sharing one interface: clean, noisy, uniform and block spoofer.

Every sampler draws a fresh ideal circuit ``U`` per sample and scores the
returned bitstring against ``q_U``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .circuits.circuit import Circuit, draw_circuit
from .circuits.gates import haar_unitaries
from .circuits.statevector import (
    apply_gates,
    evolve,
    probabilities,
    sample_product,
    zero_state,
)
from .circuits.xgamma import SampleRecord, derive_seeds, draw_xgamma_sample, make_record

SAMPLER_KINDS = ("clean", "noisy", "uniform", "spoofer")


@dataclass(frozen=True)
class Partition:
    n: int
    blocks: tuple

    def __post_init__(self):
        flat = [q for block in self.blocks for q in block]
        if sorted(flat) != list(range(self.n)):
            raise ValueError("blocks must be disjoint and cover every qubit")

    @property
    def sizes(self) -> list[int]:
        return [len(b) for b in self.blocks]

    def block_of(self) -> np.ndarray:
        out = np.empty(self.n, dtype=np.int64)
        for label, block in enumerate(self.blocks):
            out[list(block)] = label
        return out


def default_block_size(n: int) -> int:
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


def partition_qubits(n: int, block_size: Optional[int] = None) -> Partition:
    """Contiguous blocks of ``block_size`` qubits (default ``ceil(log2 n)``); the last may be short."""
    m = default_block_size(n) if block_size is None else block_size
    if not 1 <= m <= n:
        raise ValueError(f"block size must satisfy 1 <= M <= n, got M={m}, n={n}")
    return Partition(n, tuple(tuple(range(s, min(s + m, n))) for s in range(0, n, m)))


def default_depth_boost(n: int, block_size: int, depth: int) -> int:
    """Boost that roughly restores the per-qubit gate count lost to cross-block deletions.

    A random pairing keeps a given qubit's gate with probability ``(M-1)/(n-1)``;
    every appended intra-block layer gives each qubit one more gate.
    """
    if n <= 1:
        return 1
    lost = depth * (n - block_size) / (n - 1)
    return 1 + int(round(lost))


def _intra_block_layer(partition: Partition, rng: np.random.Generator) -> list[tuple[int, int]]:
    pairs = []
    for block in partition.blocks:
        perm = rng.permutation(len(block))
        members = [block[i] for i in perm]
        pairs.extend((members[i], members[i + 1]) for i in range(0, len(members) - 1, 2))
    return pairs


def spoof_circuit(
    circuit: Circuit,
    partition: Partition,
    depth_boost: int = 1,
    rng: Optional[np.random.Generator] = None,
) -> Circuit:
    """Delete every gate straddling two blocks; append ``depth_boost - 1`` fresh intra-block layers."""
    if partition.n != circuit.n:
        raise ValueError("partition and circuit sizes differ")
    if depth_boost < 1:
        raise ValueError("depth_boost must be >= 1")
    label = partition.block_of()
    keep = label[circuit.pairs[:, 0]] == label[circuit.pairs[:, 1]] if circuit.num_gates else np.zeros(0, bool)
    if keep.all() and depth_boost == 1:
        return circuit
    pairs = [circuit.pairs[keep]]
    mats = [circuit.unitaries[keep]]
    layers = [circuit.layer_of[keep]]
    if depth_boost > 1:
        if rng is None:
            raise ValueError("a generator is needed to draw the boost layers")
        for extra in range(depth_boost - 1):
            layer_pairs = _intra_block_layer(partition, rng)
            if not layer_pairs:
                continue
            pairs.append(np.array(layer_pairs, dtype=np.int64))
            mats.append(haar_unitaries(len(layer_pairs), 4, rng))
            layers.append(np.full(len(layer_pairs), circuit.depth + extra))
    return Circuit(
        circuit.n,
        circuit.depth + depth_boost - 1,
        np.concatenate(pairs),
        np.concatenate(mats),
        np.concatenate(layers),
        circuit.topology,
        circuit.seed,
        {"spoofed": True, "blocks": partition.blocks},
    )


def block_circuits(circuit: Circuit, partition: Partition) -> list[Circuit]:
    """Split a block-local circuit into one small circuit per block (qubits relabelled)."""
    label = partition.block_of()
    out = []
    for b, block in enumerate(partition.blocks):
        local = {q: i for i, q in enumerate(block)}
        sel = label[circuit.pairs[:, 0]] == b
        if np.any(label[circuit.pairs[sel, 1]] != b):
            raise ValueError("circuit has gates crossing blocks")
        pairs = np.vectorize(local.get)(circuit.pairs[sel]) if sel.any() else np.zeros((0, 2))
        out.append(Circuit(len(block), circuit.depth, pairs, circuit.unitaries[sel], circuit.layer_of[sel]))
    return out


def sample_block_product(circuit: Circuit, partition: Partition, u: float) -> int:
    """Sample a block-local circuit from its per-block ``2**M`` statevectors."""
    probs = [probabilities(evolve(c)) for c in block_circuits(circuit, partition)]
    return sample_product(probs, partition.sizes, u)


@dataclass(frozen=True)
class SamplerSpec:
    kind: str
    gamma: float = 0.0
    block_size: Optional[int] = None
    depth_boost: Optional[int] = None

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise ValueError(f"unknown sampler kind {self.kind!r}; choose from {SAMPLER_KINDS}")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if self.depth_boost is not None and self.depth_boost < 1:
            raise ValueError("depth_boost must be >= 1")

    @property
    def tag(self) -> str:
        if self.kind == "spoofer":
            m = "auto" if self.block_size is None else self.block_size
            return f"spoofer-M{m}"
        return self.kind

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "noisy":
            out["gamma"] = self.gamma
        if self.block_size is not None:
            out["block_size"] = self.block_size
        if self.depth_boost is not None:
            out["depth_boost"] = self.depth_boost
        return out

    @classmethod
    def from_value(cls, value) -> "SamplerSpec":
        if isinstance(value, SamplerSpec):
            return value
        if isinstance(value, str):
            return cls(value)
        return cls(**value)


def sample(spec: SamplerSpec, n: int, depth: int, topology: str, rng: np.random.Generator) -> SampleRecord:
    """One scored bitstring from ``spec`` on a freshly drawn ``n``-qubit circuit."""
    if spec.kind in ("clean", "noisy"):
        gamma = spec.gamma if spec.kind == "noisy" else 0.0
        return draw_xgamma_sample(n, depth, gamma, topology, rng, sampler=spec.kind)

    circuit_seed, aux_seed = derive_seeds(rng)
    u_circ = draw_circuit(n, depth, topology, np.random.default_rng(circuit_seed), seed=circuit_seed)
    aux = np.random.default_rng(aux_seed)
    psi = apply_gates(zero_state(n), u_circ)
    if spec.kind == "uniform":
        x = int(aux.integers(0, 1 << n))
    else:
        partition = partition_qubits(n, spec.block_size)
        m = max(partition.sizes)
        boost = spec.depth_boost if spec.depth_boost is not None else default_depth_boost(n, m, depth)
        v_circ = spoof_circuit(u_circ, partition, boost, aux)
        x = sample_block_product(v_circ, partition, aux.random())
    return make_record(spec.tag, n, depth, 0.0, circuit_seed, aux_seed, x, psi[x])
