"""Layered two-qubit circuits: drawing, noise realisation and JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .gates import PAULIS, haar_unitaries, unitarity_error

TOPOLOGIES = ("all_to_all", "brickwork_1d")


@dataclass(frozen=True, eq=False)
class Circuit:
    """Gates stored flat in application order.

    ``pairs[g] = (i, j)`` are the qubits of gate ``g``, ``unitaries[g]`` its
    4x4 matrix in the basis ``|q_i q_j>`` and ``layer_of[g]`` its layer.
    Qubit 0 is the most significant bit of a basis-state index.
    """

    n: int
    depth: int
    pairs: np.ndarray
    unitaries: np.ndarray
    layer_of: np.ndarray
    topology: str = "all_to_all"
    seed: Optional[int] = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "pairs", np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2))
        object.__setattr__(
            self, "unitaries", np.asarray(self.unitaries, dtype=np.complex128).reshape(-1, 4, 4)
        )
        object.__setattr__(self, "layer_of", np.asarray(self.layer_of, dtype=np.int64).reshape(-1))
        if not (len(self.pairs) == len(self.unitaries) == len(self.layer_of)):
            raise ValueError("pairs, unitaries and layer_of must have equal length")

    @property
    def num_gates(self) -> int:
        return len(self.pairs)

    def layers(self) -> list[list[tuple[tuple[int, int], np.ndarray]]]:
        out = [[] for _ in range(self.depth)]
        for (i, j), u, layer in zip(self.pairs, self.unitaries, self.layer_of):
            out[layer].append(((int(i), int(j)), u))
        return out

    def validate(self, atol: float = 1e-12) -> None:
        if self.num_gates and (self.pairs.min() < 0 or self.pairs.max() >= self.n):
            raise ValueError("gate acts outside the register")
        if np.any(self.pairs[:, 0] == self.pairs[:, 1]):
            raise ValueError("two-qubit gate on a single qubit")
        for layer in range(self.depth):
            qubits = self.pairs[self.layer_of == layer].ravel()
            if len(np.unique(qubits)) != len(qubits):
                raise ValueError(f"layer {layer} contains overlapping gates")
        for g, u in enumerate(self.unitaries):
            err = unitarity_error(u)
            if err > atol:
                raise ValueError(f"gate {g} is not unitary (error {err:.3g})")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "depth": self.depth,
            "topology": self.topology,
            "seed": self.seed,
            "layers": [
                {
                    "pairs": [[int(i), int(j)] for (i, j), _ in layer],
                    "unitaries": [
                        [[[float(v.real), float(v.imag)] for v in row] for row in u] for _, u in layer
                    ],
                }
                for layer in self.layers()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Circuit":
        pairs, mats, layer_of = [], [], []
        for idx, layer in enumerate(data["layers"]):
            for pair, u in zip(layer["pairs"], layer["unitaries"]):
                pairs.append(pair)
                mats.append([[complex(re, im) for re, im in row] for row in u])
                layer_of.append(idx)
        return cls(
            n=data["n"],
            depth=data["depth"],
            pairs=np.array(pairs, dtype=np.int64).reshape(-1, 2),
            unitaries=np.array(mats, dtype=np.complex128).reshape(-1, 4, 4),
            layer_of=np.array(layer_of, dtype=np.int64),
            topology=data.get("topology", "all_to_all"),
            seed=data.get("seed"),
        )

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


def empty_circuit(n: int) -> Circuit:
    return Circuit(n, 0, np.zeros((0, 2)), np.zeros((0, 4, 4)), np.zeros(0))


def brickwork_pairs(n: int, layer: int) -> list[tuple[int, int]]:
    """Nearest-neighbour pairs for 0-based ``layer``, open boundary.

    Even layers pair (0,1),(2,3),...; odd layers pair (1,2),(3,4),...
    """
    start = layer % 2
    return [(i, i + 1) for i in range(start, n - 1, 2)]


def draw_circuit(n: int, depth: int, topology: str, rng: np.random.Generator, seed=None) -> Circuit:
    if n % 2:
        raise ValueError(f"n must be even, got {n}")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if topology not in TOPOLOGIES:
        raise ValueError(f"unknown topology {topology!r}")
    pairs, mats, layer_of = [], [], []
    for layer in range(depth):
        if topology == "all_to_all":
            perm = rng.permutation(n)
            layer_pairs = [(int(perm[i]), int(perm[i + 1])) for i in range(0, n, 2)]
        else:
            layer_pairs = brickwork_pairs(n, layer)
        pairs.extend(layer_pairs)
        mats.append(haar_unitaries(len(layer_pairs), 4, rng))
        layer_of.extend([layer] * len(layer_pairs))
    return Circuit(n, depth, np.array(pairs), np.concatenate(mats), np.array(layer_of), topology, seed)


@dataclass(frozen=True)
class NoiseModel:
    """Single-qubit depolarising noise with aggregate rate ``gamma``.

    Each touched qubit gets X, Y or Z with probability ``gamma/(3n)`` each.
    """

    gamma: float
    n: int

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if self.per_qubit > 0.75:
            raise ValueError(f"per-qubit error rate {self.per_qubit:.3g} exceeds 0.75 (super-depolarising)")

    @property
    def per_qubit(self) -> float:
        return self.gamma / self.n


def draw_pauli_codes(num_gates: int, noise: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    """Pauli code (0=I, 1=X, 2=Y, 3=Z) for both qubits of every gate."""
    hit = rng.random((num_gates, 2)) < noise.per_qubit
    which = rng.integers(1, 4, size=(num_gates, 2))
    return np.where(hit, which, 0)


def apply_pauli_codes(circuit: Circuit, codes: np.ndarray) -> Circuit:
    """Left-multiply ``P_i (x) P_j`` into every gate site with a non-identity code."""
    mats = circuit.unitaries.copy()
    for g in np.nonzero(codes.any(axis=1))[0]:
        mats[g] = np.kron(PAULIS[codes[g, 0]], PAULIS[codes[g, 1]]) @ mats[g]
    return Circuit(
        circuit.n, circuit.depth, circuit.pairs, mats, circuit.layer_of,
        circuit.topology, circuit.seed, {"pauli_codes": codes},
    )


def noisy_instance(circuit: Circuit, noise: NoiseModel, rng: np.random.Generator) -> Circuit:
    """One unitary realisation of the noisy circuit.

    The drawn Pauli codes are kept in ``provenance["pauli_codes"]``.
    """
    if noise.gamma == 0:
        return circuit
    return apply_pauli_codes(circuit, draw_pauli_codes(circuit.num_gates, noise, rng))
