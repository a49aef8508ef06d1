"""Haar-random two-qubit gates and single-qubit Paulis."""

import numpy as np

PAULIS = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=np.complex128,
)
PAULI_LABELS = "IXYZ"


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``dim x dim`` unitary.

    QR of a complex Ginibre matrix, with the phases of ``diag(R)`` divided out
    so that the triangular factor has a positive real diagonal; without this
    step the result is not Haar distributed.
    """
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_unitaries(count: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent Haar unitaries from one batched QR, shape ``(count, dim, dim)``."""
    z = (rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def haar_two_qubit_gate(rng: np.random.Generator) -> np.ndarray:
    return haar_unitary(4, rng)


def pauli_pair(code_first: int, code_second: int) -> np.ndarray:
    """``P_first (x) P_second`` in the gate's local basis ``|q_first q_second>``."""
    return np.kron(PAULIS[code_first], PAULIS[code_second])


def unitarity_error(u: np.ndarray) -> float:
    """``max |U^dagger U - I|`` (elementwise)."""
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
