from .brownian import brownian_evolve, brownian_unitary, ks_to_exponential, return_scores
from .circuit import (
    Circuit,
    NoiseModel,
    TOPOLOGIES,
    draw_circuit,
    empty_circuit,
    noisy_instance,
)
from .gates import haar_two_qubit_gate, haar_unitary, unitarity_error
from .statevector import (
    MAX_QUBITS,
    RegisterTooLarge,
    evolve,
    output_probability,
    probabilities,
    sample_bitstring,
)
from .xgamma import SAMPLE_COLUMNS, SampleRecord, draw_xgamma_sample
