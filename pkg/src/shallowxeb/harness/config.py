"""Experiment configuration and named presets."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import yaml

from ..circuits.circuit import TOPOLOGIES
from ..circuits.statevector import MAX_QUBITS
from ..samplers import SamplerSpec

CONFIG_KEYS = (
    "n_list", "depth", "topology", "gamma_list", "samples", "seed", "sampler", "output_dir",
    "chunk_size", "fit_slope", "overlay",
)

DEFAULT_CHUNK = 500


@dataclass(frozen=True)
class ExperimentConfig:
    """A sweep over ``n`` (and ``gamma`` for noisy samplers) at fixed depth.

    ``chunk_size`` fixes how samples are split into jobs; it is part of the
    seeding contract, so it must not depend on the worker count.
    """

    n_list: tuple
    depth: int
    topology: str = "all_to_all"
    gamma_list: tuple = (0.0,)
    samples: int = 1000
    seed: int = 0
    sampler: tuple = (SamplerSpec("noisy"),)
    output_dir: str = "results"
    chunk_size: int = DEFAULT_CHUNK
    fit_slope: bool = True
    overlay: bool = True
    max_qubits: int = field(default=MAX_QUBITS, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "gamma_list", tuple(float(g) for g in self.gamma_list))
        samplers = self.sampler
        if isinstance(samplers, (str, dict, SamplerSpec)):
            samplers = (samplers,)
        object.__setattr__(self, "sampler", tuple(SamplerSpec.from_value(s) for s in samplers))
        self.validate()

    def validate(self) -> None:
        if not self.n_list:
            raise ValueError("n_list is empty")
        for n in self.n_list:
            if n < 2 or n % 2:
                raise ValueError(f"every n must be even and >= 2, got {n}")
            if n > self.max_qubits:
                raise ValueError(f"n={n} exceeds the {self.max_qubits}-qubit statevector cap")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r}; choose from {TOPOLOGIES}")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if any(g < 0 for g in self.gamma_list):
            raise ValueError("gamma values must be non-negative")
        if not self.sampler:
            raise ValueError("at least one sampler is required")

    def grid(self) -> list[tuple[int, float, SamplerSpec]]:
        """Grid points in canonical order: samplers, then gamma, then n."""
        points = []
        for spec in self.sampler:
            gammas = self.gamma_list if spec.kind == "noisy" else (0.0,)
            for gamma in gammas:
                concrete = replace(spec, gamma=gamma) if spec.kind == "noisy" else spec
                for n in self.n_list:
                    points.append((n, gamma, concrete))
        return points

    def to_dict(self) -> dict:
        return {
            "n_list": list(self.n_list),
            "depth": self.depth,
            "topology": self.topology,
            "gamma_list": list(self.gamma_list),
            "samples": self.samples,
            "seed": self.seed,
            "sampler": [_sampler_entry(s) for s in self.sampler],
            "output_dir": self.output_dir,
            "chunk_size": self.chunk_size,
            "fit_slope": self.fit_slope,
            "overlay": self.overlay,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        unknown = set(data) - set(CONFIG_KEYS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        missing = {"n_list", "depth"} - set(data)
        if missing:
            raise ValueError(f"config is missing {sorted(missing)}")
        return cls(**data)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_yaml(cls, text: str) -> "ExperimentConfig":
        data = yaml.safe_load(text)
        if not isinstance(data, dict):
            raise ValueError("config must be a mapping")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_yaml(Path(path).read_text())

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _sampler_entry(spec: SamplerSpec):
    d = spec.to_dict()
    d.pop("gamma", None)
    return d["kind"] if len(d) == 1 else d


PRESETS = {
    "appendixA-alltoall-d6": dict(
        n_list=[8, 10, 12, 14, 16],
        depth=6,
        topology="all_to_all",
        gamma_list=[0.0, 0.3],
        samples=10_000,
        seed=20240601,
        sampler=["noisy"],
        output_dir="results/appendixA-alltoall-d6",
    ),
    "appendixA-brickwork-d6": dict(
        n_list=[8, 10, 12, 14, 16],
        depth=6,
        topology="brickwork_1d",
        gamma_list=[0.0, 0.3],
        samples=10_000,
        seed=20240601,
        sampler=["noisy"],
        output_dir="results/appendixA-brickwork-d6",
    ),
    "offset-d7-n14": dict(
        n_list=[14],
        depth=7,
        gamma_list=[0.3],
        samples=10_000,
        seed=7,
        sampler=["clean", "uniform", "noisy"],
        output_dir="results/offset-d7-n14",
        fit_slope=False,
    ),
    "spoofer-d7-n12": dict(
        n_list=[12],
        depth=7,
        samples=10_000,
        seed=12,
        sampler=[{"kind": "spoofer", "block_size": 4}, "uniform"],
        output_dir="results/spoofer-d7-n12",
        fit_slope=False,
    ),
}


def preset(name: str) -> ExperimentConfig:
    try:
        return ExperimentConfig.from_dict(PRESETS[name])
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None
