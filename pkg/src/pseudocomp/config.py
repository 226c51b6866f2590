"""Experiment configuration, serialized as the ``key=value`` text the CLI reads."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


@dataclass
class ExperimentConfig:
    matrix: str = "ginibre:30:0"
    ell: int = 4
    eps: list[float] = field(default_factory=lambda: [1e-2])
    samples: int = 50
    seed: int = 0
    resolution: int = 64
    ktheta: int = 512
    flags: str = ""
    out_dir: str = "results"

    def to_text(self, command: str | None = None) -> str:
        lines = [f"command={command}"] if command else []
        for key, val in asdict(self).items():
            if isinstance(val, list):
                val = ",".join(repr(float(v)) for v in val)
            lines.append(f"{key}={val}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        """Parse ``key=value`` lines; ``#`` prefixes and unknown keys are ignored."""
        types = {f.name: f.type for f in fields(cls)}
        kw = {}
        for line in text.splitlines():
            line = line.strip().lstrip("#").strip()
            if "=" not in line:
                continue
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in types:
                continue
            if key == "eps":
                kw[key] = [float(v) for v in val.split(",") if v.strip()]
            elif types[key] == "int":
                kw[key] = int(val)
            else:
                kw[key] = val
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text())

    def output(self, name: str) -> Path:
        p = Path(self.out_dir)
        p.mkdir(parents=True, exist_ok=True)
        return p / name
