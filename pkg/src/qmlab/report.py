"""Uniform result record for every inequality check."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-8


@dataclass
class BoundReport:
    """Outcome of checking ``lhs <= rhs`` for one instance.

    ``slack = rhs - lhs``. The check passes when ``slack >= -tol * scale``, so
    ``tol`` is dimensionless and ``scale`` carries the units of the instance.
    """

    proposition: str
    lhs: float
    rhs: float
    scale: float = 1.0
    tol: float = DEFAULT_TOL
    seed: int | None = None
    digest: str = ""
    vacuous: bool = False
    notes: str = ""
    extras: dict = field(default_factory=dict)
    extra_checks: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return float(self.rhs - self.lhs)

    @property
    def normalized_slack(self) -> float:
        return self.slack / self.scale if self.scale > 0 else self.slack

    @property
    def passed(self) -> bool:
        if self.vacuous:
            return all(self.extra_checks.values())
        return bool(self.slack >= -self.tol * self.scale) and all(self.extra_checks.values())

    def to_record(self) -> dict:
        return {
            "proposition": self.proposition,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "slack": self.slack,
            "scale": float(self.scale),
            "normalized_slack": self.normalized_slack,
            "tol": self.tol,
            "passed": self.passed,
            "vacuous": self.vacuous,
            "seed": self.seed,
            "digest": self.digest,
            "notes": self.notes,
            "extras": {k: _plain(v) for k, v in sorted(self.extras.items())},
            "extra_checks": {k: bool(v) for k, v in sorted(self.extra_checks.items())},
        }

    @classmethod
    def from_record(cls, rec: dict) -> "BoundReport":
        return cls(
            proposition=rec["proposition"],
            lhs=rec["lhs"],
            rhs=rec["rhs"],
            scale=rec["scale"],
            tol=rec["tol"],
            seed=rec.get("seed"),
            digest=rec.get("digest", ""),
            vacuous=rec.get("vacuous", False),
            notes=rec.get("notes", ""),
            extras=dict(rec.get("extras", {})),
            extra_checks=dict(rec.get("extra_checks", {})),
        )


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


def digest(*arrays) -> str:
    """Short content hash of the arrays defining an instance."""
    h = hashlib.sha256()
    for a in arrays:
        if hasattr(a, "blocks"):
            for b in a.blocks:
                h.update(np.ascontiguousarray(b).tobytes())
        elif hasattr(a, "density"):
            for b in a.density.blocks:
                h.update(np.ascontiguousarray(b).tobytes())
        elif hasattr(a, "kraus"):
            h.update(np.ascontiguousarray(a.kraus).tobytes())
        else:
            h.update(np.ascontiguousarray(np.asarray(a)).tobytes())
    return h.hexdigest()[:16]
