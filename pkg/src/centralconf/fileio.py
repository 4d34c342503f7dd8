"""
Problem, solution, spectrum and cochain files.

All files are JSON objects tagged with a ``kind`` field. Keys are emitted in a
fixed order and floats use Python's shortest round-trip representation, so
``parse(emit(x)) == x`` and identical inputs give byte-identical files.
"""

import json
import re
from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import __version__

__all__ = [
    "FileFormatError",
    "ProblemFile",
    "SolutionFile",
    "SpectrumFile",
    "CochainFile",
    "emit",
    "parse",
    "read",
    "write",
]


class FileFormatError(ValueError):
    """Malformed input file. ``field`` names the offending entry, ``line`` its line."""

    def __init__(self, message, field=None, line=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field '{field}'")
        super().__init__(f"{', '.join(loc)}: {message}" if loc else message)
        self.reason = message
        self.field = field
        self.line = line


def _floats(seq):
    return [float(v) for v in seq]


def _matrix(rows):
    return [[float(v) for v in row] for row in rows]


def _require(obj, key, kind):
    if key not in obj:
        raise FileFormatError(f"missing required key in {kind} file", field=key)
    return obj[key]


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


@dataclass
class ProblemFile:
    n: int
    d: int
    alpha: float
    masses: list
    positions: list = None
    rng_seed: int = 0
    settings: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise FileFormatError(f"n must be an integer >= 2, got {self.n!r}", field="n")
        if not isinstance(self.d, int) or self.d < 1:
            raise FileFormatError(f"d must be an integer >= 1, got {self.d!r}", field="d")
        if not _is_number(self.alpha) or not self.alpha > 0:
            raise FileFormatError(f"alpha must be a positive number, got {self.alpha!r}", field="alpha")
        if not isinstance(self.masses, (list, tuple)) or len(self.masses) != self.n:
            raise FileFormatError(f"expected a list of {self.n} masses", field="masses")
        for k, v in enumerate(self.masses):
            if not _is_number(v) or not np.isfinite(v) or v <= 0:
                raise FileFormatError(f"mass must be a positive number, got {v!r}", field=f"masses[{k}]")
        if self.positions is not None:
            if not isinstance(self.positions, (list, tuple)) or len(self.positions) != self.n:
                raise FileFormatError(f"expected {self.n} positions", field="positions")
            for k, row in enumerate(self.positions):
                if not isinstance(row, (list, tuple)) or len(row) != self.d:
                    raise FileFormatError(f"expected a vector of length {self.d}", field=f"positions[{k}]")
                for c, v in enumerate(row):
                    if not _is_number(v) or not np.isfinite(v):
                        raise FileFormatError(f"not a finite number: {v!r}", field=f"positions[{k}][{c}]")
        self.alpha = float(self.alpha)
        self.masses = _floats(self.masses)
        if self.positions is not None:
            self.positions = _matrix(self.positions)

    def to_dict(self):
        out = {"kind": "problem", "n": self.n, "d": self.d, "alpha": self.alpha, "masses": list(self.masses)}
        if self.positions is not None:
            out["positions"] = [list(r) for r in self.positions]
        out["rngSeed"] = self.rng_seed
        out["settings"] = dict(self.settings)
        return out

    @classmethod
    def from_dict(cls, obj):
        return cls(
            n=_require(obj, "n", "problem"),
            d=_require(obj, "d", "problem"),
            alpha=_require(obj, "alpha", "problem"),
            masses=_require(obj, "masses", "problem"),
            positions=obj.get("positions"),
            rng_seed=obj.get("rngSeed", 0),
            settings=dict(obj.get("settings", {})),
        )


@dataclass
class SolutionFile:
    problem: ProblemFile
    configuration: list
    lam: float
    residual_norm: float
    morse_index: int
    spectrum: list
    classification: list
    method: str
    iterations: int
    label: str = ""
    mass_scale: float = 1.0
    tool_version: str = __version__
    timing: float = None

    def __post_init__(self):
        self.classification = sorted(self.classification)

    def to_dict(self):
        out = {
            "kind": "solution",
            "problem": self.problem.to_dict(),
            "label": self.label,
            "method": self.method,
            "iterations": self.iterations,
            "massScale": float(self.mass_scale),
            "configuration": _matrix(self.configuration),
            "lambda": float(self.lam),
            "residualNorm": float(self.residual_norm),
            "morseIndex": self.morse_index,
            "spectrum": _floats(self.spectrum),
            "classification": sorted(self.classification),
            "toolVersion": self.tool_version,
        }
        if self.timing is not None:
            out["timing"] = float(self.timing)
        return out

    @classmethod
    def from_dict(cls, obj):
        return cls(
            problem=ProblemFile.from_dict(_require(obj, "problem", "solution")),
            configuration=_matrix(_require(obj, "configuration", "solution")),
            lam=float(_require(obj, "lambda", "solution")),
            residual_norm=float(_require(obj, "residualNorm", "solution")),
            morse_index=obj.get("morseIndex"),
            spectrum=_floats(obj.get("spectrum", [])),
            classification=sorted(obj.get("classification", [])),
            method=obj.get("method", ""),
            iterations=int(obj.get("iterations", 0)),
            label=obj.get("label", ""),
            mass_scale=float(obj.get("massScale", 1.0)),
            tool_version=obj.get("toolVersion", __version__),
            timing=obj.get("timing"),
        )


@dataclass
class SpectrumFile:
    """Spectra of the three Hessians at one configuration, plus check outcomes."""

    source: str
    sections: dict
    checks: list

    def to_dict(self):
        return {
            "kind": "spectrum",
            "source": self.source,
            "sections": {
                k: {
                    "eigenvalues": _floats(v["eigenvalues"]),
                    "morseIndex": int(v["morseIndex"]),
                    "nullity": int(v["nullity"]),
                    "zeroThreshold": float(v["zeroThreshold"]),
                }
                for k, v in self.sections.items()
            },
            "checks": [dict(c) for c in self.checks],
        }

    @classmethod
    def from_dict(cls, obj):
        return cls(
            source=obj.get("source", ""),
            sections={k: dict(v) for k, v in _require(obj, "sections", "spectrum").items()},
            checks=[dict(c) for c in obj.get("checks", [])],
        )


@dataclass
class CochainFile:
    n: int
    d: int
    masses: list
    entries: list

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise FileFormatError("n must be an integer >= 2", field="n")
        if len(self.masses) != self.n:
            raise FileFormatError(f"expected {self.n} masses", field="masses")
        for k, v in enumerate(self.masses):
            if not _is_number(v) or v <= 0:
                raise FileFormatError(f"mass must be positive, got {v!r}", field=f"masses[{k}]")
        if len(self.entries) != comb(self.n, 2):
            raise FileFormatError(f"expected {comb(self.n, 2)} pair entries", field="entries")
        for k, row in enumerate(self.entries):
            if len(row) != self.d:
                raise FileFormatError(f"expected a vector of length {self.d}", field=f"entries[{k}]")
        self.masses = _floats(self.masses)
        self.entries = _matrix(self.entries)

    def to_dict(self):
        return {"kind": "cochain", "n": self.n, "d": self.d, "masses": list(self.masses), "entries": self.entries}

    @classmethod
    def from_dict(cls, obj):
        return cls(
            n=_require(obj, "n", "cochain"),
            d=_require(obj, "d", "cochain"),
            masses=_require(obj, "masses", "cochain"),
            entries=_require(obj, "entries", "cochain"),
        )


_KINDS = {"problem": ProblemFile, "solution": SolutionFile, "spectrum": SpectrumFile, "cochain": CochainFile}


def emit(obj):
    return json.dumps(obj.to_dict(), indent=2, allow_nan=False) + "\n"


def _line_of(text, key):
    mt = re.search(r'"' + re.escape(key.split("[")[0]) + r'"\s*:', text)
    return text.count("\n", 0, mt.start()) + 1 if mt else None


def parse(text):
    """Parse any file kind; errors carry the line of the offending field when known."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(exc.msg, line=exc.lineno) from None
    if not isinstance(obj, dict):
        raise FileFormatError("top level must be an object")
    kind = obj.get("kind", "problem")
    if kind not in _KINDS:
        raise FileFormatError(f"unknown kind {kind!r}", field="kind", line=_line_of(text, "kind"))
    try:
        return _KINDS[kind].from_dict(obj)
    except FileFormatError as exc:
        if exc.line is None and exc.field is not None:
            raise FileFormatError(exc.reason, field=exc.field, line=_line_of(text, exc.field)) from None
        raise
    except (TypeError, ValueError) as exc:
        raise FileFormatError(str(exc)) from None


def read(path):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def write(obj, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(emit(obj))
