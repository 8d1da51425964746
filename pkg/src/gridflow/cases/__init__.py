"""Bundled synthetic study cases."""

from importlib.resources import files
from pathlib import Path

from gridflow.grid import GridCase, load_case

BUNDLED = ("case2", "case3ring", "case9", "exp1", "exp2")


def bundled_case_path(name: str) -> Path:
    if name not in BUNDLED:
        raise LookupError(f"unknown bundled case '{name}'; available: {', '.join(BUNDLED)}")
    return Path(str(files(__package__) / f"{name}.json"))


def load_bundled(name: str) -> GridCase:
    return load_case(bundled_case_path(name))


def resolve_case_path(spec: str) -> Path:
    """Resolve a case reference: either 'bundled:<name>' or a filesystem path."""
    if spec.startswith("bundled:"):
        return bundled_case_path(spec.split(":", 1)[1])
    return Path(spec)
