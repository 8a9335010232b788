"""Bundled example models, rule sets and registries."""

from importlib.resources import files


def path(name: str):
    """Filesystem path of a bundled file, e.g. ``path("archimate_to_bpmn.emt")``."""
    return files(__name__) / name


def read_text(name: str) -> str:
    return path(name).read_text(encoding="utf-8")
