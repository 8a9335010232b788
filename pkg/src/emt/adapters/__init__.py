"""Content interpreters: translate external model formats to and from :class:`ModelDocument`.

Each interpreter is registered under a format id.  Formats without a writer
(``archimate``) or reader raise :class:`ConfigurationError` when used in that
direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..errors import ConfigurationError
from .archimate import UnknownTypeWarning, load_archimate
from .bpmn import load_bpmn, save_bpmn
from .generic import load_generic, save_generic


@dataclass(frozen=True)
class ContentInterpreter:
    format: str
    read: Callable | None = None
    write: Callable | None = None

    @property
    def capabilities(self) -> set[str]:
        return {c for c, f in (("read", self.read), ("write", self.write)) if f is not None}


INTERPRETERS = {
    "generic": ContentInterpreter("generic", lambda data, registry=None: load_generic(data), save_generic),
    "archimate": ContentInterpreter("archimate", load_archimate, None),
    "bpmn": ContentInterpreter("bpmn", lambda data, registry=None: load_bpmn(data), save_bpmn),
}


def get_interpreter(fmt: str, capability: str) -> ContentInterpreter:
    try:
        interp = INTERPRETERS[fmt]
    except KeyError:
        raise ConfigurationError(f"unknown format {fmt!r} (known: {', '.join(sorted(INTERPRETERS))})") from None
    if capability not in interp.capabilities:
        raise ConfigurationError(f"format {fmt!r} cannot {capability}")
    return interp


def guess_format(path) -> str:
    name = str(path).lower()
    if name.endswith((".bpmn", ".bpmn.xml")):
        return "bpmn"
    if name.endswith(".xml"):
        return "archimate"
    return "generic"


__all__ = [
    "ContentInterpreter", "INTERPRETERS", "UnknownTypeWarning", "get_interpreter", "guess_format",
    "load_archimate", "load_bpmn", "load_generic", "save_bpmn", "save_generic",
]
