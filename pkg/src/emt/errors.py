"""Exception hierarchy shared by the engine, the rule language and the interpreters."""

from __future__ import annotations


class EMTError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(EMTError):
    """Invalid registry or run configuration (e.g. an alias cycle)."""


class ModelIntegrityError(EMTError):
    """A model violates referential integrity or id uniqueness."""


class ModelFormatError(EMTError):
    """A model file could not be decoded.

    ``path`` points at the offending location inside the document, e.g.
    ``entities[3].types``.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class UnsupportedVocabularyError(EMTError):
    def __init__(self, types):
        self.types = sorted(types)
        super().__init__("unsupported types for this format: " + ", ".join(self.types))


class RuleSyntaxError(EMTError):
    """Lexical or syntactic error in a rule file, with 1-based location."""

    def __init__(self, message: str, line: int, column: int, source: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{column}: {message}")


class RuleValidationError(EMTError):
    """Raised when a rule set with error diagnostics is about to be executed."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(d.message for d in self.diagnostics))


class EvaluationError(EMTError):
    """A value expression or term could not be evaluated."""


class UnboundParameterError(EvaluationError):
    def __init__(self, param: str):
        self.param = param
        super().__init__(f"parameter {param!r} is not bound")


class ValueConflictError(EMTError):
    """Two writes to the same accessor of one object disagree.

    ``first`` and ``second`` identify the writers as ``(rule, binding key)``
    pairs when the engine knows them.
    """

    def __init__(self, object_id, accessor, old, new, first=None, second=None):
        self.object_id = object_id
        self.accessor = accessor
        self.old = old
        self.new = new
        self.first = first
        self.second = second
        msg = f"conflicting write to {accessor} of {object_id}: {old!r} != {new!r}"
        if first and second:
            msg += f" (written by {first[0]} {first[1]}, then {second[0]} {second[1]})"
        super().__init__(msg)


class OverlapError(EMTError):
    """Raised instead of a warning when strict overlap checking is on."""


class TraceNotFoundError(EMTError, KeyError):
    def __init__(self, object_id):
        self.object_id = object_id
        super().__init__(f"no provenance recorded for {object_id!r}")

    def __str__(self):
        return self.args[0]
