"""scikit-learn style front end.

:class:`RuleTransformer` wraps a rule set as a transformer: ``fit`` parses and
validates the rules, ``transform`` maps a source model to a target model.
Hyper-parameters follow the estimator conventions (constructor arguments
stored verbatim, ``get_params``/``set_params``/``clone`` work), so a
transformation can sit inside a :class:`sklearn.pipeline.Pipeline` next to
model loaders and writers.
"""

from __future__ import annotations

from pathlib import Path

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .adapters import get_interpreter, guess_format
from .engine import Transformation
from .errors import RuleValidationError
from .lang import RuleSet, errors, load_rule_set, parse_rule_set, validate_rule_set
from .metatypes import MetatypeRegistry, archimate_registry
from .model import ModelDocument


def check_rule_set(rules) -> RuleSet:
    """Accept a :class:`RuleSet`, rule text, or a path to a ``.emt`` file."""
    if isinstance(rules, RuleSet):
        return rules
    if isinstance(rules, Path) or (isinstance(rules, str) and rules.endswith(".emt") and "\n" not in rules):
        return load_rule_set(rules)
    if isinstance(rules, str):
        return parse_rule_set(rules)
    raise TypeError(f"expected RuleSet, rule text or path, got {type(rules).__name__}")


def check_registry(registry) -> MetatypeRegistry | None:
    """``None``, ``"archimate"``, a registry, a mapping or a path to a registry file."""
    if registry is None or isinstance(registry, MetatypeRegistry):
        return registry
    if registry == "archimate":
        return archimate_registry()
    if isinstance(registry, dict):
        return MetatypeRegistry.from_dict(registry)
    if isinstance(registry, (str, Path)):
        return archimate_registry().merged(MetatypeRegistry.load(registry))
    raise TypeError(f"cannot use {type(registry).__name__} as a metatype registry")


def check_model(X, fmt: str | None = None, registry=None) -> ModelDocument:
    """Accept a :class:`ModelDocument`, a generic-format dict, raw bytes or a file path."""
    if isinstance(X, ModelDocument):
        return X
    if isinstance(X, dict):
        from .adapters.generic import from_dict
        return from_dict(X)
    if isinstance(X, (str, Path)) and Path(X).exists():
        fmt = fmt or guess_format(X)
        X = Path(X).read_bytes()
    if isinstance(X, (bytes, str)):
        return get_interpreter(fmt or "generic", "read").read(X, registry=registry)
    raise TypeError(f"cannot read a model from {type(X).__name__}")


class RuleTransformer(TransformerMixin, BaseEstimator):
    """Apply a transformation rule set to source models.

    Parameters
    ----------
    rules : RuleSet, str or path
        Rule text, a parsed rule set or the path of a ``.emt`` file.
    registry : MetatypeRegistry, dict, path or "archimate", optional
        Metatype aliases/hierarchy used when matching types.  A path is merged
        over the default ArchiMate registry.
    source_format : str, optional
        Interpreter used when ``X`` is bytes or a path.
    strict_overlap : bool
        Raise instead of warn when two creations share a type and name.

    Attributes
    ----------
    rule_set_ : RuleSet
    registry_ : MetatypeRegistry or None
    ledger_ : ExecutionLedger
        Traceability ledger of the most recent ``transform`` call.
    """

    def __init__(self, rules=None, registry=None, source_format=None, strict_overlap=False):
        self.rules = rules
        self.registry = registry
        self.source_format = source_format
        self.strict_overlap = strict_overlap

    def fit(self, X=None, y=None):
        if self.rules is None:
            raise ValueError("RuleTransformer needs rules")
        rule_set = check_rule_set(self.rules)
        problems = errors(validate_rule_set(rule_set))
        if problems:
            raise RuleValidationError(problems)
        self.rule_set_ = rule_set
        self.registry_ = check_registry(self.registry)
        return self

    def transform(self, X) -> ModelDocument:
        if not hasattr(self, "rule_set_"):
            raise NotFittedError("call fit before transform")
        model = check_model(X, self.source_format, self.registry_)
        run = Transformation(self.rule_set_, model, self.registry_, self.strict_overlap, validate=False)
        target, self.ledger_ = run.run()
        return target
