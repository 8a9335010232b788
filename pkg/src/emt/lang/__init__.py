"""The textual rule language: syntax tree, parser, printer and validator."""

from .ast import *  # noqa: F401,F403
from .parser import load_rule_set, parse_rule_set, parse_value_expression, tokenize
from .printer import format_rule, format_rule_set, format_source, format_target
from .validate import (
    Diagnostic, dependency_graph, errors, redundant_rules, reference_cycles, source_signature,
    validate_rule_set,
)
