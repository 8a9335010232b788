"""Rule-based, metamodel-free enterprise model transformation.

Typical use::

    from emt import load_rule_set, load_archimate, run_transformation, save_bpmn

    rules = load_rule_set("rules.emt")
    model = load_archimate(open("model.xml", "rb").read())
    target, ledger = run_transformation(rules, model)
    open("out.bpmn", "wb").write(save_bpmn(target))
"""

from .adapters import load_archimate, load_bpmn, load_generic, save_bpmn, save_generic
from .engine import OverlapWarning, Transformation, remove_intermediates, run_transformation
from .errors import EMTError
from .estimator import RuleTransformer
from .lang import dependency_graph, load_rule_set, parse_rule_set, validate_rule_set
from .ledger import ExecutionLedger, trace_lookup
from .matching import Binding, BindingSet, check_loop_constraint, combine, evaluate
from .metatypes import MetatypeRegistry, archimate_registry, resolve_metatypes
from .model import Entity, ModelDocument, Relation, entities_of_type
from .values import get_value, set_value

__version__ = "0.1.0"
