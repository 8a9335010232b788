import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from emt import data
from emt.adapters.archimate import load_archimate
from emt.adapters.generic import load_generic
from emt.lang import load_rule_set
from emt.metatypes import MetatypeRegistry, archimate_registry
from emt.model import Entity, ModelDocument, Relation

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SCENARIO_RULES = data.path("archimate_to_bpmn.emt")
SCENARIO_MODEL = data.path("order_handling.xml")
SCENARIO_REGISTRY = data.path("archimate_to_bpmn.registry.json")


@pytest.fixture
def registry():
    return archimate_registry()


@pytest.fixture
def scenario_registry():
    return archimate_registry().merged(MetatypeRegistry.load(SCENARIO_REGISTRY))


@pytest.fixture
def scenario_rules():
    return load_rule_set(SCENARIO_RULES)


@pytest.fixture
def scenario_model(scenario_registry):
    return load_archimate(Path(SCENARIO_MODEL).read_bytes(), scenario_registry)


@pytest.fixture
def table2():
    return load_generic(data.read_text("metatype_sample.json"))


def by_name(model, name):
    hits = [o for o in model if o.name == name]
    assert len(hits) == 1, f"{name!r}: {hits}"
    return hits[0]


# -- random models

ENTITY_TYPES = ["P", "Q", "X"]
RELATION_TYPES = ["Agg", "Flow"]


@st.composite
def models(draw, max_entities=10, max_relations=20):
    n = draw(st.integers(0, max_entities))
    doc = ModelDocument()
    for i in range(n):
        t = draw(st.sampled_from(ENTITY_TYPES))
        extra = draw(st.sampled_from([(), ("Shared",)]))
        doc.add(Entity(f"e{i:02d}", draw(st.sampled_from(["a", "b", "c"])), (t,) + extra))
    if n:
        m = draw(st.integers(0, max_relations))
        for j in range(m):
            s = draw(st.integers(0, n - 1))
            t = draw(st.integers(0, n - 1))
            rt = draw(st.sampled_from(RELATION_TYPES))
            doc.add(Relation(f"r{j:02d}", "", (rt,), source=f"e{s:02d}", target=f"e{t:02d}"))
    return doc
