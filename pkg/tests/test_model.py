import pytest
from hypothesis import given, strategies as st

from conftest import models
from emt.errors import (
    ConfigurationError, ModelIntegrityError, UnboundParameterError, ValueConflictError,
)
from emt.metatypes import MetatypeRegistry, resolve_metatypes
from emt.model import Entity, ModelDocument, Relation, entities_of_type
from emt.values import get_value, set_value


# -- metatypes

def test_business_actor_expands_to_layer_and_aspect(registry):
    assert set(resolve_metatypes({"BusinessActor"}, registry)) == {"BusinessActor", "Business", "Active"}


def test_identity_with_empty_registry():
    assert resolve_metatypes({"X"}, MetatypeRegistry()) == ("X",)
    assert resolve_metatypes(["X"], None) == ("X",)


@pytest.mark.parametrize("alias", ["archimate:BusinessActor", "Business Actor"])
def test_aliases(registry, alias):
    assert set(resolve_metatypes({alias}, registry)) == {"BusinessActor", "Business", "Active"}


def test_explicit_alias_registry():
    reg = MetatypeRegistry({"archimate:BusinessActor": "BusinessActor"},
                           {"BusinessActor": ("Business", "Active")})
    assert resolve_metatypes(["archimate:BusinessActor"], reg) == ("BusinessActor", "Business", "Active")


@pytest.mark.parametrize("declared, expected", [
    ("ApplicationComponent", {"Application", "Active"}),
    ("ApplicationService", {"Application", "Behavior"}),
    ("TechnologyService", {"Technology", "Behavior"}),
    ("DataObject", {"Application", "Passive"}),
    ("AggregationRelationship", {"Relation"}),
    ("CompositionRelationship", {"Relation"}),
])
def test_table2_rows(registry, declared, expected):
    assert set(resolve_metatypes([declared], registry)) == {declared} | expected


def test_alias_cycle_is_named():
    with pytest.raises(ConfigurationError, match="a -> b -> a"):
        MetatypeRegistry({"a": "b", "b": "a"})


def test_alias_resolution_is_idempotent(registry):
    for name in list(registry.aliases)[:200]:
        c = registry.canonical(name)
        assert registry.canonical(c) == c


def test_hierarchy_is_transitive():
    reg = MetatypeRegistry(hierarchy={"A": ("B",), "B": ("C",), "C": ("A",)})
    assert resolve_metatypes(["A"], reg) == ("A", "B", "C")


type_names = st.sampled_from(["A", "B", "C", "D", "E"])
hierarchies = st.dictionaries(type_names, st.lists(type_names, max_size=3).map(tuple), max_size=5)


@given(hierarchies, type_names, type_names, st.sets(type_names, min_size=1))
def test_resolve_is_monotone(hierarchy, key, extra, declared):
    small = MetatypeRegistry(hierarchy=hierarchy)
    bigger = dict(hierarchy)
    bigger[key] = tuple(bigger.get(key, ())) + (extra,)
    before = set(resolve_metatypes(sorted(declared), small))
    after = set(resolve_metatypes(sorted(declared), MetatypeRegistry(hierarchy=bigger)))
    assert declared <= before <= after


def test_registry_dict_round_trip(tmp_path, registry):
    reg = MetatypeRegistry({"x": "X"}, {"X": ("Y",)})
    assert MetatypeRegistry.from_dict(reg.to_dict()) == reg
    p = tmp_path / "reg.json"
    p.write_text('{"aliases": {"Actor": "BusinessActor"}}')
    merged = registry.merged(MetatypeRegistry.load(p))
    assert "Active" in resolve_metatypes(["Actor"], merged)


def test_bad_registry_file(tmp_path):
    p = tmp_path / "reg.json"
    p.write_text("[]")
    with pytest.raises(ConfigurationError):
        MetatypeRegistry.load(p)


# -- model

def test_entities_of_type_table2(table2):
    assert [e.name for e in entities_of_type(table2, "BusinessActor")] == ["Customer"]
    assert [e.name for e in entities_of_type(table2, "Application")] == ["Financial App.", "Payment Proc.",
                                                                       "Quoted Price"]
    assert entities_of_type(ModelDocument(), "*") == []
    assert entities_of_type(table2, "Unknown") == []


def test_entities_of_type_matches_scan(table2):
    for t in ["Application", "Active", "Behavior", "Passive", "Business", "Technology"]:
        expected = sorted(e.id for e in table2.entities.values() if t in e.types)
        assert [e.id for e in entities_of_type(table2, t)] == expected


def test_entities_of_type_canonicalizes(table2, registry):
    assert [e.id for e in entities_of_type(table2, "archimate:BusinessActor", registry)] == ["customer"]


@given(models(), st.sampled_from(["P", "Q", "X", "Shared", "none"]))
def test_typed_subset_of_wildcard(model, t):
    typed = {e.id for e in entities_of_type(model, t)}
    assert typed <= {e.id for e in entities_of_type(model, "*")}


def test_entity_invariants():
    with pytest.raises(ModelIntegrityError):
        Entity("a", "A", ())
    e = Entity("a", "A", ("X", "Y", "X"))
    assert e.types == ("X", "Y") and e.type == "X"


def test_document_invariants():
    doc = ModelDocument([Entity("a", "", ("X",))])
    with pytest.raises(ModelIntegrityError, match="duplicate"):
        doc.add(Relation("a", "", ("R",), source="a", target="a"))
    doc.add(Relation("r", "", ("R",), source="a", target="missing"))
    with pytest.raises(ModelIntegrityError, match="missing"):
        doc.check_integrity()


# -- values

@pytest.fixture
def customer():
    return Entity("customer", "Customer", ("BusinessActor",), {"owner": "EA"})


def test_get_name(customer):
    assert get_value(customer, "A.name", {"A": customer}) == "Customer"


def test_get_missing_attribute_is_absent(customer):
    assert get_value(customer, 'A.attribute("missing")', {"A": customer}) is None


def test_concatenation(customer):
    assert get_value(None, '"Pool: " + A.name', {"A": customer}) == "Pool: Customer"


def test_unbound_parameter_named(customer):
    with pytest.raises(UnboundParameterError, match="B"):
        get_value(None, "B.name", {"A": customer})


def test_get_value_does_not_mutate(customer):
    before = customer.copy()
    get_value(customer, 'A.name + A.attribute("owner") + A.id', {"A": customer})
    assert customer == before


def test_set_name_on_fresh():
    e = Entity("x", "", ("Task",))
    assert set_value(e, "name", "Customer").name == "Customer"


def test_set_same_attribute_twice(customer):
    from emt.lang.ast import Accessor
    set_value(customer, Accessor("attribute", "owner"), "EA")
    set_value(customer, Accessor("attribute", "owner"), "EA")
    assert customer.attributes == {"owner": "EA"}


def test_conflicting_write():
    e = Entity("x", "", ("Task",))
    set_value(e, "name", "X")
    with pytest.raises(ValueConflictError):
        set_value(e, "name", "Y")


def test_set_value_touches_only_accessor(customer):
    from emt.lang.ast import Accessor
    before = customer.copy()
    set_value(customer, Accessor("attribute", "site"), "HQ")
    assert customer.attributes == {"owner": "EA", "site": "HQ"}
    assert (customer.name, customer.types, customer.tags) == (before.name, before.types, before.tags)


def test_tags_accumulate():
    e = Entity("x", "", ("Task",))
    set_value(e, "tag", "a")
    set_value(e, "tag", "b")
    set_value(e, "tag", "a")
    assert e.tags == ("a", "b")
    assert get_value(e, 'A.tag("a")', {"A": e}) == "true"
