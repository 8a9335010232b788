import pytest
from hypothesis import given, strategies as st

from conftest import ENTITY_TYPES, RELATION_TYPES, models
from emt.errors import EvaluationError
from emt.lang import parse_rule_set
from emt.lang.ast import LoopConstraint, SearchCondition, Accessor, SourceElement, SourceRelationship
from emt.matching import (
    Binding, BindingSet, check_loop_constraint, combine, eval_element, eval_relationship, evaluate,
)
from emt.model import Entity, ModelDocument, Relation
from oracles import and_oracle, as_pairs, or_oracle, table1_oracle, xor_oracle

GE1 = (LoopConstraint(">=", 1),)


def source_term(text):
    return parse_rule_set(f"rule(T: {text} -> group())").rules[0].source


@pytest.fixture
def tree():
    """p1 aggregates p2 and p3 through g1, g2."""
    doc = ModelDocument()
    for i in (1, 2, 3):
        doc.add(Entity(f"p{i}", f"P{i}", ("BusinessProcess",)))
    doc.add(Relation("g1", "", ("Aggregation",), source="p1", target="p2"))
    doc.add(Relation("g2", "", ("Aggregation",), source="p1", target="p3"))
    return doc


# -- elements

def test_element_business_actor(table2):
    assert list(eval_element(SourceElement("A", "BusinessActor"), table2)) == [{"A": "customer"}]


def test_element_on_empty_model():
    assert len(eval_element(SourceElement("A", "X"), ModelDocument())) == 0


def test_element_aggregates_with_constraint(tree):
    result = eval_element(SourceElement("A", "BusinessProcess", constraints=GE1), tree)
    assert list(result) == [{"A": ("p1", "p2", "p3")}]


def test_element_constraint_rejects(tree):
    term = SourceElement("A", "BusinessProcess", constraints=(LoopConstraint(">", 3),))
    assert len(eval_element(term, tree)) == 0


def test_search_conditions(tree):
    assert [b["A"] for b in evaluate(source_term('element(A: BusinessProcess) [name = "P2"]'), tree)] == ["p2"]
    assert [b["A"] for b in evaluate(source_term('element(A: *) [name != "P2"]'), tree)] == ["p1", "p3"]
    assert [b["A"] for b in evaluate(source_term('element(A: *) [name matches "P[13]"]'), tree)] == ["p1", "p3"]
    assert len(evaluate(source_term('element(A: *) [attribute("owner")]'), tree)) == 0


def test_conditions_apply_before_counting(tree):
    term = source_term('element(A: BusinessProcess) [name contains "P"] [name != "P1"] {count = 2}')
    assert list(evaluate(term, tree)) == [{"A": ("p2", "p3")}]


@given(models())
def test_eq1_cardinality_is_match_count(model):
    for t in ENTITY_TYPES + ["*"]:
        expected = sum(1 for e in model.entities.values() if t == "*" or t in e.types)
        assert len(eval_element(SourceElement("A", t), model)) == expected


@given(models(), st.sampled_from([">=", ">", "=", "<", "<="]), st.integers(0, 5))
def test_eq2_cardinality_at_most_one(model, op, n):
    result = eval_element(SourceElement("A", "P", constraints=(LoopConstraint(op, n),)), model)
    assert len(result) in (0, 1)


# -- relationships

def test_pattern_000(tree):
    term = source_term("relation(R: Aggregation, element(S: BusinessProcess) -> element(T: BusinessProcess))")
    assert list(evaluate(term, tree)) == [{"S": "p1", "R": "g1", "T": "p2"}, {"S": "p1", "R": "g2", "T": "p3"}]


def test_pattern_011(tree):
    term = source_term("relation(R: Aggregation, element(S: BusinessProcess) -> "
                       "element(T: BusinessProcess) {count >= 1}) {count >= 1}")
    assert list(evaluate(term, tree)) == [{"S": "p1", "R": ("g1", "g2"), "T": ("p2", "p3")}]


def test_pattern_111(tree):
    term = source_term("relation(R: Aggregation, element(S: BusinessProcess) {count >= 1} -> "
                       "element(T: BusinessProcess) {count >= 1}) {count >= 1}")
    assert list(evaluate(term, tree)) == [{"S": ("p1",), "R": ("g1", "g2"), "T": ("p2", "p3")}]


@pytest.mark.parametrize("pattern", [(1, 0, 0), (0, 0, 1), (1, 0, 1)])
def test_illegal_patterns_refused(tree, pattern):
    s = SourceElement("S", "*", constraints=GE1 if pattern[0] else ())
    t = SourceElement("T", "*", constraints=GE1 if pattern[2] else ())
    with pytest.raises(EvaluationError):
        eval_relationship(SourceRelationship("R", "*", s, t), tree)


def _random_term(pattern, rtype, stype, ttype, ops):
    def cons(flag, i):
        return (LoopConstraint(*ops[i]),) if flag else ()

    return SourceRelationship(
        "R", rtype,
        SourceElement("S", stype, constraints=cons(pattern[0], 0)),
        SourceElement("T", ttype, constraints=cons(pattern[2], 2)),
        constraints=cons(pattern[1], 1),
    )


constraint = st.tuples(st.sampled_from([">=", ">", "=", "<", "<="]), st.integers(0, 3))


@pytest.mark.parametrize("pattern", [(0, 0, 0), (0, 1, 1), (1, 1, 0), (0, 1, 0), (1, 1, 1)])
@given(model=models(), rtype=st.sampled_from(RELATION_TYPES + ["*"]),
       stype=st.sampled_from(ENTITY_TYPES + ["*", "Shared"]), ttype=st.sampled_from(ENTITY_TYPES + ["*"]),
       ops=st.lists(constraint, min_size=3, max_size=3))
def test_relationship_matches_oracle(pattern, model, rtype, stype, ttype, ops):
    term = _random_term(pattern, rtype, stype, ttype, ops)
    assert as_pairs(eval_relationship(term, model)) == table1_oracle(term, model)


def test_name_condition_on_end_matches_oracle(tree):
    cond = (SearchCondition(Accessor("name"), "=", "P1"),)
    term = SourceRelationship("R", "*", SourceElement("S", "*", cond),
                              SourceElement("T", "*", constraints=GE1), constraints=GE1)
    assert as_pairs(eval_relationship(term, tree)) == table1_oracle(term, tree)


# -- combination

def bs(param_names, *rows):
    params = [param_names] if isinstance(param_names, str) else list(param_names)
    rows = [(r,) if isinstance(r, str) else r for r in rows]
    return BindingSet([dict(zip(params, r)) for r in rows], params)


def test_and_shared_param():
    assert combine("AND", bs("A", "a1", "a2"), bs("A", "a2", "a3")) == bs("A", "a2")


def test_and_disjoint_is_product():
    result = combine("AND", bs("A", "a1"), bs("B", "b1", "b2"))
    assert list(result) == [{"A": "a1", "B": "b1"}, {"A": "a1", "B": "b2"}]


def test_xor_identical_is_empty():
    x = bs("A", "a1", "a2")
    assert len(combine("XOR", x, x)) == 0


def test_xor_disjoint_params():
    a, b = bs("A", "a1"), bs("B", "b1")
    assert len(combine("XOR", a, b)) == 0
    assert combine("XOR", a, bs("B")) == a


def test_or_leaves_params_unbound():
    result = combine("OR", bs("A", "a1"), bs("B", "b1"))
    assert list(result) == [{"A": "a1"}, {"B": "b1"}]
    assert result.params == {"A", "B"}


def test_group_folds_left_to_right(table2):
    term = source_term("group(AND: element(A: Behavior), element(A: Application))")
    assert [b["A"] for b in evaluate(term, table2)] == ["payment-proc"]


@st.composite
def binding_sets(draw, pool=("A", "B", "C")):
    params = draw(st.lists(st.sampled_from(pool), min_size=1, max_size=3, unique=True))
    rows = draw(st.lists(st.tuples(*[st.sampled_from(["x", "y", "z"]) for _ in params]), max_size=6))
    return bs(params, *rows)


@given(binding_sets(), binding_sets())
def test_combine_matches_set_oracle(left, right):
    lp, rp = as_pairs(left), as_pairs(right)
    assert as_pairs(combine("AND", left, right)) == and_oracle(lp, rp)
    assert as_pairs(combine("OR", left, right)) == or_oracle(lp, rp)
    assert as_pairs(combine("XOR", left, right)) == xor_oracle(lp, rp, left.params, right.params)


@given(binding_sets())
def test_identities(x):
    assert combine("AND", x, x) == x
    assert combine("OR", x, BindingSet(params=x.params)) == x
    assert len(combine("XOR", x, x)) == 0


@given(binding_sets(), binding_sets(), binding_sets())
def test_and_or_fold_matches_flat_oracle(a, b, c):
    pa, pb, pc = as_pairs(a), as_pairs(b), as_pairs(c)
    flat_and = {x | y | z for x in pa for y in pb for z in pc
                if len({k for k, _ in x | y | z}) == len(x | y | z)}
    assert as_pairs(combine("AND", combine("AND", a, b), c)) == flat_and
    assert as_pairs(combine("OR", combine("OR", a, b), c)) == pa | pb | pc


@given(models())
def test_evaluation_is_pure_and_repeatable(model):
    before = model.sorted()
    term = source_term("group(OR: element(A: P), relation(R: Agg, element(A: *) -> element(B: Q)) {count >= 1})")
    first = list(evaluate(term, model))
    assert list(evaluate(term, model)) == first
    assert model == before


# -- loop constraints

def test_loop_constraint_examples():
    assert check_loop_constraint(1, GE1)
    assert not check_loop_constraint(0, GE1)
    rng = (LoopConstraint(">", 2), LoopConstraint("<=", 5))
    assert check_loop_constraint(4, rng)
    assert not check_loop_constraint(6, rng)


ARITH = {">=": lambda n, c: n >= c, ">": lambda n, c: n > c, "=": lambda n, c: n == c,
         "<": lambda n, c: n < c, "<=": lambda n, c: n <= c}


@pytest.mark.parametrize("n", range(11))
@pytest.mark.parametrize("op", list(ARITH))
def test_operator_arithmetic(op, n):
    assert check_loop_constraint(n, (LoopConstraint(op, 4),)) == ARITH[op](n, 4)


def test_binding_key_is_canonical():
    b = Binding({"C": ["b", "a"], "A": "x"})
    assert b.key == "A=x;C=[a,b]"
    assert Binding({"A": "x", "C": ("b", "a")}) == b
