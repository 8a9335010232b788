"""Tokenizer and recursive-descent parser for ``.emt`` rule files.

Grammar (``//`` starts a line comment)::

    RuleSet     := Rule*
    Rule        := "rule(" Name ":" SourceTerm "->" TargetTerm ")"
    SourceTerm  := Element | Relationship | Group
    Element     := "element(" Param ":" TypeExpr ")" Cond*
    Relationship:= "relation(" Param ":" TypeExpr "," Element "->" Element ")" Cond*
    Group       := "group(" ("AND"|"OR"|"XOR") ":" SourceTerm ("," SourceTerm)+ ")"
    Cond        := "[" Accessor (Op Literal)? "]" | "{" "count" CountOp Int "}"
    TargetTerm  := TElement | TRelation | TGroup | Enrich
    TElement    := "element(" Param ":" (TypeName | "*" "=" Refs) ")" Assigns? "intermediate"?
    TRelation   := "relation(" Param ":" TypeName "," EndRef "->" EndRef ")" Assigns? "intermediate"?
    EndRef      := Param | Refs
    Refs        := Ref ("|" Ref)*
    Ref         := "ref(" RuleName (":" Param)? ("," Arg)* ")"
    Arg         := Param | Param "=" Param
    TGroup      := "group(" (TargetTerm ("," TargetTerm)*)? ")"
    Enrich      := "enrich(" Refs ")" Assigns
    Assigns     := "{" Assign ("," Assign)* "}"
    Assign      := ("name" | "namespace" | "tag" | "attribute(" String ")") "=" Value
    Value       := Operand ("+" Operand)*
    Operand     := String | Param "." Accessor | Refs "." Accessor

Type names are identifiers or double-quoted strings.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from ..errors import RuleSyntaxError
from .ast import (
    Accessor, Argument, Assignment, EndRef, Enrichment, Literal, LoopConstraint, ParamAccess,
    RefAccess, Reference, Rule, RuleSet, SearchCondition, SourceElement, SourceGroup,
    SourceRelationship, TargetElement, TargetGroup, TargetRelation, ValueExpression,
)

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|>=|<=|!=|≥|≤|[():,\[\]{}=<>+.|*])
""", re.VERBOSE)

_UNICODE_OPS = {"≥": ">=", "≤": "<="}
_ESCAPE_RE = re.compile(r"\\(.)")

READ_ACCESSORS = ("name", "id", "namespace", "type", "attribute", "tag")
WRITE_ACCESSORS = ("name", "namespace", "attribute", "tag")


@dataclass(frozen=True)
class Token:
    kind: str  # string, int, ident, op, eof
    value: str
    line: int
    column: int


def tokenize(text: str, source: str | None = None) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise RuleSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, source)
        kind = m.lastgroup
        value = m.group()
        if kind != "ws":
            if kind == "string":
                value = _ESCAPE_RE.sub(r"\1", value[1:-1])
            elif kind == "op":
                value = _UNICODE_OPS.get(value, value)
            tokens.append(Token(kind, value, line, pos - line_start + 1))
        newlines = m.group().count("\n")
        if newlines:
            line += newlines
            line_start = pos + m.group().rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, source: str | None):
        self.source = source
        self.tokens = tokenize(text, source)
        self.i = 0

    # -- token plumbing

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset=1) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return RuleSyntaxError(message, tok.line, tok.column, self.source)

    def describe(self, tok):
        return "end of input" if tok.kind == "eof" else repr(tok.value)

    def at(self, *values) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.value in values

    def accept(self, value) -> bool:
        if self.at(value):
            self.i += 1
            return True
        return False

    def expect(self, value) -> Token:
        if not self.at(value):
            raise self.error(f"expected {value!r}, found {self.describe(self.tok)}")
        tok = self.tok
        self.i += 1
        return tok

    def keyword_call(self, word):
        """``word(`` with nothing in between."""
        self.expect(word)
        self.expect("(")

    def ident(self, what="identifier") -> str:
        if self.tok.kind != "ident":
            raise self.error(f"expected {what}, found {self.describe(self.tok)}")
        value = self.tok.value
        self.i += 1
        return value

    def string(self) -> str:
        if self.tok.kind != "string":
            raise self.error(f"expected string literal, found {self.describe(self.tok)}")
        value = self.tok.value
        self.i += 1
        return value

    def type_name(self) -> str:
        if self.tok.kind == "string":
            return self.string()
        return self.ident("type name")

    # -- rules

    def rule_set(self, name) -> RuleSet:
        rules = []
        seen = {}
        while self.tok.kind != "eof":
            start = self.tok
            rule = self.rule()
            if rule.name in seen:
                raise self.error(f"duplicate rule name {rule.name!r} (first defined on line {seen[rule.name]})", start)
            seen[rule.name] = start.line
            rules.append(rule)
        return RuleSet(tuple(rules), name)

    def rule(self) -> Rule:
        line = self.tok.line
        self.keyword_call("rule")
        name = self.ident("rule name")
        self.expect(":")
        source = self.source_term()
        self.expect("->")
        target = self.target_term()
        self.expect(")")
        return Rule(name, source, target, line)

    # -- source terms

    def source_term(self):
        if self.at("element"):
            return self.source_element()
        if self.at("relation"):
            return self.source_relationship()
        if self.at("group"):
            return self.source_group()
        raise self.error(f"expected element, relation or group, found {self.describe(self.tok)}")

    def type_expr(self) -> str:
        if self.accept("*"):
            return "*"
        return self.type_name()

    def conditions(self):
        conds, constraints = [], []
        while True:
            if self.at("["):
                conds.append(self.search_condition())
            elif self.at("{") and self.peek().value == "count":
                constraints.append(self.loop_constraint())
            else:
                return tuple(conds), tuple(constraints)

    def search_condition(self) -> SearchCondition:
        self.expect("[")
        accessor = self.read_accessor()
        op = value = None
        if self.at("=", "!=", "contains", "matches"):
            op = self.tok.value
            self.i += 1
            value = self.string()
        elif accessor.kind not in ("attribute", "tag"):
            raise self.error(f"expected comparison operator, found {self.describe(self.tok)}")
        self.expect("]")
        return SearchCondition(accessor, op, value)

    def loop_constraint(self) -> LoopConstraint:
        self.expect("{")
        self.expect("count")
        if not self.at(">=", ">", "=", "<", "<="):
            raise self.error(f"expected count operator, found {self.describe(self.tok)}")
        op = self.tok.value
        self.i += 1
        if self.tok.kind != "int":
            raise self.error(f"expected integer, found {self.describe(self.tok)}")
        count = int(self.tok.value)
        self.i += 1
        self.expect("}")
        return LoopConstraint(op, count)

    def source_element(self) -> SourceElement:
        self.keyword_call("element")
        param = self.ident("parameter name")
        self.expect(":")
        type_ = self.type_expr()
        self.expect(")")
        conds, constraints = self.conditions()
        return SourceElement(param, type_, conds, constraints)

    def source_relationship(self) -> SourceRelationship:
        self.keyword_call("relation")
        param = self.ident("parameter name")
        self.expect(":")
        type_ = self.type_expr()
        self.expect(",")
        src = self.source_element()
        self.expect("->")
        tgt = self.source_element()
        self.expect(")")
        conds, constraints = self.conditions()
        return SourceRelationship(param, type_, src, tgt, conds, constraints)

    def source_group(self) -> SourceGroup:
        start = self.tok
        self.keyword_call("group")
        if not self.at("AND", "OR", "XOR"):
            raise self.error(f"expected AND, OR or XOR, found {self.describe(self.tok)}")
        op = self.tok.value
        self.i += 1
        self.expect(":")
        children = [self.source_term()]
        while self.accept(","):
            children.append(self.source_term())
        self.expect(")")
        if len(children) < 2:
            raise self.error("a source group needs at least two terms", start)
        return SourceGroup(op, tuple(children))

    # -- accessors and values

    def read_accessor(self) -> Accessor:
        tok = self.tok
        kind = self.ident("accessor")
        if kind not in READ_ACCESSORS:
            raise self.error(f"unknown accessor {kind!r}", tok)
        if kind in ("attribute", "tag"):
            self.expect("(")
            key = self.string()
            self.expect(")")
            return Accessor(kind, key)
        return Accessor(kind)

    def write_accessor(self) -> Accessor:
        tok = self.tok
        kind = self.ident("accessor")
        if kind not in WRITE_ACCESSORS:
            raise self.error(f"cannot assign to {kind!r}", tok)
        if kind == "attribute":
            self.expect("(")
            key = self.string()
            self.expect(")")
            return Accessor(kind, key)
        return Accessor(kind)

    def reference(self) -> Reference:
        self.keyword_call("ref")
        rule = self.ident("rule name")
        output = None
        if self.accept(":"):
            output = self.ident("output parameter")
        args = []
        while self.accept(","):
            name = self.ident("argument")
            if self.accept("="):
                args.append(Argument(self.ident("argument"), keyword=name))
            else:
                args.append(Argument(name))
        self.expect(")")
        return Reference(rule, tuple(args), output)

    def references(self) -> tuple[Reference, ...]:
        refs = [self.reference()]
        while self.accept("|"):
            refs.append(self.reference())
        return tuple(refs)

    def operand(self):
        if self.tok.kind == "string":
            return Literal(self.string())
        if self.at("ref") and self.peek().value == "(":
            refs = self.references()
            self.expect(".")
            return RefAccess(refs, self.read_accessor())
        param = self.ident("parameter or string")
        self.expect(".")
        return ParamAccess(param, self.read_accessor())

    def value_expression(self) -> ValueExpression:
        parts = [self.operand()]
        while self.accept("+"):
            parts.append(self.operand())
        return ValueExpression(tuple(parts))

    def assignments(self):
        if not self.at("{"):
            return ()
        self.expect("{")
        out = []
        while True:
            accessor = self.write_accessor()
            self.expect("=")
            out.append(Assignment(accessor, self.value_expression()))
            if not self.accept(","):
                break
        self.expect("}")
        return tuple(out)

    # -- target terms

    def target_term(self):
        if self.at("element"):
            return self.target_element()
        if self.at("relation"):
            return self.target_relation()
        if self.at("group"):
            return self.target_group()
        if self.at("enrich"):
            return self.enrichment()
        raise self.error(f"expected element, relation, group or enrich, found {self.describe(self.tok)}")

    def target_element(self) -> TargetElement:
        self.keyword_call("element")
        param = self.ident("parameter name")
        self.expect(":")
        refs = ()
        if self.accept("*"):
            type_ = None
            self.expect("=")
            refs = self.references()
        else:
            type_ = self.type_name()
        self.expect(")")
        assigns = self.assignments()
        intermediate = self.accept("intermediate")
        return TargetElement(param, type_, assigns, intermediate, refs)

    def end_ref(self) -> EndRef:
        if self.at("ref") and self.peek().value == "(":
            return EndRef(refs=self.references())
        return EndRef(param=self.ident("parameter or ref"))

    def target_relation(self) -> TargetRelation:
        self.keyword_call("relation")
        param = self.ident("parameter name")
        self.expect(":")
        type_ = self.type_name()
        self.expect(",")
        src = self.end_ref()
        self.expect("->")
        tgt = self.end_ref()
        self.expect(")")
        assigns = self.assignments()
        intermediate = self.accept("intermediate")
        return TargetRelation(param, type_, src, tgt, assigns, intermediate)

    def target_group(self) -> TargetGroup:
        self.keyword_call("group")
        children = []
        if not self.at(")"):
            children.append(self.target_term())
            while self.accept(","):
                children.append(self.target_term())
        self.expect(")")
        return TargetGroup(tuple(children))

    def enrichment(self) -> Enrichment:
        self.keyword_call("enrich")
        refs = self.references()
        self.expect(")")
        start = self.tok
        assigns = self.assignments()
        if not assigns:
            raise self.error("enrich(...) needs an assignment block", start)
        return Enrichment(refs, assigns)


def parse_rule_set(text: str, name: str = "", source: str | None = None) -> RuleSet:
    """Parse rule text into a :class:`RuleSet`.

    Raises :class:`RuleSyntaxError` (with line and column) on lexical or
    syntax errors and on duplicate rule names.
    """
    return _Parser(text, source).rule_set(name)


def parse_value_expression(text: str) -> ValueExpression:
    p = _Parser(text, None)
    expr = p.value_expression()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.describe(p.tok)}")
    return expr


def load_rule_set(path) -> RuleSet:
    path = Path(path)
    return parse_rule_set(path.read_text(encoding="utf-8"), name=path.stem, source=str(path))
