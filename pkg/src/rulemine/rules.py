"""Business-rule value types, canonical text rendering, and JSON output.

Seven rule forms across four source patterns. Each form populates a fixed
subset of the fields on BusinessRule; `check_fields` enforces the table and
`render_text` turns a valid rule into its one canonical English sentence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .errors import InvalidFieldsError
from .graph import Notation


class RuleForm(Enum):
    DERIVATION_1_1 = "1.1"
    ACTION_ASSERTION_1_2 = "1.2"
    CONNECTOR_ACTION_2_1 = "2.1"
    DATA_CORRELATION_2_2 = "2.2"
    STATE_ORDER_3_1 = "3.1"
    STATE_PROHIBITION_3_2 = "3.2"
    AUTHORIZATION_4_1 = "4.1"

    @property
    def pattern(self) -> int:
        return int(self.value.split(".")[0])


class Category(Enum):
    STRUCTURAL = "Structural"
    ACTION = "Action"
    DERIVATION = "Derivation"


class Conjunction(Enum):
    AND = "AND"
    OR = "OR"


_CATEGORY_OF = {
    RuleForm.DERIVATION_1_1: Category.DERIVATION,
    RuleForm.ACTION_ASSERTION_1_2: Category.ACTION,
    RuleForm.CONNECTOR_ACTION_2_1: Category.ACTION,
    RuleForm.DATA_CORRELATION_2_2: Category.STRUCTURAL,
    RuleForm.STATE_ORDER_3_1: Category.STRUCTURAL,
    RuleForm.STATE_PROHIBITION_3_2: Category.STRUCTURAL,
    RuleForm.AUTHORIZATION_4_1: Category.ACTION,
}


def categorize(form: RuleForm) -> Category:
    """Map a rule form to its rule-taxonomy category."""
    return _CATEGORY_OF[form]


@dataclass(frozen=True)
class BusinessRule:
    """One extracted rule. Which fields are set depends on `form`;
    everything else stays at its empty default."""

    form: RuleForm
    provenance: tuple[str, ...]
    on_event: str | None = None
    condition: str | None = None
    produced_data: str | None = None
    actions: tuple[str, ...] = ()
    conjunction: Conjunction | None = None
    antecedent_object: str | None = None
    antecedent_state: str | None = None
    consequent_object: str | None = None
    consequent_state: str | None = None
    subject: str | None = None
    constraint: str | None = None

    @property
    def category(self) -> Category:
        return categorize(self.form)

    @property
    def source_pattern(self) -> int:
        return self.form.pattern


# Field-population table: per form, which optional fields must be set and
# which may be. `actions`/`conjunction` have their own arity rules below.
_REQUIRED: dict[RuleForm, tuple[str, ...]] = {
    RuleForm.DERIVATION_1_1: ("condition", "produced_data"),
    RuleForm.ACTION_ASSERTION_1_2: ("condition",),
    RuleForm.CONNECTOR_ACTION_2_1: ("condition",),
    RuleForm.DATA_CORRELATION_2_2: ("antecedent_object", "antecedent_state",
                                    "consequent_object"),
    RuleForm.STATE_ORDER_3_1: ("antecedent_object", "antecedent_state",
                               "consequent_state"),
    RuleForm.STATE_PROHIBITION_3_2: ("antecedent_object", "antecedent_state",
                                     "consequent_state"),
    RuleForm.AUTHORIZATION_4_1: ("subject", "constraint"),
}

_OPTIONAL: dict[RuleForm, tuple[str, ...]] = {
    RuleForm.DERIVATION_1_1: (),
    RuleForm.ACTION_ASSERTION_1_2: ("on_event",),
    RuleForm.CONNECTOR_ACTION_2_1: ("on_event",),
    RuleForm.DATA_CORRELATION_2_2: ("consequent_state",),
    RuleForm.STATE_ORDER_3_1: (),
    RuleForm.STATE_PROHIBITION_3_2: (),
    RuleForm.AUTHORIZATION_4_1: (),
}

_STRING_FIELDS = ("on_event", "condition", "produced_data", "antecedent_object",
                  "antecedent_state", "consequent_object", "consequent_state",
                  "subject", "constraint")


def check_fields(rule: BusinessRule) -> None:
    """Raise InvalidFieldsError unless exactly the right fields are populated."""
    form = rule.form
    allowed = set(_REQUIRED[form]) | set(_OPTIONAL[form])
    problems: list[str] = []
    if not rule.provenance:
        problems.append("provenance must be non-empty")
    for name in _REQUIRED[form]:
        if getattr(rule, name) is None:
            problems.append(f"{name} is required for form {form.value}")
    for name in _STRING_FIELDS:
        value = getattr(rule, name)
        if value is None:
            continue
        if name not in allowed:
            problems.append(f"{name} must not be set for form {form.value}")
        elif value == "":
            problems.append(f"{name} must be non-empty when set")

    if form is RuleForm.ACTION_ASSERTION_1_2:
        if len(rule.actions) != 1:
            problems.append("form 1.2 takes exactly one action")
    elif form is RuleForm.CONNECTOR_ACTION_2_1:
        if not rule.actions:
            problems.append("form 2.1 takes at least one action")
        if rule.conjunction is None:
            problems.append("form 2.1 requires a conjunction")
    else:
        if rule.actions:
            problems.append(f"actions must not be set for form {form.value}")
        if rule.conjunction is not None:
            problems.append(f"conjunction must not be set for form {form.value}")
    if any(a == "" for a in rule.actions):
        problems.append("actions must be non-empty strings")

    if problems:
        raise InvalidFieldsError(
            f"rule of form {form.value} has invalid fields: " + "; ".join(problems))


def render_text(rule: BusinessRule) -> str:
    """Canonical sentence for a rule. Angle brackets are literal; field
    values substitute verbatim."""
    check_fields(rule)
    form = rule.form
    if form is RuleForm.DERIVATION_1_1:
        return f"If <{rule.condition}> Then <{rule.produced_data} is produced>"
    if form is RuleForm.ACTION_ASSERTION_1_2:
        prefix = f"On <{rule.on_event}> " if rule.on_event else ""
        return f"{prefix}If <{rule.condition}> Then Do <{rule.actions[0]}>"
    if form is RuleForm.CONNECTOR_ACTION_2_1:
        prefix = ""
        if rule.on_event and rule.on_event != rule.condition:
            prefix = f"On <{rule.on_event}> "
        joiner = f" {rule.conjunction.value} "
        actions = joiner.join(f"<{a}>" for a in rule.actions)
        return f"{prefix}If <{rule.condition}> Then {actions}"
    if form is RuleForm.DATA_CORRELATION_2_2:
        consequent = rule.consequent_object
        if rule.consequent_state is not None:
            consequent = f"{consequent} is in {rule.consequent_state} status"
        return (f"If <{rule.antecedent_object} is in {rule.antecedent_state} status> "
                f"then <{consequent}>")
    if form is RuleForm.STATE_ORDER_3_1:
        return (f"If <{rule.antecedent_object} is in status {rule.antecedent_state}> "
                f"then <it must have already passed status {rule.consequent_state}>")
    if form is RuleForm.STATE_PROHIBITION_3_2:
        return (f"<{rule.antecedent_object}> cannot obtain status "
                f"<{rule.consequent_state}> from status <{rule.antecedent_state}>")
    if form is RuleForm.AUTHORIZATION_4_1:
        return f"<{rule.subject}> must <{rule.constraint}>"
    raise InvalidFieldsError(f"unknown rule form {form!r}")


def _sort_key(rule: BusinessRule) -> tuple:
    return (rule.source_pattern, rule.form.value, rule.provenance, render_text(rule))


@dataclass
class RuleSet:
    """Deterministically ordered rules for one model, plus any notes the
    detectors recorded along the way."""

    rules: list[BusinessRule]
    model_name: str
    notation: Notation
    skip_notes: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @classmethod
    def build(cls, rules: list[BusinessRule], model_name: str, notation: Notation,
              skip_notes: list[str] | None = None,
              notes: list[str] | None = None) -> RuleSet:
        """Deduplicate (identical rules collapse) and sort into canonical order."""
        unique = list(dict.fromkeys(rules))
        unique.sort(key=_sort_key)
        return cls(unique, model_name, notation,
                   list(skip_notes or ()), list(notes or ()))


def _rule_to_dict(rule: BusinessRule) -> dict:
    out: dict = {
        "form": rule.form.value,
        "category": rule.category.value,
        "source_pattern": rule.source_pattern,
        "rendered": render_text(rule),
        "provenance": list(rule.provenance),
    }
    for name in _STRING_FIELDS:
        value = getattr(rule, name)
        if value is not None:
            out[name] = value
    if rule.actions:
        out["actions"] = list(rule.actions)
    if rule.conjunction is not None:
        out["conjunction"] = rule.conjunction.value
    return out


def to_json(ruleset: RuleSet) -> bytes:
    """Serialize a RuleSet deterministically: sorted keys, UTF-8, newline."""
    doc: dict = {
        "version": "1",
        "model": ruleset.model_name,
        "notation": ruleset.notation.value,
        "rules": [_rule_to_dict(rule) for rule in ruleset.rules],
    }
    if ruleset.skip_notes:
        doc["skip_notes"] = list(ruleset.skip_notes)
    if ruleset.notes:
        doc["notes"] = list(ruleset.notes)
    text = json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


_FORMS = {f.value: f for f in RuleForm}
_CONJUNCTIONS = {c.value: c for c in Conjunction}


def rules_from_json(document: bytes) -> RuleSet:
    """Rebuild a RuleSet from to_json output. Used for round-trip checks."""
    doc = json.loads(document.decode("utf-8"))
    rules = []
    for item in doc["rules"]:
        kwargs = {name: item[name] for name in _STRING_FIELDS if name in item}
        rules.append(BusinessRule(
            form=_FORMS[item["form"]],
            provenance=tuple(item["provenance"]),
            actions=tuple(item.get("actions", ())),
            conjunction=_CONJUNCTIONS[item["conjunction"]]
            if "conjunction" in item else None,
            **kwargs,
        ))
    notation = {n.value: n for n in Notation}[doc["notation"]]
    return RuleSet(rules, doc["model"], notation,
                   doc.get("skip_notes", []), doc.get("notes", []))
