"""Attribution cue lexicon: reporting verbs, their inflections, phrasal cues.

The default verb list is embedded below; lexicon.json files with the same
shape ({"base_forms": [...], "inflections": {base: [...]}, "phrasal": [...]})
can extend it but never shrink it below the built-in set.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)

DEFAULT_BASE_FORMS: tuple[str, ...] = (
    "accuse", "affirm", "allege", "announce", "argue", "assert", "aver",
    "avouch", "avow", "blame", "broadcast", "claim", "comment", "confirm",
    "contend", "credit", "declare", "defend", "describe", "disclose",
    "discuss", "express", "find", "hint", "imply", "insinuate", "insist",
    "intimate", "proclaim", "profess", "publish", "reaffirm", "reassert",
    "remark", "repeat", "report", "say", "state", "tell", "write", "deny",
    "gainsay", "suppress", "challenge", "controvert", "disagree", "discount",
    "discredit", "dispute", "question", "disavow", "disclaim", "protest",
    "reject", "repudiate", "contradict", "expect", "add", "think", "believe",
    "note", "agree", "plan", "conclude", "consider",
)

DEFAULT_PHRASAL: tuple[str, ...] = ("according to",)

# Verbs whose past/participle/gerund forms the suffix rules get wrong.
_IRREGULAR: dict[str, tuple[str, ...]] = {
    "say": ("says", "said", "saying"),
    "gainsay": ("gainsays", "gainsaid", "gainsaying"),
    "tell": ("tells", "told", "telling"),
    "write": ("writes", "wrote", "written", "writing"),
    "find": ("finds", "found", "finding"),
    "think": ("thinks", "thought", "thinking"),
    "broadcast": ("broadcasts", "broadcast", "broadcasted", "broadcasting"),
    "aver": ("avers", "averred", "averring"),
    "plan": ("plans", "planned", "planning"),
}

_VOWELS = "aeiou"


def _third_person(base: str) -> str:
    if base.endswith(("s", "x", "z", "ch", "sh")):
        return base + "es"
    if base.endswith("y") and len(base) > 1 and base[-2] not in _VOWELS:
        return base[:-1] + "ies"
    return base + "s"


def _past(base: str) -> str:
    if base.endswith("e"):
        return base + "d"
    if base.endswith("y") and len(base) > 1 and base[-2] not in _VOWELS:
        return base[:-1] + "ied"
    return base + "ed"


def _gerund(base: str) -> str:
    if base.endswith("e") and not base.endswith("ee"):
        return base[:-1] + "ing"
    return base + "ing"


def _inflect(base: str) -> tuple[str, ...]:
    if base in _IRREGULAR:
        return _IRREGULAR[base]
    return (_third_person(base), _past(base), _gerund(base))


@dataclass(frozen=True)
class CueLexicon:
    base_forms: tuple[str, ...]
    inflections: dict[str, tuple[str, ...]] = field(compare=False)
    phrasal: tuple[str, ...] = DEFAULT_PHRASAL
    form_to_base: dict[str, str] = field(
        init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        missing = [b for b in self.base_forms if b not in self.inflections]
        if missing:
            raise ValueError(f"no inflections for base forms: {missing}")
        lookup: dict[str, str] = {}
        for base in self.base_forms:
            lookup[base] = base
            for form in self.inflections[base]:
                lookup.setdefault(form, base)
        object.__setattr__(self, "form_to_base", lookup)

    def cue_rank(self, form: str) -> int:
        """Preference order when a sentence holds several cues.

        Finite past/3rd-person forms ("said", "says") most often carry the
        attribution, the bare base may be infinitival, and gerunds ("adding")
        usually sit in subordinate clauses.  Lower rank wins.
        """
        base = self.form_to_base.get(form)
        if base is None:
            raise KeyError(form)
        if form.endswith("ing"):
            return 2
        if form == base:
            return 1
        return 0


def default_lexicon() -> CueLexicon:
    return CueLexicon(
        base_forms=DEFAULT_BASE_FORMS,
        inflections={b: _inflect(b) for b in DEFAULT_BASE_FORMS},
        phrasal=DEFAULT_PHRASAL,
    )


def load_lexicon(path: str | Path) -> CueLexicon:
    """Read lexicon.json; the built-in verb set is the floor, not replaceable."""
    with Path(path).open(encoding="utf-8") as fh:
        raw = json.load(fh)
    base_forms = tuple(raw.get("base_forms", ()))
    missing = sorted(set(DEFAULT_BASE_FORMS) - set(base_forms))
    if missing:
        raise ValueError(
            f"lexicon at {path} is missing required base forms: {missing[:5]}"
            + ("..." if len(missing) > 5 else ""))
    inflections = {b: tuple(forms) for b, forms in raw.get("inflections", {}).items()}
    for base in base_forms:
        # Fill gaps from the rule table so hand-edited files stay small.
        if base not in inflections:
            inflections[base] = _inflect(base)
    phrasal = tuple(raw.get("phrasal", DEFAULT_PHRASAL))
    return CueLexicon(base_forms=base_forms, inflections=inflections,
                      phrasal=phrasal)


def save_lexicon(lexicon: CueLexicon, path: str | Path) -> None:
    payload = {
        "base_forms": list(lexicon.base_forms),
        "inflections": {b: list(f) for b, f in sorted(lexicon.inflections.items())},
        "phrasal": list(lexicon.phrasal),
    }
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
