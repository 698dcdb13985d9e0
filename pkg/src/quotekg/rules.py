"""Per-language extraction vocabulary: which sections hold quotes, which
templates carry them, and which template keys carry dates, sources and
original texts."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from importlib import resources

import yaml


class ConfigError(Exception):
    pass


class SectionKind(enum.Enum):
    QUOTES = "quotes"
    CONTEXT = "context"
    MISATTRIBUTED = "misattributed"
    ABOUT = "about"
    OTHER = "other"


_KNOWN_FIELDS = {
    "quote_section_titles",
    "context_section_titles",
    "misattributed_section_patterns",
    "about_section_patterns",
    "quote_template_names",
    "date_template_keys",
    "source_template_keys",
    "original_text_keys",
    "original_language_keys",
    "month_names",
}


@dataclass
class LanguageRuleSet:
    language_code: str
    quote_section_titles: frozenset[str]
    context_section_titles: frozenset[str] = frozenset()
    misattributed_section_patterns: list = field(default_factory=list)
    about_section_patterns: list = field(default_factory=list)
    quote_template_names: frozenset[str] = frozenset()
    date_template_keys: list = field(default_factory=list)
    source_template_keys: list = field(default_factory=list)
    original_text_keys: list = field(default_factory=list)
    original_language_keys: list = field(default_factory=list)
    month_names: dict = field(default_factory=dict)  # lowercase name -> 1..12


def _lowered_set(values, language: str, what: str) -> frozenset[str]:
    seen = {}
    for v in values or []:
        key = str(v).strip().lower()
        if not key:
            continue
        if key in seen:
            raise ConfigError(f"{language}: duplicate entry {v!r} in {what}")
        seen[key] = v
    return frozenset(seen)


def _compiled(patterns, language: str) -> list:
    out = []
    for p in patterns or []:
        try:
            out.append(re.compile(str(p)))
        except re.error as exc:
            raise ConfigError(f"{language}: invalid regex {p!r}: {exc}") from exc
    return out


def ruleset_from_mapping(language: str, raw: dict) -> LanguageRuleSet:
    unknown = set(raw) - _KNOWN_FIELDS
    if unknown:
        raise ConfigError(f"{language}: unknown fields {sorted(unknown)}")
    if not raw.get("quote_section_titles"):
        raise ConfigError(f"{language}: quote_section_titles is mandatory and nonempty")
    months = {}
    for name, num in (raw.get("month_names") or {}).items():
        num = int(num)
        if not 1 <= num <= 12:
            raise ConfigError(f"{language}: month {name!r} maps to {num}")
        months[str(name).strip().lower()] = num
    return LanguageRuleSet(
        language_code=language,
        quote_section_titles=_lowered_set(
            raw.get("quote_section_titles"), language, "quote_section_titles"
        ),
        context_section_titles=_lowered_set(
            raw.get("context_section_titles"), language, "context_section_titles"
        ),
        misattributed_section_patterns=_compiled(
            raw.get("misattributed_section_patterns"), language
        ),
        about_section_patterns=_compiled(raw.get("about_section_patterns"), language),
        quote_template_names=_lowered_set(
            raw.get("quote_template_names"), language, "quote_template_names"
        ),
        date_template_keys=list(raw.get("date_template_keys") or []),
        source_template_keys=list(raw.get("source_template_keys") or []),
        original_text_keys=list(raw.get("original_text_keys") or []),
        original_language_keys=list(raw.get("original_language_keys") or []),
        month_names=months,
    )


def load_rules(source) -> dict[str, LanguageRuleSet]:
    """Load rulesets from a YAML path, file object or pre-parsed mapping."""
    if isinstance(source, dict):
        doc = source
    elif hasattr(source, "read"):
        doc = yaml.safe_load(source.read())
    else:
        with open(source, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ConfigError("rules document must map language codes to rule mappings")
    rules = {}
    for language, raw in doc.items():
        if not isinstance(raw, dict):
            raise ConfigError(f"{language}: ruleset must be a mapping")
        rules[str(language)] = ruleset_from_mapping(str(language), raw)
    return rules


def load_default_rules() -> dict[str, LanguageRuleSet]:
    text = resources.files("quotekg.data").joinpath("rules.yaml").read_text("utf-8")
    return load_rules(yaml.safe_load(text))


def classify_section(title: str, rules: LanguageRuleSet) -> SectionKind:
    """Categorize a section title. Precedence:
    MISATTRIBUTED > ABOUT > QUOTES > CONTEXT > OTHER."""
    t = title.strip()
    for pattern in rules.misattributed_section_patterns:
        if pattern.search(t):
            return SectionKind.MISATTRIBUTED
    for pattern in rules.about_section_patterns:
        if pattern.search(t):
            return SectionKind.ABOUT
    lowered = t.lower()
    if lowered in rules.quote_section_titles:
        return SectionKind.QUOTES
    if lowered in rules.context_section_titles:
        return SectionKind.CONTEXT
    return SectionKind.OTHER
