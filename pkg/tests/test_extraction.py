from hypothesis import given, settings
from hypothesis import strategies as st

from quotekg.extraction import (
    ExtractionStats,
    extract_quotes,
    raw_quote_from_dict,
    raw_quote_to_dict,
)
from quotekg.rules import ruleset_from_mapping
from quotekg.wikitext import ListItem, PageTree, Section, Text, parse_page

from fixture_paths import WIKITEXT_FIXTURES
from test_wikitext import LOVE_EN, LOVE_FR

EN_RULES = ruleset_from_mapping(
    "en",
    {
        "quote_section_titles": ["Quotes"],
        "misattributed_section_patterns": ["(?i)^misattributed"],
        "about_section_patterns": ["(?i)^quotes about .*"],
        "quote_template_names": ["quote"],
        "original_text_keys": ["original"],
        "original_language_keys": ["language"],
    },
)


def parse_fixture(name, language="en"):
    source = (WIKITEXT_FIXTURES / f"{name}.wikitext").read_text("utf-8")
    return parse_page("Albert Einstein", source, language)


class TestListQuotes:
    def test_bold_list_quote_yields_one_quote_with_context(self):
        tree = parse_page(
            "Albert Einstein",
            "== Quotes ==\n" + (WIKITEXT_FIXTURES / "bold_list_quote.wikitext").read_text("utf-8"),
            "en",
        )
        quotes = extract_quotes(tree, EN_RULES)
        assert len(quotes) == 1
        quote = quotes[0]
        assert quote.text == LOVE_EN
        assert quote.misattributed is False
        assert len(quote.context_nodes) == 1
        assert quote.section_path == ["Quotes"]
        assert quote.person_title == "Albert Einstein"

    def test_deeper_items_are_context_not_quotes(self):
        tree = parse_page("X", "== Quotes ==\n* top\n** ctx one\n*** ctx two\n", "en")
        quotes = extract_quotes(tree, EN_RULES)
        assert len(quotes) == 1
        assert quotes[0].text == "top"

    def test_quotes_in_unrecognized_subsection_inherit_state(self):
        tree = parse_page("X", "== Quotes ==\n=== 1930s ===\n* inherited\n", "en")
        quotes = extract_quotes(tree, EN_RULES)
        assert [q.text for q in quotes] == ["inherited"]
        assert quotes[0].section_path == ["Quotes", "1930s"]

    def test_items_outside_recognized_sections_counted_not_extracted(self):
        stats = ExtractionStats()
        tree = parse_page("X", "== Career ==\n* not a quote\n", "en")
        assert extract_quotes(tree, EN_RULES, stats) == []
        assert stats.outside_sections == 1

    def test_empty_text_items_skipped_with_counter(self):
        stats = ExtractionStats()
        tree = parse_page("X", "== Quotes ==\n* <ref>source only</ref>\n* real\n", "en")
        quotes = extract_quotes(tree, EN_RULES, stats)
        assert [q.text for q in quotes] == ["real"]
        assert stats.empty_skipped == 1


class TestTemplateQuotes:
    def test_citation_template_quote(self, default_rules):
        tree = parse_fixture("citation_template", "fr")
        quotes = extract_quotes(tree, default_rules["fr"])
        assert len(quotes) == 1
        quote = quotes[0]
        assert quote.text == LOVE_FR
        assert quote.original_text == LOVE_EN
        assert quote.original_language_hint == "en"
        assert quote.template_params is not None

    def test_template_harvested_outside_sections(self):
        tree = parse_page("X", "{{Quote|standalone}}\n", "en")
        quotes = extract_quotes(tree, EN_RULES)
        assert [q.text for q in quotes] == ["standalone"]

    def test_template_named_differently_ignored(self):
        tree = parse_page("X", "{{Infobox|x}}\n", "en")
        assert extract_quotes(tree, EN_RULES) == []

    def test_template_inside_about_ignored(self):
        tree = parse_page("X", "== Quotes about Albert Einstein ==\n{{Quote|about him}}\n", "en")
        assert extract_quotes(tree, EN_RULES) == []

    def test_template_in_misattributed_section_flagged(self):
        tree = parse_page("X", "== Misattributed ==\n{{Quote|fake}}\n", "en")
        quotes = extract_quotes(tree, EN_RULES)
        assert quotes[0].misattributed is True


class TestExclusions:
    def test_about_only_tree_yields_nothing(self):
        tree = parse_page(
            "Albert Einstein",
            "== Quotes about Albert Einstein ==\n* He was a genius.\n",
            "en",
        )
        assert extract_quotes(tree, EN_RULES) == []

    def test_misattributed_flag_set_from_section(self):
        tree = parse_page("X", "== Misattributed ==\n* never said\n", "en")
        quotes = extract_quotes(tree, EN_RULES)
        assert quotes[0].misattributed is True

    def test_misattributed_inherited_by_subsections(self):
        tree = parse_page("X", "== Misattributed ==\n=== Older ===\n* never said\n", "en")
        assert extract_quotes(tree, EN_RULES)[0].misattributed is True

    def test_context_sections_not_harvested(self):
        rules = ruleset_from_mapping(
            "en",
            {"quote_section_titles": ["Quotes"], "context_section_titles": ["Notes"]},
        )
        tree = parse_page("X", "== Notes ==\n* a note\n", "en")
        assert extract_quotes(tree, rules) == []


class TestInvariantsAndProperties:
    def test_monotone_adding_section_never_removes(self):
        base = "== Quotes ==\n* one\n"
        extended = base + "== Sourced ==\n* two\n"
        rules = ruleset_from_mapping("en", {"quote_section_titles": ["Quotes", "Sourced"]})
        texts_base = {q.text for q in extract_quotes(parse_page("X", base, "en"), rules)}
        texts_ext = {q.text for q in extract_quotes(parse_page("X", extended, "en"), rules)}
        assert texts_base <= texts_ext

    def test_section_path_exists_in_tree(self):
        tree = parse_page("X", "== Quotes ==\n=== 1930s ===\n* q\n", "en")
        quote = extract_quotes(tree, EN_RULES)[0]
        node_list = tree.root
        for title in quote.section_path:
            section = next(
                n for n in node_list if isinstance(n, Section) and n.title == title
            )
            node_list = section.children

    def test_round_trip_through_dicts(self, default_rules):
        tree = parse_fixture("citation_template", "fr")
        quotes = extract_quotes(tree, default_rules["fr"])
        for quote in quotes:
            assert raw_quote_to_dict(raw_quote_from_dict(raw_quote_to_dict(quote))) == raw_quote_to_dict(quote)

    @given(
        st.lists(
            st.tuples(
                st.sampled_from(["Quotes", "Misattributed", "Quotes about Him", "Career"]),
                st.lists(st.text(alphabet="abc xyz", min_size=1, max_size=12), max_size=3),
            ),
            max_size=6,
        )
    )
    @settings(max_examples=150, deadline=None)
    def test_no_quote_ever_comes_from_about_sections(self, section_spec):
        root = []
        about_texts = set()
        for title, item_texts in section_spec:
            section = Section(title=title, level=2)
            for text in item_texts:
                section.children.append(ListItem(depth=1, inline=[Text(text)]))
                if title == "Quotes about Him":
                    about_texts.add(" ".join(text.split()))
            root.append(section)
        tree = PageTree(page_title="X", language_code="en", root=root)
        quotes = extract_quotes(tree, EN_RULES)
        for quote in quotes:
            assert quote.section_path[0] != "Quotes about Him"
            assert "Quotes about Him" not in quote.section_path
        flagged = {q.text for q in quotes if q.misattributed}
        for quote in quotes:
            assert (quote.section_path[0] == "Misattributed") == quote.misattributed
