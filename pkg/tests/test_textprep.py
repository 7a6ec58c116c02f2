import datetime as dt

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vacobs.ingest import ContractType, EmploymentMode, JobAd
from vacobs.textprep import (
    LemmaTable,
    build_document,
    clean_text,
    default_lemma_table,
    lemmatize,
    load_lemma_table,
    tokenize,
)


def make_ad(title, description="", ad_id=1):
    return JobAd(
        ad_id=ad_id,
        title=title,
        description=description,
        employer="Acme",
        location_name="Exeter",
        posted_date=dt.date(2020, 3, 16),
        yearly_min_salary=None,
        yearly_max_salary=None,
        contract_type=ContractType.UNKNOWN,
        employment_mode=EmploymentMode.UNKNOWN,
    )


@pytest.fixture(scope="module")
def table():
    return default_lemma_table()


# --- clean_text ----------------------------------------------------------


def test_clean_strips_tags_and_decodes_entities():
    assert clean_text("Senior <b>Nurse</b> &amp; Carer") == "senior nurse & carer"


def test_clean_empty():
    assert clean_text("") == ""


def test_clean_lowercases():
    assert clean_text("TEACHER") == "teacher"


def test_clean_collapses_control_characters():
    assert clean_text("care\tassistant\r\nwanted") == "care assistant wanted"


def test_clean_numeric_entities():
    assert clean_text("O&#39;Brien &#38; Sons") == "o'brien & sons"


def test_clean_drops_markup_reintroduced_by_entities():
    # "&lt;b&gt;" decodes to a literal "<b>" which is not a tag; the
    # markup characters are dropped but the text survives.
    assert clean_text("a &lt;b&gt; c") == "a b c"


text_strategy = st.lists(
    st.sampled_from(
        list("abcXYZ 0189<>&;/#\t\n\rÉé.") + ["&amp;", "&lt;", "&#39;", "<b>", "</b>"]
    ),
    max_size=60,
).map("".join)


@settings(max_examples=300, deadline=None)
@given(text_strategy)
def test_clean_text_idempotent(raw):
    once = clean_text(raw)
    assert clean_text(once) == once


# --- tokenize ------------------------------------------------------------


def test_tokenize_splits_on_whitespace():
    assert tokenize("hgv class 2 driver") == ["hgv", "class", "2", "driver"]


def test_tokenize_splits_on_punctuation():
    assert tokenize("it-support/engineer") == ["it", "support", "engineer"]


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_excludes_underscore():
    assert tokenize("it_support") == ["it", "support"]


# --- lemmatize -----------------------------------------------------------


def test_lemmatize_plural(table):
    assert lemmatize("nurses", table) == "nurse"


def test_lemmatize_fixed_point(table):
    assert lemmatize("teacher", table) == "teacher"


def test_lemmatize_exception_beats_suffix_rule():
    # Custom table where the exception and the rule disagree: the
    # exceptions map must win.
    custom = LemmaTable(exceptions={"women": "woman"}, suffix_rules=(("men", "XXX"),))
    assert lemmatize("women", custom) == "woman"


def test_lemmatize_irregular(table):
    assert lemmatize("women", table) == "woman"


def test_lemmatize_examples(table):
    assert lemmatize("companies", table) == "company"
    assert lemmatize("applied", table) == "apply"
    assert lemmatize("working", table) == "work"
    assert lemmatize("class", table) == "class"
    assert lemmatize("needs", table) == "need"
    assert lemmatize("wanted", table) == "wanted"


def test_lemma_table_values_are_fixed_points(table):
    for value in table.exceptions.values():
        assert lemmatize(value, table) == value, value


token_strategy = st.text(alphabet="abcdefghinorstuy", min_size=1, max_size=12)


@settings(max_examples=500, deadline=None)
@given(token_strategy)
def test_lemmatize_idempotent(token):
    table = default_lemma_table()
    once = lemmatize(token, table)
    assert lemmatize(once, table) == once


# --- build_document -------------------------------------------------------


def test_build_document_composes_pipeline(table):
    doc = build_document(make_ad("Nurses Wanted"), table)
    assert doc.tokens == ("nurse", "wanted")
    assert doc.boundary == 2


def test_build_document_title_tokens_first(table):
    doc = build_document(make_ad("A", "B"), table)
    assert doc.tokens == ("a", "b")
    assert doc.boundary == 1


def test_build_document_empty_text(table):
    doc = build_document(make_ad("<br/>", "&#10;"), table)
    assert doc.tokens == ()
    assert doc.boundary == 0


def test_build_document_caps_token_count(table):
    doc = build_document(make_ad("role", "word " * 12_000), table)
    assert len(doc.tokens) == 10_000


def test_build_document_pure(table):
    ad = make_ad("Senior <b>Care</b> Workers", "Duties &amp; shifts")
    assert build_document(ad, table) == build_document(ad, table)


@settings(max_examples=200, deadline=None)
@given(text_strategy, text_strategy)
def test_no_token_contains_markup(title, description):
    table = default_lemma_table()
    doc = build_document(make_ad(title, description), table)
    for token in doc.tokens:
        assert token == token.lower()
        assert token
        assert not set(token) & {"<", ">", "&", ";", " "}


# --- table file round trip -------------------------------------------------


def test_load_lemma_table_round_trip(tmp_path):
    path = tmp_path / "table.txt"
    path.write_text("[exceptions]\nfeet\tfoot\n\n[suffix_rules]\ns\t\n", encoding="utf-8")
    table = load_lemma_table(path)
    assert table.exceptions == {"feet": "foot"}
    assert table.suffix_rules == (("s", ""),)
    assert lemmatize("feet", table) == "foot"
    assert lemmatize("dogs", table) == "dog"


def test_load_lemma_table_rejects_bad_lines(tmp_path):
    path = tmp_path / "table.txt"
    path.write_text("feet\tfoot\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_lemma_table(path)
