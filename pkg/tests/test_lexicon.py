from __future__ import annotations

import pytest

from metric_gate import LexiconError, SensitiveLexicon, load_lexicon_file
from metric_gate.lexicon import CATEGORIES


def test_category_order_fixed():
    assert CATEGORIES == ("DOB", "GENDER", "ZIP", "DIAGNOSIS", "ROLE", "NAME", "NATIONAL_ID")


def test_default_lexicon_minimum_synonyms():
    lex = SensitiveLexicon()
    required = {
        "DOB": {"dob", "date_of_birth", "birthdate"},
        "GENDER": {"gender", "sex"},
        "ZIP": {"zip", "zipcode", "postal_code"},
        "DIAGNOSIS": {"diagnosis_code", "icd_code", "diagnosis"},
        "ROLE": {"role", "job_title"},
        "NAME": {"name", "first_name", "last_name"},
        "NATIONAL_ID": {"ssn"},
    }
    for cat, names in required.items():
        assert names <= lex.synonyms[cat]


def test_classify_column_examples(lexicon):
    assert lexicon.classify_column("zip") == "ZIP"
    assert lexicon.classify_column("wait_time") is None
    assert lexicon.classify_column("postal_code") == "ZIP"
    assert lexicon.classify_column("dob") == "DOB"
    assert lexicon.classify_column("ssn") == "NATIONAL_ID"


def test_classify_is_exact_match_not_substring(lexicon):
    assert lexicon.classify_column("shipzone") is None
    assert lexicon.classify_column("zip_prefix") is None


def test_categories_of_ordering(lexicon):
    # result follows canonical category order, not input order
    cats = lexicon.categories_of(["diagnosis_code", "zip", "gender"])
    assert cats == ["GENDER", "ZIP", "DIAGNOSIS"]


def test_unknown_category_rejected():
    with pytest.raises(LexiconError):
        SensitiveLexicon(synonyms={"EMAIL": {"email"}})


def test_overlapping_synonyms_rejected():
    with pytest.raises(LexiconError):
        SensitiveLexicon(synonyms={"DOB": {"dob"}, "NAME": {"dob"}})


def test_unlisted_categories_fall_back_to_defaults():
    lex = SensitiveLexicon(synonyms={"ZIP": {"zip5"}})
    assert lex.classify_column("zip5") == "ZIP"
    assert lex.classify_column("zip") is None
    assert lex.classify_column("gender") == "GENDER"


def test_lexicon_file_roundtrip(tmp_path):
    path = tmp_path / "lex.conf"
    path.write_text(
        "# custom sensitivity lists\n"
        "ZIP = zip, zip5, plz\n"
        "GENDER = gender\n",
        encoding="utf-8",
    )
    lex = load_lexicon_file(path)
    assert lex.classify_column("plz") == "ZIP"
    assert lex.classify_column("sex") is None
    assert lex.classify_column("dob") == "DOB"


def test_lexicon_file_unknown_category_is_error(tmp_path):
    path = tmp_path / "lex.conf"
    path.write_text("EMAIL = email\n", encoding="utf-8")
    with pytest.raises(LexiconError):
        load_lexicon_file(path)


def test_lexicon_file_duplicate_category_is_error(tmp_path):
    path = tmp_path / "lex.conf"
    path.write_text("ZIP = zip\nZIP = zipcode\n", encoding="utf-8")
    with pytest.raises(LexiconError):
        load_lexicon_file(path)


def test_lexicon_file_malformed_line_is_error(tmp_path):
    path = tmp_path / "lex.conf"
    path.write_text("ZIP zip zipcode\n", encoding="utf-8")
    with pytest.raises(LexiconError):
        load_lexicon_file(path)


def test_entry_order_does_not_change_outputs(tmp_path):
    a = tmp_path / "a.conf"
    b = tmp_path / "b.conf"
    a.write_text("ZIP = zip, zip5\nGENDER = gender, sex\n", encoding="utf-8")
    b.write_text("GENDER = sex, gender\nZIP = zip5, zip\n", encoding="utf-8")
    la, lb = load_lexicon_file(a), load_lexicon_file(b)
    for name in ("zip", "zip5", "gender", "sex", "dob", "wait_time"):
        assert la.classify_column(name) == lb.classify_column(name)
    assert la.fingerprint_text() == lb.fingerprint_text()
