from __future__ import annotations

from metric_gate import extract_features, match_rules, parse_sql, render_explanation
from metric_gate.explain import FALLBACK_MESSAGE, fallback_reason

from conftest import Q1, Q2, Q3

MSG_ZIP = "ZIP code is a quasi-identifier and may expose individual locations if group size is small."
MSG_DOB = "Date of birth in grouping can uniquely identify individuals."
MSG_HEALTH_COMBO = "Grouping by gender and medical code may leak health-related sensitive segments."
MSG_SMALL_GROUPS = "Metric groups by multiple attributes including sensitive fields; group sizes could be too small."
MSG_SENSITIVE_JOIN = "Sensitive grouping combined with multiple joins increases linkage risk."
MSG_OK_NOTE = "While a sensitive attribute is grouped, group sizes are likely sufficient to prevent leakage."


def _reasons(sql, lexicon):
    summary = parse_sql(sql)
    return match_rules(extract_features(summary, lexicon), summary, lexicon)


def test_q1_fires_zip_rule_verbatim(lexicon):
    reasons = _reasons(Q1, lexicon)
    assert [r.code for r in reasons] == ["R_ZIP"]
    assert reasons[0].message == MSG_ZIP
    assert reasons[0].columns == ["zip"]
    assert reasons[0].category == "ZIP"


def test_q2_fires_health_combo_verbatim(lexicon):
    reasons = _reasons(Q2, lexicon)
    assert [r.code for r in reasons] == ["R_HEALTH_COMBO"]
    assert reasons[0].message == MSG_HEALTH_COMBO


def test_q3_fires_ok_note_verbatim(lexicon):
    reasons = _reasons(Q3, lexicon)
    assert [r.code for r in reasons] == ["R_OK_NOTE"]
    assert reasons[0].message == MSG_OK_NOTE


def test_dob_rule_verbatim(lexicon):
    reasons = _reasons("SELECT dob, COUNT(*) FROM patient_data GROUP BY dob;", lexicon)
    assert [r.code for r in reasons] == ["R_DOB"]
    assert reasons[0].message == MSG_DOB


def test_rule_table_order_on_multi_trigger(lexicon):
    # zip + dob + 3 group-by columns + 2 joins trips four rules in table order
    sql = (
        "SELECT p.zip, p.dob, p.department, COUNT(*) FROM patient_data p"
        " JOIN visits v ON p.patient_id = v.patient_id"
        " JOIN donations d ON p.patient_id = d.patient_id"
        " GROUP BY p.zip, p.dob, p.department;"
    )
    reasons = _reasons(sql, lexicon)
    assert [r.code for r in reasons] == ["R_ZIP", "R_DOB", "R_SMALL_GROUPS", "R_SENSITIVE_JOIN"]


def test_small_groups_needs_three_columns(lexicon):
    two = _reasons(
        "SELECT gender, department, COUNT(*) FROM patient_data GROUP BY gender, department;",
        lexicon,
    )
    assert "R_SMALL_GROUPS" not in [r.code for r in two]
    three = _reasons(
        "SELECT gender, department, clinic, COUNT(*) FROM patient_data"
        " GROUP BY gender, department, clinic;",
        lexicon,
    )
    assert "R_SMALL_GROUPS" in [r.code for r in three]


def test_sensitive_join_needs_two_joins(lexicon):
    one_join = _reasons(
        "SELECT p.gender, COUNT(*) FROM patient_data p"
        " JOIN visits v ON p.patient_id = v.patient_id GROUP BY p.gender;",
        lexicon,
    )
    assert "R_SENSITIVE_JOIN" not in [r.code for r in one_join]
    two_joins = _reasons(
        "SELECT p.gender, COUNT(*) FROM patient_data p"
        " JOIN visits v ON p.patient_id = v.patient_id"
        " JOIN donations d ON p.patient_id = d.patient_id GROUP BY p.gender;",
        lexicon,
    )
    assert "R_SENSITIVE_JOIN" in [r.code for r in two_joins]


def test_ok_note_only_when_nothing_else_fired(lexicon):
    codes = [r.code for r in _reasons(Q1, lexicon)]
    assert "R_OK_NOTE" not in codes


def test_no_rules_without_sensitive_grouping(lexicon):
    assert _reasons("SELECT department, COUNT(*) FROM patient_data GROUP BY department;", lexicon) == []
    assert _reasons("SELECT COUNT(*) FROM patient_data;", lexicon) == []
    # sensitive column in WHERE only does not trigger grouping rules
    assert (
        _reasons(
            "SELECT department, COUNT(*) FROM patient_data WHERE zip = '02139' GROUP BY department;",
            lexicon,
        )
        == []
    )


def test_match_rules_deterministic(lexicon):
    assert _reasons(Q2, lexicon) == _reasons(Q2, lexicon)


def test_render_blocked_single_reason(lexicon):
    reasons = _reasons(Q1, lexicon)
    assert render_explanation(reasons, "BLOCKED") == MSG_ZIP


def test_render_joins_messages_in_order(lexicon):
    sql = (
        "SELECT p.zip, p.dob, COUNT(*) FROM patient_data p"
        " GROUP BY p.zip, p.dob;"
    )
    reasons = _reasons(sql, lexicon)
    assert render_explanation(reasons, "BLOCKED") == MSG_ZIP + " " + MSG_DOB


def test_render_approved_empty():
    assert render_explanation([], "APPROVED") == ""


def test_render_blocked_empty_uses_fallback():
    assert render_explanation([], "BLOCKED") == FALLBACK_MESSAGE


def test_fallback_reason_shape():
    r = fallback_reason()
    assert r.code == "R_FALLBACK"
    assert r.message == FALLBACK_MESSAGE
    assert r.columns == []
