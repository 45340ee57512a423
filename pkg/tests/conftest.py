import numpy as np
import pytest

from fairbandit.data import fit_encoding, parse_schema

MIXED_SCHEMA_TEXT = """\
age = continuous
color = categorical
score = continuous
group = sensitive
outcome = label
positive_label = yes
sensitive_group_1 = b
"""


def make_row(age, color, score, group, outcome):
    return {"age": str(age), "color": color, "score": str(score),
            "group": group, "outcome": outcome}


@pytest.fixture
def mixed_schema():
    return parse_schema(MIXED_SCHEMA_TEXT)


@pytest.fixture
def mixed_rows():
    return [
        make_row(25, "red", 1.0, "a", "yes"),
        make_row(35, "blue", 2.0, "b", "no"),
        make_row(45, "red", 3.0, "a", "yes"),
        make_row(55, "green", 4.0, "b", "no"),
    ]


@pytest.fixture
def fitted_mixed_schema(mixed_schema, mixed_rows):
    return fit_encoding(mixed_rows, mixed_schema)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
