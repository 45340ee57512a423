"""Conversion logic for the benchmark downloads, exercised on fabricated raw snippets."""

from fairbandit.data import parse_schema
from fairbandit.datasets import (
    ADULT_COLUMNS,
    ADULT_SCHEMA,
    COMPAS_COLUMNS,
    COMPAS_SCHEMA,
    GERMAN_COLUMNS,
    GERMAN_SCHEMA,
    convert_adult,
    convert_compas,
    convert_german,
    write_dataset,
)

ADULT_TRAIN_SNIPPET = (
    "39, State-gov, 77516, Bachelors, 13, Never-married, Adm-clerical,"
    " Not-in-family, White, Male, 2174, 0, 40, United-States, <=50K\n"
    "50, ?, 83311, Bachelors, 13, Married-civ-spouse, Exec-managerial,"
    " Husband, White, Male, 0, 0, 13, United-States, >50K\n"
    "\n"
)

ADULT_TEST_SNIPPET = (
    "|1x3 Cross validator\n"
    "25, Private, 226802, 11th, 7, Never-married, Machine-op-inspct,"
    " Own-child, Black, Female, 0, 0, 40, United-States, <=50K.\n"
)

GERMAN_SNIPPET = (
    "A11 6 A34 A43 1169 A65 A75 4 A93 A101 4 A121 67 A143 A152 2 A173 1 A192 A201 1\n"
    "A12 48 A32 A43 5951 A61 A73 2 A92 A101 2 A121 22 A143 A152 1 A173 1 A191 A201 2\n"
)

COMPAS_HEADER = ("id,sex,age,age_cat,race,juv_fel_count,juv_misd_count,juv_other_count,"
                 "priors_count,days_b_screening_arrest,c_charge_degree,is_recid,"
                 "score_text,two_year_recid\n")

COMPAS_SNIPPET = COMPAS_HEADER + "\n".join([
    # kept
    "1,Male,34,25 - 45,African-American,0,0,0,0,-1,F,1,Low,1",
    # dropped: screening gap too large
    "2,Male,24,Less than 25,Other,0,0,1,4,80,F,1,High,1",
    # dropped: is_recid == -1
    "3,Female,41,25 - 45,Caucasian,0,0,0,14,-1,F,-1,Medium,0",
    # dropped: ordinary-traffic charge degree
    "4,Male,39,25 - 45,Caucasian,0,0,0,0,0,O,0,Low,0",
    # dropped: no score
    "5,Male,27,25 - 45,Caucasian,0,0,0,0,0,F,0,N/A,0",
    # kept
    "6,Female,39,25 - 45,Caucasian,0,0,0,0,0,M,0,Low,0",
]) + "\n"


class TestConvertAdult:
    def test_rows_combined_and_normalized(self):
        rows = convert_adult(ADULT_TRAIN_SNIPPET, ADULT_TEST_SNIPPET)
        assert len(rows) == 3
        assert rows[0][0] == "39"
        assert rows[0][-1] == "<=50K"
        assert rows[2][-1] == "<=50K"  # trailing period stripped

    def test_missing_marker_becomes_empty_cell(self):
        rows = convert_adult(ADULT_TRAIN_SNIPPET, "")
        assert rows[1][1] == ""

    def test_banner_line_skipped(self):
        rows = convert_adult("", ADULT_TEST_SNIPPET)
        assert len(rows) == 1

    def test_schema_matches_columns(self):
        schema = parse_schema(ADULT_SCHEMA)
        assert [name for name, _ in schema.columns] == ADULT_COLUMNS
        assert schema.sensitive_column == "sex"
        assert schema.label_column == "income"


class TestConvertGerman:
    def test_sex_derived_from_status_code(self):
        rows = convert_german(GERMAN_SNIPPET)
        assert rows[0][GERMAN_COLUMNS.index("sex")] == "male"    # A93
        assert rows[1][GERMAN_COLUMNS.index("sex")] == "female"  # A92

    def test_outcome_mapped_to_words(self):
        rows = convert_german(GERMAN_SNIPPET)
        assert rows[0][-1] == "good"
        assert rows[1][-1] == "bad"

    def test_column_count_matches_schema(self):
        schema = parse_schema(GERMAN_SCHEMA)
        rows = convert_german(GERMAN_SNIPPET)
        assert len(rows[0]) == len(GERMAN_COLUMNS) == len(schema.columns)


class TestConvertCompas:
    def test_standard_screening_filter(self):
        rows = convert_compas(COMPAS_SNIPPET)
        assert len(rows) == 2
        assert rows[0][COMPAS_COLUMNS.index("race")] == "African-American"
        assert rows[0][-1] == "yes"
        assert rows[1][-1] == "no"

    def test_schema_matches_columns(self):
        schema = parse_schema(COMPAS_SCHEMA)
        assert [name for name, _ in schema.columns] == COMPAS_COLUMNS


class TestWriteDataset:
    def test_written_pair_loads_through_pipeline(self, tmp_path):
        rows = convert_german(GERMAN_SNIPPET) * 6  # 12 rows, enough to split
        write_dataset(tmp_path, "german", GERMAN_COLUMNS, rows, GERMAN_SCHEMA)
        from fairbandit.data import load_rows, prepare_dataset

        schema = parse_schema((tmp_path / "german.schema").read_text())
        loaded, dropped = load_rows(tmp_path / "german.csv", schema)
        assert dropped == 0
        dataset, fitted = prepare_dataset(loaded, schema, seed=0)
        assert fitted.encoded_dim > 10
