"""Fetch-and-convert helpers for the three public tabular benchmarks.

Each converter turns the raw upstream file format into the header CSV +
schema pair the pipeline consumes.  Missing-value markers become empty
cells, which the loader drops (with a count).  Run as a module to download
and convert everything:

    python -m fairbandit.datasets --dest data

The raw files are small (< 25 MB total) and come from the canonical
distribution points; conversion is deterministic.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import urllib.request
from pathlib import Path

ADULT_URLS = (
    "https://archive.ics.uci.edu/ml/machine-learning-databases/adult/adult.data",
    "https://archive.ics.uci.edu/ml/machine-learning-databases/adult/adult.test",
)
GERMAN_URL = "https://archive.ics.uci.edu/ml/machine-learning-databases/statlog/german/german.data"
COMPAS_URL = "https://raw.githubusercontent.com/propublica/compas-analysis/master/compas-scores-two-years.csv"

ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num", "marital-status",
    "occupation", "relationship", "race", "sex", "capital-gain", "capital-loss",
    "hours-per-week", "native-country", "income",
]

ADULT_SCHEMA = """\
age = continuous
workclass = categorical
fnlwgt = continuous
education = categorical
education-num = continuous
marital-status = categorical
occupation = categorical
relationship = categorical
race = categorical
sex = sensitive
capital-gain = continuous
capital-loss = continuous
hours-per-week = continuous
native-country = categorical
income = label
positive_label = >50K
sensitive_group_1 = Female
"""

GERMAN_COLUMNS = [
    "checking_status", "duration", "credit_history", "purpose", "credit_amount",
    "savings", "employment_since", "installment_rate", "sex", "other_debtors",
    "residence_since", "property", "age", "other_installments", "housing",
    "existing_credits", "job", "num_liable", "telephone", "foreign_worker", "credit",
]

GERMAN_SCHEMA = """\
checking_status = categorical
duration = continuous
credit_history = categorical
purpose = categorical
credit_amount = continuous
savings = categorical
employment_since = categorical
installment_rate = continuous
sex = sensitive
other_debtors = categorical
residence_since = continuous
property = categorical
age = continuous
other_installments = categorical
housing = categorical
existing_credits = continuous
job = categorical
num_liable = continuous
telephone = categorical
foreign_worker = categorical
credit = label
positive_label = good
sensitive_group_1 = female
"""

# attribute 9 of the raw file encodes personal status and sex together
_GERMAN_FEMALE_CODES = {"A92", "A95"}

COMPAS_COLUMNS = [
    "sex", "age", "age_cat", "juv_fel_count", "juv_misd_count", "juv_other_count",
    "priors_count", "c_charge_degree", "race", "two_year_recid",
]

COMPAS_SCHEMA = """\
sex = categorical
age = continuous
age_cat = categorical
juv_fel_count = continuous
juv_misd_count = continuous
juv_other_count = continuous
priors_count = continuous
c_charge_degree = categorical
race = sensitive
two_year_recid = label
positive_label = yes
sensitive_group_1 = African-American
"""


def convert_adult(train_text: str, test_text: str) -> list[list[str]]:
    """Combine the two raw files into rows matching ADULT_COLUMNS.

    The test file's banner line is skipped and its trailing-period labels
    normalized; '?' markers become empty cells.
    """
    rows: list[list[str]] = []
    for text in (train_text, test_text):
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("|"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != len(ADULT_COLUMNS):
                continue
            parts[-1] = parts[-1].rstrip(".")
            rows.append(["" if p == "?" else p for p in parts])
    return rows


def convert_german(text: str) -> list[list[str]]:
    """Rows from the space-separated raw file, with attribute 9 mapped to sex
    and the 1/2 outcome mapped to good/bad."""
    rows: list[list[str]] = []
    for line in text.splitlines():
        parts = line.split()
        if len(parts) != 21:
            continue
        sex = "female" if parts[8] in _GERMAN_FEMALE_CODES else "male"
        credit = "good" if parts[20] == "1" else "bad"
        rows.append(parts[:8] + [sex] + parts[9:20] + [credit])
    return rows


def convert_compas(text: str) -> list[list[str]]:
    """Apply the standard screening filter to the two-year recidivism file.

    Kept rows: |days_b_screening_arrest| <= 30, is_recid != -1, ordinary
    charge degree (not 'O'), and a valid score_text.
    """
    reader = csv.DictReader(io.StringIO(text))
    rows: list[list[str]] = []
    for rec in reader:
        try:
            days = float(rec["days_b_screening_arrest"])
        except (ValueError, TypeError, KeyError):
            continue
        if not -30 <= days <= 30:
            continue
        if rec.get("is_recid") == "-1":
            continue
        if rec.get("c_charge_degree") == "O":
            continue
        if rec.get("score_text") in (None, "", "N/A"):
            continue
        label = "yes" if rec["two_year_recid"] == "1" else "no"
        rows.append([rec[c].strip() for c in COMPAS_COLUMNS[:-1]] + [label])
    return rows


def write_dataset(dest: Path, name: str, columns: list[str], rows: list[list[str]],
                  schema_text: str) -> None:
    dest.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    (dest / f"{name}.csv").write_text(buf.getvalue(), encoding="utf-8")
    (dest / f"{name}.schema").write_text(schema_text, encoding="utf-8")


def _fetch(url: str) -> str:
    with urllib.request.urlopen(url, timeout=120) as resp:
        return resp.read().decode("utf-8", errors="replace")


def fetch_adult(dest: Path) -> int:
    rows = convert_adult(_fetch(ADULT_URLS[0]), _fetch(ADULT_URLS[1]))
    write_dataset(dest, "adult", ADULT_COLUMNS, rows, ADULT_SCHEMA)
    return len(rows)


def fetch_german(dest: Path) -> int:
    rows = convert_german(_fetch(GERMAN_URL))
    write_dataset(dest, "german", GERMAN_COLUMNS, rows, GERMAN_SCHEMA)
    return len(rows)


def fetch_compas(dest: Path) -> int:
    rows = convert_compas(_fetch(COMPAS_URL))
    write_dataset(dest, "compas", COMPAS_COLUMNS, rows, COMPAS_SCHEMA)
    return len(rows)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Download and convert the benchmark datasets.")
    parser.add_argument("--dest", default="data", help="output directory")
    parser.add_argument("--dataset", choices=("adult", "german", "compas", "all"), default="all")
    args = parser.parse_args(argv)
    dest = Path(args.dest)
    jobs = {
        "adult": fetch_adult,
        "german": fetch_german,
        "compas": fetch_compas,
    }
    wanted = list(jobs) if args.dataset == "all" else [args.dataset]
    for name in wanted:
        try:
            n = jobs[name](dest)
        except OSError as exc:
            print(f"{name}: download failed ({exc})", file=sys.stderr)
            return 1
        print(f"{name}: wrote {n} rows to {dest / (name + '.csv')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
