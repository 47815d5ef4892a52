"""Raw-source parsing and dataset assembly.

Two sources feed each (state, race) series: FRED-style CSVs covering
1990-2019 (one file per key, units declared in a sidecar manifest) and a
single census estimates CSV covering 2020-2022. Merging keeps census values
on overlap, applies the Hawaiian pre-2000 deletion rule, and demands a
contiguous annual run.
"""

from __future__ import annotations

import csv
import datetime
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from popcast.core import ALL_KEYS, AnnualSeries, Race, SeriesKey, State, make_series

__all__ = [
    "Source",
    "RawRecord",
    "Dataset",
    "IngestError",
    "parse_fred_csv",
    "parse_census_csv",
    "apply_deletion_rule",
    "merge_sources",
    "build_dataset",
    "read_manifest",
    "dataset_to_json",
    "dataset_from_json",
]

FRED_YEARS = (1990, 2019)
CENSUS_YEARS = (2020, 2022)
UNITS = ("persons", "thousands")


class IngestError(ValueError):
    pass


class Source(Enum):
    FRED = "FRED"
    CENSUS = "CENSUS"


@dataclass(frozen=True)
class RawRecord:
    year: int
    state: State
    race: Race
    population: float
    source: Source

    def __post_init__(self) -> None:
        lo, hi = FRED_YEARS if self.source is Source.FRED else CENSUS_YEARS
        if not lo <= self.year <= hi:
            raise IngestError(
                f"{self.source.value} record year {self.year} outside [{lo}, {hi}]"
            )

    @property
    def key(self) -> SeriesKey:
        return SeriesKey(self.state, self.race)


def parse_fred_csv(
    text: str, key: SeriesKey, unit: str = "persons"
) -> tuple[list[RawRecord], list[str]]:
    """Parse one DATE,VALUE file into records in persons.

    The FRED missing-value sentinel "." skips the row and adds a warning.
    Returns (records, warnings).
    """
    if unit not in UNITS:
        raise IngestError(f"unknown unit {unit!r}, expected one of {UNITS}")
    factor = 1000.0 if unit == "thousands" else 1.0
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["DATE", "VALUE"]:
        raise IngestError(f"{key}: expected header DATE,VALUE")
    records: list[RawRecord] = []
    warnings: list[str] = []
    seen_years: dict[int, int] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise IngestError(f"{key} line {lineno}: expected 2 columns, got {len(row)}")
        date_text, value_text = row[0].strip(), row[1].strip()
        try:
            date = datetime.date.fromisoformat(date_text)
        except ValueError:
            raise IngestError(f"{key} line {lineno}: malformed date {date_text!r}") from None
        if (date.month, date.day) != (1, 1):
            raise IngestError(
                f"{key} line {lineno}: observation date {date_text} is not January 1"
            )
        if date.year in seen_years:
            raise IngestError(
                f"{key} line {lineno}: duplicate year {date.year} "
                f"(first seen on line {seen_years[date.year]})"
            )
        seen_years[date.year] = lineno
        if value_text == ".":
            warnings.append(f"{key}: missing value for {date.year} (line {lineno}), row skipped")
            continue
        try:
            value = float(value_text)
        except ValueError:
            raise IngestError(f"{key} line {lineno}: non-numeric value {value_text!r}") from None
        if not np.isfinite(value):
            raise IngestError(f"{key} line {lineno}: non-finite value {value_text!r}")
        try:
            records.append(
                RawRecord(date.year, key.state, key.race, value * factor, Source.FRED)
            )
        except IngestError as exc:
            raise IngestError(f"{key} line {lineno}: {exc}") from None
    return records, warnings


def parse_census_csv(text: str) -> list[RawRecord]:
    """Parse the YEAR,STATE,RACE,POPULATION estimates file (integer persons)."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["YEAR", "STATE", "RACE", "POPULATION"]:
        raise IngestError("census file: expected header YEAR,STATE,RACE,POPULATION")
    records: list[RawRecord] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 4:
            raise IngestError(f"census line {lineno}: expected 4 columns, got {len(row)}")
        year_text, state_text, race_text, pop_text = (c.strip() for c in row)
        try:
            year = int(year_text)
        except ValueError:
            raise IngestError(f"census line {lineno}: bad year {year_text!r}") from None
        if not CENSUS_YEARS[0] <= year <= CENSUS_YEARS[1]:
            raise IngestError(
                f"census line {lineno}: census years are "
                f"{CENSUS_YEARS[0]}-{CENSUS_YEARS[1]}, got {year}"
            )
        try:
            state = State(state_text)
        except ValueError:
            raise IngestError(f"census line {lineno}: unknown state {state_text!r}") from None
        try:
            race = Race(race_text)
        except ValueError:
            raise IngestError(f"census line {lineno}: unknown race {race_text!r}") from None
        try:
            population = int(pop_text)
        except ValueError:
            raise IngestError(
                f"census line {lineno}: population must be integer persons, got {pop_text!r}"
            ) from None
        records.append(RawRecord(year, state, race, float(population), Source.CENSUS))
    return records


def apply_deletion_rule(records: Iterable[RawRecord], key: SeriesKey) -> list[RawRecord]:
    """Drop pre-2000 rows for Hawaiian series; identity for everything else. Idempotent."""
    records = list(records)
    if key.race is not Race.HAWAIIAN:
        return records
    return [r for r in records if r.year >= 2000]


def merge_sources(
    fred: Sequence[RawRecord],
    census: Sequence[RawRecord],
    key: SeriesKey,
) -> tuple[AnnualSeries, list[str]]:
    """Combine both sources into one contiguous series for the key.

    The deletion rule is applied first. On a year present in both sources the
    census value wins; a differing FRED value is reported in the returned
    warnings rather than raised.
    """
    for record in list(fred) + list(census):
        if record.key != key:
            raise IngestError(f"{key}: record for {record.key} passed to merge")
    combined = apply_deletion_rule(fred, key) + apply_deletion_rule(census, key)
    if not combined:
        raise IngestError(f"{key}: no records to merge")

    warnings: list[str] = []
    by_year: dict[int, RawRecord] = {}
    for record in combined:
        held = by_year.get(record.year)
        if held is None:
            by_year[record.year] = record
            continue
        census_rec, other = (
            (record, held) if record.source is Source.CENSUS else (held, record)
        )
        if census_rec.source is other.source:
            raise IngestError(f"{key}: duplicate {other.source.value} year {record.year}")
        if census_rec.population != other.population:
            warnings.append(
                f"{key}: year {record.year} in both sources "
                f"(FRED {other.population:g} vs CENSUS {census_rec.population:g}), census kept"
            )
        by_year[record.year] = census_rec

    years = sorted(by_year)
    for prev, current in zip(years, years[1:]):
        if current != prev + 1:
            raise IngestError(f"{key}: gap at {prev + 1}")
    series = make_series(key, years[0], [by_year[y].population for y in years])
    return series, warnings


def read_manifest(path: Path) -> dict[str, str]:
    """FILE,UNIT sidecar declaring per-file FRED units."""
    if not path.exists():
        raise IngestError(f"manifest not found: {path}")
    rows = list(csv.reader(io.StringIO(path.read_text(encoding="utf-8"))))
    if not rows or [c.strip() for c in rows[0]] != ["FILE", "UNIT"]:
        raise IngestError(f"{path}: expected header FILE,UNIT")
    units: dict[str, str] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise IngestError(f"{path} line {lineno}: expected 2 columns")
        name, unit = row[0].strip(), row[1].strip()
        if unit not in UNITS:
            raise IngestError(f"{path} line {lineno}: unknown unit {unit!r}")
        if name in units:
            raise IngestError(f"{path} line {lineno}: duplicate file entry {name!r}")
        units[name] = unit
    return units


@dataclass(frozen=True)
class Dataset:
    """All 30 series plus per-point source tags and collected warnings."""

    series: dict[SeriesKey, AnnualSeries]
    provenance: dict[SeriesKey, tuple[str, ...]] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    def sorted_keys(self) -> list[SeriesKey]:
        return sorted(self.series, key=lambda k: (k.state.value, k.race.value))


def fred_filename(key: SeriesKey) -> str:
    return f"{key.state.value}_{key.race.value}.csv"


def build_dataset(fred_dir: str | Path, census_file: str | Path) -> Dataset:
    """Assemble the full 30-series dataset from a FRED directory and census file.

    Every key must resolve to one FRED file (named STATE_RACE.csv, unit looked
    up in manifest.csv) and census rows; Hawaiian series span 2000-2022, all
    others 1990-2022.
    """
    fred_dir = Path(fred_dir)
    census_file = Path(census_file)
    if not census_file.exists():
        raise IngestError(f"census file not found: {census_file}")
    units = read_manifest(fred_dir / "manifest.csv")
    census_records = parse_census_csv(census_file.read_text(encoding="utf-8"))
    census_by_key: dict[SeriesKey, list[RawRecord]] = {}
    for record in census_records:
        census_by_key.setdefault(record.key, []).append(record)

    series: dict[SeriesKey, AnnualSeries] = {}
    provenance: dict[SeriesKey, tuple[str, ...]] = {}
    warnings: list[str] = []
    for key in ALL_KEYS:
        name = fred_filename(key)
        path = fred_dir / name
        if not path.exists():
            raise IngestError(f"{key}: missing FRED file {path}")
        if name not in units:
            raise IngestError(f"{key}: {name} not declared in manifest.csv")
        records, fred_warnings = parse_fred_csv(
            path.read_text(encoding="utf-8"), key, units[name]
        )
        warnings.extend(fred_warnings)
        merged, merge_warnings = merge_sources(records, census_by_key.get(key, []), key)
        warnings.extend(merge_warnings)

        expected_start = 2000 if key.race is Race.HAWAIIAN else 1990
        if merged.start_year != expected_start or merged.end_year != 2022:
            raise IngestError(
                f"{key}: series must span {expected_start}-2022, "
                f"got {merged.start_year}-{merged.end_year}"
            )
        census_years = {r.year for r in census_by_key.get(key, [])}
        series[key] = merged
        provenance[key] = tuple(
            "CENSUS" if year in census_years else "FRED" for year in merged.years
        )
    return Dataset(series=series, provenance=provenance, warnings=tuple(warnings))


def _format_number(value: float) -> str:
    # decimal notation only, so serialized datasets diff cleanly
    if value == int(value) and abs(value) < 2**53:
        return str(int(value))
    return np.format_float_positional(np.float64(value), trim="-")


def dataset_to_json(dataset: Dataset) -> str:
    """Stable JSON: keys sorted, numbers in plain decimal notation."""
    lines = ["{"]
    keys = dataset.sorted_keys()
    for i, key in enumerate(keys):
        s = dataset.series[key]
        values = ", ".join(_format_number(v) for v in s.values)
        comma = "," if i < len(keys) - 1 else ""
        lines.append(
            f'  "{key}": {{"start_year": {s.start_year}, "values": [{values}]}}{comma}'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def dataset_from_json(text: str) -> Dataset:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IngestError(f"malformed dataset JSON: {exc}") from None
    series: dict[SeriesKey, AnnualSeries] = {}
    for key_text, payload in doc.items():
        key = SeriesKey.parse(key_text)
        series[key] = make_series(key, int(payload["start_year"]), payload["values"])
    return Dataset(series=series)
