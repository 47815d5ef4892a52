"""Synthetic FRED/census fixtures for tests and demo runs.

Generates plausible-looking population curves (trend plus mild noise) for all
30 (state, race) keys, written in the exact file layout ``build_dataset``
ingests. Fully deterministic for a given seed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from popcast.core import ALL_KEYS, Race, SeriesKey, State
from popcast.ingest import fred_filename

__all__ = ["synthetic_population", "write_fixture"]

_RACE_BASE = {
    Race.WHITE: 3_000_000,
    Race.BLACK: 900_000,
    Race.ASIAN: 600_000,
    Race.AMERICAN_INDIAN: 150_000,
    Race.HAWAIIAN: 40_000,
}

_STATE_SCALE = {
    State.AL: 0.6,
    State.CA: 2.4,
    State.HI: 0.35,
    State.NY: 1.8,
    State.TX: 2.0,
    State.WY: 0.12,
}


def synthetic_population(key: SeriesKey, seed: int = 0) -> np.ndarray:
    """Integer person counts for 1990-2022 (33 values), deterministic per (key, seed)."""
    rng = np.random.Generator(np.random.PCG64([seed, hash_key(key)]))
    base = _RACE_BASE[key.race] * _STATE_SCALE[key.state]
    growth = rng.uniform(0.004, 0.022)
    wobble = rng.normal(0.0, 0.006, size=33)
    years = np.arange(33)
    curve = base * (1.0 + growth) ** years * np.exp(np.cumsum(wobble))
    return np.maximum(np.round(curve), 1.0)


def hash_key(key: SeriesKey) -> int:
    text = str(key).encode("utf-8")
    out = 0
    for b in text:
        out = (out * 131 + b) % (2**61 - 1)
    return out


def write_fixture(root: str | Path, seed: int = 0) -> tuple[Path, Path]:
    """Write FRED files + manifest under root/fred and a census CSV at root/census.csv.

    Alternating keys use thousands units (values rounded to whole thousands)
    so the manifest path gets exercised. Hawaiian FRED files still carry
    1990-1999 rows; the ingest deletion rule removes them.

    Returns (fred_dir, census_path).
    """
    root = Path(root)
    fred_dir = root / "fred"
    fred_dir.mkdir(parents=True, exist_ok=True)

    manifest_lines = ["FILE,UNIT"]
    census_lines = ["YEAR,STATE,RACE,POPULATION"]
    for i, key in enumerate(ALL_KEYS):
        values = synthetic_population(key, seed)
        unit = "thousands" if i % 2 else "persons"
        if unit == "thousands":
            values = np.round(values / 1000.0) * 1000.0
            values = np.maximum(values, 1000.0)
        lines = ["DATE,VALUE"]
        for offset in range(30):  # 1990-2019 from FRED
            year = 1990 + offset
            v = values[offset]
            cell = str(int(v)) if unit == "persons" else str(int(v) // 1000)
            lines.append(f"{year}-01-01,{cell}")
        (fred_dir / fred_filename(key)).write_text("\n".join(lines) + "\n", encoding="utf-8")
        manifest_lines.append(f"{fred_filename(key)},{unit}")
        for offset in range(30, 33):  # 2020-2022 from census
            year = 1990 + offset
            census_lines.append(
                f"{year},{key.state.value},{key.race.value},{int(values[offset])}"
            )
    (fred_dir / "manifest.csv").write_text("\n".join(manifest_lines) + "\n", encoding="utf-8")
    census_path = root / "census.csv"
    census_path.write_text("\n".join(census_lines) + "\n", encoding="utf-8")
    return fred_dir, census_path
