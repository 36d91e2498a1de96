"""Reading World Bank wide-format indicator files and single-country series."""
from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from typing import Iterable

from .core import Dataset
from .errors import EmptySeries, MissingHeader, RaggedRow, UnknownCountry

IDENTITY_COLUMNS = ("Country Name", "Country Code", "Indicator Name", "Indicator Code")
DEFAULT_YEARS = (1960, 2018)
SERIES_HEADER = "year,value"
_YEAR = re.compile(r"^\d{4}$")


@dataclass(frozen=True)
class RawIndicatorFile:
    metadata_lines: tuple[str, ...]
    header: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    years: tuple[int, ...]

    def year_column(self, year: int) -> int:
        return len(IDENTITY_COLUMNS) + self.years.index(year)


@dataclass(frozen=True)
class EmissionSeries:
    country_name: str
    country_code: str
    indicator_code: str
    points: tuple[tuple[int, float], ...]
    dropped_years: tuple[int, ...] = field(default=())

    @property
    def years(self) -> list[int]:
        return [y for y, _ in self.points]

    @property
    def values(self) -> list[float]:
        return [v for _, v in self.points]

    def to_dataset(self) -> Dataset:
        return Dataset([float(y) for y in self.years], self.values)


def _decode(data: bytes | str) -> str:
    if isinstance(data, bytes):
        return data.decode("utf-8-sig")
    return data.lstrip("﻿")


def parse_worldbank_csv(data: bytes | str) -> RawIndicatorFile:
    """Parse a World Bank indicator download.

    Lines before the ``Country Name`` header (``Data Source``, ``Last Updated
    Date``) are kept verbatim in ``metadata_lines``. A trailing empty header
    cell, which the official downloads carry, is tolerated and stripped.
    """
    text = _decode(data)
    lines = io.StringIO(text, newline="").readlines()
    header_at = None
    for i, line in enumerate(lines):
        cells = next(csv.reader([line]), [])
        if cells and cells[0].strip() == "Country Name":
            header_at = i
            break
    if header_at is None:
        raise MissingHeader("missing header: no line starts with 'Country Name'")

    metadata = tuple(line.rstrip("\r\n") for line in lines[:header_at])
    reader = csv.reader(io.StringIO("".join(lines[header_at:]), newline=""))
    header = [c.strip() for c in next(reader)]
    width = len(header)
    while header and header[-1] == "":
        header.pop()
    if tuple(header[:4]) != IDENTITY_COLUMNS:
        raise MissingHeader(f"missing header: identity columns are {header[:4]!r}")
    year_cells = header[4:]
    if not all(_YEAR.match(c) for c in year_cells):
        raise MissingHeader("missing header: non-year column after the identity columns")
    years = tuple(int(c) for c in year_cells)
    if any(b <= a for a, b in zip(years, years[1:])):
        raise MissingHeader("missing header: year columns are not strictly increasing")

    rows = []
    for cells in reader:
        if not cells or (len(cells) == 1 and cells[0].strip() == ""):
            continue
        if len(cells) != width:
            raise RaggedRow(header_at + reader.line_num, width, len(cells))
        rows.append(tuple(cells[: len(header)]))
    return RawIndicatorFile(metadata, tuple(header), tuple(rows), years)


def _parse_value(cell: str) -> float | None:
    try:
        value = float(cell)
    except ValueError:
        return None
    if not math.isfinite(value) or value < 0.0:
        return None
    return value


def extract_series(raw: RawIndicatorFile, country_code: str,
                   year_lo: int = DEFAULT_YEARS[0],
                   year_hi: int = DEFAULT_YEARS[1]) -> EmissionSeries:
    if year_lo > year_hi:
        raise ValueError(f"empty year window {year_lo}:{year_hi}")
    for y in (year_lo, year_hi):
        if y not in raw.years:
            raise ValueError(f"year {y} is not a column of this file")
    matches = [row for row in raw.rows if row[1] == country_code]
    if not matches:
        raise UnknownCountry(f"unknown country code {country_code!r}")
    if len(matches) > 1:
        raise UnknownCountry(f"country code {country_code!r} appears {len(matches)} times")
    row = matches[0]

    points, dropped = [], []
    for year in range(year_lo, year_hi + 1):
        value = _parse_value(row[raw.year_column(year)])
        if value is None:
            dropped.append(year)
        else:
            points.append((year, value))
    if not points:
        raise EmptySeries(f"{country_code}: no usable values in {year_lo}-{year_hi}")
    return EmissionSeries(row[0], row[1], row[3], tuple(points), tuple(dropped))


def series_to_csv(series: EmissionSeries) -> bytes:
    out = [SERIES_HEADER]
    out.extend(f"{year},{value!r}" for year, value in series.points)
    return ("\n".join(out) + "\n").encode("utf-8")


def read_series_csv(data: bytes | str, country_code: str = "",
                    country_name: str = "", indicator_code: str = "") -> EmissionSeries:
    """Inverse of :func:`series_to_csv`.

    Only interior gaps can be recovered as ``dropped_years``; the file holds
    no record of the window it was cut from.
    """
    lines = [ln.strip() for ln in _decode(data).splitlines() if ln.strip()]
    if not lines or lines[0].replace(" ", "").lower() != SERIES_HEADER:
        raise MissingHeader(f"missing header: series file must start with {SERIES_HEADER!r}")
    points = []
    for line_no, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 2:
            raise RaggedRow(line_no, 2, len(cells))
        year, value = int(cells[0]), _parse_value(cells[1])
        if value is None:
            raise ValueError(f"line {line_no}: bad value {cells[1]!r}")
        points.append((year, value))
    if not points:
        raise EmptySeries("series file has no data rows")
    years = [y for y, _ in points]
    if any(b <= a for a, b in zip(years, years[1:])):
        raise ValueError("series years must be strictly ascending")
    present = set(years)
    dropped = tuple(y for y in range(years[0], years[-1] + 1) if y not in present)
    return EmissionSeries(country_name, country_code, indicator_code, tuple(points), dropped)


def looks_like_series_csv(data: bytes | str) -> bool:
    head = _decode(data).lstrip().split("\n", 1)[0]
    return head.strip().replace(" ", "").lower() == SERIES_HEADER


def series_from_points(points: Iterable[tuple[int, float]], country_code: str = "") -> EmissionSeries:
    return EmissionSeries("", country_code, "", tuple((int(y), float(v)) for y, v in points), ())
