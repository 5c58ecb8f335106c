"""Bibliographic record ingestion: parsing, keyword normalization, partitioning."""

from __future__ import annotations

import json
import logging
import multiprocessing as mp
import re
from pathlib import Path
from typing import Any, BinaryIO, Iterable, Sequence

from .config import MAX_INPUT_FILE_BYTES, PARSE_CHUNK_LINES
from .errors import CorpusFormatError, RecordParseError
from .models import BibRecord, ParseResult, PartitionResult, YearBucket

FORMATS = ("tsv", "jsonl")
REQUIRED_COLUMNS = ("id", "year", "field", "keywords")
OPTIONAL_COLUMNS = ("language",)
KEYWORD_SEPARATOR = ";"

_YEAR_TEXT = re.compile(r"[1-9][0-9]{3}")

logger = logging.getLogger("drift_app.ingest")


def normalize_keyword(raw: str) -> str | None:
    """Lowercase and collapse whitespace; ``None`` means drop the token."""
    value = " ".join(raw.lower().split())
    return value or None


def _normalize_keywords(raw_keywords: Iterable[str]) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for raw in raw_keywords:
        keyword = normalize_keyword(raw)
        if keyword is not None:
            seen.setdefault(keyword, None)
    return tuple(seen)


def _build_record(
    record_id: Any,
    year: int,
    field_code: Any,
    keywords: Iterable[str],
    language: Any,
) -> BibRecord:
    if not isinstance(record_id, str) or not record_id.strip():
        raise ValueError("missing id")
    if not isinstance(field_code, str) or not field_code.strip():
        raise ValueError("missing field")
    if language is not None and not isinstance(language, str):
        raise ValueError("language must be a string")
    language_tag = language.strip() if language else ""
    return BibRecord(
        record_id=record_id.strip(),
        year=year,
        field_code=field_code.strip(),
        keywords=_normalize_keywords(keywords),
        language=language_tag or None,
    )


def _tsv_year(raw: str) -> int:
    text = raw.strip()
    if not _YEAR_TEXT.fullmatch(text):
        raise ValueError("invalid year")
    return int(text)


def _jsonl_year(raw: Any) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int) or not 1000 <= raw <= 9999:
        raise ValueError("invalid year")
    return raw


def _header_columns(header_line: str, source: str | None) -> dict[str, int]:
    names = [name.strip() for name in header_line.split("\t")]
    columns: dict[str, int] = {}
    for index, name in enumerate(names):
        if name in columns:
            raise CorpusFormatError(f"duplicate header column {name!r}", source)
        columns[name] = index
    missing = [name for name in REQUIRED_COLUMNS if name not in columns]
    if missing:
        raise CorpusFormatError(f"missing required column(s): {', '.join(missing)}", source)
    unknown = [name for name in names if name not in REQUIRED_COLUMNS + OPTIONAL_COLUMNS]
    if unknown:
        logger.warning("%s: ignoring unknown column(s): %s", source or "input", ", ".join(unknown))
    return columns


def _parse_tsv_chunk(
    payload: tuple[list[tuple[int, str]], dict[str, int], int],
) -> tuple[list[BibRecord], list[tuple[int, str]]]:
    lines, columns, width = payload
    records: list[BibRecord] = []
    errors: list[tuple[int, str]] = []
    language_index = columns.get("language")
    for line_number, line in lines:
        parts = line.split("\t")
        if len(parts) != width:
            errors.append((line_number, f"expected {width} columns, found {len(parts)}"))
            continue
        try:
            record = _build_record(
                parts[columns["id"]],
                _tsv_year(parts[columns["year"]]),
                parts[columns["field"]],
                parts[columns["keywords"]].split(KEYWORD_SEPARATOR),
                parts[language_index] if language_index is not None else None,
            )
        except ValueError as exc:
            errors.append((line_number, str(exc)))
            continue
        records.append(record)
    return records, errors


def _parse_jsonl_chunk(
    payload: tuple[list[tuple[int, str]], dict[str, int], int],
) -> tuple[list[BibRecord], list[tuple[int, str]]]:
    lines = payload[0]
    records: list[BibRecord] = []
    errors: list[tuple[int, str]] = []
    for line_number, line in lines:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            errors.append((line_number, f"invalid JSON: {exc.msg}"))
            continue
        if not isinstance(obj, dict):
            errors.append((line_number, "not a JSON object"))
            continue
        missing = [key for key in REQUIRED_COLUMNS if key not in obj]
        if missing:
            errors.append((line_number, f"missing key(s): {', '.join(missing)}"))
            continue
        keywords = obj["keywords"]
        if not isinstance(keywords, list) or not all(isinstance(kw, str) for kw in keywords):
            errors.append((line_number, "keywords must be an array of strings"))
            continue
        try:
            record = _build_record(
                obj["id"],
                _jsonl_year(obj["year"]),
                obj["field"],
                keywords,
                obj.get("language"),
            )
        except ValueError as exc:
            errors.append((line_number, str(exc)))
            continue
        records.append(record)
    return records, errors


def _chunks(lines: list[tuple[int, str]], size: int) -> list[list[tuple[int, str]]]:
    return [lines[start : start + size] for start in range(0, len(lines), size)]


def parse_records(
    stream: BinaryIO,
    fmt: str,
    *,
    strict: bool = False,
    source: str | None = None,
    workers: int = 1,
    chunk_lines: int = PARSE_CHUNK_LINES,
) -> ParseResult:
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")
    try:
        text = stream.read().decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise CorpusFormatError(f"input is not valid UTF-8 ({exc.reason} at byte {exc.start})", source) from exc

    raw_lines = text.split("\n")
    numbered = [
        (index + 1, line.rstrip("\r"))
        for index, line in enumerate(raw_lines)
    ]

    if fmt == "tsv":
        if not numbered or not numbered[0][1].strip():
            raise CorpusFormatError("missing header line", source)
        header_line = numbered[0][1]
        columns = _header_columns(header_line, source)
        width = len(header_line.split("\t"))
        body = [(number, line) for number, line in numbered[1:] if line.strip()]
        worker_fn = _parse_tsv_chunk
    else:
        columns = {}
        width = 0
        body = [(number, line) for number, line in numbered if line.strip()]
        worker_fn = _parse_jsonl_chunk

    chunk_size = max(1, chunk_lines)
    payloads = [(chunk, columns, width) for chunk in _chunks(body, chunk_size)]
    if workers > 1 and len(payloads) > 1:
        ctx = mp.get_context("spawn")
        with ctx.Pool(processes=min(workers, len(payloads))) as pool:
            parts = pool.map(worker_fn, payloads)
    else:
        parts = [worker_fn(payload) for payload in payloads]

    result = ParseResult()
    for records, errors in parts:
        result.records.extend(records)
        result.errors.extend(RecordParseError(number, reason, source) for number, reason in errors)

    if result.errors and strict:
        raise result.errors[0]
    return result


def parse_paths(
    paths: Sequence[Path],
    fmt: str,
    *,
    strict: bool = False,
    workers: int = 1,
) -> ParseResult:
    combined = ParseResult()
    for path in paths:
        size = path.stat().st_size
        if size > MAX_INPUT_FILE_BYTES:
            raise CorpusFormatError(
                f"input file is too large ({size} bytes); limit is {MAX_INPUT_FILE_BYTES} bytes",
                str(path),
            )
        with path.open("rb") as handle:
            parsed = parse_records(handle, fmt, strict=strict, source=str(path), workers=workers)
        logger.info("Parsed %d record(s) from %s (%d error(s)).", len(parsed.records), path, len(parsed.errors))
        combined.records.extend(parsed.records)
        combined.errors.extend(parsed.errors)
    return combined


def _check_tsv_value(value: str, what: str) -> str:
    if any(ch in value for ch in "\t\n\r"):
        raise ValueError(f"{what} {value!r} cannot be written as TSV")
    return value


def serialize_records(records: Sequence[BibRecord], fmt: str) -> bytes:
    if fmt == "jsonl":
        lines = []
        for record in records:
            obj: dict[str, Any] = {
                "id": record.record_id,
                "year": record.year,
                "field": record.field_code,
                "keywords": list(record.keywords),
            }
            if record.language is not None:
                obj["language"] = record.language
            lines.append(json.dumps(obj, ensure_ascii=False))
        return "".join(line + "\n" for line in lines).encode("utf-8")
    if fmt != "tsv":
        raise ValueError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")

    with_language = any(record.language is not None for record in records)
    header = list(REQUIRED_COLUMNS) + (["language"] if with_language else [])
    out = ["\t".join(header)]
    for record in records:
        for keyword in record.keywords:
            if KEYWORD_SEPARATOR in keyword:
                raise ValueError(f"keyword {keyword!r} contains {KEYWORD_SEPARATOR!r}")
        row = [
            _check_tsv_value(record.record_id, "id"),
            str(record.year),
            _check_tsv_value(record.field_code, "field"),
            KEYWORD_SEPARATOR.join(_check_tsv_value(kw, "keyword") for kw in record.keywords),
        ]
        if with_language:
            row.append(_check_tsv_value(record.language or "", "language"))
        out.append("\t".join(row))
    return ("\n".join(out) + "\n").encode("utf-8")


def partition(
    records: Iterable[BibRecord],
    fields: Sequence[str],
    years: tuple[int, int],
    *,
    language: str | None = None,
) -> PartitionResult:
    """Split records into (field, year) buckets; every cross-product bucket exists."""
    start, end = years
    if not fields:
        raise ValueError("at least one field is required")
    if end < start:
        raise ValueError("empty year range")

    field_order = tuple(dict.fromkeys(fields))
    year_order = tuple(range(start, end + 1))
    grouped: dict[tuple[str, int], list[BibRecord]] = {
        (field_code, year): [] for field_code in field_order for year in year_order
    }
    filtered = 0
    for record in records:
        if language is not None and record.language != language:
            filtered += 1
            continue
        key = (record.field_code, record.year)
        bucket = grouped.get(key)
        if bucket is None:
            filtered += 1
            continue
        bucket.append(record)

    if filtered:
        logger.info("Filtered out %d record(s) outside the requested fields/years/language.", filtered)
    buckets = {
        key: YearBucket(field_code=key[0], year=key[1], records=tuple(items))
        for key, items in grouped.items()
    }
    return PartitionResult(buckets=buckets, fields=field_order, years=year_order, filtered_count=filtered)
