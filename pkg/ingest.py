"""
数据接入模块：读取CSV、推断列类型、解析日期与坐标、规范化变量名
"""
import csv
import io
import math
import os
import re
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

import config
from config import RunConfig
from logger import get_logger

log = get_logger("ingest")

_NUMBER_RE = re.compile(r"^[+-]?(?:(\d+)(?:\.(\d*))?|\.(\d+))(?:[eE]([+-]?\d+))?$")
_INTEGER_RE = re.compile(r"^[+-]?\d+$")
_DIGIT_RE = re.compile(r"\d")

MISSING = "missing"
TEXT = "text"
NUMBER = "number"
DATETIME = "datetime"
GEO = "geo"


class IngestError(ValueError):
    """数据加载错误"""

    def __init__(self, message: str, path: str = "", row_index: Optional[int] = None):
        super().__init__(message)
        self.path = path
        self.row_index = row_index


@dataclass(frozen=True)
class NumberPayload:
    value: float
    significant_digits: int
    decimal_places: int


@dataclass(frozen=True)
class DatetimePayload:
    epoch_seconds: float
    format_id: str


@dataclass(frozen=True)
class CellValue:
    tag: str
    raw: str
    parsed: Union[NumberPayload, DatetimePayload, None] = None

    @property
    def is_missing(self) -> bool:
        return self.tag == MISSING


@dataclass(frozen=True)
class CellParse:
    """单元格的独立解析结果（类型推断前）"""

    kind: str  # missing / datetime / integer / decimal / boolean / text
    number: Optional[NumberPayload] = None
    moment: Optional[DatetimePayload] = None


@dataclass(frozen=True)
class Column:
    raw_name: str
    normalized_name: str
    inferred_type: str
    cells: Tuple[CellValue, ...]
    missing_count: int

    def raw_values(self) -> List[str]:
        return [cell.raw for cell in self.cells]

    def non_missing(self) -> List[CellValue]:
        return [cell for cell in self.cells if cell.tag != MISSING]

    @property
    def is_numeric(self) -> bool:
        return self.inferred_type in config.NUMERIC_TYPES


@dataclass(frozen=True)
class Dataset:
    id: str
    name: str
    field_label: str
    columns: Tuple[Column, ...]
    row_count: int
    source_path: str

    def column(self, normalized_name: str) -> Optional[Column]:
        for col in self.columns:
            if col.normalized_name == normalized_name:
                return col
        return None

    @property
    def variables(self) -> List[str]:
        return [col.normalized_name for col in self.columns]

    def raw_rows(self) -> List[Tuple[str, ...]]:
        return list(zip(*(col.raw_values() for col in self.columns))) if self.columns else []

    def to_frame(self) -> pd.DataFrame:
        """原始文本组成的DataFrame（列名为规范化变量名）"""
        return pd.DataFrame(
            {col.normalized_name: col.raw_values() for col in self.columns},
            columns=[col.normalized_name for col in self.columns],
            dtype=object,
        )

    def to_csv_text(self) -> str:
        """按原始文本重新序列化"""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow([col.raw_name for col in self.columns])
        writer.writerows(self.raw_rows())
        return buffer.getvalue()


def normalize_variable_name(raw: str, synonyms: Optional[Dict[str, str]] = None) -> str:
    """去首尾空白、casefold、内部空白合并为下划线，再做同义词精确映射"""
    name = "_".join(raw.strip().casefold().split())
    if synonyms:
        name = synonyms.get(name, name)
    return name


def count_significant_digits(raw: str) -> Optional[Tuple[int, int]]:
    """按书写记录计算有效数字与小数位；非数字返回None"""
    match = _NUMBER_RE.match(raw.strip())
    if not match:
        return None
    int_part, frac_part, bare_frac, exponent = match.groups()
    if bare_frac is not None:
        int_part, frac_part = "", bare_frac
    frac_part = frac_part or ""
    digits = ((int_part or "") + frac_part).lstrip("0")
    significant = max(1, len(digits))
    shift = int(exponent) if exponent else 0
    decimal_places = max(0, len(frac_part) - shift)
    return significant, decimal_places


def parse_number(raw: str) -> Optional[NumberPayload]:
    counted = count_significant_digits(raw)
    if counted is None:
        return None
    value = float(raw.strip())
    if not math.isfinite(value):
        return None
    return NumberPayload(value=value, significant_digits=counted[0], decimal_places=counted[1])


@lru_cache(maxsize=None)
def _accepts_bare_numbers(formats: Tuple[str, ...]) -> bool:
    """是否有纯指令格式（如%Y%m%d）可以匹配不带分隔符的数字"""
    return any(not re.sub(r"%.", "", fmt) for fmt in formats)


def parse_datetime(raw: str, formats: Sequence[str]) -> Optional[DatetimePayload]:
    """按配置顺序尝试格式，首个匹配生效；无时区视为UTC"""
    text = raw.strip()
    if not _DIGIT_RE.search(text):
        return None
    if _NUMBER_RE.match(text) and not _accepts_bare_numbers(tuple(formats)):
        return None
    for fmt in formats:
        try:
            moment = datetime.strptime(text, fmt)
        except ValueError:
            continue
        if moment.tzinfo is None:
            moment = moment.replace(tzinfo=timezone.utc)
        return DatetimePayload(epoch_seconds=moment.timestamp(), format_id=fmt)
    return None


def parse_cell(raw: str, run_config: RunConfig, missing_tokens: Optional[frozenset] = None) -> CellParse:
    """单元格独立解析"""
    tokens = missing_tokens if missing_tokens is not None else frozenset(run_config.missing_tokens)
    if raw == "" or raw in tokens:
        return CellParse(kind=MISSING)
    moment = parse_datetime(raw, run_config.datetime_formats)
    if moment is not None:
        return CellParse(kind="datetime", moment=moment)
    number = parse_number(raw)
    if number is not None:
        kind = "integer" if _INTEGER_RE.match(raw.strip()) else "decimal"
        return CellParse(kind=kind, number=number)
    if raw.strip().casefold() in config.BOOLEAN_TOKENS:
        return CellParse(kind="boolean")
    return CellParse(kind=TEXT)


def geo_kind(normalized_name: str, run_config: RunConfig) -> Optional[str]:
    """按列名识别坐标列：含lat为纬度，其余为经度"""
    if normalized_name not in run_config.geo_column_names:
        return None
    return "latitude" if "lat" in normalized_name else "longitude"


def _in_geo_range(value: float, kind: str) -> bool:
    bound = 90.0 if kind == "latitude" else 180.0
    return -bound <= value <= bound


def infer_column_type(
    cells: Sequence[str],
    run_config: RunConfig,
    normalized_name: Optional[str] = None,
) -> Tuple[str, List[CellParse]]:
    """多数表决推断列类型，并列按 datetime > integer > decimal > boolean > text"""
    tokens = frozenset(run_config.missing_tokens)
    cache: Dict[str, CellParse] = {}
    parses = []
    for raw in cells:
        parsed = cache.get(raw)
        if parsed is None:
            parsed = parse_cell(raw, run_config, tokens)
            cache[raw] = parsed
        parses.append(parsed)

    kinds = Counter(p.kind for p in parses if p.kind != MISSING)
    if not kinds:
        return "text", parses

    geo = geo_kind(normalized_name, run_config) if normalized_name else None
    if geo is not None:
        in_range = sum(
            1 for p in parses if p.number is not None and _in_geo_range(p.number.value, geo)
        )
        votes = {
            "datetime": kinds["datetime"],
            geo: in_range,
            "boolean": kinds["boolean"],
            "text": sum(kinds.values()) - kinds["datetime"] - in_range - kinds["boolean"],
        }
        precedence = ["datetime", geo, "boolean", "text"]
    else:
        votes = {
            "datetime": kinds["datetime"],
            "integer": kinds["integer"],
            "decimal": kinds["integer"] + kinds["decimal"],
            "boolean": kinds["boolean"],
            "text": kinds["text"],
        }
        precedence = config.TYPE_PRECEDENCE

    best = max(votes.values())
    for candidate in precedence:
        if votes[candidate] == best:
            return candidate, parses
    return "text", parses


def _tag_cell(raw: str, parsed: CellParse, column_type: str) -> CellValue:
    if parsed.kind == MISSING:
        return CellValue(tag=MISSING, raw=raw)
    if column_type in ("integer", "decimal") and parsed.number is not None:
        return CellValue(tag=NUMBER, raw=raw, parsed=parsed.number)
    if column_type in config.GEO_TYPES and parsed.number is not None:
        if _in_geo_range(parsed.number.value, column_type):
            return CellValue(tag=GEO, raw=raw, parsed=parsed.number)
    if column_type == "datetime" and parsed.moment is not None:
        return CellValue(tag=DATETIME, raw=raw, parsed=parsed.moment)
    return CellValue(tag=TEXT, raw=raw)


def build_column(raw_name: str, raw_cells: Sequence[str], run_config: RunConfig) -> Column:
    normalized = normalize_variable_name(raw_name, run_config.synonym_map)
    column_type, parses = infer_column_type(raw_cells, run_config, normalized)
    cells = tuple(_tag_cell(raw, parsed, column_type) for raw, parsed in zip(raw_cells, parses))
    missing = sum(1 for cell in cells if cell.tag == MISSING)
    return Column(
        raw_name=raw_name,
        normalized_name=normalized,
        inferred_type=column_type,
        cells=cells,
        missing_count=missing,
    )


def read_csv_rows(path: str) -> Tuple[List[str], List[List[str]]]:
    """读取CSV：UTF-8（去BOM），单行表头，拒绝行长不一致"""
    try:
        with open(path, "r", encoding="utf-8-sig", newline="") as f:
            reader = csv.reader(f, strict=True)
            try:
                header = next(reader)
            except StopIteration:
                raise IngestError(f"{path}: 文件为空，缺少表头", path=path)
            rows = []
            for row in reader:
                if len(row) != len(header):
                    row_index = len(rows) + 1
                    raise IngestError(
                        f"{path}: 第 {row_index} 行数据（文件第 {reader.line_num} 行）有 {len(row)} 个字段，"
                        f"表头有 {len(header)} 个",
                        path=path,
                        row_index=row_index,
                    )
                rows.append(row)
    except OSError as e:
        raise IngestError(f"{path}: 无法读取文件 ({e.strerror or e})", path=path)
    except UnicodeDecodeError as e:
        raise IngestError(f"{path}: 不是UTF-8编码 ({e.reason})", path=path)
    except csv.Error as e:
        raise IngestError(f"{path}: CSV格式错误 ({e})", path=path)
    return header, rows


def _find_spec(path: str, run_config: RunConfig):
    target = os.path.abspath(path)
    for spec in run_config.datasets:
        if os.path.abspath(spec.path) == target:
            return spec
    return None


def load_dataset(
    path: str,
    run_config: RunConfig,
    dataset_id: Optional[str] = None,
    field_label: Optional[str] = None,
    name: Optional[str] = None,
) -> Dataset:
    """加载单个CSV为带类型的数据集"""
    spec = _find_spec(path, run_config)
    dataset_id = dataset_id or (spec.id if spec else os.path.splitext(os.path.basename(path))[0])
    field_label = field_label or (spec.field_label if spec else run_config.field_label)
    name = name or (spec.name if spec and spec.name else dataset_id)
    if not field_label or not field_label.strip():
        raise IngestError(f"{path}: field_label 不能为空", path=path)

    header, rows = read_csv_rows(path)
    columns = []
    seen = {}
    for position, raw_name in enumerate(header):
        column = build_column(raw_name, [row[position] for row in rows], run_config)
        if column.normalized_name in seen:
            raise IngestError(
                f"{path}: 列名 {raw_name!r} 与 {seen[column.normalized_name]!r} 规范化后重复"
                f"（{column.normalized_name}）",
                path=path,
            )
        seen[column.normalized_name] = raw_name
        columns.append(column)

    dataset = Dataset(
        id=dataset_id,
        name=name,
        field_label=field_label,
        columns=tuple(columns),
        row_count=len(rows),
        source_path=path,
    )
    log.info("已加载 %s: %d 行 × %d 列", dataset_id, dataset.row_count, len(columns))
    return dataset


def load_datasets(run_config: RunConfig) -> List[Dataset]:
    """按配置顺序加载全部数据集"""
    return [
        load_dataset(spec.path, run_config, dataset_id=spec.id, field_label=spec.field_label, name=spec.name)
        for spec in run_config.datasets
    ]
