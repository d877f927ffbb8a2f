"""
质量指标计算：数量、准确性、粒度、完整性、唯一性、精度、合规性
"""
import math
import re
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import config
from config import RunConfig
from ingest import DATETIME, GEO, MISSING, NUMBER, Column, Dataset, normalize_variable_name
from logger import get_logger
from utils import stats

log = get_logger("indices")

_INTEGER_RE = re.compile(r"^[+-]?\d+$")


class NotEvaluableError(ValueError):
    """指标无法计算（对应问卷中的“无法评价”）"""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class NotEvaluable:
    reason: str

    def to_dict(self) -> Dict:
        return {"status": "not_evaluable", "reason": self.reason}


@dataclass(frozen=True)
class Quantity:
    rows: int
    non_missing_cells: int


@dataclass(frozen=True)
class Completeness:
    overall: float
    per_column: Dict[str, float]
    missing_grid: Dict = field(default_factory=dict)


@dataclass(frozen=True)
class Uniqueness:
    distinct_row_ratio: float
    per_column: Dict[str, float]


@dataclass(frozen=True)
class Precision:
    per_column: Dict[str, Dict[str, Dict[str, float]]]
    excluded_columns: List[str]

    @property
    def headline(self) -> float:
        """各数值列有效数字中位数的平均"""
        medians = [col["significant_digits"]["median"] for col in self.per_column.values()]
        return sum(medians) / len(medians)


@dataclass(frozen=True)
class Accuracy:
    per_column: Dict[str, Dict[str, int]]
    anomalous_cells: int
    non_missing_cells: int
    overall_ratio: float


@dataclass(frozen=True)
class Compliance:
    per_column: Dict[str, float]
    overall: float


@dataclass(frozen=True)
class GranularityEntry:
    unit: str  # seconds | kilometers
    median_interval: float
    samples: int


IndexResult = Union[Quantity, Completeness, Uniqueness, Precision, Accuracy, Compliance, NotEvaluable]


def _result_to_dict(result) -> Dict:
    if isinstance(result, NotEvaluable):
        return result.to_dict()
    payload = {"status": "ok", **asdict(result)}
    if isinstance(result, Precision):
        payload["headline"] = result.headline
    return payload


@dataclass(frozen=True)
class QualityProfile:
    dataset_id: str
    quantity: IndexResult
    completeness: IndexResult
    uniqueness: IndexResult
    precision: IndexResult
    accuracy: IndexResult
    compliance: IndexResult
    granularity: Dict[str, Union[GranularityEntry, NotEvaluable]]

    def headline(self, index: str) -> Optional[float]:
        """报告排名使用的标量；不可评价时返回None"""
        if index.startswith("granularity:"):
            entry = self.granularity.get(index.split(":", 1)[1])
            return entry.median_interval if isinstance(entry, GranularityEntry) else None
        result = getattr(self, index)
        if isinstance(result, NotEvaluable):
            return None
        if isinstance(result, Quantity):
            return float(result.rows)
        if isinstance(result, Completeness):
            return result.overall
        if isinstance(result, Uniqueness):
            return result.distinct_row_ratio
        if isinstance(result, Precision):
            return result.headline
        if isinstance(result, Accuracy):
            return result.overall_ratio
        if isinstance(result, Compliance):
            return result.overall
        return None

    def to_dict(self) -> Dict:
        return {
            "dataset_id": self.dataset_id,
            "quantity": _result_to_dict(self.quantity),
            "completeness": _result_to_dict(self.completeness),
            "uniqueness": _result_to_dict(self.uniqueness),
            "precision": _result_to_dict(self.precision),
            "accuracy": _result_to_dict(self.accuracy),
            "compliance": _result_to_dict(self.compliance),
            "granularity": {
                name: entry.to_dict() if isinstance(entry, NotEvaluable) else {"status": "ok", **asdict(entry)}
                for name, entry in self.granularity.items()
            },
        }


def _require_rows(dataset: Dataset):
    if dataset.row_count == 0 or not dataset.columns:
        raise NotEvaluableError("数据集没有数据行")


def quantity(dataset: Dataset) -> Quantity:
    """数量：行数与非缺失单元格数"""
    total = dataset.row_count * len(dataset.columns)
    missing = sum(col.missing_count for col in dataset.columns)
    return Quantity(rows=dataset.row_count, non_missing_cells=total - missing)


def missing_grid(dataset: Dataset, blocks: int = config.HEATMAP_MAX_BLOCKS) -> Dict:
    """缺失热力图：按行分块，块内有缺失记为1"""
    block_size = max(1, math.ceil(dataset.row_count / blocks)) if dataset.row_count else 1
    grid = {}
    for col in dataset.columns:
        flags = []
        for start in range(0, dataset.row_count, block_size):
            block = col.cells[start:start + block_size]
            flags.append(1 if any(cell.tag == MISSING for cell in block) else 0)
        grid[col.normalized_name] = flags
    return {"block_size": block_size, "columns": grid}


def completeness(dataset: Dataset, blocks: int = config.HEATMAP_MAX_BLOCKS) -> Completeness:
    """完整性：1 − 缺失率"""
    _require_rows(dataset)
    rows = dataset.row_count
    per_column = {col.normalized_name: 1.0 - col.missing_count / rows for col in dataset.columns}
    missing = sum(col.missing_count for col in dataset.columns)
    total = rows * len(dataset.columns)
    return Completeness(
        overall=(total - missing) / total,
        per_column=per_column,
        missing_grid=missing_grid(dataset, blocks),
    )


def uniqueness(dataset: Dataset) -> Uniqueness:
    """唯一性：按原始文本元组计算不重复行比例"""
    _require_rows(dataset)
    frame = dataset.to_frame()
    rows = dataset.row_count
    distinct_rows = rows - int(frame.duplicated(keep="first").sum())
    per_column = {name: frame[name].nunique(dropna=False) / rows for name in frame.columns}
    return Uniqueness(distinct_row_ratio=distinct_rows / rows, per_column=per_column)


def precision(dataset: Dataset) -> Precision:
    """精度：数值列有效数字与小数位的最小/中位/最大"""
    numeric = [col for col in dataset.columns if col.is_numeric]
    if not numeric:
        raise NotEvaluableError("没有数值列")
    per_column = {}
    excluded = []
    for col in numeric:
        payloads = [cell.parsed for cell in col.cells if cell.tag in (NUMBER, GEO)]
        if not payloads:
            log.warning("%s: 列 %s 没有可解析的数值，已从精度中排除", dataset.id, col.normalized_name)
            excluded.append(col.normalized_name)
            continue
        per_column[col.normalized_name] = {
            "significant_digits": stats.summarize([p.significant_digits for p in payloads]),
            "decimal_places": stats.summarize([p.decimal_places for p in payloads]),
        }
    if not per_column:
        raise NotEvaluableError("所有数值列都没有可解析的数值")
    return Precision(per_column=per_column, excluded_columns=excluded)


def _violates_type(raw: str, tag: str, column: Column) -> bool:
    kind = column.inferred_type
    if kind == "integer":
        return tag != NUMBER or not _INTEGER_RE.match(raw.strip())
    if kind == "decimal":
        return tag != NUMBER
    if kind in config.GEO_TYPES:
        return tag != GEO
    if kind == "datetime":
        return tag != DATETIME
    if kind == "boolean":
        return raw.strip().casefold() not in config.BOOLEAN_TOKENS
    return False


def _format_rules_for(column: Column, run_config: RunConfig) -> List[re.Pattern]:
    return [
        re.compile(rule.pattern)
        for rule in run_config.format_rules
        if column.normalized_name in rule.columns
    ]


def column_anomalies(col: Column, run_config: RunConfig) -> Tuple[Dict[str, int], Set[int]]:
    """单列的三类异常计数，以及被标记的行号集合"""
    flagged = set()
    counts = {"type_violations": 0, "range_outliers": 0, "format_violations": 0}

    for row, cell in enumerate(col.cells):
        if cell.tag != MISSING and _violates_type(cell.raw, cell.tag, col):
            counts["type_violations"] += 1
            flagged.add(row)

    if col.is_numeric:
        numbered = [(row, cell.parsed.value) for row, cell in enumerate(col.cells) if cell.tag in (NUMBER, GEO)]
        if numbered:
            low, high = stats.iqr_fences([value for _, value in numbered])
            for row, value in numbered:
                if value < low or value > high:
                    counts["range_outliers"] += 1
                    flagged.add(row)

    for pattern in _format_rules_for(col, run_config):
        for row, cell in enumerate(col.cells):
            if cell.tag != MISSING and not pattern.fullmatch(cell.raw.strip()):
                counts["format_violations"] += 1
                flagged.add(row)
    return counts, flagged


def accuracy(dataset: Dataset, run_config: RunConfig) -> Accuracy:
    """准确性：类型违规、IQR离群值（3倍）、格式违规"""
    _require_rows(dataset)
    per_column = {}
    anomalous = 0
    non_missing = 0
    for col in dataset.columns:
        counts, flagged = column_anomalies(col, run_config)
        per_column[col.normalized_name] = counts
        anomalous += len(flagged)
        non_missing += len(col.cells) - col.missing_count

    ratio = anomalous / non_missing if non_missing else 0.0
    return Accuracy(
        per_column=per_column,
        anomalous_cells=anomalous,
        non_missing_cells=non_missing,
        overall_ratio=ratio,
    )


def _modal_format(col: Column, run_config: RunConfig) -> Optional[str]:
    counts = Counter(cell.parsed.format_id for cell in col.cells if cell.tag == DATETIME)
    if not counts:
        return None
    order = {fmt: i for i, fmt in enumerate(run_config.datetime_formats)}
    return sorted(counts.items(), key=lambda item: (-item[1], order.get(item[0], len(order))))[0][0]


def compliance(dataset: Dataset, run_config: RunConfig) -> Compliance:
    """合规性：日期列的主流格式一致率、数值列的纯数值比例"""
    _require_rows(dataset)
    per_column = {}
    for col in dataset.columns:
        present = col.non_missing()
        if not present:
            continue
        if col.inferred_type == "datetime":
            modal = _modal_format(col, run_config)
            matching = sum(1 for cell in present if cell.tag == DATETIME and cell.parsed.format_id == modal)
            per_column[col.normalized_name] = matching / len(present)
        elif col.is_numeric:
            pure = sum(1 for cell in present if cell.tag in (NUMBER, GEO))
            per_column[col.normalized_name] = pure / len(present)
        else:
            per_column[col.normalized_name] = 1.0
    if not per_column:
        raise NotEvaluableError("没有可评分的列")
    return Compliance(per_column=per_column, overall=sum(per_column.values()) / len(per_column))


def _first_column_of(dataset: Dataset, kind: str) -> Optional[Column]:
    for col in dataset.columns:
        if col.inferred_type == kind:
            return col
    return None


def _temporal_granularity(col: Column) -> GranularityEntry:
    moments = [cell.parsed.epoch_seconds for cell in col.cells if cell.tag == DATETIME]
    if len(moments) < 2:
        raise NotEvaluableError("可用时间戳少于2个")
    intervals = stats.consecutive_intervals(moments)
    return GranularityEntry(unit="seconds", median_interval=stats.median(intervals), samples=len(moments))


def _geographic_granularity(dataset: Dataset) -> GranularityEntry:
    lat_col = _first_column_of(dataset, "latitude")
    lon_col = _first_column_of(dataset, "longitude")
    if lat_col is None or lon_col is None:
        raise NotEvaluableError("地理粒度需要纬度列和经度列")
    points = [
        (lat.parsed.value, lon.parsed.value)
        for lat, lon in zip(lat_col.cells, lon_col.cells)
        if lat.tag == GEO and lon.tag == GEO
    ]
    if len(points) < 2:
        raise NotEvaluableError("可用坐标点少于2个")
    distances = stats.nearest_neighbor_km([p[0] for p in points], [p[1] for p in points])
    return GranularityEntry(unit="kilometers", median_interval=stats.median(distances), samples=len(points))


def granularity(
    dataset: Dataset,
    important_variables: Sequence[str],
    synonyms: Optional[Dict[str, str]] = None,
) -> Dict[str, Union[GranularityEntry, NotEvaluable]]:
    """粒度：重要变量相邻观测间隔的中位数（秒或公里）"""
    result = {}
    for variable in important_variables:
        name = normalize_variable_name(variable, synonyms)
        try:
            if name == config.GEO_LOCATION_TOKEN:
                result[name] = _geographic_granularity(dataset)
                continue
            col = dataset.column(name)
            if col is None:
                log.warning("%s: 重要变量 %s 不在数据集中，已跳过", dataset.id, name)
                continue
            if col.inferred_type == "datetime":
                result[name] = _temporal_granularity(col)
            elif col.inferred_type in config.GEO_TYPES:
                result[name] = _geographic_granularity(dataset)
            else:
                raise NotEvaluableError(f"变量类型为 {col.inferred_type}，不是时间或坐标")
        except NotEvaluableError as e:
            result[name] = NotEvaluable(e.reason)
    return result


def _evaluate(fn, *args):
    try:
        return fn(*args)
    except NotEvaluableError as e:
        return NotEvaluable(e.reason)


def profile_dataset(
    dataset: Dataset,
    run_config: RunConfig,
    important_variables: Optional[Sequence[str]] = None,
) -> QualityProfile:
    """计算全部七个质量指标"""
    if important_variables is None:
        important_variables = run_config.important_variables_for(dataset.id)
    return QualityProfile(
        dataset_id=dataset.id,
        quantity=quantity(dataset),
        completeness=_evaluate(completeness, dataset, run_config.heatmap_blocks),
        uniqueness=_evaluate(uniqueness, dataset),
        precision=_evaluate(precision, dataset),
        accuracy=_evaluate(accuracy, dataset, run_config),
        compliance=_evaluate(compliance, dataset, run_config),
        granularity=granularity(dataset, important_variables, run_config.synonym_map),
    )
