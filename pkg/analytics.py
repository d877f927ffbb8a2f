"""
问卷分析：无法评价比例、变异系数、错误回答率、Simpson多样性、Fisher精确检验
"""
import json
import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import hypergeom

import config
from logger import get_logger

log = get_logger("analytics")

ALL_CATEGORIES = "all"
_RATING_RE = re.compile(r"[1-5]")
# pandas C解析器: "Expected 7 fields in line 3, saw 8"
_PARSER_LINE_RE = re.compile(r"line (\d+)")


class AnalyticsError(ValueError):
    """分析前提不满足"""


class ResponseFormatError(AnalyticsError):
    """问卷/真值文件格式错误"""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"第 {line} 行: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class AssessmentResponse:
    participant_id: str
    experience_category: str
    condition: str
    dataset_id: str
    index: str
    rating: Optional[int] = None
    selected_variables: Optional[FrozenSet[str]] = None

    @property
    def is_rating(self) -> bool:
        return self.rating is not None


@dataclass(frozen=True)
class GroundTruthMatrix:
    grades: Dict[Tuple[str, str], str]
    comparison_groups: List[Tuple[str, ...]]
    fields: Dict[str, str]

    def grade(self, dataset_id: str, index: str) -> Optional[str]:
        return self.grades.get((dataset_id, index))

    def field_of(self, dataset_id: str) -> str:
        return self.fields.get(dataset_id, "unknown")


@dataclass(frozen=True)
class FisherResult:
    p_two_sided: float
    p_less: float
    p_greater: float
    point_probability: float


def _parse_record(row: Dict[str, str], line: int) -> AssessmentResponse:
    category = row["experience_category"].strip()
    if category not in config.EXPERIENCE_CATEGORIES:
        raise ResponseFormatError(f"未知的经验类别 {category!r}", line)
    condition = row["condition"].strip()
    if condition not in config.CONDITIONS:
        raise ResponseFormatError(f"未知的条件 {condition!r}", line)
    index = row["index"].strip()
    rating_text = row["rating"].strip()
    selected_text = row["selected_variables"].strip()
    participant = row["participant_id"].strip()
    dataset_id = row["dataset_id"].strip()
    if not participant or not dataset_id:
        raise ResponseFormatError("participant_id 与 dataset_id 不能为空", line)

    if index in config.VARIABLE_INDICES:
        if rating_text:
            raise ResponseFormatError(f"变量指标 {index} 不应有评分", line)
        selected = frozenset(v.strip() for v in selected_text.split(";") if v.strip())
        return AssessmentResponse(participant, category, condition, dataset_id, index, selected_variables=selected)

    if index not in config.QUALITY_INDICES and index != config.UTILITY_INDEX:
        raise ResponseFormatError(f"未知的指标 {index!r}", line)
    if selected_text:
        raise ResponseFormatError(f"质量指标 {index} 不应有变量选择", line)
    if not _RATING_RE.fullmatch(rating_text):
        raise ResponseFormatError(f"评分必须是1到5的整数，实际为 {rating_text!r}", line)
    return AssessmentResponse(participant, category, condition, dataset_id, index, rating=int(rating_text))


def load_responses(path: str) -> List[AssessmentResponse]:
    """读取问卷CSV；错误信息带文件行号"""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8-sig")
    except pd.errors.EmptyDataError:
        raise ResponseFormatError("文件为空", 1)
    except (OSError, UnicodeDecodeError) as e:
        raise ResponseFormatError(f"无法读取 {path}: {e}")
    except pd.errors.ParserError as e:
        found = _PARSER_LINE_RE.search(str(e))
        raise ResponseFormatError(f"CSV格式错误: {e}", int(found.group(1)) if found else None)

    missing = [c for c in config.RESPONSE_COLUMNS if c not in frame.columns]
    if missing:
        raise ResponseFormatError(f"缺少列 {missing}", 1)
    if frame.empty:
        raise ResponseFormatError("没有任何回答记录", 2)

    responses = []
    seen = {}
    for offset, row in enumerate(frame.to_dict(orient="records")):
        line = offset + 2
        record = _parse_record(row, line)
        key = (record.participant_id, record.condition, record.dataset_id, record.index)
        if key in seen:
            raise ResponseFormatError(f"与第 {seen[key]} 行重复", line)
        seen[key] = line
        responses.append(record)
    log.info("已读取 %d 条回答", len(responses))
    return responses


def parse_ground_truth(raw: Dict) -> GroundTruthMatrix:
    if not isinstance(raw, dict) or "grades" not in raw:
        raise ResponseFormatError("真值文件缺少 grades")
    grades = {}
    for dataset_id, by_index in raw["grades"].items():
        for index, grade in by_index.items():
            if grade not in config.GRADE_ORDER:
                raise ResponseFormatError(f"{dataset_id}/{index}: 等级必须是 H/M/L，实际为 {grade!r}")
            grades[(dataset_id, index)] = grade

    groups = []
    for group in raw.get("comparison_groups", []):
        group = tuple(group)
        if len(group) != 3 or len(set(group)) != 3:
            raise ResponseFormatError(f"比较组必须是三个不同的数据集: {list(group)}")
        indices = {index for (d, index) in grades if d in group}
        for index in sorted(indices):
            assigned = [grades.get((d, index)) for d in group]
            if sorted(g for g in assigned if g) != ["H", "L", "M"]:
                raise ResponseFormatError(f"比较组 {list(group)} 的 {index} 等级必须恰好是 H/M/L")
        groups.append(group)
    return GroundTruthMatrix(grades=grades, comparison_groups=groups, fields=dict(raw.get("fields", {})))


def load_ground_truth(path: str) -> GroundTruthMatrix:
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except OSError as e:
        raise ResponseFormatError(f"无法读取 {path}: {e}")
    except json.JSONDecodeError as e:
        raise ResponseFormatError(f"真值文件不是合法JSON: {e.msg}", e.lineno)
    return parse_ground_truth(raw)


def _matches(record: AssessmentResponse, category, condition, index) -> bool:
    return (
        (category in (None, ALL_CATEGORIES) or record.experience_category == category)
        and (condition is None or record.condition == condition)
        and (index is None or record.index == index)
    )


def _quality_ratings(responses: Iterable[AssessmentResponse], category=None, condition=None, index=None):
    return [
        r for r in responses
        if r.is_rating and r.index in config.QUALITY_INDICES and _matches(r, category, condition, index)
    ]


def cannot_evaluate_ratio(
    responses: Sequence[AssessmentResponse],
    category: Optional[str] = None,
    condition: Optional[str] = None,
    index: Optional[str] = None,
) -> float:
    """回答“无法评价”(5)的比例"""
    selected = _quality_ratings(responses, category, condition, index)
    if not selected:
        raise AnalyticsError("筛选结果为空")
    return sum(1 for r in selected if r.rating == config.CANNOT_EVALUATE) / len(selected)


def coefficient_of_variation(ratings: Sequence[float]) -> float:
    """变异系数 = 总体标准差 / 平均值"""
    if len(ratings) < 2:
        raise AnalyticsError("变异系数至少需要2个评分")
    values = np.asarray(ratings, dtype=float)
    mean = values.mean()
    if mean <= 0:
        raise AnalyticsError("平均值必须为正")
    return float(values.std(ddof=0) / mean)


def _pair_counts(
    responses: Sequence[AssessmentResponse],
    truth: GroundTruthMatrix,
    category=None,
    condition=None,
    index=None,
) -> Dict[str, List[int]]:
    """每个参与者的 [错误对数, 可比较对数]"""
    ratings = {
        (r.participant_id, r.condition, r.index, r.dataset_id): r.rating
        for r in _quality_ratings(responses, category, condition, index)
    }
    keys = sorted({(p, c, i) for (p, c, i, _) in ratings})
    counts: Dict[str, List[int]] = defaultdict(lambda: [0, 0])
    for participant, cond, idx in keys:
        for group in truth.comparison_groups:
            graded = [(d, truth.grade(d, idx)) for d in group]
            if any(grade is None for _, grade in graded):
                continue
            ordered = sorted(graded, key=lambda item: config.GRADE_ORDER[item[1]])
            for (better, _), (worse, _) in combinations(ordered, 2):
                rb = ratings.get((participant, cond, idx, better))
                rw = ratings.get((participant, cond, idx, worse))
                if rb is None or rw is None or rb == config.CANNOT_EVALUATE or rw == config.CANNOT_EVALUATE:
                    continue
                tally = counts[participant]
                tally[1] += 1
                if rb > rw:
                    tally[0] += 1
    return counts


def false_answer_rate(
    responses: Sequence[AssessmentResponse],
    truth: GroundTruthMatrix,
    category: Optional[str] = None,
    condition: Optional[str] = None,
    index: Optional[str] = None,
    aggregation: str = "pooled",
) -> float:
    """与设计的高低质量顺序相矛盾的数据对比例（评分越小质量越好，并列不算错）"""
    counts = _pair_counts(responses, truth, category, condition, index)
    comparable = sum(c[1] for c in counts.values())
    if comparable == 0:
        raise AnalyticsError("没有可比较的数据对")
    if aggregation == "pooled":
        return sum(c[0] for c in counts.values()) / comparable
    if aggregation == "participant_mean":
        rates = [false / total for false, total in counts.values() if total > 0]
        return float(np.mean(rates))
    raise AnalyticsError(f"未知的汇总方式: {aggregation}")


def simpsons_diversity(selections: Sequence[Iterable[str]]) -> float:
    """Simpson多样性 D = 1 − Σp²；0 表示所有选择一致"""
    counts = Counter(variable for chosen in selections for variable in chosen)
    total = sum(counts.values())
    if total == 0:
        raise AnalyticsError("没有任何被选变量")
    return 1.0 - sum((n / total) ** 2 for n in counts.values())


def fisher_exact_2x2(table: Sequence[Sequence[int]]) -> FisherResult:
    """2×2 Fisher精确检验；双侧p值按点概率法求和"""
    cells = np.asarray(table)
    if cells.shape != (2, 2):
        raise AnalyticsError("需要2×2列联表")
    if not all(float(v).is_integer() for v in cells.ravel()):
        raise AnalyticsError("列联表必须是整数")
    cells = cells.astype(np.int64)
    if (cells < 0).any():
        raise AnalyticsError("列联表不能有负数")
    total = int(cells.sum())
    if total == 0:
        raise AnalyticsError("列联表总数必须大于0")

    a = int(cells[0, 0])
    row1 = int(cells[0].sum())
    col1 = int(cells[:, 0].sum())
    low, high = max(0, row1 + col1 - total), min(row1, col1)
    support = np.arange(low, high + 1)
    pmf = hypergeom.pmf(support, total, col1, row1)
    observed = pmf[a - low]
    # 相对容差避免浮点误差把与观测等概率的表排除在外
    two_sided = pmf[pmf <= observed * (1 + 1e-7)].sum()
    return FisherResult(
        p_two_sided=float(min(1.0, two_sided)),
        p_less=float(min(1.0, pmf[: a - low + 1].sum())),
        p_greater=float(min(1.0, pmf[a - low:].sum())),
        point_probability=float(observed),
    )


def _safe(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except AnalyticsError:
        return None


def _categories() -> List[str]:
    return list(config.EXPERIENCE_CATEGORIES) + [ALL_CATEGORIES]


def quality_records(responses: Sequence[AssessmentResponse], truth: GroundTruthMatrix) -> List[Dict]:
    """每个 (指标, 类别, 条件) 一条记录"""
    records = []
    for index in config.QUALITY_INDICES:
        for category in _categories():
            for condition in config.CONDITIONS:
                selected = _quality_ratings(responses, category, condition, index)
                if not selected:
                    continue
                evaluable = [r.rating for r in selected if r.rating != config.CANNOT_EVALUATE]
                records.append({
                    "index": index,
                    "category": category,
                    "condition": condition,
                    "n_ratings": len(selected),
                    "cannot_evaluate_ratio": cannot_evaluate_ratio(selected),
                    "coefficient_of_variation": _safe(coefficient_of_variation, evaluable),
                    "false_answer_rate": _safe(false_answer_rate, selected, truth),
                    "false_answer_rate_participant_mean": _safe(
                        false_answer_rate, selected, truth, aggregation="participant_mean"
                    ),
                })
    return records


def variable_records(responses: Sequence[AssessmentResponse], truth: GroundTruthMatrix) -> List[Dict]:
    """变量指标：按 (指标, 类别, 条件, 领域) 计算Simpson多样性"""
    records = []
    selections = [r for r in responses if r.selected_variables is not None]
    fields = sorted({truth.field_of(r.dataset_id) for r in selections})
    for index in config.VARIABLE_INDICES:
        for category in _categories():
            for condition in config.CONDITIONS:
                for field_label in fields:
                    chosen = [
                        r.selected_variables for r in selections
                        if _matches(r, category, condition, index) and truth.field_of(r.dataset_id) == field_label
                    ]
                    if not chosen:
                        continue
                    records.append({
                        "index": index,
                        "category": category,
                        "condition": condition,
                        "field": field_label,
                        "n_responses": len(chosen),
                        "n_selections": sum(len(c) for c in chosen),
                        "simpsons_diversity": _safe(simpsons_diversity, chosen),
                    })
    return records


def condition_fisher_tests(responses: Sequence[AssessmentResponse], truth: GroundTruthMatrix) -> List[Dict]:
    """仅看原始数据 vs 提供质量元数据：无法评价数与错误对数的Fisher检验"""
    results = []
    for index in config.QUALITY_INDICES:
        for category in _categories():
            cannot_rows, false_rows = [], []
            for condition in config.CONDITIONS:
                selected = _quality_ratings(responses, category, condition, index)
                cannot = sum(1 for r in selected if r.rating == config.CANNOT_EVALUATE)
                cannot_rows.append([cannot, len(selected) - cannot])
                counts = _pair_counts(responses, truth, category, condition, index)
                false = sum(c[0] for c in counts.values())
                comparable = sum(c[1] for c in counts.values())
                false_rows.append([false, comparable - false])
            for measure, table in (("cannot_evaluate", cannot_rows), ("false_answer", false_rows)):
                if sum(map(sum, table)) == 0:
                    continue
                test = fisher_exact_2x2(table)
                results.append({
                    "index": index,
                    "category": category,
                    "measure": measure,
                    "table": table,
                    "p_two_sided": test.p_two_sided,
                    "p_less": test.p_less,
                    "p_greater": test.p_greater,
                })
    return results


def utility_distribution(responses: Sequence[AssessmentResponse]) -> Dict[str, Dict[str, int]]:
    """质量元数据有用性评分（1–5）按经验类别的分布"""
    distribution = {}
    for category in _categories():
        counts = Counter(
            r.rating for r in responses
            if r.index == config.UTILITY_INDEX and _matches(r, category, None, None)
        )
        distribution[category] = {str(level): counts.get(level, 0) for level in range(1, 6)}
    return distribution


def analyze(responses: Sequence[AssessmentResponse], truth: GroundTruthMatrix) -> Dict:
    """完整问卷分析文档"""
    if not responses:
        raise AnalyticsError("没有任何回答记录")
    return {
        "schema_version": config.SCHEMA_VERSION,
        "n_participants": len({r.participant_id for r in responses}),
        "quality_records": quality_records(responses, truth),
        "variable_records": variable_records(responses, truth),
        "fisher_tests": condition_fisher_tests(responses, truth),
        "utility": utility_distribution(responses),
    }


def to_json(analysis: Dict) -> str:
    return json.dumps(analysis, sort_keys=True, ensure_ascii=False, indent=2, allow_nan=False) + "\n"
