"""
系统配置文件
"""
import json
import os
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Dict, List, Optional

from dotenv import load_dotenv

load_dotenv()

# 数据路径
DATA_DIR = "data"
SAMPLE_DIR = os.path.join(DATA_DIR, "samples")
OUTPUT_DIR = os.environ.get("QUALIMETA_OUTPUT_DIR", os.path.join(DATA_DIR, "output"))
LOG_DIR = os.path.join(OUTPUT_DIR, "logs")
PROFILE_SUBDIR = "profiles"
TEMPLATE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "templates")

SCHEMA_VERSION = 1
DEFAULT_RUN_ID = "qualimeta"
DEFAULT_FIELD_LABEL = "general"
DEFAULT_LAYOUT_SEED = 42

# 缺失值与解析
DEFAULT_MISSING_TOKENS = ["", "NA", "N/A", "null", "-"]
DEFAULT_DATETIME_FORMATS = [
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
    "%Y-%m-%dT%H:%M:%S",
    "%Y/%m/%d %H:%M:%S",
    "%Y/%m/%d %H:%M",
    "%Y-%m-%d",
    "%Y/%m/%d",
]
DEFAULT_GEO_COLUMN_NAMES = ["latitude", "longitude", "lat", "lon", "lng"]
BOOLEAN_TOKENS = {"true", "false", "yes", "no", "t", "f", "y", "n"}

# 格式规则：规则名 -> 适用列名 + 正则
DEFAULT_FORMAT_RULES = {
    "url": {
        "columns": ["url", "website", "homepage", "web"],
        "pattern": r"^https?://[^\s/$.?#][^\s]*$",
    },
    "phone": {
        "columns": ["phone", "tel", "telephone", "phone_number", "telephone_number"],
        "pattern": r"^\+?[0-9][0-9\-() ]{5,}[0-9]$",
    },
}

# 列类型（并列时的优先级：datetime > integer > decimal > boolean > text）
COLUMN_TYPES = ["integer", "decimal", "text", "datetime", "latitude", "longitude", "boolean"]
TYPE_PRECEDENCE = ["datetime", "integer", "decimal", "boolean", "text"]
NUMERIC_TYPES = ("integer", "decimal", "latitude", "longitude")
GEO_TYPES = ("latitude", "longitude")

# 指标
QUALITY_INDICES = [
    "quantity",
    "accuracy",
    "granularity",
    "completeness",
    "uniqueness",
    "precision",
    "compliance",
]
VARIABLE_INDICES = ["rarity", "universality", "linkage"]
UTILITY_INDEX = "utility"

HIGHER_BETTER = "higher_better"
LOWER_BETTER = "lower_better"
INDEX_POLARITY = {
    "quantity": HIGHER_BETTER,
    "completeness": HIGHER_BETTER,
    "uniqueness": HIGHER_BETTER,
    "precision": HIGHER_BETTER,
    "compliance": HIGHER_BETTER,
    "universality": HIGHER_BETTER,
    "linkage": HIGHER_BETTER,
    "accuracy": LOWER_BETTER,
    "granularity": LOWER_BETTER,
}

IQR_FENCE_MULTIPLIER = 3.0
EARTH_RADIUS_KM = 6371.0088
HEATMAP_MAX_BLOCKS = 50
GEO_LOCATION_TOKEN = "location"

# 问卷实验
EXPERIENCE_CATEGORIES = ["experienced", "semi_experienced", "inexperienced"]
CONDITIONS = ["raw_only", "with_metadata"]
CANNOT_EVALUATE = 5
GRADE_ORDER = {"H": 0, "M": 1, "L": 2}
RESPONSE_COLUMNS = [
    "participant_id",
    "experience_category",
    "condition",
    "dataset_id",
    "index",
    "rating",
    "selected_variables",
]


class ConfigError(ValueError):
    """配置错误"""


@dataclass(frozen=True)
class DatasetSpec:
    path: str
    id: str
    field_label: str
    name: str = ""
    important_variables: List[str] = field(default_factory=list)


@dataclass(frozen=True)
class FormatRule:
    name: str
    columns: List[str]
    pattern: str


@dataclass(frozen=True)
class RunConfig:
    """一次运行的完整配置（JSON文件 + 命令行覆盖）"""

    run_id: str = DEFAULT_RUN_ID
    datasets: List[DatasetSpec] = field(default_factory=list)
    field_label: str = DEFAULT_FIELD_LABEL
    important_variables: List[str] = field(default_factory=list)
    missing_tokens: List[str] = field(default_factory=lambda: list(DEFAULT_MISSING_TOKENS))
    datetime_formats: List[str] = field(default_factory=lambda: list(DEFAULT_DATETIME_FORMATS))
    synonym_map: Dict[str, str] = field(default_factory=dict)
    geo_column_names: List[str] = field(default_factory=lambda: list(DEFAULT_GEO_COLUMN_NAMES))
    format_rules: List[FormatRule] = field(default_factory=lambda: default_format_rules())
    rarity_polarity: str = HIGHER_BETTER
    output_dir: str = OUTPUT_DIR
    layout_seed: int = DEFAULT_LAYOUT_SEED
    heatmap_blocks: int = HEATMAP_MAX_BLOCKS
    clock: Optional[str] = None

    def important_variables_for(self, dataset_id: str) -> List[str]:
        """数据集的重要变量：数据集级列表优先，否则使用全局列表"""
        for spec in self.datasets:
            if spec.id == dataset_id and spec.important_variables:
                return list(spec.important_variables)
        return list(self.important_variables)

    def polarity(self, index: str) -> str:
        if index == "rarity":
            return self.rarity_polarity
        return INDEX_POLARITY[index.split(":", 1)[0]]

    def now(self) -> datetime:
        """注入时钟：测试时固定generated_at"""
        if self.clock:
            parsed = datetime.fromisoformat(self.clock.replace("Z", "+00:00"))
            if parsed.tzinfo is None:
                parsed = parsed.replace(tzinfo=timezone.utc)
            return parsed
        return datetime.now(timezone.utc).replace(microsecond=0)

    def with_overrides(
        self,
        output_dir: Optional[str] = None,
        layout_seed: Optional[int] = None,
        clock: Optional[str] = None,
    ) -> "RunConfig":
        """命令行参数优先于配置文件"""
        updates = {}
        if output_dir is not None:
            updates["output_dir"] = output_dir
        if layout_seed is not None:
            updates["layout_seed"] = layout_seed
        if clock is not None:
            updates["clock"] = _validate_clock(clock)
        return replace(self, **updates) if updates else self


def _validate_clock(clock) -> str:
    if not isinstance(clock, str):
        raise ConfigError(f"无效的时钟值: {clock!r}")
    try:
        datetime.fromisoformat(clock.replace("Z", "+00:00"))
    except ValueError:
        raise ConfigError(f"无效的时钟值: {clock}")
    return clock


def _validate_run_id(run_id: str) -> str:
    """run_id 直接用作输出文件名前缀，不能带路径成分"""
    if run_id in ("", ".", "..") or "/" in run_id or "\\" in run_id or os.path.basename(run_id) != run_id:
        raise ConfigError(f"无效的 run_id: {run_id!r}")
    return run_id


def default_format_rules() -> List[FormatRule]:
    return [
        FormatRule(name=name, columns=list(rule["columns"]), pattern=rule["pattern"])
        for name, rule in DEFAULT_FORMAT_RULES.items()
    ]


def _normalize_name(raw: str) -> str:
    # 与 ingest.normalize_variable_name 的前半段一致（不含同义词映射）
    return "_".join(raw.strip().casefold().split())


def resolve_synonyms(synonym_map: Dict[str, str]) -> Dict[str, str]:
    """规范化同义词表并把链式映射解析到不动点"""
    normalized = {}
    for key, value in synonym_map.items():
        if not isinstance(key, str) or not isinstance(value, str):
            raise ConfigError("synonym_map 的键和值必须是字符串")
        nkey, nvalue = _normalize_name(key), _normalize_name(value)
        if not nkey or not nvalue:
            raise ConfigError(f"同义词不能为空: {key!r} -> {value!r}")
        if nkey != nvalue:
            normalized[nkey] = nvalue

    resolved = {}
    for key in normalized:
        seen = {key}
        target = normalized[key]
        while target in normalized:
            if target in seen:
                raise ConfigError(f"同义词映射存在环: {key}")
            seen.add(target)
            target = normalized[target]
        resolved[key] = target
    return resolved


def _require_list_of_str(raw: dict, key: str, default: List[str]) -> List[str]:
    value = raw.get(key, default)
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"配置项 {key} 必须是字符串列表")
    return list(value)


def _parse_format_rules(raw) -> List[FormatRule]:
    if raw is None:
        return default_format_rules()
    if not isinstance(raw, dict):
        raise ConfigError("format_rules 必须是对象")
    rules = []
    for name in sorted(raw):
        rule = raw[name]
        if not isinstance(rule, dict) or "pattern" not in rule:
            raise ConfigError(f"格式规则 {name} 缺少 pattern")
        columns = rule.get("columns", [])
        if not isinstance(columns, list):
            raise ConfigError(f"格式规则 {name} 的 columns 必须是列表")
        rules.append(
            FormatRule(name=name, columns=[_normalize_name(c) for c in columns], pattern=rule["pattern"])
        )
    return rules


def parse_run_config(raw: dict, base_dir: str = ".") -> RunConfig:
    """从JSON对象构建RunConfig并校验"""
    if not isinstance(raw, dict):
        raise ConfigError("配置文件顶层必须是JSON对象")

    default_label = raw.get("field_label", DEFAULT_FIELD_LABEL)
    if not isinstance(default_label, str) or not default_label.strip():
        raise ConfigError("field_label 不能为空")

    global_important = _require_list_of_str(raw, "important_variables", [])

    datasets = []
    seen_ids = set()
    for idx, item in enumerate(raw.get("datasets", [])):
        if not isinstance(item, dict) or "path" not in item:
            raise ConfigError(f"datasets[{idx}] 缺少 path")
        path = item["path"]
        if not os.path.isabs(path):
            path = os.path.normpath(os.path.join(base_dir, path))
        dataset_id = item.get("id") or os.path.splitext(os.path.basename(path))[0]
        if dataset_id in seen_ids:
            raise ConfigError(f"数据集ID重复: {dataset_id}")
        seen_ids.add(dataset_id)
        label = item.get("field_label", default_label)
        if not isinstance(label, str) or not label.strip():
            raise ConfigError(f"数据集 {dataset_id} 的 field_label 不能为空")
        important = item.get("important_variables", [])
        if not isinstance(important, list) or not all(isinstance(v, str) for v in important):
            raise ConfigError(f"数据集 {dataset_id} 的 important_variables 必须是字符串列表")
        datasets.append(
            DatasetSpec(
                path=path,
                id=dataset_id,
                field_label=label.strip(),
                name=item.get("name", dataset_id),
                important_variables=list(important),
            )
        )

    for spec in datasets:
        for variable in spec.important_variables:
            if not variable.strip():
                raise ConfigError(f"数据集 {spec.id} 含有空的重要变量名")
    for variable in global_important:
        if not variable.strip():
            raise ConfigError("important_variables 含有空字符串")

    synonyms = raw.get("synonym_map", {})
    if not isinstance(synonyms, dict):
        raise ConfigError("synonym_map 必须是对象")

    rarity_polarity = raw.get("rarity_polarity", HIGHER_BETTER)
    if rarity_polarity not in (HIGHER_BETTER, LOWER_BETTER):
        raise ConfigError(f"rarity_polarity 只能是 {HIGHER_BETTER} 或 {LOWER_BETTER}")

    layout_seed = raw.get("layout_seed", DEFAULT_LAYOUT_SEED)
    heatmap_blocks = raw.get("heatmap_blocks", HEATMAP_MAX_BLOCKS)
    if not isinstance(layout_seed, int) or not isinstance(heatmap_blocks, int) or heatmap_blocks < 1:
        raise ConfigError("layout_seed 与 heatmap_blocks 必须是整数（heatmap_blocks ≥ 1）")

    output_dir = raw.get("output_dir", OUTPUT_DIR)
    if not os.path.isabs(output_dir) and "output_dir" in raw:
        output_dir = os.path.normpath(os.path.join(base_dir, output_dir))

    return RunConfig(
        run_id=_validate_run_id(str(raw.get("run_id", DEFAULT_RUN_ID))),
        datasets=datasets,
        field_label=default_label.strip(),
        important_variables=global_important,
        missing_tokens=_require_list_of_str(raw, "missing_tokens", DEFAULT_MISSING_TOKENS),
        datetime_formats=_require_list_of_str(raw, "datetime_formats", DEFAULT_DATETIME_FORMATS),
        synonym_map=resolve_synonyms(synonyms),
        geo_column_names=[
            _normalize_name(n) for n in _require_list_of_str(raw, "geo_column_names", DEFAULT_GEO_COLUMN_NAMES)
        ],
        format_rules=_parse_format_rules(raw.get("format_rules")),
        rarity_polarity=rarity_polarity,
        output_dir=output_dir,
        layout_seed=layout_seed,
        heatmap_blocks=heatmap_blocks,
        clock=_validate_clock(raw["clock"]) if raw.get("clock") is not None else None,
    )


def load_run_config(path: str) -> RunConfig:
    """加载运行配置JSON"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except OSError as e:
        raise ConfigError(f"无法读取配置文件 {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"配置文件 {path} 不是合法JSON: {e}")
    return parse_run_config(raw, base_dir=os.path.dirname(os.path.abspath(path)))
