"""
生成演示数据：按 H/M/L 设计的12个数据集、运行配置、质量真值与合成问卷
"""
import csv
import json
import os
from datetime import datetime, timedelta
from typing import Dict, List, Sequence

import numpy as np

import config
from analytics import GroundTruthMatrix, parse_ground_truth
from logger import get_logger

log = get_logger("generate_data")

SIGHTSEEING = "sightseeing"
METEOROLOGY = "meteorology"

CONFIG_FILE = "run_config.json"
TRUTH_FILE = "ground_truth.json"
RESPONSES_FILE = "responses.csv"

SIGHTSEEING_COLUMNS = [
    "name", "latitude", "longitude", "address", "url",
    "telephone_number", "opening_hours", "days_closed", "barrier_free",
]
METEOROLOGY_COLUMNS = [
    "datetime", "temperature", "precipitation", "cloud_cover", "local_air_pressure",
    "weather", "hours_of_sunshine", "solar_radiation", "relative_humidity",
]
# 数值列取值范围（整数位数固定，有效数字只由小数位决定）
METEOROLOGY_RANGES = {
    "temperature": (10.0, 29.0),
    "precipitation": (1.0, 8.9),
    "cloud_cover": (1.0, 8.9),
    "local_air_pressure": (1000.0, 1020.0),
    "hours_of_sunshine": (1.0, 8.9),
    "solar_radiation": (10.0, 89.0),
    "relative_humidity": (30.0, 89.0),
}
WEATHER_VALUES = ["sunny", "cloudy", "rain", "snow"]
DAYS_CLOSED = ["Monday", "Tuesday", "Wednesday", "none"]

# 各档位的控制参数
ROWS = {"H": 300, "M": 200, "L": 100}
MISSING_FRACTION = {"H": 0.0, "M": 0.05, "L": 0.15}
DUPLICATE_FRACTION = {"H": 0.0, "M": 0.1, "L": 0.2}
DECIMALS = {"L": 1, "M": 2, "H": 3}
GEO_DECIMALS = {"L": 2, "M": 4, "H": 6}
ANOMALY_FRACTION = {"H": 0.0, "M": 0.02, "L": 0.05}
ALT_FORMAT_FRACTION = {"H": 0.0, "M": 0.1, "L": 0.3}
INTERVAL_SECONDS = {"H": 600, "M": 3600, "L": 10800}

PRIMARY_DATETIME_FORMAT = "%Y-%m-%d %H:%M:%S"
ALT_DATETIME_FORMAT = "%Y/%m/%d %H:%M"
START_TIME = datetime(2023, 4, 1)

# 每个数据集的设计档位
DESIGN = {
    "A": {"field": SIGHTSEEING, "accuracy": "H", "completeness": "M", "quantity": "H", "precision": "L"},
    "B": {"field": SIGHTSEEING, "accuracy": "L", "completeness": "H", "quantity": "M", "precision": "M"},
    "C": {"field": SIGHTSEEING, "accuracy": "M", "completeness": "L", "quantity": "L", "precision": "H"},
    "D": {"field": METEOROLOGY, "accuracy": "H", "completeness": "M", "quantity": "H", "precision": "L",
          "compliance": "H", "granularity": "H", "uniqueness": "L"},
    "E": {"field": METEOROLOGY, "accuracy": "L", "completeness": "H", "quantity": "M", "precision": "M",
          "compliance": "M", "granularity": "M", "uniqueness": "M"},
    "F": {"field": METEOROLOGY, "accuracy": "M", "completeness": "L", "quantity": "L", "precision": "H",
          "compliance": "L", "granularity": "L", "uniqueness": "H"},
    "G": {"field": SIGHTSEEING, "accuracy": "H", "completeness": "L", "quantity": "L", "precision": "M"},
    "H": {"field": SIGHTSEEING, "accuracy": "L", "completeness": "H", "quantity": "H", "precision": "L"},
    "I": {"field": SIGHTSEEING, "accuracy": "M", "completeness": "M", "quantity": "M", "precision": "H"},
    "J": {"field": METEOROLOGY, "accuracy": "H", "completeness": "M", "quantity": "H", "precision": "L",
          "compliance": "H", "granularity": "H", "uniqueness": "L"},
    "K": {"field": METEOROLOGY, "accuracy": "L", "completeness": "H", "quantity": "M", "precision": "M",
          "compliance": "M", "granularity": "M", "uniqueness": "M"},
    "L": {"field": METEOROLOGY, "accuracy": "M", "completeness": "L", "quantity": "L", "precision": "H",
          "compliance": "L", "granularity": "L", "uniqueness": "H"},
}
COMPARISON_GROUPS = [["A", "B", "C"], ["D", "E", "F"], ["G", "H", "I"], ["J", "K", "L"]]
# J/K/L 带有观测点坐标，作为跨领域网络中的桥接变量
STATION_DATASETS = {"J", "K", "L"}

PARTICIPANTS_PER_CATEGORY = {"experienced": 12, "semi_experienced": 15, "inexperienced": 14}


def _sightseeing_rows(design: Dict, rng: np.random.Generator) -> List[List[str]]:
    n = ROWS[design["quantity"]]
    geo = GEO_DECIMALS[design["precision"]]
    rows = []
    for i in range(n):
        rows.append([
            f"Spot {i + 1:03d}",
            f"{rng.uniform(34.5, 35.5):.{geo}f}",
            f"{rng.uniform(135.5, 136.5):.{geo}f}",
            f"Sakyo-ku block {rng.integers(1, 50)}",
            f"https://example.org/spot/{i + 1:03d}",
            f"075-{rng.integers(100, 999)}-{rng.integers(1000, 9999)}",
            "09:00-17:00",
            DAYS_CLOSED[int(rng.integers(len(DAYS_CLOSED)))],
            "yes" if rng.random() < 0.5 else "no",
        ])
    return rows


def _meteorology_rows(dataset_id: str, design: Dict, rng: np.random.Generator) -> List[List[str]]:
    n = ROWS[design["quantity"]] - round(ROWS[design["quantity"]] * DUPLICATE_FRACTION[design["uniqueness"]])
    decimals = DECIMALS[design["precision"]]
    step = timedelta(seconds=INTERVAL_SECONDS[design["granularity"]])
    alt = ALT_FORMAT_FRACTION[design["compliance"]]
    rows = []
    for i in range(n):
        moment = START_TIME + i * step
        fmt = ALT_DATETIME_FORMAT if rng.random() < alt else PRIMARY_DATETIME_FORMAT
        row = [moment.strftime(fmt)]
        for name in METEOROLOGY_COLUMNS[1:]:
            if name == "weather":
                row.append(WEATHER_VALUES[int(rng.integers(len(WEATHER_VALUES)))])
            else:
                low, high = METEOROLOGY_RANGES[name]
                row.append(f"{rng.uniform(low, high):.{decimals}f}")
        if dataset_id in STATION_DATASETS:
            geo = GEO_DECIMALS[design["precision"]]
            row += [f"{35.0 + 0.01 * ord(dataset_id):.{geo}f}", f"{135.7:.{geo}f}"]
        rows.append(row)
    return rows


def _inject_anomalies(rows: List[List[str]], header: Sequence[str], grade: str, rng: np.random.Generator):
    """准确性：观光数据写入格式/类型错误，气象数据写入极端值"""
    candidates = {
        "latitude": "abc",
        "longitude": "abc",
        "url": "htp:/broken",
        "telephone_number": "unknown",
    }
    targets = [header.index(c) for c in header if c in candidates or c in METEOROLOGY_RANGES]
    count = round(len(rows) * len(targets) * ANOMALY_FRACTION[grade])
    for _ in range(count):
        row = int(rng.integers(len(rows)))
        col = targets[int(rng.integers(len(targets)))]
        name = header[col]
        if name in candidates:
            rows[row][col] = candidates[name]
        else:
            decimals = len(rows[row][col].split(".")[1]) if "." in rows[row][col] else 0
            rows[row][col] = f"{METEOROLOGY_RANGES[name][1] * 1000:.{decimals}f}"


def _blank_cells(rows: List[List[str]], grade: str, rng: np.random.Generator):
    """完整性：首列以外随机置空"""
    width = len(rows[0]) - 1
    count = round(len(rows) * width * MISSING_FRACTION[grade])
    flat = rng.choice(len(rows) * width, size=count, replace=False)
    for position in flat:
        rows[int(position) // width][1 + int(position) % width] = ""


def _duplicate_rows(rows: List[List[str]], total: int, rng: np.random.Generator) -> List[List[str]]:
    """唯一性：复制已有行直到达到设计行数，副本紧跟原行"""
    extra = total - len(rows)
    if extra <= 0:
        return rows
    picked = set(int(i) for i in rng.choice(len(rows), size=extra, replace=False))
    result = []
    for i, row in enumerate(rows):
        result.append(row)
        if i in picked:
            result.append(list(row))
    return result


def build_dataset_rows(dataset_id: str, rng: np.random.Generator) -> List[List[str]]:
    """生成一个数据集（含表头）"""
    design = DESIGN[dataset_id]
    if design["field"] == SIGHTSEEING:
        header = list(SIGHTSEEING_COLUMNS)
        rows = _sightseeing_rows(design, rng)
    else:
        header = list(METEOROLOGY_COLUMNS)
        if dataset_id in STATION_DATASETS:
            header += ["latitude", "longitude"]
        rows = _meteorology_rows(dataset_id, design, rng)
    _inject_anomalies(rows, header, design["accuracy"], rng)
    _blank_cells(rows, design["completeness"], rng)
    if design["field"] == METEOROLOGY:
        rows = _duplicate_rows(rows, ROWS[design["quantity"]], rng)
    return [header] + rows


def ground_truth_document() -> Dict:
    return {
        "grades": {
            dataset_id: {index: grade for index, grade in design.items() if index != "field"}
            for dataset_id, design in DESIGN.items()
        },
        "comparison_groups": [list(group) for group in COMPARISON_GROUPS],
        "fields": {dataset_id: design["field"] for dataset_id, design in DESIGN.items()},
    }


def run_config_document() -> Dict:
    return {
        "run_id": "designed",
        "datasets": [
            {
                "path": f"{dataset_id}.csv",
                "id": dataset_id,
                "name": f"Dataset {dataset_id}",
                "field_label": design["field"],
                "important_variables": ["datetime"] if design["field"] == METEOROLOGY else [],
            }
            for dataset_id, design in DESIGN.items()
        ],
        "output_dir": "output",
    }


def _write_json(path: str, payload: Dict):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n")


def generate_designed_datasets(out_dir: str, seed: int = config.DEFAULT_LAYOUT_SEED) -> Dict[str, str]:
    """写出12个CSV、运行配置与质量真值，返回各文件路径"""
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    paths = {}
    for dataset_id in DESIGN:
        path = os.path.join(out_dir, f"{dataset_id}.csv")
        with open(path, "w", encoding="utf-8", newline="") as f:
            csv.writer(f, lineterminator="\n").writerows(build_dataset_rows(dataset_id, rng))
        paths[dataset_id] = path
        log.info("已生成数据集 %s: %s", dataset_id, path)

    paths["config"] = os.path.join(out_dir, CONFIG_FILE)
    _write_json(paths["config"], run_config_document())
    paths["truth"] = os.path.join(out_dir, TRUTH_FILE)
    _write_json(paths["truth"], ground_truth_document())
    return paths


def _simulated_rating(grade: str, condition: str, category: str, rng: np.random.Generator) -> int:
    cannot = {"raw_only": 0.3, "with_metadata": 0.05}[condition]
    if rng.random() < cannot:
        return config.CANNOT_EVALUATE
    error = {"raw_only": 0.35, "with_metadata": 0.1}[condition]
    if category == "inexperienced":
        error += 0.1
    if rng.random() < error:
        return int(rng.integers(1, 5))
    return config.GRADE_ORDER[grade] + 1


def _simulated_selection(field_label: str, condition: str, rng: np.random.Generator) -> List[str]:
    columns = SIGHTSEEING_COLUMNS if field_label == SIGHTSEEING else METEOROLOGY_COLUMNS
    if condition == "with_metadata" and rng.random() < 0.7:
        return [columns[1]]
    size = int(rng.integers(1, 4))
    return sorted(str(c) for c in rng.choice(columns, size=size, replace=False))


def generate_responses(
    truth: GroundTruthMatrix,
    out_path: str,
    seed: int = config.DEFAULT_LAYOUT_SEED,
) -> str:
    """合成问卷：41名参与者 × 两种条件 × 全部数据集"""
    rng = np.random.default_rng(seed)
    datasets = [dataset_id for group in truth.comparison_groups for dataset_id in group]
    records = []
    number = 0
    for category, size in PARTICIPANTS_PER_CATEGORY.items():
        for _ in range(size):
            number += 1
            participant = f"P{number:02d}"
            for condition in config.CONDITIONS:
                for dataset_id in datasets:
                    for index in config.QUALITY_INDICES:
                        grade = truth.grade(dataset_id, index)
                        if grade is None:
                            continue
                        rating = _simulated_rating(grade, condition, category, rng)
                        records.append([participant, category, condition, dataset_id, index, rating, ""])
                    field_label = truth.field_of(dataset_id)
                    for index in config.VARIABLE_INDICES:
                        chosen = _simulated_selection(field_label, condition, rng)
                        records.append([participant, category, condition, dataset_id, index, "", ";".join(chosen)])
            utility = int(rng.choice([1, 2, 3, 4, 5], p=[0.35, 0.35, 0.15, 0.1, 0.05]))
            records.append([participant, category, "with_metadata", "all", config.UTILITY_INDEX, utility, ""])

    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(config.RESPONSE_COLUMNS)
        writer.writerows(records)
    log.info("已生成 %d 条问卷回答: %s", len(records), out_path)
    return out_path


def main(out_dir: str = config.SAMPLE_DIR, seed: int = config.DEFAULT_LAYOUT_SEED) -> Dict[str, str]:
    """生成全部演示数据"""
    paths = generate_designed_datasets(out_dir, seed)
    truth = parse_ground_truth(ground_truth_document())
    paths["responses"] = generate_responses(truth, os.path.join(out_dir, RESPONSES_FILE), seed)
    print(f"演示数据已生成: {out_dir}")
    return paths


if __name__ == '__main__':
    main()
