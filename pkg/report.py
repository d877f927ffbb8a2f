"""
质量元数据报告：规范化JSON文档 + 自包含HTML/SVG对比报告
"""
import json
import os
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from jinja2 import Environment, FileSystemLoader, StrictUndefined

import config
from config import RunConfig
from indices import QualityProfile
from ingest import Dataset
from logger import get_logger
from netmetrics import CentralityTable, VariableNetwork, VariableScore, dataset_variable_index, network_to_dict

log = get_logger("report")

HEATMAP_CELL = 10
NETWORK_SIZE = 420
NETWORK_MARGIN = 40


class ReportError(ValueError):
    """报告输入不一致"""


@dataclass
class QualityMetadataDocument:
    run_id: str
    generated_at: str
    datasets: List[Dict]
    networks: List[Dict]
    centrality: Dict[str, Dict[str, Dict]]
    comparison: List[Dict]
    schema_version: int = config.SCHEMA_VERSION

    def to_dict(self) -> Dict:
        return asdict(self)

    def comparison_for(self, index: str) -> Optional[Dict]:
        return next((c for c in self.comparison if c["index"] == index), None)

    def ranked_ids(self, index: str) -> List[str]:
        """把并列组展开成有序ID列表"""
        entry = self.comparison_for(index)
        if entry is None:
            return []
        return [dataset_id for group in entry["ranking"] for dataset_id in group["dataset_ids"]]


def rank_datasets(values: Dict[str, Optional[float]], polarity: str) -> Tuple[List[Dict], List[str]]:
    """按极性排序，相同取值归为同一并列组"""
    evaluable = {k: v for k, v in values.items() if v is not None}
    not_evaluable = sorted(k for k, v in values.items() if v is None)
    reverse = polarity == config.HIGHER_BETTER
    distinct = sorted(set(evaluable.values()), reverse=reverse)
    ranking = []
    rank = 1
    for value in distinct:
        ids = sorted(k for k, v in evaluable.items() if v == value)
        ranking.append({"rank": rank, "dataset_ids": ids, "value": value})
        rank += len(ids)
    return ranking, not_evaluable


def _comparison_indices(profiles: Sequence[QualityProfile]) -> List[str]:
    granularity_vars = sorted({name for p in profiles for name in p.granularity})
    indices = []
    for index in config.QUALITY_INDICES:
        if index == "granularity":
            indices.extend(f"granularity:{name}" for name in granularity_vars)
        else:
            indices.append(index)
    return indices + list(config.VARIABLE_INDICES)


def _score_to_dict(score: VariableScore) -> Dict:
    return asdict(score)


def generate(
    datasets: Sequence[Dataset],
    profiles: Sequence[QualityProfile],
    networks: Sequence[VariableNetwork],
    centrality: Dict[str, CentralityTable],
    run_config: RunConfig,
) -> QualityMetadataDocument:
    """汇总同一次运行的全部结果为质量元数据文档"""
    dataset_ids = [d.id for d in datasets]
    if len(set(dataset_ids)) != len(dataset_ids):
        raise ReportError("数据集ID重复")
    profile_ids = [p.dataset_id for p in profiles]
    if sorted(profile_ids) != sorted(dataset_ids):
        raise ReportError(f"质量概况与数据集不匹配: {sorted(profile_ids)} vs {sorted(dataset_ids)}")
    unknown = set(centrality) - set(dataset_ids)
    if unknown:
        raise ReportError(f"中心性表包含未知数据集: {sorted(unknown)}")
    for network in networks:
        stray = set(network.dataset_ids) - set(dataset_ids)
        if stray:
            raise ReportError(f"网络 {network.scope.label} 包含未知数据集: {sorted(stray)}")

    by_id = {p.dataset_id: p for p in profiles}
    comparison = []
    for index in _comparison_indices(profiles):
        if index in config.VARIABLE_INDICES:
            values = {
                d: dataset_variable_index(centrality[d], index) if d in centrality else None
                for d in dataset_ids
            }
        else:
            values = {d: by_id[d].headline(index) for d in dataset_ids}
        polarity = run_config.polarity(index)
        ranking, not_evaluable = rank_datasets(values, polarity)
        comparison.append(
            {"index": index, "polarity": polarity, "ranking": ranking, "not_evaluable": not_evaluable}
        )

    ordered = sorted(datasets, key=lambda d: d.id)
    return QualityMetadataDocument(
        run_id=run_config.run_id,
        generated_at=run_config.now().isoformat(),
        datasets=[
            {
                "dataset_id": d.id,
                "name": d.name,
                "field_label": d.field_label,
                "source_file": os.path.basename(d.source_path),
                "row_count": d.row_count,
                "column_count": len(d.columns),
                "profile": by_id[d.id].to_dict(),
            }
            for d in ordered
        ],
        networks=[network_to_dict(n, run_config.layout_seed) for n in networks],
        centrality={
            d: {variable: _score_to_dict(score) for variable, score in sorted(scores.items())}
            for d, scores in sorted(centrality.items())
        },
        comparison=comparison,
    )


def to_json(document: Union[QualityMetadataDocument, Dict]) -> str:
    """规范化JSON：键排序、最短往返浮点表示"""
    payload = document.to_dict() if isinstance(document, QualityMetadataDocument) else document
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2, allow_nan=False) + "\n"


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


def _heatmap_view(entry: Dict) -> Optional[Dict]:
    completeness = entry["profile"]["completeness"]
    if completeness.get("status") != "ok":
        return None
    grid = completeness["missing_grid"]["columns"]
    names = list(grid)
    blocks = max((len(flags) for flags in grid.values()), default=0)
    cells = [
        {"x": 120 + col * HEATMAP_CELL, "y": 20 + row * HEATMAP_CELL, "missing": flag}
        for col, name in enumerate(names)
        for row, flag in enumerate(grid[name])
    ]
    labels = [{"x": 120 + col * HEATMAP_CELL + HEATMAP_CELL // 2, "name": name} for col, name in enumerate(names)]
    return {
        "dataset_id": entry["dataset_id"],
        "block_size": completeness["missing_grid"]["block_size"],
        "width": 140 + len(names) * HEATMAP_CELL,
        "height": 30 + blocks * HEATMAP_CELL + 120,
        "label_y": 30 + blocks * HEATMAP_CELL,
        "cells": cells,
        "labels": labels,
    }


def _network_view(network: Dict) -> Dict:
    span = NETWORK_SIZE - 2 * NETWORK_MARGIN

    def project(value: float) -> float:
        return round(NETWORK_MARGIN + (value + 1.0) / 2.0 * span, 2)

    positions = {n["id"]: (project(n["x"]), project(n["y"])) for n in network["nodes"]}
    title = network["field_label"] if network["scope"] == "same_field" else "cross-field"
    return {
        "title": f"{network['scope']} · {title}",
        "size": NETWORK_SIZE,
        "edges": [
            {
                "x1": positions[e["source"]][0],
                "y1": positions[e["source"]][1],
                "x2": positions[e["target"]][0],
                "y2": positions[e["target"]][1],
                "width": round(0.5 + 3.0 * e["weight"], 2),
            }
            for e in network["edges"]
        ],
        "nodes": [
            {
                "id": n["id"],
                "cx": positions[n["id"]][0],
                "cy": positions[n["id"]][1],
                "r": round(4.0 + 12.0 * n["degree_centrality"], 2),
            }
            for n in network["nodes"]
        ],
    }


def _environment() -> Environment:
    env = Environment(
        loader=FileSystemLoader(config.TEMPLATE_DIR),
        autoescape=True,
        undefined=StrictUndefined,
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    env.filters["fmt"] = _fmt
    return env


def render_html(document: Union[QualityMetadataDocument, Dict]) -> str:
    """由JSON文档渲染自包含HTML（内嵌SVG，无外部资源）"""
    payload = json.loads(to_json(document))
    datasets = payload["datasets"]
    granularity_vars = sorted({name for d in datasets for name in d["profile"]["granularity"]})
    template = _environment().get_template("report.html")
    return template.render(
        doc=payload,
        datasets=datasets,
        comparison=payload["comparison"],
        heatmaps=[view for view in (_heatmap_view(d) for d in datasets) if view is not None],
        granularity_vars=granularity_vars,
        networks=[_network_view(n) for n in payload["networks"]],
        centrality=payload["centrality"],
    )


def write_artifacts(document: QualityMetadataDocument, output_dir: str) -> Tuple[str, str]:
    """写出 <run_id>.quality.json 与 <run_id>.report.html"""
    os.makedirs(output_dir, exist_ok=True)
    json_path = os.path.join(output_dir, f"{document.run_id}.quality.json")
    html_path = os.path.join(output_dir, f"{document.run_id}.report.html")
    with open(json_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(to_json(document))
    with open(html_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(render_html(document))
    log.info("报告已写出: %s, %s", json_path, html_path)
    return json_path, html_path
