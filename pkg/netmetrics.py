"""
变量共现网络：Jaccard边权、度中心性（稀有性/普遍性）、介数中心性（可链接性）
"""
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Set

import networkx as nx

import config
from ingest import Dataset
from logger import get_logger

log = get_logger("netmetrics")

SAME_FIELD = "same_field"
CROSS_FIELD = "cross_field"


class NetworkError(ValueError):
    """网络构建错误"""


@dataclass(frozen=True)
class NetworkScope:
    kind: str
    field_label: Optional[str] = None

    @classmethod
    def same_field(cls, field_label: str) -> "NetworkScope":
        return cls(kind=SAME_FIELD, field_label=field_label)

    @classmethod
    def cross_field(cls) -> "NetworkScope":
        return cls(kind=CROSS_FIELD)

    def includes(self, dataset: Dataset) -> bool:
        return self.kind == CROSS_FIELD or dataset.field_label == self.field_label

    @property
    def label(self) -> str:
        return f"{SAME_FIELD}:{self.field_label}" if self.kind == SAME_FIELD else CROSS_FIELD


@dataclass
class VariableNetwork:
    """节点为规范化变量名；节点属性 occurrence_count / dataset_ids，边属性 weight"""

    scope: NetworkScope
    graph: nx.Graph
    dataset_ids: List[str] = field(default_factory=list)

    @property
    def nodes(self) -> List[str]:
        return list(self.graph.nodes)

    def occurrence_fraction(self, variable: str) -> float:
        return self.graph.nodes[variable]["occurrence_count"] / len(self.dataset_ids)


@dataclass(frozen=True)
class VariableScore:
    degree_centrality: Optional[float]
    weighted_degree: Optional[float]
    occurrence_fraction: Optional[float]
    betweenness: float
    betweenness_normalized: float
    rarity: Optional[float]
    universality: Optional[float]
    linkage: float


# 变量名 -> 得分
CentralityTable = Dict[str, VariableScore]


def jaccard(a: Set, b: Set) -> float:
    """|A∩B| / |A∪B|；两个空集约定为0"""
    union = len(a | b)
    if union == 0:
        return 0.0
    return len(a & b) / union


def build_network(datasets: Sequence[Dataset], scope: NetworkScope) -> VariableNetwork:
    """构建变量共现网络，边权为两变量所在数据集集合的Jaccard系数"""
    in_scope = sorted((d for d in datasets if scope.includes(d)), key=lambda d: d.id)
    if not in_scope:
        raise NetworkError(f"范围 {scope.label} 内没有数据集")

    containing: Dict[str, Set[str]] = defaultdict(set)
    pairs = set()
    for dataset in in_scope:
        variables = sorted(set(dataset.variables))
        for variable in variables:
            containing[variable].add(dataset.id)
        pairs.update(combinations(variables, 2))

    graph = nx.Graph()
    for variable in sorted(containing):
        ids = containing[variable]
        graph.add_node(variable, occurrence_count=len(ids), dataset_ids=sorted(ids))
    for u, v in sorted(pairs):
        weight = jaccard(containing[u], containing[v])
        if weight > 0:
            graph.add_edge(u, v, weight=weight)

    log.info("已构建网络 %s: %d 个节点, %d 条边", scope.label, graph.number_of_nodes(), graph.number_of_edges())
    return VariableNetwork(scope=scope, graph=graph, dataset_ids=[d.id for d in in_scope])


def betweenness_centrality(network: VariableNetwork, normalized: bool = False) -> Dict[str, float]:
    """无权最短路径的介数中心性，每个无序端点对计一次"""
    graph = network.graph
    raw = nx.betweenness_centrality(graph, normalized=False, weight=None)
    if not normalized:
        return {node: float(raw[node]) for node in graph.nodes}
    n = graph.number_of_nodes()
    if n < 3:
        return {node: 0.0 for node in graph.nodes}
    scale = (n - 1) * (n - 2) / 2
    return {node: float(raw[node]) / scale for node in graph.nodes}


def degree_centrality(network: VariableNetwork) -> Dict[str, Dict[str, float]]:
    """度中心性 degree/(|V|−1) 与加权度"""
    graph = network.graph
    n = graph.number_of_nodes()
    result = {}
    for node in graph.nodes:
        degree = graph.degree(node)
        result[node] = {
            "degree_centrality": degree / (n - 1) if n > 1 else 0.0,
            "weighted_degree": float(graph.degree(node, weight="weight")),
        }
    return result


def build_networks(datasets: Sequence[Dataset]) -> List[VariableNetwork]:
    """每个领域一张同领域网络，加一张跨领域网络"""
    networks = [
        build_network(datasets, NetworkScope.same_field(label))
        for label in sorted({d.field_label for d in datasets})
    ]
    networks.append(build_network(datasets, NetworkScope.cross_field()))
    return networks


def variable_scores(datasets: Sequence[Dataset], evaluated_dataset_id: str) -> CentralityTable:
    """被评价数据集各变量的稀有性、普遍性、可链接性"""
    evaluated = next((d for d in datasets if d.id == evaluated_dataset_id), None)
    if evaluated is None:
        raise NetworkError(f"未知的数据集ID: {evaluated_dataset_id}")

    same_field = build_network(datasets, NetworkScope.same_field(evaluated.field_label))
    has_peers = len(same_field.dataset_ids) > 1
    degrees = degree_centrality(same_field)

    cross_field = build_network(datasets, NetworkScope.cross_field())
    between = betweenness_centrality(cross_field)
    between_norm = betweenness_centrality(cross_field, normalized=True)

    scores = {}
    for variable in sorted(set(evaluated.variables)):
        occurrence = same_field.occurrence_fraction(variable) if has_peers else None
        universality = degrees[variable]["degree_centrality"] if has_peers else None
        scores[variable] = VariableScore(
            degree_centrality=universality,
            weighted_degree=degrees[variable]["weighted_degree"] if has_peers else None,
            occurrence_fraction=occurrence,
            betweenness=between[variable],
            betweenness_normalized=between_norm[variable],
            rarity=1.0 - occurrence if occurrence is not None else None,
            universality=universality,
            linkage=between_norm[variable],
        )
    return scores


def centrality_table(datasets: Sequence[Dataset]) -> Dict[str, CentralityTable]:
    return {d.id: variable_scores(datasets, d.id) for d in sorted(datasets, key=lambda d: d.id)}


def dataset_variable_index(scores: CentralityTable, index: str) -> Optional[float]:
    """数据集级的变量指标：各变量得分的平均"""
    values = [getattr(score, index) for score in scores.values()]
    values = [v for v in values if v is not None]
    if not values:
        return None
    return sum(values) / len(values)


def network_to_dict(network: VariableNetwork, seed: int = config.DEFAULT_LAYOUT_SEED) -> Dict:
    """网络序列化：节点、边、固定种子的弹簧布局"""
    graph = network.graph
    degrees = degree_centrality(network)
    between = betweenness_centrality(network)
    layout = nx.spring_layout(graph, seed=seed) if graph.number_of_nodes() else {}
    return {
        "scope": network.scope.kind,
        "field_label": network.scope.field_label,
        "dataset_ids": list(network.dataset_ids),
        "nodes": [
            {
                "id": node,
                "occurrence_count": graph.nodes[node]["occurrence_count"],
                "dataset_ids": list(graph.nodes[node]["dataset_ids"]),
                "degree_centrality": degrees[node]["degree_centrality"],
                "weighted_degree": degrees[node]["weighted_degree"],
                "betweenness": between[node],
                "x": round(float(layout[node][0]), 4),
                "y": round(float(layout[node][1]), 4),
            }
            for node in graph.nodes
        ],
        "edges": [
            {"source": u, "target": v, "weight": weight}
            for u, v, weight in sorted(
                (min(a, b), max(a, b), data["weight"]) for a, b, data in graph.edges(data=True)
            )
        ],
    }
