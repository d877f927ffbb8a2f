"""
数值统计工具
"""
from typing import Dict, List, Sequence, Tuple

import numpy as np
from sklearn.neighbors import BallTree

import config


def median(values: Sequence[float]) -> float:
    """中位数；偶数长度取中间两值的平均"""
    if len(values) == 0:
        raise ValueError("空序列没有中位数")
    return float(np.median(np.asarray(values, dtype=float)))


def quartiles(values: Sequence[float]) -> Tuple[float, float]:
    """线性插值的Q1、Q3"""
    q1, q3 = np.percentile(np.asarray(values, dtype=float), [25, 75])
    return float(q1), float(q3)


def iqr_fences(values: Sequence[float], multiplier: float = config.IQR_FENCE_MULTIPLIER) -> Tuple[float, float]:
    q1, q3 = quartiles(values)
    spread = q3 - q1
    return q1 - multiplier * spread, q3 + multiplier * spread


def summarize(values: Sequence[int]) -> Dict[str, float]:
    return {"min": min(values), "median": median(values), "max": max(values)}


def consecutive_intervals(values: Sequence[float]) -> List[float]:
    ordered = np.sort(np.asarray(values, dtype=float))
    return np.diff(ordered).tolist()


def nearest_neighbor_km(latitudes: Sequence[float], longitudes: Sequence[float]) -> List[float]:
    """每个点到最近其他点的大圆距离（haversine，km）"""
    points = np.radians(np.column_stack([latitudes, longitudes]).astype(float))
    tree = BallTree(points, metric="haversine")
    distances, _ = tree.query(points, k=2)
    # 第0个邻居是自身（或与自身重合的点），取第1个
    return (distances[:, 1] * config.EARTH_RADIUS_KM).tolist()


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    phi1, phi2 = np.radians(lat1), np.radians(lat2)
    dphi = phi2 - phi1
    dlmb = np.radians(lon2 - lon1)
    a = np.sin(dphi / 2) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlmb / 2) ** 2
    return float(2 * config.EARTH_RADIUS_KM * np.arcsin(np.sqrt(a)))
