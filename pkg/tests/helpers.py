"""测试辅助：在内存中构造数据集"""
from typing import Dict, List, Optional

import config
from ingest import Dataset, build_column


def make_dataset(
    columns: Dict[str, List[str]],
    dataset_id: str = "ds",
    field_label: str = "general",
    run_config: Optional[config.RunConfig] = None,
) -> Dataset:
    run_config = run_config or config.RunConfig()
    built = tuple(build_column(name, values, run_config) for name, values in columns.items())
    rows = len(next(iter(columns.values()))) if columns else 0
    return Dataset(
        id=dataset_id,
        name=dataset_id,
        field_label=field_label,
        columns=built,
        row_count=rows,
        source_path=f"{dataset_id}.csv",
    )


def make_variables_dataset(dataset_id: str, variables: List[str], field_label: str = "general") -> Dataset:
    """只关心变量名的数据集（单行占位值）"""
    return make_dataset({name: ["1"] for name in variables}, dataset_id=dataset_id, field_label=field_label)
