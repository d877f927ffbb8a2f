import csv
import json
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import config  # noqa: E402


@pytest.fixture
def run_config():
    return config.RunConfig()


@pytest.fixture
def write_csv(tmp_path):
    """把表头和行写成UTF-8 CSV，返回路径"""

    def _write(name, header, rows, directory=None):
        path = os.path.join(str(directory or tmp_path), name)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        return path

    return _write


@pytest.fixture
def write_config(tmp_path):
    """写出运行配置JSON，返回路径"""
    def _write(payload, name="run_config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)

    return _write
