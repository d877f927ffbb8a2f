"""
日志系统：诊断日志 + 证据化运行日志
"""
import logging
import os
import sys
from typing import Dict, List, Optional

import jsonlines

import config

_COLORS = {
    "DEBUG": "\033[36m",
    "INFO": "\033[32m",
    "WARNING": "\033[33m",
    "ERROR": "\033[31m",
    "CRITICAL": "\033[1;31m",
}
_RESET = "\033[0m"
_ROOT = "qualimeta"


def color_enabled(stream=None) -> bool:
    """QUALIMETA_NO_COLOR 存在或非终端时关闭ANSI颜色"""
    if os.environ.get("QUALIMETA_NO_COLOR"):
        return False
    stream = stream or sys.stderr
    return hasattr(stream, "isatty") and stream.isatty()


class LevelFormatter(logging.Formatter):
    def __init__(self, use_color: bool):
        super().__init__("%(levelname)s %(name)s: %(message)s")
        self.use_color = use_color

    def format(self, record: logging.LogRecord) -> str:
        text = super().format(record)
        if self.use_color and record.levelname in _COLORS:
            return f"{_COLORS[record.levelname]}{text}{_RESET}"
        return text


def setup_logging(level: Optional[str] = None) -> logging.Logger:
    """安装唯一的stderr处理器"""
    level = level or os.environ.get("QUALIMETA_LOG_LEVEL", "INFO")
    root = logging.getLogger(_ROOT)
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(LevelFormatter(color_enabled(sys.stderr)))
    root.addHandler(handler)
    root.setLevel(level.upper())
    root.propagate = False
    return root


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(f"{_ROOT}.{name}")


class RunLogger:
    """运行证据日志：每个流水线事件一行JSON"""

    def __init__(self, log_file: str = None, run_id: str = config.DEFAULT_RUN_ID, clock=None):
        self.log_file = log_file or os.path.join(config.LOG_DIR, "run_log.jsonl")
        os.makedirs(os.path.dirname(self.log_file) or ".", exist_ok=True)
        self.run_id = run_id
        self.clock = clock

    def log_event(self, event: str, **details):
        """记录一个事件"""
        entry = {
            "run_id": self.run_id,
            "event": event,
            "timestamp": self.clock().isoformat() if self.clock else None,
            **details,
        }
        with jsonlines.open(self.log_file, mode="a") as writer:
            writer.write(entry)

    def load_logs(self) -> List[Dict]:
        """加载所有日志"""
        if not os.path.exists(self.log_file):
            return []
        with jsonlines.open(self.log_file, mode="r") as reader:
            return [entry for entry in reader]

    def get_run_logs(self, run_id: str) -> List[Dict]:
        """获取特定运行的日志"""
        return [entry for entry in self.load_logs() if entry.get("run_id") == run_id]
