"""
快速启动脚本：生成演示数据 → 多数据集对比 → 问卷分析
"""
import sys
import os

# 添加当前目录到Python路径
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import config
from init_dirs import init_directories
from generate_data import CONFIG_FILE, RESPONSES_FILE, TRUTH_FILE
from generate_data import main as generate_data_main
from main import main as main_main

if __name__ == '__main__':
    print("初始化目录...")
    init_directories()

    print("\n生成数据...")
    generate_data_main(config.SAMPLE_DIR)

    print("\n运行对比...")
    code = main_main(["compare", "--config", os.path.join(config.SAMPLE_DIR, CONFIG_FILE), "--out", config.OUTPUT_DIR])
    if code != 0:
        sys.exit(code)

    print("\n运行问卷分析...")
    sys.exit(main_main([
        "survey",
        "--responses", os.path.join(config.SAMPLE_DIR, RESPONSES_FILE),
        "--truth", os.path.join(config.SAMPLE_DIR, TRUTH_FILE),
        "--out", os.path.join(config.OUTPUT_DIR, "survey.json"),
    ]))
