"""
主程序：质量元数据生成与问卷分析的命令行入口
"""
import argparse
import os
import sys
from typing import List, Optional

from tqdm import tqdm

import analytics
import config
import report
from analytics import AnalyticsError
from config import ConfigError, RunConfig
from indices import profile_dataset
from ingest import IngestError, load_datasets
from logger import RunLogger, get_logger, setup_logging
from netmetrics import NetworkError, build_networks, centrality_table

log = get_logger("main")

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_USAGE_ERROR = 2


def banner(title: str):
    print("=" * 50)
    print(title)
    print("=" * 50)


def _load_config(
    config_path: str,
    out: Optional[str] = None,
    seed: Optional[int] = None,
    clock: Optional[str] = None,
) -> RunConfig:
    run_config = config.load_run_config(config_path)
    return run_config.with_overrides(output_dir=out, layout_seed=seed, clock=clock)


def _run_logger(run_config: RunConfig) -> RunLogger:
    return RunLogger(
        log_file=os.path.join(run_config.output_dir, "logs", "run_log.jsonl"),
        run_id=run_config.run_id,
        clock=run_config.now,
    )


def _profile_all(datasets, run_config: RunConfig):
    return [
        profile_dataset(dataset, run_config)
        for dataset in tqdm(datasets, desc="计算质量指标", unit="dataset", disable=None)
    ]


def cmd_profile(
    config_path: str,
    out: Optional[str] = None,
    seed: Optional[int] = None,
    clock: Optional[str] = None,
) -> int:
    """逐个数据集计算质量概况，写出 profiles/<dataset_id>.profile.json"""
    banner("阶段1: 计算质量指标")
    try:
        run_config = _load_config(config_path, out, seed, clock)
        if not run_config.datasets:
            raise ConfigError("配置中没有数据集")
    except ConfigError as e:
        log.error("配置错误: %s", e)
        return EXIT_USAGE_ERROR

    try:
        datasets = load_datasets(run_config)
    except IngestError as e:
        log.error("数据加载失败: %s", e)
        return EXIT_INPUT_ERROR

    run_logger = _run_logger(run_config)
    for dataset in datasets:
        run_logger.log_event("dataset_loaded", dataset_id=dataset.id, rows=dataset.row_count)
    profile_dir = os.path.join(run_config.output_dir, config.PROFILE_SUBDIR)
    os.makedirs(profile_dir, exist_ok=True)
    for profile in _profile_all(datasets, run_config):
        run_logger.log_event("profile_computed", dataset_id=profile.dataset_id)
        path = os.path.join(profile_dir, f"{profile.dataset_id}.profile.json")
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(report.to_json(profile.to_dict()))
        run_logger.log_event("artifact_written", dataset_id=profile.dataset_id, path=path)
        print(f"  ✓ {profile.dataset_id}: {path}")

    print(f"质量概况已写出: {len(datasets)} 个数据集")
    return EXIT_OK


def cmd_compare(
    config_path: str,
    out: Optional[str] = None,
    seed: Optional[int] = None,
    clock: Optional[str] = None,
) -> int:
    """多数据集对比：质量指标、变量网络、变量指标 → JSON + HTML报告"""
    banner("阶段1: 加载数据集")
    try:
        run_config = _load_config(config_path, out, seed, clock)
        if len(run_config.datasets) < 2:
            raise ConfigError(f"对比至少需要2个数据集，当前 {len(run_config.datasets)} 个")
    except ConfigError as e:
        log.error("配置错误: %s", e)
        return EXIT_USAGE_ERROR

    run_logger = _run_logger(run_config)
    try:
        datasets = load_datasets(run_config)
        for dataset in datasets:
            run_logger.log_event("dataset_loaded", dataset_id=dataset.id, rows=dataset.row_count)

        banner("阶段2: 计算质量指标")
        profiles = _profile_all(datasets, run_config)
        for profile in profiles:
            run_logger.log_event("profile_computed", dataset_id=profile.dataset_id)

        banner("阶段3: 构建变量共现网络")
        networks = build_networks(datasets)
        centrality = centrality_table(datasets)
        for network in networks:
            run_logger.log_event(
                "network_built",
                scope=network.scope.label,
                nodes=network.graph.number_of_nodes(),
                edges=network.graph.number_of_edges(),
            )
            print(f"  {network.scope.label}: {network.graph.number_of_nodes()} 个变量, "
                  f"{network.graph.number_of_edges()} 条边")

        banner("阶段4: 生成报告")
        document = report.generate(datasets, profiles, networks, centrality, run_config)
        json_path, html_path = report.write_artifacts(document, run_config.output_dir)
    except IngestError as e:
        log.error("数据加载失败: %s", e)
        return EXIT_INPUT_ERROR
    except (NetworkError, report.ReportError) as e:
        log.error("报告生成失败: %s", e)
        return EXIT_INPUT_ERROR

    run_logger.log_event("artifact_written", json_path=json_path, html_path=html_path)
    print(f"质量元数据: {json_path}")
    print(f"对比报告: {html_path}")
    return EXIT_OK


def cmd_survey(responses_path: str, truth_path: str, out_path: str) -> int:
    """问卷分析：无法评价比例、变异系数、错误回答率、Simpson多样性、Fisher检验"""
    banner("问卷分析")
    try:
        responses = analytics.load_responses(responses_path)
        truth = analytics.load_ground_truth(truth_path)
        result = analytics.analyze(responses, truth)
    except AnalyticsError as e:
        log.error("问卷分析失败: %s", e)
        return EXIT_INPUT_ERROR

    out_dir = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(out_dir, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(analytics.to_json(result))
    RunLogger(log_file=os.path.join(out_dir, "logs", "run_log.jsonl")).log_event(
        "survey_analyzed", participants=result["n_participants"], path=out_path
    )
    print(f"参与者: {result['n_participants']}，分析记录: {len(result['quality_records'])}")
    print(f"分析结果: {out_path}")
    return EXIT_OK


def cmd_generate(out_dir: str, seed: int = config.DEFAULT_LAYOUT_SEED) -> int:
    """生成12个演示数据集、运行配置、真值与合成问卷"""
    import generate_data

    banner("生成演示数据")
    generate_data.main(out_dir, seed)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qualimeta", description="数据质量元数据生成与对比工具")
    parser.add_argument("--log-level", default=None, help="日志级别（默认读取 QUALIMETA_LOG_LEVEL，否则 INFO）")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (("profile", "逐个数据集写出质量概况"), ("compare", "多数据集对比并生成报告")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="运行配置JSON路径")
        cmd.add_argument("--out", default=None, help="输出目录（覆盖配置中的 output_dir）")
        cmd.add_argument("--seed", type=int, default=None, help="网络布局随机种子")
        cmd.add_argument("--clock", default=None, help="固定的生成时间（ISO 8601），用于可复现输出")

    survey = sub.add_parser("survey", help="分析问卷回答")
    survey.add_argument("--responses", required=True, help="问卷回答CSV路径")
    survey.add_argument("--truth", required=True, help="质量真值JSON路径")
    survey.add_argument("--out", required=True, help="分析结果JSON路径")

    generate = sub.add_parser("generate", help="生成演示数据集与合成问卷")
    generate.add_argument("--out", default=config.SAMPLE_DIR, help="输出目录")
    generate.add_argument("--seed", type=int, default=config.DEFAULT_LAYOUT_SEED, help="随机种子")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """主函数"""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)

    if args.command == "profile":
        return cmd_profile(args.config, args.out, args.seed, args.clock)
    if args.command == "compare":
        return cmd_compare(args.config, args.out, args.seed, args.clock)
    if args.command == "survey":
        return cmd_survey(args.responses, args.truth, args.out)
    return cmd_generate(args.out, args.seed)


if __name__ == '__main__':
    sys.exit(main())
