"""
初始化目录结构
"""
import os
import config


def init_directories(output_dir: str = config.OUTPUT_DIR):
    """创建必要的目录"""
    directories = [
        config.DATA_DIR,
        config.SAMPLE_DIR,
        output_dir,
        os.path.join(output_dir, config.PROFILE_SUBDIR),
        os.path.join(output_dir, "logs"),
    ]

    for directory in directories:
        os.makedirs(directory, exist_ok=True)
        print(f"创建目录: {directory}")
    return directories


if __name__ == '__main__':
    init_directories()
    print("目录初始化完成！")
