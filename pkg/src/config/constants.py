"""
应用常量
========

集中管理应用程序中使用的所有常量，包括应用信息、文件格式、
检索与评估默认值、日志配置等，避免在各模块中散落硬编码值。
"""

# ---------------------------------------------------------------------------
# 应用信息
# ---------------------------------------------------------------------------

APP_NAME = "CLOSP Retrieval"
APP_VERSION = "0.1.0"
APP_ORG_NAME = "ClospRetrieval"

# ---------------------------------------------------------------------------
# 二进制容器格式
# ---------------------------------------------------------------------------

CHECKPOINT_MAGIC = b"CLSP"
INDEX_MAGIC = b"CLSI"
CORPUS_IMAGE_MAGIC = b"CLSC"
CONTAINER_VERSION = 1
CORPUS_FORMAT_VERSION = 1

# ---------------------------------------------------------------------------
# 语料库文件名
# ---------------------------------------------------------------------------

CORPUS_METADATA_FILE = "metadata.jsonl"
CORPUS_IMAGE_FILES = {"SAR": "images_sar.bin", "MSI": "images_msi.bin"}
CORPUS_SPLIT_FILE = "split.json"
MANIFEST_SUFFIX = ".manifest.yaml"

# ---------------------------------------------------------------------------
# 编码器默认配置
# ---------------------------------------------------------------------------

DEFAULT_EMBED_DIM = 32
DEFAULT_IMAGE_SIDE = 24
DEFAULT_SH_DEGREE = 3
DEFAULT_SIREN_LAYERS = 2
DEFAULT_SIREN_HIDDEN = 64
DEFAULT_SIREN_OMEGA0 = 30.0
DEFAULT_TEXT_HIDDEN = 64
INITIAL_TEMPERATURE = 0.07

# ---------------------------------------------------------------------------
# 训练默认配置
# ---------------------------------------------------------------------------

DEFAULT_EPOCHS = 30
DEFAULT_BATCH_SIZE = 64
DEFAULT_MAX_LR = 1e-4
DEFAULT_WARMUP_FRACTION = 0.05
DEFAULT_TRAIN_FRACTION = 0.2
ALPHA_SWEEP = (0.25, 0.5, 0.75, 1.0)

# ---------------------------------------------------------------------------
# 检索与评估
# ---------------------------------------------------------------------------

DEFAULT_TOP_K = 1000
EVAL_CUTOFFS = (10, 50, 100, 1000)
RELEVANCE_THRESHOLD = 5
MAX_RELEVANCE = 10
EARTH_RADIUS_KM = 6371.0
DEFAULT_PROBE_PAIRS = 10000

# ---------------------------------------------------------------------------
# 日志配置
# ---------------------------------------------------------------------------

DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_LOG_FILE = "closp.log"
LOG_ROTATION = "10 MB"
LOG_RETENTION = "7 days"

# ---------------------------------------------------------------------------
# 退出码
# ---------------------------------------------------------------------------

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
