ENV_WORKERS = "QSEXT_WORKERS"
ENV_ENUMERATION_BUDGET = "QSEXT_ENUMERATION_BUDGET"
ENV_CONFIG = "QSEXT_CONFIG"
ENV_BENCH_K = "QSEXT_BENCH_K"
ENV_LOADING_MODE = "QSEXT_LOADING_MODE"
ENV_FILE = ".env"

DEFAULT_WORKERS = 1
DEFAULT_BENCH_K = 4
DEFAULT_BENCH_BYTES = 1 << 20
DEFAULT_BENCH_M = 1024

BIT_ORDER = "lsb-first"
