import os

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

LOG_LEVEL = os.getenv("TREEIRV_LOG_LEVEL", "INFO").upper()
DEFAULT_JOBS = int(os.getenv("TREEIRV_JOBS", "1"))

# Oracle caps, enforced before any enumeration starts
ORACLE_MAX_N = int(os.getenv("TREEIRV_ORACLE_MAX_N", "12"))
ORACLE_MAX_SUBSETS = int(os.getenv("TREEIRV_ORACLE_MAX_SUBSETS", str(1 << 16)))

# 0 means "use the n**9 census for the tree at hand"
KILL_STATE_CAP = int(os.getenv("TREEIRV_KILL_STATE_CAP", "0"))

SELFTEST_MAX_N = int(os.getenv("TREEIRV_SELFTEST_MAX_N", "5"))

# Distortion scans over "all" or "anchored" configurations stop here
MAX_CONFIGS = int(os.getenv("TREEIRV_MAX_CONFIGS", str(1 << 16)))


def kill_state_cap(n: int) -> int:
    return KILL_STATE_CAP if KILL_STATE_CAP > 0 else max(n, 2) ** 9
