# ===============================
# CONFIGURATION LOADER
# ===============================
"""
Loads and validates configuration from config.json
"""
import json
import os

PACKAGE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

ALGORITHM_CHOICES = ("sesd", "semd", "temd")
MODE_CHOICES = ("exhaustive", "random")
CONSENSUS_MODE_CHOICES = ("derived", "swap", "primitive")


def find_config_file():
    """COMMON2_CONFIG, then ./config.json, then the config.json shipped with the package."""
    override = os.environ.get("COMMON2_CONFIG")
    if override:
        return override
    if os.path.exists("config.json"):
        return "config.json"
    return os.path.join(PACKAGE_DIR, "config.json")


CONFIG_FILE = find_config_file()

# Load configuration
if os.path.exists(CONFIG_FILE):
    with open(CONFIG_FILE, 'r', encoding='utf-8') as f:
        config = json.load(f)
else:
    print(f"Warning: {CONFIG_FILE} not found. Using default configuration.")
    config = {}

# Extract configuration values
ALGORITHM = config.get("ALGORITHM", "semd")
ENQUEUERS = config.get("ENQUEUERS", 1)
DEQUEUERS = config.get("DEQUEUERS", 2)
ENQ_OPS = config.get("ENQ_OPS", 2)
DEQ_OPS = config.get("DEQ_OPS", 1)
MODE = config.get("MODE", "exhaustive")
SEED = config.get("SEED", 42)
MAX_SCHEDULES = config.get("MAX_SCHEDULES", 0)
RANDOM_SCHEDULES = config.get("RANDOM_SCHEDULES", 1000)
MAX_TOTAL_STEPS = config.get("MAX_TOTAL_STEPS", 0)
OUT_DIR = os.environ.get("COMMON2_OUT_DIR") or config.get("OUT_DIR", "results")
CONSENSUS_MODE = config.get("CONSENSUS_MODE", "derived")
DUPLICATE_ITEMS = config.get("DUPLICATE_ITEMS", False)
WINDOW_SIZE = config.get("WINDOW_SIZE", 12)
OPS_PER_THREAD = config.get("OPS_PER_THREAD", 200)
DURATION_SECS = config.get("DURATION_SECS", 60)
CHECKER_NODE_BUDGET = config.get("CHECKER_NODE_BUDGET", 200000)
KEEP_PASSING_TRACES = config.get("KEEP_PASSING_TRACES", 100)
EXPORT_EXCEL = config.get("EXPORT_EXCEL", False)
OUTPUT_EXCEL = config.get("OUTPUT_EXCEL", "suite_report.xlsx")
ERROR_LOG = config.get("ERROR_LOG", "error.txt")
NOTIFY = config.get("NOTIFY", False)
VERBOSE = config.get("VERBOSE", False)
WORKERS = config.get("WORKERS", 1)

# Validate choices
if ALGORITHM not in ALGORITHM_CHOICES:
    print(f"Warning: Unknown ALGORITHM '{ALGORITHM}'. Defaulting to 'semd'.")
    ALGORITHM = "semd"

if MODE not in MODE_CHOICES:
    print(f"Warning: Unknown MODE '{MODE}'. Defaulting to 'exhaustive'.")
    MODE = "exhaustive"

if CONSENSUS_MODE not in CONSENSUS_MODE_CHOICES:
    print(f"Warning: Unknown CONSENSUS_MODE '{CONSENSUS_MODE}'. Defaulting to 'derived'.")
    CONSENSUS_MODE = "derived"

SETTING_KEYS = [
    "ALGORITHM", "ENQUEUERS", "DEQUEUERS", "ENQ_OPS", "DEQ_OPS", "MODE", "SEED",
    "MAX_SCHEDULES", "RANDOM_SCHEDULES", "MAX_TOTAL_STEPS", "OUT_DIR", "CONSENSUS_MODE",
    "DUPLICATE_ITEMS", "WINDOW_SIZE", "OPS_PER_THREAD", "DURATION_SECS", "CHECKER_NODE_BUDGET",
    "KEEP_PASSING_TRACES", "EXPORT_EXCEL", "OUTPUT_EXCEL", "ERROR_LOG", "NOTIFY", "VERBOSE", "WORKERS",
]


def current_settings():
    """Every setting as currently in effect, including CLI overrides."""
    return {key: globals()[key] for key in SETTING_KEYS}
