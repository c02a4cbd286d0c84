import os
from pathlib import Path

import dotenv

dotenv.load_dotenv()

ROOT_DIR = Path(__file__).parent.parent.parent
OUTPUT_DIR = Path(os.getenv("POLYDG_OUTPUT_DIR", Path.cwd() / "polydg_output")).resolve()
CACHE_DIR = Path(os.getenv("POLYDG_CACHE_DIR", OUTPUT_DIR / "cache")).resolve()
CONFIGS_DIR = ROOT_DIR / "configs"


def default_workers() -> int:
    return max(1, int(os.getenv("POLYDG_WORKERS", "1")))
