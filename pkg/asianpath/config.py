import logging
import logging.config
import os

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

TOOL_VERSION = "0.1.0"

BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
LOG_CONFIG = os.getenv("ASIANPATH_LOG_CONFIG", os.path.join(BASE_DIR, "logging.ini"))
LOG_FORMAT = "%(levelname)-5.5s [%(name)s] %(message)s"

FALLBACK_SEED = 20090602


def read_default_seed() -> int:
    """Seed used when a run names none: ASIANPATH_SEED, else FALLBACK_SEED.

    Like ASIANPATH_THREADS, an unusable value is logged and ignored.
    """
    raw = os.getenv("ASIANPATH_SEED")
    if raw:
        try:
            seed = int(raw)
            if 0 <= seed < 2**64:
                return seed
        except ValueError:
            pass
        logger.warning("Ignoring invalid ASIANPATH_SEED=%r", raw)
    return FALLBACK_SEED


DEFAULT_SEED = read_default_seed()


def get_thread_cap() -> int:
    """Worker thread cap for Monte Carlo chunks.

    ASIANPATH_THREADS wins when it holds a positive integer; otherwise the
    hardware default.
    """
    raw = os.getenv("ASIANPATH_THREADS")
    if raw:
        try:
            cap = int(raw)
            if cap >= 1:
                return cap
        except ValueError:
            pass
        logger.warning("Ignoring invalid ASIANPATH_THREADS=%r", raw)
    return os.cpu_count() or 1


_configured = False


def configure_logging(level: str | None = None):
    global _configured
    if _configured:
        return
    if os.path.exists(LOG_CONFIG):
        logging.config.fileConfig(LOG_CONFIG, disable_existing_loggers=False)
    else:
        logging.basicConfig(format=LOG_FORMAT, level=logging.WARNING)
    if level:
        logging.getLogger("asianpath").setLevel(level.upper())
    _configured = True
