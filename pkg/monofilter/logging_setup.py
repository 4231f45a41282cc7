import logging, os, sys

def setup_logging(level: str | int | None = None):
    # stdout carries CSV/JSON results, so logs go to stderr
    level = level or os.getenv("MONOFILTER_LOG_LEVEL", "INFO")
    logging.basicConfig(
        level=level.upper() if isinstance(level, str) else level,
        format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )
