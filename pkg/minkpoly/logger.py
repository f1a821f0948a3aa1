import json
import logging
import os
from datetime import datetime
from typing import Dict, List, Any, Optional

from rich.logging import RichHandler
from rich.console import Console
from logging.handlers import RotatingFileHandler

from .config import Config, get_config

logger = logging.getLogger(__name__)

_configured = False


def setup_logging(config: Optional[Config] = None):
    """Set up logging for the application."""
    global _configured
    if _configured:
        return
    config = config or get_config()
    os.makedirs(config.log_dir, exist_ok=True)
    log_file = os.path.join(config.log_dir, "minkpoly.log")

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.INFO if config.verbose else logging.WARNING)

    rich_handler = RichHandler(
        console=Console(stderr=True),
        show_time=True,
        show_path=False,
        rich_tracebacks=True
    )
    rich_handler.setLevel(logging.INFO)

    file_handler = RotatingFileHandler(
        log_file, maxBytes=10*1024*1024, backupCount=5  # 10 MB per file, 5 backups
    )
    file_handler.setLevel(logging.INFO)
    file_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))

    root_logger.addHandler(rich_handler)
    root_logger.addHandler(file_handler)
    _configured = True

    logger.info(f"Logger initialized. Logs will be stored in {config.log_dir}")


class RunLogger:
    """
    Records each CLI run as a JSON file under the log directory.
    """
    def __init__(self, log_dir: Optional[str] = None):
        self.log_dir = log_dir or get_config().log_dir

    def log_run(self, command: str, options: Dict[str, Any], exit_code: int, report: Any) -> str:
        """
        Write one run record.

        Args:
            command: Subcommand name
            options: The run configuration as a plain dict
            exit_code: Process exit code
            report: The JSON-ready report that was emitted

        Returns:
            Path to the log file, or "" when it could not be written
        """
        now = datetime.now()
        log_file = os.path.join(self.log_dir, f"run_{now.strftime('%Y%m%d_%H%M%S_%f')}.json")
        log_data = {
            "datetime": now.isoformat(),
            "command": command,
            "options": options,
            "exit_code": exit_code,
            "report": report,
        }
        try:
            os.makedirs(self.log_dir, exist_ok=True)
            with open(log_file, 'w') as f:
                json.dump(log_data, f, indent=2, default=str)
            logger.info(f"Run logged to {log_file}")
            return log_file
        except Exception as e:
            logger.warning(f"Failed to log run: {str(e)}")
            return ""

    def get_run_history(self, limit: Optional[int] = None) -> List[Dict]:
        """
        Get recorded runs, newest first.

        Args:
            limit: Maximum number of entries to return
        """
        history = []
        try:
            log_files = [os.path.join(self.log_dir, f) for f in os.listdir(self.log_dir)
                         if f.startswith("run_") and f.endswith(".json")]
        except OSError as e:
            logger.warning(f"Failed to list run history: {str(e)}")
            return []

        # file names carry the timestamp down to microseconds
        log_files.sort(reverse=True)
        if limit is not None:
            log_files = log_files[:limit]

        for log_file in log_files:
            try:
                with open(log_file, 'r') as f:
                    history.append(json.load(f))
            except Exception as e:
                logger.warning(f"Failed to read log file {log_file}: {str(e)}")
        return history
