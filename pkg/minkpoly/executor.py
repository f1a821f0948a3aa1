import logging
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Any

from .errors import MinkpolyError

logger = logging.getLogger(__name__)

Check = Callable[[], Dict[str, Any]]


@dataclass
class NamedCheck:
    name: str
    run: Check


class CheckExecutor:
    """Runs named invariant checks in sequence."""

    def __init__(self, stop_on_failure: bool = False):
        self.stop_on_failure = stop_on_failure

    def execute_check(self, check: NamedCheck) -> Dict[str, Any]:
        """
        Run a single check.

        A check returns a dict of measured values and raises (or returns
        ``{"success": False, ...}``) when the invariant does not hold.
        """
        logger.info(f"Running check: {check.name}")
        started = time.perf_counter()
        try:
            details = dict(check.run() or {})
            success = bool(details.pop("success", True))
        except MinkpolyError as e:
            details = e.to_payload()
            details.pop("success", None)
            success = False
        except AssertionError as e:
            details = {"error": "AssertionError", "message": str(e)}
            success = False
        except Exception as e:
            logger.exception(f"Check '{check.name}' raised: {str(e)}")
            details = {"error": type(e).__name__, "message": str(e)}
            success = False

        elapsed = time.perf_counter() - started
        if success:
            logger.info(f"Check passed: {check.name} ({elapsed:.2f}s)")
        else:
            logger.error(f"Check failed: {check.name}: {details.get('message', details)}")
        return {"check": check.name, "success": success, "details": details}

    def execute_checks(self, checks: List[NamedCheck]) -> List[Dict[str, Any]]:
        results = []
        for check in checks:
            result = self.execute_check(check)
            results.append(result)
            if not result["success"] and self.stop_on_failure:
                logger.warning(f"Stopping after check failure: {check.name}")
                break
        return results
