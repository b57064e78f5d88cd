"""
Check progress logger
One line per suite event, filtered to the fields worth reading during a run
"""

import json
import sys
import threading
from datetime import datetime
from pathlib import Path
from typing import Optional

ESSENTIAL_KEYS = ('measured', 'reference', 'tolerance', 'passed', 'error', 'dimension')

_lock = threading.Lock()
_log_file: Optional[Path] = None


def configure(path: Optional[Path]) -> None:
    """Direct progress lines to `path` (None keeps them on stderr only)"""
    global _log_file
    _log_file = Path(path) if path else None
    if _log_file is not None:
        try:
            _log_file.parent.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            print(f"❌ Could not create progress log directory: {e}", file=sys.stderr)


def format_line(check_id: str, event: str, data: Optional[dict] = None) -> str:
    timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
    line = f"{timestamp} [CHECK {check_id}] {event}"
    if data:
        essential = {k: v for k, v in data.items() if k in ESSENTIAL_KEYS}
        if essential:
            line += f": {json.dumps(essential, separators=(',', ':'), sort_keys=True, default=str)}"
    return line


def log_check(check_id: str, event: str, data: Optional[dict] = None) -> None:
    """Append a progress line to the log file and mirror it to stderr"""
    line = format_line(check_id, event, data)
    with _lock:
        if _log_file is not None:
            try:
                with open(_log_file, 'a', encoding='utf-8') as f:
                    f.write(line + "\n")
            except OSError as e:
                print(f"[PROGRESS-LOG-ERROR] {line} (file error: {e})", file=sys.stderr)
                return
        print(f"🔄 {line}", file=sys.stderr)


def log_error(check_id: str, error, data: Optional[dict] = None) -> None:
    error_data = {"error": str(error)}
    if data:
        error_data.update(data)
    log_check(check_id, "ERROR", error_data)


def clear_progress_log() -> None:
    if _log_file is None:
        return
    try:
        _log_file.unlink(missing_ok=True)
    except OSError as e:
        print(f"❌ Could not clear progress log: {e}", file=sys.stderr)
