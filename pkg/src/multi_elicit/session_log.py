"""
Session logging: rich console output plus an optional plain-text log file.

Payloads (JSON, CSV) go to stdout; everything written through SessionLog goes
to stderr so piping a subcommand's output stays clean.
"""
import re
from datetime import datetime
from io import StringIO
from pathlib import Path
from typing import Optional, TextIO

from rich.console import Console


def _strip_ansi(text: str) -> str:
    """Remove ANSI escape codes from a string."""
    ansi_escape = re.compile(r'\x1B(?:[@-Z\\-_]|\[[0-?]*[ -/]*[@-~])')
    return ansi_escape.sub('', text)


def _strip_markup(text: str) -> str:
    """Remove rich markup tags such as [dim] or [/red]."""
    return re.sub(r'\[/?[a-z ]+\]', '', text)


def render_plain(renderable, width: int = 100) -> str:
    """
    Renders a rich object (Table, Panel, ...) to text without colors.

    Args:
        renderable: Rich object to render.
        width: Console width used for layout.

    Returns:
        The rendered text, ANSI codes removed.
    """
    string_io = StringIO()
    console = Console(file=string_io, force_terminal=True, width=width)
    console.print(renderable)
    return _strip_ansi(string_io.getvalue())


class SessionLog:
    """
    Console + file logger for one toolkit session.

    Console lines are printed only when verbose; the log file (if any)
    receives every line, colors removed, framed by start/end banners.
    """

    def __init__(self, verbose: bool = False, log_file: Optional[str] = None, console: Optional[Console] = None):
        self.verbose = verbose
        self.console = console or Console(stderr=True)
        self.log_file = log_file
        self.log_handle: Optional[TextIO] = None
        if self.log_file:
            log_path = Path(self.log_file)
            log_path.parent.mkdir(parents=True, exist_ok=True)
            self.log_handle = open(log_path, 'a', encoding='utf-8')
            self._write_log(f"\n{'=' * 80}\n")
            self._write_log(f"NEW SESSION - {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}\n")
            self._write_log(f"{'=' * 80}\n")

    def _write_log(self, message: str):
        if self.log_handle:
            try:
                self.log_handle.write(_strip_ansi(message))
                self.log_handle.flush()
            except OSError as e:
                if self.verbose:
                    self.console.print(f"[yellow]⚠️ Could not write log: {e}[/yellow]")

    def info(self, message: str):
        """Progress line, dimmed on the console."""
        self._write_log(f"{_strip_markup(message)}\n")
        if self.verbose:
            self.console.print(f"[dim]{message}[/dim]")

    def success(self, message: str):
        self._write_log(f"✓ {_strip_markup(message)}\n")
        if self.verbose:
            self.console.print(f"[green]✓ {message}[/green]")

    def warning(self, message: str):
        """Warnings are always shown."""
        self._write_log(f"⚠️ {_strip_markup(message)}\n")
        self.console.print(f"[yellow]⚠️ {message}[/yellow]")

    def error(self, message: str):
        """Errors are always shown."""
        self._write_log(f"✗ {_strip_markup(message)}\n")
        self.console.print(f"[red]✗ {message}[/red]")

    def section(self, title: str):
        self._write_log(f"\n{'─' * 80}\n{title}\n{'─' * 80}\n")
        if self.verbose:
            self.console.print(f"\n[bold cyan]{title}[/bold cyan]")

    def show(self, renderable):
        """Prints a rich renderable (table, panel) and logs its plain form."""
        self._write_log(render_plain(renderable))
        if self.verbose:
            self.console.print(renderable)

    def close(self):
        if self.log_handle:
            try:
                self._write_log(f"\n{'=' * 80}\n")
                self._write_log(f"END OF SESSION - {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}\n")
                self._write_log(f"{'=' * 80}\n\n")
                self.log_handle.close()
            except OSError:
                pass
            self.log_handle = None

    def __del__(self):
        self.close()


_SESSION_LOG: Optional[SessionLog] = None


def get_session_log() -> SessionLog:
    """Returns the process-wide SessionLog, creating a quiet one on first use."""
    global _SESSION_LOG
    if _SESSION_LOG is None:
        _SESSION_LOG = SessionLog()
    return _SESSION_LOG


def configure_session_log(verbose: bool = False, log_file: Optional[str] = None) -> SessionLog:
    """Replaces the process-wide SessionLog (closing the previous one)."""
    global _SESSION_LOG
    if _SESSION_LOG is not None:
        _SESSION_LOG.close()
    _SESSION_LOG = SessionLog(verbose=verbose, log_file=log_file)
    return _SESSION_LOG
