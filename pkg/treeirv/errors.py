from typing import Any, Optional


class TreeIrvError(Exception):
    """Base error carrying the process exit code and a human-readable detail"""

    exit_code = 1

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class InputError(TreeIrvError):
    exit_code = 2


class TreeFormatError(InputError):
    """Tree file diagnostic; `reason` names the failed check"""

    def __init__(self, reason: str, detail: str, line: Optional[int] = None):
        if line is not None:
            detail = f"line {line}: {detail}"
        super().__init__(f"{reason.replace('_', ' ')}: {detail}")
        self.reason = reason
        self.line = line


class BudgetExceededError(InputError):
    pass


class PolicyError(InputError):
    pass


class InternalDpError(TreeIrvError):
    exit_code = 1


class CheckDisagreementError(TreeIrvError):
    exit_code = 3

    def __init__(self, what: str, computed: Any, oracle: Any):
        super().__init__(f"check failed for {what}: computed={computed!r} oracle={oracle!r}")
        self.what = what
        self.computed = computed
        self.oracle = oracle
