"""Structured errors shared across the toolkit."""


class ZefcError(Exception):
    """Error carrying a machine-readable code and a detail payload."""

    def __init__(self, code, message, **details):
        super().__init__(message)
        self.code = code
        self.message = message
        self.details = details

    def payload(self):
        obj = {"code": self.code, "message": self.message}
        if self.details:
            obj["details"] = {k: v for k, v in sorted(self.details.items())}
        return obj
