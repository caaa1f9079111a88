from enum import StrEnum

__all__ = ("OutputFormat",)


class OutputFormat(StrEnum):
    CSV = "csv"
    JSON = "json"
