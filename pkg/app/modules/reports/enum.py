from enum import Enum


class MetricsEnum(Enum):
    EMPTY = "empty"
    SINGLE_CLASS = "single_class"
