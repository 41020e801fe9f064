from enum import Enum


class AggregationEnum(str, Enum):
    MEAN = "mean"
    MAX = "max"
    MAJORITY = "majority"
