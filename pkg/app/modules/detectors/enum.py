from enum import Enum


class DetectorPredictEnum(Enum):
    NOT_FOUND = "not_found"
    NOT_BUNDLED = "not_bundled"
    DECODE_ERROR = "decode_error"
