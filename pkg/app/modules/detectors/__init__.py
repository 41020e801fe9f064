from .descriptions import get_detectors_description, predict_description
from .dto import DetectorDTO, DetectorListDTO, DetectorPredictionDTO
from .enum import DetectorPredictEnum
from .response import detectors_response, predict_response
from .route import router

__all__ = [
    "get_detectors_description",
    "predict_description",
    "DetectorDTO",
    "DetectorListDTO",
    "DetectorPredictionDTO",
    "DetectorPredictEnum",
    "detectors_response",
    "predict_response",
    "router",
]
