from .descriptions import metrics_description
from .dto import MetricsRequestDTO
from .enum import MetricsEnum
from .response import metrics_response
from .route import router

__all__ = [
    "metrics_description",
    "MetricsRequestDTO",
    "MetricsEnum",
    "metrics_response",
    "router",
]
