from modules.detectors.dto import DetectorListDTO, DetectorPredictionDTO
from shared import base_response

detectors_response = {
    **base_response,
    200: {
        "description": "Registered detectors",
        "model": DetectorListDTO,
    },
}

predict_response = {
    **base_response,
    200: {
        "description": "Fake probability of the image",
        "model": DetectorPredictionDTO,
    },
    400: {
        "description": "Image cannot be decoded or the detector is not bundled",
    },
    404: {
        "description": "Unknown detector or no checkpoint for it",
    },
}
