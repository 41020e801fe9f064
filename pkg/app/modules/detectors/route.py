from fastapi import APIRouter, Depends, File, Query, Response, UploadFile, status

from modules.detectors.descriptions import get_detectors_description, predict_description
from modules.detectors.dto import DetectorListDTO, DetectorPredictionDTO
from modules.detectors.enum import DetectorPredictEnum
from modules.detectors.response import detectors_response, predict_response
from services.detector_service import DetectorService

router = APIRouter(tags=["Detectors"], prefix="/detectors")


@router.get(
    "/",
    summary="List detectors",
    description=get_detectors_description,
    response_model=DetectorListDTO,
    responses=detectors_response,
    status_code=status.HTTP_200_OK,
)
async def get_detectors(detector_service: DetectorService = Depends(DetectorService)):
    """
    List registered detectors
    :return: detectors sorted by name
    """
    return await detector_service.get_detectors_service()


@router.post(
    "/{name}/predict",
    summary="Score an image",
    description=predict_description,
    response_model=DetectorPredictionDTO,
    responses=predict_response,
    status_code=status.HTTP_200_OK,
)
async def predict(
    name: str,
    image: UploadFile = File(..., description="Face crop, any format OpenCV decodes"),
    threshold: float = Query(0.5, ge=0, le=1, description="Decision threshold"),
    detector_service: DetectorService = Depends(DetectorService),
):
    """
    Score an uploaded image
    :param name: detector name
    :return: fake probability and predicted label
    """
    result = await detector_service.predict_service(name, await image.read(), threshold)
    if result == DetectorPredictEnum.NOT_FOUND:
        return Response(status_code=status.HTTP_404_NOT_FOUND, content="No checkpoint for this detector")
    if result == DetectorPredictEnum.NOT_BUNDLED:
        return Response(
            status_code=status.HTTP_400_BAD_REQUEST,
            content=f"detector {name!r} is not bundled - provide external plug-in",
        )
    if result == DetectorPredictEnum.DECODE_ERROR:
        return Response(status_code=status.HTTP_400_BAD_REQUEST, content="Image cannot be decoded")
    return result
