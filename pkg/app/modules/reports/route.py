from fastapi import APIRouter, Depends, Response, status

from modules.evaluation import MetricsReport
from modules.reports.descriptions import metrics_description
from modules.reports.dto import MetricsRequestDTO
from modules.reports.enum import MetricsEnum
from modules.reports.response import metrics_response
from services.report_service import ReportService

router = APIRouter(tags=["Reports"], prefix="/reports")


@router.post(
    "/metrics",
    summary="Compute metrics",
    description=metrics_description,
    response_model=MetricsReport,
    responses=metrics_response,
    status_code=status.HTTP_200_OK,
)
async def compute_metrics(
    request: MetricsRequestDTO,
    report_service: ReportService = Depends(ReportService),
):
    result = await report_service.metrics_service(request)
    if result == MetricsEnum.EMPTY:
        return Response(status_code=status.HTTP_400_BAD_REQUEST, content="No prediction records")
    if result == MetricsEnum.SINGLE_CLASS:
        return Response(
            status_code=status.HTTP_400_BAD_REQUEST,
            content="AUC is undefined: records contain a single class",
        )
    return result
