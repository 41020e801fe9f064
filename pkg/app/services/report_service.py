from modules.evaluation import MetricsReport
from modules.reports.dto import MetricsRequestDTO
from modules.reports.enum import MetricsEnum
from services.evaluation_service import build_report
from shared.exceptions import EmptyInputError, UndefinedAUCError


class ReportService:
    async def metrics_service(self, request: MetricsRequestDTO) -> MetricsReport | MetricsEnum:
        """
        Builds the metrics report of the posted predictions
        :param request: records and threshold
        :return: report, or the reason it is undefined
        """
        try:
            return build_report(request.records, request.threshold, request.model)
        except EmptyInputError:
            return MetricsEnum.EMPTY
        except UndefinedAUCError:
            return MetricsEnum.SINGLE_CLASS
