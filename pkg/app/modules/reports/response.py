from modules.evaluation import MetricsReport
from shared import base_response

metrics_response = {
    **base_response,
    200: {
        "description": "Metrics report",
        "model": MetricsReport,
    },
    400: {
        "description": "No records, or only one class present",
    },
}
