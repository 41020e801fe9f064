from fastapi import APIRouter
from modules import detectors, reports

router = APIRouter()

router.include_router(detectors.router)
router.include_router(reports.router)
