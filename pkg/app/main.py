import logging
from contextlib import asynccontextmanager

from api import router
from config import settings
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

__log__ = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    __log__.info(
        "serving %s-preset checkpoints from %s",
        settings.serve.preset,
        settings.serve.checkpoint_dir,
    )
    yield


app = FastAPI(title="DFBench API", lifespan=lifespan)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(router, prefix="/api/v1")
