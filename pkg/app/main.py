from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from contextlib import asynccontextmanager
import logging

from app.config import settings
from app.algebra.errors import AlgebraError
from app.api import homology_router, models_router, rank_router, operads_router, presets_router
from app.services import preset_service

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.log_level),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

VERSION = "1.0.0"


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Startup and shutdown events"""
    logger.info("Starting GF(2) Homological Algebra API")
    try:
        presets = preset_service.load()
        logger.info(f"{len(presets)} presets loaded")
        yield
    finally:
        logger.info("Shutting down GF(2) Homological Algebra API")


app = FastAPI(
    title="GF(2) Homological Algebra API",
    description="Minimal models, rank checks and operad calculus over the two-element field",
    version=VERSION,
    lifespan=lifespan
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.cors_origins,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.exception_handler(AlgebraError)
async def algebra_exception_handler(request: Request, exc: AlgebraError):
    status = 500 if exc.exit_code == 3 else 422
    log = logger.error if status == 500 else logger.warning
    log(f"{type(exc).__name__} on {request.url.path}: {exc}")
    return JSONResponse(
        status_code=status,
        content={"error": type(exc).__name__, "detail": str(exc), "exit_code": exc.exit_code}
    )


@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception):
    logger.error(f"Global exception handler caught: {exc}", exc_info=True)
    return JSONResponse(
        status_code=500,
        content={"error": "Internal server error", "detail": str(exc), "exit_code": 3}
    )


@app.get("/health")
async def health_check():
    """Health check endpoint"""
    return {
        "status": "healthy",
        "version": VERSION,
        "presets": len(preset_service.names())
    }


@app.get("/")
async def root():
    """Root endpoint"""
    return {
        "message": "GF(2) Homological Algebra API",
        "version": VERSION,
        "docs": "/docs",
        "health": "/health"
    }


app.include_router(homology_router)
app.include_router(models_router)
app.include_router(rank_router)
app.include_router(operads_router)
app.include_router(presets_router)


def serve() -> None:
    import uvicorn
    uvicorn.run(
        "app.main:app",
        host=settings.api_host,
        port=settings.api_port,
        reload=settings.api_reload
    )


if __name__ == "__main__":
    serve()
