import logging

from fastapi import FastAPI, Request, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import ValidationError

from app.api.endpoints import metrics, prox, restoration
from app.core.config import settings
from app.core.exceptions import ImageIOError, InvalidArgumentError, OgsError
from app.core.logging import setup_logging

setup_logging()
logger = logging.getLogger(__name__)

# Create FastAPI app
app = FastAPI(
    title=settings.APP_NAME,
    version=settings.APP_VERSION,
    description="Explicit overlapping-group shrinkage, its oracles, and OGS-TV restoration",
    docs_url="/docs",
    redoc_url="/redoc",
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.BACKEND_CORS_ORIGINS,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include API routers
app.include_router(prox.router, prefix="/prox", tags=["Proximal operators"])
app.include_router(restoration.router, prefix="/restoration", tags=["Restoration"])
app.include_router(metrics.router, prefix="/metrics", tags=["Metrics"])


@app.exception_handler(InvalidArgumentError)
@app.exception_handler(ImageIOError)
async def bad_input_handler(request: Request, exc: OgsError):
    return JSONResponse(
        status_code=status.HTTP_400_BAD_REQUEST,
        content={"error": type(exc).__name__, "detail": str(exc)},
    )


@app.exception_handler(ValidationError)
async def model_validation_handler(request: Request, exc: ValidationError):
    # raised inside services, e.g. weights that fail GroupWeights checks
    return JSONResponse(
        status_code=status.HTTP_400_BAD_REQUEST,
        content={"error": "ValidationError", "detail": [e["msg"] for e in exc.errors()]},
    )


@app.exception_handler(OgsError)
async def solver_error_handler(request: Request, exc: OgsError):
    logger.error("%s %s failed: %s", request.method, request.url.path, exc)
    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content={
            "error": type(exc).__name__,
            "detail": str(exc),
            "iteration": getattr(exc, "iteration", None),
        },
    )


@app.get("/", tags=["Root"])
async def root():
    """Root endpoint - service banner"""
    return {
        "message": f"Welcome to {settings.APP_NAME}",
        "version": settings.APP_VERSION,
        "status": "healthy",
        "docs": "/docs",
    }


@app.get("/health", tags=["Health"])
async def health_check():
    """Health check endpoint"""
    return {"status": "healthy", "service": settings.APP_NAME}


if __name__ == "__main__":
    import uvicorn

    uvicorn.run("app.main:app", host="0.0.0.0", port=8000, reload=settings.DEBUG)
