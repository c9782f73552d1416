"""Main FastAPI application"""

import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI

from graphvq import __version__
from graphvq.api import retrieval
from graphvq.core.config import settings
from graphvq.core.vocabulary import load_vocabulary
from graphvq.models.schemas import HealthResponse

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.log_level.upper()),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Load the vocabulary on startup, drop it on shutdown"""
    logger.info("Starting graphvq retrieval service")
    if settings.vocab_path is not None:
        try:
            vocab = load_vocabulary(settings.vocab_path)
            retrieval.set_service(retrieval.RetrievalService(vocab, seed=settings.default_seed))
            logger.info(f"Serving {vocab.size}-word vocabulary from {settings.vocab_path}")
        except (OSError, ValueError) as e:
            logger.error(f"Failed to load vocabulary {settings.vocab_path}: {e}")
    else:
        logger.warning("No vocabulary configured (GVQ_VOCAB_PATH); data endpoints return 503")

    yield

    logger.info("Shutting down graphvq retrieval service")
    retrieval.set_service(None)


# Create FastAPI app
app = FastAPI(
    title="graphvq",
    description="Visual-word quantization and inverted-index retrieval",
    version=__version__,
    lifespan=lifespan,
)


@app.get("/")
async def root():
    """Root endpoint"""
    return {"service": "graphvq", "version": __version__, "status": "running"}


@app.get("/health", response_model=HealthResponse)
async def health():
    """Health check endpoint"""
    service = retrieval.current_service()
    if service is None:
        return HealthResponse(status="healthy", vocabulary_loaded=False)
    return HealthResponse(
        status="healthy",
        vocabulary_loaded=True,
        vocabulary_size=service.vocabulary.size,
        graph_k=service.vocabulary.graph.k,
        indexed_images=len(service.inverted),
    )


# Include routers
app.include_router(retrieval.router, prefix="/api", tags=["retrieval"])


if __name__ == "__main__":
    import uvicorn

    uvicorn.run("graphvq.api.main:app", host=settings.api_host, port=settings.api_port)
