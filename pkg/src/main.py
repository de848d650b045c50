import logging
import uvicorn
from fastapi import FastAPI, APIRouter, Request, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from src.api.router import designs, bounds, simulations, learners
from src.core.errors import IdentificationError
from src.util.config.setting import configure_logging, settings

# -----------------------
# Configure logging
# -----------------------
configure_logging()
logger = logging.getLogger(__name__)

# -----------------------
# Initialize FastAPI app
# -----------------------
app = FastAPI(
    title="Active System Identification API",
    description="API de conception d'excitation, de simulation, d'apprentissage actif et d'évaluation des bornes de complexité pour les systèmes linéaires.",
    version="1.0.0"
)

# -----------------------
# Configure CORS middleware
# -----------------------
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],  # Ajuster en production
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# -----------------------
# Domain errors escaping the services
# -----------------------
@app.exception_handler(IdentificationError)
async def identification_error_handler(request: Request, exc: IdentificationError):
    logger.warning(f"Erreur du domaine sur {request.url.path} : {exc}")
    return JSONResponse(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, content={"detail": str(exc)})

# -----------------------
# Create main API router
# -----------------------
api_router = APIRouter()
api_router.include_router(designs)
api_router.include_router(bounds)
api_router.include_router(simulations)
api_router.include_router(learners)

# Include the main router with a global prefix
app.include_router(api_router, prefix="/api/v1")

# -----------------------
# Event handlers
# -----------------------
@app.on_event("startup")
async def startup_event():
    logger.info("Starting up the application...")
    settings.log_config()
    logger.info("Application startup complete.")

@app.on_event("shutdown")
async def shutdown_event():
    logger.info("Shutting down the application...")

# -----------------------
# Root endpoints
# -----------------------
@app.get("/")
async def root():
    return {"message": "Welcome to the Active System Identification API. Refer to /docs for API documentation."}

@app.get("/health")
async def health():
    return {"status": "ok"}

# -----------------------
# Run the application with Uvicorn if executed directly
# -----------------------
if __name__ == "__main__":
    uvicorn.run(
        app,
        host=settings.API_HOST,
        port=settings.API_PORT,
        log_level=settings.LOG_LEVEL.lower()
    )
