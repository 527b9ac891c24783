from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, ValidationError
from typing import List, Dict, Any, Literal, Optional
import os
import sys
import traceback
from dotenv import load_dotenv

# Add parent directories to Python path for imports
current_dir = os.path.dirname(os.path.abspath(__file__))
root_dir = os.path.dirname(os.path.dirname(current_dir))
sys.path.insert(0, root_dir)

# Load environment variables
load_dotenv()

from backend.api.config import settings
from backend.core.errors import ConfigError, RISNetError
from backend.harness.cli import parse_architectures
from backend.harness.sweep import json_safe, run_equivalence_check, run_scatter_sweep, run_trial
from backend.models import ScenarioConfig, ScatterRow

VERSION = "1.0.0"

# Pydantic models for API
class EquivCheckRequest(BaseModel):
    seed: int = Field(default_factory=lambda: settings.default_seed, ge=0)
    fixtures: int = Field(default=100, ge=1, le=1000)

class EquivCheckResponse(BaseModel):
    seed: int
    fixtures: int
    max_deviation: float
    passed: bool

class ScatterRequest(BaseModel):
    n_i_list: List[int] = Field(default=[16, 64, 256], min_length=1)
    trials: int = Field(default=1000, ge=1, le=100000)
    seed: int = Field(default_factory=lambda: settings.default_seed, ge=0)
    channel_model: Literal["los_random_phase", "rayleigh"] = "los_random_phase"

class OptimizeRequest(BaseModel):
    n_i: int = Field(default=16, ge=1, le=256)
    architecture: str = "fully"
    coupling: bool = False
    seed: int = Field(default_factory=lambda: settings.default_seed, ge=0)
    trial: int = Field(default=0, ge=0)

class OptimizeResponse(BaseModel):
    n_i: int
    architecture: str
    coupling: bool
    seed: int
    solver_seed: int
    power_w: float
    power_db: Optional[float]
    iterations: int
    converged: bool

# Initialize FastAPI app
app = FastAPI(
    title="RISNet Channel Simulator API",
    description="Multiport-network channel models and RIS optimization for MIMO links",
    version=VERSION
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

print(f"📡 RISNet API ready (z0={settings.z0} Ω)")

@app.get("/")
async def root():
    return {"message": "RISNet Channel Simulator API", "status": "active", "version": VERSION}

@app.get("/health")
async def health():
    return {"status": "healthy", "version": VERSION, "z0": settings.z0}

@app.post("/equiv-check", response_model=EquivCheckResponse)
async def equiv_check(request: EquivCheckRequest):
    """Three-way Z/Y/S equivalence of the general channel on random passive networks"""
    try:
        report = run_equivalence_check(request.seed, request.fixtures)
        return EquivCheckResponse(
            seed=report.seed,
            fixtures=report.fixtures,
            max_deviation=report.max_deviation,
            passed=report.passed
        )
    except RISNetError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except Exception as e:
        print(f"❌ Equivalence check failed: {e}")
        traceback.print_exc()
        raise HTTPException(status_code=500, detail=str(e))

@app.post("/scatter", response_model=List[ScatterRow])
async def scatter(request: ScatterRequest):
    """Structural-scattering Monte Carlo rows"""
    try:
        cfg = ScenarioConfig(
            experiment="scatter",
            n_i_list=request.n_i_list,
            trials=request.trials,
            master_seed=request.seed,
            channel_model=request.channel_model
        )
        return run_scatter_sweep(cfg).scatter
    except ValidationError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except Exception as e:
        print(f"❌ Scatter sweep failed: {e}")
        traceback.print_exc()
        raise HTTPException(status_code=500, detail=str(e))

@app.post("/optimize", response_model=OptimizeResponse)
async def optimize(request: OptimizeRequest):
    """One seeded optimization run, replayable through the CLI sweep"""
    try:
        cfg = ScenarioConfig(
            experiment="optimize",
            n_i_list=[request.n_i],
            architectures=parse_architectures(request.architecture)[:1],
            coupling=request.coupling,
            trials=1,
            master_seed=request.seed
        )
        record = run_trial(cfg, request.n_i, 0, request.trial)
        return OptimizeResponse(
            n_i=record.n_i,
            architecture=record.architecture,
            coupling=record.coupling,
            seed=record.seed,
            solver_seed=record.solver_seed,
            power_w=record.power_w,
            power_db=json_safe(record.power_db),
            iterations=record.iterations,
            converged=record.converged
        )
    except ConfigError as e:
        raise HTTPException(status_code=422, detail=e.messages)
    except (ValidationError, RISNetError) as e:
        raise HTTPException(status_code=422, detail=str(e))
    except Exception as e:
        print(f"❌ Optimization failed: {e}")
        traceback.print_exc()
        raise HTTPException(status_code=500, detail=str(e))

@app.post("/validate-config")
async def validate_config(recipe: Dict[str, Any]):
    """Validate a JSON recipe and report every problem at once"""
    try:
        cfg = ScenarioConfig.model_validate(recipe)
        return {"valid": True, "errors": [], "experiment": cfg.experiment, "master_seed": cfg.master_seed}
    except ValidationError as e:
        errors = [
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" if err["loc"] else err["msg"]
            for err in e.errors()
        ]
        return {"valid": False, "errors": errors}

if __name__ == "__main__":
    import uvicorn
    print(f"🚀 Starting RISNet API on {settings.api_host}:{settings.api_port}")
    uvicorn.run(app, host=settings.api_host, port=settings.api_port)
