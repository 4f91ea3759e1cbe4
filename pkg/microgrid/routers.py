from fastapi import APIRouter

from microgrid.controllers.plan import router as plan

api_router = APIRouter()
api_router.include_router(plan, prefix="/plans")
