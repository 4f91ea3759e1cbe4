from fastapi import APIRouter, Body, Depends, HTTPException, status

from microgrid.core.exceptions import BaseException
from microgrid.schemas.plan import (
    CompareRequest,
    PlanRequest,
    PlanResponse,
    ValidateResponse,
)
from microgrid.schemas.report import ReductionRow
from microgrid.usecases.plan import PlanUsecase

router = APIRouter(tags=["plans"])


@router.post(path="/", status_code=status.HTTP_200_OK)
async def post(
    body: PlanRequest = Body(...), usecase: PlanUsecase = Depends()
) -> PlanResponse:
    """
    Resolve um ou mais cenários de um problema e devolve seus relatórios.

    Args:
        body (PlanRequest): Problema (embutido ou documento YAML), cenários,
        redução do horizonte e opções do resolvedor.
        usecase (PlanUsecase): Dependência para acessar a lógica de
        planejamento.

    Returns:
        PlanResponse: Relatórios de cada cenário e, quando o BAU foi
        resolvido, a tabela de reduções.

    Raises:
        HTTPException: Com o status da exceção de domínio (422 para problema
        inválido ou inviável, 404 para cenário desconhecido, 413 para modelo
        grande demais).
    """
    try:
        return await usecase.plan(body=body)
    except BaseException as exc:
        raise HTTPException(
            status_code=exc.status_code, detail=exc.message) from exc


@router.post(path="/compare", status_code=status.HTTP_200_OK)
async def compare(
    body: CompareRequest = Body(...), usecase: PlanUsecase = Depends()
) -> list[ReductionRow]:
    """
    Calcula a tabela de reduções frente ao BAU a partir de relatórios já
    produzidos.

    Raises:
        HTTPException: 422 se os relatórios vierem de problemas diferentes
        ou se o BAU não estiver entre eles.
    """
    try:
        return await usecase.compare(body=body)
    except BaseException as exc:
        raise HTTPException(
            status_code=exc.status_code, detail=exc.message) from exc


@router.post(path="/validate", status_code=status.HTTP_200_OK)
async def validate(
    body: PlanRequest = Body(...), usecase: PlanUsecase = Depends()
) -> list[ValidateResponse]:
    try:
        return await usecase.validate(body=body)
    except BaseException as exc:
        raise HTTPException(
            status_code=exc.status_code, detail=exc.message) from exc
