from fastapi import FastAPI

from microgrid.core.config import settings
from microgrid.routers import api_router


class App(FastAPI):
    """
    Classe personalizada do FastAPI para a API de planejamento.

    Esta classe herda do FastAPI e define versão, título e caminho raiz a
    partir das configurações.
    """
    def __init__(self, *args, **kwargs) -> None:
        super().__init__(
            *args,
            **kwargs,
            version="0.1.0",
            title=settings.PROJECT_NAME,
            root_path=settings.ROOT_PATH
        )


app = App()
app.include_router(api_router)
