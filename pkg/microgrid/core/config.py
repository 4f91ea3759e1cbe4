from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Classe de configurações para a aplicação.

    Herda da classe `BaseSettings` da biblioteca `pydantic_settings`,
    que fornece funcionalidades como carregamento automático de variáveis de
    ambiente e validação de dados. Os dados do problema (tabelas de
    tecnologias, perfis e premissas) não ficam aqui: eles vivem nos arquivos
    YAML de problema.
    """
    PROJECT_NAME: str = "Microgrid Planner"
    ROOT_PATH: str = "/"

    OUTPUT_DIR: str = "outputs"
    LOG_LEVEL: str = "INFO"

    MAX_MODEL_COLUMNS: int = 2_000_000
    EMBEDDED_COLUMN_LIMIT: int = 400
    EMBEDDED_TIME_LIMIT: float = 60.0
    MPS_NAME_LIMIT: int = 8
    DEFAULT_GAP: float = 0.01

    ORACLE_SEED: int = 20240611
    ORACLE_SUITE_SIZE: int = 24
    ORACLE_MAX_ASSIGNMENTS: int = 200_000

    OUTPUT_SCHEMA_VERSION: str = "1"

    model_config = SettingsConfigDict(env_file=".env")


settings = Settings()
