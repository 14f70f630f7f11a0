from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    PROJECT_NAME: str = "ID-logic Abductive Solver"
    STEP_BUDGET: int = 10_000_000
    MAX_SOLUTIONS: int = 1
    ENUMERATION_BOUND: int = 2**24
    ACTIVE_DOMAIN_FALLBACK: bool = True
    LOG_LEVEL: str = "WARNING"

    class Config:
        env_file = ".env"
        env_prefix = "IDL_"


settings = Settings()
