import pathlib

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", extra="ignore")
    PROJECT_NAME: str = "frameshrink-harness"

    ENV: str = Field(default="dev")
    LOG_LEVEL: str = Field(default="INFO")
    # "text" or "json"
    LOG_FORMAT: str = Field(default="text")

    WORKERS: int = Field(default=1, ge=1)
    DEFAULT_OUTPUT_DIR: pathlib.Path = pathlib.Path("results")


settings = Settings()
