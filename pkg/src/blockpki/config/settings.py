from pathlib import Path
import logging
from dotenv import load_dotenv
from functools import lru_cache
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import field_validator

# Load environment variables from .env
env_path = Path(__file__).resolve().parent.parent.parent.parent / ".env"
load_dotenv(dotenv_path=env_path)

SUPPORTED_GROUPS = ("secp256k1", "tiny")


class Settings(BaseSettings):
    # App settings
    APP_TITLE: str = "BlockPKI Simulator"
    APP_VERSION: str = "0.1.0"

    # Observability settings
    ENVIRONMENT: str = "development"
    LOG_LEVEL: str = "INFO"

    # Seed fallback for every CLI command (--seed wins)
    BLOCKPKI_SEED: Optional[int] = None

    # Signature group
    BLOCKPKI_GROUP: str = "secp256k1"

    # Chain defaults
    MEAN_BLOCK_INTERVAL: float = 15.0
    GAS_PRICE: int = 20
    CONFIRMATION_DEPTH: int = 12
    BLOCK_TX_LIMIT: int = 100
    GENESIS_TIME: int = 1514764800  # 2018-01-01T00:00:00Z

    # Protocol defaults
    ISSUANCE_TIMEOUT_BLOCKS: int = 20
    CHALLENGE_DEADLINE_BLOCKS: int = 2
    CERT_LIFETIME_SECONDS: int = 90 * 24 * 3600
    ONCHAIN_SIGNATURE_CHECK: bool = False

    # Benchmarks
    BENCH_TIMING_ITERATIONS: int = 1000

    @field_validator("MEAN_BLOCK_INTERVAL")
    @classmethod
    def validate_block_interval(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("MEAN_BLOCK_INTERVAL must be positive")
        return v

    @field_validator("CONFIRMATION_DEPTH", "ISSUANCE_TIMEOUT_BLOCKS", "CHALLENGE_DEADLINE_BLOCKS")
    @classmethod
    def validate_non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("block counts must not be negative")
        return v

    @field_validator("BLOCKPKI_GROUP")
    @classmethod
    def validate_group(cls, v: str) -> str:
        if v not in SUPPORTED_GROUPS:
            raise ValueError(
                f"Unknown group '{v}'. Must be one of: {', '.join(SUPPORTED_GROUPS)}"
            )
        return v

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = v.upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"Invalid LOG_LEVEL '{v}'")
        return level

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",  # Ignore extra fields from .env
    )


@lru_cache()
def get_settings() -> Settings:
    return Settings()


settings = get_settings()
