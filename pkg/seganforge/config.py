import os

from dotenv import load_dotenv

# Load environment variables
load_dotenv()


class Settings:
    """Application settings loaded from environment variables"""

    # Logging settings
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    ENVIRONMENT: str = os.getenv("ENVIRONMENT", "development")
    LOG_DIR: str = os.getenv("SEGANFORGE_LOG_DIR", "logs")

    # Experiment orchestration
    JOBS: str = os.getenv("SEGANFORGE_JOBS", "1")

    # External PESQ adapter (command template with {clean} and {degraded} placeholders)
    PESQ_COMMAND: str | None = os.getenv("SEGANFORGE_PESQ_COMMAND")
    PESQ_PATTERN: str | None = os.getenv("SEGANFORGE_PESQ_PATTERN")

    @property
    def jobs(self) -> int:
        """Parallel experiment runs, parsed from SEGANFORGE_JOBS"""
        return int(self.JOBS)

    def validate(self) -> tuple[bool, str | None]:
        """Validate that settings are usable"""
        try:
            jobs = int(self.JOBS)
        except ValueError:
            return False, f"SEGANFORGE_JOBS must be an integer, got {self.JOBS!r}"
        if jobs < 1:
            return False, f"SEGANFORGE_JOBS must be >= 1, got {jobs}"
        if self.PESQ_COMMAND is not None:
            if "{clean}" not in self.PESQ_COMMAND or "{degraded}" not in self.PESQ_COMMAND:
                return False, "SEGANFORGE_PESQ_COMMAND must contain {clean} and {degraded}"
        return True, None


# Global settings instance
settings = Settings()
