from pydantic_settings import BaseSettings, SettingsConfigDict


class BenchSettings(BaseSettings):
    """Microbenchmark defaults that can be set using environment variables.

    Reference: https://docs.pydantic.dev/latest/usage/pydantic_settings/
    """

    model_config = SettingsConfigDict(env_prefix="LOTARU_BENCH_")

    # Prime verification: ten seconds, primes up to 20,000
    cpu_limit_secs: float = 10.0
    max_prime: int = 20_000
    # LU solve on a 200 x 200 matrix, repeated for at least one second
    flops_n: int = 200
    flops_min_secs: float = 1.0
    # Memory: 1 MiB blocks over 100 GiB
    mem_block: int = 1 << 20
    mem_total: int = 100 << 30
    # Sequential I/O
    io_file_size: int = 256 << 20
    io_block: int = 1 << 20


# Create a BenchSettings object
bench_settings = BenchSettings()
