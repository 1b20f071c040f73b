"""Named architecture presets"""

from seganforge.models.schemas import DiscriminatorConfig, GeneratorConfig

# name -> (window_len, encoder channels)
PROFILES: dict[str, tuple[int, list[int]]] = {
    "canonical": (16384, [16, 32, 32, 64, 64, 128, 128, 256, 256, 512, 1024]),
    "desk": (1024, [16, 32, 32, 64, 64, 128]),
    # test-only
    "tiny": (256, [8, 16, 16]),
}


def _lookup(profile: str) -> tuple[int, list[int]]:
    try:
        window_len, channels = PROFILES[profile]
    except KeyError:
        raise ValueError(
            f"Unknown model profile {profile!r}; expected one of {sorted(PROFILES)}"
        ) from None
    return window_len, list(channels)


def generator_config(profile: str) -> GeneratorConfig:
    window_len, channels = _lookup(profile)
    return GeneratorConfig(window_len=window_len, encoder_channels=channels)


def discriminator_config(profile: str) -> DiscriminatorConfig:
    """Discriminator mirrors the generator encoder widths of the same profile"""
    window_len, channels = _lookup(profile)
    return DiscriminatorConfig(window_len=window_len, channels=channels)
