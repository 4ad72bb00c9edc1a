"""Built-in simulated domains."""

from .bandit import BanditConfig, OptionBandit
from .bpod import BottomlessPit, BpodConfig, bpod_transition
from .probes import probe_ad_means, trajectories_to_frame
from .striker import StrikerConfig, StrikerEnv

EnvConfig = BpodConfig | StrikerConfig | BanditConfig


def build_environment(config: EnvConfig) -> OptionBandit | BottomlessPit | StrikerEnv:
    if isinstance(config, BpodConfig):
        return BottomlessPit(config)
    if isinstance(config, StrikerConfig):
        return StrikerEnv(config)
    if isinstance(config, BanditConfig):
        return OptionBandit(config)
    raise ValueError(f"unsupported environment config: {type(config).__name__}")


__all__ = [
    "BanditConfig",
    "BottomlessPit",
    "BpodConfig",
    "EnvConfig",
    "OptionBandit",
    "StrikerConfig",
    "StrikerEnv",
    "bpod_transition",
    "build_environment",
    "probe_ad_means",
    "trajectories_to_frame",
]
